use crate::trajectory::Trajectory;

/// Norm above which a state or prediction counts as blown up. The four
/// benchmark attractors all live well inside a ball of radius 300.
pub const DIVERGENCE_BOUND: f64 = 1e6;

/// Output of a closed-loop rollout.
///
/// When the rollout leaves the finite, bounded region the trajectory is
/// truncated just before the offending step and `diverged_at` records it.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    pub trajectory: Trajectory,
    pub diverged_at: Option<usize>,
}

impl Forecast {
    pub fn is_bounded(&self) -> bool {
        self.diverged_at.is_none()
    }

    pub fn len(&self) -> usize {
        self.trajectory.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectory.is_empty()
    }
}

/// True when every component is finite and the Euclidean norm stays under `bound`.
pub(crate) fn within_bound(row: &[f64], bound: f64) -> bool {
    let mut sq = 0.0;
    for &v in row {
        if !v.is_finite() {
            return false;
        }
        sq += v * v;
    }
    libm::sqrt(sq) <= bound
}
