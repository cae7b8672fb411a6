use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{SystemSpec, VectorField};
use crate::error::{Error, Result};
use crate::forecast::{within_bound, DIVERGENCE_BOUND};
use crate::trajectory::Trajectory;

/// Additive Gaussian process noise on the right-hand side: `f(x) + magnitude * eps`,
/// `eps ~ N(0, I)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub magnitude: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase", deny_unknown_fields)]
pub enum Integrator {
    /// Adaptive Bogacki–Shampine 3(2) with cubic Hermite dense output.
    Rk23 { rtol: f64, atol: f64 },
    /// Classic fixed-step fourth-order Runge–Kutta, one step per sample.
    Rk4,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator::Rk23 { rtol: 1e-6, atol: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrateOptions {
    pub integrator: Integrator,
    pub divergence_bound: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { integrator: Integrator::default(), divergence_bound: DIVERGENCE_BOUND }
    }
}

/// Integrates with the default options (RK23, rtol 1e-6, atol 1e-9).
pub fn integrate(
    spec: &SystemSpec,
    x0: [f64; 3],
    dt: f64,
    n_steps: usize,
    noise: Option<&NoiseConfig>,
) -> Result<Trajectory> {
    integrate_with(spec, x0, dt, n_steps, noise, &IntegrateOptions::default())
}

/// Samples `n_steps` states at `t = i * dt`, starting from `x0` at `t = 0`.
///
/// Noisy runs always step at `dt` with RK4, drawing one Gaussian vector per
/// step and holding it fixed across the internal stages. A zero magnitude
/// is treated exactly like no noise.
pub fn integrate_with(
    spec: &SystemSpec,
    x0: [f64; 3],
    dt: f64,
    n_steps: usize,
    noise: Option<&NoiseConfig>,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput("dt must be positive".into()));
    }
    if n_steps == 0 {
        return Err(Error::InvalidInput("n_steps must be at least 1".into()));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("initial condition must be finite".into()));
    }
    let field = spec.vector_field()?;
    let bound = opts.divergence_bound;
    if !within_bound(&x0, bound) {
        return Err(Error::Diverged { step: 0 });
    }

    let noise = noise.filter(|n| n.magnitude != 0.0);
    if let Some(n) = noise {
        if !(n.magnitude > 0.0 && n.magnitude.is_finite()) {
            return Err(Error::InvalidInput("noise magnitude must be finite and non-negative".into()));
        }
    }

    let mut data = Vec::with_capacity(n_steps * 3);
    data.extend_from_slice(&x0);
    match (noise, opts.integrator) {
        (Some(n), _) => fixed_rk4(&field, x0, dt, n_steps, Some(n), bound, &mut data)?,
        (None, Integrator::Rk4) => fixed_rk4(&field, x0, dt, n_steps, None, bound, &mut data)?,
        (None, Integrator::Rk23 { rtol, atol }) => {
            if !(rtol > 0.0 && atol > 0.0) {
                return Err(Error::InvalidInput("tolerances must be positive".into()));
            }
            adaptive_rk23(&field, x0, dt, n_steps, rtol, atol, bound, &mut data)?
        }
    }
    Trajectory::new(dt, 0.0, 3, data)
}

#[inline]
fn axpy(y: &[f64; 3], h: f64, k: &[f64; 3]) -> [f64; 3] {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]]
}

fn fixed_rk4(
    field: &VectorField,
    x0: [f64; 3],
    dt: f64,
    n_steps: usize,
    noise: Option<&NoiseConfig>,
    bound: f64,
    out: &mut Vec<f64>,
) -> Result<()> {
    let mut rng = noise.map(|n| (ChaCha8Rng::seed_from_u64(n.seed), n.magnitude));
    let mut y = x0;
    for step in 1..n_steps {
        let drift = match rng.as_mut() {
            Some((rng, mag)) => {
                let mut e = [0.0; 3];
                for v in &mut e {
                    let z: f64 = StandardNormal.sample(rng);
                    *v = *mag * z;
                }
                e
            }
            None => [0.0; 3],
        };
        let f = |s: &[f64; 3]| {
            let d = field.eval(s);
            [d[0] + drift[0], d[1] + drift[1], d[2] + drift[2]]
        };
        let k1 = f(&y);
        let k2 = f(&axpy(&y, 0.5 * dt, &k1));
        let k3 = f(&axpy(&y, 0.5 * dt, &k2));
        let k4 = f(&axpy(&y, dt, &k3));
        for i in 0..3 {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !within_bound(&y, bound) {
            return Err(Error::Diverged { step });
        }
        out.extend_from_slice(&y);
    }
    Ok(())
}

fn error_norm(err: &[f64; 3], y0: &[f64; 3], y1: &[f64; 3], rtol: f64, atol: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        let scale = atol + rtol * y0[i].abs().max(y1[i].abs());
        let e = err[i] / scale;
        acc += e * e;
    }
    libm::sqrt(acc / 3.0)
}

fn rms_scaled(v: &[f64; 3], y: &[f64; 3], rtol: f64, atol: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        let e = v[i] / (atol + rtol * y[i].abs());
        acc += e * e;
    }
    libm::sqrt(acc / 3.0)
}

/// Hairer–Wanner starting step heuristic.
fn initial_step(field: &VectorField, y0: &[f64; 3], f0: &[f64; 3], rtol: f64, atol: f64) -> f64 {
    let d0 = rms_scaled(y0, y0, rtol, atol);
    let d1 = rms_scaled(f0, y0, rtol, atol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = axpy(y0, h0, f0);
    let f1 = field.eval(&y1);
    let diff = [f1[0] - f0[0], f1[1] - f0[1], f1[2] - f0[2]];
    let d2 = rms_scaled(&diff, y0, rtol, atol) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        libm::pow(0.01 / d1.max(d2), 1.0 / 3.0)
    };
    (100.0 * h0).min(h1)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_rk23(
    field: &VectorField,
    x0: [f64; 3],
    dt: f64,
    n_steps: usize,
    rtol: f64,
    atol: f64,
    bound: f64,
    out: &mut Vec<f64>,
) -> Result<()> {
    const SAFETY: f64 = 0.9;
    const MIN_FACTOR: f64 = 0.2;
    const MAX_FACTOR: f64 = 10.0;

    let t_end = (n_steps - 1) as f64 * dt;
    let mut next = 1usize;
    let mut t = 0.0f64;
    let mut y = x0;
    let mut f0 = field.eval(&y);
    let mut h = initial_step(field, &y, &f0, rtol, atol);

    while next < n_steps {
        let mut rejected = false;
        let (t_new, y1, f1, h_used) = loop {
            let min_step = 16.0 * f64::EPSILON * t.abs().max(1.0);
            if !(h >= min_step) {
                return Err(Error::Diverged { step: next });
            }
            let (h_try, t_try) = if t + h >= t_end { (t_end - t, t_end) } else { (h, t + h) };

            let k1 = f0;
            let k2 = field.eval(&axpy(&y, 0.5 * h_try, &k1));
            let k3 = field.eval(&axpy(&y, 0.75 * h_try, &k2));
            let mut y1 = [0.0; 3];
            for i in 0..3 {
                y1[i] = y[i] + h_try * (2.0 / 9.0 * k1[i] + 1.0 / 3.0 * k2[i] + 4.0 / 9.0 * k3[i]);
            }
            let k4 = field.eval(&y1);
            let mut err = [0.0; 3];
            for i in 0..3 {
                err[i] = h_try
                    * (-5.0 / 72.0 * k1[i] + 1.0 / 12.0 * k2[i] + 1.0 / 9.0 * k3[i] - 1.0 / 8.0 * k4[i]);
            }
            let en = error_norm(&err, &y, &y1, rtol, atol);
            if en.is_finite() && en <= 1.0 && y1.iter().all(|v| v.is_finite()) {
                let mut factor = if en == 0.0 { MAX_FACTOR } else { (SAFETY * libm::pow(en, -1.0 / 3.0)).min(MAX_FACTOR) };
                if rejected {
                    factor = factor.min(1.0);
                }
                h = h_try * factor;
                break (t_try, y1, k4, h_try);
            }
            let factor = if en.is_finite() { (SAFETY * libm::pow(en, -1.0 / 3.0)).max(MIN_FACTOR) } else { MIN_FACTOR };
            h = h_try * factor;
            rejected = true;
        };

        while next < n_steps {
            let t_out = next as f64 * dt;
            if t_out > t_new {
                break;
            }
            let row = if t_out == t_new {
                y1
            } else {
                hermite(&y, &f0, &y1, &f1, h_used, (t_out - t) / h_used)
            };
            if !within_bound(&row, bound) {
                return Err(Error::Diverged { step: next });
            }
            out.extend_from_slice(&row);
            next += 1;
        }
        if !within_bound(&y1, bound) {
            return Err(Error::Diverged { step: next });
        }
        t = t_new;
        y = y1;
        f0 = f1;
    }
    Ok(())
}

#[inline]
fn hermite(y0: &[f64; 3], f0: &[f64; 3], y1: &[f64; 3], f1: &[f64; 3], h: f64, theta: f64) -> [f64; 3] {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + theta;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{make_benchmark, SystemId};

    fn max_diff_every_other(fine: &Trajectory, coarse: &Trajectory, rows: usize) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..rows {
            for (a, b) in coarse.row(i).iter().zip(fine.row(2 * i)) {
                worst = worst.max((a - b).abs());
            }
        }
        worst
    }

    #[test]
    fn single_step_is_initial_condition() {
        for id in SystemId::ALL {
            let (spec, x0) = make_benchmark(id);
            let t = integrate(&spec, x0, 0.01, 1, None).unwrap();
            assert_eq!(t.len(), 1);
            assert_eq!(t.row(0), &x0);
        }
    }

    #[test]
    fn lorenz_benchmark_shape() {
        let (spec, x0) = make_benchmark(SystemId::Lorenz);
        let t = integrate(&spec, x0, 0.01, 5000, None).unwrap();
        assert_eq!(t.len(), 5000);
        assert_eq!(t.dim(), 3);
        assert_eq!(t.row(0), &x0);
        assert_eq!(t.time(4999), 4999.0 * 0.01);
        assert!(t.is_finite());
        let zmax = t.column(2).fold(f64::MIN, f64::max);
        let zmin = t.column(2).fold(f64::MAX, f64::min);
        assert!(zmin > 0.0 && zmax < 50.0, "z range {zmin}..{zmax}");
    }

    #[test]
    fn every_benchmark_stays_bounded() {
        for id in SystemId::ALL {
            let (spec, x0) = make_benchmark(id);
            let t = integrate(&spec, x0, 0.01, 10_000, None).unwrap();
            assert!(t.rows().all(|r| within_bound(r, 300.0)), "{id}");
        }
    }

    #[test]
    fn half_step_self_convergence_rk23() {
        let (spec, x0) = make_benchmark(SystemId::Lorenz);
        let coarse = integrate(&spec, x0, 0.01, 2000, None).unwrap();
        let fine = integrate(&spec, x0, 0.005, 4000, None).unwrap();
        assert!(max_diff_every_other(&fine, &coarse, 500) < 1e-3);
    }

    #[test]
    fn half_step_self_convergence_rk4() {
        let (spec, x0) = make_benchmark(SystemId::Lorenz);
        let opts = IntegrateOptions { integrator: Integrator::Rk4, ..Default::default() };
        let coarse = integrate_with(&spec, x0, 0.01, 2000, None, &opts).unwrap();
        let fine = integrate_with(&spec, x0, 0.005, 4000, None, &opts).unwrap();
        assert!(max_diff_every_other(&fine, &coarse, 500) < 1e-3);
    }

    #[test]
    fn tolerance_tightening_agrees_early_on() {
        // The integrator should converge towards a tighter reference run.
        let (spec, x0) = make_benchmark(SystemId::Lorenz);
        let reference = integrate_with(
            &spec,
            x0,
            0.01,
            200,
            None,
            &IntegrateOptions { integrator: Integrator::Rk23 { rtol: 1e-10, atol: 1e-12 }, ..Default::default() },
        )
        .unwrap();
        let default = integrate(&spec, x0, 0.01, 200, None).unwrap();
        let worst = reference
            .as_slice()
            .iter()
            .zip(default.as_slice())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(worst < 5e-3, "{worst}");
    }

    #[test]
    fn zero_noise_matches_noise_free() {
        let (spec, x0) = make_benchmark(SystemId::Lorenz);
        let clean = integrate(&spec, x0, 0.01, 300, None).unwrap();
        let zero = integrate(&spec, x0, 0.01, 300, Some(&NoiseConfig { magnitude: 0.0, seed: 9 })).unwrap();
        assert_eq!(clean, zero);
    }

    #[test]
    fn noisy_runs_are_seed_deterministic() {
        let (spec, x0) = make_benchmark(SystemId::Lorenz);
        let n = NoiseConfig { magnitude: 1.0, seed: 3 };
        let a = integrate(&spec, x0, 0.01, 1000, Some(&n)).unwrap();
        let b = integrate(&spec, x0, 0.01, 1000, Some(&n)).unwrap();
        assert_eq!(a, b);
        let c = integrate(&spec, x0, 0.01, 1000, Some(&NoiseConfig { seed: 4, ..n })).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn blow_up_reports_step() {
        // Rössler with a huge c drives z away exponentially.
        let spec = SystemSpec::new(SystemId::Rossler, [0.2, 0.2, -50.0]);
        let err = integrate(&spec, [1.0, 1.0, 1.0], 0.01, 10_000, None).unwrap_err();
        assert!(matches!(err, Error::Diverged { step } if step > 0 && step < 10_000), "{err:?}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let (spec, x0) = make_benchmark(SystemId::Lorenz);
        assert!(integrate(&spec, x0, 0.0, 10, None).is_err());
        assert!(integrate(&spec, x0, 0.01, 0, None).is_err());
        assert!(integrate(&spec, [f64::NAN, 0.0, 0.0], 0.01, 10, None).is_err());
    }
}
