//! The singular weight attached to a hypersurface: the value at `z` of the
//! ball-localized potential of the current of integration.
//!
//! Two independent routes compute it. The Newton route integrates the
//! even-dimensional fundamental solution over the surface patch, subtracting
//! its ball average; the log route takes `log|T(z)|` minus the ball mean of
//! `log|T|`. Their agreement is the module's principal correctness check,
//! since it is convention-free on the log side.

use num_complex::Complex;
use thiserror::Error;

use crate::algebra::{cabs, AlgebraError, ComplexVector};
use crate::hypersurface::{sample_surface_in_ball_peaked, Hypersurface, SurfaceError};
use crate::mc::{derive_seed, rng_for, unit_sphere_dir_c, BatchStats};
use crate::weights::ball_volume;
use crate::{sfrom, Scalar};

const TAG_SURF: u64 = 0x5a;
const TAG_BALL: u64 = 0x5b;
const TAG_INNER: u64 = 0x5d;
/// Radial strata per batch for ball means of integrable singular integrands.
const STRATA: usize = 32;
/// Ball points per surface sample in the Newton route's inner integral.
const INNER_POINTS: usize = 1024;
/// Surface samples carrying the inner integral; the integrand is smooth, so
/// a strided subsample suffices when the surface budget is large.
const MAX_INNER_SAMPLES: usize = 1200;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SingError {
    #[error("Newton potential undefined for n=1")]
    NewtonUndefinedN1,
    #[error("quadrature failure: partial result exceeded the analytic bound")]
    QuadratureFailure,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Which of the two computation routes produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityRoute {
    Newton,
    LogT,
}

/// Value of the singular weight with its Monte Carlo error bar; the value is
/// `-inf` exactly on the surface.
#[derive(Debug, Clone)]
pub struct SingularityValue<S: Scalar> {
    pub value: S,
    pub route: SingularityRoute,
    pub quadrature_error: S,
}

/// Normalization constant of the even-dimensional fundamental solution.
fn newton_constant<S: Scalar>(n: usize) -> S {
    // 1 / (pi^n 2^n (n-1))
    let mut denom = sfrom::<S>((n - 1) as f64);
    for _ in 0..n {
        denom = denom * S::pi() * sfrom::<S>(2.0);
    }
    S::one() / denom
}

/// Fundamental solution of the Laplacian on `R^{2n}`, `n >= 2`:
/// `-c(n) |z - zeta|^{2-2n}`. Returns `-inf` at coincident points.
pub fn newton_potential<S: Scalar>(
    z: &ComplexVector<S>,
    zeta: &ComplexVector<S>,
) -> Result<S, SingError> {
    let n = z.len();
    if n < 2 {
        return Err(SingError::NewtonUndefinedN1);
    }
    if zeta.len() != n {
        return Err(SingError::InvalidParameter("points must share a dimension"));
    }
    let d2 = (z - zeta).iter().map(|c| c.norm_sqr()).sum::<S>();
    if d2 == S::zero() {
        return Ok(sfrom(f64::NEG_INFINITY));
    }
    // |z - zeta|^{2-2n} = d2^{1-n}
    Ok(-newton_constant::<S>(n) * d2.powi(1 - n as i32))
}

/// Average of `|x - zeta|^{2-m}` over a ball of radius `R` in `R^m` whose
/// center lies at distance `d` from `zeta`; closed form from the harmonic
/// mean-value property outside the singularity and radial integration
/// inside.
pub fn mean_inverse_power_over_ball<S: Scalar>(d: S, radius: S, m: usize) -> S {
    let half_m = sfrom::<S>(m as f64 / 2.0);
    if d >= radius {
        return d.powi(2 - m as i32);
    }
    (half_m * radius * radius - (half_m - S::one()) * d * d) / radius.powi(m as i32)
}

/// Ball-localized kernel `G(z, zeta)` minus the mean of `G(zeta, .)` over
/// `B(z, r)`, by mixture-importance Monte Carlo; returns value and standard
/// error. Nonpositive up to quadrature error, and zero when `zeta` is
/// farther than `r` from the ball.
pub fn gamma_r<S: Scalar>(
    z: &ComplexVector<S>,
    zeta: &ComplexVector<S>,
    r: S,
    budget: usize,
    seed: u64,
) -> Result<(S, S), SingError> {
    let n = z.len();
    if n < 2 {
        return Err(SingError::NewtonUndefinedN1);
    }
    if r <= S::zero() {
        return Err(SingError::InvalidParameter("radius must be positive"));
    }
    let g_direct = newton_potential(z, zeta)?;
    if g_direct == sfrom(f64::NEG_INFINITY) {
        return Ok((sfrom(f64::NEG_INFINITY), S::zero()));
    }
    let (mean, err) = mean_newton_over_ball(z, zeta, r, budget, seed)?;
    Ok((g_direct - mean, err))
}

/// Monte Carlo mean of `G(zeta, x)` over `x` uniform in `B(z, r)`, with an
/// importance mixture (half uniform, half concentrated radially at `zeta`)
/// so the `|x - zeta|^{2-2n}` spike keeps bounded weights.
fn mean_newton_over_ball<S: Scalar>(
    z: &ComplexVector<S>,
    zeta: &ComplexVector<S>,
    r: S,
    budget: usize,
    seed: u64,
) -> Result<(S, S), SingError> {
    let n = z.len();
    let m = 2 * n;
    let c = newton_constant::<S>(n);
    let d = crate::algebra::vnorm(&(z - zeta));
    let vol = ball_volume(n, r);
    // covering radius for the concentrated component
    let rho = d + r;
    let unit_vol_m = ball_volume(n, S::one());
    let sphere_area = |s: S| sfrom::<S>(m as f64) * unit_vol_m * s.powi(m as i32 - 1);
    let half = sfrom::<S>(0.5);

    let batches = budget.div_ceil(STRATA).max(2);
    let mut stats = BatchStats::new();
    for b in 0..batches {
        let mut rng = rng_for(seed, &[TAG_BALL, b as u64]);
        let mut acc = S::zero();
        for k in 0..STRATA {
            let from_uniform = k % 2 == 0;
            let x: ComplexVector<S> = if from_uniform {
                let dir = unit_sphere_dir_c::<S, _>(&mut rng, n);
                let u: f64 = rand::Rng::gen(&mut rng);
                let rad = r * sfrom::<S>(u.powf(1.0 / m as f64));
                z + dir.map(|cc| cc * Complex::new(rad, S::zero()))
            } else {
                // radius density 2s/rho^2: cancels the kernel's s^{2-m}
                // against the s^{m-1} surface factor
                let dir = unit_sphere_dir_c::<S, _>(&mut rng, n);
                let u: f64 = rand::Rng::gen(&mut rng);
                let rad = rho * sfrom::<S>(u.sqrt());
                zeta + dir.map(|cc| cc * Complex::new(rad, S::zero()))
            };
            let in_ball = crate::algebra::vnorm(&(&x - z)) < r;
            if !in_ball {
                continue;
            }
            let s2 = (&x - zeta).iter().map(|cc| cc.norm_sqr()).sum::<S>();
            if s2 == S::zero() {
                continue;
            }
            let g = -c * s2.powi(1 - n as i32);
            let s = s2.sqrt();
            // mixture density at x
            let q_uniform = S::one() / vol;
            let q_conc = if s < rho {
                (sfrom::<S>(2.0) * s / (rho * rho)) / sphere_area(s)
            } else {
                S::zero()
            };
            let q = half * q_uniform + half * q_conc;
            acc += g * q_uniform / q;
        }
        stats.push(acc / sfrom::<S>(STRATA as f64));
    }
    let mean = stats.mean();
    // Analytic magnitude of the same integral; a healthy estimate cannot
    // exceed it by much.
    let cap = c * mean_inverse_power_over_ball(d, r, m);
    if mean.abs() > sfrom::<S>(3.0) * cap + sfrom::<S>(1e-9) {
        return Err(SingError::QuadratureFailure);
    }
    Ok((mean, stats.std_error()))
}

/// Singular weight by the Newton route: `pi` times the surface integral of
/// the ball-localized kernel over `W ∩ B(z, r)`.
pub fn s_r_newton<S: Scalar>(
    h: &Hypersurface<S>,
    z: &ComplexVector<S>,
    r: S,
    budget: usize,
    seed: u64,
) -> Result<SingularityValue<S>, SingError> {
    let n = h.dimension();
    if n < 2 {
        return Err(SingError::NewtonUndefinedN1);
    }
    if r <= S::zero() {
        return Err(SingError::InvalidParameter("radius must be positive"));
    }
    if h.on_surface(z, sfrom(1e-10))? {
        return Ok(SingularityValue {
            value: sfrom(f64::NEG_INFINITY),
            route: SingularityRoute::Newton,
            quadrature_error: S::zero(),
        });
    }
    let sampling = sample_surface_in_ball_peaked(h, z, r, budget, derive_seed(seed, &[TAG_SURF]))?;
    if sampling.samples.is_empty() {
        return Ok(SingularityValue {
            value: S::zero(),
            route: SingularityRoute::Newton,
            quadrature_error: S::zero(),
        });
    }
    // Rescales the reference kernel to the true fundamental solution of the
    // Laplacian on R^{2n} and applies the 2 pi mass of log|.| per zero, so
    // the route matches the log route identically: 2 pi (n-1)! 2^{n-2}.
    let mut kappa = sfrom::<S>(2.0) * S::pi();
    for j in 2..n {
        kappa *= sfrom::<S>((2 * j) as f64);
    }

    // Direct term: the kernel against surface measure, evaluated at every
    // sample (cheap); its error comes from batch spread.
    let direct = |p: &crate::algebra::ComplexVector<S>| -> Result<S, SingError> {
        match newton_potential(z, p)? {
            // a sample exactly at z contradicts the surface-distance guard
            g if g == sfrom(f64::NEG_INFINITY) => Err(SingError::QuadratureFailure),
            g => Ok(g),
        }
    };
    let mut term1 = S::zero();
    let mut outer = BatchStats::new();
    {
        let nb = sampling.batch_ends.len();
        let scale = sfrom::<S>(nb as f64);
        let mut start = 0;
        for &end in &sampling.batch_ends {
            let mut val = S::zero();
            for i in start..end {
                val += kappa * sampling.samples[i].area_weight * direct(&sampling.samples[i].point)?;
            }
            term1 += val;
            if nb >= 2 {
                outer.push(val * scale);
            }
            start = end;
        }
    }

    // Ball-mean term: smooth in the surface point, so a strided subsample
    // carries the inner Monte Carlo without losing accuracy.
    let total = sampling.samples.len();
    let stride = total.div_ceil(MAX_INNER_SAMPLES);
    let mut term2 = S::zero();
    let mut inner_var = S::zero();
    let mut sub_vals: Vec<S> = Vec::new();
    let stride_s = sfrom::<S>(stride as f64);
    for (i, smp) in sampling.samples.iter().enumerate().step_by(stride) {
        let s_inner = derive_seed(seed, &[TAG_INNER, i as u64]);
        let (mean, e) = mean_newton_over_ball(z, &smp.point, r, INNER_POINTS, s_inner)?;
        let wk = kappa * stride_s * smp.area_weight;
        term2 += wk * mean;
        inner_var += wk * wk * e * e;
        sub_vals.push(wk * mean);
    }
    // Var(sum) for an iid-style subsample: m/(m-1) times the squared spread.
    let sub_var = if sub_vals.len() >= 2 {
        let m = sfrom::<S>(sub_vals.len() as f64);
        let mu = term2 / m;
        sub_vals.iter().map(|&v| (v - mu) * (v - mu)).sum::<S>() * m / (m - S::one())
    } else {
        S::zero()
    };

    let value = term1 - term2;
    let err = (outer.std_error() * outer.std_error() + inner_var + sub_var).sqrt();
    Ok(SingularityValue { value, route: SingularityRoute::Newton, quadrature_error: err })
}

/// Stratified-shell Monte Carlo mean of `log|f|` over `B(z, r)` in `C^n`.
/// Points where `f` vanishes exactly are skipped (a measure-zero set).
pub fn ball_mean_log_abs<S: Scalar>(
    n: usize,
    z: &ComplexVector<S>,
    r: S,
    budget: usize,
    seed: u64,
    f: &dyn Fn(&ComplexVector<S>) -> Complex<S>,
) -> Result<(S, S), SingError> {
    if r <= S::zero() {
        return Err(SingError::InvalidParameter("radius must be positive"));
    }
    let exponent = 1.0 / (2 * n) as f64;
    let batches = budget.div_ceil(STRATA).max(2);
    let mut stats = BatchStats::new();
    for b in 0..batches {
        let mut rng = rng_for(seed, &[TAG_BALL, b as u64]);
        let mut acc = S::zero();
        let mut used = 0usize;
        for k in 0..STRATA {
            let u: f64 = rand::Rng::gen(&mut rng);
            let frac = ((k as f64 + u) / STRATA as f64).powf(exponent);
            let dir = unit_sphere_dir_c::<S, _>(&mut rng, n);
            let x = z + dir.map(|c| c * Complex::new(r * sfrom::<S>(frac), S::zero()));
            let v = cabs(f(&x));
            if v == S::zero() {
                continue;
            }
            acc += v.ln();
            used += 1;
        }
        if used > 0 {
            stats.push(acc / sfrom::<S>(used as f64));
        }
    }
    Ok((stats.mean(), stats.std_error()))
}

/// Singular weight by the log route: `log|T(z)|` minus the ball mean of
/// `log|T|`. Valid in every dimension.
pub fn s_r_log_t<S: Scalar>(
    h: &Hypersurface<S>,
    z: &ComplexVector<S>,
    r: S,
    budget: usize,
    seed: u64,
) -> Result<SingularityValue<S>, SingError> {
    if r <= S::zero() {
        return Err(SingError::InvalidParameter("radius must be positive"));
    }
    let (tval, _) = h.value_and_gradient(z)?;
    if cabs(tval) == S::zero() {
        return Ok(SingularityValue {
            value: sfrom(f64::NEG_INFINITY),
            route: SingularityRoute::LogT,
            quadrature_error: S::zero(),
        });
    }
    let f = |x: &ComplexVector<S>| {
        h.value_and_gradient(x)
            .map(|(v, _)| v)
            .unwrap_or_else(|_| Complex::new(S::zero(), S::zero()))
    };
    let (mean, err) =
        ball_mean_log_abs(h.dimension(), z, r, budget, derive_seed(seed, &[TAG_BALL]), &f)?;
    Ok(SingularityValue {
        value: cabs(tval).ln() - mean,
        route: SingularityRoute::LogT,
        quadrature_error: err,
    })
}
