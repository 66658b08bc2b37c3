//! The averaged current form of a hypersurface over a ball, and the density
//! obtained by comparing it with the complex Hessian of the smoothed weight.
//!
//! The form is estimated by two independent routes: the surface route sums
//! normal projectors over weighted surface samples, and the slicing route
//! averages line intersection counts per direction, recovering off-diagonal
//! entries by polarization. Each intersection (and each unit of surface
//! measure) carries a factor of pi, validated by the one-variable mollified
//! Laplacian oracle in the tests.

use nalgebra::DVector;
use num_complex::Complex;
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{
    hdot, max_gen_eig, AlgebraError, ComplexVector, HermitianForm,
};
use crate::hypersurface::{
    batch_functional, line_intersections_in_ball, sample_surface_in_ball, Hypersurface,
    SurfaceError,
};
use crate::mc::{derive_seed, rng_for, unit_ball_point_c, BatchStats};
use crate::weights::{ball_volume, levi_form, Weight};
use crate::{sfrom, Scalar};

const TAG_SLICE: u64 = 0x51;
const TAG_SCAN: u64 = 0x5c;
const LINES_PER_BATCH: usize = 32;

/// Printed next to scan output: the limits defining the asymptotic densities
/// are not computable from a finite window.
pub const FINITE_WINDOW_NOTE: &str =
    "finite-window estimate of the asymptotic densities; no limit is taken";

#[derive(Error, Debug, Clone, PartialEq)]
pub enum DensityError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("degenerate pencil: smoothed weight Hessian is numerically singular")]
    DegeneratePencil,
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Algebra(AlgebraError),
}

impl From<AlgebraError> for DensityError {
    fn from(e: AlgebraError) -> Self {
        match e {
            AlgebraError::IndefiniteDenominator => DensityError::DegeneratePencil,
            other => DensityError::Algebra(other),
        }
    }
}

/// Estimation route for the averaged current form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpsilonMethod {
    /// Normal projectors over weighted surface samples.
    Surface,
    /// Direction-wise line counts assembled by polarization.
    Slicing,
}

/// Averaged current form plus a scalar quality indicator.
#[derive(Debug, Clone)]
pub struct UpsilonEstimate<S: Scalar> {
    pub form: HermitianForm<S>,
    /// Standard error of the trace of `form` (batch spread).
    pub trace_std_error: S,
}

/// Density of the surface against the weight in one ball.
#[derive(Debug, Clone)]
pub struct DensityReport<S: Scalar> {
    pub center: ComplexVector<S>,
    pub radius: S,
    pub upsilon: HermitianForm<S>,
    /// Complex Hessian of the ball-averaged weight at the center; equals the
    /// weight's quadratic form exactly for quadratic weights.
    pub levi_r: HermitianForm<S>,
    pub density: S,
    pub max_direction: ComplexVector<S>,
    pub mc_std_error: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrendLabel {
    Decreasing,
    Increasing,
    Flat,
    Mixed,
}

/// Direction of a scan sequence plus a 1/r^2 Richardson extrapolation of its
/// tail (an estimate, never a certified limit).
#[derive(Debug, Clone)]
pub struct Trend<S: Scalar> {
    pub label: TrendLabel,
    pub richardson_limit: Option<S>,
}

/// Grid of density reports over centers and ascending radii.
#[derive(Debug, Clone)]
pub struct ScanReport<S: Scalar> {
    pub radii: Vec<S>,
    /// `reports[center_index][radius_index]`.
    pub reports: Vec<Vec<DensityReport<S>>>,
    pub sup_per_radius: Vec<S>,
    pub inf_per_radius: Vec<S>,
    pub sup_trend: Trend<S>,
    pub inf_trend: Trend<S>,
}

/// Averaged current form of `W` over `B(z,r)` by the requested route.
pub fn upsilon<S: Scalar>(
    h: &Hypersurface<S>,
    z: &ComplexVector<S>,
    r: S,
    method: UpsilonMethod,
    budget: usize,
    seed: u64,
) -> Result<UpsilonEstimate<S>, DensityError> {
    if r <= S::zero() {
        return Err(DensityError::InvalidParameter("radius must be positive"));
    }
    match method {
        UpsilonMethod::Surface => upsilon_surface(h, z, r, budget, seed),
        UpsilonMethod::Slicing => upsilon_slicing(h, z, r, budget, seed),
    }
}

fn upsilon_surface<S: Scalar>(
    h: &Hypersurface<S>,
    z: &ComplexVector<S>,
    r: S,
    budget: usize,
    seed: u64,
) -> Result<UpsilonEstimate<S>, DensityError> {
    let n = h.dimension();
    let sampling = sample_surface_in_ball(h, z, r, budget, seed)?;
    let scale = S::pi() / ball_volume(n, r);
    let mut form = HermitianForm::zeros(n);
    for s in &sampling.samples {
        form.accumulate_projector(&s.unit_normal, scale * s.area_weight);
    }
    let (_, trace_err) = batch_functional(&sampling, |s| scale * s.area_weight);
    Ok(UpsilonEstimate { form, trace_std_error: trace_err })
}

/// Quadratic value of the averaged current form along one direction,
/// estimated by counting intersections with lines parallel to `v`; returns
/// the estimate and its standard error. Exact in one variable.
pub fn upsilon_direction<S: Scalar>(
    h: &Hypersurface<S>,
    z: &ComplexVector<S>,
    r: S,
    v: &ComplexVector<S>,
    budget: usize,
    seed: u64,
) -> Result<(S, S), DensityError> {
    if r <= S::zero() {
        return Err(DensityError::InvalidParameter("radius must be positive"));
    }
    let n = h.dimension();
    let vol = ball_volume(n, r);
    if n == 1 {
        let count = line_intersections_in_ball(h, z, v, z, r)?;
        return Ok((S::pi() * sfrom::<S>(count as f64) / vol, S::zero()));
    }
    let vn = crate::algebra::vnorm(v);
    if vn <= S::zero() {
        return Err(DensityError::InvalidParameter("direction must be nonzero"));
    }
    let vhat: ComplexVector<S> = v.map(|c| c / Complex::new(vn, S::zero()));
    let basis = orthogonal_complement(&vhat);
    let a_cross = ball_volume(n - 1, r);
    let scale = S::pi() * a_cross / vol;

    let batches = budget.div_ceil(LINES_PER_BATCH).max(2);
    let mut stats = BatchStats::new();
    for b in 0..batches {
        let mut rng = rng_for(seed, &[TAG_SLICE, b as u64]);
        let mut total = 0usize;
        for _ in 0..LINES_PER_BATCH {
            let u = unit_ball_point_c::<S, _>(&mut rng, n - 1);
            let mut y = z.clone();
            for (j, bas) in basis.iter().enumerate() {
                y += bas.map(|c| c * (u[j] * Complex::new(r, S::zero())));
            }
            total += line_intersections_in_ball(h, &y, &vhat, z, r)?;
        }
        stats.push(scale * sfrom::<S>(total as f64) / sfrom::<S>(LINES_PER_BATCH as f64));
    }
    Ok((stats.mean(), stats.std_error()))
}

/// Orthonormal basis of the complex orthogonal complement of unit `v`.
fn orthogonal_complement<S: Scalar>(v: &ComplexVector<S>) -> Vec<ComplexVector<S>> {
    let n = v.len();
    let mut basis: Vec<ComplexVector<S>> = Vec::with_capacity(n - 1);
    for i in 0..n {
        if basis.len() == n - 1 {
            break;
        }
        let mut w: ComplexVector<S> = DVector::zeros(n);
        w[i] = Complex::new(S::one(), S::zero());
        let c = hdot(&w, v);
        w -= v.map(|x| x * c);
        for b in &basis {
            let cb = hdot(&w, b);
            w -= b.map(|x| x * cb);
        }
        let nw = crate::algebra::vnorm(&w);
        if nw > sfrom(1e-8) {
            w /= Complex::new(nw, S::zero());
            basis.push(w);
        }
    }
    basis
}

fn upsilon_slicing<S: Scalar>(
    h: &Hypersurface<S>,
    z: &ComplexVector<S>,
    r: S,
    budget: usize,
    seed: u64,
) -> Result<UpsilonEstimate<S>, DensityError> {
    let n = h.dimension();
    if n == 1 {
        let e = DVector::from_element(1, Complex::new(S::one(), S::zero()));
        let (q, _) = upsilon_direction(h, z, r, &e, budget, seed)?;
        let mut form = HermitianForm::zeros(1);
        form.accumulate_projector(&e, q);
        return Ok(UpsilonEstimate { form, trace_std_error: S::zero() });
    }
    // n diagonal directions plus 4 mixed directions per (i, j) pair.
    let estimates = n + 2 * n * (n - 1);
    let per_dir = (budget / estimates).max(2 * LINES_PER_BATCH);
    let quarter = sfrom::<S>(0.25);
    let mut dir_index = 0u64;
    let mut run = |v: &ComplexVector<S>| -> Result<(S, S), DensityError> {
        let s = derive_seed(seed, &[TAG_SLICE, dir_index]);
        dir_index += 1;
        upsilon_direction(h, z, r, v, per_dir, s)
    };

    let mut matrix = nalgebra::DMatrix::<Complex<S>>::zeros(n, n);
    let mut var_trace = S::zero();
    let mut diag_err = vec![S::zero(); n];
    for i in 0..n {
        let mut e: ComplexVector<S> = DVector::zeros(n);
        e[i] = Complex::new(S::one(), S::zero());
        let (q, err) = run(&e)?;
        matrix[(i, i)] = Complex::new(q, S::zero());
        var_trace += err * err;
        diag_err[i] = err;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut xpy: ComplexVector<S> = DVector::zeros(n);
            xpy[i] = Complex::new(S::one(), S::zero());
            xpy[j] = Complex::new(S::one(), S::zero());
            let mut xmy = xpy.clone();
            xmy[j] = Complex::new(-S::one(), S::zero());
            let mut xpiy = xpy.clone();
            xpiy[j] = Complex::new(S::zero(), S::one());
            let mut xmiy = xpy.clone();
            xmiy[j] = Complex::new(S::zero(), -S::one());
            // Each direction has norm sqrt(2); the slicing estimate applies
            // to the normalized direction, so scale quadratic values by 2.
            let (qpp, _) = run(&xpy)?;
            let (qmm, _) = run(&xmy)?;
            let (qpi, _) = run(&xpiy)?;
            let (qmi, _) = run(&xmiy)?;
            let two = sfrom::<S>(2.0);
            let re = quarter * two * (qpp - qmm);
            let im = quarter * two * (qpi - qmi);
            let hij = Complex::new(re, im);
            matrix[(i, j)] = hij;
            matrix[(j, i)] = hij.conj();
        }
    }
    Ok(UpsilonEstimate {
        form: HermitianForm::new(matrix),
        trace_std_error: var_trace.sqrt(),
    })
}

/// Density of `W` against the weight in `B(z,r)`: the largest generalized
/// eigenvalue of the averaged current form against the smoothed-weight
/// Hessian.
pub fn density_at<S: Scalar>(
    h: &Hypersurface<S>,
    w: &Weight<S>,
    z: &ComplexVector<S>,
    r: S,
    budget: usize,
    seed: u64,
) -> Result<DensityReport<S>, DensityError> {
    if w.dimension() != h.dimension() {
        return Err(DensityError::InvalidParameter(
            "weight and hypersurface dimensions differ",
        ));
    }
    let est = upsilon(h, z, r, UpsilonMethod::Surface, budget, seed)?;
    let levi_r = levi_form(w, z);
    let (lambda, direction) = max_gen_eig(&est.form, &levi_r)?;
    let density = if lambda > S::zero() { lambda } else { S::zero() };
    Ok(DensityReport {
        center: z.clone(),
        radius: r,
        upsilon: est.form,
        levi_r,
        density,
        max_direction: direction,
        mc_std_error: est.trace_std_error,
    })
}

fn trend_of<S: Scalar>(values: &[S], radii: &[S]) -> Trend<S> {
    let m = values.len();
    let scale = values
        .iter()
        .fold(S::one(), |a, &b| if b.abs() > a { b.abs() } else { a });
    let tol = sfrom::<S>(1e-9) * scale;
    let mut dec = true;
    let mut inc = true;
    let mut flat = true;
    for k in 1..m {
        let d = values[k] - values[k - 1];
        if d >= -tol {
            dec = false;
        }
        if d <= tol {
            inc = false;
        }
        if d.abs() > tol {
            flat = false;
        }
    }
    let label = if m < 2 {
        TrendLabel::Flat
    } else if flat {
        TrendLabel::Flat
    } else if dec {
        TrendLabel::Decreasing
    } else if inc {
        TrendLabel::Increasing
    } else {
        TrendLabel::Mixed
    };
    // Model value(r) = limit + c / r^2 and eliminate c with the last two radii.
    let richardson_limit = if m >= 2 {
        let (r1, r2) = (radii[m - 2], radii[m - 1]);
        let (s1, s2) = (values[m - 2], values[m - 1]);
        let (w1, w2) = (r1 * r1, r2 * r2);
        if (w2 - w1).abs() > sfrom(1e-12) {
            Some((w2 * s2 - w1 * s1) / (w2 - w1))
        } else {
            None
        }
    } else {
        None
    };
    Trend { label, richardson_limit }
}

/// Density over a (centers x radii) grid with per-cell derived seeds; cells
/// are evaluated concurrently and merged in deterministic grid order.
pub fn density_scan<S: Scalar>(
    h: &Hypersurface<S>,
    w: &Weight<S>,
    centers: &[ComplexVector<S>],
    radii: &[S],
    budget: usize,
    seed: u64,
) -> Result<ScanReport<S>, DensityError> {
    if centers.is_empty() {
        return Err(DensityError::InvalidParameter("centers must be nonempty"));
    }
    if radii.is_empty() {
        return Err(DensityError::InvalidParameter("radii must be nonempty"));
    }
    if radii.windows(2).any(|p| p[1] <= p[0]) {
        return Err(DensityError::InvalidParameter("radii must be strictly ascending"));
    }
    let cells: Vec<(usize, usize)> = (0..centers.len())
        .flat_map(|ci| (0..radii.len()).map(move |ri| (ci, ri)))
        .collect();
    let computed: Result<Vec<DensityReport<S>>, DensityError> = cells
        .par_iter()
        .map(|&(ci, ri)| {
            let cell_seed = derive_seed(seed, &[TAG_SCAN, ci as u64, ri as u64]);
            density_at(h, w, &centers[ci], radii[ri], budget, cell_seed)
        })
        .collect();
    let computed = computed?;
    let mut reports: Vec<Vec<DensityReport<S>>> = Vec::with_capacity(centers.len());
    for chunk in computed.chunks(radii.len()) {
        reports.push(chunk.to_vec());
    }
    let mut sup_per_radius = Vec::with_capacity(radii.len());
    let mut inf_per_radius = Vec::with_capacity(radii.len());
    for ri in 0..radii.len() {
        let mut sup = reports[0][ri].density;
        let mut inf = sup;
        for row in &reports {
            let d = row[ri].density;
            if d > sup {
                sup = d;
            }
            if d < inf {
                inf = d;
            }
        }
        sup_per_radius.push(sup);
        inf_per_radius.push(inf);
    }
    let sup_trend = trend_of(&sup_per_radius, radii);
    let inf_trend = trend_of(&inf_per_radius, radii);
    Ok(ScanReport {
        radii: radii.to_vec(),
        reports,
        sup_per_radius,
        inf_per_radius,
        sup_trend,
        inf_trend,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{hermitian_eigen, MultiPoly};
    use crate::mc::unit_sphere_dir_c;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn vec2(a: Complex64, b: Complex64) -> ComplexVector<f64> {
        DVector::from_vec(vec![a, b])
    }

    fn plane() -> Hypersurface<f64> {
        Hypersurface::new(MultiPoly::coordinate(2, 1), 1e-9).unwrap()
    }

    fn parabola() -> Hypersurface<f64> {
        let t = MultiPoly::from_terms(
            2,
            [(vec![0u16, 1u16], c(1.0, 0.0)), (vec![2, 0], c(-1.0, 0.0))],
        );
        Hypersurface::new(t, 1e-9).unwrap()
    }

    fn hyperbola() -> Hypersurface<f64> {
        let t = MultiPoly::from_terms(
            2,
            [(vec![1u16, 1u16], c(1.0, 0.0)), (vec![0, 0], c(-1.0, 0.0))],
        );
        Hypersurface::new(t, 1e-9).unwrap()
    }

    /// Finite product over lattice points of `alpha Z^2` with |k|^2 <= k2max.
    fn lattice_product(alpha: f64, k2max: i32) -> (Hypersurface<f64>, Vec<Complex64>) {
        let mut roots = Vec::new();
        for a in -5i32..=5 {
            for b in -5i32..=5 {
                if a * a + b * b <= k2max {
                    roots.push(c(alpha * a as f64, alpha * b as f64));
                }
            }
        }
        let t = MultiPoly::from_roots_1d(&roots);
        (Hypersurface::new(t, 1e-12).unwrap(), roots)
    }

    #[test]
    fn point_mass_fixes_pi_factor() {
        // One simple zero at the origin. Independent oracle: quadrature of
        // the Laplacian-mollified log|zeta| over the ball at scale sigma,
        // which concentrates mass pi at the zero.
        let t = MultiPoly::coordinate(1, 0);
        let h = Hypersurface::new(t, 1e-12).unwrap();
        let z = DVector::from_vec(vec![c(0.0, 0.0)]);
        let r = 1.0f64;
        let est = upsilon(&h, &z, r, UpsilonMethod::Slicing, 1000, 1).unwrap();
        let vol = ball_volume(1usize, r);
        let got = est.form.matrix()[(0, 0)].re * vol;

        let sigma: f64 = 1e-2;
        // integrand of the mollified mass in s = |zeta|^2, integrated in
        // u = log(s + sigma^2) to resolve the peak: pi sigma^2 e^{-u} du.
        let (u0, u1) = ((sigma * sigma).ln(), (r * r + sigma * sigma).ln());
        let steps = 20_000;
        let du = (u1 - u0) / steps as f64;
        let f = |u: f64| std::f64::consts::PI * sigma * sigma * (-u).exp();
        let mut oracle = 0.5 * (f(u0) + f(u1));
        for k in 1..steps {
            oracle += f(u0 + k as f64 * du);
        }
        oracle *= du;
        assert!(
            (got - oracle).abs() <= 0.01 * std::f64::consts::PI,
            "mass {got} vs mollified oracle {oracle}"
        );
        assert!((got - std::f64::consts::PI).abs() <= 0.01 * std::f64::consts::PI);
    }

    #[test]
    fn far_ball_gives_zero_form() {
        let h = plane();
        let z = vec2(c(0.0, 0.0), c(10.0, 0.0));
        for method in [UpsilonMethod::Surface, UpsilonMethod::Slicing] {
            let est = upsilon(&h, &z, 1.0, method, 2_000, 3).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(est.form.matrix()[(i, j)], c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn flat_plane_form_is_rank_one() {
        let h = plane();
        let z = vec2(c(0.0, 0.0), c(0.0, 0.0));
        let est = upsilon(&h, &z, 1.0, UpsilonMethod::Surface, 20_000, 7).unwrap();
        let m = est.form.matrix();
        // Exact normal projector onto e2: the (1,1) entry vanishes exactly
        // on the surface route.
        assert!(m[(0, 0)].re <= est.trace_std_error + 1e-12);
        assert!(
            (m[(1, 1)].re - 2.0).abs() <= 3.0 * est.trace_std_error,
            "upsilon(e2,e2) = {} vs 2",
            m[(1, 1)].re
        );

        let est2 = upsilon(&h, &z, 1.0, UpsilonMethod::Slicing, 12_000, 9).unwrap();
        let m2 = est2.form.matrix();
        assert!(m2[(0, 0)].re.abs() <= 0.05, "slicing (1,1) entry {}", m2[(0, 0)].re);
        assert!((m2[(1, 1)].re - 2.0).abs() <= 0.15);
    }

    #[test]
    fn cross_route_directions_agree() {
        let h = parabola();
        let z = vec2(c(0.0, 0.0), c(0.0, 0.0));
        let r = 1.0;
        let sampling = sample_surface_in_ball(&h, &z, r, 30_000, 21).unwrap();
        let scale = std::f64::consts::PI / ball_volume(2usize, r);
        let mut rng = rng_for(99, &[1]);
        for k in 0..6 {
            let v = unit_sphere_dir_c::<f64, _>(&mut rng, 2);
            let (qs, es) = batch_functional(&sampling, |s| {
                scale * s.area_weight * hdot(&v, &s.unit_normal).norm_sqr()
            });
            let (ql, el) =
                upsilon_direction(&h, &z, r, &v, 6_000, derive_seed(7, &[k])).unwrap();
            assert!(
                (qs - ql).abs() <= 3.0 * (es + el),
                "direction {k}: surface {qs}+-{es} vs slicing {ql}+-{el}"
            );
        }
    }

    #[test]
    fn slicing_form_is_nearly_psd() {
        let h = hyperbola();
        let z = vec2(c(1.0, 0.0), c(1.0, 0.0));
        let est = upsilon(&h, &z, 1.0, UpsilonMethod::Slicing, 12_000, 13).unwrap();
        let (vals, _) = hermitian_eigen(&est.form);
        assert!(
            vals[0] >= -3.0 * est.trace_std_error - 1e-9,
            "min eigenvalue {} vs stderr {}",
            vals[0],
            est.trace_std_error
        );
    }

    #[test]
    fn trace_identity_against_area() {
        let h = parabola();
        let z = vec2(c(0.0, 0.0), c(0.0, 0.0));
        let r = 1.0;
        let est = upsilon(&h, &z, r, UpsilonMethod::Slicing, 12_000, 5).unwrap();
        let vol = ball_volume(2usize, r);
        let lhs = est.form.trace() * vol / std::f64::consts::PI;
        let area = sample_surface_in_ball(&h, &z, r, 30_000, 6).unwrap();
        let sigma = est.trace_std_error * vol / std::f64::consts::PI + area.area_std_error;
        assert!(
            (lhs - area.area).abs() <= 3.0 * sigma,
            "trace route {} vs area {} (sigma {})",
            lhs,
            area.area,
            sigma
        );
    }

    #[test]
    fn flat_plane_density_decays_quadratically() {
        // Closed form: area pi r^2 over ball volume pi^2 r^4 / 2, times pi,
        // against the identity Hessian: density = 2 / r^2.
        let h = plane();
        let w = Weight::<f64>::euclidean(2);
        let z = vec2(c(0.0, 0.0), c(0.0, 0.0));
        for (r, want) in [(2.0, 0.5), (4.0, 0.125)] {
            let rep = density_at(&h, &w, &z, r, 20_000, 31).unwrap();
            assert!(
                (rep.density - want).abs() <= 0.05 * want,
                "r = {r}: density {} vs {want}",
                rep.density
            );
            // The maximizing direction is the plane normal e2.
            assert!(rep.max_direction[1].norm() > 0.99);
            assert!(rep.density >= 0.0);
        }
    }

    #[test]
    fn disjoint_ball_density_zero() {
        let h = plane();
        let w = Weight::<f64>::euclidean(2);
        let z = vec2(c(0.0, 0.0), c(10.0, 0.0));
        let rep = density_at(&h, &w, &z, 1.0, 2_000, 1).unwrap();
        assert_eq!(rep.density, 0.0);
    }

    #[test]
    fn lattice_patch_density_matches_point_count() {
        let alpha = 0.75;
        let (h, roots) = lattice_product(alpha, 5);
        let w = Weight::<f64>::euclidean(1);
        let z = DVector::from_vec(vec![c(0.0, 0.0)]);
        for r in [1.2f64, 3.0] {
            let count = roots.iter().filter(|g| g.norm() < r).count();
            let want = std::f64::consts::PI * count as f64 / ball_volume(1usize, r);
            let rep = density_at(&h, &w, &z, r, 500, 2).unwrap();
            assert_relative_eq!(rep.density, want, max_relative = 1e-8);
        }
    }

    #[test]
    fn density_invariant_under_scene_rotation() {
        // Rotate the plane z2 = 0 to <z, a> = 0 with |a| = 1; the euclidean
        // weight and center 0 are rotation invariant.
        let a1 = c(0.6, 0.3);
        let a2 = c(0.5, -0.55);
        let norm = (a1.norm_sqr() + a2.norm_sqr()).sqrt();
        let t = MultiPoly::from_terms(
            2,
            [(vec![1u16, 0u16], a1 / norm), (vec![0, 1], a2 / norm)],
        );
        let rotated = Hypersurface::new(t, 1e-9).unwrap();
        let w = Weight::<f64>::euclidean(2);
        let z = vec2(c(0.0, 0.0), c(0.0, 0.0));
        let r = 2.0;
        let base = density_at(&plane(), &w, &z, r, 20_000, 41).unwrap();
        let rot = density_at(&rotated, &w, &z, r, 20_000, 43).unwrap();
        let sigma = base.mc_std_error + rot.mc_std_error;
        assert!(
            (base.density - rot.density).abs() <= 3.0 * sigma.max(1e-3),
            "plane {} vs rotated {} (sigma {})",
            base.density,
            rot.density,
            sigma
        );
    }

    #[test]
    fn density_invariant_under_scaling_t() {
        // c T defines the same surface; samples, weights, and the density
        // agree exactly because all tolerances are relative to the scale.
        let (h, _) = lattice_product(0.9, 5);
        let scaled = Hypersurface::new(
            h.t().map_coeffs(|x| x * c(0.0, -2.5)),
            1e-12,
        )
        .unwrap();
        let w = Weight::<f64>::euclidean(1);
        let z = DVector::from_vec(vec![c(0.1, 0.0)]);
        let a = density_at(&h, &w, &z, 1.7, 400, 3).unwrap();
        let b = density_at(&scaled, &w, &z, 1.7, 400, 3).unwrap();
        assert_relative_eq!(a.density, b.density, max_relative = 1e-9);
    }

    #[test]
    fn scan_of_plane_decreases() {
        let h = plane();
        let w = Weight::<f64>::euclidean(2);
        let centers = vec![
            vec2(c(0.0, 0.0), c(0.0, 0.0)),
            vec2(c(0.5, 0.0), c(0.0, 0.0)),
        ];
        let radii = [2.0, 4.0, 8.0];
        let scan = density_scan(&h, &w, &centers, &radii, 12_000, 17).unwrap();
        assert_eq!(scan.sup_trend.label, TrendLabel::Decreasing);
        for k in 1..radii.len() {
            assert!(scan.sup_per_radius[k] < scan.sup_per_radius[k - 1]);
            assert!(scan.sup_per_radius[k] >= scan.inf_per_radius[k]);
        }
        // 2/r^2 tail extrapolates to roughly zero.
        let lim = scan.sup_trend.richardson_limit.unwrap();
        assert!(lim.abs() <= 0.05, "Richardson limit {lim}");
    }

    #[test]
    fn scan_far_from_surface_is_flat_zero() {
        let h = plane();
        let w = Weight::<f64>::euclidean(2);
        let centers = vec![vec2(c(0.0, 0.0), c(50.0, 0.0))];
        let radii = [1.0, 2.0];
        let scan = density_scan(&h, &w, &centers, &radii, 2_000, 19).unwrap();
        assert_eq!(scan.sup_trend.label, TrendLabel::Flat);
        assert!(scan.sup_per_radius.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn halving_lattice_step_quadruples_density() {
        // Same |k|^2 <= 12 patch at both steps; the ball r = 2.1 holds 37
        // fine-lattice points against 9 coarse ones: ratio 37/9 ~ 4.1.
        let w = Weight::<f64>::euclidean(1);
        let z = DVector::from_vec(vec![c(0.0, 0.0)]);
        let r = 2.1;
        let (h_fine, _) = lattice_product(0.6, 12);
        let (h_coarse, _) = lattice_product(1.2, 12);
        let fine = density_at(&h_fine, &w, &z, r, 400, 5).unwrap();
        let coarse = density_at(&h_coarse, &w, &z, r, 400, 5).unwrap();
        let ratio = fine.density / coarse.density;
        assert!(
            (3.5..=4.6).contains(&ratio),
            "density ratio {ratio} (fine {}, coarse {})",
            fine.density,
            coarse.density
        );
    }

    #[test]
    fn scan_validates_parameters() {
        let h = plane();
        let w = Weight::<f64>::euclidean(2);
        let z = vec2(c(0.0, 0.0), c(0.0, 0.0));
        assert!(matches!(
            density_scan(&h, &w, &[], &[1.0], 100, 1),
            Err(DensityError::InvalidParameter(_))
        ));
        assert!(matches!(
            density_scan(&h, &w, &[z.clone()], &[2.0, 1.0], 100, 1),
            Err(DensityError::InvalidParameter(_))
        ));
        assert!(matches!(
            upsilon(&h, &z, -1.0, UpsilonMethod::Surface, 100, 1),
            Err(DensityError::InvalidParameter(_))
        ));
    }
}
