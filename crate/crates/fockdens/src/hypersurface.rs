//! Geometry of the zero set `W = T^{-1}(0)` of a polynomial: membership,
//! distance, Monte Carlo surface sampling by complex-line slicing, line
//! intersection counts, and heuristic flatness diagnostics.
//!
//! Surface sampling draws random affine complex lines (a fixed random
//! direction per batch, uniform base points in the orthogonal cross-section
//! disc) and converts each in-ball intersection into a weighted sample of
//! `2(n-1)`-dimensional surface measure. The weight carries the Jacobian
//! `(|grad T| / |d/dt T(line)|)^2` of the projection from the surface onto
//! the cross-section; the square is forced by complex linearity (a complex
//! linear map of complex determinant `c` scales real `2(n-1)`-volume by
//! `|c|^2`).

use nalgebra::DVector;
use num_complex::Complex;
use thiserror::Error;

use crate::algebra::{
    cabs, eval_poly, hdot, poly_roots, restrict_to_line, vnorm, AlgebraError, ComplexVector,
    MultiPoly,
};
use crate::mc::{rng_for, unit_ball_point_c, unit_sphere_dir_c, BatchStats};
use crate::{sfrom, Scalar};

const TAG_SURFACE: u64 = 0x5f;
const LINES_PER_BATCH: usize = 32;
/// Roots whose slice makes an angle with the surface below this squared
/// cosine are dropped. The dropped locus has measure `O(threshold)` (a
/// relative bias well below Monte Carlo noise at practical budgets) while
/// capping the projection Jacobian near tangencies, whose unbounded tail
/// would otherwise give the estimator infinite variance.
const COS2_SKIP: f64 = 3e-4;
/// Band around the ball boundary inside which hits are recorded as ties.
const BOUNDARY_BAND: f64 = 1e-8;
/// Newton search gives up once the iterate strays this far from the query.
const R_SEARCH: f64 = 1e6;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("singular gradient")]
    SingularGradient,
    #[error("line contained in W")]
    LineContained,
    #[error("empty region")]
    EmptyRegion,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Smooth affine algebraic hypersurface `W = T^{-1}(0)` in `C^n`.
#[derive(Debug, Clone)]
pub struct Hypersurface<S: Scalar> {
    t: MultiPoly<S>,
    n: usize,
    gradient_floor: S,
    /// Largest coefficient magnitude of `T`; all `|T| <= tol` checks are
    /// relative to this so the surface is invariant under scaling of `T`.
    t_scale: S,
}

impl<S: Scalar> Hypersurface<S> {
    pub fn new(t: MultiPoly<S>, gradient_floor: S) -> Result<Self, SurfaceError> {
        if t.is_zero() {
            return Err(SurfaceError::ZeroPolynomial);
        }
        if gradient_floor <= S::zero() {
            return Err(SurfaceError::InvalidParameter("gradient_floor must be positive"));
        }
        let t_scale = t
            .terms()
            .map(|(_, c)| cabs(*c))
            .fold(S::zero(), |a, b| if b > a { b } else { a });
        let n = t.dimension();
        Ok(Self { t, n, gradient_floor, t_scale })
    }

    pub fn t(&self) -> &MultiPoly<S> {
        &self.t
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn gradient_floor(&self) -> S {
        self.gradient_floor
    }

    pub fn t_scale(&self) -> S {
        self.t_scale
    }

    /// `T(z)` together with the holomorphic gradient.
    pub fn value_and_gradient(
        &self,
        z: &ComplexVector<S>,
    ) -> Result<(Complex<S>, ComplexVector<S>), SurfaceError> {
        Ok(eval_poly(&self.t, z)?)
    }

    /// Coefficient scale magnified to the size of degree-d monomials at `z`.
    pub fn local_scale(&self, z: &ComplexVector<S>) -> S {
        let deg = self.t.degree().max(0) as i32;
        let zn = vnorm(z);
        let base = if zn > S::one() { zn } else { S::one() };
        self.t_scale * base.powi(deg)
    }

    /// Membership test `|T(z)| <= tol * local scale`.
    pub fn on_surface(&self, z: &ComplexVector<S>, tol: S) -> Result<bool, SurfaceError> {
        let (v, _) = self.value_and_gradient(z)?;
        Ok(cabs(v) <= tol * self.local_scale(z))
    }
}

/// One weighted point of the surface measure on `W ∩ B`.
#[derive(Debug, Clone)]
pub struct SurfaceSample<S: Scalar> {
    pub point: ComplexVector<S>,
    /// `conj(grad T)` normalized; spans the complex normal line of `W`.
    pub unit_normal: ComplexVector<S>,
    pub area_weight: S,
}

/// Surface samples plus the total-area estimate they induce.
#[derive(Debug, Clone)]
pub struct SurfaceSampling<S: Scalar> {
    pub samples: Vec<SurfaceSample<S>>,
    /// Sum of the sample weights: Monte Carlo estimate of `Area(W ∩ B)`.
    pub area: S,
    /// Standard error of `area` from the spread of batch totals.
    pub area_std_error: S,
    pub batches: usize,
    pub lines: usize,
    /// Hits within `1e-8` of the ball boundary (included iff strictly inside).
    pub boundary_band_hits: usize,
    /// Roots dropped because the slice was nearly tangent to `W`.
    pub skipped_tangent_roots: usize,
    /// Lines on which `T` restricted to the whole line vanished identically.
    pub degenerate_lines: usize,
    /// Cumulative sample counts per batch, so weighted functionals of the
    /// samples can report batch-spread standard errors.
    pub batch_ends: Vec<usize>,
}

/// Mean and batch-spread standard error of `sum_samples f(sample)` where `f`
/// is expected to fold in the sample's `area_weight`.
pub fn batch_functional<S: Scalar>(
    sampling: &SurfaceSampling<S>,
    f: impl Fn(&SurfaceSample<S>) -> S,
) -> (S, S) {
    let nb = sampling.batch_ends.len();
    if nb < 2 {
        let total = sampling.samples.iter().map(&f).sum::<S>();
        return (total, S::zero());
    }
    let scale = sfrom::<S>(nb as f64);
    let mut stats = BatchStats::new();
    let mut start = 0;
    for &end in &sampling.batch_ends {
        let val = sampling.samples[start..end].iter().map(&f).sum::<S>();
        stats.push(val * scale);
        start = end;
    }
    (stats.mean(), stats.std_error())
}

/// Heuristic uniform-flatness certificate from sampled surface points.
#[derive(Debug, Clone)]
pub struct FlatnessReport<S: Scalar> {
    /// Largest tubular radius consistent with the sampled evidence, capped
    /// at the region radius.
    pub epsilon_estimate: S,
    /// Estimate of `C` in the local graph bound `|f(z + x)| <= C |x|^2`.
    pub max_graph_constant: S,
    /// Smallest pairwise two-point reach bound `|p-q|^2 / (2 |normal part|)`.
    pub min_normal_injectivity: S,
    pub samples: usize,
}

/// Euclidean distance from `z` to `W`, estimated by Newton projection to a
/// foot point followed by tangential descent. Returns an upper bound that is
/// tight on smooth strata; `+inf` signals that no foot point was found
/// within the search radius.
pub fn distance_estimate<S: Scalar>(
    h: &Hypersurface<S>,
    z: &ComplexVector<S>,
) -> Result<S, SurfaceError> {
    if h.t.degree() == 0 {
        // Nonzero constant: W is empty.
        return Ok(sfrom(f64::INFINITY));
    }
    let tol = sfrom::<S>(1e-10);
    let w = match newton_to_surface(h, z, tol)? {
        Some(w) => w,
        None => return Ok(sfrom(f64::INFINITY)),
    };
    let w = tangential_descent(h, z, w, tol)?;
    Ok(vnorm(&(z - &w)))
}

/// Newton iteration along `conj(grad T)` until `|T| <= tol * local scale`.
fn newton_to_surface<S: Scalar>(
    h: &Hypersurface<S>,
    z: &ComplexVector<S>,
    tol: S,
) -> Result<Option<ComplexVector<S>>, SurfaceError> {
    let mut w = z.clone();
    let (mut val, mut grad) = h.value_and_gradient(&w)?;
    for _ in 0..80 {
        if cabs(val) <= tol * h.local_scale(&w) {
            return Ok(Some(w));
        }
        let gn2 = grad.iter().map(|c| c.norm_sqr()).sum::<S>();
        if gn2.sqrt() < h.gradient_floor {
            return Err(SurfaceError::SingularGradient);
        }
        let coef = val / Complex::new(gn2, S::zero());
        let step: ComplexVector<S> = grad.map(|g| -(coef * g.conj()));
        // Damped update: halve until |T| actually decreases.
        let mut lambda = S::one();
        let mut accepted = false;
        for _ in 0..30 {
            let cand = &w + &step.map(|s| s * Complex::new(lambda, S::zero()));
            let (cv, cg) = h.value_and_gradient(&cand)?;
            if cabs(cv) < cabs(val) {
                w = cand;
                val = cv;
                grad = cg;
                accepted = true;
                break;
            }
            lambda = lambda * sfrom(0.5);
        }
        if !accepted || vnorm(&(&w - z)) > sfrom(R_SEARCH) {
            return Ok(None);
        }
    }
    let (fv, _) = h.value_and_gradient(&w)?;
    if cabs(fv) <= tol * h.local_scale(&w) {
        Ok(Some(w))
    } else {
        Ok(None)
    }
}

/// Slides the foot point along `W` until `z - w` is normal to `W` at `w`.
fn tangential_descent<S: Scalar>(
    h: &Hypersurface<S>,
    z: &ComplexVector<S>,
    mut w: ComplexVector<S>,
    tol: S,
) -> Result<ComplexVector<S>, SurfaceError> {
    let eta: S = sfrom(0.7);
    for _ in 0..300 {
        let (_, grad) = h.value_and_gradient(&w)?;
        let gn = vnorm(&grad);
        if gn < h.gradient_floor {
            return Err(SurfaceError::SingularGradient);
        }
        let nu: ComplexVector<S> = grad.map(|g| g.conj() / Complex::new(gn, S::zero()));
        let d = z - &w;
        let along = hdot(&d, &nu);
        let d_tan = &d - &nu.map(|c| c * along);
        let tn = vnorm(&d_tan);
        if tn <= sfrom::<S>(1e-9) * (S::one() + vnorm(&d)) {
            break;
        }
        let cand = &w + &d_tan.map(|c| c * Complex::new(eta, S::zero()));
        // Re-project the slid point back onto W before the next sweep.
        match newton_to_surface(h, &cand, tol)? {
            Some(back) => w = back,
            None => break,
        }
    }
    Ok(w)
}

/// Number of roots, with multiplicity, of `T(base + t v)` landing strictly
/// inside `B(z, r)`.
pub fn line_intersections_in_ball<S: Scalar>(
    h: &Hypersurface<S>,
    base: &ComplexVector<S>,
    v: &ComplexVector<S>,
    z: &ComplexVector<S>,
    r: S,
) -> Result<usize, SurfaceError> {
    if vnorm(v) <= S::zero() {
        return Err(SurfaceError::InvalidParameter("direction must be nonzero"));
    }
    let q = restrict_to_line(&h.t, base, v)?;
    if q.is_zero() {
        return Err(SurfaceError::LineContained);
    }
    if q.degree() <= 0 {
        return Ok(0);
    }
    let mut count = 0;
    for (t, mult) in poly_roots(&q)? {
        let p = base + &v.map(|c| c * t);
        if vnorm(&(&p - z)) < r {
            count += mult;
        }
    }
    Ok(count)
}

/// Orthonormal basis of the complex orthogonal complement of the unit
/// vector `v`.
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
        let nw = vnorm(&w);
        if nw > sfrom(1e-8) {
            w /= Complex::new(nw, S::zero());
            basis.push(w);
        }
    }
    basis
}

struct BatchOutcome<S: Scalar> {
    samples: Vec<SurfaceSample<S>>,
    total: S,
    boundary_band_hits: usize,
    skipped_tangent_roots: usize,
    degenerate_lines: usize,
}

/// How line base points are drawn in the cross-section of the ball.
#[derive(Clone, Copy, PartialEq, Eq)]
enum BaseLaw {
    /// Uniform over the cross-ball: best for smooth surface integrands.
    Uniform,
    /// Half uniform, half log-uniform in radius toward the axis through the
    /// ball center: resolves integrands with an integrable peak at the
    /// center (kernels like `|z - zeta|^{2-2n}`) at any distance down to
    /// about `1e-7 r` without extra budget.
    AxisPeaked,
}

/// Smallest normalized base radius reachable by the peaked law.
const PEAK_T_MIN: f64 = 1e-7;

/// Weighted Monte Carlo samples of surface measure on `W ∩ B(z, r)`.
///
/// `budget` is the total number of slicing lines, rounded up to whole
/// batches. An empty sample list is a valid outcome (ball misses `W`).
pub fn sample_surface_in_ball<S: Scalar>(
    h: &Hypersurface<S>,
    z: &ComplexVector<S>,
    r: S,
    budget: usize,
    seed: u64,
) -> Result<SurfaceSampling<S>, SurfaceError> {
    sample_surface_with_law(h, z, r, budget, seed, BaseLaw::Uniform)
}

/// Like [`sample_surface_in_ball`], with base points concentrated near the
/// axis through `z` so that kernels peaked at `z` keep bounded weighted
/// variance. Weights stay exact; only their spread changes.
pub fn sample_surface_in_ball_peaked<S: Scalar>(
    h: &Hypersurface<S>,
    z: &ComplexVector<S>,
    r: S,
    budget: usize,
    seed: u64,
) -> Result<SurfaceSampling<S>, SurfaceError> {
    sample_surface_with_law(h, z, r, budget, seed, BaseLaw::AxisPeaked)
}

fn sample_surface_with_law<S: Scalar>(
    h: &Hypersurface<S>,
    z: &ComplexVector<S>,
    r: S,
    budget: usize,
    seed: u64,
    law: BaseLaw,
) -> Result<SurfaceSampling<S>, SurfaceError> {
    if r <= S::zero() {
        return Err(SurfaceError::InvalidParameter("radius must be positive"));
    }
    if budget == 0 {
        return Err(SurfaceError::InvalidParameter("budget must be at least 1"));
    }
    if z.len() != h.n {
        return Err(SurfaceError::Algebra(AlgebraError::Dimension {
            expected: h.n,
            got: z.len(),
        }));
    }
    if h.n == 1 {
        return sample_points_1d(h, z, r);
    }

    let batches = budget.div_ceil(LINES_PER_BATCH).max(2);
    let mut outcomes: Vec<BatchOutcome<S>> = Vec::with_capacity(batches);
    for b in 0..batches {
        outcomes.push(run_batch(h, z, r, seed, b as u64, law)?);
    }

    let lines = batches * LINES_PER_BATCH;
    let mut stats = BatchStats::new();
    let mut sampling = SurfaceSampling {
        samples: Vec::new(),
        area: S::zero(),
        area_std_error: S::zero(),
        batches,
        lines,
        boundary_band_hits: 0,
        skipped_tangent_roots: 0,
        degenerate_lines: 0,
        batch_ends: Vec::with_capacity(batches),
    };
    let renorm = S::one() / sfrom::<S>(batches as f64);
    for mut o in outcomes {
        stats.push(o.total);
        sampling.boundary_band_hits += o.boundary_band_hits;
        sampling.skipped_tangent_roots += o.skipped_tangent_roots;
        sampling.degenerate_lines += o.degenerate_lines;
        for s in &mut o.samples {
            s.area_weight = s.area_weight * renorm;
        }
        sampling.samples.extend(o.samples);
        sampling.batch_ends.push(sampling.samples.len());
    }
    sampling.area = stats.mean();
    sampling.area_std_error = stats.std_error();
    Ok(sampling)
}

fn run_batch<S: Scalar>(
    h: &Hypersurface<S>,
    z: &ComplexVector<S>,
    r: S,
    seed: u64,
    batch: u64,
    law: BaseLaw,
) -> Result<BatchOutcome<S>, SurfaceError> {
    let n = h.n;
    let mut rng = rng_for(seed, &[TAG_SURFACE, batch]);
    let v = unit_sphere_dir_c::<S, _>(&mut rng, n);
    let basis = orthogonal_complement(&v);
    let mc = 2 * (n - 1);
    let v_unit = crate::weights::ball_volume(n - 1, S::one());
    let r_pow: S = r.powi(mc as i32);
    let log_t_min = PEAK_T_MIN.ln();
    // density of the log-uniform radial component in unit cross coords
    let peak_density = |t: S| -> S {
        if t < sfrom::<S>(PEAK_T_MIN) {
            return S::zero();
        }
        let omega = sfrom::<S>(mc as f64) * v_unit;
        S::one() / (sfrom::<S>(-log_t_min) * omega * t.powi(mc as i32))
    };
    let per_line_denom = sfrom::<S>(LINES_PER_BATCH as f64);

    let mut out = BatchOutcome {
        samples: Vec::new(),
        total: S::zero(),
        boundary_band_hits: 0,
        skipped_tangent_roots: 0,
        degenerate_lines: 0,
    };
    let band = sfrom::<S>(BOUNDARY_BAND);
    let cos2_skip = sfrom::<S>(COS2_SKIP);
    for _ in 0..LINES_PER_BATCH {
        let u: DVector<Complex<S>> = match law {
            BaseLaw::Uniform => unit_ball_point_c::<S, _>(&mut rng, n - 1),
            BaseLaw::AxisPeaked => {
                let pick: f64 = rand::Rng::gen(&mut rng);
                if pick < 0.5 {
                    unit_ball_point_c::<S, _>(&mut rng, n - 1)
                } else {
                    let x: f64 = rand::Rng::gen(&mut rng);
                    let t = sfrom::<S>((x * log_t_min).exp());
                    unit_sphere_dir_c::<S, _>(&mut rng, n - 1)
                        .map(|c| c * Complex::new(t, S::zero()))
                }
            }
        };
        let base_weight = match law {
            BaseLaw::Uniform => v_unit * r_pow,
            BaseLaw::AxisPeaked => {
                let t = vnorm(&u);
                let half = sfrom::<S>(0.5);
                let p_u = half / v_unit + half * peak_density(t);
                r_pow / p_u
            }
        };
        let per_line = base_weight / per_line_denom;
        let mut y = z.clone();
        for (j, b) in basis.iter().enumerate() {
            y += b.map(|c| c * (u[j] * Complex::new(r, S::zero())));
        }
        let q = restrict_to_line(&h.t, &y, &v)?;
        if q.is_zero() {
            out.degenerate_lines += 1;
            continue;
        }
        if q.degree() <= 0 {
            continue;
        }
        for (t, _) in poly_roots(&q)? {
            let p = &y + &v.map(|c| c * t);
            let rho = vnorm(&(&p - z));
            if (rho - r).abs() < band {
                out.boundary_band_hits += 1;
            }
            if rho >= r {
                continue;
            }
            let (_, grad) = h.value_and_gradient(&p)?;
            let gn = vnorm(&grad);
            if gn < h.gradient_floor {
                return Err(SurfaceError::SingularGradient);
            }
            let (_, dq) = q.eval_with_derivative(t);
            let cos2 = dq.norm_sqr() / (gn * gn);
            if cos2 < cos2_skip {
                out.skipped_tangent_roots += 1;
                continue;
            }
            let weight = per_line / cos2;
            let unit_normal = grad.map(|g| g.conj() / Complex::new(gn, S::zero()));
            out.total += weight;
            out.samples.push(SurfaceSample { point: p, unit_normal, area_weight: weight });
        }
    }
    Ok(out)
}

/// In one complex variable `W ∩ B` is the finite root set: counting measure,
/// computed exactly with zero Monte Carlo error.
fn sample_points_1d<S: Scalar>(
    h: &Hypersurface<S>,
    z: &ComplexVector<S>,
    r: S,
) -> Result<SurfaceSampling<S>, SurfaceError> {
    let coeffs: Vec<Complex<S>> = {
        let mut c = vec![Complex::new(S::zero(), S::zero()); h.t.degree().max(0) as usize + 1];
        for (alpha, coef) in h.t.terms() {
            c[alpha[0] as usize] += *coef;
        }
        c
    };
    let q = crate::algebra::UniPoly::new(coeffs);
    let mut sampling = SurfaceSampling {
        samples: Vec::new(),
        area: S::zero(),
        area_std_error: S::zero(),
        batches: 1,
        lines: 1,
        boundary_band_hits: 0,
        skipped_tangent_roots: 0,
        degenerate_lines: 0,
        batch_ends: Vec::new(),
    };
    if q.degree() <= 0 {
        sampling.batch_ends.push(0);
        return Ok(sampling);
    }
    let band = sfrom::<S>(BOUNDARY_BAND);
    for (t, _) in poly_roots(&q)? {
        let p = DVector::from_element(1, t);
        let rho = cabs(t - z[0]);
        if (rho - r).abs() < band {
            sampling.boundary_band_hits += 1;
        }
        if rho >= r {
            continue;
        }
        let (_, grad) = h.value_and_gradient(&p)?;
        let gn = vnorm(&grad);
        if gn < h.gradient_floor {
            return Err(SurfaceError::SingularGradient);
        }
        let unit_normal = grad.map(|g| g.conj() / Complex::new(gn, S::zero()));
        sampling.area += S::one();
        sampling.samples.push(SurfaceSample { point: p, unit_normal, area_weight: S::one() });
    }
    sampling.batch_ends.push(sampling.samples.len());
    Ok(sampling)
}

/// Samples `W` in a ball and reports pairwise flatness evidence. The result
/// is a heuristic certificate: sampled, not proven.
pub fn flatness_check<S: Scalar>(
    h: &Hypersurface<S>,
    region_center: &ComplexVector<S>,
    region_radius: S,
    budget: usize,
    seed: u64,
) -> Result<FlatnessReport<S>, SurfaceError> {
    if budget < 100 {
        return Err(SurfaceError::InvalidParameter("budget must be at least 100"));
    }
    let sampling = sample_surface_in_ball(h, region_center, region_radius, budget, seed)?;
    if sampling.samples.is_empty() {
        return Err(SurfaceError::EmptyRegion);
    }
    // Pairwise scan is quadratic: cap the points used, keeping batch order.
    let cap = 500.min(sampling.samples.len());
    let pts = &sampling.samples[..cap];

    let mut min_reach = region_radius;
    let mut max_c = S::zero();
    let dist_floor = sfrom::<S>(1e-9);
    for i in 0..cap {
        for j in (i + 1)..cap {
            let delta = &pts[j].point - &pts[i].point;
            let dist = vnorm(&delta);
            if dist < dist_floor {
                continue;
            }
            for normal in [&pts[i].unit_normal, &pts[j].unit_normal] {
                let n_comp = cabs(hdot(&delta, normal));
                let t2 = dist * dist - n_comp * n_comp;
                let t_comp = if t2 > S::zero() { t2.sqrt() } else { S::zero() };
                if n_comp > sfrom::<S>(1e-12) * dist {
                    let reach = dist * dist / (sfrom::<S>(2.0) * n_comp);
                    if reach < min_reach {
                        min_reach = reach;
                    }
                }
                // Graph-constant evidence needs some tangential extent;
                // almost purely normal pairs are covered by the reach bound.
                if t_comp >= sfrom::<S>(1e-3) * dist {
                    let c = n_comp / (t_comp * t_comp);
                    if c > max_c {
                        max_c = c;
                    }
                }
            }
        }
    }
    // Curvature route: a graph constant C caps the reach near 1/(2C).
    let mut epsilon = min_reach;
    if max_c > sfrom(1e-9) {
        let curv = S::one() / (sfrom::<S>(2.0) * max_c);
        if curv < epsilon {
            epsilon = curv;
        }
    }
    Ok(FlatnessReport {
        epsilon_estimate: epsilon,
        max_graph_constant: max_c,
        min_normal_injectivity: min_reach,
        samples: sampling.samples.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn vec2(a: Complex64, b: Complex64) -> ComplexVector<f64> {
        DVector::from_vec(vec![a, b])
    }

    /// T = z2 in C^2.
    fn plane() -> Hypersurface<f64> {
        Hypersurface::new(MultiPoly::coordinate(2, 1), 1e-9).unwrap()
    }

    /// T = z2 - z1^2 in C^2.
    fn parabola() -> Hypersurface<f64> {
        let t = MultiPoly::from_terms(
            2,
            [(vec![0u16, 1u16], c(1.0, 0.0)), (vec![2, 0], c(-1.0, 0.0))],
        );
        Hypersurface::new(t, 1e-9).unwrap()
    }

    /// T = z1 z2 - w in C^2.
    fn hyperbola(w: f64) -> Hypersurface<f64> {
        let t = MultiPoly::from_terms(
            2,
            [(vec![1u16, 1u16], c(1.0, 0.0)), (vec![0, 0], c(-w, 0.0))],
        );
        Hypersurface::new(t, 1e-9).unwrap()
    }

    #[test]
    fn construction_rejects_zero_polynomial() {
        assert_eq!(
            Hypersurface::new(MultiPoly::<f64>::zero(2), 1e-9).unwrap_err(),
            SurfaceError::ZeroPolynomial
        );
    }

    #[test]
    fn distance_to_coordinate_hyperplane() {
        let h = plane();
        let z = vec2(c(7.0, 0.0), c(3.0, 4.0));
        let d = distance_estimate(&h, &z).unwrap();
        assert_relative_eq!(d, 5.0, max_relative = 1e-9);
    }

    #[test]
    fn distance_vanishes_on_surface() {
        let h = hyperbola(1.0);
        let z = vec2(c(1.0, 0.0), c(1.0, 0.0));
        assert!(h.on_surface(&z, 1e-12).unwrap());
        assert!(distance_estimate(&h, &z).unwrap() <= 1e-8);
    }

    #[test]
    fn distance_matches_patch_minimization() {
        // Oracle: min over w = (u, 1/u) of |z - w| by three-level grid refinement.
        let h = hyperbola(1.0);
        let z = vec2(c(0.5, 0.0), c(0.5, 0.0));
        let dist = |u: Complex64| {
            let w2 = Complex64::new(1.0, 0.0) / u;
            ((z[0] - u).norm_sqr() + (z[1] - w2).norm_sqr()).sqrt()
        };
        let mut center = c(1.0, 0.0);
        let mut span = 1.5;
        let mut best = f64::INFINITY;
        for _ in 0..12 {
            let mut best_u = center;
            for i in 0..41 {
                for j in 0..41 {
                    let u = center + c(span * (i as f64 / 20.0 - 1.0), span * (j as f64 / 20.0 - 1.0));
                    if u.norm() < 1e-3 {
                        continue;
                    }
                    let d = dist(u);
                    if d < best {
                        best = d;
                        best_u = u;
                    }
                }
            }
            center = best_u;
            span *= 0.15;
        }
        let d = distance_estimate(&h, &z).unwrap();
        assert!((d - best).abs() <= 1e-4, "estimate {d} vs oracle {best}");
    }

    #[test]
    fn distance_infinite_for_nonvanishing_polynomial() {
        let t = MultiPoly::constant(2, c(3.0, 0.0));
        let h = Hypersurface::new(t, 1e-9).unwrap();
        let z = vec2(c(0.0, 0.0), c(0.0, 0.0));
        assert!(distance_estimate(&h, &z).unwrap().is_infinite());
    }

    #[test]
    fn distance_lipschitz_along_ray() {
        let h = parabola();
        let pts: Vec<ComplexVector<f64>> = (0..8)
            .map(|k| {
                let t = k as f64 * 0.35;
                vec2(c(0.3 + 0.1 * t, 0.05 * t), c(1.0 + 0.2 * t, 0.0))
            })
            .collect();
        let ds: Vec<f64> = pts.iter().map(|z| distance_estimate(&h, z).unwrap()).collect();
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let gap = vnorm(&(&pts[i] - &pts[j]));
                assert!(
                    (ds[i] - ds[j]).abs() <= gap + 2e-8,
                    "|{} - {}| > {} + tol",
                    ds[i],
                    ds[j],
                    gap
                );
            }
        }
    }

    #[test]
    fn line_count_plane_through_origin() {
        let h = plane();
        let base = vec2(c(0.0, 0.0), c(0.0, 0.0));
        let v = vec2(c(0.0, 0.0), c(1.0, 0.0));
        let z = base.clone();
        assert_eq!(line_intersections_in_ball(&h, &base, &v, &z, 1.0).unwrap(), 1);
    }

    #[test]
    fn line_inside_surface_is_an_error() {
        let h = plane();
        let base = vec2(c(0.0, 0.0), c(0.0, 0.0));
        let v = vec2(c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(
            line_intersections_in_ball(&h, &base, &v, &base, 1.0).unwrap_err(),
            SurfaceError::LineContained
        );
    }

    #[test]
    fn line_count_parabola_quadratic() {
        // T on the line (t, c) is c - t^2: the count must match the root
        // count of that explicit quadratic inside the ball.
        let cval = 0.09;
        let h = parabola();
        let base = vec2(c(0.0, 0.0), c(cval, 0.0));
        let v = vec2(c(1.0, 0.0), c(0.0, 0.0));
        let z = vec2(c(0.0, 0.0), c(0.0, 0.0));
        let got = line_intersections_in_ball(&h, &base, &v, &z, 0.5).unwrap();
        let q = crate::algebra::UniPoly::new(vec![c(cval, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        let expect: usize = poly_roots(&q)
            .unwrap()
            .into_iter()
            .filter(|(t, _)| {
                let p = &base + &v.map(|x| x * t);
                vnorm(&(&p - &z)) < 0.5
            })
            .map(|(_, m)| m)
            .sum();
        assert_eq!(got, 2);
        assert_eq!(got, expect);
    }

    #[test]
    fn pencil_counts_translation_invariant() {
        // For T = z2 and direction e2, each line based at (b, 0) with
        // |b| < r hits W once; shifting all bases inside the orthogonal
        // complement leaves every count, hence the sum, exactly unchanged.
        let h = plane();
        let v = vec2(c(0.0, 0.0), c(1.0, 0.0));
        let z = vec2(c(0.0, 0.0), c(0.0, 0.0));
        let pencil = |shift: f64| -> usize {
            (0..10)
                .map(|k| {
                    let b = -0.9 + 0.2 * k as f64 + shift;
                    let base = vec2(c(b, 0.0), c(0.0, 0.0));
                    line_intersections_in_ball(&h, &base, &v, &z, 1.0).unwrap()
                })
                .sum()
        };
        assert_eq!(pencil(0.0), pencil(0.04));
        assert_eq!(pencil(0.0), 10);
    }

    #[test]
    fn flat_disc_area_is_pi() {
        let h = plane();
        let z = vec2(c(0.0, 0.0), c(0.0, 0.0));
        let s = sample_surface_in_ball(&h, &z, 1.0, 20_000, 11).unwrap();
        let pi = std::f64::consts::PI;
        assert!(
            (s.area - pi).abs() <= 3.0 * s.area_std_error,
            "area {} vs pi, sigma {}",
            s.area,
            s.area_std_error
        );
        assert!(s.area_std_error < 0.06 * pi, "sigma too large: {}", s.area_std_error);
    }

    #[test]
    fn far_ball_is_empty() {
        let h = plane();
        let z = vec2(c(0.0, 0.0), c(10.0, 0.0));
        let s = sample_surface_in_ball(&h, &z, 1.0, 2_000, 5).unwrap();
        assert!(s.samples.is_empty());
        assert_eq!(s.area, 0.0);
    }

    #[test]
    fn parabola_matches_graph_quadrature() {
        // Graph {(u, u^2)}: area element (1 + 4|u|^2) dA(u) over
        // |u|^2 + |u|^4 < r^2, integrated in closed form.
        let r: f64 = 0.5;
        let u2 = ((1.0 + 4.0 * r * r).sqrt() - 1.0) / 2.0;
        let truth = std::f64::consts::PI * (u2 + 2.0 * u2 * u2);
        let h = parabola();
        let z = vec2(c(0.0, 0.0), c(0.0, 0.0));
        let s = sample_surface_in_ball(&h, &z, r, 200_000, 23).unwrap();
        let tol = (0.01 * truth).max(3.0 * s.area_std_error);
        assert!(
            (s.area - truth).abs() <= tol,
            "area {} vs {} (sigma {})",
            s.area,
            truth,
            s.area_std_error
        );
    }

    #[test]
    fn sample_invariants_hold() {
        let h = hyperbola(1.0);
        let z = vec2(c(1.0, 0.0), c(1.0, 0.0));
        let s = sample_surface_in_ball(&h, &z, 1.0, 2_000, 3).unwrap();
        assert!(!s.samples.is_empty());
        for smp in &s.samples {
            let (tv, _) = h.value_and_gradient(&smp.point).unwrap();
            assert!(tv.norm() <= 1e-8 * h.local_scale(&smp.point));
            assert_relative_eq!(vnorm(&smp.unit_normal), 1.0, max_relative = 1e-10);
            assert!(smp.area_weight > 0.0);
        }
        let total: f64 = s.samples.iter().map(|p| p.area_weight).sum();
        assert_relative_eq!(total, s.area, max_relative = 1e-10);
    }

    #[test]
    fn area_stable_under_seed_change() {
        let h = plane();
        let z = vec2(c(0.0, 0.0), c(0.0, 0.0));
        let a = sample_surface_in_ball(&h, &z, 1.0, 10_000, 1).unwrap();
        let b = sample_surface_in_ball(&h, &z, 1.0, 10_000, 2).unwrap();
        assert!((a.area - b.area).abs() <= 3.0 * (a.area_std_error + b.area_std_error));
    }

    #[test]
    fn rotated_plane_keeps_unit_disc_area() {
        // <z, a> with |a| = 1: a rotated copy of a coordinate hyperplane.
        let a1 = c(0.6, 0.3);
        let a2 = c(0.5, -0.55);
        let norm = (a1.norm_sqr() + a2.norm_sqr()).sqrt();
        let t = MultiPoly::from_terms(
            2,
            [(vec![1u16, 0u16], a1 / norm), (vec![0, 1], a2 / norm)],
        );
        let h = Hypersurface::new(t, 1e-9).unwrap();
        let z = vec2(c(0.0, 0.0), c(0.0, 0.0));
        let s = sample_surface_in_ball(&h, &z, 1.0, 20_000, 17).unwrap();
        let pi = std::f64::consts::PI;
        assert!(
            (s.area - pi).abs() <= 3.0 * s.area_std_error,
            "area {} vs pi, sigma {}",
            s.area,
            s.area_std_error
        );
    }

    #[test]
    fn determinism_same_seed_same_samples() {
        let h = parabola();
        let z = vec2(c(0.0, 0.0), c(0.0, 0.0));
        let a = sample_surface_in_ball(&h, &z, 0.5, 1_000, 9).unwrap();
        let b = sample_surface_in_ball(&h, &z, 0.5, 1_000, 9).unwrap();
        assert_eq!(a.samples.len(), b.samples.len());
        assert_eq!(a.area, b.area);
        for (x, y) in a.samples.iter().zip(b.samples.iter()) {
            assert_eq!(x.area_weight, y.area_weight);
            assert_eq!(x.point, y.point);
        }
    }

    #[test]
    fn one_dimensional_roots_are_exact() {
        let roots = [c(0.3, 0.0), c(0.0, -0.5), c(3.0, 0.0)];
        let t = MultiPoly::from_roots_1d(&roots);
        let h = Hypersurface::new(t, 1e-9).unwrap();
        let z = DVector::from_vec(vec![c(0.0, 0.0)]);
        let s = sample_surface_in_ball(&h, &z, 1.0, 500, 1).unwrap();
        assert_eq!(s.samples.len(), 2);
        assert_eq!(s.area, 2.0);
        assert_eq!(s.area_std_error, 0.0);
    }

    #[test]
    fn higher_dimension_plane_area() {
        // T = z3 in C^3: W ∩ B(0,1) is a complex 2-ball, area pi^2/2.
        let h = Hypersurface::new(MultiPoly::coordinate(3, 2), 1e-9).unwrap();
        let z = DVector::from_vec(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let s = sample_surface_in_ball(&h, &z, 1.0, 30_000, 29).unwrap();
        let truth = std::f64::consts::PI.powi(2) / 2.0;
        assert!(
            (s.area - truth).abs() <= 3.0 * s.area_std_error,
            "area {} vs {} (sigma {})",
            s.area,
            truth,
            s.area_std_error
        );
    }

    #[test]
    fn flatness_hyperplane_is_exactly_flat() {
        let h = plane();
        let z = vec2(c(0.0, 0.0), c(0.0, 0.0));
        let rep = flatness_check(&h, &z, 1.0, 2_000, 7).unwrap();
        assert!(rep.max_graph_constant <= 1e-6, "C = {}", rep.max_graph_constant);
        assert!(rep.epsilon_estimate >= 1.0 - 1e-12);
        assert!(rep.samples > 0);
    }

    #[test]
    fn flatness_random_hyperplane_is_flat() {
        let t = MultiPoly::from_terms(
            2,
            [
                (vec![1u16, 0u16], c(0.48, -0.36)),
                (vec![0, 1], c(0.64, 0.48)),
                (vec![0, 0], c(-0.2, 0.1)),
            ],
        );
        let h = Hypersurface::new(t, 1e-9).unwrap();
        let z = vec2(c(0.1, 0.0), c(0.3, 0.0));
        let rep = flatness_check(&h, &z, 2.0, 2_000, 13).unwrap();
        assert!(rep.max_graph_constant <= 1e-6, "C = {}", rep.max_graph_constant);
    }

    #[test]
    fn flatness_parabola_graph_constant_near_one() {
        let h = parabola();
        let z = vec2(c(0.0, 0.0), c(0.0, 0.0));
        let rep = flatness_check(&h, &z, 0.7, 4_000, 19).unwrap();
        assert!(
            rep.max_graph_constant >= 0.5 && rep.max_graph_constant <= 2.0,
            "C = {}",
            rep.max_graph_constant
        );
    }

    #[test]
    fn flatness_detects_approaching_branches() {
        let delta = 1e-4;
        let h = hyperbola(delta);
        let z = vec2(c(0.0, 0.0), c(0.0, 0.0));
        let rep = flatness_check(&h, &z, 0.3, 6_000, 31).unwrap();
        assert!(
            rep.epsilon_estimate <= 10.0 * delta.sqrt(),
            "epsilon = {} vs 10 sqrt(delta) = {}",
            rep.epsilon_estimate,
            10.0 * delta.sqrt()
        );
    }

    #[test]
    fn flatness_parameter_validation() {
        let h = plane();
        let z = vec2(c(0.0, 0.0), c(0.0, 0.0));
        assert_eq!(
            flatness_check(&h, &z, 1.0, 50, 1).unwrap_err(),
            SurfaceError::InvalidParameter("budget must be at least 100")
        );
        let far = vec2(c(0.0, 0.0), c(10.0, 0.0));
        assert_eq!(
            flatness_check(&h, &far, 1.0, 500, 1).unwrap_err(),
            SurfaceError::EmptyRegion
        );
    }
}
