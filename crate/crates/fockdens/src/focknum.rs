//! Truncated weighted Fock-space numerics: orthonormal monomial bases,
//! reproducing kernels, empirical sampling-ratio bounds, minimum-norm
//! extension from a hypersurface, and the 1-D Jensen determinacy ratio.
//!
//! All diagnostics work in the finite-dimensional space of polynomials of
//! degree at most `N`, orthonormalized for `∫ |·|² e^{-2 phi} dLebesgue`
//! with a purely quadratic `phi`. Truncation quality is surfaced as a
//! mass-leak figure rather than silently assumed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{
    cabs2, gen_eig_extremes, hermitian_eigen, AlgebraError, ComplexVector, HermitianForm,
};
use crate::hypersurface::{sample_surface_in_ball, Hypersurface, SurfaceError, SurfaceSample};
use crate::weights::{Weight, WeightError};
use crate::{sfrom, Scalar};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum FockError {
    #[error("basis requires quadratic weight")]
    NonQuadraticWeight,
    #[error("window/degree mismatch")]
    WindowDegreeMismatch,
    #[error("regularize or reduce degree")]
    Underdetermined,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Orthonormal basis of polynomials of degree `<= N` for the weighted
/// square norm, built by unitary diagonalization of the weight's Levi
/// matrix followed by closed-form monomial norms.
#[derive(Debug, Clone)]
pub struct FockBasis<S: Scalar> {
    n: usize,
    degree: usize,
    weight: Weight<S>,
    lambdas: Vec<S>,
    /// columns are the unitary eigenvectors: `Q = U diag(lambda) U^H`
    u: DMatrix<Complex<S>>,
    indices: Vec<Vec<u16>>,
    norms_sq: Vec<S>,
}

/// Empirical frame bounds of a target against the ambient ball.
#[derive(Debug, Clone)]
pub struct SamplingRatioReport<S: Scalar> {
    pub lower: S,
    pub upper: S,
    pub window_radius: S,
    pub degree: usize,
    pub conditioning: S,
    /// Largest relative norm mass any basis element keeps outside the window.
    pub mass_leak: S,
}

/// What the restriction Gram is built from.
pub enum RatioTarget<'a, S: Scalar> {
    /// Surface measure on `W ∩ B(0, R)` via line-slicing samples.
    Surface(&'a Hypersurface<S>),
    /// A discrete point set with weights `e^{-2 phi(p)}`.
    Points(&'a [ComplexVector<S>]),
    /// The ambient ball itself; the two Grams coincide.
    AmbientBall,
}

/// Minimum-norm extension outcome; coefficients are in the normalized basis
/// paired with their monomial multi-indices (in diagonalized coordinates).
#[derive(Debug, Clone)]
pub struct ExtensionReport<S: Scalar> {
    pub coefficients: Vec<(Vec<u16>, Complex<S>)>,
    pub residual: S,
    pub ambient_norm_sq: S,
    pub surface_norm_sq: S,
    /// `(ambient norm)^2 / (surface norm)^2`; 0 for identically zero data.
    pub ratio: S,
}

/// Zero-counting integral against curvature mass for a 1-D weight.
#[derive(Debug, Clone)]
pub struct JensenReport<S: Scalar> {
    pub radius: S,
    pub lhs: S,
    pub rhs: S,
    pub ratio: S,
}

fn is_good<S: Scalar>(x: S) -> bool {
    x == x && x.abs() <= sfrom::<S>(1e300)
}

/// All multi-indices of total degree `<= max_degree`, graded, lexicographic
/// within each degree.
fn multi_indices(n: usize, max_degree: usize) -> Vec<Vec<u16>> {
    fn fill(n: usize, left: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if cur.len() == n - 1 {
            let mut full = cur.clone();
            full.push(left as u16);
            out.push(full);
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k as u16);
            fill(n, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for d in 0..=max_degree {
        let mut cur = Vec::new();
        if n == 1 {
            out.push(vec![d as u16]);
        } else {
            fill(n, d, &mut cur, &mut out);
        }
    }
    out
}

/// Builds the orthonormal truncated basis; the weight must have no
/// pluriharmonic part.
pub fn build_basis<S: Scalar>(
    w: &Weight<S>,
    n: usize,
    degree: usize,
) -> Result<FockBasis<S>, FockError> {
    if w.dimension() != n {
        return Err(FockError::InvalidParameter("weight dimension mismatch"));
    }
    if w.pluriharmonic().terms().next().is_some() {
        return Err(FockError::NonQuadraticWeight);
    }
    let q = w.q_matrix();
    let (eigs, u) = hermitian_eigen(&q);
    let lambdas: Vec<S> = eigs.iter().copied().collect();
    let indices = multi_indices(n, degree);
    let mut norms_sq = Vec::with_capacity(indices.len());
    for alpha in &indices {
        // prod_i  pi * a_i! / (2 lambda_i)^{a_i + 1}
        let mut v = S::one();
        for (i, &a) in alpha.iter().enumerate() {
            let two_l = sfrom::<S>(2.0) * lambdas[i];
            let mut factor = S::pi() / two_l;
            for k in 1..=a as usize {
                factor = factor * sfrom::<S>(k as f64) / two_l;
            }
            v *= factor;
        }
        if !(v > S::zero() && is_good(v)) {
            return Err(FockError::InvalidParameter("basis norm overflow"));
        }
        norms_sq.push(v);
    }
    Ok(FockBasis { n, degree, weight: w.clone(), lambdas, u, indices, norms_sq })
}

impl<S: Scalar> FockBasis<S> {
    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn weight(&self) -> &Weight<S> {
        &self.weight
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[Vec<u16>] {
        &self.indices
    }

    pub fn norm_sq(&self, i: usize) -> S {
        self.norms_sq[i]
    }

    pub fn lambdas(&self) -> &[S] {
        &self.lambdas
    }

    /// Diagonalized coordinates `w = U^H z`.
    pub fn diag_coords(&self, z: &ComplexVector<S>) -> ComplexVector<S> {
        self.u.adjoint() * z
    }

    /// Values of every normalized basis element at `z`.
    pub fn eval_all(&self, z: &ComplexVector<S>) -> ComplexVector<S> {
        let w = self.diag_coords(z);
        // power table per coordinate
        let mut pows: Vec<Vec<Complex<S>>> = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut col = Vec::with_capacity(self.degree + 1);
            let mut acc = Complex::new(S::one(), S::zero());
            col.push(acc);
            for _ in 0..self.degree {
                acc *= w[i];
                col.push(acc);
            }
            pows.push(col);
        }
        DVector::from_iterator(
            self.indices.len(),
            self.indices.iter().zip(&self.norms_sq).map(|(alpha, &nsq)| {
                let mut v = Complex::new(S::one(), S::zero());
                for (i, &a) in alpha.iter().enumerate() {
                    v *= pows[i][a as usize];
                }
                v / Complex::new(nsq.sqrt(), S::zero())
            }),
        )
    }

    /// Basis values damped by `e^{-phi(z)}`: the numerically safe form for
    /// Gram assembly.
    pub fn eval_all_damped(&self, z: &ComplexVector<S>) -> ComplexVector<S> {
        let damp = (-self.weight.phi(z)).exp();
        self.eval_all(z).map(|c| c * Complex::new(damp, S::zero()))
    }
}

/// Reproducing kernel of the truncated space,
/// `K_N(z, w) = sum_alpha e_alpha(z) conj(e_alpha(w))`.
pub fn kernel_eval<S: Scalar>(
    b: &FockBasis<S>,
    z: &ComplexVector<S>,
    w: &ComplexVector<S>,
) -> Complex<S> {
    let ez = b.eval_all(z);
    let ew = b.eval_all(w);
    ez.iter()
        .zip(ew.iter())
        .map(|(a, c)| a * c.conj())
        .fold(Complex::new(S::zero(), S::zero()), |acc, t| acc + t)
}

// ---- regularized incomplete gamma ------------------------------------------

/// Lanczos approximation, valid for positive arguments.
fn ln_gamma<S: Scalar>(x: S) -> S {
    const COEF: [f64; 8] = [
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let g = sfrom::<S>(7.0);
    let xm = x - S::one();
    let mut acc = sfrom::<S>(0.999_999_999_999_809_93);
    for (i, &c) in COEF.iter().enumerate() {
        acc += sfrom::<S>(c) / (xm + sfrom::<S>((i + 1) as f64));
    }
    let t = xm + g + sfrom::<S>(0.5);
    let half = sfrom::<S>(0.5);
    let sqrt_two_pi = (sfrom::<S>(2.0) * S::pi()).sqrt();
    sqrt_two_pi.ln() + (xm + half) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma `P(a, x)` for `a > 0`, `x >= 0`:
/// series expansion below `a + 1`, Lentz continued fraction above.
pub fn reg_lower_gamma<S: Scalar>(a: S, x: S) -> S {
    if x <= S::zero() {
        return S::zero();
    }
    let log_prefix = -x + a * x.ln() - ln_gamma(a);
    let eps = sfrom::<S>(1e-15);
    if x < a + S::one() {
        let mut ap = a;
        let mut del = S::one() / a;
        let mut sum = del;
        for _ in 0..500 {
            ap += S::one();
            del = del * x / ap;
            sum += del;
            if del.abs() < sum.abs() * eps {
                break;
            }
        }
        sum * log_prefix.exp()
    } else {
        let tiny = sfrom::<S>(1e-300);
        let mut b = x + S::one() - a;
        let mut c = S::one() / tiny;
        let mut d = S::one() / b;
        let mut h = d;
        for i in 1..500 {
            let an = -sfrom::<S>(i as f64) * (sfrom::<S>(i as f64) - a);
            b += sfrom::<S>(2.0);
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = S::one() / d;
            let del = d * c;
            h *= del;
            if (del - S::one()).abs() < eps {
                break;
            }
        }
        S::one() - log_prefix.exp() * h
    }
}

// ---- ball-truncated Gram ----------------------------------------------------

/// Fraction of each basis element's squared norm inside `B(0, R)`: the
/// diagonal of the ball Gram in the normalized basis. Closed form when all
/// curvature eigenvalues agree; nested radial quadrature for `n = 2`.
fn ball_diag_ratios<S: Scalar>(b: &FockBasis<S>, radius: S) -> Result<Vec<S>, FockError> {
    let lam = &b.lambdas;
    let equal = lam.iter().all(|&l| (l - lam[0]).abs() <= sfrom::<S>(1e-12) * lam[0]);
    if equal {
        let l = lam[0];
        let x = sfrom::<S>(2.0) * l * radius * radius;
        return Ok(b
            .indices
            .iter()
            .map(|alpha| {
                let total: usize = alpha.iter().map(|&a| a as usize).sum();
                reg_lower_gamma(sfrom::<S>((total + b.n) as f64), x)
            })
            .collect());
    }
    if b.n != 2 {
        return Err(FockError::InvalidParameter(
            "anisotropic ball truncation implemented for n <= 2 only",
        ));
    }
    // numerator: iint_{s1^2+s2^2<R^2} prod s_i^{2 a_i + 1} e^{-2 l_i s_i^2};
    // the inner integral is an incomplete gamma, the outer one Simpson.
    let (l1, l2) = (lam[0], lam[1]);
    Ok(b
        .indices
        .iter()
        .zip(&b.norms_sq)
        .map(|(alpha, &nsq)| {
            let (a1, a2) = (alpha[0] as usize, alpha[1] as usize);
            let g2 = {
                // Gamma(a2 + 1) / (2 l2)^{a2 + 1}
                let mut v = S::one() / (sfrom::<S>(2.0) * l2);
                for k in 1..=a2 {
                    v = v * sfrom::<S>(k as f64) / (sfrom::<S>(2.0) * l2);
                }
                v
            };
            let steps = 4000usize;
            let hstep = radius / sfrom::<S>(steps as f64);
            let mut integral = S::zero();
            for j in 0..=steps {
                let s1 = hstep * sfrom::<S>(j as f64);
                let inner_arg = sfrom::<S>(2.0) * l2 * (radius * radius - s1 * s1).max(S::zero());
                let inner = sfrom::<S>(0.5)
                    * g2
                    * reg_lower_gamma(sfrom::<S>((a2 + 1) as f64), inner_arg);
                let f = s1.powi(2 * a1 as i32 + 1) * (-sfrom::<S>(2.0) * l1 * s1 * s1).exp()
                    * inner;
                let w = if j == 0 || j == steps {
                    S::one()
                } else if j % 2 == 1 {
                    sfrom::<S>(4.0)
                } else {
                    sfrom::<S>(2.0)
                };
                integral += w * f;
            }
            integral *= hstep / sfrom::<S>(3.0);
            // angular factors 2 pi per coordinate, half-line measure already
            // polar: full integral = (2 pi)^2 * integral
            let two_pi = sfrom::<S>(2.0) * S::pi();
            two_pi * two_pi * integral / nsq
        })
        .collect())
}

/// Empirical sampling-ratio bounds: extreme generalized eigenvalues of the
/// target Gram against the ball Gram over the truncated basis.
pub fn sampling_ratio_bounds<S: Scalar>(
    target: RatioTarget<'_, S>,
    w: &Weight<S>,
    window_radius: S,
    degree: usize,
    budget: usize,
    seed: u64,
) -> Result<SamplingRatioReport<S>, FockError> {
    if window_radius <= S::zero() {
        return Err(FockError::InvalidParameter("window radius must be positive"));
    }
    let basis = build_basis(w, w.dimension(), degree)?;
    let ratios = ball_diag_ratios(&basis, window_radius)?;
    let mut mass_leak = S::zero();
    for &r in &ratios {
        let leak = S::one() - r;
        if leak > mass_leak {
            mass_leak = leak;
        }
    }
    let dim = basis.len();
    let mut bmat = DMatrix::<Complex<S>>::zeros(dim, dim);
    for (i, &r) in ratios.iter().enumerate() {
        bmat[(i, i)] = Complex::new(r, S::zero());
    }
    let b_gram = HermitianForm::new(bmat);

    let a_gram = match target {
        RatioTarget::AmbientBall => b_gram.clone(),
        RatioTarget::Points(pts) => {
            let chunks: Vec<HermitianForm<S>> = pts
                .par_chunks(256.max(pts.len() / 64 + 1))
                .map(|chunk| {
                    let mut acc = HermitianForm::new(DMatrix::zeros(dim, dim));
                    for p in chunk {
                        let vals = basis.eval_all_damped(p);
                        acc.accumulate_projector(&vals, S::one());
                    }
                    acc
                })
                .collect();
            let mut a = HermitianForm::new(DMatrix::zeros(dim, dim));
            for c in chunks {
                a = a.add(&c);
            }
            a
        }
        RatioTarget::Surface(h) => {
            let center = DVector::from_element(h.dimension(), Complex::new(S::zero(), S::zero()));
            let sampling = sample_surface_in_ball(h, &center, window_radius, budget, seed)?;
            let chunks: Vec<HermitianForm<S>> = sampling
                .samples
                .par_chunks(256.max(sampling.samples.len() / 64 + 1))
                .map(|chunk| {
                    let mut acc = HermitianForm::new(DMatrix::zeros(dim, dim));
                    for s in chunk {
                        let vals = basis.eval_all_damped(&s.point);
                        acc.accumulate_projector(&vals, s.area_weight);
                    }
                    acc
                })
                .collect();
            let mut a = HermitianForm::new(DMatrix::zeros(dim, dim));
            for c in chunks {
                a = a.add(&c);
            }
            a
        }
    };

    let ext = gen_eig_extremes(&a_gram, &b_gram, sfrom::<S>(1e-12)).map_err(|e| match e {
        AlgebraError::IndefiniteDenominator => FockError::WindowDegreeMismatch,
        other => FockError::Algebra(other),
    })?;
    let lower = if ext.min > S::zero() { ext.min } else { S::zero() };
    Ok(SamplingRatioReport {
        lower,
        upper: ext.max.max(lower),
        window_radius,
        degree,
        conditioning: ext.b_condition(),
        mass_leak,
    })
}

/// Minimum-norm least-squares extension of surface data into the truncated
/// space: minimizes the ambient norm among least-squares fits of the
/// weighted samples; `lambda > 0` switches to ridge regression.
pub fn min_norm_extension<S: Scalar>(
    h: &Hypersurface<S>,
    value_samples: &[(SurfaceSample<S>, Complex<S>)],
    w: &Weight<S>,
    degree: usize,
    lambda: S,
) -> Result<ExtensionReport<S>, FockError> {
    let _ = h;
    if lambda < S::zero() {
        return Err(FockError::InvalidParameter("regularization must be nonnegative"));
    }
    if value_samples.is_empty() {
        return Err(FockError::InvalidParameter("no value samples"));
    }
    let basis = build_basis(w, w.dimension(), degree)?;
    let dim = basis.len();
    let rows = value_samples.len();
    if lambda == S::zero() && rows < dim {
        return Err(FockError::Underdetermined);
    }

    let mut e = DMatrix::<Complex<S>>::zeros(rows, dim);
    let mut y = DVector::<Complex<S>>::zeros(rows);
    let mut surface_norm_sq = S::zero();
    for (r, (smp, f)) in value_samples.iter().enumerate() {
        let damp = (-w.phi(&smp.point)).exp();
        let root_w = smp.area_weight.max(S::zero()).sqrt() * damp;
        let vals = basis.eval_all(&smp.point);
        for c in 0..dim {
            e[(r, c)] = vals[c] * Complex::new(root_w, S::zero());
        }
        y[r] = f * Complex::new(root_w, S::zero());
        surface_norm_sq += cabs2(*f) * damp * damp * smp.area_weight.max(S::zero());
    }

    let coeffs: DVector<Complex<S>> = if lambda == S::zero() {
        let svd = e.clone().svd(true, true);
        svd.solve(&y, sfrom::<S>(1e-12))
            .map_err(|_| FockError::Underdetermined)?
            .column(0)
            .into_owned()
    } else {
        // ridge normal equations: (E^H E + lambda I) c = E^H y
        let mut m = e.adjoint() * &e;
        for i in 0..dim {
            m[(i, i)] += Complex::new(lambda, S::zero());
        }
        let rhs = e.adjoint() * &y;
        match m.lu().solve(&rhs) {
            Some(c) => c,
            None => return Err(FockError::Underdetermined),
        }
    };

    let fit = &e * &coeffs;
    let mut residual_sq = S::zero();
    for r in 0..rows {
        residual_sq += cabs2(fit[r] - y[r]);
    }
    let ambient_norm_sq: S = coeffs.iter().map(|c| cabs2(*c)).sum();
    let ratio = if surface_norm_sq > S::zero() {
        ambient_norm_sq / surface_norm_sq
    } else {
        S::zero()
    };
    Ok(ExtensionReport {
        coefficients: basis
            .indices
            .iter()
            .cloned()
            .zip(coeffs.iter().copied())
            .collect(),
        residual: residual_sq.sqrt(),
        ambient_norm_sq,
        surface_norm_sq,
        ratio,
    })
}

/// Zero-counting integral `int_1^R n(0,s)/s ds` against the curvature mass
/// integral, in closed form for quadratic 1-D weights.
pub fn jensen_ratio<S: Scalar>(
    zeros: &[Complex<S>],
    w: &Weight<S>,
    radius: S,
) -> Result<JensenReport<S>, FockError> {
    if w.dimension() != 1 {
        return Err(FockError::InvalidParameter("jensen ratio is one-dimensional"));
    }
    if !(radius > S::one()) {
        return Err(FockError::InvalidParameter("radius must exceed 1"));
    }
    let mut lhs = S::zero();
    for g in zeros {
        let m = crate::algebra::cabs(*g);
        if m == S::zero() {
            return Err(FockError::InvalidParameter("zero at the origin"));
        }
        if m < radius {
            lhs += (radius / m.max(S::one())).ln();
        }
    }
    // real Laplacian of the quadratic part is 4 lambda; the double radial
    // integral of its disc mass is 2 pi lambda R^2
    let lam = w.q_matrix().matrix()[(0, 0)].re;
    let rhs = sfrom::<S>(2.0) * S::pi() * lam * radius * radius;
    let ratio = if rhs > S::zero() { lhs / rhs } else { S::zero() };
    Ok(JensenReport { radius, lhs, rhs, ratio })
}
