//! Plurisubharmonic weights: values, Levi forms, ball averages and the
//! comparability constants of the standing hypothesis `C omega <= i ddbar phi
//! <= C' omega`.
//!
//! The weight family is quadratic-plus-pluriharmonic,
//! `phi(z) = sum Q_ij z_i conj(z_j) + 2 Re h(z)` with `Q` positive definite
//! and `h` a holomorphic polynomial; the Euclidean case is `Q = I`, `h = 0`.
//! Ball averages are with respect to Lebesgue measure on `R^{2n}`.

use crate::algebra::{eval_poly, hermitian_eigen, ComplexVector, HermitianForm, MultiPoly};
use crate::{sfrom, Scalar};
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum WeightError {
    #[error("weight matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("radius must be positive")]
    NonPositiveRadius,
    #[error("region must be nonempty")]
    EmptyRegion,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind<S: Scalar> {
    Euclidean,
    Quadratic { q: HermitianForm<S>, h: MultiPoly<S> },
}

/// The weight `phi`. Immutable once constructed; all fields validated.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight<S: Scalar> {
    n: usize,
    kind: Kind<S>,
}

/// Extremes of the Levi spectrum over a sampled region; the empirical
/// `C, C'` of the comparability hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparabilityReport<S: Scalar> {
    pub c_lower: S,
    pub c_upper: S,
    pub sample_count: usize,
}

impl<S: Scalar> Weight<S> {
    /// `phi(z) = |z|^2`.
    pub fn euclidean(n: usize) -> Self {
        Self { n, kind: Kind::Euclidean }
    }

    /// Quadratic weight with Levi part `q` and pluriharmonic part `2 Re h`.
    pub fn quadratic(q: HermitianForm<S>, h: MultiPoly<S>) -> Result<Self, WeightError> {
        let n = q.dim();
        if h.dimension() != n {
            return Err(WeightError::Dimension { expected: n, got: h.dimension() });
        }
        let (eigs, _) = hermitian_eigen(&q);
        if !(eigs[0] > S::zero()) {
            return Err(WeightError::NotPositiveDefinite);
        }
        Ok(Self { n, kind: Kind::Quadratic { q, h } })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.kind, Kind::Euclidean)
    }

    /// The constant Levi matrix `Q` (identity in the Euclidean case).
    pub fn q_matrix(&self) -> HermitianForm<S> {
        match &self.kind {
            Kind::Euclidean => HermitianForm::identity(self.n),
            Kind::Quadratic { q, .. } => q.clone(),
        }
    }

    /// The pluriharmonic polynomial `h` (zero in the Euclidean case).
    pub fn pluriharmonic(&self) -> MultiPoly<S> {
        match &self.kind {
            Kind::Euclidean => MultiPoly::zero(self.n),
            Kind::Quadratic { h, .. } => h.clone(),
        }
    }

    /// `phi(z)`.
    pub fn phi(&self, z: &ComplexVector<S>) -> S {
        assert_eq!(z.len(), self.n, "weight dimension");
        match &self.kind {
            Kind::Euclidean => z.iter().map(|c| crate::algebra::cabs2(*c)).sum(),
            Kind::Quadratic { q, h } => {
                let quad = q.quad(z);
                let (hv, _) = eval_poly(h, z).expect("dimension checked");
                quad + sfrom::<S>(2.0) * hv.re
            }
        }
    }
}

/// Matrix of `d^2 phi / dz_i dzbar_j` at `z`; constant for this family.
pub fn levi_form<S: Scalar>(w: &Weight<S>, z: &ComplexVector<S>) -> HermitianForm<S> {
    assert_eq!(z.len(), w.dimension(), "weight dimension");
    w.q_matrix()
}

/// Mean of `|z_1|^2` (complex modulus squared of one coordinate) over the
/// ball `B(0,r)` in `R^{2n}`.
pub fn kappa<S: Scalar>(n: usize, r: S) -> S {
    r * r / sfrom::<S>((n + 1) as f64)
}

/// Lebesgue volume of the ball of radius `r` in `C^n = R^{2n}`:
/// `pi^n r^{2n} / n!`.
pub fn ball_volume<S: Scalar>(n: usize, r: S) -> S {
    let mut v = S::one();
    for k in 1..=n {
        v = v * S::pi() / sfrom::<S>(k as f64);
    }
    v * r.powi(2 * n as i32)
}

/// Mean of `phi` over `B(z,r)` with respect to Lebesgue measure, in closed
/// form: the quadratic part contributes `trace(Q) * kappa(n,r)`, the
/// pluriharmonic part averages to its center value.
pub fn ball_average_phi<S: Scalar>(
    w: &Weight<S>,
    z: &ComplexVector<S>,
    r: S,
) -> Result<S, WeightError> {
    if !(r > S::zero()) {
        return Err(WeightError::NonPositiveRadius);
    }
    if z.len() != w.dimension() {
        return Err(WeightError::Dimension { expected: w.dimension(), got: z.len() });
    }
    let q = w.q_matrix();
    Ok(w.phi(z) + q.trace() * kappa(w.dimension(), r))
}

/// Levi-spectrum extremes over the given points.
pub fn comparability_bounds<S: Scalar>(
    w: &Weight<S>,
    region: &[ComplexVector<S>],
) -> Result<ComparabilityReport<S>, WeightError> {
    if region.is_empty() {
        return Err(WeightError::EmptyRegion);
    }
    let mut c_lower = S::max_value().unwrap_or_else(S::one);
    let mut c_upper = S::min_value().unwrap_or_else(|| -S::one());
    for z in region {
        let levi = levi_form(w, z);
        let (eigs, _) = hermitian_eigen(&levi);
        if eigs[0] < c_lower {
            c_lower = eigs[0];
        }
        if eigs[eigs.len() - 1] > c_upper {
            c_upper = eigs[eigs.len() - 1];
        }
    }
    Ok(ComparabilityReport { c_lower, c_upper, sample_count: region.len() })
}

/// The two-variable weight `|z|^2 + |z+w|^2`; expands to
/// `Q = [[2, 1], [1, 1]]` with no pluriharmonic part.
pub fn shifted_pair_weight<S: Scalar>() -> Weight<S> {
    use nalgebra::DMatrix;
    use num_complex::Complex;
    let one = Complex::new(S::one(), S::zero());
    let two = Complex::new(sfrom::<S>(2.0), S::zero());
    let q = HermitianForm::new(DMatrix::from_row_slice(2, 2, &[two, one, one, one]));
    Weight::quadratic(q, MultiPoly::zero(2)).expect("positive definite by construction")
}
