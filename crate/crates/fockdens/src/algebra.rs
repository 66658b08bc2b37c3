//! Complex linear algebra and polynomial primitives shared by all other modules.
//!
//! Houses points/directions in `C^n`, Hermitian (1,1)-forms, sparse
//! multivariate polynomials (defining functions `T`), their restrictions to
//! complex lines, a root finder with multiplicity clustering, and the
//! generalized Hermitian eigenproblem behind every density number.

use crate::{sfrom, Scalar};
use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex;
use std::collections::BTreeMap;
use thiserror::Error;

/// Point or direction in `C^n`.
pub type ComplexVector<S> = DVector<Complex<S>>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("degenerate direction")]
    DegenerateDirection,
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("indefinite denominator")]
    IndefiniteDenominator,
    #[error("root finding did not converge")]
    NoConvergence,
}

/// |c|^2 without the `Float` bound that the inherent `norm` would need.
#[inline]
pub fn cabs2<S: Scalar>(c: Complex<S>) -> S {
    c.re * c.re + c.im * c.im
}

/// |c| for the generic scalar.
#[inline]
pub fn cabs<S: Scalar>(c: Complex<S>) -> S {
    cabs2(c).sqrt()
}

/// Hermitian inner product `sum_i a_i conj(b_i)`.
#[inline]
pub fn hdot<S: Scalar>(a: &ComplexVector<S>, b: &ComplexVector<S>) -> Complex<S> {
    let mut acc = Complex::new(S::zero(), S::zero());
    for (x, y) in a.iter().zip(b.iter()) {
        acc += *x * y.conj();
    }
    acc
}

/// Euclidean norm of a complex vector.
#[inline]
pub fn vnorm<S: Scalar>(v: &ComplexVector<S>) -> S {
    v.iter().map(|c| cabs2(*c)).sum::<S>().sqrt()
}

/// n x n Hermitian matrix representing a (1,1)-form via
/// `H(v,w) = sum_{ij} H_ij v_i conj(w_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianForm<S: Scalar> {
    mat: DMatrix<Complex<S>>,
}

impl<S: Scalar> HermitianForm<S> {
    /// Builds the form from an arbitrary square matrix, symmetrizing
    /// `(M + M^H)/2` so the conjugate-symmetry invariant holds exactly.
    pub fn new(m: DMatrix<Complex<S>>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "HermitianForm requires a square matrix");
        let half = Complex::new(sfrom::<S>(0.5), S::zero());
        let sym = (&m + m.adjoint()) * half;
        Self { mat: sym }
    }

    pub fn zeros(n: usize) -> Self {
        Self { mat: DMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { mat: DMatrix::identity(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex<S>> {
        &self.mat
    }

    /// Real quadratic value `H(v,v)`.
    pub fn quad(&self, v: &ComplexVector<S>) -> S {
        self.pairing(v, v).re
    }

    /// Sesquilinear pairing `H(v,w)`; real on the diagonal.
    pub fn pairing(&self, v: &ComplexVector<S>, w: &ComplexVector<S>) -> Complex<S> {
        let hv = &self.mat * v;
        // sum_j (H v)_j conj(w_j), with H applied on the first slot
        let mut acc = Complex::new(S::zero(), S::zero());
        for (x, y) in hv.iter().zip(w.iter()) {
            acc += *x * y.conj();
        }
        acc
    }

    pub fn trace(&self) -> S {
        let mut t = S::zero();
        for i in 0..self.dim() {
            t += self.mat[(i, i)].re;
        }
        t
    }

    pub fn scale(&self, c: S) -> Self {
        Self { mat: self.mat.map(|x| x.scale(c)) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { mat: &self.mat + &other.mat }
    }

    /// Rank-one accumulate `H += c * conj(u) u^T`, i.e. the normal-projector
    /// contribution `H_ij += c * conj(u_i) u_j`.
    pub fn accumulate_projector(&mut self, u: &ComplexVector<S>, c: S) {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                self.mat[(i, j)] += (u[i].conj() * u[j]).scale(c);
            }
        }
    }
}

/// Sparse multivariate polynomial over `C^n`; multi-indices are stored in
/// lexicographic order for deterministic iteration and serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly<S: Scalar> {
    n: usize,
    terms: BTreeMap<Vec<u16>, Complex<S>>,
}

impl<S: Scalar> MultiPoly<S> {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Complex<S>) -> Self {
        let mut p = Self::zero(n);
        p.add_term(&vec![0; n], c);
        p
    }

    /// The coordinate function `z_i`.
    pub fn coordinate(n: usize, i: usize) -> Self {
        assert!(i < n);
        let mut alpha = vec![0u16; n];
        alpha[i] = 1;
        let mut p = Self::zero(n);
        p.add_term(&alpha, Complex::new(S::one(), S::zero()));
        p
    }

    pub fn from_terms<I>(n: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u16>, Complex<S>)>,
    {
        let mut p = Self::zero(n);
        for (alpha, c) in terms {
            p.add_term(&alpha, c);
        }
        p
    }

    /// Adds `c * z^alpha`, dropping the term if the sum cancels to zero.
    pub fn add_term(&mut self, alpha: &[u16], c: Complex<S>) {
        assert_eq!(alpha.len(), self.n, "multi-index length must equal dimension");
        if c == Complex::new(S::zero(), S::zero()) {
            return;
        }
        let entry = self.terms.entry(alpha.to_vec()).or_insert(Complex::new(S::zero(), S::zero()));
        *entry += c;
        if *entry == Complex::new(S::zero(), S::zero()) {
            self.terms.remove(alpha);
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u16>, &Complex<S>)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; -1 for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.terms
            .keys()
            .map(|a| a.iter().map(|&e| e as isize).sum())
            .max()
            .unwrap_or(-1)
    }

    pub fn map_coeffs(&self, f: impl Fn(Complex<S>) -> Complex<S>) -> Self {
        let mut p = Self::zero(self.n);
        for (a, c) in &self.terms {
            p.add_term(a, f(*c));
        }
        p
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut p = Self::zero(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let alpha: Vec<u16> = a.iter().zip(b.iter()).map(|(x, y)| x + y).collect();
                p.add_term(&alpha, *ca * *cb);
            }
        }
        p
    }

    /// Univariate product `prod_k (z - gamma_k)` as a 1-variable MultiPoly.
    pub fn from_roots_1d(roots: &[Complex<S>]) -> Self {
        let mut q = UniPoly::from_roots(roots);
        let mut p = Self::zero(1);
        for (k, c) in q.coeffs.drain(..).enumerate() {
            p.add_term(&[k as u16], c);
        }
        p
    }
}

/// Evaluates `p` and its holomorphic gradient at `z`.
pub fn eval_poly<S: Scalar>(
    p: &MultiPoly<S>,
    z: &ComplexVector<S>,
) -> Result<(Complex<S>, ComplexVector<S>), AlgebraError> {
    if z.len() != p.n {
        return Err(AlgebraError::Dimension { expected: p.n, got: z.len() });
    }
    let zero = Complex::new(S::zero(), S::zero());
    let mut value = zero;
    let mut grad = ComplexVector::<S>::from_element(p.n, zero);
    // per-term powers; degrees here are small (<= ~64)
    for (alpha, c) in &p.terms {
        let mut powers: Vec<Complex<S>> = Vec::with_capacity(p.n);
        let mut term = *c;
        for (i, &e) in alpha.iter().enumerate() {
            let mut pw = Complex::new(S::one(), S::zero());
            for _ in 0..e {
                pw *= z[i];
            }
            powers.push(pw);
            term *= pw;
        }
        value += term;
        for (i, &e) in alpha.iter().enumerate() {
            if e == 0 {
                continue;
            }
            // c * e * z^(alpha - e_i)
            let mut g = c.scale(sfrom::<S>(e as f64));
            for (j, &ej) in alpha.iter().enumerate() {
                if j == i {
                    let mut pw = Complex::new(S::one(), S::zero());
                    for _ in 0..ej - 1 {
                        pw *= z[j];
                    }
                    g *= pw;
                } else {
                    g *= powers[j];
                }
            }
            grad[i] += g;
        }
    }
    Ok((value, grad))
}

/// Univariate polynomial with ascending coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct UniPoly<S: Scalar> {
    coeffs: Vec<Complex<S>>,
}

impl<S: Scalar> UniPoly<S> {
    /// Trims exact trailing zeros so the leading coefficient is nonzero
    /// unless the polynomial is identically zero.
    pub fn new(mut coeffs: Vec<Complex<S>>) -> Self {
        let zero = Complex::new(S::zero(), S::zero());
        while coeffs.last().is_some_and(|c| *c == zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn from_roots(roots: &[Complex<S>]) -> Self {
        let one = Complex::new(S::one(), S::zero());
        let mut coeffs = vec![one];
        for r in roots {
            let mut next = vec![Complex::new(S::zero(), S::zero()); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k + 1] += *c;
                next[k] -= *c * *r;
            }
            coeffs = next;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex<S>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; -1 for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn eval(&self, t: Complex<S>) -> Complex<S> {
        let mut acc = Complex::new(S::zero(), S::zero());
        for c in self.coeffs.iter().rev() {
            acc = acc * t + *c;
        }
        acc
    }

    /// Value and derivative by a joint Horner pass.
    pub fn eval_with_derivative(&self, t: Complex<S>) -> (Complex<S>, Complex<S>) {
        let zero = Complex::new(S::zero(), S::zero());
        let mut p = zero;
        let mut dp = zero;
        for c in self.coeffs.iter().rev() {
            dp = dp * t + p;
            p = p * t + *c;
        }
        (p, dp)
    }
}

/// Restricts `p` to the affine complex line `t -> a + t v`.
pub fn restrict_to_line<S: Scalar>(
    p: &MultiPoly<S>,
    a: &ComplexVector<S>,
    v: &ComplexVector<S>,
) -> Result<UniPoly<S>, AlgebraError> {
    if a.len() != p.n {
        return Err(AlgebraError::Dimension { expected: p.n, got: a.len() });
    }
    if v.len() != p.n {
        return Err(AlgebraError::Dimension { expected: p.n, got: v.len() });
    }
    if vnorm(v) == S::zero() {
        return Err(AlgebraError::DegenerateDirection);
    }
    let zero = Complex::new(S::zero(), S::zero());
    let one = Complex::new(S::one(), S::zero());
    let mut out: Vec<Complex<S>> = vec![zero];
    let add_into = |acc: &mut Vec<Complex<S>>, other: &[Complex<S>]| {
        if acc.len() < other.len() {
            acc.resize(other.len(), zero);
        }
        for (k, c) in other.iter().enumerate() {
            acc[k] += *c;
        }
    };
    for (alpha, c) in &p.terms {
        // coefficients of c * prod_i (a_i + v_i t)^{alpha_i}
        let mut factor = vec![*c];
        for (i, &e) in alpha.iter().enumerate() {
            for _ in 0..e {
                let mut next = vec![zero; factor.len() + 1];
                for (k, f) in factor.iter().enumerate() {
                    next[k] += *f * a[i];
                    next[k + 1] += *f * v[i];
                }
                factor = next;
            }
        }
        let _ = one;
        add_into(&mut out, &factor);
    }
    Ok(UniPoly::new(out))
}

/// All roots of `q` with multiplicities. Aberth-Ehrlich simultaneous
/// iteration, Newton polishing, then clustering within radius
/// `1e-6 * (1 + |root|)` to recover multiplicities.
pub fn poly_roots<S: Scalar>(
    q: &UniPoly<S>,
) -> Result<Vec<(Complex<S>, usize)>, AlgebraError> {
    if q.is_zero() {
        return Err(AlgebraError::ZeroPolynomial);
    }
    let zero = Complex::new(S::zero(), S::zero());
    let mut coeffs = q.coeffs.clone();
    // roots at the origin: trailing zero coefficients in the constant end
    let mut zero_mult = 0usize;
    while coeffs.first().is_some_and(|c| *c == zero) {
        coeffs.remove(0);
        zero_mult += 1;
    }
    let mut found: Vec<Complex<S>> = Vec::new();
    if coeffs.len() > 1 {
        // normalize by the largest coefficient magnitude for scale safety
        let scale = coeffs
            .iter()
            .map(|c| cabs(*c))
            .fold(S::zero(), |a, b| if b > a { b } else { a });
        let work = UniPoly::new(coeffs.iter().map(|c| c.unscale(scale)).collect());
        found = aberth(&work)?;
    }
    for _ in 0..zero_mult {
        found.push(zero);
    }
    if found.iter().any(|r| !finite_scalar(r.re) || !finite_scalar(r.im)) {
        return Err(AlgebraError::NoConvergence);
    }
    // deterministic order before clustering
    found.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    let cluster_radius = |c: Complex<S>| sfrom::<S>(1e-6) * (S::one() + cabs(c));
    let mut out: Vec<(Complex<S>, usize)> = Vec::new();
    let mut used = vec![false; found.len()];
    for i in 0..found.len() {
        if used[i] {
            continue;
        }
        let seed = found[i];
        let rad = cluster_radius(seed);
        let mut sum = zero;
        let mut count = 0usize;
        for (j, r) in found.iter().enumerate() {
            if !used[j] && cabs(*r - seed) <= rad {
                used[j] = true;
                sum += *r;
                count += 1;
            }
        }
        let centroid = sum.unscale(sfrom::<S>(count as f64));
        out.push((centroid, count));
    }
    Ok(out)
}

/// True for an ordinary finite value (rejects NaN and overflow).
fn finite_scalar<S: Scalar>(x: S) -> bool {
    x == x && x.abs() <= sfrom(1e300)
}

/// Aberth-Ehrlich iteration on a polynomial with nonzero constant term.
fn aberth<S: Scalar>(q: &UniPoly<S>) -> Result<Vec<Complex<S>>, AlgebraError> {
    let d = q.degree() as usize;
    let lead = *q.coeffs.last().unwrap();
    // Fujiwara bound on root magnitudes: 2 max_k |c_{d-k}/c_d|^{1/k}. Unlike
    // the Cauchy bound it stays modest when the leading coefficient is small
    // relative to the rest, which keeps the start circle (and hence |z|^d)
    // far from overflow.
    let mut bound = S::zero();
    for k in 1..=d {
        let ratio = cabs(q.coeffs[d - k] / lead);
        if ratio > S::zero() {
            let b = ratio.powf(S::one() / sfrom::<S>(k as f64));
            if b > bound {
                bound = b;
            }
        }
    }
    let bound = bound * sfrom::<S>(2.0);
    let start_radius = bound * sfrom::<S>(0.7);
    let init = |k: usize, phase: f64| {
        let theta = 2.0 * std::f64::consts::PI * (k as f64) / (d as f64) + 0.7 + phase;
        Complex::new(
            start_radius * sfrom::<S>(theta.cos()),
            start_radius * sfrom::<S>(theta.sin()),
        )
    };
    let mut z: Vec<Complex<S>> = (0..d).map(|k| init(k, 0.0)).collect();
    let eps = S::default_epsilon() * sfrom::<S>(100.0);
    let max_iter = 600;
    let mut converged = false;
    for iter in 0..max_iter {
        let mut max_step = S::zero();
        for k in 0..d {
            let (p, dp) = q.eval_with_derivative(z[k]);
            if !finite_scalar(cabs(p)) || !finite_scalar(cabs(dp)) {
                // escaped to overflow territory: restart this approximation
                z[k] = init(k, 0.37 * (1 + iter) as f64);
                max_step = S::one();
                continue;
            }
            if cabs(p) == S::zero() {
                continue;
            }
            let w = if cabs(dp) > S::zero() {
                p / dp
            } else {
                // stationary point: nudge off it
                z[k] += Complex::new(sfrom::<S>(1e-4), sfrom::<S>(2e-4));
                max_step = S::one();
                continue;
            };
            let mut s = Complex::new(S::zero(), S::zero());
            for j in 0..d {
                if j != k {
                    let diff = z[k] - z[j];
                    if cabs(diff) > S::zero() {
                        s += Complex::new(S::one(), S::zero()) / diff;
                    }
                }
            }
            let denom = Complex::new(S::one(), S::zero()) - w * s;
            let mut delta = if cabs(denom) > sfrom::<S>(1e-30) { w / denom } else { w };
            if !finite_scalar(cabs(delta)) {
                z[k] = init(k, 0.37 * (1 + iter) as f64);
                max_step = S::one();
                continue;
            }
            // clamp the step so one overshoot cannot leave the root region
            let dmax = S::one() + cabs(z[k]);
            let dlen = cabs(delta);
            if dlen > dmax {
                delta = delta * Complex::new(dmax / dlen, S::zero());
            }
            z[k] -= delta;
            let rel = cabs(delta) / (S::one() + cabs(z[k]));
            if rel > max_step {
                max_step = rel;
            }
        }
        if max_step < eps {
            converged = true;
            break;
        }
    }
    if !converged {
        // multiple roots converge linearly; accept if residuals are tiny
        let ok = z.iter().all(|&r| {
            let (p, _) = q.eval_with_derivative(r);
            cabs(p) < sfrom::<S>(1e-7)
        });
        if !ok {
            return Err(AlgebraError::NoConvergence);
        }
    }
    // Newton polish
    for r in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = q.eval_with_derivative(*r);
            if cabs(dp) > sfrom::<S>(1e-300) {
                let step = p / dp;
                if cabs(step) < S::one() {
                    *r -= step;
                }
            }
        }
    }
    Ok(z)
}

/// Eigendecomposition of a Hermitian form: ascending eigenvalues and a
/// unitary matrix of eigenvectors (columns), `H = U diag(ev) U^H`.
///
/// Computed through the real symmetric embedding `[[X, -Y], [Y, X]]` of
/// `H = X + iY`, whose spectrum doubles every eigenvalue of `H`; complex
/// eigenvectors are recovered by mapping `(u; w) -> u + iw` and
/// re-orthonormalizing over `C`.
pub fn hermitian_eigen<S: Scalar>(
    h: &HermitianForm<S>,
) -> (DVector<S>, DMatrix<Complex<S>>) {
    let n = h.dim();
    let m = h.matrix();
    let mut embed = DMatrix::<S>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let x = m[(i, j)].re;
            let y = m[(i, j)].im;
            embed[(i, j)] = x;
            embed[(n + i, n + j)] = x;
            embed[(i, n + j)] = -y;
            embed[(n + i, j)] = y;
        }
    }
    let se = nalgebra::SymmetricEigen::new(embed);
    // sort embedded pairs ascending
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let zero = Complex::new(S::zero(), S::zero());
    let mut values = Vec::with_capacity(n);
    let mut vectors: Vec<ComplexVector<S>> = Vec::with_capacity(n);
    let keep_tol = sfrom::<S>(1e-6);
    for &idx in &order {
        if vectors.len() == n {
            break;
        }
        let col = se.eigenvectors.column(idx);
        let mut v = ComplexVector::<S>::from_element(n, zero);
        for i in 0..n {
            v[i] = Complex::new(col[i], col[n + i]);
        }
        // project out the span of already accepted eigenvectors
        for u in &vectors {
            let c = hdot(&v, u);
            for i in 0..n {
                v[i] -= c * u[i];
            }
        }
        let norm = vnorm(&v);
        if norm > keep_tol {
            for i in 0..n {
                v[i] = v[i].unscale(norm);
            }
            values.push(se.eigenvalues[idx]);
            vectors.push(v);
        }
    }
    debug_assert_eq!(vectors.len(), n, "embedded eigenbasis extraction failed");
    let mut u = DMatrix::<Complex<S>>::zeros(n, n);
    for (j, v) in vectors.iter().enumerate() {
        for i in 0..n {
            u[(i, j)] = v[i];
        }
    }
    (DVector::from_vec(values), u)
}

/// Extreme generalized eigenvalues of the Hermitian pencil `(A, B)` with
/// `B` positive definite, plus conditioning data for `B`.
#[derive(Debug, Clone)]
pub struct PencilExtremes<S: Scalar> {
    pub min: S,
    pub max: S,
    pub min_vector: ComplexVector<S>,
    pub max_vector: ComplexVector<S>,
    pub b_min_eig: S,
    pub b_max_eig: S,
}

impl<S: Scalar> PencilExtremes<S> {
    pub fn b_condition(&self) -> S {
        self.b_max_eig / self.b_min_eig
    }
}

/// Solves the pencil by Cholesky-whitening `B` and running a Hermitian
/// eigendecomposition of `L^{-1} A L^{-H}`.
pub fn gen_eig_extremes<S: Scalar>(
    a: &HermitianForm<S>,
    b: &HermitianForm<S>,
    b_floor: S,
) -> Result<PencilExtremes<S>, AlgebraError> {
    assert_eq!(a.dim(), b.dim(), "pencil dimensions must match");
    let (b_eigs, _) = hermitian_eigen(b);
    let b_min_eig = b_eigs[0];
    let b_max_eig = b_eigs[b_eigs.len() - 1];
    if !(b_min_eig > b_floor) {
        return Err(AlgebraError::IndefiniteDenominator);
    }
    let chol = nalgebra::Cholesky::new(b.matrix().clone())
        .ok_or(AlgebraError::IndefiniteDenominator)?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(a.matrix())
        .ok_or(AlgebraError::IndefiniteDenominator)?;
    let y = l
        .solve_lower_triangular(&x.adjoint())
        .ok_or(AlgebraError::IndefiniteDenominator)?;
    let whitened = HermitianForm::new(y.adjoint());
    let (evals, evecs) = hermitian_eigen(&whitened);
    let n = evals.len();
    let lt = l.adjoint();
    let unwhiten = |u: ComplexVector<S>| -> ComplexVector<S> {
        let v = lt
            .solve_upper_triangular(&u)
            .expect("upper solve after successful Cholesky");
        let norm = vnorm(&v);
        v.map(|c| c.unscale(norm))
    };
    let min_vector = unwhiten(evecs.column(0).into_owned());
    let max_vector = unwhiten(evecs.column(n - 1).into_owned());
    Ok(PencilExtremes {
        min: evals[0],
        max: evals[n - 1],
        min_vector,
        max_vector,
        b_min_eig,
        b_max_eig,
    })
}

/// Largest generalized eigenvalue `max_v A(v,v)/B(v,v)` with a maximizing
/// unit direction; `B` must be positive definite (smallest eigenvalue above
/// 1e-10).
pub fn max_gen_eig<S: Scalar>(
    a: &HermitianForm<S>,
    b: &HermitianForm<S>,
) -> Result<(S, ComplexVector<S>), AlgebraError> {
    let ext = gen_eig_extremes(a, b, sfrom::<S>(1e-10))?;
    Ok((ext.max, ext.max_vector))
}
