//! Sequence geometry in one variable and the two explicit product-sequence
//! criteria on `C^2`: separation, disc-counting densities, and the
//! split-density checks for interpolation and sampling.
//!
//! Density conventions are a recurring trap: the disc-count denominator uses
//! the real Laplacian (`4 phi_{z zbar}`), and every grid inequality is
//! reported twice, once per convention, because the two sides of the
//! criterion scale differently under the choice. Verdicts are issued only
//! when both conventions agree.

use num_complex::Complex;
use thiserror::Error;

use crate::algebra::{cabs, ComplexVector};
use crate::weights::Weight;
use crate::{sfrom, Scalar};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SeqError {
    #[error("duplicate point in sequence")]
    DuplicatePoint,
    #[error("separation requires at least 2 points")]
    TooFewPoints,
    #[error("one lambda sequence per gamma point")]
    LengthMismatch,
    #[error("degenerate Levi form")]
    DegenerateLevi,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A finite point set in one complex variable; construction rejects
/// duplicates so the separation is strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence1D<S: Scalar> {
    points: Vec<Complex<S>>,
    label: String,
}

impl<S: Scalar> Sequence1D<S> {
    pub fn new(points: Vec<Complex<S>>, label: impl Into<String>) -> Result<Self, SeqError> {
        let mut sorted: Vec<(S, S)> = points.iter().map(|p| (p.re, p.im)).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(SeqError::DuplicatePoint);
            }
        }
        Ok(Self { points, label: label.into() })
    }

    pub fn points(&self) -> &[Complex<S>] {
        &self.points
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `Sigma = {(gamma_j, lambda_{jk})}`: one vertical point set per base point.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSequence<S: Scalar> {
    pub gamma: Sequence1D<S>,
    pub lambdas: Vec<Sequence1D<S>>,
}

impl<S: Scalar> ProductSequence<S> {
    pub fn new(gamma: Sequence1D<S>, lambdas: Vec<Sequence1D<S>>) -> Result<Self, SeqError> {
        if gamma.len() != lambdas.len() {
            return Err(SeqError::LengthMismatch);
        }
        Ok(Self { gamma, lambdas })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Satisfied => write!(f, "satisfied"),
            Verdict::Violated => write!(f, "violated"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// One grid point's inequality data. `margin` is the satisfaction margin of
/// the tested inequality (positive when it holds strictly), in the real
/// Laplacian convention; the `_dbar` fields restate both sides with all
/// factors in the complex Hessian convention.
#[derive(Debug, Clone)]
pub struct GridMargin<S: Scalar> {
    pub point: ComplexVector<S>,
    pub lhs: S,
    pub rhs: S,
    pub margin: S,
    pub lhs_dbar: S,
    pub rhs_dbar: S,
    pub margin_dbar: S,
}

/// Outcome of a product-sequence criterion over a grid.
#[derive(Debug, Clone)]
pub struct CriterionReport<S: Scalar> {
    pub margins: Vec<GridMargin<S>>,
    pub min_margin: S,
    pub max_margin: S,
    /// Worst-case 1-D density of each vertical sequence over the radius
    /// schedule (largest for the interpolation check, smallest for sampling).
    pub lambda_densities: Vec<S>,
    pub verdict: Verdict,
    pub caveat: String,
}

const CAVEAT: &str = "sufficient condition only: a 'violated' verdict does not decide \
interpolation or sampling, it only reports that this criterion fails";

/// Minimum pairwise distance.
pub fn separation<S: Scalar>(s: &Sequence1D<S>) -> Result<S, SeqError> {
    if s.len() < 2 {
        return Err(SeqError::TooFewPoints);
    }
    let mut best = S::max_value().unwrap_or_else(S::one);
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let d = cabs(s.points[i] - s.points[j]);
            if d < best {
                best = d;
            }
        }
    }
    Ok(best)
}

/// Points of `s` in the open disc `D(z, radius)` divided by the disc mass of
/// the real Laplacian of the weight: `count / (4 pi lambda R^2)`.
pub fn density_1d<S: Scalar>(
    s: &Sequence1D<S>,
    w: &Weight<S>,
    z: Complex<S>,
    radius: S,
) -> Result<S, SeqError> {
    if w.dimension() != 1 {
        return Err(SeqError::InvalidParameter("density_1d needs a 1-D weight"));
    }
    if !(radius > S::zero()) {
        return Err(SeqError::InvalidParameter("radius must be positive"));
    }
    let lam = w.q_matrix().matrix()[(0, 0)].re;
    let count = s.points.iter().filter(|p| cabs(*p - z) < radius).count();
    Ok(sfrom::<S>(count as f64) / (sfrom::<S>(4.0) * S::pi() * lam * radius * radius))
}

/// Same count against the curvature in the second variable of a 2-D weight,
/// used for the vertical sequences of a product.
fn density_vertical<S: Scalar>(
    s: &Sequence1D<S>,
    lam_w: S,
    center: Complex<S>,
    radius: S,
) -> S {
    let count = s.points.iter().filter(|p| cabs(*p - center) < radius).count();
    sfrom::<S>(count as f64) / (sfrom::<S>(4.0) * S::pi() * lam_w * radius * radius)
}

/// Worst-case vertical density over the schedule `{r, 2r, 4r}` and a
/// deterministic set of centers (origin plus the 16 points nearest it).
/// `take_max` picks the direction that is adversarial for the check.
fn schedule_density<S: Scalar>(s: &Sequence1D<S>, lam_w: S, r: S, take_max: bool) -> S {
    let mut centers: Vec<Complex<S>> = vec![Complex::new(S::zero(), S::zero())];
    let mut by_norm: Vec<Complex<S>> = s.points.to_vec();
    by_norm.sort_by(|a, b| {
        (cabs(*a), a.re, a.im)
            .partial_cmp(&(cabs(*b), b.re, b.im))
            .expect("finite coordinates")
    });
    centers.extend(by_norm.into_iter().take(16));
    let mut worst: Option<S> = None;
    for k in 0..3u32 {
        let radius = r * sfrom::<S>(f64::from(1u32 << k));
        for &c in &centers {
            let d = density_vertical(s, lam_w, c, radius);
            worst = Some(match worst {
                None => d,
                Some(w) if take_max => w.max(d),
                Some(w) => w.min(d),
            });
        }
    }
    worst.unwrap_or_else(S::zero)
}

struct LeviData<S: Scalar> {
    q11: S,
    q22: S,
    det: S,
}

fn levi_data<S: Scalar>(w: &Weight<S>) -> Result<LeviData<S>, SeqError> {
    if w.dimension() != 2 {
        return Err(SeqError::InvalidParameter("product checks need a 2-D weight"));
    }
    let q = w.q_matrix();
    let m = q.matrix();
    let q11 = m[(0, 0)].re;
    let q22 = m[(1, 1)].re;
    let det = q11 * q22 - crate::algebra::cabs2(m[(0, 1)]);
    if !(det > sfrom::<S>(1e-12) && q11 > S::zero() && q22 > S::zero()) {
        return Err(SeqError::DegenerateLevi);
    }
    Ok(LeviData { q11, q22, det })
}

fn split_margins<S: Scalar>(
    gamma: &Sequence1D<S>,
    levi: &LeviData<S>,
    r: S,
    grid: &[ComplexVector<S>],
    sampling_direction: bool,
) -> Result<Vec<GridMargin<S>>, SeqError> {
    let four = sfrom::<S>(4.0);
    let mut out = Vec::with_capacity(grid.len());
    for x in grid {
        if x.len() != 2 {
            return Err(SeqError::InvalidParameter("grid points must be two-dimensional"));
        }
        let count = gamma.points.iter().filter(|g| cabs(*g - x[0]) < r).count();
        let count_s = sfrom::<S>(count as f64);
        // real Laplacian convention: Delta_z = 4 q11, Delta_w = 4 q22, while
        // the determinant stays the complex Hessian's
        let lhs = count_s / (r * r * four * levi.q11);
        let rhs = levi.det / (four * levi.q11 * four * levi.q22);
        // complex Hessian convention throughout
        let lhs_dbar = count_s / (r * r * levi.q11);
        let rhs_dbar = levi.det / (levi.q11 * levi.q22);
        let (margin, margin_dbar) = if sampling_direction {
            (lhs - rhs, lhs_dbar - rhs_dbar)
        } else {
            (rhs - lhs, rhs_dbar - lhs_dbar)
        };
        out.push(GridMargin {
            point: x.clone(),
            lhs,
            rhs,
            margin,
            lhs_dbar,
            rhs_dbar,
            margin_dbar,
        });
    }
    Ok(out)
}

fn assemble_report<S: Scalar>(
    margins: Vec<GridMargin<S>>,
    lambda_densities: Vec<S>,
    densities_ok: bool,
) -> CriterionReport<S> {
    let mut min_margin = S::max_value().unwrap_or_else(S::one);
    let mut max_margin = -min_margin;
    let mut min_dbar = min_margin;
    for m in &margins {
        min_margin = min_margin.min(m.margin);
        max_margin = max_margin.max(m.margin);
        min_dbar = min_dbar.min(m.margin_dbar);
    }
    if margins.is_empty() {
        min_margin = S::zero();
        max_margin = S::zero();
        min_dbar = S::zero();
    }
    let grid_ok = min_margin > S::zero();
    let grid_ok_dbar = min_dbar > S::zero();
    let verdict = if grid_ok != grid_ok_dbar {
        Verdict::Inconclusive
    } else if grid_ok && densities_ok {
        Verdict::Satisfied
    } else {
        Verdict::Violated
    };
    CriterionReport {
        margins,
        min_margin,
        max_margin,
        lambda_densities,
        verdict,
        caveat: CAVEAT.to_string(),
    }
}

/// Interpolation criterion: every vertical density at most `1 - eps` and the
/// split-density inequality `lhs < rhs` at every grid point.
pub fn product_interp_check<S: Scalar>(
    ps: &ProductSequence<S>,
    w: &Weight<S>,
    r: S,
    eps: S,
    grid: &[ComplexVector<S>],
) -> Result<CriterionReport<S>, SeqError> {
    if !(r > S::zero()) {
        return Err(SeqError::InvalidParameter("radius must be positive"));
    }
    if !(eps >= S::zero()) {
        return Err(SeqError::InvalidParameter("eps must be nonnegative"));
    }
    let levi = levi_data(w)?;
    let densities: Vec<S> = ps
        .lambdas
        .iter()
        .map(|lam| schedule_density(lam, levi.q22, r, true))
        .collect();
    let densities_ok = densities.iter().all(|&d| d <= S::one() - eps);
    let margins = split_margins(&ps.gamma, &levi, r, grid, false)?;
    Ok(assemble_report(margins, densities, densities_ok))
}

/// Sampling criterion: every vertical density at least `1 + eps` and the
/// reversed inequality `lhs > rhs` at every grid point.
pub fn product_samp_check<S: Scalar>(
    ps: &ProductSequence<S>,
    w: &Weight<S>,
    r: S,
    eps: S,
    grid: &[ComplexVector<S>],
) -> Result<CriterionReport<S>, SeqError> {
    if !(r > S::zero()) {
        return Err(SeqError::InvalidParameter("radius must be positive"));
    }
    if !(eps >= S::zero()) {
        return Err(SeqError::InvalidParameter("eps must be nonnegative"));
    }
    let levi = levi_data(w)?;
    let densities: Vec<S> = ps
        .lambdas
        .iter()
        .map(|lam| schedule_density(lam, levi.q22, r, false))
        .collect();
    let densities_ok = if ps.gamma.is_empty() {
        // an empty configuration cannot sample anything
        false
    } else {
        densities.iter().all(|&d| d >= S::one() + eps)
    };
    let margins = split_margins(&ps.gamma, &levi, r, grid, true)?;
    Ok(assemble_report(margins, densities, densities_ok))
}

/// Density of the union of lines `{gamma_j} x C` in the ball `B(x, r)`:
/// flat slice-disc areas with the Lelong mass per intersection, corrected by
/// the direction-extremal factor `q22 / det` of the Levi pencil.
pub fn gamma_cross_c_density<S: Scalar>(
    gamma: &Sequence1D<S>,
    w: &Weight<S>,
    x: &ComplexVector<S>,
    r: S,
) -> Result<S, SeqError> {
    if x.len() != 2 {
        return Err(SeqError::InvalidParameter("center must be two-dimensional"));
    }
    if !(r > S::zero()) {
        return Err(SeqError::InvalidParameter("radius must be positive"));
    }
    let levi = levi_data(w)?;
    let mut area = S::zero();
    for g in gamma.points() {
        let d2 = crate::algebra::cabs2(g - x[0]);
        let gap = r * r - d2;
        if gap > S::zero() {
            area += S::pi() * gap;
        }
    }
    let vol = crate::weights::ball_volume(2, r);
    Ok(area * S::pi() / vol * levi.q22 / levi.det)
}

/// Parses "re im" lines into a sequence; `#` starts a comment, blank lines
/// are skipped.
pub fn parse_sequence_text<S: Scalar>(
    text: &str,
    label: impl Into<String>,
) -> Result<Sequence1D<S>, SeqError> {
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let re = it
            .next()
            .and_then(|t| t.parse::<f64>().ok())
            .ok_or_else(|| SeqError::Parse {
                line: idx + 1,
                msg: format!("expected \"re im\", got {raw:?}"),
            })?;
        let im = it
            .next()
            .and_then(|t| t.parse::<f64>().ok())
            .ok_or_else(|| SeqError::Parse {
                line: idx + 1,
                msg: format!("expected \"re im\", got {raw:?}"),
            })?;
        if it.next().is_some() {
            return Err(SeqError::Parse {
                line: idx + 1,
                msg: "trailing tokens after \"re im\"".into(),
            });
        }
        points.push(Complex::new(sfrom::<S>(re), sfrom::<S>(im)));
    }
    Sequence1D::new(points, label)
}

/// Parses a sectioned product-sequence file: a `[gamma]` block of "re im"
/// lines followed by one `[lambda]` block per gamma point, in order.
pub fn parse_product_text<S: Scalar>(text: &str) -> Result<ProductSequence<S>, SeqError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Gamma,
        Lambda(usize),
    }
    let mut section = Section::None;
    let mut gamma_lines = String::new();
    let mut lambda_blocks: Vec<String> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line {
            "[gamma]" => {
                if section != Section::None {
                    return Err(SeqError::Parse {
                        line: idx + 1,
                        msg: "[gamma] must appear once, first".into(),
                    });
                }
                section = Section::Gamma;
            }
            "[lambda]" => {
                if section == Section::None {
                    return Err(SeqError::Parse {
                        line: idx + 1,
                        msg: "[lambda] before [gamma]".into(),
                    });
                }
                lambda_blocks.push(String::new());
                section = Section::Lambda(lambda_blocks.len() - 1);
            }
            _ => match section {
                Section::None => {
                    return Err(SeqError::Parse {
                        line: idx + 1,
                        msg: "data before any section header".into(),
                    });
                }
                Section::Gamma => {
                    gamma_lines.push_str(raw);
                    gamma_lines.push('\n');
                }
                Section::Lambda(i) => {
                    lambda_blocks[i].push_str(raw);
                    lambda_blocks[i].push('\n');
                }
            },
        }
    }
    let gamma = parse_sequence_text(&gamma_lines, "gamma")?;
    let lambdas: Result<Vec<_>, _> = lambda_blocks
        .iter()
        .enumerate()
        .map(|(i, b)| parse_sequence_text::<S>(b, format!("lambda_{i}")))
        .collect();
    ProductSequence::new(gamma, lambdas?)
}
