//! Scene description files: a fixed JSON schema that bundles a weight, an
//! optional hypersurface and optional sequences into one validated object
//! the command-line subcommands draw from.
//!
//! Complex numbers are `[re, im]` pairs; polynomial coefficients are
//! `[[alpha...], re, im]` triples. Unknown fields are rejected, and every
//! validation diagnostic names the offending field.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{HermitianForm, MultiPoly};
use crate::hypersurface::Hypersurface;
use crate::sequences::{ProductSequence, Sequence1D};
use crate::weights::{Weight, WeightError};

#[derive(Error, Debug)]
pub enum SceneError {
    #[error("cannot read scene: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed scene: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("{field}: {msg}")]
    Invalid { field: String, msg: String },
}

fn invalid(field: impl Into<String>, msg: impl Into<String>) -> SceneError {
    SceneError::Invalid { field: field.into(), msg: msg.into() }
}

/// `[[alpha...], re, im]`: one multi-indexed complex coefficient.
pub type CoeffSpec = (Vec<u16>, f64, f64);

#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    Euclidean,
    Quadratic,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub kind: WeightKind,
    /// Hermitian matrix of the quadratic part, rows of `[re, im]` entries.
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pluriharmonic: Vec<CoeffSpec>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    /// Defining polynomial `T` as `[[alpha...], re, im]` terms.
    pub coefficients: Vec<CoeffSpec>,
    #[serde(default = "default_gradient_floor")]
    pub gradient_floor: f64,
}

fn default_gradient_floor() -> f64 {
    1e-9
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProductSpec {
    pub gamma: Vec<[f64; 2]>,
    /// One vertical sequence per gamma point, in order.
    pub lambdas: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct SequencesSpec {
    /// Named 1-D sequences (zero sets, sampling points).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub points: BTreeMap<String, Vec<[f64; 2]>>,
    /// Named product sequences on `C^2`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub products: BTreeMap<String, ProductSpec>,
}

#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Defaults {
    /// Monte Carlo budget per evaluation cell.
    pub budget: usize,
    /// Master seed used when no `--seed` flag is given.
    pub seed: u64,
    /// Slack for the product-sequence criteria.
    pub eps: f64,
}

impl Default for Defaults {
    fn default() -> Self {
        Self { budget: 200_000, seed: 42, eps: 0.1 }
    }
}

/// On-disk schema; see [`Scene`] for the validated runtime object.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub dimension: usize,
    pub weight: WeightSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypersurface: Option<SurfaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequences: Option<SequencesSpec>,
    #[serde(default)]
    pub defaults: Defaults,
}

/// Fully validated scene with constructed analysis objects.
#[derive(Debug, Clone)]
pub struct Scene {
    pub dimension: usize,
    pub weight: Weight<f64>,
    pub surface: Option<Hypersurface<f64>>,
    pub points: BTreeMap<String, Sequence1D<f64>>,
    pub products: BTreeMap<String, ProductSequence<f64>>,
    pub defaults: Defaults,
}

fn poly_from_coeffs(
    n: usize,
    coeffs: &[CoeffSpec],
    field: &str,
) -> Result<MultiPoly<f64>, SceneError> {
    for (k, (alpha, _, _)) in coeffs.iter().enumerate() {
        if alpha.len() != n {
            return Err(invalid(
                format!("{field}[{k}]"),
                format!("multi-index has {} entries, scene dimension is {n}", alpha.len()),
            ));
        }
    }
    Ok(MultiPoly::from_terms(
        n,
        coeffs
            .iter()
            .map(|(alpha, re, im)| (alpha.clone(), Complex::new(*re, *im))),
    ))
}

fn weight_from_spec(n: usize, spec: &WeightSpec) -> Result<Weight<f64>, SceneError> {
    match spec.kind {
        WeightKind::Euclidean => {
            if spec.q.is_some() {
                return Err(invalid("weight.Q", "euclidean weight takes no matrix"));
            }
            if !spec.pluriharmonic.is_empty() {
                return Err(invalid(
                    "weight.pluriharmonic",
                    "euclidean weight takes no pluriharmonic part",
                ));
            }
            Ok(Weight::euclidean(n))
        }
        WeightKind::Quadratic => {
            let rows = spec
                .q
                .as_ref()
                .ok_or_else(|| invalid("weight.Q", "quadratic weight requires a matrix"))?;
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(invalid("weight.Q", format!("expected an {n} x {n} matrix")));
            }
            let mut scale = 0.0f64;
            for row in rows {
                for &[re, im] in row {
                    scale = scale.max(re.abs()).max(im.abs());
                }
            }
            let tol = 1e-9 * (1.0 + scale);
            for i in 0..n {
                for j in 0..n {
                    let a = rows[i][j];
                    let b = rows[j][i];
                    if (a[0] - b[0]).abs() > tol || (a[1] + b[1]).abs() > tol {
                        return Err(invalid(
                            "weight.Q",
                            format!("matrix is not Hermitian beyond tolerance at ({i},{j})"),
                        ));
                    }
                }
            }
            let m = DMatrix::from_fn(n, n, |i, j| Complex::new(rows[i][j][0], rows[i][j][1]));
            let h = poly_from_coeffs(n, &spec.pluriharmonic, "weight.pluriharmonic")?;
            Weight::quadratic(HermitianForm::new(m), h).map_err(|e| match e {
                WeightError::NotPositiveDefinite => {
                    invalid("weight.Q", "matrix is not positive definite")
                }
                other => invalid("weight", other.to_string()),
            })
        }
    }
}

fn sequence_from_pairs(
    pairs: &[[f64; 2]],
    label: &str,
    field: &str,
) -> Result<Sequence1D<f64>, SceneError> {
    Sequence1D::new(
        pairs.iter().map(|&[re, im]| Complex::new(re, im)).collect(),
        label,
    )
    .map_err(|e| invalid(field, e.to_string()))
}

impl SceneFile {
    pub fn build(&self) -> Result<Scene, SceneError> {
        let n = self.dimension;
        if n == 0 {
            return Err(invalid("dimension", "must be at least 1"));
        }
        let weight = weight_from_spec(n, &self.weight)?;

        let surface = match &self.hypersurface {
            None => None,
            Some(spec) => {
                if !(spec.gradient_floor > 0.0) {
                    return Err(invalid("hypersurface.gradient_floor", "must be positive"));
                }
                let t = poly_from_coeffs(n, &spec.coefficients, "hypersurface.coefficients")?;
                Some(
                    Hypersurface::new(t, spec.gradient_floor)
                        .map_err(|e| invalid("hypersurface.coefficients", e.to_string()))?,
                )
            }
        };

        let mut points = BTreeMap::new();
        let mut products = BTreeMap::new();
        if let Some(seqs) = &self.sequences {
            for (name, pairs) in &seqs.points {
                if n > 2 {
                    return Err(invalid(
                        format!("sequences.points.{name}"),
                        "1-D sequences require scene dimension 1 or 2",
                    ));
                }
                let field = format!("sequences.points.{name}");
                points.insert(name.clone(), sequence_from_pairs(pairs, name, &field)?);
            }
            for (name, spec) in &seqs.products {
                if n != 2 {
                    return Err(invalid(
                        format!("sequences.products.{name}"),
                        format!("product sequences live on C^2, scene dimension is {n}"),
                    ));
                }
                let field = format!("sequences.products.{name}");
                let gamma = sequence_from_pairs(&spec.gamma, "gamma", &field)?;
                let lambdas: Result<Vec<_>, _> = spec
                    .lambdas
                    .iter()
                    .enumerate()
                    .map(|(j, ps)| {
                        sequence_from_pairs(ps, &format!("lambda_{j}"), &field)
                    })
                    .collect();
                let ps = ProductSequence::new(gamma, lambdas?)
                    .map_err(|e| invalid(&field, e.to_string()))?;
                products.insert(name.clone(), ps);
            }
        }

        if surface.is_none() && points.is_empty() && products.is_empty() {
            return Err(invalid(
                "scene",
                "at least one analysis target (hypersurface or sequences) is required",
            ));
        }

        Ok(Scene {
            dimension: n,
            weight,
            surface,
            points,
            products,
            defaults: self.defaults,
        })
    }
}

pub fn scene_from_str(text: &str) -> Result<Scene, SceneError> {
    let spec: SceneFile = serde_json::from_str(text)?;
    spec.build()
}

pub fn parse_scene(path: &Path) -> Result<Scene, SceneError> {
    let text = std::fs::read_to_string(path)?;
    scene_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "dimension": 2,
        "weight": {"kind": "euclidean"},
        "hypersurface": {"coefficients": [[[0, 1], 1.0, 0.0]]}
    }"#;

    #[test]
    fn minimal_scene_fills_defaults() {
        let scene = scene_from_str(MINIMAL).unwrap();
        assert_eq!(scene.dimension, 2);
        assert!(scene.weight.is_euclidean());
        assert!(scene.surface.is_some());
        assert_eq!(scene.defaults.budget, 200_000);
        assert_eq!(scene.defaults.seed, 42);
    }

    #[test]
    fn unknown_field_is_rejected_by_name() {
        let text = r#"{
            "dimension": 2,
            "weight": {"kind": "euclidean"},
            "hypersurface": {"coefficients": [[[0, 1], 1.0, 0.0]]},
            "extra": 3
        }"#;
        let err = scene_from_str(text).unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");
    }

    #[test]
    fn non_hermitian_matrix_names_weight_q() {
        let text = r#"{
            "dimension": 2,
            "weight": {"kind": "quadratic",
                       "Q": [[[1,0],[0.5,0]],[[0.9,0],[1,0]]]},
            "hypersurface": {"coefficients": [[[0, 1], 1.0, 0.0]]}
        }"#;
        let err = scene_from_str(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("weight.Q"), "{msg}");
        assert!(msg.contains("Hermitian"), "{msg}");
    }

    #[test]
    fn non_positive_definite_names_weight_q() {
        let text = r#"{
            "dimension": 2,
            "weight": {"kind": "quadratic",
                       "Q": [[[1,0],[0,0]],[[0,0],[-1,0]]]},
            "hypersurface": {"coefficients": [[[0, 1], 1.0, 0.0]]}
        }"#;
        let err = scene_from_str(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("weight.Q") && msg.contains("positive definite"), "{msg}");
    }

    #[test]
    fn wrong_matrix_shape_names_weight_q() {
        let text = r#"{
            "dimension": 2,
            "weight": {"kind": "quadratic", "Q": [[[1,0],[0,0]]]},
            "hypersurface": {"coefficients": [[[0, 1], 1.0, 0.0]]}
        }"#;
        let msg = scene_from_str(text).unwrap_err().to_string();
        assert!(msg.contains("weight.Q") && msg.contains("2 x 2"), "{msg}");
    }

    #[test]
    fn bad_multi_index_length_is_located() {
        let text = r#"{
            "dimension": 2,
            "weight": {"kind": "euclidean"},
            "hypersurface": {"coefficients": [[[0, 1], 1.0, 0.0], [[1], 2.0, 0.0]]}
        }"#;
        let msg = scene_from_str(text).unwrap_err().to_string();
        assert!(msg.contains("hypersurface.coefficients[1]"), "{msg}");
    }

    #[test]
    fn scene_needs_a_target() {
        let text = r#"{"dimension": 1, "weight": {"kind": "euclidean"}}"#;
        let msg = scene_from_str(text).unwrap_err().to_string();
        assert!(msg.contains("analysis target"), "{msg}");
    }

    #[test]
    fn product_sequences_need_dimension_two() {
        let text = r#"{
            "dimension": 1,
            "weight": {"kind": "euclidean"},
            "sequences": {"products": {"p": {"gamma": [[0,0]], "lambdas": [[[0,0]]]}}}
        }"#;
        let msg = scene_from_str(text).unwrap_err().to_string();
        assert!(msg.contains("sequences.products.p"), "{msg}");
    }

    #[test]
    fn duplicate_sequence_point_is_located() {
        let text = r#"{
            "dimension": 1,
            "weight": {"kind": "euclidean"},
            "sequences": {"points": {"zeros": [[1,2],[1,2]]}}
        }"#;
        let msg = scene_from_str(text).unwrap_err().to_string();
        assert!(msg.contains("sequences.points.zeros") && msg.contains("duplicate"), "{msg}");
    }

    #[test]
    fn roundtrip_preserves_scene_with_both_targets() {
        let spec = SceneFile {
            dimension: 2,
            weight: WeightSpec {
                kind: WeightKind::Quadratic,
                q: Some(vec![
                    vec![[2.0, 0.0], [1.0, 0.0]],
                    vec![[1.0, 0.0], [1.0, 0.0]],
                ]),
                pluriharmonic: vec![(vec![2, 0], 0.25, -0.5)],
            },
            hypersurface: Some(SurfaceSpec {
                coefficients: vec![(vec![0, 1], 1.0, 0.0), (vec![2, 0], -1.0, 0.0)],
                gradient_floor: 1e-9,
            }),
            sequences: Some(SequencesSpec {
                points: BTreeMap::from([("zeros".to_string(), vec![[1.0, 0.0], [0.0, 1.5]])]),
                products: BTreeMap::from([(
                    "p".to_string(),
                    ProductSpec {
                        gamma: vec![[0.0, 0.0]],
                        lambdas: vec![vec![[0.0, 1.0], [0.0, 2.0]]],
                    },
                )]),
            }),
            defaults: Defaults { budget: 5_000, seed: 7, eps: 0.05 },
        };
        let text = serde_json::to_string_pretty(&spec).unwrap();
        let back: SceneFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let scene = back.build().unwrap();
        assert!(scene.surface.is_some());
        assert_eq!(scene.points.len(), 1);
        assert_eq!(scene.products.len(), 1);
        assert_eq!(scene.defaults.seed, 7);
    }
}
