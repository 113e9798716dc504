//! Reading reduction specs from JSON documents.
//!
//! ```json
//! {
//!   "name": "cp2+gr",
//!   "polytope": {
//!     "conormals": [[1, 0], [0, 1], [-1, -1]],
//!     "offsets": [[1, 2], [1, 2], [1, 2]],
//!     "interior": [[0, 1], [0, 1]]
//!   },
//!   "factors": [{ "n": 4, "k": 2 }],
//!   "weight_bound": 64
//! }
//! ```
//!
//! Offsets and interior coordinates are integers or `[num, den]` pairs. A
//! missing or `null` polytope is the one-point polytope.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{IntMatrix, Rational, RationalVector, DEFAULT_WEIGHT_BOUND};
use crate::moment::ReductionSpec;
use crate::toric::{GrassmannFactor, PolytopeSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalEntry {
    Integer(i64),
    Pair([i64; 2]),
}

impl RationalEntry {
    fn to_rational(self, what: &str) -> Result<Rational> {
        match self {
            RationalEntry::Integer(v) => Ok(Rational::from_integer(v)),
            RationalEntry::Pair([_, 0]) => {
                Err(Error::invariant("nonzero denominator", format!("{what} has denominator 0")))
            }
            RationalEntry::Pair([n, d]) => Ok(Rational::new(n, d)),
        }
    }

    pub fn from_rational(r: &Rational) -> Self {
        if r.is_integer() {
            RationalEntry::Integer(*r.numer())
        } else {
            RationalEntry::Pair([*r.numer(), *r.denom()])
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeDocument {
    pub conormals: Vec<Vec<i64>>,
    pub offsets: Vec<RationalEntry>,
    /// Needed only when there are no conormals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interior: Option<Vec<RationalEntry>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub name: String,
    #[serde(default)]
    pub polytope: Option<PolytopeDocument>,
    #[serde(default)]
    pub factors: Vec<GrassmannFactor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_bound: Option<i64>,
}

impl SpecDocument {
    pub fn build(&self) -> Result<ReductionSpec> {
        let polytope = match &self.polytope {
            None => PolytopeSpec::point(),
            Some(p) => build_polytope(p)?,
        };
        let factors = self
            .factors
            .iter()
            .map(|f| GrassmannFactor::new(f.n, f.k))
            .collect::<Result<Vec<_>>>()?;
        let bound = self.weight_bound.unwrap_or(DEFAULT_WEIGHT_BOUND);
        if bound < 1 {
            return Err(Error::invariant("weight bound", format!("must be positive, got {bound}")));
        }
        ReductionSpec::with_weight_bound(&self.name, polytope, factors, bound).map_err(name_invariant)
    }

    pub fn from_spec(spec: &ReductionSpec) -> Self {
        let p = &spec.polytope;
        let polytope = (p.dim() > 0 || p.facets() > 0).then(|| PolytopeDocument {
            conormals: p.normals.columns(),
            offsets: p.offsets.0.iter().map(RationalEntry::from_rational).collect(),
            dim: (p.facets() == 0).then_some(p.dim()),
            interior: p
                .interior
                .as_ref()
                .map(|x| x.0.iter().map(RationalEntry::from_rational).collect()),
        });
        Self { name: spec.name.clone(), polytope, factors: spec.factors.clone(), weight_bound: None }
    }
}

fn build_polytope(doc: &PolytopeDocument) -> Result<PolytopeSpec> {
    let dim = match (doc.conormals.first(), doc.dim) {
        (Some(first), Some(d)) if first.len() != d => {
            return Err(Error::invariant(
                "conormal length",
                format!("declared dim {d} but conormal 0 has length {}", first.len()),
            ))
        }
        (Some(first), _) => first.len(),
        (None, Some(d)) => d,
        (None, None) => 0,
    };
    if let Some(i) = doc.conormals.iter().position(|c| c.len() != dim) {
        return Err(Error::invariant(
            "conormal length",
            format!("conormal {i} has length {}, expected {dim}", doc.conormals[i].len()),
        ));
    }
    let offsets = doc
        .offsets
        .iter()
        .enumerate()
        .map(|(j, e)| e.to_rational(&format!("offset {j}")))
        .collect::<Result<Vec<_>>>()?;
    let normals = IntMatrix::from_columns(dim, &doc.conormals);
    let mut polytope = PolytopeSpec::new(normals, RationalVector(offsets)).map_err(name_invariant)?;
    if let Some(x) = &doc.interior {
        let x = x
            .iter()
            .enumerate()
            .map(|(j, e)| e.to_rational(&format!("interior coordinate {j}")))
            .collect::<Result<Vec<_>>>()?;
        polytope = polytope.with_interior(RationalVector(x)).map_err(name_invariant)?;
    }
    Ok(polytope)
}

/// Recasts construction failures as invariant violations naming the invariant.
fn name_invariant(e: Error) -> Error {
    let name = match &e {
        Error::NonPrimitiveColumn { .. } => "primitive conormals",
        Error::NoPositiveRelation { .. } => "compactness (positive relation)",
        Error::NotProportional => "monotone level",
        Error::ZeroKernel => "nonzero kernel",
        Error::EmptyInterior { .. } => "nonempty interior",
        Error::InvalidInterior { .. } => "interior point",
        Error::ShapeMismatch(_) => "shape",
        _ => return e,
    };
    Error::invariant(name, e.to_string())
}

pub fn parse_document(bytes: &[u8]) -> Result<SpecDocument> {
    serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn load_spec(bytes: &[u8]) -> Result<ReductionSpec> {
    parse_document(bytes)?.build()
}
