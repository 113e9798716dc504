//! Named specs, all with offsets `a = ½(1, …, 1)`.

use crate::error::{Error, Result};
use crate::lattice::{IntMatrix, Rational, RationalVector};
use crate::moment::ReductionSpec;
use crate::toric::{GrassmannFactor, PolytopeSpec};

pub const NAMES: [&str; 6] = ["cp1", "cp2", "cp1xcp1", "hirzebruch1", "gr2c4", "gr2c4xcp2"];

fn polytope(dim: usize, conormals: &[&[i64]]) -> PolytopeSpec {
    let cols: Vec<Vec<i64>> = conormals.iter().map(|c| c.to_vec()).collect();
    let offsets = RationalVector(vec![Rational::new(1, 2); cols.len()]);
    PolytopeSpec::new(IntMatrix::from_columns(dim, &cols), offsets).expect("built-in conormals are primitive")
}

fn cp2() -> PolytopeSpec {
    polytope(2, &[&[1, 0], &[0, 1], &[-1, -1]])
}

fn gr24() -> GrassmannFactor {
    GrassmannFactor { n: 4, k: 2 }
}

/// The polytope and factors of a built-in spec, before any derived data.
pub fn parts(name: &str) -> Option<(PolytopeSpec, Vec<GrassmannFactor>)> {
    Some(match name {
        "cp1" => (polytope(1, &[&[1], &[-1]]), vec![]),
        "cp2" => (cp2(), vec![]),
        "cp1xcp1" => (polytope(2, &[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]]), vec![]),
        "hirzebruch1" => (polytope(2, &[&[1, 0], &[0, 1], &[-1, 1], &[0, -1]]), vec![]),
        "gr2c4" => (PolytopeSpec::point(), vec![gr24()]),
        "gr2c4xcp2" => (cp2(), vec![gr24()]),
        _ => return None,
    })
}

pub fn builtin(name: &str) -> Result<ReductionSpec> {
    let (polytope, factors) = parts(name).ok_or_else(|| {
        Error::invariant("known spec", format!("no built-in spec named {name:?}; known: {}", NAMES.join(", ")))
    })?;
    ReductionSpec::new(name, polytope, factors)
}
