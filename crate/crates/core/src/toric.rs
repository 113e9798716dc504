//! Moment polytopes, Delzant reduction data and the central torus used when
//! reducing in stages.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    self, find_weight_vector_with_bound, kernel_lattice, monotone_level_check, IntMatrix,
    KernelLattice, Rational, RationalVector, WeightVector, DEFAULT_WEIGHT_BOUND,
};

/// `Δ = { x : ⟨x, ν_j⟩ + a_j ≥ 0 }`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolytopeSpec {
    pub normals: IntMatrix,
    pub offsets: RationalVector,
    /// Optional caller-supplied interior point; validated, not recomputed.
    pub interior: Option<RationalVector>,
}

impl PolytopeSpec {
    pub fn new(normals: IntMatrix, offsets: RationalVector) -> Result<Self> {
        if normals.cols() != offsets.len() {
            return Err(Error::shape(format!(
                "{} conormals but {} offsets",
                normals.cols(),
                offsets.len()
            )));
        }
        lattice::check_primitive_columns(&normals)?;
        Ok(Self { normals, offsets, interior: None })
    }

    /// The one-point polytope: no facets, zero-dimensional torus.
    pub fn point() -> Self {
        Self {
            normals: IntMatrix::zeros(0, 0),
            offsets: RationalVector::default(),
            interior: None,
        }
    }

    pub fn with_interior(mut self, x: RationalVector) -> Result<Self> {
        if x.len() != self.dim() {
            return Err(Error::shape(format!(
                "interior point has length {}, torus dimension is {}",
                x.len(),
                self.dim()
            )));
        }
        self.interior = Some(x);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.normals.rows()
    }

    /// Number of facets.
    pub fn facets(&self) -> usize {
        self.normals.cols()
    }

    pub fn slacks(&self, x: &RationalVector) -> Vec<Rational> {
        (0..self.facets())
            .map(|j| x.dot_int(&self.normals.column(j)) + self.offsets.0[j])
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelzantData {
    pub kernel: KernelLattice,
    /// `c = ι*a` in kernel-basis coordinates.
    pub level: RationalVector,
    pub weight: WeightVector,
    pub even: bool,
    pub parity_witness: Vec<usize>,
    pub lambda: Option<Rational>,
    pub offsets: RationalVector,
    pub minus_identity_in_torus: bool,
}

impl DelzantData {
    pub fn facets(&self) -> usize {
        self.kernel.ambient_dim()
    }
}

pub fn build_delzant(spec: &PolytopeSpec) -> Result<DelzantData> {
    build_delzant_with_bound(spec, DEFAULT_WEIGHT_BOUND)
}

pub fn build_delzant_with_bound(spec: &PolytopeSpec, bound: i64) -> Result<DelzantData> {
    let kernel = kernel_lattice(&spec.normals)?;
    // The point polytope has no facets and carries the empty relation.
    let weight = if spec.facets() == 0 {
        WeightVector(vec![])
    } else {
        find_weight_vector_with_bound(&kernel, bound)?
    };
    let level = kernel.restrict(&spec.offsets);
    let lambda = monotone_level_check(&kernel, &spec.offsets).ok();
    Ok(DelzantData {
        minus_identity_in_torus: lattice::minus_identity_in_torus(&kernel),
        even: lattice::is_even(&spec.normals),
        parity_witness: lattice::parity_witness(&spec.normals),
        kernel,
        level,
        weight,
        lambda,
        offsets: spec.offsets.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteriorPoint {
    pub x: RationalVector,
    pub slacks: Vec<Rational>,
    /// Set when `Δ` is unbounded; the point was found inside a bounding box.
    pub unbounded: bool,
}

impl InteriorPoint {
    pub fn min_slack(&self) -> Option<Rational> {
        self.slacks.iter().min().copied()
    }
}

/// Largest dimension handled by exact vertex enumeration.
const EXACT_DIM_LIMIT: usize = 4;

pub fn find_interior_point(spec: &PolytopeSpec) -> Result<InteriorPoint> {
    let unbounded = is_unbounded(spec);
    if let Some(x) = &spec.interior {
        let slacks = spec.slacks(x);
        if let Some((facet, s)) = slacks.iter().enumerate().find(|(_, s)| !s.is_positive()) {
            return Err(Error::InvalidInterior { facet, slack: s.to_string() });
        }
        return Ok(InteriorPoint { x: x.clone(), slacks, unbounded });
    }
    let x = if spec.dim() <= EXACT_DIM_LIMIT {
        max_min_slack_exact(spec, unbounded)?
    } else {
        max_min_slack_ascent(spec)
    };
    let slacks = spec.slacks(&x);
    if let Some(best) = slacks.iter().min() {
        if !best.is_positive() {
            return Err(Error::EmptyInterior { best_slack: best.to_string() });
        }
    }
    Ok(InteriorPoint { x, slacks, unbounded })
}

/// `Δ` is bounded iff the conormals span and admit a strictly positive relation.
fn is_unbounded(spec: &PolytopeSpec) -> bool {
    if spec.dim() == 0 {
        return false;
    }
    let rank = lattice::smith_normal_form(&spec.normals).rank();
    if rank < spec.dim() {
        return true;
    }
    match kernel_lattice(&spec.normals) {
        Ok(k) => find_weight_vector_with_bound(&k, DEFAULT_WEIGHT_BOUND).is_err(),
        Err(_) => true,
    }
}

/// A linear constraint `coeffs · (x, t) ≤ rhs`.
struct Constraint {
    coeffs: Vec<Rational>,
    rhs: Rational,
}

/// Maximizes `t` subject to `⟨x, ν_j⟩ + a_j ≥ t` by enumerating vertices of
/// the feasible region in `(x, t)`. Ties on the optimal face are resolved by
/// averaging its vertices, which stays optimal by convexity.
fn max_min_slack_exact(spec: &PolytopeSpec, unbounded: bool) -> Result<RationalVector> {
    let dim = spec.dim();
    let one = Rational::from_integer(1);
    let zero = Rational::zero();
    let mut cons: Vec<Constraint> = (0..spec.facets())
        .map(|j| {
            // t - ⟨x, ν_j⟩ ≤ a_j
            let mut coeffs: Vec<Rational> =
                spec.normals.column(j).iter().map(|&v| Rational::from_integer(-v)).collect();
            coeffs.push(one);
            Constraint { coeffs, rhs: spec.offsets.0[j] }
        })
        .collect();
    if unbounded {
        let bound = spec
            .offsets
            .0
            .iter()
            .fold(Rational::from_integer(1), |acc, a| acc + a.abs());
        for i in 0..dim {
            for sign in [1i64, -1] {
                let mut coeffs = vec![zero; dim + 1];
                coeffs[i] = Rational::from_integer(sign);
                cons.push(Constraint { coeffs, rhs: bound });
            }
        }
        let mut coeffs = vec![zero; dim + 1];
        coeffs[dim] = one;
        cons.push(Constraint { coeffs, rhs: one });
    }
    if cons.is_empty() {
        return Ok(RationalVector(vec![zero; dim]));
    }

    let n = dim + 1;
    let mut best_t: Option<Rational> = None;
    let mut optimal: Vec<Vec<Rational>> = Vec::new();
    for subset in combinations(cons.len(), n) {
        let rows: Vec<&Constraint> = subset.iter().map(|&i| &cons[i]).collect();
        let Some(sol) = solve_exact(&rows) else { continue };
        let feasible = cons.iter().all(|c| {
            c.coeffs.iter().zip(&sol).fold(zero, |acc, (a, b)| acc + a * b) <= c.rhs
        });
        if !feasible {
            continue;
        }
        let t = sol[dim];
        match best_t {
            Some(b) if t < b => {}
            Some(b) if t == b => {
                if !optimal.contains(&sol) {
                    optimal.push(sol);
                }
            }
            _ => {
                best_t = Some(t);
                optimal = vec![sol];
            }
        }
    }
    if optimal.is_empty() {
        return Err(Error::EmptyInterior { best_slack: "infeasible".into() });
    }
    let count = Rational::from_integer(optimal.len() as i64);
    let x = (0..dim)
        .map(|i| optimal.iter().fold(zero, |acc, v| acc + v[i]) / count)
        .collect();
    Ok(RationalVector(x))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Solves the square system given by the constraint rows as equalities.
fn solve_exact(rows: &[&Constraint]) -> Option<Vec<Rational>> {
    let n = rows.len();
    let mut a: Vec<Vec<Rational>> = rows
        .iter()
        .map(|c| {
            let mut r = c.coeffs.clone();
            r.push(c.rhs);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let p = a[col][col];
        for j in col..=n {
            a[col][j] /= p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col];
                for j in col..=n {
                    let v = a[col][j];
                    a[r][j] -= f * v;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n]).collect())
}

/// Subgradient ascent on the min-slack function, rounded to a dyadic grid so
/// the returned point is exact.
fn max_min_slack_ascent(spec: &PolytopeSpec) -> RationalVector {
    const DENOM: i64 = 1024;
    let dim = spec.dim();
    let normals: Vec<Vec<f64>> = spec
        .normals
        .columns()
        .into_iter()
        .map(|c| c.into_iter().map(|v| v as f64).collect())
        .collect();
    let offsets = spec.offsets.to_f64();
    let min_slack = |x: &[f64]| {
        normals
            .iter()
            .zip(&offsets)
            .map(|(n, a)| n.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + a)
            .enumerate()
            .fold((usize::MAX, f64::INFINITY), |acc, (j, s)| if s < acc.1 { (j, s) } else { acc })
    };
    let mut x = vec![0.0; dim];
    let mut best = x.clone();
    let mut best_val = min_slack(&x).1;
    for it in 0..20_000 {
        let (j, val) = min_slack(&x);
        if val > best_val {
            best_val = val;
            best = x.clone();
        }
        if j == usize::MAX {
            break;
        }
        let step = 1.0 / (1.0 + it as f64).sqrt();
        let g = &normals[j];
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().zip(g).for_each(|(xi, gi)| *xi += step * gi / gn);
    }
    RationalVector(
        best.iter()
            .map(|v| Rational::new((v * DENOM as f64).round() as i64, DENOM))
            .collect(),
    )
}

/// One Grassmannian factor `Gr_k(C^n)`, realized by `n × k` frames.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GrassmannFactor {
    pub n: usize,
    pub k: usize,
}

impl GrassmannFactor {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::invariant(
                "factor shape",
                format!("need 1 <= k <= n, got n = {n}, k = {k}"),
            ));
        }
        Ok(Self { n, k })
    }

    /// Complex dimension of the frame block.
    pub fn block_len(&self) -> usize {
        self.n * self.k
    }

    /// `n k / 2`, the central level contributed by this factor.
    pub fn central_level(&self) -> Rational {
        Rational::new((self.n * self.k) as i64, 2)
    }

    /// Quaternionic dimension when the factor is `Gr_2(C^{2m})`.
    pub fn quaternionic_dim(&self) -> Option<usize> {
        (self.k == 2 && self.n % 2 == 0).then_some(self.n / 2)
    }
}

/// Data of the central torus `K × Π U(1)` inside `U(D)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageTorus {
    /// `c̃ = (c, n_1 k_1 / 2, …)`.
    pub level: Vec<Rational>,
    /// `Γ = (γ, 1, …, 1)` of length `D`.
    pub gamma: Vec<i64>,
    /// Integer basis of the central torus lattice in `Z^D`: the toric kernel
    /// basis padded by zeros, then one indicator vector per factor block.
    pub basis: Vec<Vec<i64>>,
    /// Coordinates of `Γ` in `basis`.
    pub gamma_coords: Vec<i64>,
}

impl StageTorus {
    pub fn total_dim(&self) -> usize {
        self.gamma.len()
    }
}

pub fn stage_torus_data(data: &DelzantData, factors: &[GrassmannFactor]) -> StageTorus {
    let d = data.facets();
    let total = d + factors.iter().map(GrassmannFactor::block_len).sum::<usize>();
    let mut level = data.level.0.clone();
    level.extend(factors.iter().map(GrassmannFactor::central_level));

    let mut gamma = data.weight.0.clone();
    gamma.resize(total, 1);

    let mut basis: Vec<Vec<i64>> = data
        .kernel
        .basis()
        .iter()
        .map(|b| {
            let mut v = b.clone();
            v.resize(total, 0);
            v
        })
        .collect();
    let mut offset = d;
    for f in factors {
        let mut v = vec![0; total];
        v[offset..offset + f.block_len()].iter_mut().for_each(|x| *x = 1);
        basis.push(v);
        offset += f.block_len();
    }

    let mut gamma_coords = kernel_coordinates(&data.kernel, &data.weight.0);
    gamma_coords.extend(std::iter::repeat_n(1, factors.len()));
    StageTorus { level, gamma, basis, gamma_coords }
}

/// Coordinates of a kernel vector in the HNF basis, by back-substitution on
/// the pivot columns.
pub fn kernel_coordinates(kernel: &KernelLattice, v: &[i64]) -> Vec<i64> {
    let mut rest = v.to_vec();
    let mut coords = Vec::with_capacity(kernel.rank());
    for b in kernel.basis() {
        let p = b.iter().position(|&x| x != 0).expect("nonzero basis vector");
        let q = rest[p] / b[p];
        coords.push(q);
        rest.iter_mut().zip(b).for_each(|(x, y)| *x -= q * y);
    }
    debug_assert!(rest.iter().all(|&x| x == 0), "vector not in kernel lattice");
    coords
}
