//! Exact integer and rational linear algebra for toric data.
//!
//! Conormal vectors are stored as the columns of an [`IntMatrix`] with
//! `rows = dim t` and `cols = d`. The kernel lattice of `β: Z^d -> Z^dim`,
//! `e_j ↦ ν_j`, is computed from a Smith normal form and brought into row
//! Hermite normal form so that reports are canonical. Nothing in this module
//! touches floating point.

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Default coefficient bound for the positive-relation search.
pub const DEFAULT_WEIGHT_BOUND: i64 = 64;

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<i64>) -> Self {
        assert_eq!(data.len(), rows * cols, "IntMatrix data length");
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Builds a `rows × columns.len()` matrix whose columns are `columns`.
    pub fn from_columns(rows: usize, columns: &[Vec<i64>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column {j} has wrong length");
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: i64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> Vec<i64> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn column(&self, c: usize) -> Vec<i64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<i64>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "IntMatrix product shape");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let s = (0..self.cols).map(|k| self.get(r, k) * other.get(k, c)).sum();
                out.set(r, c, s);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) * v[c]).sum())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> i64 {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return 1;
        }
        let mut a: Vec<Vec<i128>> = (0..n)
            .map(|r| self.row(r).into_iter().map(i128::from).collect())
            .collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[k][k] == 0 {
                match (k + 1..n).find(|&r| a[r][k] != 0) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
                }
            }
            prev = a[k][k];
        }
        (sign * a[n - 1][n - 1]) as i64
    }

    pub fn is_unimodular(&self) -> bool {
        self.rows == self.cols && self.determinant().abs() == 1
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for r in 0..self.rows {
                self.data.swap(r * self.cols + a, r * self.cols + b);
            }
        }
    }

    /// row[dst] += factor * row[src]
    fn add_row(&mut self, dst: usize, src: usize, factor: i64) {
        for c in 0..self.cols {
            let v = self.get(src, c);
            self.data[dst * self.cols + c] += factor * v;
        }
    }

    /// col[dst] += factor * col[src]
    fn add_col(&mut self, dst: usize, src: usize, factor: i64) {
        for r in 0..self.rows {
            let v = self.get(r, src);
            self.data[r * self.cols + dst] += factor * v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            self.data[r * self.cols + c] = -self.data[r * self.cols + c];
        }
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<i64>> = (0..self.rows).map(|r| self.row(r)).collect();
        write!(f, "IntMatrix{rows:?}")
    }
}

/// Result of [`smith_normal_form`]: `u · m · v = s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
}

impl SmithForm {
    /// Nonzero diagonal entries of `s`, in divisibility order.
    pub fn elementary_divisors(&self) -> Vec<i64> {
        (0..self.s.rows().min(self.s.cols()))
            .map(|i| self.s.get(i, i))
            .take_while(|&v| v != 0)
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.elementary_divisors().len()
    }
}

/// Smith normal form with unimodular transforms, `U·M·V = S`.
///
/// Diagonal entries of `S` are nonnegative and each divides the next.
pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let (rows, cols) = (m.rows(), m.cols());
    let mut s = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    for t in 0..rows.min(cols) {
        loop {
            // Smallest nonzero entry of the trailing block becomes the pivot.
            let mut best: Option<(usize, usize)> = None;
            for r in t..rows {
                for c in t..cols {
                    let x = s.get(r, c);
                    if x != 0 && best.is_none_or(|(br, bc)| x.abs() < s.get(br, bc).abs()) {
                        best = Some((r, c));
                    }
                }
            }
            let Some((pr, pc)) = best else {
                return SmithForm { u, s, v };
            };
            s.swap_rows(t, pr);
            u.swap_rows(t, pr);
            s.swap_cols(t, pc);
            v.swap_cols(t, pc);

            let pivot = s.get(t, t);
            let mut dirty = false;
            for r in t + 1..rows {
                let q = Integer::div_floor(&s.get(r, t), &pivot);
                if q != 0 {
                    s.add_row(r, t, -q);
                    u.add_row(r, t, -q);
                }
                dirty |= s.get(r, t) != 0;
            }
            for c in t + 1..cols {
                let q = Integer::div_floor(&s.get(t, c), &pivot);
                if q != 0 {
                    s.add_col(c, t, -q);
                    v.add_col(c, t, -q);
                }
                dirty |= s.get(t, c) != 0;
            }
            if dirty {
                continue;
            }
            // Divisibility: fold an offending row into the pivot row and retry.
            let offending = (t + 1..rows)
                .find(|&r| (t + 1..cols).any(|c| s.get(r, c) % pivot != 0));
            match offending {
                Some(r) => {
                    s.add_row(t, r, 1);
                    u.add_row(t, r, 1);
                }
                None => {
                    if pivot < 0 {
                        s.negate_row(t);
                        u.negate_row(t);
                    }
                    break;
                }
            }
        }
    }
    SmithForm { u, s, v }
}

/// Row-style Hermite normal form of the row lattice of `m`.
///
/// Returns the nonzero rows: echelon form with positive pivots and entries
/// above each pivot reduced into `[0, pivot)`.
pub fn hermite_normal_form(m: &IntMatrix) -> IntMatrix {
    let mut h = m.clone();
    let (rows, cols) = (h.rows(), h.cols());
    let mut pivot_row = 0;
    for col in 0..cols {
        if pivot_row == rows {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for r in pivot_row..rows {
                let x = h.get(r, col);
                if x != 0 && best.is_none_or(|b| x.abs() < h.get(b, col).abs()) {
                    best = Some(r);
                }
            }
            let Some(b) = best else { break };
            h.swap_rows(pivot_row, b);
            let p = h.get(pivot_row, col);
            let mut done = true;
            for r in pivot_row + 1..rows {
                let q = Integer::div_floor(&h.get(r, col), &p);
                if q != 0 {
                    h.add_row(r, pivot_row, -q);
                }
                done &= h.get(r, col) == 0;
            }
            if done {
                break;
            }
        }
        if h.get(pivot_row, col) == 0 {
            continue;
        }
        if h.get(pivot_row, col) < 0 {
            h.negate_row(pivot_row);
        }
        let p = h.get(pivot_row, col);
        for r in 0..pivot_row {
            let q = Integer::div_floor(&h.get(r, col), &p);
            if q != 0 {
                h.add_row(r, pivot_row, -q);
            }
        }
        pivot_row += 1;
    }
    let kept: Vec<Vec<i64>> = (0..pivot_row).map(|r| h.row(r)).collect();
    if kept.is_empty() {
        IntMatrix::zeros(0, cols)
    } else {
        IntMatrix::from_rows(&kept)
    }
}

fn gcd_slice(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

/// Rejects zero or non-primitive conormal columns.
pub fn check_primitive_columns(normals: &IntMatrix) -> Result<()> {
    for j in 0..normals.cols() {
        let g = gcd_slice(&normals.column(j));
        if g != 1 {
            return Err(Error::NonPrimitiveColumn { index: j, gcd: g });
        }
    }
    Ok(())
}

/// Exact rational vector; entries are kept in lowest terms by `Ratio`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct RationalVector(pub Vec<Rational>);

impl RationalVector {
    pub fn from_integers(v: &[i64]) -> Self {
        Self(v.iter().map(|&x| Rational::from_integer(x)).collect())
    }

    /// `(1/2, ..., 1/2)` of length `d`.
    pub fn half_ones(d: usize) -> Self {
        Self(vec![Rational::new(1, 2); d])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot_int(&self, v: &[i64]) -> Rational {
        assert_eq!(self.len(), v.len());
        self.0
            .iter()
            .zip(v)
            .fold(Rational::zero(), |acc, (a, &b)| acc + a * b)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(ratio_to_f64).collect()
    }
}

pub fn ratio_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Saturated integer basis of `ker β ∩ Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KernelLattice {
    ambient: usize,
    basis: Vec<Vec<i64>>,
}

impl KernelLattice {
    /// Wraps a basis without checking it; used for lattices assembled from
    /// already-saturated pieces.
    pub fn from_basis(ambient: usize, basis: Vec<Vec<i64>>) -> Self {
        assert!(basis.iter().all(|b| b.len() == ambient));
        Self { ambient, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    /// The inclusion `ι`, as the `d × rank` matrix whose columns are the basis.
    pub fn inclusion(&self) -> IntMatrix {
        IntMatrix::from_columns(self.ambient, &self.basis)
    }

    /// `ι*`: restrict a functional on `R^d` to the kernel, in basis coordinates.
    pub fn restrict(&self, a: &RationalVector) -> RationalVector {
        assert_eq!(a.len(), self.ambient, "functional length");
        RationalVector(self.basis.iter().map(|b| a.dot_int(b)).collect())
    }

    pub fn restrict_f64(&self, a: &[f64]) -> Vec<f64> {
        assert_eq!(a.len(), self.ambient);
        self.basis
            .iter()
            .map(|b| b.iter().zip(a).map(|(&bi, &ai)| bi as f64 * ai).sum())
            .collect()
    }

    /// Saturation certificate: the basis matrix has unit elementary divisors.
    pub fn is_saturated(&self) -> bool {
        if self.basis.is_empty() {
            return true;
        }
        let divs = smith_normal_form(&self.inclusion()).elementary_divisors();
        divs.len() == self.rank() && divs.iter().all(|&x| x == 1)
    }

    /// Decides `x ∈ k_R + Z^d` exactly.
    ///
    /// With `U·B·V = S` for the basis matrix `B`, `U` maps `k_R` onto the span
    /// of the first `rank` coordinates, so membership reduces to integrality
    /// of the remaining coordinates of `U·x`.
    pub fn contains_mod_integers(&self, x: &RationalVector) -> bool {
        assert_eq!(x.len(), self.ambient);
        let u = if self.basis.is_empty() {
            IntMatrix::identity(self.ambient)
        } else {
            smith_normal_form(&self.inclusion()).u
        };
        (self.rank()..self.ambient).all(|i| x.dot_int(&u.row(i)).is_integer())
    }
}

/// Primitive strictly positive integer relation `Σ γ_j ν_j = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightVector(pub Vec<i64>);

impl WeightVector {
    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    /// Checks positivity, primitivity and the relation against `normals`.
    pub fn verify(&self, normals: &IntMatrix) -> bool {
        self.0.len() == normals.cols()
            && self.0.iter().all(|&g| g >= 1)
            && (self.0.is_empty() || gcd_slice(&self.0) == 1)
            && normals.mul_vec(&self.0).iter().all(|&x| x == 0)
    }
}

/// Integer basis of `ker β ∩ Z^d`, canonicalized by row HNF.
pub fn kernel_lattice(normals: &IntMatrix) -> Result<KernelLattice> {
    check_primitive_columns(normals)?;
    let d = normals.cols();
    let snf = smith_normal_form(normals);
    let rank = snf.rank();
    let raw: Vec<Vec<i64>> = (rank..d).map(|j| snf.v.column(j)).collect();
    if raw.is_empty() {
        return Ok(KernelLattice { ambient: d, basis: vec![] });
    }
    let hnf = hermite_normal_form(&IntMatrix::from_rows(&raw));
    let basis = (0..hnf.rows()).map(|r| hnf.row(r)).collect();
    Ok(KernelLattice { ambient: d, basis })
}

/// True iff every coordinate of `Σ_j ν_j` is even.
pub fn is_even(normals: &IntMatrix) -> bool {
    parity_witness(normals).is_empty()
}

/// Coordinates of `Σ_j ν_j` that are odd; empty when the polytope is even.
pub fn parity_witness(normals: &IntMatrix) -> Vec<usize> {
    let ones = vec![1; normals.cols()];
    normals
        .mul_vec(&ones)
        .iter()
        .enumerate()
        .filter(|(_, &s)| s % 2 != 0)
        .map(|(i, _)| i)
        .collect()
}

pub fn find_weight_vector(kernel: &KernelLattice) -> Result<WeightVector> {
    find_weight_vector_with_bound(kernel, DEFAULT_WEIGHT_BOUND)
}

/// Searches integer combinations of the kernel basis, shell by shell in the
/// max-norm of the coefficients, for a strictly positive vector. The first
/// shell with any hit wins; within it the primitive, lexicographically
/// smallest candidate is returned.
pub fn find_weight_vector_with_bound(kernel: &KernelLattice, bound: i64) -> Result<WeightVector> {
    let k = kernel.rank();
    let d = kernel.ambient_dim();
    let fail = Err(Error::NoPositiveRelation { bound });
    if k == 0 {
        return fail;
    }
    // A coordinate that vanishes on every basis vector can never be positive.
    if (0..d).any(|j| kernel.basis.iter().all(|b| b[j] == 0)) {
        return fail;
    }
    for radius in 1..=bound {
        let mut best: Option<Vec<i64>> = None;
        let mut coeffs = vec![-radius; k];
        loop {
            if coeffs.iter().any(|c| c.abs() == radius) {
                let mut v = vec![0i64; d];
                for (c, b) in coeffs.iter().zip(&kernel.basis) {
                    for (vj, bj) in v.iter_mut().zip(b) {
                        *vj += c * bj;
                    }
                }
                if v.iter().all(|&x| x > 0) {
                    let g = gcd_slice(&v);
                    v.iter_mut().for_each(|x| *x /= g);
                    if best.as_ref().is_none_or(|b| v < *b) {
                        best = Some(v);
                    }
                }
            }
            // odometer over [-radius, radius]^k
            let mut i = 0;
            while i < k {
                coeffs[i] += 1;
                if coeffs[i] <= radius {
                    break;
                }
                coeffs[i] = -radius;
                i += 1;
            }
            if i == k {
                break;
            }
        }
        if let Some(v) = best {
            return Ok(WeightVector(v));
        }
    }
    fail
}

/// Returns `λ > 0` with `ι*(1,…,1) = λ · ι*a`.
pub fn monotone_level_check(kernel: &KernelLattice, a: &RationalVector) -> Result<Rational> {
    if kernel.rank() == 0 {
        return Err(Error::ZeroKernel);
    }
    let chern = kernel.restrict(&RationalVector::from_integers(&vec![1; kernel.ambient_dim()]));
    let level = kernel.restrict(a);
    let Some(m) = level.0.iter().position(|c| !c.is_zero()) else {
        return Err(Error::NotProportional);
    };
    let lambda = chern.0[m] / level.0[m];
    let proportional = chern.0.iter().zip(&level.0).all(|(u, c)| *u == lambda * c);
    if proportional && lambda.is_positive() {
        Ok(lambda)
    } else {
        Err(Error::NotProportional)
    }
}

/// Whether `-I ∈ U(d)` lies in the subtorus with Lie algebra `k`, i.e.
/// `(1/2,…,1/2) ∈ k_R + Z^d`.
pub fn minus_identity_in_torus(kernel: &KernelLattice) -> bool {
    kernel.contains_mod_integers(&RationalVector::half_ones(kernel.ambient_dim()))
}

/// `Σ_j γ_j a_j`, the pairing of the level with the weight relation.
pub fn weighted_offset_sum(weight: &WeightVector, a: &RationalVector) -> Rational {
    a.dot_int(weight.as_slice())
}
