//! Quaternionic frames in `C^{2n}`: the map `b(q) = (q, jq)`, its unitary
//! complexification, quotient invariants of `St_2(C^{2n})` under `SU(2)` and
//! `U(2)`, and the submanifolds `L_1`, `L_2` with their projections `K_1`, `K_2`.
//!
//! Quaternions are `a + bi + cj + dk = z + wj` with `z = a + bi`,
//! `w = c + di`. A vector `q ∈ H^n` sits in `C^{2n}` as `(z_1..z_n, w_1..w_n)`
//! and in `R^{4n}` as `(a_1, b_1, c_1, d_1, a_2, …)`. Frames here are unit
//! frames, `Z*Z = I`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, Matrix2};
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, realify, C64, I};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Quaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Quaternion {
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn from_complex_pair(z: C64, w: C64) -> Self {
        Self::new(z.re, z.im, w.re, w.im)
    }

    /// `(z, w)` with `q = z + wj`.
    pub fn complex_pair(&self) -> (C64, C64) {
        (C64::new(self.a, self.b), C64::new(self.c, self.d))
    }

    pub fn conj(&self) -> Self {
        Self::new(self.a, -self.b, -self.c, -self.d)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// The SU(2) matrix `[[α, -conj β], [β, conj α]]` of `u = α + βj`, so that
    /// `b(uq) = b(q) · M(u)`.
    pub fn su2_matrix(&self) -> Matrix2<C64> {
        let (al, be) = self.complex_pair();
        Matrix2::new(al, -be.conj(), be, al.conj())
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a * o.a - self.b * o.b - self.c * o.c - self.d * o.d,
            self.a * o.b + self.b * o.a + self.c * o.d - self.d * o.c,
            self.a * o.c - self.b * o.d + self.c * o.a + self.d * o.b,
            self.a * o.d + self.b * o.c - self.c * o.b + self.d * o.a,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct QuatVector(pub Vec<Quaternion>);

impl QuatVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Coordinates in `R^{4n}`.
    pub fn to_real(&self) -> Vec<f64> {
        self.0.iter().flat_map(|q| [q.a, q.b, q.c, q.d]).collect()
    }

    pub fn from_real(v: &[f64]) -> Self {
        assert!(v.len() % 4 == 0, "length must be a multiple of 4");
        Self(v.chunks_exact(4).map(|c| Quaternion::new(c[0], c[1], c[2], c[3])).collect())
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(Quaternion::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn left_mul(&self, u: Quaternion) -> Self {
        Self(self.0.iter().map(|q| u * *q).collect())
    }

    /// `Σ q'_m conj(q_m)`; its matrix is the Gram block `Z(q)* Z(q')`.
    pub fn pairing(&self, other: &Self) -> Quaternion {
        self.0
            .iter()
            .zip(&other.0)
            .fold(Quaternion::default(), |acc, (p, q)| acc + *q * p.conj())
    }
}

/// Convention carried by a frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FrameScale {
    /// `Z*Z = I`.
    Unit,
    /// `Z*Z = n I` for a block of `n` rows.
    MomentLevel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FramePoint {
    pub matrix: DMatrix<C64>,
    pub scale: FrameScale,
}

impl FramePoint {
    pub fn unit(matrix: DMatrix<C64>) -> Self {
        Self { matrix, scale: FrameScale::Unit }
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn gram(&self) -> DMatrix<C64> {
        self.matrix.adjoint() * &self.matrix
    }

    /// `‖Z*Z - target‖_max` for the frame's convention.
    pub fn gram_residual(&self) -> f64 {
        let target = match self.scale {
            FrameScale::Unit => 1.0,
            FrameScale::MomentLevel => self.rows() as f64,
        };
        let k = self.matrix.ncols();
        linalg::max_abs_entry(&(self.gram() - DMatrix::identity(k, k) * C64::new(target, 0.0)))
    }

    pub fn to_moment_level(&self) -> Self {
        match self.scale {
            FrameScale::MomentLevel => self.clone(),
            FrameScale::Unit => Self {
                matrix: &self.matrix * C64::new((self.rows() as f64).sqrt(), 0.0),
                scale: FrameScale::MomentLevel,
            },
        }
    }

    pub fn to_unit(&self) -> Self {
        match self.scale {
            FrameScale::Unit => self.clone(),
            FrameScale::MomentLevel => Self {
                matrix: &self.matrix * C64::new(1.0 / (self.rows() as f64).sqrt(), 0.0),
                scale: FrameScale::Unit,
            },
        }
    }

    pub fn swap_columns(&self) -> Self {
        let mut m = self.matrix.clone();
        m.swap_columns(0, 1);
        Self { matrix: m, scale: self.scale }
    }
}

/// Orthogonal projector onto the column span of a unit frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorPoint(pub DMatrix<C64>);

impl ProjectorPoint {
    /// Max of the Hermitian, idempotency and trace residuals.
    pub fn validity_residual(&self, rank: usize) -> f64 {
        let p = &self.0;
        let herm = linalg::max_abs_entry(&(p - p.adjoint()));
        let idem = linalg::max_abs_entry(&(p * p - p));
        let tr = (p.trace() - C64::new(rank as f64, 0.0)).norm();
        herm.max(idem).max(tr)
    }
}

/// Plücker coordinates `p_ab = Z_a0 Z_b1 - Z_b0 Z_a1`, `a < b`.
#[derive(Clone, Debug, PartialEq)]
pub struct WedgeInvariant(pub Vec<C64>);

impl WedgeInvariant {
    pub fn norm(&self) -> f64 {
        linalg::cnorm(&self.0)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }
}

/// `Z(q) = [(z, w), (-conj w, conj z)]`, the unit frame of `(q, jq)`.
pub fn quat_to_frame_b(q: &QuatVector) -> Result<FramePoint> {
    let norm = q.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnit { norm });
    }
    Ok(FramePoint::unit(frame_of(q)))
}

/// Unnormalized `Z(q)`; real-linear in `q`.
fn frame_of(q: &QuatVector) -> DMatrix<C64> {
    let n = q.len();
    let mut m = DMatrix::zeros(2 * n, 2);
    for (i, quat) in q.0.iter().enumerate() {
        let (z, w) = quat.complex_pair();
        m[(i, 0)] = z;
        m[(n + i, 0)] = w;
        m[(i, 1)] = -w.conj();
        m[(n + i, 1)] = z.conj();
    }
    m
}

/// The antilinear map `J(z, w) = (-conj w, conj z)` on `C^{2n}`, i.e. left
/// multiplication by `j`.
pub fn quaternionic_j(v: &[C64]) -> Vec<C64> {
    let n = v.len() / 2;
    let (z, w) = v.split_at(n);
    w.iter().map(|c| -c.conj()).chain(z.iter().map(|c| c.conj())).collect()
}

/// Matrix of the complexification `b_C : C^{4n} → C^{4n}` of `q ↦ (q, jq)/√2`,
/// with the image frame flattened column-major.
pub fn bc_matrix(n: usize) -> DMatrix<C64> {
    let dim = 4 * n;
    let s = 1.0 / 2f64.sqrt();
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut e = vec![0.0; dim];
        e[col] = 1.0;
        let f = frame_of(&QuatVector::from_real(&e));
        for (row, c) in f.as_slice().iter().enumerate() {
            m[(row, col)] = c * s;
        }
    }
    m
}

/// Reshapes a column of `C^{4n}` into a `2n × 2` frame and rescales by `√2`,
/// undoing the normalization of `b_C`.
pub fn reshape_bc_image(v: &[C64]) -> DMatrix<C64> {
    let rows = v.len() / 2;
    DMatrix::from_column_slice(rows, 2, v) * C64::new(2f64.sqrt(), 0.0)
}

pub fn check_special_unitary(a: &Matrix2<C64>, tol: f64) -> Result<()> {
    let unit = (a.adjoint() * a - Matrix2::identity()).iter().fold(0.0f64, |m, c| m.max(c.norm()));
    if unit > tol {
        return Err(Error::NotSpecialUnitary(format!("A*A - I has max entry {unit:e}")));
    }
    let det = a.determinant();
    if (det - C64::new(1.0, 0.0)).norm() > tol {
        return Err(Error::NotSpecialUnitary(format!("det = {det}")));
    }
    Ok(())
}

pub fn su2_right_action(z: &FramePoint, a: &Matrix2<C64>) -> Result<FramePoint> {
    check_special_unitary(a, 1e-10)?;
    if z.matrix.ncols() != 2 {
        return Err(Error::shape("frame must have two columns"));
    }
    let am = DMatrix::from_iterator(2, 2, a.iter().copied());
    Ok(FramePoint { matrix: &z.matrix * am, scale: z.scale })
}

pub fn wedge(z: &FramePoint) -> WedgeInvariant {
    let m = &z.matrix;
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
    for a in 0..n {
        for b in a + 1..n {
            out.push(m[(a, 0)] * m[(b, 1)] - m[(b, 0)] * m[(a, 1)]);
        }
    }
    WedgeInvariant(out)
}

pub fn projector(z: &FramePoint) -> ProjectorPoint {
    let u = z.to_unit();
    ProjectorPoint(&u.matrix * u.matrix.adjoint())
}

/// Random real orthonormal 2-frame in `R^{2n}`.
pub fn sample_l1(n: usize, seed_value: u64) -> FramePoint {
    let mut rng = seed::rng(seed_value);
    let g = DMatrix::from_fn(2 * n, 2, |_, _| C64::new(rng.sample_normal(), 0.0));
    FramePoint::unit(linalg::orthonormalize_columns(&g))
}

/// `b(q)` for a random unit `q ∈ H^n`.
pub fn sample_l2(n: usize, seed_value: u64) -> FramePoint {
    FramePoint::unit(frame_of(&sample_unit_quat(n, seed_value)))
}

pub fn sample_unit_quat(n: usize, seed_value: u64) -> QuatVector {
    let mut rng = seed::rng(seed_value);
    let v = linalg::gaussian_vector(&mut rng, 4 * n);
    let s = linalg::norm(&v);
    QuatVector::from_real(&v.iter().map(|x| x / s).collect::<Vec<_>>())
}

trait SampleNormal {
    fn sample_normal(&mut self) -> f64;
}

impl<R: rand::Rng> SampleNormal for R {
    fn sample_normal(&mut self) -> f64 {
        self.sample(rand_distr::StandardNormal)
    }
}

pub fn k1_membership(p: &ProjectorPoint, tol: f64) -> bool {
    p.0.iter().all(|c| c.im.abs() < tol)
}

/// Range of `P` is `J`-invariant: `‖(I - P) J(P e_a)‖ < tol` for every `a`.
pub fn k2_membership(p: &ProjectorPoint, tol: f64) -> bool {
    k2_residual(p) < tol
}

pub fn k2_residual(p: &ProjectorPoint) -> f64 {
    let n = p.0.nrows();
    let mut worst = 0.0f64;
    for a in 0..n {
        let col: Vec<C64> = p.0.column(a).iter().copied().collect();
        let jv = nalgebra::DVector::from_vec(quaternionic_j(&col));
        let r = &jv - &p.0 * &jv;
        worst = worst.max(r.norm());
    }
    worst
}

/// Orthonormal real basis of the `su(2)` orbit directions `Z ξ`.
fn su2_orbit_basis(z: &DMatrix<C64>) -> Vec<Vec<f64>> {
    let gens = su2_generators();
    let dirs: Vec<Vec<f64>> = gens
        .iter()
        .map(|x| realify((z * x).as_slice()))
        .collect();
    linalg::orthonormalize(&dirs, 1e-10)
}

fn su2_generators() -> [DMatrix<C64>; 3] {
    let o = C64::zero();
    let one = C64::new(1.0, 0.0);
    [
        DMatrix::from_row_slice(2, 2, &[I, o, o, -I]),
        DMatrix::from_row_slice(2, 2, &[o, one, -one, o]),
        DMatrix::from_row_slice(2, 2, &[o, I, I, o]),
    ]
}

fn u2_generators() -> [DMatrix<C64>; 4] {
    let [a, b, c] = su2_generators();
    [a, b, c, DMatrix::identity(2, 2) * I]
}

/// `α_Z(V) = ½ Im Σ conj(Z)·V`.
pub fn frame_alpha(z: &DMatrix<C64>, v: &DMatrix<C64>) -> f64 {
    0.5 * z.iter().zip(v.iter()).map(|(a, b)| (a.conj() * b).im).sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Legendrian {
    /// Real 2-frames.
    L1,
    /// Frames `b(q)` of unit quaternion vectors.
    L2,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LegendrianReport {
    pub family: Legendrian,
    pub n: usize,
    pub samples: usize,
    pub expected_dim: usize,
    pub min_dim: usize,
    pub max_dim: usize,
    pub max_alpha: f64,
    pub failing_seed: Option<u64>,
    pub passed: bool,
}

const FD_STEP: f64 = 1e-5;

/// Finite-difference tangents of the parametrization at one sample, with
/// the `su(2)` orbit directions projected out. Returns the frame too.
pub fn legendrian_tangents(family: Legendrian, n: usize, seed_value: u64) -> (DMatrix<C64>, Vec<DMatrix<C64>>) {
    let (base, tangents): (DMatrix<C64>, Vec<DMatrix<C64>>) = match family {
        Legendrian::L1 => {
            let z = sample_l1(n, seed_value).matrix;
            let real = z.map(|c| c.re);
            let tangents = (0..4 * n)
                .map(|m| {
                    let mut e = nalgebra::DMatrix::<f64>::zeros(2 * n, 2);
                    e[m] = 1.0;
                    let ortho = |s: f64| {
                        linalg::orthonormalize_columns(&(&real + &e * s).map(|x| C64::new(x, 0.0)))
                    };
                    (ortho(FD_STEP) - ortho(-FD_STEP)) / C64::new(2.0 * FD_STEP, 0.0)
                })
                .collect();
            (z, tangents)
        }
        Legendrian::L2 => {
            let q = sample_unit_quat(n, seed_value).to_real();
            let z = frame_of(&QuatVector::from_real(&q));
            let tangents = (0..4 * n)
                .map(|m| {
                    let at = |s: f64| {
                        let mut v = q.clone();
                        v[m] += s;
                        let nv = linalg::norm(&v);
                        frame_of(&QuatVector::from_real(&v.iter().map(|x| x / nv).collect::<Vec<_>>()))
                    };
                    (at(FD_STEP) - at(-FD_STEP)) / C64::new(2.0 * FD_STEP, 0.0)
                })
                .collect();
            (z, tangents)
        }
    };
    let orbit = su2_orbit_basis(&base);
    let projected = tangents
        .iter()
        .map(|t| {
            let r = linalg::reject(&realify(t.as_slice()), &orbit);
            DMatrix::from_column_slice(2 * n, 2, &linalg::complexify(&r))
        })
        .collect();
    (base, projected)
}

/// Tangent rank tolerance; finite differences leave `O(h²)` noise.
const TANGENT_RANK_TOL: f64 = 1e-6;

pub fn legendrian_check(family: Legendrian, n: usize, count: usize, base_seed: u64, tol: f64) -> LegendrianReport {
    let expected_dim = 4 * n - 4;
    let mut rep = LegendrianReport {
        family,
        n,
        samples: count,
        expected_dim,
        min_dim: usize::MAX,
        max_dim: 0,
        max_alpha: 0.0,
        failing_seed: None,
        passed: true,
    };
    for i in 0..count as u64 {
        let s = seed::derive(base_seed, seed::stream::LEGENDRIAN, i);
        let (z, tangents) = legendrian_tangents(family, n, s);
        let rows: Vec<Vec<f64>> = tangents.iter().map(|t| realify(t.as_slice())).collect();
        let dim = linalg::numerical_rank(&rows, TANGENT_RANK_TOL);
        let alpha = tangents.iter().fold(0.0f64, |m, t| m.max(frame_alpha(&z, t).abs()));
        rep.min_dim = rep.min_dim.min(dim);
        rep.max_dim = rep.max_dim.max(dim);
        rep.max_alpha = rep.max_alpha.max(alpha);
        if (dim != expected_dim || !(alpha < tol)) && rep.failing_seed.is_none() {
            rep.failing_seed = Some(s);
            rep.passed = false;
        }
    }
    if count == 0 {
        rep.min_dim = 0;
    }
    rep
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoubleCoverWitness {
    pub seed: u64,
    /// `‖wedge(Z') + wedge(Z)‖_max`.
    pub negation_residual: f64,
    /// `‖projector(Z') - projector(Z)‖_max`.
    pub projector_residual: f64,
    pub wedge_norm: f64,
    pub passed: bool,
}

/// A real frame and its column swap: opposite wedges, equal projectors.
pub fn double_cover_witness(n: usize, seed_value: u64, tol: f64) -> DoubleCoverWitness {
    let z = sample_l1(n, seed_value);
    let z2 = z.swap_columns();
    let (w, w2) = (wedge(&z), wedge(&z2));
    let negation_residual = w2.distance(&w.neg());
    let projector_residual = linalg::max_abs_entry(&(projector(&z2).0 - projector(&z).0));
    let wedge_norm = w.norm();
    DoubleCoverWitness {
        seed: seed_value,
        negation_residual,
        projector_residual,
        wedge_norm,
        // distinct points of V: the wedges differ by 2‖w‖ = 2
        passed: negation_residual < tol && projector_residual < tol && (wedge_norm - 1.0).abs() < tol,
    }
}

/// Residual of `Z` from the image of `b`: `‖col_1 - J(col_0)‖`.
pub fn b_image_residual(z: &DMatrix<C64>) -> f64 {
    let c0: Vec<C64> = z.column(0).iter().copied().collect();
    let jc = quaternionic_j(&c0);
    z.column(1).iter().zip(&jc).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberWitness {
    pub seed: u64,
    /// Angles in `[0, 2π)` on the grid whose phase rotation stays in the image of `b`.
    pub angles_in_image: Vec<f64>,
    pub passed: bool,
}

/// On `L_2`, `Z e^{iθ}` lies in the image of `b` only for `θ ∈ {0, π}`, so
/// the circle fiber of `V → Gr_2` meets `L_2` in an antipodal pair.
pub fn l2_fiber_witness(n: usize, seed_value: u64, grid: usize, tol: f64) -> FiberWitness {
    let z = sample_l2(n, seed_value).matrix;
    let angles: Vec<f64> = (0..grid)
        .map(|i| std::f64::consts::TAU * i as f64 / grid as f64)
        .filter(|&t| b_image_residual(&(&z * C64::from_polar(1.0, t))) < tol)
        .collect();
    let expected = grid % 2 == 0 && angles.len() == 2 && angles[0] == 0.0
        && (angles[1] - std::f64::consts::PI).abs() < 1e-12;
    FiberWitness { seed: seed_value, angles_in_image: angles, passed: expected }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionReport {
    pub n: usize,
    pub trials: usize,
    pub max_residual: f64,
    pub passed: bool,
}

/// `b_C` maps real unit vectors to unit Stiefel frames (after the `√2` reshape).
pub fn projective_inclusion_check(n: usize, count: usize, base_seed: u64, tol: f64) -> InclusionReport {
    let bc = bc_matrix(n);
    let mut worst = 0.0f64;
    for i in 0..count as u64 {
        let q = sample_unit_quat(n, seed::derive(base_seed, seed::stream::QUATERNIONIC, i)).to_real();
        let v = nalgebra::DVector::from_iterator(4 * n, q.iter().map(|&x| C64::new(x, 0.0)));
        let img = &bc * v;
        let f = FramePoint::unit(reshape_bc_image(img.as_slice()));
        worst = worst.max(f.gram_residual());
    }
    InclusionReport { n, trials: count, max_residual: worst, passed: worst < tol }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DimensionReport {
    pub n: usize,
    pub stiefel: usize,
    pub v: usize,
    pub grassmannian: usize,
    pub legendrian_l1: usize,
    pub legendrian_l2: usize,
}

impl DimensionReport {
    pub fn expected(n: usize) -> Self {
        Self {
            n,
            stiefel: 8 * n - 4,
            v: 8 * n - 7,
            grassmannian: 8 * n - 8,
            legendrian_l1: 4 * n - 4,
            legendrian_l2: 4 * n - 4,
        }
    }
}

/// Tangent ranks at one sample: Stiefel from the kernel of the Gram
/// differential, then quotients by the `SU(2)` and `U(2)` orbits.
pub fn dimension_bookkeeping(n: usize, seed_value: u64) -> DimensionReport {
    let z = sample_l2(n, seed_value).matrix;
    let real_dim = 2 * 2 * 2 * n;
    let rows: Vec<Vec<f64>> = u2_generators()
        .iter()
        .map(|x| realify((&z * x).map(|c| -I * c).as_slice()))
        .collect();
    let span = linalg::orthonormalize(&rows, 1e-10);
    let tangent = linalg::complement(&span, real_dim);
    let quotient_rank = |gens: &[DMatrix<C64>]| {
        let orbit = linalg::orthonormalize(
            &gens.iter().map(|x| realify((&z * x).as_slice())).collect::<Vec<_>>(),
            1e-10,
        );
        let projected: Vec<Vec<f64>> = tangent.iter().map(|t| linalg::reject(t, &orbit)).collect();
        linalg::numerical_rank(&projected, 1e-8)
    };
    let su2 = su2_generators();
    let u2 = u2_generators();
    let leg = |family| {
        let (_, t) = legendrian_tangents(family, n, seed_value);
        linalg::numerical_rank(&t.iter().map(|m| realify(m.as_slice())).collect::<Vec<_>>(), TANGENT_RANK_TOL)
    };
    DimensionReport {
        n,
        stiefel: tangent.len(),
        v: quotient_rank(&su2),
        grassmannian: quotient_rank(&u2),
        legendrian_l1: leg(Legendrian::L1),
        legendrian_l2: leg(Legendrian::L2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_quat(rng: &mut ChaCha8Rng) -> Quaternion {
        let v = linalg::gaussian_vector(rng, 4);
        Quaternion::new(v[0], v[1], v[2], v[3])
    }

    fn unit_quat(rng: &mut ChaCha8Rng) -> Quaternion {
        let q = random_quat(rng);
        q.scale(1.0 / q.norm())
    }

    #[test]
    fn hamilton_relations() {
        let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);
        assert_eq!(i * j, k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
        assert_eq!(i * i, -Quaternion::ONE);
        assert_eq!(i * j * k, -Quaternion::ONE);
    }

    #[test]
    fn quaternion_algebra_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let (p, q, r) = (random_quat(&mut rng), random_quat(&mut rng), random_quat(&mut rng));
            let lhs = (p * q) * r;
            let rhs = p * (q * r);
            assert!((lhs - rhs).norm() < 1e-12);
            assert!(((p * q).norm() - p.norm() * q.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_pair_convention() {
        // (z + wj) with z = a + bi, w = c + di
        let q = Quaternion::new(1.0, 2.0, 3.0, 4.0);
        let (z, w) = q.complex_pair();
        let rebuilt = Quaternion::new(z.re, z.im, 0.0, 0.0) + Quaternion::new(w.re, w.im, 0.0, 0.0) * Quaternion::J;
        assert_eq!(rebuilt, q);
        // jq = -conj w + conj z j
        let jq = Quaternion::J * q;
        assert_eq!(jq.complex_pair(), (-w.conj(), z.conj()));
    }

    #[test]
    fn b_examples() {
        let z = quat_to_frame_b(&QuatVector(vec![Quaternion::ONE])).unwrap().matrix;
        assert_eq!(z, DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]));
        let z = quat_to_frame_b(&QuatVector(vec![Quaternion::J])).unwrap().matrix;
        assert_eq!(z, DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]));
        assert!(matches!(
            quat_to_frame_b(&QuatVector(vec![Quaternion::ONE.scale(2.0)])),
            Err(Error::NonUnit { .. })
        ));
    }

    #[test]
    fn second_column_is_jq() {
        let q = sample_unit_quat(3, 5);
        let z = frame_of(&q);
        let jq = q.left_mul(Quaternion::J);
        let first_of_jq = frame_of(&jq).column(0).clone_owned();
        assert!((z.column(1) - first_of_jq).norm() < 1e-15);
    }

    #[test]
    fn b_transports_inner_product() {
        for s in 0..50 {
            let q = sample_unit_quat(3, s);
            let r = sample_unit_quat(3, s + 1000);
            let gram = frame_of(&q).adjoint() * frame_of(&r);
            let m = q.pairing(&r).su2_matrix();
            let want = DMatrix::from_iterator(2, 2, m.iter().copied());
            assert!(linalg::max_abs_entry(&(gram - want)) < 1e-12);
        }
    }

    #[test]
    fn equivariance_left_multiplication() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for s in 0..100 {
            let q = sample_unit_quat(2, s);
            let u = unit_quat(&mut rng);
            let lhs = quat_to_frame_b(&q.left_mul(u)).unwrap();
            let rhs = su2_right_action(&quat_to_frame_b(&q).unwrap(), &u.su2_matrix()).unwrap();
            assert!(linalg::max_abs_entry(&(lhs.matrix - rhs.matrix)) < 1e-12);
        }
    }

    #[test]
    fn su2_action_checks() {
        let z = sample_l2(2, 1);
        assert_eq!(su2_right_action(&z, &Matrix2::identity()).unwrap(), z);
        let bad = Matrix2::new(I, C64::zero(), C64::zero(), I);
        assert!(matches!(su2_right_action(&z, &bad), Err(Error::NotSpecialUnitary(_))));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = unit_quat(&mut rng).su2_matrix();
        let za = su2_right_action(&z, &a).unwrap();
        assert!(linalg::max_abs_entry(&(za.gram() - z.gram())) < 1e-14);
    }

    #[test]
    fn bc_is_unitary() {
        for n in 1..=4 {
            let b = bc_matrix(n);
            let e = b.adjoint() * &b - DMatrix::identity(4 * n, 4 * n);
            assert!(linalg::max_abs_entry(&e) < 1e-12);
        }
    }

    #[test]
    fn bc_matches_explicit_formula() {
        // b_C(q + i q') = (1/√2)(q + iq', jq + kq'), quaternion products done directly
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 2;
        let bc = bc_matrix(n);
        for _ in 0..20 {
            let q = QuatVector((0..n).map(|_| random_quat(&mut rng)).collect());
            let qp = QuatVector((0..n).map(|_| random_quat(&mut rng)).collect());
            let input: Vec<C64> = q.to_real().iter().zip(qp.to_real()).map(|(a, b)| c(*a, b)).collect();
            let out = &bc * nalgebra::DVector::from_vec(input);
            let s = 1.0 / 2f64.sqrt();
            for m in 0..n {
                let col0 = q.0[m] + Quaternion::I * qp.0[m];
                let col1 = Quaternion::J * q.0[m] + Quaternion::K * qp.0[m];
                let (z0, w0) = col0.complex_pair();
                let (z1, w1) = col1.complex_pair();
                assert!((out[m] - z0 * s).norm() < 1e-12);
                assert!((out[n + m] - w0 * s).norm() < 1e-12);
                assert!((out[2 * n + m] - z1 * s).norm() < 1e-12);
                assert!((out[3 * n + m] - w1 * s).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn bc_restricted_to_reals_is_b() {
        let q = sample_unit_quat(3, 9);
        let v = nalgebra::DVector::from_iterator(12, q.to_real().into_iter().map(|x| c(x, 0.0)));
        let img = bc_matrix(3) * v;
        let f = reshape_bc_image(img.as_slice());
        assert!(linalg::max_abs_entry(&(f - quat_to_frame_b(&q).unwrap().matrix)) < 1e-14);
    }

    #[test]
    fn projective_inclusion() {
        for n in [2, 3] {
            assert!(projective_inclusion_check(n, 200, 1, 1e-12).passed);
        }
        // e_1 ↦ the standard frame (e_1, e_{n+1})
        let mut e = vec![0.0; 8];
        e[0] = 1.0;
        let v = nalgebra::DVector::from_iterator(8, e.iter().map(|&x| c(x, 0.0)));
        let f = reshape_bc_image((bc_matrix(2) * &v).as_slice());
        assert_eq!(f[(0, 0)], c(1.0, 0.0));
        assert!((f[(2, 1)] - c(1.0, 0.0)).norm() < 1e-15);
        let fneg = reshape_bc_image((bc_matrix(2) * (-v)).as_slice());
        assert!(linalg::max_abs_entry(&(fneg + f)) < 1e-15);
    }

    #[test]
    fn wedge_properties() {
        let std = FramePoint::unit(DMatrix::from_fn(4, 2, |r, c| if r == c { C64::new(1.0, 0.0) } else { C64::zero() }));
        let w = wedge(&std);
        assert_eq!(w.0[0], c(1.0, 0.0));
        assert!(w.0[1..].iter().all(|x| x.norm() == 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = sample_l2(3, 2);
        let u = linalg::random_unitary(&mut rng, 2);
        let zu = FramePoint::unit(&z.matrix * &u);
        let det = u.determinant();
        let scaled = WedgeInvariant(wedge(&z).0.iter().map(|x| x * det).collect());
        assert!(wedge(&zu).distance(&scaled) < 1e-12);
        assert!(wedge(&z.swap_columns()).distance(&wedge(&z).neg()) < 1e-15);
        assert!((wedge(&z).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wedge_separates_su2_orbits() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for s in 0..50 {
            let z1 = sample_l2(2, s);
            let a = unit_quat(&mut rng).su2_matrix();
            let z2 = su2_right_action(&z1, &a).unwrap();
            assert!(wedge(&z1).distance(&wedge(&z2)) < 1e-12);
            let rec = z1.matrix.adjoint() * &z2.matrix;
            let rec2 = Matrix2::new(rec[(0, 0)], rec[(0, 1)], rec[(1, 0)], rec[(1, 1)]);
            check_special_unitary(&rec2, 1e-12).unwrap();
            // a U(2) element with det ≠ 1 changes the wedge
            let phase = FramePoint::unit(&z1.matrix * C64::from_polar(1.0, 0.3));
            assert!(wedge(&z1).distance(&wedge(&phase)) > 1e-3);
        }
    }

    #[test]
    fn projector_properties() {
        let std = FramePoint::unit(DMatrix::from_fn(4, 2, |r, c| if r == c { C64::new(1.0, 0.0) } else { C64::zero() }));
        let p = projector(&std);
        assert_eq!(p.0, DMatrix::from_fn(4, 4, |r, c| if r == c && r < 2 { C64::new(1.0, 0.0) } else { C64::zero() }));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for s in 0..20 {
            let z = sample_l2(3, s);
            let u = linalg::random_unitary(&mut rng, 2);
            let p = projector(&z);
            assert!(p.validity_residual(2) < 1e-12);
            let pu = projector(&FramePoint::unit(&z.matrix * u));
            assert!(linalg::max_abs_entry(&(pu.0 - p.0)) < 1e-12);
        }
    }

    #[test]
    fn samples_and_memberships() {
        let j2 = quaternionic_j(&quaternionic_j(&[c(1.0, 2.0), c(3.0, -1.0), c(0.5, 0.5), c(-2.0, 1.0)]));
        assert_eq!(j2, vec![c(-1.0, -2.0), c(-3.0, 1.0), c(-0.5, -0.5), c(2.0, -1.0)]);
        for s in 0..50 {
            let l1 = sample_l1(2, s);
            assert!(l1.gram_residual() < 1e-13);
            assert!(l1.matrix.iter().all(|x| x.im == 0.0));
            assert!(wedge(&l1).0.iter().all(|x| x.im == 0.0));
            assert!(k1_membership(&projector(&l1), 1e-12));
            assert!(!k2_membership(&projector(&l1), 1e-6));
            let l2 = sample_l2(2, s);
            assert!(l2.gram_residual() < 1e-13);
            assert!(k2_membership(&projector(&l2), 1e-12));
            assert!(!k1_membership(&projector(&l2), 1e-6));
        }
    }

    #[test]
    fn l2_sample_orbit_has_one_wedge() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let q = sample_unit_quat(2, 3);
        let u = unit_quat(&mut rng);
        let a = quat_to_frame_b(&q).unwrap();
        let b = quat_to_frame_b(&q.left_mul(u)).unwrap();
        assert!(wedge(&a).distance(&wedge(&b)) < 1e-12);
    }

    #[test]
    fn legendrian_small() {
        for family in [Legendrian::L1, Legendrian::L2] {
            let rep = legendrian_check(family, 2, 10, 1, 1e-9);
            assert!(rep.passed, "{rep:?}");
            assert_eq!(rep.min_dim, 4);
            assert_eq!(rep.max_dim, 4);
        }
    }

    #[test]
    fn legendrian_excludes_orbit_directions() {
        let (z, t) = legendrian_tangents(Legendrian::L2, 2, 4);
        let orbit = su2_orbit_basis(&z);
        for v in &t {
            for o in &orbit {
                assert!(linalg::dot(&realify(v.as_slice()), o).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn double_cover() {
        for s in 0..20 {
            assert!(double_cover_witness(2, s, 1e-12).passed);
        }
    }

    #[test]
    fn l2_fiber_is_antipodal() {
        for s in 0..10 {
            let w = l2_fiber_witness(2, s, 64, 1e-9);
            assert!(w.passed, "{w:?}");
        }
    }

    #[test]
    fn dimensions() {
        for n in [2, 3] {
            assert_eq!(dimension_bookkeeping(n, 1), DimensionReport::expected(n));
        }
    }
}
