//! The weighted contact sphere `S_Γ = {Φ_{S¹} = L}` with `α = ½ ω(z, ·)`,
//! contact Hamiltonian vector fields and their flows, the infinitesimal
//! `G`-action, and the strict coisotropy check for `Φ_G⁻¹(p)`.
//!
//! `ω(u, v) = Im Σ conj(u_j) v_j`, so `ω(u, v) = ⟨iu, v⟩` for the real inner
//! product `⟨a, b⟩ = Re Σ conj(a_j) b_j`.

use nalgebra::DMatrix;
use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::ratio_to_f64;
use crate::linalg::{self, real_dot, realify, C64, I};
use crate::moment::{
    in_level_set, moment_s1, unitary_pairing, AmbientPoint, ReductionSpec, TangentVector,
};

/// Sphere residual, relative to the level, above which a point is refused.
pub const SPHERE_TOL: f64 = 1e-8;

/// Level-set residual above which the coisotropy check is refused.
pub const LEVEL_PRECONDITION_TOL: f64 = 1e-8;

/// Relative singular-value cutoff for Jacobian ranks.
const RANK_TOL: f64 = 1e-10;

pub fn omega(u: &[C64], v: &[C64]) -> f64 {
    assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| (a.conj() * b).im).sum()
}

/// `α_z(v) = ½ ω(z, v)`.
pub fn liouville(z: &AmbientPoint, v: &TangentVector) -> f64 {
    0.5 * omega(&z.flatten(), &v.flatten())
}

fn gamma_times(gamma: &[f64], z: &[C64]) -> Vec<C64> {
    z.iter().zip(gamma).map(|(c, g)| c * *g).collect()
}

pub fn sphere_residual(z: &AmbientPoint, spec: &ReductionSpec) -> f64 {
    (moment_s1(z, spec) - spec.s1_level_f64()).abs()
}

fn check_sphere(z: &AmbientPoint, spec: &ReductionSpec) -> Result<()> {
    spec.check_shape(z)?;
    let residual = sphere_residual(z, spec);
    if residual > SPHERE_TOL * spec.s1_level_f64().max(1.0) {
        return Err(Error::OffSphere { residual });
    }
    Ok(())
}

/// `R(z) = iΓz / L`.
pub fn reeb(z: &AmbientPoint, spec: &ReductionSpec) -> Result<TangentVector> {
    check_sphere(z, spec)?;
    Ok(spec.unflatten(&reeb_flat(&z.flatten(), &spec.gamma_f64(), spec.s1_level_f64())))
}

fn reeb_flat(z: &[C64], gamma: &[f64], level: f64) -> Vec<C64> {
    z.iter().zip(gamma).map(|(c, g)| I * c * (*g / level)).collect()
}

/// Time after which the Reeb flow closes up.
pub fn reeb_period(spec: &ReductionSpec) -> f64 {
    std::f64::consts::TAU * spec.s1_level_f64()
}

/// A function on `C^D` used as a contact Hamiltonian on the sphere.
pub trait ContactHamiltonian {
    fn value(&self, z: &[C64]) -> f64;

    /// Complex gradient `g` with `dh(u) = Re Σ conj(g_j) u_j`. The default is
    /// a central finite difference.
    fn gradient(&self, z: &[C64]) -> Vec<C64> {
        const EPS: f64 = 1e-6;
        let mut w = z.to_vec();
        (0..z.len())
            .map(|j| {
                let mut part = |dir: C64| {
                    w[j] = z[j] + dir * EPS;
                    let plus = self.value(&w);
                    w[j] = z[j] - dir * EPS;
                    let minus = self.value(&w);
                    w[j] = z[j];
                    (plus - minus) / (2.0 * EPS)
                };
                C64::new(part(C64::new(1.0, 0.0)), part(I))
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ConstantHamiltonian(pub f64);

impl ContactHamiltonian for ConstantHamiltonian {
    fn value(&self, _z: &[C64]) -> f64 {
        self.0
    }

    fn gradient(&self, z: &[C64]) -> Vec<C64> {
        vec![C64::zero(); z.len()]
    }
}

/// `h(z) = α_z(Az) = ½ Im(z* A z)` for a skew-Hermitian `A`.
#[derive(Clone, Debug)]
pub struct LinearHamiltonian {
    pub generator: DMatrix<C64>,
}

impl ContactHamiltonian for LinearHamiltonian {
    fn value(&self, z: &[C64]) -> f64 {
        let az = &self.generator * nalgebra::DVector::from_column_slice(z);
        0.5 * omega(z, az.as_slice())
    }

    fn gradient(&self, z: &[C64]) -> Vec<C64> {
        // h = ½ z* H z with H = -iA Hermitian, so g = H z
        let az = &self.generator * nalgebra::DVector::from_column_slice(z);
        az.iter().map(|c| -I * c).collect()
    }
}

/// Any closure, differentiated by finite differences.
pub struct FnHamiltonian<F: Fn(&[C64]) -> f64>(pub F);

impl<F: Fn(&[C64]) -> f64> ContactHamiltonian for FnHamiltonian<F> {
    fn value(&self, z: &[C64]) -> f64 {
        (self.0)(z)
    }
}

/// The sphere-tangent field `X` with `α(X) = h` and
/// `ι_X dα = dh(R) α - dh` on the sphere.
///
/// Writing `X = hR + Y` with `Y ∈ ker α`, the defining equations force
/// `Y = i g + b z - a iΓz` with the two scalars fixed by `Y ∈ ker α` and
/// `Y ⟂ Γz`.
pub fn contact_hamiltonian_field<H: ContactHamiltonian + ?Sized>(
    h: &H,
    z: &AmbientPoint,
    spec: &ReductionSpec,
) -> Result<TangentVector> {
    check_sphere(z, spec)?;
    let x = field_flat(h, &z.flatten(), &spec.gamma_f64(), spec.s1_level_f64());
    Ok(spec.unflatten(&x))
}

fn field_flat<H: ContactHamiltonian + ?Sized>(h: &H, z: &[C64], gamma: &[f64], level: f64) -> Vec<C64> {
    let g = h.gradient(z);
    let gz = gamma_times(gamma, z);
    let ig: Vec<C64> = g.iter().map(|c| I * c).collect();
    let igz: Vec<C64> = gz.iter().map(|c| I * c).collect();
    let zgz = real_dot(z, &gz);
    let a = real_dot(z, &g) / zgz;
    let b = -real_dot(&gz, &ig) / zgz;
    let hv = h.value(z) / level;
    (0..z.len())
        .map(|j| igz[j] * hv + ig[j] + z[j] * b - igz[j] * a)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub point: AmbientPoint,
    pub time: f64,
    pub step: f64,
    pub steps: usize,
    pub method: &'static str,
    /// Largest relative sphere drift seen before each renormalization.
    pub max_drift: f64,
}

/// Fixed-step RK4 for `t_final`, renormalizing radially onto the sphere after
/// every step. The step is shrunk so an integer number of steps lands on
/// `t_final` exactly.
pub fn flow<H: ContactHamiltonian + ?Sized>(
    h: &H,
    z0: &AmbientPoint,
    t_final: f64,
    step: f64,
    spec: &ReductionSpec,
) -> Result<FlowState> {
    if !(step > 0.0) || !t_final.is_finite() || t_final < 0.0 {
        return Err(Error::invariant("flow parameters", format!("t = {t_final}, step = {step}")));
    }
    check_sphere(z0, spec)?;
    let gamma = spec.gamma_f64();
    let level = spec.s1_level_f64();
    let steps = (t_final / step).ceil() as usize;
    let dt = if steps == 0 { 0.0 } else { t_final / steps as f64 };
    let mut z = z0.flatten();
    let mut max_drift = 0.0f64;
    let f = |w: &[C64]| field_flat(h, w, &gamma, level);
    let axpy = |a: &[C64], s: f64, b: &[C64]| -> Vec<C64> {
        a.iter().zip(b).map(|(x, y)| x + y * s).collect()
    };
    for _ in 0..steps {
        let k1 = f(&z);
        let k2 = f(&axpy(&z, dt / 2.0, &k1));
        let k3 = f(&axpy(&z, dt / 2.0, &k2));
        let k4 = f(&axpy(&z, dt, &k3));
        for j in 0..z.len() {
            z[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (dt / 6.0);
        }
        let s1 = 0.5 * z.iter().zip(&gamma).map(|(c, g)| g * c.norm_sqr()).sum::<f64>();
        max_drift = max_drift.max((s1 / level - 1.0).abs());
        let scale = (level / s1).sqrt();
        z.iter_mut().for_each(|c| *c *= scale);
    }
    Ok(FlowState {
        point: spec.unflatten(&z),
        time: t_final,
        step: dt,
        steps,
        method: "rk4",
        max_drift,
    })
}

/// Random skew-Hermitian `A` commuting with `diag Γ`, i.e. block diagonal
/// over coordinates of equal weight. Such `A` preserve the sphere.
pub fn random_sphere_generator<R: Rng + ?Sized>(spec: &ReductionSpec, rng: &mut R) -> DMatrix<C64> {
    let gamma = spec.gamma();
    let n = gamma.len();
    let full = linalg::random_skew_hermitian(rng, n);
    DMatrix::from_fn(n, n, |r, c| if gamma[r] == gamma[c] { full[(r, c)] } else { C64::zero() })
}

/// An element of `g = k ⊕ ⊕ u(k_i)`: toric part as coefficients on the
/// kernel basis, one skew-Hermitian block per factor.
#[derive(Clone, Debug, PartialEq)]
pub struct LieElement {
    pub torus: Vec<f64>,
    pub blocks: Vec<DMatrix<C64>>,
}

impl LieElement {
    pub fn zero(spec: &ReductionSpec) -> Self {
        Self {
            torus: vec![0.0; spec.delzant.kernel.rank()],
            blocks: spec.factors.iter().map(|f| DMatrix::zeros(f.k, f.k)).collect(),
        }
    }

    fn combine(elements: &[LieElement], coeffs: &[f64], spec: &ReductionSpec) -> Self {
        let mut out = Self::zero(spec);
        for (e, &c) in elements.iter().zip(coeffs) {
            out.torus.iter_mut().zip(&e.torus).for_each(|(a, b)| *a += c * b);
            for (a, b) in out.blocks.iter_mut().zip(&e.blocks) {
                *a += b * C64::new(c, 0.0);
            }
        }
        out
    }

    /// Weights `t ∈ R^d` of the toric part, `t = Σ_m torus_m b_m`.
    pub fn toric_weights(&self, spec: &ReductionSpec) -> Vec<f64> {
        let mut t = vec![0.0; spec.toric_len()];
        for (c, b) in self.torus.iter().zip(spec.delzant.kernel.basis()) {
            t.iter_mut().zip(b).for_each(|(x, &y)| *x += c * y as f64);
        }
        t
    }

    /// `⟨p, X⟩`.
    pub fn pair_with_level(&self, spec: &ReductionSpec) -> f64 {
        let toric: f64 = self
            .torus
            .iter()
            .zip(&spec.delzant.level.0)
            .map(|(t, c)| t * ratio_to_f64(c))
            .sum();
        let p = crate::moment::target_level(spec);
        toric + p.unitary.iter().zip(&self.blocks).map(|(a, b)| unitary_pairing(a, b)).sum::<f64>()
    }

    /// The `D × D` skew-Hermitian matrix acting on flat coordinates.
    pub fn as_matrix(&self, spec: &ReductionSpec) -> DMatrix<C64> {
        let n = spec.total_dim();
        let mut m = DMatrix::zeros(n, n);
        for (j, t) in self.toric_weights(spec).into_iter().enumerate() {
            m[(j, j)] = I * t;
        }
        let mut offset = spec.toric_len();
        for (f, x) in spec.factors.iter().zip(&self.blocks) {
            // vec(W X) = (Xᵀ ⊗ I_n) vec(W) in column-major order
            for a in 0..f.k {
                for b in 0..f.k {
                    for r in 0..f.n {
                        m[(offset + b * f.n + r, offset + a * f.n + r)] = x[(a, b)];
                    }
                }
            }
            offset += f.block_len();
        }
        m
    }
}

/// Basis of `g`: unit toric coefficients, then for each `u(k)` the elements
/// `i E_jj`, `E_jl - E_lj`, `i(E_jl + E_lj)` for `j < l`.
pub fn lie_algebra_basis(spec: &ReductionSpec) -> Vec<LieElement> {
    let mut out = Vec::with_capacity(spec.group_dim());
    let zero = LieElement::zero(spec);
    for m in 0..zero.torus.len() {
        let mut e = zero.clone();
        e.torus[m] = 1.0;
        out.push(e);
    }
    for (i, f) in spec.factors.iter().enumerate() {
        for j in 0..f.k {
            let mut e = zero.clone();
            e.blocks[i][(j, j)] = I;
            out.push(e);
        }
        for j in 0..f.k {
            for l in j + 1..f.k {
                let mut e = zero.clone();
                e.blocks[i][(j, l)] = C64::new(1.0, 0.0);
                e.blocks[i][(l, j)] = C64::new(-1.0, 0.0);
                out.push(e);
                let mut e = zero.clone();
                e.blocks[i][(j, l)] = I;
                e.blocks[i][(l, j)] = I;
                out.push(e);
            }
        }
    }
    out
}

/// Orthonormal (in basis coefficients) basis of `g_0 = ker p`.
pub fn g0_basis(spec: &ReductionSpec) -> Vec<LieElement> {
    let basis = lie_algebra_basis(spec);
    let p: Vec<f64> = basis.iter().map(|e| e.pair_with_level(spec)).collect();
    let span = linalg::orthonormalize(&[p], 1e-14);
    linalg::complement(&span, basis.len())
        .iter()
        .map(|coeffs| LieElement::combine(&basis, coeffs, spec))
        .collect()
}

/// `X·z`: toric coordinates rotate by `i t_j`, frames multiply by `X_i` on the right.
pub fn infinitesimal_action(z: &AmbientPoint, x: &LieElement, spec: &ReductionSpec) -> Result<TangentVector> {
    spec.check_shape(z)?;
    if x.torus.len() != spec.delzant.kernel.rank() || x.blocks.len() != spec.factors.len() {
        return Err(Error::shape("Lie element does not match the group"));
    }
    for (b, f) in x.blocks.iter().zip(&spec.factors) {
        if b.shape() != (f.k, f.k) {
            return Err(Error::shape(format!("block is {:?}, expected ({}, {})", b.shape(), f.k, f.k)));
        }
    }
    let t = x.toric_weights(spec);
    Ok(AmbientPoint {
        toric: z.toric.iter().zip(&t).map(|(c, w)| I * c * *w).collect(),
        frames: z.frames.iter().zip(&x.blocks).map(|(w, b)| w * b).collect(),
    })
}

/// Rows of the real Jacobian of `Φ_G` at `z`, one per basis element of `g`:
/// the gradient of `⟨Φ_G, X⟩` is `-i X z`.
fn moment_jacobian(z: &AmbientPoint, spec: &ReductionSpec) -> Result<Vec<Vec<f64>>> {
    lie_algebra_basis(spec)
        .iter()
        .map(|x| {
            let v = infinitesimal_action(z, x, spec)?.flatten();
            Ok(realify(&v.iter().map(|c| -I * c).collect::<Vec<_>>()))
        })
        .collect()
}

fn level_tangent_real(z: &AmbientPoint, spec: &ReductionSpec) -> Result<Vec<Vec<f64>>> {
    let rows = moment_jacobian(z, spec)?;
    let expected = spec.group_dim();
    let rank = linalg::numerical_rank(&rows, RANK_TOL);
    if rank != expected {
        return Err(Error::RankDeficient { rank, expected });
    }
    let span = linalg::orthonormalize(&rows, RANK_TOL);
    Ok(linalg::complement(&span, 2 * spec.total_dim()))
}

/// Orthonormal real basis of `ker dΦ_G` at `z`, of size `2D - dim G`.
pub fn level_tangent_basis(z: &AmbientPoint, spec: &ReductionSpec) -> Result<Vec<TangentVector>> {
    Ok(level_tangent_real(z, spec)?
        .iter()
        .map(|v| spec.unflatten(&linalg::complexify(v)))
        .collect())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CoisotropyReport {
    /// Distance of the Reeb vector from `T_zY`.
    pub reeb_tangent: f64,
    /// `max |dα(R, u)|` over tangent basis vectors `u`.
    pub reeb_kernel: f64,
    /// Distance of `g_0`-orbit directions from `T_zY`.
    pub orbit_tangent: f64,
    /// `max |α(Xz)|` over `g_0`.
    pub orbit_alpha: f64,
    /// `max |dα(u, Xz)|` over tangent `u` and `X ∈ g_0`.
    pub orbit_isotropy: f64,
    /// Distance of the `dα`-complement of `T_zY` from `T_zY`.
    pub complement_containment: f64,
    pub complement_dim: usize,
    pub tangent_dim: usize,
    pub max_residual: f64,
}

/// Checks `T_zY^{dα} ⊂ T_zY` at a point of `Y = Φ_G⁻¹(p)`, both through the
/// orbit characterization and by computing the complement directly.
pub fn strictly_coisotropic_check(z: &AmbientPoint, spec: &ReductionSpec) -> Result<CoisotropyReport> {
    let level = in_level_set(z, spec, LEVEL_PRECONDITION_TOL)?;
    if !level.inside {
        return Err(Error::NotOnLevelSet { residual: level.residual });
    }
    let tangent = level_tangent_real(z, spec)?;
    let zf = z.flatten();
    let r = reeb(z, spec)?.flatten();
    let rr = realify(&r);

    let mut rep = CoisotropyReport {
        reeb_tangent: linalg::distance_to_span(&rr, &tangent),
        tangent_dim: tangent.len(),
        ..Default::default()
    };
    let tangent_c: Vec<Vec<C64>> = tangent.iter().map(|v| linalg::complexify(v)).collect();
    for u in &tangent_c {
        rep.reeb_kernel = rep.reeb_kernel.max(omega(&r, u).abs());
    }
    for x in g0_basis(spec) {
        let xz = infinitesimal_action(z, &x, spec)?.flatten();
        rep.orbit_tangent = rep.orbit_tangent.max(linalg::distance_to_span(&realify(&xz), &tangent));
        rep.orbit_alpha = rep.orbit_alpha.max((0.5 * omega(&zf, &xz)).abs());
        for u in &tangent_c {
            rep.orbit_isotropy = rep.orbit_isotropy.max(omega(u, &xz).abs());
        }
    }

    // v ⟂_ω u  ⇔  ⟨-iu, v⟩ = 0; the sphere condition ⟨Γz, v⟩ = 0 is implied
    // because R ∈ T_zY, but is kept explicitly.
    let mut rows: Vec<Vec<f64>> = tangent_c
        .iter()
        .map(|u| realify(&u.iter().map(|c| -I * c).collect::<Vec<_>>()))
        .collect();
    rows.push(realify(&gamma_times(&spec.gamma_f64(), &zf)));
    let span = linalg::orthonormalize(&rows, RANK_TOL);
    let comp = linalg::complement(&span, 2 * spec.total_dim());
    rep.complement_dim = comp.len();
    for c in &comp {
        rep.complement_containment = rep.complement_containment.max(linalg::distance_to_span(c, &tangent));
    }
    if rep.complement_dim != spec.group_dim() {
        rep.complement_containment = rep.complement_containment.max(1.0);
    }
    rep.max_residual = [
        rep.reeb_tangent,
        rep.reeb_kernel,
        rep.orbit_tangent,
        rep.orbit_alpha,
        rep.orbit_isotropy,
        rep.complement_containment,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{IntMatrix, RationalVector};
    use crate::moment::{moment_g, sample, target_level};
    use crate::toric::{GrassmannFactor, PolytopeSpec};
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gr2c4() -> ReductionSpec {
        ReductionSpec::new("gr2c4", PolytopeSpec::point(), vec![GrassmannFactor::new(4, 2).unwrap()]).unwrap()
    }

    fn cp2(factors: Vec<GrassmannFactor>) -> ReductionSpec {
        let n = IntMatrix::from_columns(2, &[vec![1, 0], vec![0, 1], vec![-1, -1]]);
        ReductionSpec::new("cp2", PolytopeSpec::new(n, RationalVector::half_ones(3)).unwrap(), factors).unwrap()
    }

    fn f1_with_grass() -> ReductionSpec {
        // non-trivial weights γ = (1,1,1,2)
        let n = IntMatrix::from_columns(2, &[vec![1, 0], vec![0, 1], vec![-1, 1], vec![0, -1]]);
        ReductionSpec::new(
            "f1",
            PolytopeSpec::new(n, RationalVector::half_ones(4)).unwrap(),
            vec![GrassmannFactor::new(4, 2).unwrap()],
        )
        .unwrap()
    }

    fn max_diff(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
    }

    #[test]
    fn liouville_examples() {
        let spec = cp2(vec![]);
        let z = AmbientPoint { toric: vec![C64::new(1.0, 0.0), C64::zero(), C64::zero()], frames: vec![] };
        let v = AmbientPoint { toric: vec![I, C64::zero(), C64::zero()], frames: vec![] };
        assert_eq!(liouville(&z, &v), 0.5);
        assert_eq!(liouville(&z, &z), 0.0);

        let spec2 = gr2c4();
        let p = sample(&spec2, 3);
        let igz = spec2.unflatten(&gamma_times(&spec2.gamma_f64(), &p.flatten()).iter().map(|c| I * c).collect::<Vec<_>>());
        assert!((liouville(&p, &igz) - 4.0).abs() < 1e-12);
        let _ = spec;
    }

    #[test]
    fn reeb_normalization() {
        for spec in [gr2c4(), f1_with_grass(), cp2(vec![GrassmannFactor::new(4, 2).unwrap()])] {
            for s in 0..100 {
                let z = sample(&spec, s);
                let r = reeb(&z, &spec).unwrap();
                assert!((liouville(&z, &r) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reeb_kills_sphere_tangents() {
        let spec = f1_with_grass();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for s in 0..20 {
            let z = sample(&spec, s);
            let zf = z.flatten();
            let r = reeb(&z, &spec).unwrap().flatten();
            let gz = realify(&gamma_times(&spec.gamma_f64(), &zf));
            let span = linalg::orthonormalize(&[gz], 1e-12);
            for _ in 0..10 {
                let u = linalg::reject(&linalg::gaussian_vector(&mut rng, 2 * zf.len()), &span);
                assert!(omega(&r, &linalg::complexify(&u)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn reeb_refuses_off_sphere() {
        let spec = gr2c4();
        let z = sample(&spec, 1).scale(1.1);
        assert!(matches!(reeb(&z, &spec), Err(Error::OffSphere { .. })));
    }

    #[test]
    fn unnormalized_reeb_is_periodic() {
        // exp(2π iΓ) = I for integer weights
        let spec = f1_with_grass();
        let z = sample(&spec, 4).flatten();
        let back: Vec<C64> = z
            .iter()
            .zip(spec.gamma_f64())
            .map(|(c, g)| c * C64::from_polar(1.0, g * std::f64::consts::TAU))
            .collect();
        assert!(max_diff(&z, &back) < 1e-12);
    }

    #[test]
    fn unit_gamma_reeb_is_scaled_rotation() {
        let spec = gr2c4();
        let z = sample(&spec, 2);
        let r = reeb(&z, &spec).unwrap().flatten();
        let want: Vec<C64> = z.flatten().iter().map(|c| I * c / 4.0).collect();
        assert!(max_diff(&r, &want) < 1e-15);
    }

    #[test]
    fn constant_one_gives_reeb() {
        let spec = f1_with_grass();
        let z = sample(&spec, 6);
        let x = contact_hamiltonian_field(&ConstantHamiltonian(1.0), &z, &spec).unwrap().flatten();
        let r = reeb(&z, &spec).unwrap().flatten();
        assert!(max_diff(&x, &r) < 1e-14);
        let x0 = contact_hamiltonian_field(&ConstantHamiltonian(0.0), &z, &spec).unwrap().flatten();
        assert!(x0.iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn linear_field_reconstructs_generator() {
        let spec = f1_with_grass();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for s in 0..20 {
            let a = random_sphere_generator(&spec, &mut rng);
            let z = sample(&spec, s);
            let h = LinearHamiltonian { generator: a.clone() };
            let x = contact_hamiltonian_field(&h, &z, &spec).unwrap().flatten();
            let az = &a * DVector::from_column_slice(&z.flatten());
            assert!(max_diff(&x, az.as_slice()) < 1e-10);
            // finite-difference gradient gives the same field to FD accuracy
            let fd = FnHamiltonian(|w: &[C64]| h.value(w));
            let xf = contact_hamiltonian_field(&fd, &z, &spec).unwrap().flatten();
            assert!(max_diff(&xf, az.as_slice()) < 1e-6);
        }
    }

    #[test]
    fn field_satisfies_defining_equations() {
        // independent check of α(X) = h and ι_X dα = dh(R) α - dh on sphere tangents
        let spec = f1_with_grass();
        let h = FnHamiltonian(|w: &[C64]| w[0].re * w[4].im + (w[1] * w[2]).re + 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for s in 0..10 {
            let z = sample(&spec, s);
            let zf = z.flatten();
            let x = contact_hamiltonian_field(&h, &z, &spec).unwrap().flatten();
            assert!((0.5 * omega(&zf, &x) - h.value(&zf)).abs() < 1e-8);
            let gz = realify(&gamma_times(&spec.gamma_f64(), &zf));
            let span = linalg::orthonormalize(&[gz.clone()], 1e-12);
            assert!(linalg::dot(&gz, &realify(&x)).abs() < 1e-9);
            let dh = |u: &[C64]| {
                let eps = 1e-6;
                let p: Vec<C64> = zf.iter().zip(u).map(|(a, b)| a + b * eps).collect();
                let m: Vec<C64> = zf.iter().zip(u).map(|(a, b)| a - b * eps).collect();
                (h.value(&p) - h.value(&m)) / (2.0 * eps)
            };
            let r = reeb(&z, &spec).unwrap().flatten();
            let dhr = dh(&r);
            for _ in 0..5 {
                let u = linalg::complexify(&linalg::reject(&linalg::gaussian_vector(&mut rng, gz.len()), &span));
                let lhs = omega(&x, &u);
                let rhs = dhr * 0.5 * omega(&zf, &u) - dh(&u);
                assert!((lhs - rhs).abs() < 1e-6, "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn flow_matches_exponential() {
        let spec = gr2c4();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for s in 0..3 {
            let a = random_sphere_generator(&spec, &mut rng);
            let z0 = sample(&spec, s);
            let st = flow(&LinearHamiltonian { generator: a.clone() }, &z0, 1.0, 1e-3, &spec).unwrap();
            let want = a.exp() * DVector::from_column_slice(&z0.flatten());
            assert!(max_diff(&st.point.flatten(), want.as_slice()) < 1e-6);
            assert!(st.max_drift < 1e-8);
        }
    }

    #[test]
    fn reeb_flow_closes() {
        let spec = f1_with_grass();
        let z0 = sample(&spec, 10);
        let st = flow(&ConstantHamiltonian(1.0), &z0, reeb_period(&spec), 1e-2, &spec).unwrap();
        assert!(max_diff(&st.point.flatten(), &z0.flatten()) < 1e-9);
    }

    #[test]
    fn zero_time_is_identity() {
        let spec = gr2c4();
        let z0 = sample(&spec, 1);
        let st = flow(&ConstantHamiltonian(1.0), &z0, 0.0, 1e-3, &spec).unwrap();
        assert_eq!(st.point, z0);
        assert_eq!(st.steps, 0);
    }

    #[test]
    fn group_flow_preserves_level() {
        let spec = cp2(vec![GrassmannFactor::new(4, 2).unwrap()]);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let basis = lie_algebra_basis(&spec);
        for s in 0..5 {
            let coeffs = linalg::gaussian_vector(&mut rng, basis.len());
            let x = LieElement::combine(&basis, &coeffs, &spec);
            let z0 = sample(&spec, s);
            let st = flow(&LinearHamiltonian { generator: x.as_matrix(&spec) }, &z0, 1.0, 1e-3, &spec).unwrap();
            let r = moment_g(&st.point, &spec).unwrap().distance(&target_level(&spec));
            assert!(r < 1e-8, "{r}");
        }
    }

    #[test]
    fn action_matrix_agrees_with_action() {
        let spec = f1_with_grass();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let basis = lie_algebra_basis(&spec);
        let coeffs = linalg::gaussian_vector(&mut rng, basis.len());
        let x = LieElement::combine(&basis, &coeffs, &spec);
        let z = sample(&spec, 0);
        let direct = infinitesimal_action(&z, &x, &spec).unwrap().flatten();
        let via = x.as_matrix(&spec) * DVector::from_column_slice(&z.flatten());
        assert!(max_diff(&direct, via.as_slice()) < 1e-13);
        let m = x.as_matrix(&spec);
        assert!(linalg::max_abs_entry(&(&m + m.adjoint())) < 1e-15);
    }

    #[test]
    fn action_examples() {
        let spec = gr2c4();
        let z = sample(&spec, 0);
        let zero = infinitesimal_action(&z, &LieElement::zero(&spec), &spec).unwrap();
        assert!(zero.flatten().iter().all(|c| c.norm() == 0.0));
        for x in g0_basis(&spec) {
            let v = infinitesimal_action(&z, &x, &spec).unwrap();
            assert!(liouville(&z, &v).abs() < 1e-12);
        }
        let mut bad = LieElement::zero(&spec);
        bad.blocks[0] = DMatrix::zeros(3, 3);
        assert!(matches!(infinitesimal_action(&z, &bad, &spec), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn pairing_equals_alpha_of_action() {
        // ⟨Φ_G(z), X⟩ = α_z(Xz), and at level points this is ⟨p, X⟩
        let spec = f1_with_grass();
        let z = sample(&spec, 2);
        for x in lie_algebra_basis(&spec) {
            let a = liouville(&z, &infinitesimal_action(&z, &x, &spec).unwrap());
            assert!((a - x.pair_with_level(&spec)).abs() < 1e-12);
        }
    }

    #[test]
    fn g0_dimension() {
        let spec = gr2c4();
        assert_eq!(lie_algebra_basis(&spec).len(), 4);
        assert_eq!(g0_basis(&spec).len(), 3);
        let spec = cp2(vec![GrassmannFactor::new(4, 2).unwrap()]);
        assert_eq!(g0_basis(&spec).len(), 4);
    }

    #[test]
    fn tangent_basis_point_grassmannian() {
        let spec = gr2c4();
        let z = sample(&spec, 3);
        let basis = level_tangent_basis(&z, &spec).unwrap();
        assert_eq!(basis.len(), 12);
        let flat: Vec<Vec<f64>> = basis.iter().map(|b| realify(&b.flatten())).collect();
        for (i, a) in flat.iter().enumerate() {
            for (j, b) in flat.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((linalg::dot(a, b) - want).abs() < 1e-12);
            }
        }
        // Φ_G is quadratic, so the central difference is exact up to rounding
        let p0 = moment_g(&z, &spec).unwrap();
        for b in &basis {
            let eps = 1e-3;
            let zp = spec.unflatten(&z.flatten().iter().zip(b.flatten()).map(|(a, v)| a + v * eps).collect::<Vec<_>>());
            let zm = spec.unflatten(&z.flatten().iter().zip(b.flatten()).map(|(a, v)| a - v * eps).collect::<Vec<_>>());
            let dp = moment_g(&zp, &spec).unwrap().distance(&moment_g(&zm, &spec).unwrap());
            assert!(dp / (2.0 * eps) < 1e-10);
        }
        let _ = p0;
    }

    #[test]
    fn tangent_basis_rank_deficient() {
        // a frame with dependent columns is a critical point
        let spec = gr2c4();
        let mut z = sample(&spec, 3);
        let c0 = z.frames[0].column(0).clone_owned();
        z.frames[0].set_column(1, &c0);
        // W X for X ∈ u(2) only spans complex multiples of the repeated column
        assert!(matches!(level_tangent_basis(&z, &spec), Err(Error::RankDeficient { rank: 3, expected: 4 })));
    }

    #[test]
    fn coisotropic_main_instance() {
        for spec in [gr2c4(), cp2(vec![GrassmannFactor::new(4, 2).unwrap()]), f1_with_grass()] {
            for s in 0..10 {
                let rep = strictly_coisotropic_check(&sample(&spec, s), &spec).unwrap();
                assert!(rep.max_residual < 1e-8, "{rep:?}");
                assert_eq!(rep.complement_dim, spec.group_dim());
                assert_eq!(rep.tangent_dim, 2 * spec.total_dim() - spec.group_dim());
            }
        }
    }

    #[test]
    fn coisotropic_toric_only() {
        let spec = cp2(vec![]);
        let rep = strictly_coisotropic_check(&sample(&spec, 1), &spec).unwrap();
        assert!(rep.max_residual < 1e-8);
    }

    #[test]
    fn coisotropic_refuses_off_level() {
        let spec = gr2c4();
        let z = sample(&spec, 1).scale(1.01);
        assert!(matches!(strictly_coisotropic_check(&z, &spec), Err(Error::NotOnLevelSet { .. })));
    }
}
