//! Moment maps of `G = K × Π U(k_i)` on `C^D`, the level `p`, and sampling of
//! the level set `Φ_G⁻¹(p)`.
//!
//! Frames are kept at moment level: a point of the level set has frame
//! blocks with `W*W = n I`. [`to_unit_frame`] and [`to_moment_level`] convert
//! to and from orthonormal frames.

use nalgebra::DMatrix;
use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{ratio_to_f64, KernelLattice, Rational};
use crate::linalg::{self, C64, I};
use crate::seed;
use crate::toric::{
    build_delzant_with_bound, find_interior_point, stage_torus_data, DelzantData,
    GrassmannFactor, InteriorPoint, PolytopeSpec, StageTorus,
};
use crate::lattice::DEFAULT_WEIGHT_BOUND;

/// Toric polytope plus Grassmannian factors, with everything derived from them.
#[derive(Clone, Debug)]
pub struct ReductionSpec {
    pub name: String,
    pub polytope: PolytopeSpec,
    pub delzant: DelzantData,
    pub factors: Vec<GrassmannFactor>,
    pub interior: InteriorPoint,
    pub stage: StageTorus,
}

impl ReductionSpec {
    pub fn new(name: impl Into<String>, polytope: PolytopeSpec, factors: Vec<GrassmannFactor>) -> Result<Self> {
        Self::with_weight_bound(name, polytope, factors, DEFAULT_WEIGHT_BOUND)
    }

    pub fn with_weight_bound(
        name: impl Into<String>,
        polytope: PolytopeSpec,
        factors: Vec<GrassmannFactor>,
        bound: i64,
    ) -> Result<Self> {
        let delzant = build_delzant_with_bound(&polytope, bound)?;
        let interior = find_interior_point(&polytope)?;
        let stage = stage_torus_data(&delzant, &factors);
        Ok(Self { name: name.into(), polytope, delzant, factors, interior, stage })
    }

    /// Number of toric coordinates `d`.
    pub fn toric_len(&self) -> usize {
        self.delzant.facets()
    }

    /// Complex dimension `D` of the ambient space.
    pub fn total_dim(&self) -> usize {
        self.stage.total_dim()
    }

    pub fn gamma(&self) -> &[i64] {
        &self.stage.gamma
    }

    pub fn gamma_f64(&self) -> Vec<f64> {
        self.stage.gamma.iter().map(|&g| g as f64).collect()
    }

    /// `dim G = rank K + Σ k_i²`.
    pub fn group_dim(&self) -> usize {
        self.delzant.kernel.rank() + self.factors.iter().map(|f| f.k * f.k).sum::<usize>()
    }

    /// The sphere level `⟨γ, a⟩ + ½ Σ n_i k_i` reached by `Φ_{S¹}` on `Φ_G⁻¹(p)`.
    pub fn s1_level(&self) -> Rational {
        let toric = self.delzant.offsets.dot_int(&self.delzant.weight.0);
        self.factors.iter().fold(toric, |acc, f| acc + f.central_level())
    }

    pub fn s1_level_f64(&self) -> f64 {
        ratio_to_f64(&self.s1_level())
    }

    pub fn zero_point(&self) -> AmbientPoint {
        AmbientPoint {
            toric: vec![C64::zero(); self.toric_len()],
            frames: self.factors.iter().map(|f| DMatrix::zeros(f.n, f.k)).collect(),
        }
    }

    pub fn check_shape(&self, pt: &AmbientPoint) -> Result<()> {
        if pt.toric.len() != self.toric_len() {
            return Err(Error::shape(format!(
                "toric block has length {}, expected {}",
                pt.toric.len(),
                self.toric_len()
            )));
        }
        if pt.frames.len() != self.factors.len() {
            return Err(Error::shape(format!(
                "{} frame blocks, expected {}",
                pt.frames.len(),
                self.factors.len()
            )));
        }
        for (i, (w, f)) in pt.frames.iter().zip(&self.factors).enumerate() {
            if w.shape() != (f.n, f.k) {
                return Err(Error::shape(format!(
                    "frame block {i} is {:?}, expected ({}, {})",
                    w.shape(),
                    f.n,
                    f.k
                )));
            }
        }
        Ok(())
    }

    /// Rebuilds a point from its flat coordinates.
    pub fn unflatten(&self, flat: &[C64]) -> AmbientPoint {
        assert_eq!(flat.len(), self.total_dim(), "flat length");
        let d = self.toric_len();
        let mut offset = d;
        let frames = self
            .factors
            .iter()
            .map(|f| {
                let m = DMatrix::from_column_slice(f.n, f.k, &flat[offset..offset + f.block_len()]);
                offset += f.block_len();
                m
            })
            .collect();
        AmbientPoint { toric: flat[..d].to_vec(), frames }
    }
}

/// A point of `C^D`: toric coordinates followed by one `n × k` frame per factor.
///
/// The flat layout is the toric block, then each frame in column-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct AmbientPoint {
    pub toric: Vec<C64>,
    pub frames: Vec<DMatrix<C64>>,
}

/// Real-linear displacements share the shape of points.
pub type TangentVector = AmbientPoint;

impl AmbientPoint {
    pub fn flatten(&self) -> Vec<C64> {
        let mut out = self.toric.clone();
        for w in &self.frames {
            out.extend_from_slice(w.as_slice());
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            toric: self.toric.iter().map(|z| z * s).collect(),
            frames: self.frames.iter().map(|w| w * C64::new(s, 0.0)).collect(),
        }
    }
}

/// Value of `Φ_G`: the toric part in kernel-basis coordinates and one
/// skew-Hermitian `k × k` block per factor.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentValue {
    pub toric: Vec<f64>,
    pub unitary: Vec<DMatrix<C64>>,
}

impl MomentValue {
    /// Max-norm distance between two values of the same shape.
    pub fn distance(&self, other: &MomentValue) -> f64 {
        let t = self
            .toric
            .iter()
            .zip(&other.toric)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        self.unitary
            .iter()
            .zip(&other.unitary)
            .fold(t, |m, (a, b)| m.max(linalg::max_abs_entry(&(a - b))))
    }

    pub fn max_abs(&self) -> f64 {
        let t = linalg::max_abs(&self.toric);
        self.unitary.iter().fold(t, |m, a| m.max(linalg::max_abs_entry(a)))
    }
}

/// `((i/2)(z_j, z_l))_{jl}` over the columns `z_j` of `w`, with the Hermitian
/// product antilinear in the second slot.
pub fn moment_unitary(w: &DMatrix<C64>) -> DMatrix<C64> {
    let k = w.ncols();
    DMatrix::from_fn(k, k, |j, l| {
        let herm: C64 = w.column(j).iter().zip(w.column(l).iter()).map(|(a, b)| a * b.conj()).sum();
        I * 0.5 * herm
    })
}

/// Pairing of a `u(k)` value with a Lie algebra element, `Re tr(conj(M) X)`.
/// Under it `⟨moment_unitary(W), X⟩ = α_W(W X)`.
pub fn unitary_pairing(m: &DMatrix<C64>, x: &DMatrix<C64>) -> f64 {
    (m.map(|c| c.conj()) * x).trace().re
}

/// `ι*(½|z_1|², …, ½|z_d|²)`.
pub fn moment_toric(z: &[C64], kernel: &KernelLattice) -> Vec<f64> {
    let half_sq: Vec<f64> = z.iter().map(|c| 0.5 * c.norm_sqr()).collect();
    kernel.restrict_f64(&half_sq)
}

pub fn moment_g(pt: &AmbientPoint, spec: &ReductionSpec) -> Result<MomentValue> {
    spec.check_shape(pt)?;
    Ok(MomentValue {
        toric: moment_toric(&pt.toric, &spec.delzant.kernel),
        unitary: pt.frames.iter().map(moment_unitary).collect(),
    })
}

/// `½ Σ γ_j |z_j|² + ½ Σ |W_i|²`.
pub fn moment_s1(pt: &AmbientPoint, spec: &ReductionSpec) -> f64 {
    let toric: f64 = pt
        .toric
        .iter()
        .zip(spec.gamma())
        .map(|(z, &g)| g as f64 * z.norm_sqr())
        .sum();
    let frames: f64 = pt.frames.iter().map(|w| w.norm_squared()).sum();
    0.5 * (toric + frames)
}

/// `p = (c, (i n_1/2) I_{k_1}, …)`.
pub fn target_level(spec: &ReductionSpec) -> MomentValue {
    MomentValue {
        toric: spec.delzant.level.to_f64(),
        unitary: spec
            .factors
            .iter()
            .map(|f| DMatrix::identity(f.k, f.k) * (I * (f.n as f64 / 2.0)))
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelCheck {
    pub inside: bool,
    pub residual: f64,
}

pub fn in_level_set(pt: &AmbientPoint, spec: &ReductionSpec, tol: f64) -> Result<LevelCheck> {
    let residual = moment_g(pt, spec)?.distance(&target_level(spec));
    Ok(LevelCheck { inside: residual < tol, residual })
}

/// Samples `Φ_G⁻¹(p)` over the interior point `x`: toric moduli from the
/// slacks with uniform phases, frames as `√n` times a random orthonormal frame.
pub fn sample_level(spec: &ReductionSpec, x: &InteriorPoint, seed_value: u64) -> Result<AmbientPoint> {
    if let Some(s) = x.min_slack() {
        if s <= Rational::zero() {
            return Err(Error::EmptyInterior { best_slack: s.to_string() });
        }
    }
    let mut rng = seed::rng(seed_value);
    let toric = x
        .slacks
        .iter()
        .map(|s| {
            let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            C64::from_polar((2.0 * ratio_to_f64(s)).sqrt(), theta)
        })
        .collect();
    let frames = spec
        .factors
        .iter()
        .map(|f| {
            let g = linalg::complex_gaussian_matrix(&mut rng, f.n, f.k);
            to_moment_level(&linalg::orthonormalize_columns(&g), f)
        })
        .collect();
    Ok(AmbientPoint { toric, frames })
}

/// Same as [`sample_level`] at the spec's own interior point.
pub fn sample(spec: &ReductionSpec, seed_value: u64) -> AmbientPoint {
    sample_level(spec, &spec.interior, seed_value).expect("spec interior point is strictly interior")
}

pub fn to_unit_frame(w: &DMatrix<C64>, f: &GrassmannFactor) -> DMatrix<C64> {
    w * C64::new(1.0 / (f.n as f64).sqrt(), 0.0)
}

pub fn to_moment_level(w: &DMatrix<C64>, f: &GrassmannFactor) -> DMatrix<C64> {
    w * C64::new((f.n as f64).sqrt(), 0.0)
}

/// Random point of `C^D` near the level set, for perturbation tests.
pub fn perturb<R: Rng + ?Sized>(pt: &AmbientPoint, spec: &ReductionSpec, rng: &mut R, size: f64) -> AmbientPoint {
    let flat = pt.flatten();
    let noise = linalg::complex_gaussian_matrix(rng, flat.len(), 1);
    let scale = size / noise.norm();
    let moved: Vec<C64> = flat.iter().zip(noise.iter()).map(|(a, b)| a + b * scale).collect();
    spec.unflatten(&moved)
}
