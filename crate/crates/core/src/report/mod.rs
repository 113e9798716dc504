//! Spec ingestion, the verification suites and the machine-readable report.
//!
//! Reports are JSON trees: integers as numbers, rationals as integers or
//! `[num, den]`, complex numbers as `[re, im]`. Runtimes are left out unless
//! asked for, so a fixed `(spec, config)` always serializes to the same bytes.

pub mod builtin;
pub mod spec_file;
pub mod suites;

use serde::Serialize;

use crate::lattice::{monotone_level_check, KernelLattice, Rational, RationalVector};
use crate::moment::{target_level, ReductionSpec};

pub use builtin::builtin;
pub use spec_file::{load_spec, RationalEntry, SpecDocument};
pub use suites::{run_suites, RunConfig, SampleCounts, Status, Suite, SuiteResult, Tolerances};

fn rat(r: &Rational) -> RationalEntry {
    RationalEntry::from_rational(r)
}

fn rats(v: &[Rational]) -> Vec<RationalEntry> {
    v.iter().map(rat).collect()
}

/// Chern and area bookkeeping for one Grassmannian factor, on the sphere
/// `u` obtained by pushing down a generator of `π₂` of the projectivized
/// frame variety.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorData {
    pub n: usize,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quaternionic_dim: Option<usize>,
    /// Minimal Chern number of `CP^{kn-1}`.
    pub projective_minimal_chern: usize,
    pub grassmannian_minimal_chern: usize,
    /// `⟨c₁(Gr), [u]⟩ = k · n`.
    pub chern_on_u: usize,
    /// `⟨ω, [u]⟩ = kn / λ`, when the product is monotone.
    pub area_on_u: Option<RationalEntry>,
    /// `λ · area = chern_on_u`.
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TargetLevel {
    /// `c = ι*a` in kernel-basis coordinates.
    pub toric: Vec<RationalEntry>,
    /// One `k × k` block per factor.
    pub unitary: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InteriorData {
    pub point: Vec<RationalEntry>,
    pub min_slack: Option<RationalEntry>,
    pub unbounded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivedData {
    pub name: String,
    pub polytope_dim: usize,
    pub facets: usize,
    pub total_dim: usize,
    pub group_dim: usize,
    pub conormals: Vec<Vec<i64>>,
    pub offsets: Vec<RationalEntry>,
    pub kernel_basis: Vec<Vec<i64>>,
    pub kernel_saturated: bool,
    pub weight: Vec<i64>,
    pub sphere_weights: Vec<i64>,
    pub even: bool,
    pub parity_witness: Vec<usize>,
    pub minus_identity_in_torus: bool,
    /// Monotonicity constant of the toric factor alone.
    pub toric_lambda: Option<RationalEntry>,
    /// Monotonicity constant of the product, read off the central torus.
    pub lambda: Option<RationalEntry>,
    pub stage_level: Vec<RationalEntry>,
    pub target: TargetLevel,
    pub sphere_level: RationalEntry,
    pub reeb_period: f64,
    pub interior: InteriorData,
    pub factors: Vec<FactorData>,
}

/// `λ` with `c₁ = λ[ω]` for the whole product, from the central torus
/// `K × Π U(1)` and the offsets extended by `½` on every frame entry.
pub fn product_lambda(spec: &ReductionSpec) -> Option<Rational> {
    let lattice = KernelLattice::from_basis(spec.total_dim(), spec.stage.basis.clone());
    let mut a = spec.delzant.offsets.0.clone();
    a.resize(spec.total_dim(), Rational::new(1, 2));
    monotone_level_check(&lattice, &RationalVector(a)).ok()
}

pub fn factor_data(spec: &ReductionSpec) -> Vec<FactorData> {
    let lambda = product_lambda(spec);
    spec.factors
        .iter()
        .map(|f| {
            let kn = f.n * f.k;
            let area = lambda.map(|l| Rational::from_integer(kn as i64) / l);
            FactorData {
                n: f.n,
                k: f.k,
                quaternionic_dim: f.quaternionic_dim(),
                projective_minimal_chern: kn,
                grassmannian_minimal_chern: f.n,
                chern_on_u: f.k * f.n,
                area_on_u: area.as_ref().map(rat),
                consistent: matches!((lambda, area), (Some(l), Some(a)) if l * a == Rational::from_integer((f.k * f.n) as i64)),
            }
        })
        .collect()
}

pub fn derived_data(spec: &ReductionSpec) -> DerivedData {
    let d = &spec.delzant;
    let target = target_level(spec);
    DerivedData {
        name: spec.name.clone(),
        polytope_dim: spec.polytope.dim(),
        facets: spec.toric_len(),
        total_dim: spec.total_dim(),
        group_dim: spec.group_dim(),
        conormals: spec.polytope.normals.columns(),
        offsets: rats(&d.offsets.0),
        kernel_basis: d.kernel.basis().to_vec(),
        kernel_saturated: d.kernel.is_saturated(),
        weight: d.weight.0.clone(),
        sphere_weights: spec.gamma().to_vec(),
        even: d.even,
        parity_witness: d.parity_witness.clone(),
        minus_identity_in_torus: d.minus_identity_in_torus,
        toric_lambda: d.lambda.as_ref().map(rat),
        lambda: product_lambda(spec).as_ref().map(rat),
        stage_level: rats(&spec.stage.level),
        target: TargetLevel {
            toric: rats(&d.level.0),
            unitary: target
                .unitary
                .iter()
                .map(|m| {
                    (0..m.nrows())
                        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                        .collect()
                })
                .collect(),
        },
        sphere_level: rat(&spec.s1_level()),
        reeb_period: crate::contact::reeb_period(spec),
        interior: InteriorData {
            point: rats(&spec.interior.x.0),
            min_slack: spec.interior.min_slack().as_ref().map(rat),
            unbounded: spec.interior.unbounded,
        },
        factors: factor_data(spec),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub spec: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub samples: SampleCounts,
    pub derived: DerivedData,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
