//! Curvature invariants of orders 2, 4 and 6, evaluated two ways: by complete
//! traces of the frame tensors `R, ∇R, ∇²R, ric, ∇ric, ∇²ric` (the oracle),
//! and by closed formulas in trace invariants of `j`.
//!
//! Conventions: `Δ = −div grad`, so `⟨Δric,ric⟩ = −ric_ij ∇²_kk ric_ij` and
//! `⟨ΔR,R⟩ = −R_ijkl ∇²_pp R_ijkl`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liealg::{
    build_algebra, connection, covariant_derivative, curvature_tensor, ricci, ricci_from_curvature,
    ConnectionCoefficients, JMap, MetricLieAlgebra,
};
use crate::rational::Rational;
use crate::tensor::{einsum, FrameTensor};
use crate::traceinv::trace_invariant;

macro_rules! invariant_ids {
    ($($variant:ident => $name:literal, $order:literal;)*) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum InvariantId {
            $(#[serde(rename = $name)] $variant,)*
        }

        impl InvariantId {
            pub const ALL: &'static [InvariantId] = &[$(InvariantId::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(InvariantId::$variant => $name,)*
                }
            }

            /// Order in metric derivatives (2, 4 or 6).
            pub fn order(self) -> u32 {
                match self {
                    $(InvariantId::$variant => $order,)*
                }
            }
        }

        impl FromStr for InvariantId {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok(InvariantId::$variant),)*
                    _ => Err(Error::MissingInvariant(s.to_string())),
                }
            }
        }
    };
}

invariant_ids! {
    Scal => "scal", 2;
    Scal2 => "scal2", 4;
    Ric2 => "ric2", 4;
    R2 => "R2", 4;
    Scal3 => "scal3", 6;
    ScalRic2 => "scal_ric2", 6;
    ScalR2 => "scal_R2", 6;
    TrRic3 => "trRic3", 6;
    Star => "star", 6;
    StarStar => "starstar", 6;
    RHat => "Rhat", 6;
    RCirc => "Rcirc", 6;
    GradScal2 => "grad_scal2", 6;
    GradRic2 => "grad_ric2", 6;
    GradR2 => "grad_R2", 6;
    ThreeStar => "threestar", 6;
    ScalLapScal => "scal_lap_scal", 6;
    Lap2Scal => "lap2_scal", 6;
    LapRicRic => "lap_ric_ric", 6;
    HessScalRic => "hess_scal_ric", 6;
    LapRR => "lap_R_R", 6;
    A1 => "a1", 2;
    A2 => "a2", 4;
    A3 => "a3", 6;
}

impl fmt::Display for InvariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl InvariantId {
    /// Laplacian-type invariants, which need second covariant derivatives.
    pub fn is_laplacian_type(self) -> bool {
        matches!(
            self,
            InvariantId::ScalLapScal
                | InvariantId::Lap2Scal
                | InvariantId::LapRicRic
                | InvariantId::HessScalRic
                | InvariantId::LapRR
        )
    }

    pub fn is_heat_integrand(self) -> bool {
        matches!(self, InvariantId::A1 | InvariantId::A2 | InvariantId::A3)
    }

    /// The curvature invariants proper, without the heat integrands.
    pub fn curvature_invariants() -> impl Iterator<Item = InvariantId> {
        InvariantId::ALL.iter().copied().filter(|id| !id.is_heat_integrand())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Provenance {
    #[serde(rename = "tensor-oracle")]
    TensorOracle,
    #[serde(rename = "closed-form")]
    ClosedForm,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportEntry {
    pub value: Rational,
    pub provenance: BTreeSet<Provenance>,
}

/// Exact invariant values for one manifold. Values recorded under more than
/// one provenance must agree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct InvariantReport {
    pub manifold: String,
    pub values: BTreeMap<InvariantId, ReportEntry>,
    /// Invariants deliberately not computed, with the reason.
    pub omitted: BTreeMap<InvariantId, String>,
}

impl InvariantReport {
    pub fn new(manifold: impl Into<String>) -> Self {
        InvariantReport {
            manifold: manifold.into(),
            ..Default::default()
        }
    }

    pub fn insert(&mut self, id: InvariantId, value: Rational, provenance: Provenance) -> Result<()> {
        match self.values.get_mut(&id) {
            Some(entry) => {
                if entry.value != value {
                    return Err(Error::ConflictingValues {
                        id: id.to_string(),
                        first: entry.value.to_string(),
                        second: value.to_string(),
                    });
                }
                entry.provenance.insert(provenance);
            }
            None => {
                self.omitted.remove(&id);
                self.values.insert(
                    id,
                    ReportEntry {
                        value,
                        provenance: BTreeSet::from([provenance]),
                    },
                );
            }
        }
        Ok(())
    }

    /// Adds every entry of `other`, enforcing agreement on shared ids.
    pub fn merge(&mut self, other: &InvariantReport) -> Result<()> {
        for (&id, entry) in &other.values {
            for &p in &entry.provenance {
                self.insert(id, entry.value.clone(), p)?;
            }
        }
        for (&id, why) in &other.omitted {
            if !self.values.contains_key(&id) {
                self.omitted.insert(id, why.clone());
            }
        }
        Ok(())
    }

    pub fn get(&self, id: InvariantId) -> Option<&Rational> {
        self.values.get(&id).map(|e| &e.value)
    }

    pub fn require(&self, id: InvariantId) -> Result<&Rational> {
        self.get(id).ok_or_else(|| Error::MissingInvariant(id.to_string()))
    }

    pub fn contains(&self, id: InvariantId) -> bool {
        self.values.contains_key(&id)
    }

    pub fn ids(&self) -> impl Iterator<Item = InvariantId> + '_ {
        self.values.keys().copied()
    }
}

/// How the oracle treats Laplacian-type invariants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaplacianPolicy {
    /// Compute when the dimension is within the limit, otherwise omit.
    Auto,
    /// Never compute.
    Skip,
    /// Always compute; exceeding the limit is an error.
    Require,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleOptions {
    pub laplacian: LaplacianPolicy,
    /// Largest total dimension for which second covariant derivatives of
    /// the curvature tensor are built.
    pub max_laplacian_dim: usize,
}

pub const DEFAULT_MAX_LAPLACIAN_DIM: usize = 12;

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            laplacian: LaplacianPolicy::Auto,
            max_laplacian_dim: DEFAULT_MAX_LAPLACIAN_DIM,
        }
    }
}

impl OracleOptions {
    pub fn skip_laplacian() -> Self {
        OracleOptions {
            laplacian: LaplacianPolicy::Skip,
            ..Default::default()
        }
    }

    pub fn require_laplacian() -> Self {
        OracleOptions {
            laplacian: LaplacianPolicy::Require,
            ..Default::default()
        }
    }
}

/// Frame tensors of one algebra, built on first use and then shared.
pub struct TensorCache {
    alg: MetricLieAlgebra,
    conn: ConnectionCoefficients,
    curv: FrameTensor,
    ric: FrameTensor,
    d_curv: OnceLock<FrameTensor>,
    d_ric: OnceLock<FrameTensor>,
    dd_curv: OnceLock<FrameTensor>,
    dd_ric: OnceLock<FrameTensor>,
    hess_scal: OnceLock<FrameTensor>,
    dd_hess_scal: OnceLock<FrameTensor>,
}

impl TensorCache {
    /// Builds the connection, curvature (cross-checked between the block
    /// formulas and the connection) and Ricci tensor (cross-checked between
    /// its closed form and the trace of `R`).
    pub fn new(alg: MetricLieAlgebra) -> Result<Self> {
        let conn = connection(&alg);
        let curv = curvature_tensor(&alg)?;
        let ric = ricci_from_curvature(&curv)?;
        if ric != ricci(&alg) {
            return Err(Error::Consistency(
                "Ricci closed form disagrees with the trace of the curvature tensor".into(),
            ));
        }
        Ok(TensorCache {
            alg,
            conn,
            curv,
            ric,
            d_curv: OnceLock::new(),
            d_ric: OnceLock::new(),
            dd_curv: OnceLock::new(),
            dd_ric: OnceLock::new(),
            hess_scal: OnceLock::new(),
            dd_hess_scal: OnceLock::new(),
        })
    }

    pub fn for_jmap(j: &JMap) -> Result<Self> {
        Self::new(build_algebra(j))
    }

    pub fn algebra(&self) -> &MetricLieAlgebra {
        &self.alg
    }

    pub fn connection(&self) -> &ConnectionCoefficients {
        &self.conn
    }

    pub fn curvature(&self) -> &FrameTensor {
        &self.curv
    }

    pub fn ricci(&self) -> &FrameTensor {
        &self.ric
    }

    fn nabla(&self, t: &FrameTensor) -> FrameTensor {
        covariant_derivative(t, &self.conn).expect("tensor over the algebra's frame")
    }

    /// `∇R`, slot order `(A, B, C, D, E)` for `(∇_A R)(B, C, D, E)`.
    pub fn nabla_curvature(&self) -> &FrameTensor {
        self.d_curv.get_or_init(|| self.nabla(&self.curv))
    }

    pub fn nabla_ricci(&self) -> &FrameTensor {
        self.d_ric.get_or_init(|| self.nabla(&self.ric))
    }

    /// `∇²R = ∇(∇R)`.
    pub fn nabla2_curvature(&self) -> &FrameTensor {
        self.dd_curv.get_or_init(|| self.nabla(self.nabla_curvature()))
    }

    pub fn nabla2_ricci(&self) -> &FrameTensor {
        self.dd_ric.get_or_init(|| self.nabla(self.nabla_ricci()))
    }

    /// `∇_k ∇_l scal`, as the trace of `∇²ric` over its Ricci slots.
    pub fn hessian_scal(&self) -> &FrameTensor {
        self.hess_scal
            .get_or_init(|| self.nabla2_ricci().trace_slots(2, 3).expect("arity 4"))
    }

    fn nabla2_hessian_scal(&self) -> &FrameTensor {
        self.dd_hess_scal
            .get_or_init(|| self.nabla(&self.nabla(self.hessian_scal())))
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn eval(labels: &str, tensors: &[&FrameTensor]) -> Rational {
    einsum(labels, tensors).expect("labels match tensor arities")
}

/// Values of the requested oracle invariants, computed from the frame tensors.
/// Heat integrands are included whenever all their constituents are.
pub fn oracle_invariants_for(
    cache: &TensorCache,
    ids: &[InvariantId],
    options: &OracleOptions,
) -> Result<InvariantReport> {
    let dim = cache.algebra().dim();
    let mut report = InvariantReport::new("");
    let wanted: BTreeSet<InvariantId> = ids.iter().copied().collect();
    let laplacian_wanted = wanted.iter().any(|id| id.is_laplacian_type());
    let laplacian_ok = match options.laplacian {
        LaplacianPolicy::Skip => false,
        LaplacianPolicy::Auto => dim <= options.max_laplacian_dim,
        LaplacianPolicy::Require => {
            if laplacian_wanted && dim > options.max_laplacian_dim {
                return Err(Error::ResourceLimit(format!(
                    "Laplacian-type invariants need second covariant derivatives of R; dimension {dim} exceeds the limit {}",
                    options.max_laplacian_dim
                )));
            }
            true
        }
    };

    let ric = cache.ricci();
    let curv = cache.curvature();
    let scal = eval("ii", &[ric]);
    let mut memo: BTreeMap<InvariantId, Rational> = BTreeMap::new();

    let mut need: BTreeSet<InvariantId> = BTreeSet::new();
    for &id in &wanted {
        need.insert(id);
        need.extend(heat_constituents(id).iter().copied());
    }

    for &id in &need {
        if id.is_heat_integrand() {
            continue;
        }
        if id.is_laplacian_type() && !laplacian_ok {
            report.omitted.insert(
                id,
                match options.laplacian {
                    LaplacianPolicy::Skip => "skipped on request".to_string(),
                    _ => format!(
                        "dimension {dim} exceeds the limit {} for second covariant derivatives",
                        options.max_laplacian_dim
                    ),
                },
            );
            continue;
        }
        let value = match id {
            InvariantId::Scal => scal.clone(),
            InvariantId::Scal2 => scal.pow(2),
            InvariantId::Scal3 => scal.pow(3),
            InvariantId::Ric2 => eval("ij,ij", &[ric, ric]),
            InvariantId::R2 => eval("ijkl,ijkl", &[curv, curv]),
            InvariantId::ScalRic2 => &scal * eval("ij,ij", &[ric, ric]),
            InvariantId::ScalR2 => &scal * eval("ijkl,ijkl", &[curv, curv]),
            InvariantId::TrRic3 => eval("ij,jk,ki", &[ric, ric, ric]),
            InvariantId::Star => eval("ik,jl,ijkl", &[ric, ric, curv]),
            InvariantId::StarStar => eval("ij,ipqr,jpqr", &[ric, curv, curv]),
            InvariantId::RHat => eval("ijkl,klpq,pqij", &[curv, curv, curv]),
            InvariantId::RCirc => eval("ikjl,kplq,piqj", &[curv, curv, curv]),
            InvariantId::GradScal2 => {
                let d_scal = cache.nabla_ricci().trace_slots(1, 2)?;
                eval("i,i", &[&d_scal, &d_scal])
            }
            InvariantId::GradRic2 => {
                let d = cache.nabla_ricci();
                eval("ijk,ijk", &[d, d])
            }
            InvariantId::GradR2 => {
                let d = cache.nabla_curvature();
                eval("ijklm,ijklm", &[d, d])
            }
            // ∇_i ric_jk ∇_k ric_ij
            InvariantId::ThreeStar => {
                let d = cache.nabla_ricci();
                eval("ijk,kij", &[d, d])
            }
            InvariantId::ScalLapScal => -(&scal * eval("ii", &[cache.hessian_scal()])),
            // Δ²scal = ∇_p ∇_p ∇_k ∇_k scal
            InvariantId::Lap2Scal => eval("ppkk", &[cache.nabla2_hessian_scal()]),
            InvariantId::LapRicRic => -eval("ij,kkij", &[ric, cache.nabla2_ricci()]),
            InvariantId::HessScalRic => eval("ij,ij", &[cache.hessian_scal(), ric]),
            InvariantId::LapRR => -eval("ijkl,ppijkl", &[curv, cache.nabla2_curvature()]),
            InvariantId::A1 | InvariantId::A2 | InvariantId::A3 => unreachable!(),
        };
        memo.insert(id, value);
    }

    // scal is constant on a homogeneous space; its derivatives must vanish
    for id in [
        InvariantId::GradScal2,
        InvariantId::ScalLapScal,
        InvariantId::Lap2Scal,
        InvariantId::HessScalRic,
    ] {
        if let Some(v) = memo.get(&id) {
            if !v.is_zero() {
                return Err(Error::Consistency(format!(
                    "{id} = {v} although scal is constant"
                )));
            }
        }
    }

    for (&id, v) in &memo {
        if wanted.contains(&id) {
            report.insert(id, v.clone(), Provenance::TensorOracle)?;
        }
    }
    for &id in &wanted {
        if id.is_heat_integrand() && heat_constituents(id).iter().all(|c| memo.contains_key(c)) {
            let value = heat_integrand(id, |c| memo[&c].clone());
            report.insert(id, value, Provenance::TensorOracle)?;
        }
    }
    report.omitted.retain(|id, _| wanted.contains(id));
    Ok(report)
}

/// All invariants from the frame tensors, including the heat integrands.
pub fn oracle_invariants(alg: &MetricLieAlgebra, options: &OracleOptions) -> Result<InvariantReport> {
    let cache = TensorCache::new(alg.clone())?;
    oracle_invariants_for(&cache, InvariantId::ALL, options)
}

/// A closed formula `Σ coefficient · I_spec`.
#[derive(Clone, Copy, Debug)]
pub struct ClosedFormula {
    pub id: InvariantId,
    pub terms: &'static [(i64, i64, &'static str)],
}

impl ClosedFormula {
    pub fn evaluate(&self, j: &JMap) -> Rational {
        self.terms
            .iter()
            .map(|&(n, d, spec)| q(n, d) * trace_invariant(spec, j).expect("built-in spec"))
            .sum()
    }

    pub fn render(&self) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|&(n, d, spec)| format!("{} I_{spec}", q(n, d)))
            .collect();
        format!("{} = {}", self.id, parts.join(" + "))
    }
}

/// Closed formulas in trace invariants. The `star` formula carries the
/// `I_aabc|bc` term; without it the formula disagrees with the curvature
/// tensor on every example with `I_aabc|bc ≠ 0`.
pub const CLOSED_FORMULAS: &[ClosedFormula] = &[
    ClosedFormula {
        id: InvariantId::Scal,
        terms: &[(1, 4, "aa")],
    },
    ClosedFormula {
        id: InvariantId::Scal2,
        terms: &[(1, 16, "aa|bb")],
    },
    ClosedFormula {
        id: InvariantId::Ric2,
        terms: &[(1, 4, "aabb"), (1, 16, "ab|ab")],
    },
    ClosedFormula {
        id: InvariantId::R2,
        terms: &[(1, 2, "aabb"), (3, 8, "ab|ab"), (1, 8, "abab")],
    },
    ClosedFormula {
        id: InvariantId::TrRic3,
        terms: &[(1, 8, "aabbcc"), (-1, 64, "ac|bc|ab")],
    },
    ClosedFormula {
        id: InvariantId::Star,
        terms: &[(3, 16, "aabccb"), (1, 16, "aabc|bc")],
    },
    ClosedFormula {
        id: InvariantId::StarStar,
        terms: &[
            (1, 8, "aabccb"),
            (1, 8, "aabcbc"),
            (1, 8, "aabc|bc"),
            (1, 32, "acbc|ab"),
        ],
    },
    ClosedFormula {
        id: InvariantId::GradRic2,
        terms: &[
            (-1, 4, "aabbcc"),
            (1, 8, "aabccb"),
            (-1, 8, "aabc|bc"),
            (-1, 32, "ac|bc|ab"),
        ],
    },
];

/// The one-term formula `(*) = 3/16 I_aabccb` as usually quoted. It is kept
/// for reporting the discrepancy; it is not used to compute anything.
pub const UNCORRECTED_STAR_FORMULA: ClosedFormula = ClosedFormula {
    id: InvariantId::Star,
    terms: &[(3, 16, "aabccb")],
};

pub fn closed_formula(id: InvariantId) -> Option<&'static ClosedFormula> {
    CLOSED_FORMULAS.iter().find(|f| f.id == id)
}

/// Invariants with closed formulas, plus `a1` and `a2`.
pub fn closed_form_invariants(j: &JMap) -> InvariantReport {
    let mut report = InvariantReport::new("");
    for f in CLOSED_FORMULAS {
        report
            .insert(f.id, f.evaluate(j), Provenance::ClosedForm)
            .expect("distinct ids");
    }
    for id in [InvariantId::A1, InvariantId::A2] {
        let v = heat_integrand(id, |c| report.get(c).expect("closed form present").clone());
        report.insert(id, v, Provenance::ClosedForm).expect("distinct ids");
    }
    report
}

/// Constituents of a heat integrand (empty for other ids).
pub fn heat_constituents(id: InvariantId) -> &'static [InvariantId] {
    use InvariantId::*;
    match id {
        A1 => &[Scal],
        A2 => &[Scal2, Ric2, R2],
        A3 => &[
            GradScal2, GradRic2, GradR2, Scal3, ScalRic2, ScalR2, TrRic3, Star, StarStar, RHat,
        ],
        _ => &[],
    }
}

fn heat_integrand(id: InvariantId, v: impl Fn(InvariantId) -> Rational) -> Rational {
    use InvariantId::*;
    let lin = |terms: &[(i64, InvariantId)]| -> Rational {
        terms.iter().map(|&(c, i)| Rational::from_int(c) * v(i)).sum()
    };
    match id {
        A1 => v(Scal) * q(1, 6),
        A2 => lin(&[(5, Scal2), (-2, Ric2), (2, R2)]) * q(1, 360),
        A3 => {
            lin(&[
                (-142, GradScal2),
                (-26, GradRic2),
                (-7, GradR2),
                (35, Scal3),
                (-42, ScalRic2),
                (42, ScalR2),
                (-36, TrRic3),
                (20, Star),
                (-8, StarStar),
                (24, RHat),
            ]) * q(1, 45360)
        }
        _ => unreachable!("not a heat integrand"),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HeatIntegrands {
    pub a1: Rational,
    pub a2: Rational,
    pub a3: Rational,
}

/// `a1 = scal/6`, `a2 = (5scal² − 2|ric|² + 2|R|²)/360` and the ten-term
/// `a3` integrand, from the values in `report`.
pub fn heat_integrands(report: &InvariantReport) -> Result<HeatIntegrands> {
    for &id in [InvariantId::A1, InvariantId::A2, InvariantId::A3]
        .iter()
        .flat_map(|&a| heat_constituents(a))
    {
        report.require(id)?;
    }
    let v = |id| report.get(id).expect("checked").clone();
    Ok(HeatIntegrands {
        a1: heat_integrand(InvariantId::A1, v),
        a2: heat_integrand(InvariantId::A2, v),
        a3: heat_integrand(InvariantId::A3, v),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub id: String,
    pub status: CheckStatus,
    pub lhs: Option<Rational>,
    pub rhs: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl IdentityCheck {
    pub fn compare(id: impl Into<String>, lhs: Rational, rhs: Rational) -> Self {
        IdentityCheck {
            id: id.into(),
            status: if lhs == rhs { CheckStatus::Pass } else { CheckStatus::Fail },
            lhs: Some(lhs),
            rhs: Some(rhs),
            note: None,
        }
    }

    pub fn skipped(id: impl Into<String>, note: impl Into<String>) -> Self {
        IdentityCheck {
            id: id.into(),
            status: CheckStatus::Skipped,
            lhs: None,
            rhs: None,
            note: Some(note.into()),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Fail
    }
}

/// Linear combination `Σ c·id`, or the first missing id.
fn combine(report: &InvariantReport, terms: &[(Rational, InvariantId)]) -> std::result::Result<Rational, InvariantId> {
    let mut acc = Rational::zero();
    for (c, id) in terms {
        acc += c * report.get(*id).ok_or(*id)?;
    }
    Ok(acc)
}

/// Pointwise identities between oracle invariants that hold on every
/// locally homogeneous space, where `scal` is constant.
pub fn homogeneous_identities(oracle: &InvariantReport) -> Vec<IdentityCheck> {
    use InvariantId::*;
    let one = Rational::one;
    let quarter = || q(1, 4);
    let zero = || Vec::<(Rational, InvariantId)>::new();
    let rules: Vec<(&str, Vec<(Rational, InvariantId)>, Vec<(Rational, InvariantId)>)> = vec![
        (
            "threestar = grad_scal2/4 - trRic3 + star",
            vec![(one(), ThreeStar)],
            vec![(quarter(), GradScal2), (-one(), TrRic3), (one(), Star)],
        ),
        (
            "Rcirc = grad_scal2/4 - grad_ric2 + grad_R2/4 - trRic3 + star + starstar/2 - Rhat/4",
            vec![(one(), RCirc)],
            vec![
                (quarter(), GradScal2),
                (-one(), GradRic2),
                (quarter(), GradR2),
                (-one(), TrRic3),
                (one(), Star),
                (q(1, 2), StarStar),
                (-quarter(), RHat),
            ],
        ),
        ("lap_ric_ric = grad_ric2", vec![(one(), LapRicRic)], vec![(one(), GradRic2)]),
        ("lap_R_R = grad_R2", vec![(one(), LapRR)], vec![(one(), GradR2)]),
        ("grad_scal2 = 0", vec![(one(), GradScal2)], zero()),
        ("hess_scal_ric = 0", vec![(one(), HessScalRic)], zero()),
        ("scal_lap_scal = 0", vec![(one(), ScalLapScal)], zero()),
        ("lap2_scal = 0", vec![(one(), Lap2Scal)], zero()),
    ];
    rules
        .into_iter()
        .map(|(id, lhs, rhs)| match (combine(oracle, &lhs), combine(oracle, &rhs)) {
            (Ok(l), Ok(r)) => IdentityCheck::compare(id, l, r),
            (Err(missing), _) | (_, Err(missing)) => {
                let why = oracle
                    .omitted
                    .get(&missing)
                    .cloned()
                    .unwrap_or_else(|| "not computed".into());
                IdentityCheck::skipped(id, format!("{missing} unavailable: {why}"))
            }
        })
        .collect()
}

/// Closed formula versus oracle, one check per formula.
pub fn closed_form_checks(j: &JMap, oracle: &InvariantReport) -> Vec<IdentityCheck> {
    CLOSED_FORMULAS
        .iter()
        .map(|f| {
            let name = format!("closed form {}", f.render());
            match oracle.get(f.id) {
                Some(v) => IdentityCheck::compare(name, f.evaluate(j), v.clone()),
                None => IdentityCheck::skipped(name, format!("{} not computed", f.id)),
            }
        })
        .collect()
}

/// Every homogeneous identity and every closed formula, checked exactly.
pub fn verify_identities(alg: &MetricLieAlgebra, options: &OracleOptions) -> Result<Vec<IdentityCheck>> {
    let oracle = oracle_invariants(alg, options)?;
    let mut checks = homogeneous_identities(&oracle);
    checks.extend(closed_form_checks(alg.j(), &oracle));
    Ok(checks)
}

/// Per-invariant comparison of two reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantDelta {
    pub id: InvariantId,
    pub first: Rational,
    pub second: Rational,
    /// `first − second`.
    pub delta: Rational,
    pub differs: bool,
}

pub fn compare_reports(a: &InvariantReport, b: &InvariantReport) -> Vec<InvariantDelta> {
    a.values
        .iter()
        .filter_map(|(&id, ea)| {
            let eb = b.values.get(&id)?;
            let delta = &ea.value - &eb.value;
            Some(InvariantDelta {
                id,
                first: ea.value.clone(),
                second: eb.value.clone(),
                differs: !delta.is_zero(),
                delta,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;

    fn qi(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn ids_roundtrip() {
        for &id in InvariantId::ALL {
            assert_eq!(id.as_str().parse::<InvariantId>().unwrap(), id);
        }
        assert_eq!(InvariantId::ALL.len(), 24);
        assert!("nope".parse::<InvariantId>().is_err());
    }

    #[test]
    fn report_rejects_conflicts() {
        let mut r = InvariantReport::new("x");
        r.insert(InvariantId::Scal, qi(1), Provenance::TensorOracle).unwrap();
        r.insert(InvariantId::Scal, qi(1), Provenance::ClosedForm).unwrap();
        assert_eq!(r.values[&InvariantId::Scal].provenance.len(), 2);
        assert!(matches!(
            r.insert(InvariantId::Scal, qi(2), Provenance::ClosedForm),
            Err(Error::ConflictingValues { .. })
        ));
    }

    #[test]
    fn flat_everything_zero() {
        let alg = build_algebra(&JMap::zero(3, 2).unwrap());
        let rep = oracle_invariants(&alg, &OracleOptions::default()).unwrap();
        assert_eq!(rep.values.len(), InvariantId::ALL.len());
        assert!(rep.values.values().all(|e| e.value.is_zero()));
        let h = heat_integrands(&rep).unwrap();
        assert!(h.a1.is_zero() && h.a2.is_zero() && h.a3.is_zero());
        assert!(closed_form_invariants(alg.j()).values.values().all(|e| e.value.is_zero()));
        let checks = verify_identities(&alg, &OracleOptions::default()).unwrap();
        assert!(checks.iter().all(IdentityCheck::passed));
    }

    #[test]
    fn missing_constituent_is_an_error() {
        let mut r = InvariantReport::new("x");
        r.insert(InvariantId::Scal, qi(1), Provenance::ClosedForm).unwrap();
        assert!(matches!(heat_integrands(&r), Err(Error::MissingInvariant(_))));
    }

    #[test]
    fn laplacian_policy() {
        let j = JMap::new(2, vec![Mat::from_i64_rows(&[&[0, -1], &[1, 0]])]).unwrap();
        let alg = build_algebra(&j);
        let tight = OracleOptions {
            laplacian: LaplacianPolicy::Require,
            max_laplacian_dim: 2,
        };
        assert!(matches!(oracle_invariants(&alg, &tight), Err(Error::ResourceLimit(_))));
        let auto = OracleOptions {
            laplacian: LaplacianPolicy::Auto,
            max_laplacian_dim: 2,
        };
        let rep = oracle_invariants(&alg, &auto).unwrap();
        assert!(!rep.contains(InvariantId::LapRR));
        assert!(rep.omitted.contains_key(&InvariantId::LapRR));
        assert!(rep.contains(InvariantId::A3));
        let skip = oracle_invariants(&alg, &OracleOptions::skip_laplacian()).unwrap();
        assert_eq!(skip.omitted.len(), 5);
    }

    #[test]
    fn three_dimensional_heisenberg_values() {
        // [X1,X2] = Z: scal = -1/2, |ric|² = 3/4, |R|² = 11/4 for the unit
        // Heisenberg group, with ric = diag(-1/2,-1/2,1/2)
        let j = JMap::new(2, vec![Mat::from_i64_rows(&[&[0, -1], &[1, 0]])]).unwrap();
        let rep = oracle_invariants(&build_algebra(&j), &OracleOptions::default()).unwrap();
        assert_eq!(rep.get(InvariantId::Scal).unwrap(), &Rational::new(-1, 2));
        assert_eq!(rep.get(InvariantId::Ric2).unwrap(), &Rational::new(3, 4));
        assert_eq!(rep.get(InvariantId::R2).unwrap(), &Rational::new(11, 4));
        let closed = closed_form_invariants(&j);
        for f in CLOSED_FORMULAS {
            assert_eq!(closed.get(f.id), rep.get(f.id), "{}", f.id);
        }
    }
}
