//! Decay-certificate routes for a multilinear oscillatory functional, and
//! their ranking by how many factors carry an `L^2` norm.

use std::cmp::Reverse;
use std::fmt;

use itertools::Itertools;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nondegeneracy::{
    annihilator_witness, cltt_l2_predicate, default_pool, factor_set, general_position, CltTCheck,
    DiffOperator, GeneralPosition, NondegError, ProjectionSystem, Witness,
};
use crate::poly::{MultiPoly, PolyError, RootDomain, VarSet};
use crate::quadrature::CutoffSpec;
use crate::scalar::QuadScalar;
use crate::uniformity::{
    difference_phase, difference_phase_check, hyp_check, uniform_residual_positive, wave_operator,
    UniformityError, UniformityStatus, UniformityVerdict,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("cannot freeze {size} of {dim} coordinates: at most {max} (two must stay free)")]
    FreezeTooLarge { size: usize, dim: usize, max: usize },
    #[error("unknown coordinate {0}")]
    UnknownCoordinate(String),
    #[error("coordinate {0} listed twice")]
    DuplicateCoordinate(String),
    #[error("pivot f{pivot} out of range (n = {n})")]
    PivotOutOfRange { pivot: usize, n: usize },
    #[error("phase has degree {degree}, above the degree bound {bound}")]
    DegreeBound { degree: u32, bound: u32 },
    #[error(transparent)]
    Nondeg(#[from] NondegError),
    #[error(transparent)]
    Uniformity(#[from] UniformityError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// The data a certificate speaks about: projections, phase, degree bound
/// and the cutoff used for numerics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Functional {
    sys: ProjectionSystem,
    phase: MultiPoly,
    degree: u32,
    cutoff: CutoffSpec,
}

impl Functional {
    pub fn new(sys: ProjectionSystem, phase: &MultiPoly, degree: u32) -> Result<Self, StrategyError> {
        let phase = phase.embed(sys.vars())?;
        if let Some(deg) = phase.total_degree() {
            if deg > degree {
                return Err(StrategyError::DegreeBound { degree: deg, bound: degree });
            }
        }
        let cutoff = CutoffSpec::unit_bump(sys.dim());
        Ok(Functional {
            sys,
            phase,
            degree,
            cutoff,
        })
    }

    pub fn with_cutoff(mut self, cutoff: CutoffSpec) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn sys(&self) -> &ProjectionSystem {
        &self.sys
    }

    pub fn phase(&self) -> &MultiPoly {
        &self.phase
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn cutoff(&self) -> &CutoffSpec {
        &self.cutoff
    }

    /// Same functional with a different phase.
    pub fn with_phase(&self, phase: &MultiPoly) -> Result<Self, StrategyError> {
        Ok(Functional::new(self.sys.clone(), phase, self.degree)?.with_cutoff(self.cutoff.clone()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Norm {
    L2,
    Linf,
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::L2 => "2",
            Norm::Linf => "∞",
        })
    }
}

/// `(2,∞,2,∞,2,∞)`.
pub fn norms_string(norms: &[Norm]) -> String {
    format!("({})", norms.iter().join(","))
}

/// `n < 2m` for the inner application of the L2 theorem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountCheck {
    pub n: usize,
    pub m: usize,
    pub ok: bool,
}

impl CountCheck {
    pub fn new(n: usize, m: usize) -> Self {
        CountCheck { n, m, ok: n < 2 * m }
    }

    pub fn reason(&self) -> String {
        format!("count: {} ≮ {}", self.n, 2 * self.m)
    }
}

/// A hypothesis-style witness: an operator on the free block whose image
/// stays uniformly away from zero over the frozen coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypWitness {
    pub operator: DiffOperator,
    pub verdict: UniformityVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreezeAnalysis {
    pub frozen: Vec<String>,
    pub reduced_vars: VarSet,
    /// Factors grouped by parallel free parts, ordered by lowest index.
    pub groups: Vec<Vec<usize>>,
    /// Factors whose free part is zero.
    pub passthrough: Vec<usize>,
    /// Free part of each group's lowest-index member.
    pub representatives: Vec<Vec<QuadScalar>>,
    pub count: CountCheck,
    /// Subsets refer to group positions.
    pub general_position: GeneralPosition,
    pub uniformity: Option<UniformityVerdict>,
    pub hyp_witness: Option<HypWitness>,
    pub accepted: bool,
    pub reasons: Vec<String>,
}

impl FreezeAnalysis {
    /// One `L^2` per group (its lowest index), `L^inf` elsewhere.
    pub fn norms(&self, n: usize) -> Vec<Norm> {
        let mut norms = vec![Norm::Linf; n];
        for g in &self.groups {
            norms[g[0]] = Norm::L2;
        }
        norms
    }

    pub fn reduced_system(&self) -> Result<ProjectionSystem, NondegError> {
        ProjectionSystem::new(self.reduced_vars.clone(), self.representatives.clone())
    }

    pub fn groups_string(&self) -> String {
        self.groups.iter().map(|g| factor_set(g)).join(", ")
    }
}

fn normalize(u: &[QuadScalar]) -> Option<Vec<QuadScalar>> {
    let lead = u.iter().find(|c| !c.is_zero())?;
    let inv = lead.inv().unwrap();
    Some(u.iter().map(|c| c * &inv).collect())
}

fn check_frozen(sys: &ProjectionSystem, frozen: &[String]) -> Result<(), StrategyError> {
    for (k, name) in frozen.iter().enumerate() {
        if !sys.vars().contains(name) {
            return Err(StrategyError::UnknownCoordinate(name.clone()));
        }
        if frozen[..k].contains(name) {
            return Err(StrategyError::DuplicateCoordinate(name.clone()));
        }
    }
    let max = sys.dim() - 2;
    if frozen.len() > max {
        return Err(StrategyError::FreezeTooLarge {
            size: frozen.len(),
            dim: sys.dim(),
            max,
        });
    }
    Ok(())
}

fn uniformity_reason(v: &UniformityVerdict) -> Option<String> {
    match &v.status {
        UniformityStatus::Positive => None,
        UniformityStatus::IdenticallyZero => Some("reduced phase degenerate".to_string()),
        UniformityStatus::VanishesAt {
            parameter,
            exact_root,
            enclosure,
            ..
        } => Some(match exact_root {
            Some(r) => format!("uniformity vanishes at {parameter} = {r}"),
            None => format!(
                "uniformity vanishes at some {parameter} in ({}, {}]",
                enclosure.0, enclosure.1
            ),
        }),
        UniformityStatus::UndecidedMultiparameter => {
            Some("uniformity undecided (several frozen coordinates)".to_string())
        }
    }
}

/// Freezes the coordinates in `frozen` and checks the sliced problem: group
/// count, general position of the group representatives, and uniform
/// nondegeneracy of the phase over the frozen values.
pub fn analyze_freezing(fun: &Functional, frozen: &[String]) -> Result<FreezeAnalysis, StrategyError> {
    let sys = fun.sys();
    check_frozen(sys, frozen)?;
    let free_idx: Vec<usize> = (0..sys.dim())
        .filter(|&i| !frozen.iter().any(|n| n == sys.vars().name(i)))
        .collect();
    let reduced_vars = sys.vars().without(frozen);

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut keys: Vec<Vec<QuadScalar>> = Vec::new();
    let mut passthrough = Vec::new();
    for j in 0..sys.len() {
        let part: Vec<QuadScalar> = free_idx.iter().map(|&i| sys.vector(j)[i].clone()).collect();
        match normalize(&part) {
            None => passthrough.push(j),
            Some(key) => match keys.iter().position(|k| *k == key) {
                Some(g) => groups[g].push(j),
                None => {
                    keys.push(key);
                    groups.push(vec![j]);
                }
            },
        }
    }
    let representatives: Vec<Vec<QuadScalar>> = groups
        .iter()
        .map(|g| free_idx.iter().map(|&i| sys.vector(g[0])[i].clone()).collect())
        .collect();
    let count = CountCheck::new(groups.len(), free_idx.len());
    let mut reasons = Vec::new();
    if !count.ok {
        reasons.push(count.reason());
    }
    if groups.is_empty() {
        reasons.push("no factor depends on the free coordinates".to_string());
        return Ok(FreezeAnalysis {
            frozen: frozen.to_vec(),
            reduced_vars,
            groups,
            passthrough,
            representatives,
            count,
            general_position: GeneralPosition::Holds,
            uniformity: None,
            hyp_witness: None,
            accepted: false,
            reasons,
        });
    }
    let reduced = ProjectionSystem::new(reduced_vars.clone(), representatives.clone())?;
    let gp = general_position(&reduced);
    if let GeneralPosition::Fails { subset } = &gp {
        let factors: Vec<usize> = subset.iter().map(|&g| groups[g][0]).collect();
        reasons.push(format!("general position: {} dependent", factor_set(&factors)));
    }
    let uniformity = uniform_residual_positive(
        fun.phase(),
        frozen,
        &reduced,
        fun.degree(),
        RootDomain::AllReals,
    )?;
    // witness search only when the other checks leave acceptance open
    let hyp_witness = if count.ok && gp.holds() && uniformity.status != UniformityStatus::IdenticallyZero {
        find_hyp_witness(fun, frozen, &reduced)?
    } else {
        None
    };
    let uniform_ok = uniformity.is_positive()
        || (uniformity.status == UniformityStatus::UndecidedMultiparameter && hyp_witness.is_some());
    if !uniform_ok {
        reasons.extend(uniformity_reason(&uniformity));
    }
    Ok(FreezeAnalysis {
        frozen: frozen.to_vec(),
        reduced_vars,
        groups,
        passthrough,
        representatives,
        count,
        general_position: gp,
        uniformity: Some(uniformity),
        hyp_witness,
        accepted: reasons.is_empty(),
        reasons,
    })
}

/// First operator of the reduced system's default pool, lifted with zero
/// components on the frozen coordinates, whose hypothesis check is positive.
pub fn find_hyp_witness(
    fun: &Functional,
    frozen: &[String],
    reduced: &ProjectionSystem,
) -> Result<Option<HypWitness>, StrategyError> {
    let pool: Vec<DiffOperator> = default_pool(reduced)
        .iter()
        .map(|d| d.embed(fun.sys().vars()))
        .collect::<Result<_, _>>()?;
    let found = pool
        .par_iter()
        .map(|d| hyp_check(fun.phase(), frozen, d).map(|v| (d, v)))
        .find_first(|r| r.as_ref().map_or(true, |(_, v)| v.is_positive()));
    match found {
        None => Ok(None),
        Some(r) => {
            let (d, verdict) = r?;
            Ok(Some(HypWitness {
                operator: d.clone(),
                verdict,
            }))
        }
    }
}

/// Evidence for the Cauchy-Schwarz route: the pivot factor is pulled out,
/// the rest is squared, and the difference phase in `direction` must be
/// uniformly nondegenerate for the remaining projections away from zero
/// shift. The split point is `rho = |lambda|^(-1/2)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CauchySchwarzEvidence {
    pub pivot: usize,
    pub direction: String,
    /// The second factor carrying `L^2`: lowest index other than the pivot.
    pub partner: usize,
    pub difference_phase: MultiPoly,
    pub count: CountCheck,
    pub general_position: GeneralPosition,
    pub verdict: UniformityVerdict,
    /// Wave operator applied to the difference phase, when every remaining
    /// vector lies on the light cone (it kills every degenerate part).
    pub wave: Option<MultiPoly>,
    /// Default-pool operator killing the remaining projections but not the
    /// difference phase.
    pub witness: Option<Witness>,
    pub split: String,
}

/// Annihilator route; only as strong as the CLTT L-infinity theorem's
/// hypothesis, which is not decided here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnihilatorEvidence {
    pub witness: Witness,
    pub conditional: String,
}

pub const LINF_CONDITION: &str =
    "conditional on the simple-nondegeneracy hypothesis of CLTT Theorem 2.3";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "route", rename_all = "kebab-case")]
pub enum Route {
    DirectL2(CltTCheck),
    Grouped(FreezeAnalysis),
    CauchySchwarz(CauchySchwarzEvidence),
    AnnihilatorLinf(AnnihilatorEvidence),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecayCertificate {
    pub key: String,
    pub norms: Vec<Norm>,
    pub route: Route,
}

impl DecayCertificate {
    pub fn l2_count(&self) -> usize {
        self.norms.iter().filter(|n| **n == Norm::L2).count()
    }

    pub fn frozen_count(&self) -> usize {
        match &self.route {
            Route::Grouped(a) => a.frozen.len(),
            _ => 0,
        }
    }

    /// Sort key: more `L^2` norms first, then fewer frozen coordinates,
    /// then route key.
    pub fn rank_key(&self) -> (Reverse<usize>, usize, String) {
        (Reverse(self.l2_count()), self.frozen_count(), self.key.clone())
    }

    pub fn route_name(&self) -> &'static str {
        match self.route {
            Route::DirectL2(_) => "direct-l2",
            Route::Grouped(_) => "grouped",
            Route::CauchySchwarz(_) => "cauchy-schwarz",
            Route::AnnihilatorLinf(_) => "annihilator-linf",
        }
    }
}

pub fn direct_key() -> String {
    "direct-l2".to_string()
}

pub fn grouped_key(frozen: &[String]) -> String {
    format!("grouped:{}", frozen.join(","))
}

pub fn cauchy_schwarz_key(pivot: usize, direction: &str) -> String {
    format!("cauchy-schwarz:pivot=f{}:dir={direction}", pivot + 1)
}

pub fn annihilator_key() -> String {
    "annihilator-linf".to_string()
}

/// A route that was tried and did not produce a certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub key: String,
    pub reason: String,
}

pub type RouteResult = Result<DecayCertificate, Rejection>;

pub fn direct_certificate(fun: &Functional) -> Result<RouteResult, StrategyError> {
    let check = cltt_l2_predicate(fun.phase(), fun.sys(), fun.degree())?;
    if !check.accepted {
        return Ok(Err(Rejection {
            key: direct_key(),
            reason: check.reason.clone().unwrap_or_default(),
        }));
    }
    Ok(Ok(DecayCertificate {
        key: direct_key(),
        norms: vec![Norm::L2; fun.sys().len()],
        route: Route::DirectL2(check),
    }))
}

pub fn grouped_certificate(fun: &Functional, frozen: &[String]) -> Result<RouteResult, StrategyError> {
    let analysis = analyze_freezing(fun, frozen)?;
    let key = grouped_key(frozen);
    if !analysis.accepted {
        return Ok(Err(Rejection {
            key,
            reason: analysis.reasons.join("; "),
        }));
    }
    Ok(Ok(DecayCertificate {
        key,
        norms: analysis.norms(fun.sys().len()),
        route: Route::Grouped(analysis),
    }))
}

/// Pulls out factor `pivot` (which must not depend on `direction`) and
/// applies Cauchy-Schwarz in `direction`.
pub fn cauchy_schwarz_certificate(
    fun: &Functional,
    pivot: usize,
    direction: &str,
) -> Result<RouteResult, StrategyError> {
    let sys = fun.sys();
    if pivot >= sys.len() {
        return Err(StrategyError::PivotOutOfRange {
            pivot: pivot + 1,
            n: sys.len(),
        });
    }
    let dir = sys
        .vars()
        .index_of(direction)
        .ok_or_else(|| StrategyError::UnknownCoordinate(direction.to_string()))?;
    let key = cauchy_schwarz_key(pivot, direction);
    let reject = |reason: String| Ok(Err(Rejection { key: key.clone(), reason }));
    if !sys.vector(pivot)[dir].is_zero() {
        return reject(format!("pivot f{} depends on {direction}", pivot + 1));
    }
    if sys.len() < 2 {
        return reject("no factor left after the pivot".to_string());
    }
    let remaining = sys.without(pivot)?;
    let count = CountCheck::new(remaining.len(), remaining.dim());
    let gp = general_position(&remaining);
    let verdict = difference_phase_check(fun.phase(), direction, &remaining, fun.degree())?;
    let mut reasons = Vec::new();
    if !count.ok {
        reasons.push(count.reason());
    }
    if let GeneralPosition::Fails { subset } = &gp {
        let factors: Vec<usize> = subset
            .iter()
            .map(|&k| if k >= pivot { k + 1 } else { k })
            .collect();
        reasons.push(format!("general position: {} dependent", factor_set(&factors)));
    }
    match &verdict.status {
        UniformityStatus::Positive => {}
        UniformityStatus::IdenticallyZero => {
            reasons.push("difference phase degenerate for every shift".to_string())
        }
        UniformityStatus::VanishesAt { .. } => {
            reasons.push("difference phase degenerate at some shift with |zeta| >= 1".to_string())
        }
        UniformityStatus::UndecidedMultiparameter => {
            reasons.push("difference phase undecided".to_string())
        }
    }
    if !reasons.is_empty() {
        return reject(reasons.join("; "));
    }
    let shifted = difference_phase(fun.phase(), direction, sys.vars())?;
    let wave = if remaining.on_light_cone() {
        Some(wave_operator(&shifted, sys.vars())?)
    } else {
        None
    };
    let witness = annihilator_witness(&shifted, &remaining, &default_pool(&remaining))?;
    let partner = if pivot == 0 { 1 } else { 0 };
    let mut norms = vec![Norm::Linf; sys.len()];
    norms[pivot] = Norm::L2;
    norms[partner] = Norm::L2;
    Ok(Ok(DecayCertificate {
        key,
        norms,
        route: Route::CauchySchwarz(CauchySchwarzEvidence {
            pivot,
            direction: direction.to_string(),
            partner,
            difference_phase: shifted,
            count,
            general_position: gp,
            verdict,
            wave,
            witness,
            split: "rho = |lambda|^(-1/2)".to_string(),
        }),
    }))
}

pub fn annihilator_certificate(
    fun: &Functional,
    pool: &[DiffOperator],
) -> Result<RouteResult, StrategyError> {
    match annihilator_witness(fun.phase(), fun.sys(), pool)? {
        None => Ok(Err(Rejection {
            key: annihilator_key(),
            reason: "no witness in the default pool (inconclusive)".to_string(),
        })),
        Some(witness) => Ok(Ok(DecayCertificate {
            key: annihilator_key(),
            norms: vec![Norm::Linf; fun.sys().len()],
            route: Route::AnnihilatorLinf(AnnihilatorEvidence {
                witness,
                conditional: LINF_CONDITION.to_string(),
            }),
        })),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyOutcome {
    /// Best first.
    pub certificates: Vec<DecayCertificate>,
    /// In the order the routes were tried.
    pub rejections: Vec<Rejection>,
}

#[derive(Debug, Clone)]
enum Attempt {
    Direct,
    Freeze(Vec<String>),
    CauchySchwarz(usize, String),
    Annihilator,
}

/// Tries every route and ranks the certificates. An empty list means no
/// certificate was found, not that the functional fails to decay.
pub fn enumerate_strategies(fun: &Functional, max_freeze: usize) -> Result<StrategyOutcome, StrategyError> {
    let sys = fun.sys();
    let max = sys.dim() - 2;
    if max_freeze > max {
        return Err(StrategyError::FreezeTooLarge {
            size: max_freeze,
            dim: sys.dim(),
            max,
        });
    }
    let mut attempts = vec![Attempt::Direct];
    for k in 1..=max_freeze {
        for s in sys.vars().names().iter().cloned().combinations(k) {
            attempts.push(Attempt::Freeze(s));
        }
    }
    for pivot in 0..sys.len() {
        for (i, name) in sys.vars().names().iter().enumerate() {
            if sys.vector(pivot)[i].is_zero() {
                attempts.push(Attempt::CauchySchwarz(pivot, name.clone()));
            }
        }
    }
    attempts.push(Attempt::Annihilator);

    let results: Vec<RouteResult> = attempts
        .par_iter()
        .map(|a| match a {
            Attempt::Direct => direct_certificate(fun),
            Attempt::Freeze(s) => grouped_certificate(fun, s),
            Attempt::CauchySchwarz(p, d) => cauchy_schwarz_certificate(fun, *p, d),
            Attempt::Annihilator => annihilator_certificate(fun, &default_pool(sys)),
        })
        .collect::<Result<_, _>>()?;
    let mut certificates = Vec::new();
    let mut rejections = Vec::new();
    for r in results {
        match r {
            Ok(c) => certificates.push(c),
            Err(r) => rejections.push(r),
        }
    }
    certificates.sort_by_key(DecayCertificate::rank_key);
    Ok(StrategyOutcome {
        certificates,
        rejections,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", content = "reason", rename_all = "kebab-case")]
pub enum Validation {
    Pass,
    Fail(String),
}

impl Validation {
    pub fn passed(&self) -> bool {
        matches!(self, Validation::Pass)
    }
}

/// Re-derives every check a certificate relies on.
pub fn validate_certificate(cert: &DecayCertificate, fun: &Functional) -> Validation {
    match validate_inner(cert, fun) {
        Ok(()) => Validation::Pass,
        Err(reason) => Validation::Fail(reason),
    }
}

fn validate_inner(cert: &DecayCertificate, fun: &Functional) -> Result<(), String> {
    let n = fun.sys().len();
    if cert.norms.len() != n {
        return Err(format!("norm list has {} entries for {n} factors", cert.norms.len()));
    }
    let err = |e: StrategyError| format!("recomputation failed: {e}");
    let expected_key = match &cert.route {
        Route::DirectL2(_) => direct_key(),
        Route::Grouped(a) => grouped_key(&a.frozen),
        Route::CauchySchwarz(e) => cauchy_schwarz_key(e.pivot, &e.direction),
        Route::AnnihilatorLinf(_) => annihilator_key(),
    };
    if cert.key != expected_key {
        return Err(format!("route key {} does not match its route", cert.key));
    }
    match &cert.route {
        Route::DirectL2(check) => {
            let fresh = cltt_l2_predicate(fun.phase(), fun.sys(), fun.degree())
                .map_err(|e| err(e.into()))?;
            if !fresh.accepted {
                return Err(fresh.reason.unwrap_or_default());
            }
            if cert.norms.iter().any(|n| *n != Norm::L2) {
                return Err("direct route assigns L2 to every factor".to_string());
            }
            if *check != fresh {
                return Err("evidence mismatch".to_string());
            }
        }
        Route::Grouped(recorded) => {
            let fresh = analyze_freezing(fun, &recorded.frozen).map_err(err)?;
            for g in &fresh.groups {
                let l2 = g.iter().filter(|&&j| cert.norms[j] == Norm::L2).count();
                if l2 != 1 {
                    return Err(format!("group norm rule: {} carries {l2} L2 norms", factor_set(g)));
                }
            }
            if let Some(&j) = fresh.passthrough.iter().find(|&&j| cert.norms[j] == Norm::L2) {
                return Err(format!("group norm rule: f{} has no free part", j + 1));
            }
            if !fresh.accepted {
                if let Some(u) = &fresh.uniformity {
                    if u.status == UniformityStatus::IdenticallyZero {
                        return Err("uniformity identically-zero".to_string());
                    }
                }
                return Err(fresh.reasons.join("; "));
            }
            if *recorded != fresh {
                return Err("evidence mismatch".to_string());
            }
        }
        Route::CauchySchwarz(e) => {
            match cauchy_schwarz_certificate(fun, e.pivot, &e.direction).map_err(err)? {
                Err(r) => return Err(r.reason),
                Ok(fresh) => {
                    if fresh.norms != cert.norms {
                        return Err(format!(
                            "norms {} differ from {}",
                            norms_string(&cert.norms),
                            norms_string(&fresh.norms)
                        ));
                    }
                    if fresh.route != cert.route {
                        return Err("evidence mismatch".to_string());
                    }
                }
            }
        }
        Route::AnnihilatorLinf(e) => {
            let d = &e.witness.operator;
            if let Some(j) = d.unannihilated_factor(fun.sys()) {
                return Err(format!("operator {d} does not annihilate f{}", j + 1));
            }
            let value = d.apply(fun.phase()).map_err(|e| err(e.into()))?;
            if value.is_zero() {
                return Err(format!("operator {d} kills the phase"));
            }
            if value != e.witness.value {
                return Err("evidence mismatch".to_string());
            }
            if cert.norms.iter().any(|n| *n != Norm::Linf) {
                return Err("annihilator route assigns L-infinity to every factor".to_string());
            }
        }
    }
    Ok(())
}
