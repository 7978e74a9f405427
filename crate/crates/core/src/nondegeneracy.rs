//! Degeneracy, general position and annihilator witnesses for a family of
//! one-dimensional projections `x -> v_j . x`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use itertools::Itertools;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, dot, LinalgError, SpanProjector};
use crate::poly::{Exponents, MultiPoly, PolyError, UniPoly, VarSet};
use crate::scalar::QuadScalar;

/// Variable name used for the univariate parts `p_j(t)`.
pub const PART_VAR: &str = "t";

/// Upper bound on the default witness pool.
pub const POOL_CAP: usize = 512;

/// Search nodes visited while building the default pool.
const POOL_SEARCH_BUDGET: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NondegError {
    #[error("a projection system needs at least 2 coordinates, got {0}")]
    TooFewCoordinates(usize),
    #[error("a projection system needs at least one vector")]
    NoVectors,
    #[error("f{index} has {got} components, expected {expected}")]
    VectorLength {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("f{0} is the zero vector")]
    ZeroVector(usize),
    #[error("phase has degree {degree}, above the degree bound {bound}")]
    DegreeBound { degree: u32, bound: u32 },
    #[error("operator direction {0} is zero")]
    ZeroDirection(usize),
    #[error("pool operator {index} ({operator}) does not annihilate f{factor}")]
    NotAnnihilating {
        index: usize,
        operator: String,
        factor: usize,
    },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Ambient coordinates plus the projection vectors `v_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionSystem {
    vars: VarSet,
    vectors: Vec<Vec<QuadScalar>>,
}

impl ProjectionSystem {
    pub fn new(vars: VarSet, vectors: Vec<Vec<QuadScalar>>) -> Result<Self, NondegError> {
        if vars.len() < 2 {
            return Err(NondegError::TooFewCoordinates(vars.len()));
        }
        if vectors.is_empty() {
            return Err(NondegError::NoVectors);
        }
        for (j, v) in vectors.iter().enumerate() {
            if v.len() != vars.len() {
                return Err(NondegError::VectorLength {
                    index: j + 1,
                    expected: vars.len(),
                    got: v.len(),
                });
            }
            if v.iter().all(Zero::is_zero) {
                return Err(NondegError::ZeroVector(j + 1));
            }
        }
        // shared radicand
        linalg::rank(&vectors)?;
        Ok(ProjectionSystem { vars, vectors })
    }

    /// The six light-cone directions `y+z, y-z, x+z, x-z, x+y+sqrt2 z, x+y-sqrt2 z`.
    pub fn light_cone() -> Self {
        let vars = VarSet::new(["x", "y", "z"]).unwrap();
        let i = QuadScalar::from_int;
        let r2 = QuadScalar::sqrt_of(2).unwrap();
        let vectors = vec![
            vec![i(0), i(1), i(1)],
            vec![i(0), i(1), i(-1)],
            vec![i(1), i(0), i(1)],
            vec![i(1), i(0), i(-1)],
            vec![i(1), i(1), r2.clone()],
            vec![i(1), i(1), -&r2],
        ];
        ProjectionSystem::new(vars, vectors).unwrap()
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    /// Ambient dimension `m`.
    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    /// Number of factors `n`.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<QuadScalar>] {
        &self.vectors
    }

    pub fn vector(&self, j: usize) -> &[QuadScalar] {
        &self.vectors[j]
    }

    /// The linear form `v_j . x` as a polynomial over `vars`.
    pub fn form(&self, j: usize) -> MultiPoly {
        MultiPoly::linear_form(&self.vars, &self.vectors[j]).unwrap()
    }

    /// Subsystem keeping the listed factors, in the given order.
    pub fn select(&self, keep: &[usize]) -> Result<Self, NondegError> {
        ProjectionSystem::new(
            self.vars.clone(),
            keep.iter().map(|&j| self.vectors[j].clone()).collect(),
        )
    }

    /// Drops factor `j`.
    pub fn without(&self, j: usize) -> Result<Self, NondegError> {
        let keep: Vec<usize> = (0..self.len()).filter(|&k| k != j).collect();
        self.select(&keep)
    }

    /// True when every vector satisfies `v1^2 + v2^2 = v3^2`.
    pub fn on_light_cone(&self) -> bool {
        self.dim() == 3
            && self.vectors.iter().all(|v| {
                (&(&v[0] * &v[0]) + &(&v[1] * &v[1])) == &v[2] * &v[2]
            })
    }

    /// Renders `v_j . x`, e.g. `x + y - sqrt(2)*z`.
    pub fn form_string(&self, j: usize) -> String {
        self.form(j).to_string()
    }
}

/// Every exponent vector of total degree at most `degree` in `nvars` variables.
#[derive(Debug, Clone)]
pub struct MonomialSpace {
    nvars: usize,
    degree: u32,
    monomials: Vec<Exponents>,
    index: HashMap<Exponents, usize>,
}

impl MonomialSpace {
    pub fn new(nvars: usize, degree: u32) -> Self {
        let mut monomials = Vec::new();
        for total in 0..=degree {
            let mut e = vec![0u32; nvars];
            compositions(&mut e, 0, total, &mut monomials);
        }
        let index = monomials
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        MonomialSpace {
            nvars,
            degree,
            monomials,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Exponents] {
        &self.monomials
    }

    /// Coefficient vector of `p`, whose variables must number `nvars`.
    pub fn vector(&self, p: &MultiPoly) -> Result<Vec<QuadScalar>, NondegError> {
        debug_assert_eq!(p.vars().len(), self.nvars);
        let mut v = vec![QuadScalar::zero(); self.len()];
        for (e, c) in p.terms() {
            match self.index.get(e) {
                Some(&i) => v[i] = c.clone(),
                None => {
                    return Err(NondegError::DegreeBound {
                        degree: p.total_degree().unwrap_or(0),
                        bound: self.degree,
                    })
                }
            }
        }
        Ok(v)
    }

    pub fn polynomial(&self, vars: &VarSet, v: &[QuadScalar]) -> MultiPoly {
        MultiPoly::from_terms(
            vars,
            self.monomials.iter().cloned().zip(v.iter().cloned()),
        )
    }
}

fn compositions(e: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<Exponents>) {
    if pos + 1 == e.len() {
        e[pos] = left;
        out.push(e.clone());
        e[pos] = 0;
        return;
    }
    if e.is_empty() {
        if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for k in (0..=left).rev() {
        e[pos] = k;
        compositions(e, pos + 1, left - k, out);
    }
    e[pos] = 0;
}

/// The span of `{1} u {(v_j . x)^k : 1 <= k <= d}` in coefficient space.
/// Columns: the constant, then for `k = 1..=d`, for `j = 1..=n`.
#[derive(Debug, Clone)]
pub struct DegenerateSpan {
    sys: ProjectionSystem,
    degree: u32,
    space: MonomialSpace,
    columns: Vec<Vec<QuadScalar>>,
}

impl DegenerateSpan {
    pub fn new(sys: &ProjectionSystem, degree: u32) -> Self {
        let space = MonomialSpace::new(sys.dim(), degree);
        let mut columns = vec![space
            .vector(&MultiPoly::one(sys.vars()))
            .expect("constant fits")];
        let forms: Vec<MultiPoly> = (0..sys.len()).map(|j| sys.form(j)).collect();
        let mut powers = forms.clone();
        for k in 1..=degree {
            for (j, f) in forms.iter().enumerate() {
                if k > 1 {
                    powers[j] = &powers[j] * f;
                }
                columns.push(space.vector(&powers[j]).expect("power fits"));
            }
        }
        DegenerateSpan {
            sys: sys.clone(),
            degree,
            space,
            columns,
        }
    }

    pub fn space(&self) -> &MonomialSpace {
        &self.space
    }

    pub fn columns(&self) -> &[Vec<QuadScalar>] {
        &self.columns
    }

    pub fn projector(&self) -> SpanProjector {
        SpanProjector::new(&self.columns, self.space.len()).expect("consistent columns")
    }

    /// Brings `p` onto the system's variables and checks the degree bound.
    pub fn vector_of(&self, p: &MultiPoly) -> Result<Vec<QuadScalar>, NondegError> {
        let p = p.embed(self.sys.vars())?;
        if let Some(deg) = p.total_degree() {
            if deg > self.degree {
                return Err(NondegError::DegreeBound {
                    degree: deg,
                    bound: self.degree,
                });
            }
        }
        self.space.vector(&p)
    }

    pub fn decompose(&self, p: &MultiPoly) -> Result<DegeneracyVerdict, NondegError> {
        let target = self.vector_of(p)?;
        match linalg::solve_membership(&target, &self.columns)? {
            Some(coeffs) => {
                let n = self.sys.len();
                let mut parts = vec![vec![QuadScalar::zero(); self.degree as usize + 1]; n];
                parts[0][0] = coeffs[0].clone();
                for (idx, c) in coeffs.iter().enumerate().skip(1) {
                    let k = (idx - 1) / n + 1;
                    let j = (idx - 1) % n;
                    parts[j][k] = c.clone();
                }
                let t = VarSet::new([PART_VAR]).unwrap();
                Ok(DegeneracyVerdict::Decomposition {
                    parts: parts
                        .into_iter()
                        .map(|cs| UniPoly::new(cs).to_multi(&t, 0))
                        .collect(),
                })
            }
            None => Ok(DegeneracyVerdict::Nondegenerate {
                distance_sq: linalg::residual_norm_sq(&target, &self.columns)?,
            }),
        }
    }
}

/// Outcome of the degeneracy decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DegeneracyVerdict {
    /// `P = sum_j p_j(v_j . x)`, with `p_j` univariate in `t`.
    Decomposition { parts: Vec<MultiPoly> },
    /// Squared coefficient distance from `P` to the degenerate span.
    Nondegenerate { distance_sq: QuadScalar },
}

impl DegeneracyVerdict {
    pub fn is_degenerate(&self) -> bool {
        matches!(self, DegeneracyVerdict::Decomposition { .. })
    }

    /// `sum_j p_j(v_j . x)` for a decomposition.
    pub fn reconstruct(&self, sys: &ProjectionSystem) -> Option<MultiPoly> {
        let DegeneracyVerdict::Decomposition { parts } = self else {
            return None;
        };
        let mut acc = MultiPoly::zero(sys.vars());
        for (j, p) in parts.iter().enumerate() {
            let (_, u) = UniPoly::from_multi(p).expect("univariate part");
            acc = &acc + &MultiPoly::compose(&u, &sys.form(j));
        }
        Some(acc)
    }
}

/// Decides whether `p` (degree at most `degree`) is a sum of polynomials in
/// the projections; the constant term goes to `p_1`.
pub fn degeneracy_decompose(
    p: &MultiPoly,
    sys: &ProjectionSystem,
    degree: u32,
) -> Result<DegeneracyVerdict, NondegError> {
    if let Some(deg) = p.total_degree() {
        if deg > degree {
            return Err(NondegError::DegreeBound { degree: deg, bound: degree });
        }
    }
    DegenerateSpan::new(sys, degree).decompose(p)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum GeneralPosition {
    Holds,
    /// 0-based indices of the first dependent subset found.
    Fails { subset: Vec<usize> },
}

impl GeneralPosition {
    pub fn holds(&self) -> bool {
        matches!(self, GeneralPosition::Holds)
    }
}

/// Formats 0-based factor indices as `{f1, f3}`.
pub fn factor_set(indices: &[usize]) -> String {
    format!(
        "{{{}}}",
        indices.iter().map(|i| format!("f{}", i + 1)).join(", ")
    )
}

/// Every subset of at most `m` vectors must be independent; subsets are
/// scanned by size, then lexicographically.
pub fn general_position(sys: &ProjectionSystem) -> GeneralPosition {
    for k in 1..=sys.dim().min(sys.len()) {
        for subset in (0..sys.len()).combinations(k) {
            let vs: Vec<Vec<QuadScalar>> =
                subset.iter().map(|&j| sys.vectors[j].clone()).collect();
            if linalg::rank(&vs).expect("validated system") < k {
                return GeneralPosition::Fails { subset };
            }
        }
    }
    GeneralPosition::Holds
}

/// Composition of first-order directional derivatives over named variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffOperator {
    vars: VarSet,
    directions: Vec<Vec<QuadScalar>>,
}

impl DiffOperator {
    pub fn new(vars: VarSet, directions: Vec<Vec<QuadScalar>>) -> Result<Self, NondegError> {
        for (k, u) in directions.iter().enumerate() {
            if u.len() != vars.len() {
                return Err(PolyError::DimensionMismatch {
                    expected: vars.len(),
                    got: u.len(),
                }
                .into());
            }
            if u.iter().all(Zero::is_zero) {
                return Err(NondegError::ZeroDirection(k + 1));
            }
        }
        Ok(DiffOperator { vars, directions })
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn directions(&self) -> &[Vec<QuadScalar>] {
        &self.directions
    }

    pub fn order(&self) -> usize {
        self.directions.len()
    }

    /// Applies every factor; `p` may carry extra variables (held fixed).
    pub fn apply(&self, p: &MultiPoly) -> Result<MultiPoly, NondegError> {
        let mut q = p.clone();
        for u in &self.directions {
            q = q.directional_derivative_named(&self.vars, u)?;
        }
        Ok(q)
    }

    /// First factor `j` (0-based) not killed by any direction.
    pub fn unannihilated_factor(&self, sys: &ProjectionSystem) -> Option<usize> {
        (0..sys.len()).find(|&j| {
            !self
                .directions
                .iter()
                .any(|u| dot(u, sys.vector(j)).is_zero())
        })
    }

    /// Re-expresses the directions over `target`, which must contain every
    /// variable with a nonzero component.
    pub fn embed(&self, target: &VarSet) -> Result<Self, NondegError> {
        let mut dirs = Vec::with_capacity(self.directions.len());
        for u in &self.directions {
            let mut w = vec![QuadScalar::zero(); target.len()];
            for (name, c) in self.vars.names().iter().zip(u) {
                match target.index_of(name) {
                    Some(i) => w[i] = c.clone(),
                    None if c.is_zero() => {}
                    None => return Err(PolyError::UnknownVariable(name.clone()).into()),
                }
            }
            dirs.push(w);
        }
        DiffOperator::new(target.clone(), dirs)
    }
}

impl fmt::Display for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = self.directions.iter().map(|u| {
            let form = MultiPoly::linear_form(&self.vars, u).unwrap();
            if form.num_terms() == 1 && form.terms().next().unwrap().1.is_one() {
                format!("∂{form}")
            } else {
                format!("∂({form})")
            }
        });
        write!(f, "{}", parts.format(" "))
    }
}

/// Scales `u` so that its first nonzero component is 1.
fn normalize(u: &[QuadScalar]) -> Option<Vec<QuadScalar>> {
    let lead = u.iter().find(|c| !c.is_zero())?;
    let inv = lead.inv().unwrap();
    Some(u.iter().map(|c| c * &inv).collect())
}

/// Directions orthogonal to `v_j`: coordinate axes, the other vectors with
/// their `v_j` component removed, coordinate axes projected off `v_j`, and
/// coordinate axes projected off `span(v_j, v_a)` (these kill two factors
/// at once). Normalized, deduplicated, in that order.
pub fn candidate_directions(sys: &ProjectionSystem, j: usize) -> Vec<Vec<QuadScalar>> {
    let vj = sys.vector(j);
    let m = sys.dim();
    let mut out: Vec<Vec<QuadScalar>> = Vec::new();
    let mut push = |u: Vec<QuadScalar>| {
        if let Some(u) = normalize(&u) {
            if !out.contains(&u) {
                out.push(u);
            }
        }
    };
    for i in 0..m {
        if vj[i].is_zero() {
            let mut e = vec![QuadScalar::zero(); m];
            e[i] = QuadScalar::one();
            push(e);
        }
    }
    let vv = dot(vj, vj);
    for a in (0..sys.len()).filter(|&a| a != j) {
        let va = sys.vector(a);
        let f = &dot(va, vj) / &vv;
        push(va.iter().zip(vj).map(|(x, y)| x - &(&f * y)).collect());
    }
    let axes: Vec<Vec<QuadScalar>> = (0..m)
        .map(|i| {
            let mut e = vec![QuadScalar::zero(); m];
            e[i] = QuadScalar::one();
            e
        })
        .collect();
    let off_j = SpanProjector::new(&[vj.to_vec()], m).expect("shared radicand");
    for e in &axes {
        push(off_j.residual_vector(e));
    }
    for a in (0..sys.len()).filter(|&a| a != j) {
        let pair = [vj.to_vec(), sys.vector(a).to_vec()];
        let off = SpanProjector::new(&pair, m).expect("shared radicand");
        if off.dim() < 2 {
            continue;
        }
        for e in &axes {
            push(off.residual_vector(e));
        }
    }
    out
}

/// Default witness pool. Products pick one candidate direction per factor;
/// a factor already killed by a chosen direction adds nothing, so operators
/// are sets of distinct directions. Sorted by order, then discovery, and
/// capped at [`POOL_CAP`].
pub fn default_pool(sys: &ProjectionSystem) -> Vec<DiffOperator> {
    let candidates: Vec<Vec<Vec<QuadScalar>>> =
        (0..sys.len()).map(|j| candidate_directions(sys, j)).collect();
    let mut found: Vec<Vec<Vec<QuadScalar>>> = Vec::new();
    let mut seen: BTreeSet<Vec<String>> = BTreeSet::new();
    let mut budget = POOL_SEARCH_BUDGET;
    for max_order in 1..=sys.len() {
        let mut chosen = Vec::new();
        search(
            sys,
            &candidates,
            0,
            max_order,
            &mut chosen,
            &mut found,
            &mut seen,
            &mut budget,
        );
        if found.len() >= POOL_CAP || budget == 0 {
            break;
        }
    }
    found.truncate(POOL_CAP);
    found
        .into_iter()
        .map(|dirs| DiffOperator::new(sys.vars().clone(), dirs).unwrap())
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn search(
    sys: &ProjectionSystem,
    candidates: &[Vec<Vec<QuadScalar>>],
    j: usize,
    max_order: usize,
    chosen: &mut Vec<Vec<QuadScalar>>,
    found: &mut Vec<Vec<Vec<QuadScalar>>>,
    seen: &mut BTreeSet<Vec<String>>,
    budget: &mut usize,
) {
    if found.len() >= POOL_CAP || *budget == 0 {
        return;
    }
    *budget -= 1;
    if j == sys.len() {
        if chosen.len() == max_order {
            let key: Vec<String> = chosen
                .iter()
                .map(|u| u.iter().map(|c| c.to_string()).join(","))
                .sorted()
                .collect();
            if seen.insert(key) {
                found.push(chosen.clone());
            }
        }
        return;
    }
    if chosen.iter().any(|u| dot(u, sys.vector(j)).is_zero()) {
        search(sys, candidates, j + 1, max_order, chosen, found, seen, budget);
        return;
    }
    if chosen.len() == max_order {
        return;
    }
    for u in &candidates[j] {
        chosen.push(u.clone());
        search(sys, candidates, j + 1, max_order, chosen, found, seen, budget);
        chosen.pop();
    }
}

/// A pool operator that does not kill the phase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// Position in the pool.
    pub index: usize,
    pub operator: DiffOperator,
    /// `D P`, nonzero.
    pub value: MultiPoly,
}

/// First pool operator `D` (by pool index) with `D P != 0`. Every operator
/// must annihilate each projection. `None` is inconclusive.
pub fn annihilator_witness(
    p: &MultiPoly,
    sys: &ProjectionSystem,
    pool: &[DiffOperator],
) -> Result<Option<Witness>, NondegError> {
    let pool: Vec<DiffOperator> = pool
        .iter()
        .map(|d| d.embed(sys.vars()))
        .collect::<Result<_, _>>()?;
    for (index, d) in pool.iter().enumerate() {
        if let Some(j) = d.unannihilated_factor(sys) {
            return Err(NondegError::NotAnnihilating {
                index,
                operator: d.to_string(),
                factor: j + 1,
            });
        }
    }
    let hit = pool
        .par_iter()
        .enumerate()
        .map(|(index, d)| d.apply(p).map(|value| (index, value)))
        .find_first(|r| r.as_ref().map_or(true, |(_, v)| !v.is_zero()));
    match hit {
        None => Ok(None),
        Some(r) => {
            let (index, value) = r?;
            Ok(Some(Witness {
                index,
                operator: pool[index].clone(),
                value,
            }))
        }
    }
}

/// Applicability of the CLTT L2 theorem: `n < 2m`, general position, and a
/// nondegenerate phase. All three are recorded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CltTCheck {
    pub n: usize,
    pub m: usize,
    pub count_ok: bool,
    pub general_position: GeneralPosition,
    pub degeneracy: DegeneracyVerdict,
    pub accepted: bool,
    /// The first failing condition.
    pub reason: Option<String>,
}

pub fn count_reason(n: usize, m: usize) -> String {
    format!("n < 2m fails: {n} ≮ {}", 2 * m)
}

pub fn cltt_l2_predicate(
    p: &MultiPoly,
    sys: &ProjectionSystem,
    degree: u32,
) -> Result<CltTCheck, NondegError> {
    let (n, m) = (sys.len(), sys.dim());
    let count_ok = n < 2 * m;
    let gp = general_position(sys);
    let degeneracy = degeneracy_decompose(p, sys, degree)?;
    let reason = if !count_ok {
        Some(count_reason(n, m))
    } else if let GeneralPosition::Fails { subset } = &gp {
        Some(format!("general position fails: {} is dependent", factor_set(subset)))
    } else if degeneracy.is_degenerate() {
        Some("phase is degenerate".to_string())
    } else {
        None
    };
    Ok(CltTCheck {
        n,
        m,
        count_ok,
        general_position: gp,
        degeneracy,
        accepted: reason.is_none(),
        reason,
    })
}
