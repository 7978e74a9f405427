//! Nondegeneracy that holds uniformly in real parameters.
//!
//! Every check reduces to a finite family of polynomials `q_a` in the
//! parameters: the condition holds at a parameter value exactly when some
//! `q_a` is nonzero there. Over a closed domain the infimum of
//! `max_a |q_a|` is positive iff the family has no common root in the
//! domain: on a compact piece this is continuity, and for large parameters a
//! nonzero nonconstant polynomial grows without bound while a nonzero
//! constant stays put. With one parameter the common roots are the roots of
//! the gcd, which Sturm counting decides exactly.

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nondegeneracy::{
    degeneracy_decompose, DegeneracyVerdict, DegenerateSpan, DiffOperator, NondegError,
    ProjectionSystem,
};
use crate::poly::{
    count_real_roots, gcd_univariate, isolate_roots, MultiPoly, PolyError, RootDomain, VarSet,
};
use crate::scalar::QuadScalar;

/// Name of the shift parameter introduced by difference phases.
pub const SHIFT_PARAM: &str = "zeta";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UniformityError {
    #[error("operator direction {direction} moves frozen variable {var}")]
    FrozenDirection { direction: usize, var: String },
    #[error("variable {0} is neither a coordinate of the system nor a parameter")]
    StrayVariable(String),
    #[error(transparent)]
    Nondeg(#[from] NondegError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum UniformityStatus {
    Positive,
    /// The family has `root_count` common roots in the domain; the first is
    /// given exactly when known, and always by an enclosing interval.
    VanishesAt {
        parameter: String,
        root_count: usize,
        exact_root: Option<QuadScalar>,
        enclosure: (QuadScalar, QuadScalar),
    },
    IdenticallyZero,
    UndecidedMultiparameter,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformityVerdict {
    pub status: UniformityStatus,
    pub parameters: Vec<String>,
    pub domain: RootDomain,
    /// The nonzero members of the family.
    pub evidence: Vec<MultiPoly>,
    /// Monic gcd of the family (single parameter only).
    pub gcd: Option<MultiPoly>,
    /// Set when no parameter occurs and the plain decision was used.
    pub degeneracy: Option<DegeneracyVerdict>,
}

impl UniformityVerdict {
    pub fn is_positive(&self) -> bool {
        matches!(self.status, UniformityStatus::Positive)
    }

    pub fn status_name(&self) -> &'static str {
        match self.status {
            UniformityStatus::Positive => "positive",
            UniformityStatus::VanishesAt { .. } => "vanishes-at",
            UniformityStatus::IdenticallyZero => "identically-zero",
            UniformityStatus::UndecidedMultiparameter => "undecided-multiparameter",
        }
    }
}

const ENCLOSURE_WIDTH: (i64, i64) = (1, 1 << 20);

/// Decides whether the family has a common root in `domain`.
fn decide_family(
    family: Vec<MultiPoly>,
    parameters: &VarSet,
    domain: RootDomain,
) -> Result<UniformityVerdict, UniformityError> {
    let evidence: Vec<MultiPoly> = family.into_iter().filter(|q| !q.is_zero()).collect();
    let verdict = |status, gcd| UniformityVerdict {
        status,
        parameters: parameters.names().to_vec(),
        domain: domain.clone(),
        evidence: evidence.clone(),
        gcd,
        degeneracy: None,
    };
    if evidence.is_empty() {
        return Ok(verdict(UniformityStatus::IdenticallyZero, None));
    }
    if evidence.iter().any(MultiPoly::is_constant) {
        return Ok(verdict(UniformityStatus::Positive, None));
    }
    let mut active: Vec<usize> = evidence.iter().flat_map(|q| q.active_vars()).collect();
    active.sort_unstable();
    active.dedup();
    if active.len() > 1 {
        return Ok(verdict(UniformityStatus::UndecidedMultiparameter, None));
    }
    let g = gcd_univariate(&evidence)?;
    if g.is_constant() {
        return Ok(verdict(UniformityStatus::Positive, Some(g)));
    }
    let count = count_real_roots(&g, &domain)?;
    if count == 0 {
        return Ok(verdict(UniformityStatus::Positive, Some(g)));
    }
    let width = QuadScalar::from_frac(ENCLOSURE_WIDTH.0, ENCLOSURE_WIDTH.1);
    let first = isolate_roots(&g, &domain, &width)?
        .into_iter()
        .next()
        .expect("counted root is isolated");
    let status = UniformityStatus::VanishesAt {
        parameter: parameters.name(active[0]).to_string(),
        root_count: count,
        exact_root: first.exact.clone(),
        enclosure: (first.lo, first.hi),
    };
    Ok(verdict(status, Some(g)))
}

/// Uniform positivity of `D P` over the frozen variables, which range over
/// all reals. `Q = D P` is collected by monomials in the free variables;
/// the coefficients are the family.
pub fn hyp_check(
    p: &MultiPoly,
    frozen: &[String],
    d: &DiffOperator,
) -> Result<UniformityVerdict, UniformityError> {
    for (k, u) in d.directions().iter().enumerate() {
        for (name, c) in d.vars().names().iter().zip(u) {
            if frozen.contains(name) && !c.is_zero() {
                return Err(UniformityError::FrozenDirection {
                    direction: k + 1,
                    var: name.clone(),
                });
            }
        }
    }
    let q = d.apply(p)?;
    let params = VarSet::new(frozen.iter().cloned())?;
    let q = q.embed(&q.vars().with_all(frozen)?)?;
    let free: Vec<String> = q
        .vars()
        .names()
        .iter()
        .filter(|n| !frozen.contains(n))
        .cloned()
        .collect();
    let family: Vec<MultiPoly> = q
        .expand_in(&free)?
        .into_values()
        .map(|c| c.embed(&params))
        .collect::<Result<_, _>>()?;
    decide_family(family, &params, RootDomain::AllReals)
}

/// Uniform nondegeneracy of `P` with respect to `sys` over the parameter
/// domain: each parameter coefficient of `P` is projected onto the
/// complement of the degenerate span, and the residual components (which
/// are polynomials in the parameters) form the family.
pub fn uniform_residual_positive(
    p: &MultiPoly,
    parameters: &[String],
    sys: &ProjectionSystem,
    degree: u32,
    domain: RootDomain,
) -> Result<UniformityVerdict, UniformityError> {
    let params = VarSet::new(parameters.iter().cloned())?;
    for name in p.vars().names() {
        if !params.contains(name) && !sys.vars().contains(name) {
            let i = p.vars().index_of(name).unwrap();
            if p.degree_in(i) > 0 {
                return Err(UniformityError::StrayVariable(name.clone()));
            }
        }
    }
    let occurs = parameters
        .iter()
        .any(|n| p.vars().index_of(n).is_some_and(|i| p.degree_in(i) > 0));
    if !occurs {
        let plain = p.embed(sys.vars())?;
        let dv = degeneracy_decompose(&plain, sys, degree)?;
        let status = if dv.is_degenerate() {
            UniformityStatus::IdenticallyZero
        } else {
            UniformityStatus::Positive
        };
        return Ok(UniformityVerdict {
            status,
            parameters: parameters.to_vec(),
            domain,
            evidence: Vec::new(),
            gcd: None,
            degeneracy: Some(dv),
        });
    }
    let p = p.embed(&p.vars().with_all(parameters)?)?;
    let span = DegenerateSpan::new(sys, degree);
    let projector = span.projector();
    let slices: Vec<(Vec<u32>, MultiPoly)> = p.expand_in(parameters)?.into_iter().collect();
    let residuals: Vec<(Vec<u32>, Vec<QuadScalar>)> = slices
        .par_iter()
        .map(|(alpha, coeff)| {
            let v = span.vector_of(coeff)?;
            Ok((alpha.clone(), projector.residual_vector(&v)))
        })
        .collect::<Result<_, NondegError>>()?;
    let family: Vec<MultiPoly> = (0..span.space().len())
        .map(|i| {
            MultiPoly::from_terms(
                &params,
                residuals.iter().map(|(a, r)| (a.clone(), r[i].clone())),
            )
        })
        .collect();
    decide_family(family, &params, domain)
}

/// The shifted-phase condition: `P(x) - P(x + zeta e_dir)` must be uniformly
/// nondegenerate for the remaining projections over `|zeta| >= 1`.
pub fn difference_phase_check(
    p: &MultiPoly,
    direction: &str,
    sys_minus_pivot: &ProjectionSystem,
    degree: u32,
) -> Result<UniformityVerdict, UniformityError> {
    let shifted = difference_phase(p, direction, sys_minus_pivot.vars())?;
    uniform_residual_positive(
        &shifted,
        &[SHIFT_PARAM.to_string()],
        sys_minus_pivot,
        degree,
        RootDomain::AbsAtLeast {
            r: QuadScalar::from_int(1),
        },
    )
}

/// `P(x) - P(x + zeta e_dir)` over `vars` extended by the shift parameter.
pub fn difference_phase(
    p: &MultiPoly,
    direction: &str,
    vars: &VarSet,
) -> Result<MultiPoly, UniformityError> {
    vars.require(direction)?;
    Ok(p.embed(vars)?.shift_substitute(direction, SHIFT_PARAM)?)
}

/// `dx^2 + dy^2 - dz^2` on the first three coordinates of `vars`; it kills
/// every function of `v . x` when `v` lies on the light cone.
pub fn wave_operator(p: &MultiPoly, vars: &VarSet) -> Result<MultiPoly, UniformityError> {
    let idx = |k: usize| p.vars().require(vars.name(k));
    let (x, y, z) = (idx(0)?, idx(1)?, idx(2)?);
    let d2 = |i: usize| p.partial_derivative(i).partial_derivative(i);
    Ok(&(&d2(x) + &d2(y)) - &d2(z))
}
