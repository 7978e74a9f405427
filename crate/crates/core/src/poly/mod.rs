//! Multivariate polynomials over [`QuadScalar`] in a fixed, named variable set.

mod parse;
mod univariate;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{QuadScalar, ScalarError};

pub use parse::{parse_polynomial, parse_scalar, ParseError};
pub use univariate::{
    count_real_roots, gcd_univariate, isolate_roots, RootDomain, RootEnclosure, SturmChain,
    UniPoly,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` already present")]
    NameCollision(String),
    #[error("expected a direction of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("polynomial is not univariate: active variables {0:?}")]
    NotUnivariate(Vec<String>),
    #[error("univariate polynomials use different variables: `{0}` and `{1}`")]
    VariableMismatch(String, String),
    #[error("zero polynomial has no finite root count")]
    ZeroPolynomial,
    #[error("all inputs are zero")]
    AllZero,
    #[error("empty input")]
    Empty,
    #[error("interval endpoints out of order")]
    BadInterval,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Ordered list of distinct variable names. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct VarSet(Arc<[String]>);

impl VarSet {
    pub fn new<I, S>(names: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(PolyError::DuplicateVariable(n.clone()));
            }
        }
        Ok(VarSet(names.into()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn name(&self, i: usize) -> &str {
        &self.0[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    pub fn require(&self, name: &str) -> Result<usize, PolyError> {
        self.index_of(name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    /// Appends a fresh variable.
    pub fn with(&self, name: &str) -> Result<VarSet, PolyError> {
        if self.contains(name) {
            return Err(PolyError::NameCollision(name.to_string()));
        }
        let mut names = self.0.to_vec();
        names.push(name.to_string());
        Ok(VarSet(names.into()))
    }

    /// Appends each listed name not already present.
    pub fn with_all(&self, names: &[String]) -> Result<VarSet, PolyError> {
        let mut all = self.0.to_vec();
        for n in names {
            if !all.contains(n) {
                all.push(n.clone());
            }
        }
        VarSet::new(all)
    }

    /// The variables not listed in `drop`, in order.
    pub fn without(&self, drop: &[String]) -> VarSet {
        VarSet(
            self.0
                .iter()
                .filter(|n| !drop.contains(n))
                .cloned()
                .collect::<Vec<_>>()
                .into(),
        )
    }
}

impl TryFrom<Vec<String>> for VarSet {
    type Error = PolyError;
    fn try_from(v: Vec<String>) -> Result<Self, PolyError> {
        VarSet::new(v)
    }
}

impl From<VarSet> for Vec<String> {
    fn from(v: VarSet) -> Self {
        v.0.to_vec()
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Exponent vector, one entry per variable of the owning [`VarSet`].
pub type Exponents = Vec<u32>;

/// Sparse polynomial: exponent vector -> nonzero coefficient.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    vars: VarSet,
    terms: BTreeMap<Exponents, QuadScalar>,
}

impl MultiPoly {
    pub fn zero(vars: &VarSet) -> Self {
        MultiPoly {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &VarSet, c: QuadScalar) -> Self {
        Self::monomial(vars, vec![0; vars.len()], c)
    }

    pub fn one(vars: &VarSet) -> Self {
        Self::constant(vars, QuadScalar::one())
    }

    pub fn monomial(vars: &VarSet, exps: Exponents, c: QuadScalar) -> Self {
        assert_eq!(exps.len(), vars.len(), "exponent vector length");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        MultiPoly {
            vars: vars.clone(),
            terms,
        }
    }

    pub fn var(vars: &VarSet, name: &str) -> Result<Self, PolyError> {
        let i = vars.require(name)?;
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        Ok(Self::monomial(vars, e, QuadScalar::one()))
    }

    /// `sum_i coeffs[i] * vars[i]`.
    pub fn linear_form(vars: &VarSet, coeffs: &[QuadScalar]) -> Result<Self, PolyError> {
        if coeffs.len() != vars.len() {
            return Err(PolyError::DimensionMismatch {
                expected: vars.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self::from_terms(
            vars,
            coeffs.iter().enumerate().map(|(i, c)| {
                let mut e = vec![0; vars.len()];
                e[i] = 1;
                (e, c.clone())
            }),
        ))
    }

    /// Builds a polynomial, summing repeated exponents and dropping zeros.
    pub fn from_terms<I>(vars: &VarSet, terms: I) -> Self
    where
        I: IntoIterator<Item = (Exponents, QuadScalar)>,
    {
        let mut map: BTreeMap<Exponents, QuadScalar> = BTreeMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), vars.len(), "exponent vector length");
            let slot = map.entry(e).or_insert_with(QuadScalar::zero);
            *slot = &*slot + &c;
        }
        map.retain(|_, c| !c.is_zero());
        MultiPoly {
            vars: vars.clone(),
            terms: map,
        }
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &QuadScalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exps: &[u32]) -> QuadScalar {
        self.terms.get(exps).cloned().unwrap_or_else(QuadScalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(c)` when the polynomial is the constant `c` (including zero).
    pub fn constant_value(&self) -> Option<QuadScalar> {
        match self.terms.len() {
            0 => Some(QuadScalar::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&k| k == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.constant_value().is_some()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    /// Indices of variables that occur with positive exponent.
    pub fn active_vars(&self) -> Vec<usize> {
        (0..self.vars.len())
            .filter(|&i| self.terms.keys().any(|e| e[i] > 0))
            .collect()
    }

    /// The single radicand shared by the coefficients, if any is irrational.
    pub fn radicand(&self) -> Option<u32> {
        self.terms.values().find_map(QuadScalar::radicand)
    }

    fn assert_same_vars(&self, other: &Self) {
        assert!(
            self.vars == other.vars,
            "polynomials over different variable sets: {:?} vs {:?}",
            self.vars,
            other.vars
        );
    }

    pub fn scale(&self, c: &QuadScalar) -> Self {
        if c.is_zero() {
            return Self::zero(&self.vars);
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one(&self.vars);
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    pub fn partial_derivative(&self, var: usize) -> Self {
        Self::from_terms(
            &self.vars,
            self.terms.iter().filter(|(e, _)| e[var] > 0).map(|(e, c)| {
                let mut e2 = e.clone();
                let k = e2[var];
                e2[var] -= 1;
                (e2, c * &QuadScalar::from_int(k as i64))
            }),
        )
    }

    /// `sum_i u_i * d/dx_i`, with `u` indexed like this polynomial's variables.
    pub fn directional_derivative(&self, u: &[QuadScalar]) -> Result<Self, PolyError> {
        if u.len() != self.vars.len() {
            return Err(PolyError::DimensionMismatch {
                expected: self.vars.len(),
                got: u.len(),
            });
        }
        let mut acc = Self::zero(&self.vars);
        for (i, ui) in u.iter().enumerate() {
            if !ui.is_zero() {
                acc = &acc + &self.partial_derivative(i).scale(ui);
            }
        }
        Ok(acc)
    }

    /// Directional derivative with the direction given on a named subset of
    /// variables; variables absent from `names` get component zero, and
    /// names absent from this polynomial contribute nothing.
    pub fn directional_derivative_named(
        &self,
        names: &VarSet,
        u: &[QuadScalar],
    ) -> Result<Self, PolyError> {
        if u.len() != names.len() {
            return Err(PolyError::DimensionMismatch {
                expected: names.len(),
                got: u.len(),
            });
        }
        let mut full = vec![QuadScalar::zero(); self.vars.len()];
        for (name, ui) in names.names().iter().zip(u) {
            if let Some(i) = self.vars.index_of(name) {
                full[i] = ui.clone();
            }
        }
        self.directional_derivative(&full)
    }

    /// Replaces variable `var` by `value` (a polynomial over the same variables).
    pub fn substitute(&self, var: usize, value: &MultiPoly) -> Self {
        self.assert_same_vars(value);
        let max = self.degree_in(var);
        let mut powers = vec![Self::one(&self.vars)];
        for k in 1..=max as usize {
            powers.push(&powers[k - 1] * value);
        }
        let mut acc = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            let k = rest[var] as usize;
            rest[var] = 0;
            let mono = Self::monomial(&self.vars, rest, c.clone());
            acc = &acc + &(&mono * &powers[k]);
        }
        acc
    }

    /// Sets variable `var` to the scalar `value`; the variable stays in the set.
    pub fn evaluate_var(&self, var: usize, value: &QuadScalar) -> Self {
        self.substitute(var, &Self::constant(&self.vars, value.clone()))
    }

    /// Re-expresses the polynomial over `target`, matching variables by name.
    pub fn embed(&self, target: &VarSet) -> Result<Self, PolyError> {
        let mut map = Vec::with_capacity(self.vars.len());
        for (i, name) in self.vars.names().iter().enumerate() {
            match target.index_of(name) {
                Some(j) => map.push(Some(j)),
                None if self.degree_in(i) == 0 => map.push(None),
                None => return Err(PolyError::UnknownVariable(name.clone())),
            }
        }
        Ok(MultiPoly {
            vars: target.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e2 = vec![0; target.len()];
                    for (i, j) in map.iter().enumerate() {
                        if let Some(j) = j {
                            e2[*j] = e[i];
                        }
                    }
                    (e2, c.clone())
                })
                .collect(),
        })
    }

    /// Renames variables (a bijection on names); used for coordinate swaps.
    pub fn rename(&self, from: &str, to: &str) -> Result<Self, PolyError> {
        let i = self.vars.require(from)?;
        if self.vars.contains(to) {
            return Err(PolyError::NameCollision(to.to_string()));
        }
        let mut names = self.vars.names().to_vec();
        names[i] = to.to_string();
        Ok(MultiPoly {
            vars: VarSet::new(names)?,
            terms: self.terms.clone(),
        })
    }

    /// `p - p[var := var + param]` over the variable set extended by `param`.
    pub fn shift_substitute(&self, var: &str, param: &str) -> Result<Self, PolyError> {
        let i = self.vars.require(var)?;
        let ext = self.vars.with(param)?;
        let p = self.embed(&ext)?;
        let shifted_var = &MultiPoly::var(&ext, var)? + &MultiPoly::var(&ext, param)?;
        Ok(&p - &p.substitute(i, &shifted_var))
    }

    /// Collects terms by the monomials in `frozen`: returns
    /// `{frozen exponents -> coefficient polynomial in the remaining variables}`.
    /// Keys are exponent vectors over `frozen` in the given order.
    pub fn expand_in(
        &self,
        frozen: &[String],
    ) -> Result<BTreeMap<Exponents, MultiPoly>, PolyError> {
        let frozen_idx = frozen
            .iter()
            .map(|n| self.vars.require(n))
            .collect::<Result<Vec<_>, _>>()?;
        let free = self.vars.without(frozen);
        let free_idx: Vec<usize> = free
            .names()
            .iter()
            .map(|n| self.vars.index_of(n).unwrap())
            .collect();
        let mut grouped: BTreeMap<Exponents, Vec<(Exponents, QuadScalar)>> = BTreeMap::new();
        for (e, c) in &self.terms {
            let key: Exponents = frozen_idx.iter().map(|&i| e[i]).collect();
            let rest: Exponents = free_idx.iter().map(|&i| e[i]).collect();
            grouped.entry(key).or_default().push((rest, c.clone()));
        }
        Ok(grouped
            .into_iter()
            .map(|(k, ts)| (k, MultiPoly::from_terms(&free, ts)))
            .collect())
    }

    /// Composes a univariate polynomial with `inner`: `sum_k c_k inner^k`.
    pub fn compose(outer: &UniPoly, inner: &MultiPoly) -> Self {
        let mut acc = Self::zero(inner.vars());
        for c in outer.coeffs().iter().rev() {
            acc = &(&acc * inner) + &Self::constant(inner.vars(), c.clone());
        }
        acc
    }

    /// Floating evaluation at a point given in variable order.
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c.to_f64()
                    * e.iter()
                        .zip(point)
                        .map(|(&k, &x)| x.powi(k as i32))
                        .product::<f64>()
            })
            .sum()
    }

    /// Exact evaluation at a point given in variable order.
    pub fn eval(&self, point: &[QuadScalar]) -> QuadScalar {
        let mut acc = QuadScalar::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (&k, x) in e.iter().zip(point) {
                if k > 0 {
                    t = &t * &x.pow(k);
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Terms sorted for printing: descending total degree, then descending
    /// exponents in variable order.
    pub fn sorted_terms(&self) -> Vec<(&Exponents, &QuadScalar)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        v
    }

    pub fn monomial_string(&self, e: &[u32]) -> String {
        let parts: Vec<String> = e
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, &k)| {
                if k == 1 {
                    self.vars.name(i).to_string()
                } else {
                    format!("{}^{}", self.vars.name(i), k)
                }
            })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (e, c)) in self.sorted_terms().into_iter().enumerate() {
            let is_const = e.iter().all(|&k| k == 0);
            let negative = !c.is_compound() && c.is_negative();
            let mag = if negative { -c } else { c.clone() };
            match (n, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mono = self.monomial_string(e);
            if is_const {
                if mag.is_compound() {
                    write!(f, "({mag})")?;
                } else {
                    write!(f, "{mag}")?;
                }
            } else if mag.is_one() {
                f.write_str(&mono)?;
            } else if mag.is_compound() {
                write!(f, "({mag})*{mono}")?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[{:?}]({})", self.vars, self)
    }
}

impl<'a> std::ops::Add<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &'a MultiPoly) -> MultiPoly {
        self.assert_same_vars(rhs);
        let mut terms = self.terms.clone();
        for (e, c) in &rhs.terms {
            let slot = terms.entry(e.clone()).or_insert_with(QuadScalar::zero);
            *slot = &*slot + c;
            if slot.is_zero() {
                terms.remove(e);
            }
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms,
        }
    }
}

impl<'a> std::ops::Sub<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &'a MultiPoly) -> MultiPoly {
        self + &(-rhs)
    }
}

impl std::ops::Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl<'a> std::ops::Mul<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &'a MultiPoly) -> MultiPoly {
        self.assert_same_vars(rhs);
        let mut out: Vec<(Exponents, QuadScalar)> =
            Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.push((e, ca * cb));
            }
        }
        MultiPoly::from_terms(&self.vars, out)
    }
}

/// JSON form: variable names plus a list of `{exponents, coeff}` terms.
#[derive(Serialize, Deserialize)]
struct PolyRepr {
    vars: VarSet,
    terms: Vec<TermRepr>,
    text: String,
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exponents: Exponents,
    coeff: QuadScalar,
}

impl Serialize for MultiPoly {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PolyRepr {
            vars: self.vars.clone(),
            terms: self
                .sorted_terms()
                .into_iter()
                .map(|(e, c)| TermRepr {
                    exponents: e.clone(),
                    coeff: c.clone(),
                })
                .collect(),
            text: self.to_string(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MultiPoly {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = PolyRepr::deserialize(deserializer)?;
        if repr.terms.iter().any(|t| t.exponents.len() != repr.vars.len()) {
            return Err(D::Error::custom("exponent vector length mismatch"));
        }
        Ok(MultiPoly::from_terms(
            &repr.vars,
            repr.terms.into_iter().map(|t| (t.exponents, t.coeff)),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xyz() -> VarSet {
        VarSet::new(["x", "y", "z"]).unwrap()
    }

    fn p(text: &str) -> MultiPoly {
        parse_polynomial(text, &xyz()).unwrap()
    }

    fn int(n: i64) -> QuadScalar {
        QuadScalar::from_int(n)
    }

    #[test]
    fn varset_rejects_duplicates() {
        assert_eq!(
            VarSet::new(["x", "x"]),
            Err(PolyError::DuplicateVariable("x".into()))
        );
    }

    #[test]
    fn composed_directions_on_example_phase() {
        let q = p("x^2*y + 2*x*y*z");
        let q = q.directional_derivative(&[int(1), int(-1), int(0)]).unwrap();
        let q = q.directional_derivative(&[int(0), int(1), int(0)]).unwrap();
        let q = q.directional_derivative(&[int(1), int(0), int(0)]).unwrap();
        assert_eq!(q, MultiPoly::constant(&xyz(), int(2)));
    }

    #[test]
    fn direction_orthogonal_to_form_kills_its_powers() {
        let q = p("(x+y)^3");
        assert!(q
            .directional_derivative(&[int(1), int(-1), int(0)])
            .unwrap()
            .is_zero());
    }

    #[test]
    fn wave_operator_on_cube() {
        // oracle: d2/dx2 x^3 = 6x, other second derivatives vanish
        let q = p("x^3");
        let e = |i: usize| {
            let mut v = vec![int(0); 3];
            v[i] = int(1);
            v
        };
        let dxx = q
            .directional_derivative(&e(0))
            .unwrap()
            .directional_derivative(&e(0))
            .unwrap();
        let dyy = q
            .directional_derivative(&e(1))
            .unwrap()
            .directional_derivative(&e(1))
            .unwrap();
        let dzz = q
            .directional_derivative(&e(2))
            .unwrap()
            .directional_derivative(&e(2))
            .unwrap();
        assert_eq!(&(&dxx + &dyy) - &dzz, p("6*x"));
    }

    #[test]
    fn derivative_dimension_mismatch() {
        assert_eq!(
            p("x").directional_derivative(&[int(1)]),
            Err(PolyError::DimensionMismatch {
                expected: 3,
                got: 1
            })
        );
    }

    #[test]
    fn shift_examples() {
        let ext = xyz().with("zeta").unwrap();
        let d = p("x^2*y + 2*x*y*z").shift_substitute("x", "zeta").unwrap();
        assert_eq!(
            d,
            parse_polynomial("-2*zeta*x*y - zeta^2*y - 2*zeta*y*z", &ext).unwrap()
        );
        let d = p("x^3").shift_substitute("x", "zeta").unwrap();
        // binomial oracle: x^3 - (x+t)^3 = -3t x^2 - 3t^2 x - t^3
        assert_eq!(
            d,
            parse_polynomial("-3*zeta*x^2 - 3*zeta^2*x - zeta^3", &ext).unwrap()
        );
        assert!(p("y^2").shift_substitute("x", "zeta").unwrap().is_zero());
        assert_eq!(
            p("x").shift_substitute("x", "y"),
            Err(PolyError::NameCollision("y".into()))
        );
    }

    #[test]
    fn expand_in_examples() {
        let parts = p("x^2*y + 2*x*y*z").expand_in(&["z".into()]).unwrap();
        let xy = VarSet::new(["x", "y"]).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[&vec![0]], parse_polynomial("x^2*y", &xy).unwrap());
        assert_eq!(parts[&vec![1]], parse_polynomial("2*x*y", &xy).unwrap());
        let parts = p("x^3").expand_in(&["z".into()]).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[&vec![0]], parse_polynomial("x^3", &xy).unwrap());
    }

    #[test]
    fn printer_is_sorted_and_reparses() {
        let q = p("(x+y+sqrt(2)*z)^2 - 1/3");
        let text = q.to_string();
        assert_eq!(
            text,
            "x^2 + 2*x*y + 2*sqrt(2)*x*z + y^2 + 2*sqrt(2)*y*z + 2*z^2 - 1/3"
        );
        assert_eq!(parse_polynomial(&text, &xyz()).unwrap(), q);
        let r = p("(1 - sqrt(2))*x - (3 + sqrt(2))");
        assert_eq!(parse_polynomial(&r.to_string(), &xyz()).unwrap(), r);
    }

    #[test]
    fn embed_and_rename() {
        let q = p("x*y");
        let wide = VarSet::new(["w", "y", "x", "z"]).unwrap();
        let e = q.embed(&wide).unwrap();
        assert_eq!(e.coeff(&[0, 1, 1, 0]), int(1));
        assert!(q.embed(&VarSet::new(["x"]).unwrap()).is_err());
        let r = q.rename("x", "u").unwrap();
        assert_eq!(r.vars().names(), &["u", "y", "z"]);
    }

    #[test]
    fn json_round_trip() {
        let q = p("(x + sqrt(2)*z)^3 - 1/2*y");
        let json = serde_json::to_string(&q).unwrap();
        let back: MultiPoly = serde_json::from_str(&json).unwrap();
        assert_eq!(back, q);
    }
}
