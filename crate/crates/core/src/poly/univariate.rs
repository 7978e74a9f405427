//! Dense univariate polynomials, Euclidean gcd and Sturm root counting.
//!
//! All signs are exact: chains are evaluated in the quadratic field and the
//! sign of each value is decided by [`QuadScalar::sign`].

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{MultiPoly, PolyError, VarSet};
use crate::scalar::{QuadScalar, Rational, Sign};

/// Dense coefficients, constant term first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPoly {
    coeffs: Vec<QuadScalar>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<QuadScalar>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[QuadScalar] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&QuadScalar> {
        self.coeffs.last()
    }

    pub fn eval(&self, t: &QuadScalar) -> QuadScalar {
        let mut acc = QuadScalar::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * t) + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * &QuadScalar::from_int(k as i64))
                .collect(),
        )
    }

    pub fn scale(&self, c: &QuadScalar) -> Self {
        UniPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            None => self.clone(),
            Some(lc) => self.scale(&lc.inv().expect("nonzero leading coefficient")),
        }
    }

    /// Quotient and remainder over the field.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lc_inv = divisor.leading().unwrap().inv().unwrap();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![QuadScalar::zero(); rem.len().saturating_sub(dd).max(1)];
        while rem.len() > dd && !rem.is_empty() {
            let shift = rem.len() - 1 - dd;
            let factor = rem.last().unwrap() * &lc_inv;
            for (i, c) in divisor.coeffs.iter().enumerate() {
                rem[shift + i] = &rem[shift + i] - &(c * &factor);
            }
            quot[shift] = factor;
            rem.pop();
            while rem.last().is_some_and(Zero::is_zero) {
                rem.pop();
            }
        }
        (UniPoly::new(quot), UniPoly::new(rem))
    }

    /// Monic gcd; the gcd of two zero polynomials is zero.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `p / gcd(p, p')`: same roots, all simple.
    pub fn squarefree_part(&self) -> Self {
        let g = self.gcd(&self.derivative());
        if g.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        self.div_rem(&g).0
    }

    /// Sign as `t -> +inf` (`positive_end`) or `t -> -inf`.
    fn sign_at_infinity(&self, positive_end: bool) -> Sign {
        let lc = match self.leading() {
            None => return Sign::Zero,
            Some(lc) => lc.sign(),
        };
        let odd = self.degree().unwrap() % 2 == 1;
        if positive_end || !odd {
            lc
        } else {
            match lc {
                Sign::Positive => Sign::Negative,
                Sign::Negative => Sign::Positive,
                Sign::Zero => Sign::Zero,
            }
        }
    }

    /// Views a polynomial with at most one active variable as univariate.
    /// Returns the active variable index (None for constants).
    pub fn from_multi(p: &MultiPoly) -> Result<(Option<usize>, UniPoly), PolyError> {
        let active = p.active_vars();
        if active.len() > 1 {
            return Err(PolyError::NotUnivariate(
                active.iter().map(|&i| p.vars().name(i).to_string()).collect(),
            ));
        }
        let var = active.first().copied();
        let deg = var.map_or(0, |v| p.degree_in(v)) as usize;
        let mut coeffs = vec![QuadScalar::zero(); deg + 1];
        for (e, c) in p.terms() {
            let k = var.map_or(0, |v| e[v]) as usize;
            coeffs[k] = c.clone();
        }
        Ok((var, UniPoly::new(coeffs)))
    }

    pub fn to_multi(&self, vars: &VarSet, var: usize) -> MultiPoly {
        MultiPoly::from_terms(
            vars,
            self.coeffs.iter().enumerate().map(|(k, c)| {
                let mut e = vec![0; vars.len()];
                e[var] = k as u32;
                (e, c.clone())
            }),
        )
    }

    /// Rational `B` with every real root in `(-B, B)`.
    pub fn root_bound(&self) -> Rational {
        let lc = self.leading().expect("nonzero polynomial");
        let lc_inv = lc.inv().unwrap();
        let max = self
            .coeffs
            .iter()
            .take(self.coeffs.len() - 1)
            .map(|c| (c * &lc_inv).abs_upper_bound())
            .max()
            .unwrap_or_else(Rational::zero);
        max + Rational::one()
    }
}

/// Where real roots are counted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootDomain {
    AllReals,
    /// Closed interval `[lo, hi]`.
    Closed { lo: QuadScalar, hi: QuadScalar },
    /// `|t| >= r` with `r >= 0`.
    AbsAtLeast { r: QuadScalar },
}

impl std::fmt::Display for RootDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RootDomain::AllReals => f.write_str("R"),
            RootDomain::Closed { lo, hi } => write!(f, "[{lo}, {hi}]"),
            RootDomain::AbsAtLeast { r } => write!(f, "|t| >= {r}"),
        }
    }
}

/// Signed remainder sequence of a square-free polynomial.
#[derive(Debug, Clone)]
pub struct SturmChain {
    polys: Vec<UniPoly>,
}

impl SturmChain {
    /// Builds the chain of the square-free part of `p`.
    pub fn new(p: &UniPoly) -> Result<Self, PolyError> {
        if p.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let p0 = p.squarefree_part();
        let mut polys = vec![p0.clone()];
        let p1 = p0.derivative();
        if !p1.is_zero() {
            polys.push(p1);
            loop {
                let n = polys.len();
                let (_, r) = polys[n - 2].div_rem(&polys[n - 1]);
                if r.is_zero() {
                    break;
                }
                polys.push(r.scale(&QuadScalar::from_int(-1)));
            }
        }
        Ok(SturmChain { polys })
    }

    pub fn polys(&self) -> &[UniPoly] {
        &self.polys
    }

    pub fn base(&self) -> &UniPoly {
        &self.polys[0]
    }

    fn variations<I: Iterator<Item = Sign>>(signs: I) -> usize {
        let mut last = Sign::Zero;
        let mut count = 0;
        for s in signs.filter(|s| *s != Sign::Zero) {
            if last != Sign::Zero && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    pub fn variations_at(&self, t: &QuadScalar) -> usize {
        Self::variations(self.polys.iter().map(|p| p.eval(t).sign()))
    }

    fn variations_at_infinity(&self, positive_end: bool) -> usize {
        Self::variations(self.polys.iter().map(|p| p.sign_at_infinity(positive_end)))
    }

    /// Distinct roots in `(a, b]`.
    pub fn count_half_open(&self, a: &QuadScalar, b: &QuadScalar) -> usize {
        self.variations_at(a) - self.variations_at(b)
    }

    pub fn count_all(&self) -> usize {
        self.variations_at_infinity(false) - self.variations_at_infinity(true)
    }

    fn is_root(&self, t: &QuadScalar) -> bool {
        self.base().eval(t).is_zero()
    }

    pub fn count_closed(&self, a: &QuadScalar, b: &QuadScalar) -> usize {
        self.count_half_open(a, b) + usize::from(self.is_root(a))
    }

    pub fn count_in(&self, domain: &RootDomain) -> Result<usize, PolyError> {
        match domain {
            RootDomain::AllReals => Ok(self.count_all()),
            RootDomain::Closed { lo, hi } => {
                if lo.cmp_value(hi)? == std::cmp::Ordering::Greater {
                    return Err(PolyError::BadInterval);
                }
                Ok(self.count_closed(lo, hi))
            }
            RootDomain::AbsAtLeast { r } => {
                if r.is_negative() {
                    return Err(PolyError::BadInterval);
                }
                if r.is_zero() {
                    return Ok(self.count_all());
                }
                let inside = self.count_half_open(&-r, r) - usize::from(self.is_root(r));
                Ok(self.count_all() - inside)
            }
        }
    }
}

/// Number of distinct real roots of a nonzero polynomial with at most one
/// active variable, restricted to `domain`.
pub fn count_real_roots(p: &MultiPoly, domain: &RootDomain) -> Result<usize, PolyError> {
    let (_, u) = UniPoly::from_multi(p)?;
    SturmChain::new(&u)?.count_in(domain)
}

/// Monic gcd of univariate polynomials sharing their active variable.
pub fn gcd_univariate(ps: &[MultiPoly]) -> Result<MultiPoly, PolyError> {
    let first = ps.first().ok_or(PolyError::Empty)?;
    let mut var: Option<usize> = None;
    let mut acc = UniPoly::zero();
    for p in ps {
        let p = p.embed(first.vars())?;
        let (v, u) = UniPoly::from_multi(&p)?;
        match (var, v) {
            (Some(a), Some(b)) if a != b => {
                return Err(PolyError::VariableMismatch(
                    first.vars().name(a).to_string(),
                    first.vars().name(b).to_string(),
                ))
            }
            (None, Some(b)) => var = Some(b),
            _ => {}
        }
        acc = acc.gcd(&u);
    }
    if acc.is_zero() {
        return Err(PolyError::AllZero);
    }
    Ok(acc.to_multi(first.vars(), var.unwrap_or(0)))
}

/// An isolating interval `(lo, hi]` holding exactly one root, or the root
/// itself when it was hit exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootEnclosure {
    pub lo: QuadScalar,
    pub hi: QuadScalar,
    pub exact: Option<QuadScalar>,
}

impl RootEnclosure {
    fn point(t: QuadScalar) -> Self {
        RootEnclosure {
            lo: t.clone(),
            hi: t.clone(),
            exact: Some(t),
        }
    }

    pub fn midpoint_f64(&self) -> f64 {
        0.5 * (self.lo.to_f64() + self.hi.to_f64())
    }
}

fn bisect(
    chain: &SturmChain,
    a: QuadScalar,
    b: QuadScalar,
    width: &QuadScalar,
    out: &mut Vec<RootEnclosure>,
) {
    let c = chain.count_half_open(&a, &b);
    if c == 0 {
        return;
    }
    if c == 1 {
        if chain.is_root(&b) {
            out.push(RootEnclosure::point(b));
            return;
        }
        if (&b - &a).cmp_value(width).unwrap() != std::cmp::Ordering::Greater {
            out.push(RootEnclosure {
                lo: a,
                hi: b,
                exact: None,
            });
            return;
        }
    }
    let mid = &(&a + &b) * &QuadScalar::from_frac(1, 2);
    bisect(chain, a, mid.clone(), width, out);
    bisect(chain, mid, b, width, out);
}

/// Isolates the distinct real roots in `domain`, in increasing order, to
/// enclosures no wider than `width`. Linear square-free parts give exact roots.
pub fn isolate_roots(
    p: &MultiPoly,
    domain: &RootDomain,
    width: &QuadScalar,
) -> Result<Vec<RootEnclosure>, PolyError> {
    let (_, u) = UniPoly::from_multi(p)?;
    let chain = SturmChain::new(&u)?;
    let base = chain.base();
    if base.degree() == Some(1) {
        let c = base.coeffs();
        let root = -(&c[0] / &c[1]);
        let inside = match domain {
            RootDomain::AllReals => true,
            RootDomain::Closed { lo, hi } => {
                root.cmp_value(lo)? != std::cmp::Ordering::Less
                    && root.cmp_value(hi)? != std::cmp::Ordering::Greater
            }
            RootDomain::AbsAtLeast { r } => root.abs().cmp_value(r)? != std::cmp::Ordering::Less,
        };
        return Ok(if inside {
            vec![RootEnclosure::point(root)]
        } else {
            Vec::new()
        });
    }
    if base.degree() == Some(0) {
        return Ok(Vec::new());
    }
    let bound = QuadScalar::from_rational(base.root_bound());
    let ranges: Vec<(QuadScalar, QuadScalar)> = match domain {
        RootDomain::AllReals => vec![(-&bound, bound.clone())],
        RootDomain::Closed { lo, hi } => vec![(lo.clone(), hi.clone())],
        RootDomain::AbsAtLeast { r } => {
            if r.cmp_value(&bound)? == std::cmp::Ordering::Greater {
                Vec::new()
            } else {
                vec![(-&bound, -r), (r.clone(), bound.clone())]
            }
        }
    };
    let mut out = Vec::new();
    for (lo, hi) in ranges {
        if chain.is_root(&lo) {
            out.push(RootEnclosure::point(lo.clone()));
        }
        bisect(&chain, lo, hi, width, &mut out);
    }
    Ok(out)
}
