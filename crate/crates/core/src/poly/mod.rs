//! Sparse polynomials over the integers in the Boolean quotient ring
//! `Z[X] / <x^2 - x>`.
//!
//! A [`VarId`]'s ordinal is its rank in the active variable order, so both
//! monomial orders are plain comparisons on sorted id lists. Monomials are
//! squarefree and store their variables in descending order.

mod monomial;
mod text;

pub use monomial::{Monomial, MonomialOrder};
pub use text::{format_poly, parse_poly, ParseError};

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Dense handle into a [`VarTable`]. Larger id = larger variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct VarId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum VarKind {
    Input,
    Extension,
    Gate,
    Output,
}

/// Names of the variables, indexed by rank.
#[derive(Debug, Clone, Default)]
pub struct VarTable {
    names: Vec<String>,
    kinds: Vec<VarKind>,
    index: HashMap<String, VarId>,
}

impl VarTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a table from names listed smallest first.
    pub fn from_chain<S: AsRef<str>>(names: &[S]) -> Self {
        let mut t = VarTable::new();
        for n in names {
            t.intern(n.as_ref(), VarKind::Gate);
        }
        t
    }

    /// Returns the id of `name`, appending it as the largest variable if new.
    pub fn intern(&mut self, name: &str, kind: VarKind) -> VarId {
        if let Some(&v) = self.index.get(name) {
            return v;
        }
        let v = VarId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.kinds.push(kind);
        self.index.insert(name.to_string(), v);
        v
    }

    pub fn get(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.0 as usize]
    }

    pub fn kind(&self, v: VarId) -> VarKind {
        self.kinds[v.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.names.len() as u32).map(VarId)
    }

    /// The chain `v1 < v2 < ...`.
    pub fn chain(&self) -> String {
        self.names.join(" < ")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("leading coefficient {divisor} does not divide {dividend}")]
    NonIntegralCofactor { dividend: BigInt, divisor: BigInt },
    #[error("linear reduction requires matching leading monomials of degree <= 1")]
    LeadingMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub coeff: BigInt,
    pub mono: Monomial,
}

/// A canonical polynomial: terms strictly descending under `order`, no zero
/// coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    order: MonomialOrder,
    terms: Vec<Term>,
}

impl Polynomial {
    pub fn zero(order: MonomialOrder) -> Self {
        Polynomial {
            order,
            terms: Vec::new(),
        }
    }

    pub fn constant(order: MonomialOrder, c: impl Into<BigInt>) -> Self {
        Self::term(order, c, Monomial::one())
    }

    pub fn var(order: MonomialOrder, v: VarId) -> Self {
        Self::term(order, 1, Monomial::var(v))
    }

    pub fn term(order: MonomialOrder, c: impl Into<BigInt>, mono: Monomial) -> Self {
        let c = c.into();
        if c.is_zero() {
            return Self::zero(order);
        }
        Polynomial {
            order,
            terms: vec![Term { coeff: c, mono }],
        }
    }

    /// Sorts, merges duplicates and drops zero coefficients.
    pub fn from_terms(order: MonomialOrder, mut terms: Vec<Term>) -> Self {
        terms.sort_by(|a, b| order.cmp(&b.mono, &a.mono));
        let mut out: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match out.last_mut() {
                Some(last) if last.mono == t.mono => last.coeff += t.coeff,
                _ => out.push(t),
            }
        }
        out.retain(|t| !t.coeff.is_zero());
        Polynomial { order, terms: out }
    }

    pub fn from_pairs<C: Into<BigInt>>(
        order: MonomialOrder,
        pairs: impl IntoIterator<Item = (C, Monomial)>,
    ) -> Self {
        Self::from_terms(
            order,
            pairs
                .into_iter()
                .map(|(c, mono)| Term {
                    coeff: c.into(),
                    mono,
                })
                .collect(),
        )
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    /// The same polynomial sorted under another order.
    pub fn with_order(&self, order: MonomialOrder) -> Self {
        if order == self.order {
            return self.clone();
        }
        Self::from_terms(order, self.terms.clone())
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<Term> {
        self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn size(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.mono.degree())
            .max()
            .unwrap_or(0)
    }

    pub fn is_linear(&self) -> bool {
        self.terms.iter().all(|t| t.mono.degree() <= 1)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.mono.is_one())
    }

    pub fn lt(&self) -> Option<&Term> {
        self.terms.first()
    }

    pub fn lm(&self) -> Option<&Monomial> {
        self.terms.first().map(|t| &t.mono)
    }

    pub fn lc(&self) -> Option<&BigInt> {
        self.terms.first().map(|t| &t.coeff)
    }

    /// The largest variable of the leading monomial.
    pub fn leading_var(&self) -> Option<VarId> {
        self.lm().and_then(|m| m.max_var())
    }

    pub fn tail(&self) -> Polynomial {
        Polynomial {
            order: self.order,
            terms: self.terms.iter().skip(1).cloned().collect(),
        }
    }

    pub fn contains_var(&self, v: VarId) -> bool {
        self.terms.iter().any(|t| t.mono.contains(v))
    }

    /// Sorted, deduplicated variables.
    pub fn vars(&self) -> Vec<VarId> {
        let mut vs: Vec<VarId> = self
            .terms
            .iter()
            .flat_map(|t| t.mono.vars().iter().copied())
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn coeff_of(&self, m: &Monomial) -> BigInt {
        self.terms
            .iter()
            .find(|t| &t.mono == m)
            .map(|t| t.coeff.clone())
            .unwrap_or_default()
    }

    fn merge(&self, other: &Polynomial, other_sign: &BigInt) -> Polynomial {
        debug_assert_eq!(self.order, other.order);
        let order = self.order;
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() && j < b.len() {
            match order.cmp(&a[i].mono, &b[j].mono) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(Term {
                        coeff: &b[j].coeff * other_sign,
                        mono: b[j].mono.clone(),
                    });
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &a[i].coeff + &b[j].coeff * other_sign;
                    if !c.is_zero() {
                        out.push(Term {
                            coeff: c,
                            mono: a[i].mono.clone(),
                        });
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        out.extend(b[j..].iter().map(|t| Term {
            coeff: &t.coeff * other_sign,
            mono: t.mono.clone(),
        }));
        Polynomial { order, terms: out }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        self.merge(other, &BigInt::one())
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.merge(other, &-BigInt::one())
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: &BigInt, other: &Polynomial) -> Polynomial {
        if c.is_zero() {
            return self.clone();
        }
        self.merge(other, c)
    }

    pub fn neg(&self) -> Polynomial {
        self.scale(&-BigInt::one())
    }

    pub fn scale(&self, c: &BigInt) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.order);
        }
        Polynomial {
            order: self.order,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: &t.coeff * c,
                    mono: t.mono.clone(),
                })
                .collect(),
        }
    }

    /// `c * m * self` with squarefree collapse.
    pub fn mul_term(&self, c: &BigInt, m: &Monomial) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.order);
        }
        let mut collapsed = false;
        let terms: Vec<Term> = self
            .terms
            .iter()
            .map(|t| {
                if !collapsed && !t.mono.is_disjoint(m) {
                    collapsed = true;
                }
                Term {
                    coeff: &t.coeff * c,
                    mono: t.mono.mul(m),
                }
            })
            .collect();
        if collapsed {
            Polynomial::from_terms(self.order, terms)
        } else {
            // multiplying by a coprime monomial keeps the order
            Polynomial {
                order: self.order,
                terms,
            }
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Term {
                    coeff: &a.coeff * &b.coeff,
                    mono: a.mono.mul(&b.mono),
                });
            }
        }
        Polynomial::from_terms(self.order, terms)
    }

    /// Greatest common divisor of the coefficients (non-negative).
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for t in &self.terms {
            g = g.gcd(&t.coeff);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Divides out the content and makes the leading coefficient positive.
    pub fn primitive(&self) -> Polynomial {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = self.content();
        if self.terms[0].coeff.is_negative() {
            g = -g;
        }
        if g.is_one() {
            return self.clone();
        }
        Polynomial {
            order: self.order,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: &t.coeff / &g,
                    mono: t.mono.clone(),
                })
                .collect(),
        }
    }

    /// Replaces every occurrence of `v` by `value`.
    pub fn substitute(&self, v: VarId, value: &Polynomial) -> Polynomial {
        let mut keep = Vec::new();
        let mut acc = Polynomial::zero(self.order);
        for t in &self.terms {
            if t.mono.contains(v) {
                acc = acc.add(&value.mul_term(&t.coeff, &t.mono.without(v)));
            } else {
                keep.push(t.clone());
            }
        }
        Polynomial {
            order: self.order,
            terms: keep,
        }
        .add(&acc)
    }

    /// Evaluates at a Boolean point given by a predicate on variables.
    pub fn eval(&self, point: impl Fn(VarId) -> bool) -> BigInt {
        let mut s = BigInt::zero();
        for t in &self.terms {
            if t.mono.vars().iter().all(|&v| point(v)) {
                s += &t.coeff;
            }
        }
        s
    }

    /// Renames variables (e.g. into another table) and re-sorts.
    pub fn map_vars(&self, order: MonomialOrder, f: impl Fn(VarId) -> VarId) -> Polynomial {
        Polynomial::from_terms(
            order,
            self.terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff.clone(),
                    mono: Monomial::from_vars(t.mono.vars().iter().map(|&v| f(v))),
                })
                .collect(),
        )
    }

    pub fn display<'a>(&'a self, table: &'a VarTable) -> impl fmt::Display + 'a {
        text::Display { poly: self, table }
    }
}

fn divide_exact(a: &BigInt, b: &BigInt) -> Option<BigInt> {
    let (q, r) = a.div_rem(b);
    r.is_zero().then_some(q)
}

/// Multivariate division remainder of `f` by `divisors`, always picking the
/// first divisor (in list order) whose leading monomial divides the term.
///
/// The remainder is exact when every divisor's leading coefficient divides
/// the coefficients it meets (e.g. monic divisors). Otherwise the working
/// polynomial is scaled up to stay integral, so the result is the remainder
/// up to a positive constant factor.
pub fn reduce(f: &Polynomial, divisors: &[Polynomial]) -> Polynomial {
    let order = f.order;
    let divisors: Vec<Polynomial> = divisors
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| g.with_order(order))
        .collect();
    let mut p = f.clone();
    let mut rem: Vec<Term> = Vec::new();
    while let Some(lt) = p.terms.first().cloned() {
        let hit = divisors
            .iter()
            .find(|g| g.lm().is_some_and(|m| m.divides(&lt.mono)));
        match hit {
            Some(g) => {
                let glc = g.lc().expect("nonzero");
                let u = lt.mono.quotient(g.lm().expect("nonzero"));
                match divide_exact(&lt.coeff, glc) {
                    Some(q) => p = p.sub(&g.mul_term(&q, &u)),
                    None => {
                        let gcd = lt.coeff.gcd(glc);
                        let a = (glc / &gcd).abs();
                        let b = &lt.coeff * glc.signum() / &gcd;
                        p = p.scale(&a).sub(&g.mul_term(&b, &u));
                        for t in &mut rem {
                            t.coeff *= &a;
                        }
                    }
                }
            }
            None => {
                rem.push(lt);
                p.terms.remove(0);
            }
        }
    }
    Polynomial { order, terms: rem }
}

/// `s - (lc(s)/lc(p)) * p` for a linear `p` with `lm(p) = lm(s)`.
pub fn linear_reduce(s: &Polynomial, p: &Polynomial) -> Result<Polynomial, PolyError> {
    let (Some(ls), Some(lp)) = (s.lt(), p.lt()) else {
        return Err(PolyError::LeadingMismatch);
    };
    if !p.is_linear() || ls.mono != lp.mono {
        return Err(PolyError::LeadingMismatch);
    }
    let alpha =
        divide_exact(&ls.coeff, &lp.coeff).ok_or_else(|| PolyError::NonIntegralCofactor {
            dividend: ls.coeff.clone(),
            divisor: lp.coeff.clone(),
        })?;
    Ok(s.add_scaled(&-alpha, &p.with_order(s.order)))
}

/// Fraction-free variant: returns `(m, alpha, r)` with `r = m*s - alpha*p`,
/// `m > 0`, and the leading term cancelled.
pub fn linear_reduce_scaled(
    s: &Polynomial,
    p: &Polynomial,
) -> Result<(BigInt, BigInt, Polynomial), PolyError> {
    let (Some(ls), Some(lp)) = (s.lt(), p.lt()) else {
        return Err(PolyError::LeadingMismatch);
    };
    if !p.is_linear() || ls.mono != lp.mono {
        return Err(PolyError::LeadingMismatch);
    }
    let g = ls.coeff.gcd(&lp.coeff);
    let mut m = &lp.coeff / &g;
    let mut alpha = &ls.coeff / &g;
    if m.is_negative() {
        m = -m;
        alpha = -alpha;
    }
    let r = s.scale(&m).add_scaled(&-&alpha, &p.with_order(s.order));
    Ok((m, alpha, r))
}
