//! Buchberger's algorithm in the Boolean quotient ring `Z[X]/<x^2 - x>`.
//!
//! Field polynomials are never stored. Their S-pairs with a basis member
//! `f` are the Boolean pairs `(x - 1) * tail(f)` for `x` in `lm(f)`.
//! Coefficients stay integral: reductions are fraction-free and every
//! stored polynomial is primitive with a positive leading coefficient.

pub mod modular;
pub mod reference;

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};
use std::fmt::Write;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::poly::{
    parse_poly, reduce, Monomial, MonomialOrder, ParseError, Polynomial, Term, VarId, VarTable,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GbError {
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
}

/// Budgets for one basis computation.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub max_pairs: u64,
    pub max_monomials: u64,
    pub deadline: Option<Instant>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_pairs: 1_000_000,
            max_monomials: 10_000_000,
            deadline: None,
        }
    }
}

pub(crate) const DEADLINE_CHECK_EVERY: u64 = 32;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GbStats {
    pub pairs: u64,
    pub boolean_pairs: u64,
    pub chain_skipped: u64,
    pub product_skipped: u64,
    pub zero_reductions: u64,
}

#[derive(Debug, Clone)]
pub struct GroebnerBasis {
    polys: Vec<Polynomial>,
    order: MonomialOrder,
    stats: GbStats,
}

impl GroebnerBasis {
    /// Members sorted ascending by leading monomial.
    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn into_polys(self) -> Vec<Polynomial> {
        self.polys
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn stats(&self) -> &GbStats {
        &self.stats
    }

    /// Whether the ideal is the whole ring.
    pub fn is_trivial(&self) -> bool {
        self.polys.iter().any(|p| p.is_constant() && !p.is_zero())
    }

    /// Members of degree at most one, in basis order.
    pub fn linear_subset(&self) -> Vec<Polynomial> {
        linear_subset(&self.polys)
    }

    pub fn reduce(&self, f: &Polynomial) -> Polynomial {
        reduce(f, &self.polys)
    }
}

pub fn linear_subset(polys: &[Polynomial]) -> Vec<Polynomial> {
    polys.iter().filter(|p| p.degree() <= 1).cloned().collect()
}

/// Integral S-polynomial `lc(g) * (L/lm f) * f - lc(f) * (L/lm g) * g`
/// (cofactors divided by their gcd).
pub fn spolynomial(f: &Polynomial, g: &Polynomial) -> Polynomial {
    let (Some(tf), Some(tg)) = (f.lt(), g.lt()) else {
        return Polynomial::zero(f.order());
    };
    let l = tf.mono.lcm(&tg.mono);
    let gcd = tf.coeff.gcd(&tg.coeff);
    let (cf, cg) = (&tg.coeff / &gcd, &tf.coeff / &gcd);
    f.mul_term(&cf, &l.quotient(&tf.mono))
        .sub(&g.mul_term(&cg, &l.quotient(&tg.mono)))
}

/// `asc - desc`, where `asc` is sorted ascending and `desc` descending;
/// the result is ascending.
fn merge_ascending(order: MonomialOrder, asc: Vec<Term>, desc: Vec<Term>) -> Vec<Term> {
    let mut out = Vec::with_capacity(asc.len() + desc.len());
    let mut a = asc.into_iter().peekable();
    let mut b = desc.into_iter().rev().peekable();
    loop {
        let ord = match (a.peek(), b.peek()) {
            (Some(x), Some(y)) => order.cmp(&x.mono, &y.mono),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => break,
        };
        match ord {
            Ordering::Less => out.push(a.next().expect("peeked")),
            Ordering::Greater => {
                let t = b.next().expect("peeked");
                out.push(Term {
                    coeff: -t.coeff,
                    mono: t.mono,
                });
            }
            Ordering::Equal => {
                let x = a.next().expect("peeked");
                let y = b.next().expect("peeked");
                let c = x.coeff - y.coeff;
                if !c.is_zero() {
                    out.push(Term {
                        coeff: c,
                        mono: x.mono,
                    });
                }
            }
        }
    }
    out
}

/// `(x - 1) * tail(f)`, the reduced S-polynomial of `f` with `x^2 - x`.
pub fn boolean_pair(f: &Polynomial, x: VarId) -> Polynomial {
    let tail = f.tail();
    tail.mul_term(&BigInt::one(), &Monomial::var(x)).sub(&tail)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Pair {
    Classic(usize, usize),
    Boolean(usize, VarId),
}

struct Engine {
    order: MonomialOrder,
    limits: Limits,
    basis: Vec<Polynomial>,
    alive: Vec<bool>,
    queue: BinaryHeap<Reverse<(Vec<u32>, u64, Pair)>>,
    done: HashSet<(usize, usize)>,
    seq: u64,
    stats: GbStats,
    trivial: bool,
    /// total terms of the live members
    live_size: usize,
}

impl Engine {
    fn check_size(&self, extra: usize) -> Result<(), GbError> {
        let total = extra + self.live_size;
        if total as u64 > self.limits.max_monomials {
            return Err(GbError::ResourceLimit(format!(
                "more than {} monomials",
                self.limits.max_monomials
            )));
        }
        Ok(())
    }

    /// A live member whose leading monomial divides `m`, preferring unit
    /// leading coefficients and then short polynomials to limit
    /// coefficient growth.
    fn divisor(&self, m: &Monomial, skip: Option<usize>) -> Option<usize> {
        let mut best: Option<(bool, usize, usize)> = None;
        for i in 0..self.basis.len() {
            if !self.alive[i] || Some(i) == skip {
                continue;
            }
            let g = &self.basis[i];
            if !g.lm().is_some_and(|l| l.divides(m)) {
                continue;
            }
            let key = (!g.lc().is_some_and(|c| c.magnitude().is_one()), g.size(), i);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
        best.map(|b| b.2)
    }

    /// Full fraction-free normal form modulo the live members.
    fn normal_form(&self, f: Polynomial, skip: Option<usize>) -> Result<Polynomial, GbError> {
        let order = self.order;
        // ascending, so the leading term is at the end
        let mut p = f.into_terms();
        p.reverse();
        let mut rem: Vec<Term> = Vec::new();
        let mut steps = 0u32;
        while let Some(lt) = p.pop() {
            let Some(i) = self.divisor(&lt.mono, skip) else {
                rem.push(lt);
                continue;
            };
            let g = &self.basis[i];
            let glc = g.lc().expect("nonzero");
            let u = lt.mono.quotient(g.lm().expect("nonzero"));
            let gcd = lt.coeff.gcd(glc);
            let a = glc / &gcd;
            let c = &lt.coeff / &gcd;
            if !a.is_one() {
                for t in p.iter_mut().chain(rem.iter_mut()) {
                    t.coeff *= &a;
                }
            }
            let sub = g.tail().mul_term(&c, &u);
            p = merge_ascending(order, p, sub.into_terms());
            steps += 1;
            if steps.is_multiple_of(16) {
                let content = rem
                    .iter()
                    .chain(&p)
                    .fold(BigInt::zero(), |acc, t| acc.gcd(&t.coeff));
                if content > BigInt::one() {
                    for t in p.iter_mut().chain(rem.iter_mut()) {
                        t.coeff = &t.coeff / &content;
                    }
                }
                self.check_size(p.len() + rem.len())?;
            }
        }
        Ok(Polynomial::from_terms(order, rem))
    }

    fn push(&mut self, key: &Monomial, pair: Pair) {
        self.seq += 1;
        self.queue
            .push(Reverse((self.order.sort_key(key), self.seq, pair)));
    }

    fn insert(&mut self, h: Polynomial, todo: &mut Vec<Polynomial>) -> Result<(), GbError> {
        let h = h.primitive();
        if h.is_constant() {
            self.trivial = true;
            self.basis = vec![Polynomial::constant(self.order, 1)];
            self.alive = vec![true];
            return Ok(());
        }
        let k = self.basis.len();
        let lm = h.lm().expect("nonzero").clone();
        for i in 0..k {
            if self.alive[i] && lm.divides(self.basis[i].lm().expect("nonzero")) {
                self.alive[i] = false;
                self.live_size -= self.basis[i].size();
                todo.push(self.basis[i].clone());
            }
        }
        self.live_size += h.size();
        self.basis.push(h);
        self.alive.push(true);
        // keep tails reduced; leading monomials do not change
        for i in 0..k {
            if self.alive[i]
                && self.basis[i].terms()[1..]
                    .iter()
                    .any(|t| lm.divides(&t.mono))
            {
                let r = self
                    .normal_form(self.basis[i].clone(), Some(i))?
                    .primitive();
                self.live_size = self.live_size - self.basis[i].size() + r.size();
                self.basis[i] = r;
            }
        }
        for i in 0..k {
            if self.alive[i] {
                let l = self.basis[i].lm().expect("nonzero").lcm(&lm);
                self.push(&l, Pair::Classic(i, k));
            }
        }
        if self.basis[k].size() > 1 {
            for &x in lm.vars() {
                self.push(&lm, Pair::Boolean(k, x));
            }
        }
        Ok(())
    }

    fn chain_criterion(&self, i: usize, j: usize, l: &Monomial) -> bool {
        let key = |a: usize, b: usize| (a.min(b), a.max(b));
        (0..self.basis.len()).any(|k| {
            k != i
                && k != j
                && self.alive[k]
                && self.basis[k].lm().is_some_and(|m| m.divides(l))
                && self.done.contains(&key(i, k))
                && self.done.contains(&key(j, k))
        })
    }

    fn run(&mut self, gens: &[Polynomial]) -> Result<(), GbError> {
        let mut todo: Vec<Polynomial> = gens
            .iter()
            .filter(|g| !g.is_zero())
            .map(|g| g.with_order(self.order))
            .collect();
        todo.reverse();
        let mut processed = 0u64;
        loop {
            while let Some(f) = todo.pop() {
                let r = self.normal_form(f, None)?;
                if !r.is_zero() {
                    self.insert(r, &mut todo)?;
                    if self.trivial {
                        return Ok(());
                    }
                }
            }
            let Some(Reverse((_, _, pair))) = self.queue.pop() else {
                break;
            };
            let s = match pair {
                Pair::Classic(i, j) => {
                    if !self.alive[i] || !self.alive[j] {
                        continue;
                    }
                    self.done.insert((i, j));
                    let (mi, mj) = (
                        self.basis[i].lm().expect("nonzero"),
                        self.basis[j].lm().expect("nonzero"),
                    );
                    if mi.is_disjoint(mj) {
                        self.stats.product_skipped += 1;
                        continue;
                    }
                    let l = mi.lcm(mj);
                    if self.chain_criterion(i, j, &l) {
                        self.stats.chain_skipped += 1;
                        continue;
                    }
                    self.stats.pairs += 1;
                    spolynomial(&self.basis[i], &self.basis[j])
                }
                Pair::Boolean(i, x) => {
                    if !self.alive[i] {
                        continue;
                    }
                    self.stats.boolean_pairs += 1;
                    boolean_pair(&self.basis[i], x)
                }
            };
            processed += 1;
            if processed > self.limits.max_pairs {
                return Err(GbError::ResourceLimit(format!(
                    "more than {} pairs",
                    self.limits.max_pairs
                )));
            }
            if processed.is_multiple_of(DEADLINE_CHECK_EVERY) {
                if let Some(d) = self.limits.deadline {
                    if Instant::now() > d {
                        return Err(GbError::ResourceLimit("time limit".into()));
                    }
                }
            }
            let r = self.normal_form(s, None)?;
            if r.is_zero() {
                self.stats.zero_reductions += 1;
            } else {
                self.check_size(r.size())?;
                self.insert(r, &mut todo)?;
                if self.trivial {
                    return Ok(());
                }
            }
        }
        Ok(())
    }

    /// Tail-reduces every live member by the others.
    fn interreduce(&mut self) -> Result<Vec<Polynomial>, GbError> {
        let live: Vec<usize> = (0..self.basis.len()).filter(|&i| self.alive[i]).collect();
        let mut out = Vec::with_capacity(live.len());
        for &i in &live {
            let r = self.normal_form(self.basis[i].clone(), Some(i))?;
            out.push(r.primitive());
        }
        let order = self.order;
        out.sort_by(|a, b| order.cmp(a.lm().expect("nonzero"), b.lm().expect("nonzero")));
        Ok(out)
    }
}

/// Gröbner basis of `<gens> + <x^2 - x : x>` under `order`, inter-reduced,
/// members primitive with positive leading coefficient and sorted ascending
/// by leading monomial.
pub fn buchberger(
    gens: &[Polynomial],
    order: MonomialOrder,
    limits: &Limits,
) -> Result<GroebnerBasis, GbError> {
    let mut e = Engine {
        order,
        limits: *limits,
        basis: Vec::new(),
        alive: Vec::new(),
        queue: BinaryHeap::new(),
        done: HashSet::new(),
        seq: 0,
        stats: GbStats::default(),
        trivial: false,
        live_size: 0,
    };
    e.run(gens)?;
    let polys = if e.trivial {
        e.basis.clone()
    } else {
        e.interreduce()?
    };
    Ok(GroebnerBasis {
        polys,
        order,
        stats: e.stats,
    })
}

/// Whether every S-pair and Boolean pair of `g` reduces to zero.
pub fn is_groebner(g: &[Polynomial], order: MonomialOrder) -> bool {
    let g: Vec<Polynomial> = g
        .iter()
        .filter(|p| !p.is_zero())
        .map(|p| p.with_order(order))
        .collect();
    for (i, f) in g.iter().enumerate() {
        for h in &g[i + 1..] {
            if !reduce(&spolynomial(f, h), &g).is_zero() {
                return false;
            }
        }
        for &x in f.lm().expect("nonzero").vars() {
            if !reduce(&boolean_pair(f, x), &g).is_zero() {
                return false;
            }
        }
    }
    true
}

/// One polynomial per line as `gb[i]=<poly>`, numbered from 1.
pub fn format_basis(polys: &[Polynomial], table: &VarTable) -> String {
    let mut s = String::new();
    for (i, p) in polys.iter().enumerate() {
        let _ = writeln!(s, "gb[{}]={}", i + 1, p.display(table));
    }
    s
}

/// Inverse of [`format_basis`]; blank lines are skipped and the `gb[i]=`
/// prefix is optional.
pub fn parse_basis(
    text: &str,
    table: &VarTable,
    order: MonomialOrder,
) -> Result<Vec<Polynomial>, ParseError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            let body = match l.find('=') {
                Some(k) if l.starts_with("gb[") => &l[k + 1..],
                _ => l,
            };
            parse_poly(body, table, order)
        })
        .collect()
}

/// Mutual reduction to zero: every member of each set reduces to zero modulo
/// the other. Both must be Gröbner bases for this to decide ideal equality.
pub fn same_ideal(a: &[Polynomial], b: &[Polynomial]) -> bool {
    a.iter().all(|p| reduce(p, b).is_zero()) && b.iter().all(|p| reduce(p, a).is_zero())
}

/// Content-free sign-normalized copy, used when comparing bases.
pub fn normalized(p: &Polynomial) -> Polynomial {
    let q = p.primitive();
    if q.lc().is_some_and(|c| c.is_negative()) {
        q.neg()
    } else {
        q
    }
}
