//! Classical Buchberger over the rationals with explicit exponent vectors.
//!
//! Slow and simple on purpose: it is the oracle the quotient-ring engine is
//! checked against. Field polynomials `x^2 - x` must be supplied explicitly.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::GbError;
use crate::poly::{Monomial, MonomialOrder, Polynomial, Term, VarId, VarTable};

pub type Exponents = Vec<u32>;

/// Compares exponent vectors indexed by variable rank.
pub fn cmp_exp(order: MonomialOrder, a: &[u32], b: &[u32]) -> Ordering {
    match order {
        MonomialOrder::Lex => a.iter().rev().cmp(b.iter().rev()),
        MonomialOrder::DegRevLex => {
            let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
            da.cmp(&db).then_with(|| {
                for (x, y) in a.iter().zip(b) {
                    if x != y {
                        // smaller exponent in the smallest differing variable wins
                        return y.cmp(x);
                    }
                }
                Ordering::Equal
            })
        }
    }
}

/// A polynomial with rational coefficients and explicit exponents, terms
/// strictly descending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefPoly {
    order: MonomialOrder,
    nvars: usize,
    terms: Vec<(Exponents, BigRational)>,
}

impl RefPoly {
    pub fn new(
        order: MonomialOrder,
        nvars: usize,
        mut terms: Vec<(Exponents, BigRational)>,
    ) -> Self {
        terms.sort_by(|x, y| cmp_exp(order, &y.0, &x.0));
        let mut out: Vec<(Exponents, BigRational)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            match out.last_mut() {
                Some(last) if last.0 == e => last.1 += c,
                _ => out.push((e, c)),
            }
        }
        out.retain(|t| !t.1.is_zero());
        RefPoly {
            order,
            nvars,
            terms: out,
        }
    }

    /// `x^2 - x`.
    pub fn field(nvars: usize, v: VarId) -> Self {
        let mut sq = vec![0; nvars];
        sq[v.0 as usize] = 2;
        let mut one = vec![0; nvars];
        one[v.0 as usize] = 1;
        RefPoly::new(
            MonomialOrder::DegRevLex,
            nvars,
            vec![(sq, BigRational::one()), (one, -BigRational::one())],
        )
    }

    pub fn from_poly(p: &Polynomial, nvars: usize) -> Self {
        let terms = p
            .terms()
            .iter()
            .map(|t| {
                let mut e = vec![0; nvars];
                for v in t.mono.vars() {
                    e[v.0 as usize] = 1;
                }
                (e, BigRational::from_integer(t.coeff.clone()))
            })
            .collect();
        RefPoly::new(p.order(), nvars, terms)
    }

    /// Collapses exponents and clears denominators (result is primitive).
    pub fn to_poly(&self) -> Polynomial {
        let lcm = self.terms.iter().fold(BigInt::one(), |acc, (_, c)| {
            num_integer::lcm(acc, c.denom().clone())
        });
        let p = Polynomial::from_terms(
            self.order,
            self.terms
                .iter()
                .map(|(e, c)| Term {
                    coeff: (c * BigRational::from_integer(lcm.clone())).to_integer(),
                    mono: Monomial::from_vars(
                        e.iter()
                            .enumerate()
                            .filter(|(_, &x)| x > 0)
                            .map(|(i, _)| VarId(i as u32)),
                    ),
                })
                .collect(),
        );
        p.primitive()
    }

    pub fn with_order(&self, order: MonomialOrder) -> Self {
        RefPoly::new(order, self.nvars, self.terms.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Exponents, BigRational)] {
        &self.terms
    }

    fn lm(&self) -> &Exponents {
        &self.terms[0].0
    }

    fn lc(&self) -> &BigRational {
        &self.terms[0].1
    }

    fn monic(&self) -> RefPoly {
        if self.is_zero() {
            return self.clone();
        }
        let c = self.lc().clone();
        RefPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, x)| (e.clone(), x / &c))
                .collect(),
            ..self.clone()
        }
    }

    /// `self - c * x^e * g`.
    fn sub_mul(&self, c: &BigRational, e: &[u32], g: &RefPoly) -> RefPoly {
        let mut terms = self.terms.clone();
        for (ge, gc) in &g.terms {
            let m: Exponents = ge.iter().zip(e).map(|(a, b)| a + b).collect();
            terms.push((m, -(c * gc)));
        }
        RefPoly::new(self.order, self.nvars, terms)
    }

    pub fn display<'a>(&'a self, table: &'a VarTable) -> impl fmt::Display + 'a {
        struct D<'a>(&'a RefPoly, &'a VarTable);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                if self.0.is_zero() {
                    return f.write_str("0");
                }
                for (k, (e, c)) in self.0.terms.iter().enumerate() {
                    if c.is_negative() {
                        f.write_str("-")?;
                    } else if k > 0 {
                        f.write_str("+")?;
                    }
                    let mag = c.abs();
                    let vars: Vec<String> = e
                        .iter()
                        .enumerate()
                        .rev()
                        .filter(|(_, &x)| x > 0)
                        .map(|(i, &x)| {
                            let n = self.1.name(VarId(i as u32));
                            if x == 1 {
                                n.to_string()
                            } else {
                                format!("{n}^{x}")
                            }
                        })
                        .collect();
                    if !mag.is_one() || vars.is_empty() {
                        write!(f, "{mag}")?;
                        if !vars.is_empty() {
                            f.write_str("*")?;
                        }
                    }
                    f.write_str(&vars.join("*"))?;
                }
                Ok(())
            }
        }
        D(self, table)
    }
}

fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn lcm_exp(a: &[u32], b: &[u32]) -> Exponents {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn coprime(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0)
}

/// Full remainder of `f` modulo `divisors`.
pub fn ref_reduce(f: &RefPoly, divisors: &[RefPoly]) -> RefPoly {
    let mut p = f.with_order(f.order);
    let mut rem = Vec::new();
    while !p.is_zero() {
        let (e, c) = p.terms[0].clone();
        match divisors
            .iter()
            .find(|g| !g.is_zero() && divides(g.lm(), &e))
        {
            Some(g) => {
                let q: Exponents = e.iter().zip(g.lm()).map(|(x, y)| x - y).collect();
                p = p.sub_mul(&(&c / g.lc()), &q, g);
            }
            None => {
                rem.push((e, c));
                p.terms.remove(0);
            }
        }
    }
    RefPoly::new(f.order, f.nvars, rem)
}

fn spoly(f: &RefPoly, g: &RefPoly) -> RefPoly {
    let l = lcm_exp(f.lm(), g.lm());
    let uf: Exponents = l.iter().zip(f.lm()).map(|(x, y)| x - y).collect();
    let ug: Exponents = l.iter().zip(g.lm()).map(|(x, y)| x - y).collect();
    let zero = RefPoly::new(f.order, f.nvars, Vec::new());
    zero.sub_mul(&-(BigRational::one() / f.lc()), &uf, f)
        .sub_mul(&(BigRational::one() / g.lc()), &ug, g)
}

/// Reduced Gröbner basis (monic, sorted ascending by leading monomial).
pub fn reference_buchberger(
    gens: &[RefPoly],
    order: MonomialOrder,
    max_pairs: u64,
) -> Result<Vec<RefPoly>, GbError> {
    let mut g: Vec<RefPoly> = gens
        .iter()
        .map(|p| p.with_order(order).monic())
        .filter(|p| !p.is_zero())
        .collect();
    let mut pending: BTreeSet<(usize, usize)> = BTreeSet::new();
    for j in 0..g.len() {
        for i in 0..j {
            pending.insert((i, j));
        }
    }
    let mut done: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut count = 0u64;
    while let Some(&(i, j)) = pending.iter().next() {
        pending.remove(&(i, j));
        done.insert((i, j));
        if coprime(g[i].lm(), g[j].lm()) {
            continue;
        }
        let l = lcm_exp(g[i].lm(), g[j].lm());
        let key = |a: usize, b: usize| (a.min(b), a.max(b));
        let chain = (0..g.len()).any(|k| {
            k != i
                && k != j
                && divides(g[k].lm(), &l)
                && !pending.contains(&key(i, k))
                && !pending.contains(&key(j, k))
        });
        if chain {
            continue;
        }
        count += 1;
        if count > max_pairs {
            return Err(GbError::ResourceLimit(format!(
                "more than {max_pairs} pairs"
            )));
        }
        let r = ref_reduce(&spoly(&g[i], &g[j]), &g);
        if !r.is_zero() {
            let k = g.len();
            g.push(r.monic());
            for i in 0..k {
                pending.insert((i, k));
            }
        }
    }
    // minimalize and tail-reduce
    let mut min: Vec<RefPoly> = Vec::new();
    for (k, p) in g.iter().enumerate() {
        let redundant = g
            .iter()
            .enumerate()
            .any(|(m, q)| m != k && divides(q.lm(), p.lm()) && (q.lm() != p.lm() || m < k));
        if !redundant {
            min.push(p.clone());
        }
    }
    let mut out = Vec::with_capacity(min.len());
    for k in 0..min.len() {
        let others: Vec<RefPoly> = min
            .iter()
            .enumerate()
            .filter(|(m, _)| *m != k)
            .map(|(_, q)| q.clone())
            .collect();
        out.push(ref_reduce(&min[k], &others).monic());
    }
    out.sort_by(|a, b| cmp_exp(order, a.lm(), b.lm()));
    Ok(out)
}

/// Field polynomials for every variable followed by `gens`.
pub fn with_field_polys(gens: &[Polynomial], nvars: usize, order: MonomialOrder) -> Vec<RefPoly> {
    (0..nvars as u32)
        .map(|v| RefPoly::field(nvars, VarId(v)).with_order(order))
        .chain(
            gens.iter()
                .map(|p| RefPoly::from_poly(&p.with_order(order), nvars)),
        )
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    const DRL: MonomialOrder = MonomialOrder::DegRevLex;

    #[test]
    fn field_polynomial_alone() {
        let b = reference_buchberger(&[RefPoly::field(1, VarId(0))], DRL, 100).unwrap();
        assert_eq!(b, vec![RefPoly::field(1, VarId(0))]);
    }

    #[test]
    fn and_gate_basis() {
        let t = VarTable::from_chain(&["a", "b", "g"]);
        let f = parse_poly("g-a*b", &t, DRL).unwrap();
        let b = reference_buchberger(&with_field_polys(&[f], 3, DRL), DRL, 1000).unwrap();
        let texts: Vec<String> = b.iter().map(|p| p.display(&t).to_string()).collect();
        for want in ["b*a-g", "g*a-g", "g*b-g"] {
            assert!(texts.iter().any(|s| s == want), "{texts:?}");
        }
    }

    #[test]
    fn exponent_orders_agree_with_squarefree_orders() {
        let n = 4;
        let mono = |s: u32| Monomial::from_vars((0..n).filter(|i| s >> i & 1 == 1).map(VarId));
        let exp = |s: u32| (0..n).map(|i| s >> i & 1).collect::<Vec<u32>>();
        for o in [MonomialOrder::Lex, DRL] {
            for a in 0..16 {
                for b in 0..16 {
                    assert_eq!(cmp_exp(o, &exp(a), &exp(b)), o.cmp(&mono(a), &mono(b)));
                }
            }
        }
    }
}
