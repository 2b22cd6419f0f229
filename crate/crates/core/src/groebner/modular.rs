//! Reduced Gröbner bases of vanishing ideals of finite sets of 0/1 points.
//!
//! The basis is computed with the Buchberger-Möller algorithm modulo
//! word-size primes and lifted to the integers by Chinese remaindering and
//! rational reconstruction. Lifted candidates must be certified by the
//! caller; [`vanishes`] and [`count_standard`] provide the exact checks.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, HashSet};
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{GbError, Limits};
use crate::poly::{Monomial, MonomialOrder, Polynomial, Term, VarId};

/// The largest primes below 2^31.
pub const PRIMES: [u32; 10] = [
    2147483647, 2147483629, 2147483587, 2147483579, 2147483563, 2147483549, 2147483543, 2147483497,
    2147483489, 2147483477,
];

type Coeff = u64;
/// Terms in descending order, coefficients in `1..p`.
type ModTerms = Vec<(Monomial, Coeff)>;

fn pow_mod(mut b: Coeff, mut e: Coeff, p: Coeff) -> Coeff {
    let mut r = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn inv_mod(a: Coeff, p: Coeff) -> Coeff {
    pow_mod(a, p - 2, p)
}

/// A finite set of points of `{0,1}^n`, stored column-wise: one bitset per
/// variable over the points.
#[derive(Debug, Clone)]
pub struct Points {
    len: usize,
    columns: Vec<Vec<u64>>,
}

impl Points {
    /// `rows[i][v]` is the value of variable `v` at point `i`.
    pub fn from_rows(nvars: usize, rows: &[Vec<bool>]) -> Self {
        let words = rows.len().div_ceil(64);
        let mut columns = vec![vec![0u64; words]; nvars];
        for (i, row) in rows.iter().enumerate() {
            for (v, &b) in row.iter().enumerate() {
                if b {
                    columns[v][i / 64] |= 1 << (i % 64);
                }
            }
        }
        Points {
            len: rows.len(),
            columns,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bitset of the points where `m` evaluates to 1.
    fn eval(&self, m: &Monomial) -> Vec<u64> {
        let words = self.len.div_ceil(64);
        let mut out = vec![u64::MAX; words];
        if !self.len.is_multiple_of(64) {
            out[words - 1] = (1u64 << (self.len % 64)) - 1;
        }
        for v in m.vars() {
            for (o, c) in out.iter_mut().zip(&self.columns[v.0 as usize]) {
                *o &= c;
            }
        }
        out
    }
}

fn bits(set: &[u64]) -> impl Iterator<Item = usize> + '_ {
    set.iter().enumerate().flat_map(|(w, &word)| {
        let mut x = word;
        std::iter::from_fn(move || {
            (x != 0).then(|| {
                let b = x.trailing_zeros() as usize;
                x &= x - 1;
                w * 64 + b
            })
        })
    })
}

/// Exact test that `f` is zero at every point.
pub fn vanishes(f: &Polynomial, points: &Points) -> bool {
    let small: Option<Vec<i64>> = f.terms().iter().map(|t| t.coeff.to_i64()).collect();
    match small {
        Some(cs) => {
            let mut acc = vec![0i128; points.len];
            for (t, c) in f.terms().iter().zip(cs) {
                for i in bits(&points.eval(&t.mono)) {
                    acc[i] += c as i128;
                }
            }
            acc.iter().all(|&a| a == 0)
        }
        None => {
            let mut acc = vec![BigInt::zero(); points.len];
            for t in f.terms() {
                for i in bits(&points.eval(&t.mono)) {
                    acc[i] += &t.coeff;
                }
            }
            acc.iter().all(Zero::is_zero)
        }
    }
}

/// Number of squarefree monomials in `vars` not divisible by any of `lms`,
/// or `None` once it exceeds `cap`.
pub fn count_standard(lms: &[Monomial], vars: &[VarId], cap: u64) -> Option<u64> {
    if lms.iter().any(Monomial::is_one) {
        return Some(0);
    }
    let mut count = 1u64;
    let mut stack = vec![(Monomial::one(), 0usize)];
    while let Some((m, from)) = stack.pop() {
        for (i, &x) in vars.iter().enumerate().skip(from) {
            let n = m.mul(&Monomial::var(x));
            if lms.iter().all(|l| !l.divides(&n)) {
                count += 1;
                if count > cap {
                    return None;
                }
                stack.push((n, i + 1));
            }
        }
    }
    Some(count)
}

struct Row {
    pivot: usize,
    values: Vec<Coeff>,
    /// coefficients over the standard monomials found so far
    tag: Vec<Coeff>,
}

/// Reduced Gröbner basis modulo `p` of the ideal of all polynomials in
/// `vars` vanishing on `points`, in the Boolean quotient ring. Members are
/// monic and come out ascending by leading monomial.
pub fn buchberger_moeller_mod(
    points: &Points,
    vars: &[VarId],
    order: MonomialOrder,
    p: u32,
    limits: &Limits,
) -> Result<Vec<ModTerms>, GbError> {
    let p = p as Coeff;
    let n = points.len;
    let mut basis: Vec<ModTerms> = Vec::new();
    let mut standard: Vec<Monomial> = Vec::new();
    let mut rows: Vec<Row> = Vec::new();
    let mut seen: HashSet<Monomial> = HashSet::from([Monomial::one()]);
    let mut pending = vec![Monomial::one()];
    let mut queue = BinaryHeap::from([Reverse((order.sort_key(&Monomial::one()), 0usize))]);
    let mut steps = 0u64;
    while let Some(Reverse((_, k))) = queue.pop() {
        let m = std::mem::take(&mut pending[k]);
        if basis.iter().any(|g| g[0].0.divides(&m)) {
            continue;
        }
        steps += 1;
        if steps.is_multiple_of(64) && limits.deadline.is_some_and(|d| Instant::now() > d) {
            return Err(GbError::ResourceLimit("time limit".into()));
        }
        let mut w = vec![0 as Coeff; n];
        for i in bits(&points.eval(&m)) {
            w[i] = 1;
        }
        let mut tag = vec![0 as Coeff; standard.len()];
        for r in &rows {
            let c = w[r.pivot];
            if c == 0 {
                continue;
            }
            let neg = p - c;
            for (x, y) in w.iter_mut().zip(&r.values).skip(r.pivot) {
                *x = (*x + neg * y) % p;
            }
            for (x, y) in tag.iter_mut().zip(&r.tag) {
                *x = (*x + neg * y) % p;
            }
        }
        match w.iter().position(|&x| x != 0) {
            None => {
                let mut g: ModTerms = vec![(m, 1)];
                g.extend(
                    (0..standard.len())
                        .rev()
                        .filter(|&j| tag[j] != 0)
                        .map(|j| (standard[j].clone(), tag[j])),
                );
                if (basis.len() as u64 + 1) * (n as u64 + 1) > limits.max_monomials {
                    return Err(GbError::ResourceLimit(format!(
                        "more than {} monomials",
                        limits.max_monomials
                    )));
                }
                basis.push(g);
            }
            Some(pivot) => {
                let inv = inv_mod(w[pivot], p);
                tag.push(1);
                for x in w.iter_mut().chain(tag.iter_mut()) {
                    *x = *x * inv % p;
                }
                rows.push(Row {
                    pivot,
                    values: w,
                    tag,
                });
                for &x in vars {
                    if !m.contains(x) {
                        let next = m.mul(&Monomial::var(x));
                        if seen.insert(next.clone()) {
                            queue.push(Reverse((order.sort_key(&next), pending.len())));
                            pending.push(next);
                        }
                    }
                }
                standard.push(m);
            }
        }
    }
    Ok(basis)
}

/// `n/d` with `a = n/d mod m` and `|n|, d <= sqrt(m/2)`.
pub fn rational_reconstruction(a: &BigInt, m: &BigInt) -> Option<(BigInt, BigInt)> {
    let bound = (m / 2u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let t2 = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound || !r1.gcd(&t1).is_one() {
        return None;
    }
    if t1.is_negative() {
        Some((-r1, -t1))
    } else {
        Some((r1, t1))
    }
}

/// Residues of one basis across several primes.
struct Accumulator {
    modulus: BigInt,
    polys: Vec<HashMap<Monomial, BigInt>>,
    primes: usize,
}

impl Accumulator {
    fn new(basis: &[ModTerms], p: u32) -> Self {
        Accumulator {
            modulus: BigInt::from(p),
            polys: basis
                .iter()
                .map(|f| {
                    f.iter()
                        .map(|(m, c)| (m.clone(), BigInt::from(*c)))
                        .collect()
                })
                .collect(),
            primes: 1,
        }
    }

    fn add(&mut self, basis: &[ModTerms], p: u32) {
        let pb = BigInt::from(p);
        let minv = BigInt::from(inv_mod(
            (&self.modulus % &pb).to_u64().expect("below p"),
            p as Coeff,
        ));
        for (acc, f) in self.polys.iter_mut().zip(basis) {
            let new: HashMap<&Monomial, Coeff> = f.iter().map(|(m, c)| (m, *c)).collect();
            let mut monos: Vec<Monomial> = acc.keys().cloned().collect();
            monos.extend(
                new.keys()
                    .filter(|m| !acc.contains_key(*m))
                    .map(|m| (*m).clone()),
            );
            for m in monos {
                let r1 = acc.get(&m).cloned().unwrap_or_default();
                let r2 = BigInt::from(new.get(&m).copied().unwrap_or(0));
                let k = ((r2 - &r1) * &minv).mod_floor(&pb);
                acc.insert(m, r1 + &self.modulus * k);
            }
        }
        self.modulus *= pb;
        self.primes += 1;
    }

    fn reconstruct(&self, order: MonomialOrder) -> Option<Vec<Polynomial>> {
        self.polys
            .iter()
            .map(|f| {
                let mut fracs = Vec::with_capacity(f.len());
                for (m, a) in f {
                    if a.is_zero() {
                        continue;
                    }
                    let (n, d) = rational_reconstruction(a, &self.modulus)?;
                    fracs.push((m.clone(), n, d));
                }
                let l = fracs
                    .iter()
                    .fold(BigInt::one(), |acc, (_, _, d)| acc.lcm(d));
                let terms = fracs
                    .into_iter()
                    .map(|(mono, n, d)| Term {
                        coeff: n * (&l / d),
                        mono,
                    })
                    .collect();
                Some(Polynomial::from_terms(order, terms).primitive())
            })
            .collect()
    }
}

/// Integer reduced Gröbner basis of the vanishing ideal of `points`, by
/// multi-modular Buchberger-Möller. After each prime the accumulated
/// residues are reconstructed and handed to `certify`; the first accepted
/// candidate is returned, ascending by leading monomial. `None` if nothing
/// was accepted within `max_primes` primes.
pub fn vanishing_ideal_basis(
    points: &Points,
    vars: &[VarId],
    order: MonomialOrder,
    limits: &Limits,
    max_primes: usize,
    certify: &mut dyn FnMut(&[Polynomial]) -> bool,
) -> Result<Option<Vec<Polynomial>>, GbError> {
    let mut groups: Vec<(Vec<Monomial>, Accumulator)> = Vec::new();
    for &p in PRIMES.iter().take(max_primes) {
        let basis = buchberger_moeller_mod(points, vars, order, p, limits)?;
        let lms: Vec<Monomial> = basis.iter().map(|f| f[0].0.clone()).collect();
        let idx = match groups.iter().position(|(l, _)| *l == lms) {
            Some(i) => {
                groups[i].1.add(&basis, p);
                i
            }
            None => {
                groups.push((lms, Accumulator::new(&basis, p)));
                groups.len() - 1
            }
        };
        let best = groups.iter().map(|g| g.1.primes).max().unwrap_or(0);
        if groups[idx].1.primes < best {
            continue;
        }
        if let Some(candidate) = groups[idx].1.reconstruct(order) {
            if certify(&candidate) {
                return Ok(Some(candidate));
            }
        }
    }
    Ok(None)
}

/// Zero set in `{0,1}^n` of a system in which `defs[v]` reads `c*v + r`
/// with a nonzero constant `c`, `v` absent from `r`, and the definitions
/// acyclic. Variables without a definition range freely. `None` if the
/// system has another shape or more than `max_free` free variables.
pub fn circuit_points(
    defs: &BTreeMap<VarId, Polynomial>,
    max_free: usize,
) -> Option<(Points, Vec<VarId>)> {
    let mut coeff = BTreeMap::new();
    let mut vars: BTreeSet<VarId> = defs.keys().copied().collect();
    for (v, p) in defs {
        let x = Monomial::var(*v);
        let c = p.terms().iter().find(|t| t.mono == x)?.coeff.clone();
        if p.terms().iter().any(|t| t.mono != x && t.mono.contains(*v)) {
            return None;
        }
        coeff.insert(*v, c);
        vars.extend(p.vars());
    }
    let free: Vec<VarId> = vars
        .iter()
        .copied()
        .filter(|v| !defs.contains_key(v))
        .collect();
    if free.len() > max_free {
        return None;
    }
    // definitions in dependency order; `false` marks a node on the stack
    let mut topo = Vec::with_capacity(defs.len());
    let mut state: BTreeMap<VarId, bool> = BTreeMap::new();
    for &root in defs.keys() {
        let mut stack = vec![(root, false)];
        while let Some((v, expanded)) = stack.pop() {
            if expanded {
                state.insert(v, true);
                topo.push(v);
                continue;
            }
            if state.contains_key(&v) {
                continue;
            }
            state.insert(v, false);
            stack.push((v, true));
            for w in defs[&v].vars() {
                if w != v && defs.contains_key(&w) {
                    match state.get(&w) {
                        Some(false) => return None,
                        Some(true) => {}
                        None => stack.push((w, false)),
                    }
                }
            }
        }
    }
    let nvars = vars.last().map_or(0, |v| v.0 as usize + 1);
    let mut rows = Vec::with_capacity(1 << free.len());
    'points: for bits in 0u64..1 << free.len() {
        let mut row = vec![false; nvars];
        for (i, v) in free.iter().enumerate() {
            row[v.0 as usize] = bits >> i & 1 == 1;
        }
        for v in &topo {
            let rest = -defs[v].eval(|x| x != *v && row[x.0 as usize]);
            if rest == coeff[v] {
                row[v.0 as usize] = true;
            } else if !rest.is_zero() {
                continue 'points;
            }
        }
        rows.push(row);
    }
    Some((Points::from_rows(nvars, &rows), vars.into_iter().collect()))
}

/// Exact check that `g` is the Gröbner basis of the vanishing ideal of
/// `points`. That ideal contains the field polynomials, so it is radical
/// and its quotient has dimension `|points|`. If every member vanishes on
/// the points, `<g>` lies inside it; if moreover `lm(g)` leaves exactly
/// `|points|` standard monomials, the staircase of `<g>` cannot be smaller,
/// so `g` is a basis and `<g>` is the whole ideal.
pub fn certify(points: &Points, vars: &[VarId], g: &[Polynomial]) -> bool {
    let lms: Vec<Monomial> = g.iter().filter_map(|f| f.lm().cloned()).collect();
    let target = points.len() as u64;
    count_standard(&lms, vars, target) == Some(target) && g.iter().all(|f| vanishes(f, points))
}

/// Certified reduced Gröbner basis of `<defs> + <x^2 - x>`, interpolated
/// from the zero set. `None` when [`circuit_points`] does not apply or no
/// lifted candidate could be certified.
pub fn circuit_basis(
    defs: &BTreeMap<VarId, Polynomial>,
    order: MonomialOrder,
    limits: &Limits,
    max_free: usize,
) -> Result<Option<Vec<Polynomial>>, GbError> {
    let Some((points, vars)) = circuit_points(defs, max_free) else {
        return Ok(None);
    };
    vanishing_ideal_basis(&points, &vars, order, limits, PRIMES.len(), &mut |g| {
        certify(&points, &vars, g)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groebner::{buchberger, same_ideal};
    use crate::poly::{parse_poly, VarTable};

    const DRL: MonomialOrder = MonomialOrder::DegRevLex;

    fn is_prime(n: u64) -> bool {
        n >= 2
            && (2..)
                .take_while(|d| d * d <= n)
                .all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn primes_are_prime() {
        assert!(PRIMES.iter().all(|&p| is_prime(p as u64)));
    }

    #[test]
    fn reconstruction() {
        let m = BigInt::from(PRIMES[0]);
        let half = BigInt::from(inv_mod(2, PRIMES[0] as u64));
        assert_eq!(
            rational_reconstruction(&half, &m),
            Some((BigInt::one(), BigInt::from(2)))
        );
        let minus_three_halves = (&m - BigInt::from(3)) * &half % &m;
        assert_eq!(
            rational_reconstruction(&minus_three_halves, &m),
            Some((BigInt::from(-3), BigInt::from(2)))
        );
        assert_eq!(
            rational_reconstruction(&BigInt::from(7), &m),
            Some((BigInt::from(7), BigInt::one()))
        );
    }

    #[test]
    fn standard_monomial_count() {
        let t = VarTable::from_chain(&["a", "b", "c"]);
        let vars: Vec<VarId> = t.vars().collect();
        let ab = Monomial::from_vars([t.get("a").unwrap(), t.get("b").unwrap()]);
        assert_eq!(count_standard(&[], &vars, 100), Some(8));
        assert_eq!(count_standard(&[ab], &vars, 100), Some(6));
        assert_eq!(
            count_standard(&[Monomial::var(t.get("c").unwrap())], &vars, 3),
            None
        );
        assert_eq!(count_standard(&[Monomial::one()], &vars, 100), Some(0));
    }

    #[test]
    fn basis_of_circuit_points() {
        // x = a*b, y = !(a*c), z = x*y
        let t = VarTable::from_chain(&["a", "b", "c", "x", "y", "z"]);
        let gens: Vec<Polynomial> = ["x-b*a", "y+c*a-1", "z-y*x"]
            .iter()
            .map(|s| parse_poly(s, &t, DRL).unwrap())
            .collect();
        let rows: Vec<Vec<bool>> = (0..8u32)
            .map(|i| {
                let (a, b, c) = (i & 1 == 1, i & 2 == 2, i & 4 == 4);
                let (x, y) = (a && b, !(a && c));
                vec![a, b, c, x, y, x && y]
            })
            .collect();
        let points = Points::from_rows(t.len(), &rows);
        let vars: Vec<VarId> = t.vars().collect();
        let exact = buchberger(&gens, DRL, &Limits::default()).unwrap();
        let lifted = vanishing_ideal_basis(&points, &vars, DRL, &Limits::default(), 3, &mut |c| {
            c.iter().all(|f| vanishes(f, &points))
        })
        .unwrap()
        .expect("certified");
        assert!(same_ideal(&lifted, exact.polys()));
        assert_eq!(lifted.len(), exact.polys().len());
        let lms: Vec<Monomial> = lifted.iter().map(|f| f.lm().unwrap().clone()).collect();
        assert_eq!(count_standard(&lms, &vars, 100), Some(8));
    }

    #[test]
    fn vanishing_is_exact() {
        let t = VarTable::from_chain(&["a", "b"]);
        let points = Points::from_rows(t.len(), &[vec![false, false], vec![true, true]]);
        assert!(vanishes(&parse_poly("b-a", &t, DRL).unwrap(), &points));
        assert!(!vanishes(&parse_poly("b*a-a+1", &t, DRL).unwrap(), &points));
        let big = parse_poly("100000000000000000000*b-100000000000000000000*a", &t, DRL).unwrap();
        assert!(vanishes(&big, &points));
    }
}
