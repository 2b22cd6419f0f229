use std::cmp::Ordering;

use smallvec::SmallVec;

use super::VarId;

/// A squarefree monomial: a set of variables, stored in descending order,
/// plus a 64-bit signature for fast divisibility rejection.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    vars: SmallVec<[VarId; 4]>,
    mask: u64,
}

fn bit(v: VarId) -> u64 {
    1u64 << (v.0 % 64)
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(v: VarId) -> Self {
        Monomial {
            vars: SmallVec::from_slice(&[v]),
            mask: bit(v),
        }
    }

    /// Collapses repeated variables (`x*x = x`).
    pub fn from_vars(vars: impl IntoIterator<Item = VarId>) -> Self {
        let mut vs: SmallVec<[VarId; 4]> = vars.into_iter().collect();
        vs.sort_unstable_by(|a, b| b.cmp(a));
        vs.dedup();
        let mask = vs.iter().fold(0, |m, &v| m | bit(v));
        Monomial { vars: vs, mask }
    }

    /// Variables in descending order.
    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn degree(&self) -> usize {
        self.vars.len()
    }

    pub fn is_one(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn max_var(&self) -> Option<VarId> {
        self.vars.first().copied()
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.mask & bit(v) != 0 && self.vars.contains(&v)
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        if self.mask & !other.mask != 0 || self.vars.len() > other.vars.len() {
            return false;
        }
        let mut it = other.vars.iter();
        'outer: for v in &self.vars {
            for w in it.by_ref() {
                if w == v {
                    continue 'outer;
                }
                if w < v {
                    return false;
                }
            }
            return false;
        }
        true
    }

    pub fn is_disjoint(&self, other: &Monomial) -> bool {
        if self.mask & other.mask == 0 {
            return true;
        }
        let (mut i, mut j) = (0, 0);
        while i < self.vars.len() && j < other.vars.len() {
            match self.vars[i].cmp(&other.vars[j]) {
                Ordering::Equal => return false,
                Ordering::Greater => i += 1,
                Ordering::Less => j += 1,
            }
        }
        true
    }

    /// Product in the Boolean quotient ring, i.e. the union of the sets.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        if other.is_one() {
            return self.clone();
        }
        if self.is_one() {
            return other.clone();
        }
        let mut out = SmallVec::with_capacity(self.vars.len() + other.vars.len());
        let (a, b) = (&self.vars, &other.vars);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                Ordering::Greater => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Less => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial {
            vars: out,
            mask: self.mask | other.mask,
        }
    }

    /// Least common multiple; equal to [`Monomial::mul`] for squarefree sets.
    pub fn lcm(&self, other: &Monomial) -> Monomial {
        self.mul(other)
    }

    /// `self / d`, assuming `d` divides `self`.
    pub fn quotient(&self, d: &Monomial) -> Monomial {
        Monomial::from_sorted(self.vars.iter().copied().filter(|v| !d.contains(*v)))
    }

    pub fn without(&self, v: VarId) -> Monomial {
        Monomial::from_sorted(self.vars.iter().copied().filter(|&w| w != v))
    }

    fn from_sorted(vars: impl Iterator<Item = VarId>) -> Monomial {
        let vars: SmallVec<[VarId; 4]> = vars.collect();
        let mask = vars.iter().fold(0, |m, &v| m | bit(v));
        Monomial { vars, mask }
    }
}

/// Comparison regime. Variable rank is the [`VarId`] ordinal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize)]
pub enum MonomialOrder {
    /// Lexicographic: the largest variable decides first.
    Lex,
    /// Degree reverse lexicographic: degree first, then the monomial holding
    /// the smaller variable at the first difference from the bottom is smaller.
    #[default]
    DegRevLex,
}

impl MonomialOrder {
    pub fn cmp(self, a: &Monomial, b: &Monomial) -> Ordering {
        match self {
            MonomialOrder::Lex => a.vars.as_slice().cmp(b.vars.as_slice()),
            MonomialOrder::DegRevLex => a
                .vars
                .len()
                .cmp(&b.vars.len())
                .then_with(|| a.vars.iter().rev().cmp(b.vars.iter().rev())),
        }
    }

    /// A key whose plain lexicographic comparison agrees with [`Self::cmp`].
    pub fn sort_key(self, m: &Monomial) -> Vec<u32> {
        match self {
            MonomialOrder::Lex => m.vars.iter().map(|v| v.0).collect(),
            MonomialOrder::DegRevLex => std::iter::once(m.vars.len() as u32)
                .chain(m.vars.iter().rev().map(|v| v.0))
                .collect(),
        }
    }
}
