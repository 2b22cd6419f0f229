//! Circuit rewriting before the main loop: merging nodes with equal inputs,
//! eliminating positive nodes and propagating equivalent nodes. Every rewrite
//! adds a multiple of an ideal member, so the ideal is preserved.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::encode::PolySystem;
use crate::poly::{Monomial, MonomialOrder, Polynomial, Term, VarId};

const LEX: MonomialOrder = MonomialOrder::Lex;

/// Polynomials keyed by leading variable, all under LEX.
pub type PolyMap = BTreeMap<VarId, Polynomial>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PreprocessStats {
    pub merged_nodes: usize,
    pub positive_nodes_eliminated: usize,
    pub equiv_propagations: usize,
}

/// The single degree-2 monomial of a quadratic polynomial with one
/// non-linear term, with its coefficient.
fn sole_quadratic(p: &Polynomial) -> Option<(&Monomial, &BigInt)> {
    let mut it = p.terms().iter().filter(|t| t.mono.degree() >= 2);
    let t = it.next()?;
    (t.mono.degree() == 2 && it.next().is_none()).then_some((&t.mono, &t.coeff))
}

/// Cancels the quadratic term of every polynomial that shares it with a
/// polynomial of smaller leading variable. Returns the number of merges.
pub fn merge_equal_inputs(polys: &mut PolyMap) -> usize {
    let mut groups: HashMap<Monomial, Vec<VarId>> = HashMap::new();
    for (&v, p) in polys.iter() {
        if let Some((m, _)) = sole_quadratic(p) {
            groups.entry(m.clone()).or_default().push(v);
        }
    }
    let mut merged = 0;
    for (m, mut vs) in groups {
        if vs.len() < 2 {
            continue;
        }
        vs.sort();
        let small = polys[&vs[0]].clone();
        let cs = small.coeff_of(&m);
        for &v in &vs[1..] {
            let p = &polys[&v];
            let cl = p.coeff_of(&m);
            let g = cs.gcd(&cl);
            let mut q = p.scale(&(&cs / &g)).sub(&small.scale(&(&cl / &g)));
            if q.lc().is_some_and(|c| c.is_negative()) {
                q = q.neg();
            }
            polys.insert(v, q);
            merged += 1;
        }
    }
    merged
}

/// Drops every monomial divisible by `x * y` for the given vanishing
/// products. Returns the number of removed terms.
pub fn erase_zero_products(polys: &mut PolyMap, pairs: &[(VarId, VarId)]) -> usize {
    if pairs.is_empty() {
        return 0;
    }
    let zero: Vec<Monomial> = pairs
        .iter()
        .map(|&(x, y)| Monomial::from_vars([x, y]))
        .collect();
    let mut removed = 0;
    for p in polys.values_mut() {
        if p.terms()
            .iter()
            .any(|t| t.mono.degree() >= 2 && zero.iter().any(|z| z.divides(&t.mono)))
        {
            let keep: Vec<Term> = p
                .terms()
                .iter()
                .filter(|t| !zero.iter().any(|z| z.divides(&t.mono)))
                .cloned()
                .collect();
            removed += p.size() - keep.len();
            *p = Polynomial::from_terms(LEX, keep);
        }
    }
    removed
}

/// `sigma -> e` for polynomials that are exactly `e - sigma` with `sigma`
/// quadratic.
fn pure_products(polys: &PolyMap, skip: &BTreeSet<VarId>) -> HashMap<Monomial, VarId> {
    let mut out = HashMap::new();
    for (&e, p) in polys {
        if skip.contains(&e) {
            continue;
        }
        if let [lead, tail] = p.terms() {
            if lead.mono == Monomial::var(e)
                && lead.coeff.is_one()
                && tail.coeff == -BigInt::one()
                && tail.mono.degree() == 2
            {
                out.entry(tail.mono.clone()).or_insert(e);
            }
        }
    }
    out
}

/// Replaces sub-products `sigma` of each monomial by `e` when `e - sigma`
/// is in the system and `e` ranks below `parent`.
fn refold(p: &Polynomial, parent: VarId, products: &HashMap<Monomial, VarId>) -> Polynomial {
    let mut changed = false;
    let terms: Vec<Term> = p
        .terms()
        .iter()
        .map(|t| {
            let mut m = t.mono.clone();
            'again: loop {
                if m.degree() < 2 {
                    break;
                }
                let vs = m.vars().to_vec();
                for i in 0..vs.len() {
                    for j in i + 1..vs.len() {
                        let sigma = Monomial::from_vars([vs[i], vs[j]]);
                        if let Some(&e) = products.get(&sigma) {
                            if e < parent {
                                m = m.quotient(&sigma).mul(&Monomial::var(e));
                                changed = true;
                                continue 'again;
                            }
                        }
                    }
                }
                break;
            }
            Term {
                coeff: t.coeff.clone(),
                mono: m,
            }
        })
        .collect();
    if changed {
        Polynomial::from_terms(LEX, terms)
    } else {
        p.clone()
    }
}

/// Substitutes the tail of every eligible positive node into its users.
/// `candidates` come from the AIG's fanout polarities; nodes in `protected`
/// (those the specification refers to) are skipped. Eliminated polynomials
/// stay in the map. Returns the number of eliminated nodes.
pub fn eliminate_positive_nodes(
    polys: &mut PolyMap,
    candidates: &BTreeSet<VarId>,
    protected: &BTreeSet<VarId>,
    eliminated: &mut BTreeSet<VarId>,
) -> usize {
    let mut count = 0;
    for &v in candidates {
        if protected.contains(&v) || eliminated.contains(&v) {
            continue;
        }
        let Some(p) = polys.get(&v) else { continue };
        if p.lm() != Some(&Monomial::var(v)) || !p.lc().is_some_and(|c| c.is_one()) {
            continue;
        }
        let value = Polynomial::var(LEX, v).sub(p);
        let users: Vec<VarId> = polys
            .iter()
            .filter(|(&w, q)| w != v && q.contains_var(v))
            .map(|(&w, _)| w)
            .collect();
        eliminated.insert(v);
        let products = pure_products(polys, eliminated);
        for w in users {
            let q = polys[&w].substitute(v, &value);
            polys.insert(w, refold(&q, w, &products));
        }
        count += 1;
    }
    count
}

/// `l_i -> value` when the polynomial of `l_i` has the shape `l_i - l_j`,
/// `l_i + l_j - 1`, `l_i` or `l_i - 1`.
fn equivalence(v: VarId, p: &Polynomial) -> Option<Polynomial> {
    let lead = p.terms().first()?;
    if lead.mono != Monomial::var(v) || !lead.coeff.is_one() || p.size() > 3 {
        return None;
    }
    let rest = &p.terms()[1..];
    let one = BigInt::one();
    let ok = match rest {
        [] => true,
        [c] => c.mono.is_one() && c.coeff == -&one || c.mono.degree() == 1 && c.coeff == -&one,
        [x, c] => x.mono.degree() == 1 && x.coeff == one && c.mono.is_one() && c.coeff == -&one,
        _ => false,
    };
    ok.then(|| Polynomial::var(LEX, v).sub(p))
}

/// Substitutes equivalent nodes into all other polynomials. Each variable is
/// propagated at most once (`done`). Returns the number of propagations.
pub fn propagate_equivalences(polys: &mut PolyMap, done: &mut BTreeSet<VarId>) -> usize {
    let mut count = 0;
    let keys: Vec<VarId> = polys.keys().copied().collect();
    for v in keys {
        if done.contains(&v) {
            continue;
        }
        let Some(value) = equivalence(v, &polys[&v]) else {
            continue;
        };
        done.insert(v);
        let users: Vec<VarId> = polys
            .iter()
            .filter(|(&w, q)| w != v && q.contains_var(v))
            .map(|(&w, _)| w)
            .collect();
        for w in users {
            let q = polys[&w].substitute(v, &value);
            polys.insert(w, normalize_sign(q));
        }
        count += 1;
    }
    count
}

fn normalize_sign(p: Polynomial) -> Polynomial {
    if p.lc().is_some_and(|c| c.is_negative()) {
        p.neg()
    } else {
        p
    }
}

/// Runs the three rewrites to a fixpoint on gate, alias and extension
/// polynomials together.
pub fn preprocess(sys: &PolySystem) -> (PolyMap, PreprocessStats) {
    let mut polys = sys.polynomial_map();
    let protected: BTreeSet<VarId> = sys.spec_lin.vars().into_iter().collect();
    let mut stats = PreprocessStats::default();
    let mut eliminated = BTreeSet::new();
    let mut done = BTreeSet::new();
    loop {
        let merged = merge_equal_inputs(&mut polys);
        let erased = erase_zero_products(&mut polys, &sys.zero_products);
        let elim =
            eliminate_positive_nodes(&mut polys, &sys.positive_only, &protected, &mut eliminated);
        let eq = propagate_equivalences(&mut polys, &mut done);
        stats.merged_nodes += merged;
        stats.positive_nodes_eliminated += elim;
        stats.equiv_propagations += eq;
        if merged + erased + elim + eq == 0 {
            break;
        }
    }
    debug_assert!(polys
        .iter()
        .all(|(v, p)| p.leading_var() == Some(*v) || p.is_zero()));
    debug_assert!(polys
        .values()
        .all(|p| !p.is_zero() || p.terms().iter().all(|t| t.coeff.is_zero())));
    (polys, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::parse_ascii_aiger;
    use crate::benchgen::MULT2_AAG;
    use crate::encode::{encode, EncodeOptions, SpecInput};
    use crate::poly::{parse_poly, VarTable};

    fn mult2() -> PolySystem {
        encode(
            &parse_ascii_aiger(MULT2_AAG.as_bytes()).unwrap(),
            &SpecInput::Multiplier,
            EncodeOptions::default(),
        )
        .unwrap()
    }

    fn map(t: &VarTable, polys: &[&str]) -> PolyMap {
        polys
            .iter()
            .map(|s| {
                let p = parse_poly(s, t, LEX).unwrap();
                (p.leading_var().unwrap(), p)
            })
            .collect()
    }

    #[test]
    fn running_example_merge() {
        let sys = mult2();
        let t = sys.order.table();
        let mut polys = sys.polynomial_map();
        assert_eq!(merge_equal_inputs(&mut polys), 2);
        let l26 = sys.order.get("l26").unwrap();
        assert_eq!(
            polys[&l26],
            parse_poly("l26-l24+l22+l16-1", t, LEX).unwrap()
        );
        erase_zero_products(&mut polys, &sys.zero_products);
        let l28 = sys.order.get("l28").unwrap();
        assert_eq!(polys[&l28], parse_poly("l28+l26+l24-1", t, LEX).unwrap());
    }

    #[test]
    fn no_sharing_is_unchanged() {
        let t = VarTable::from_chain(&["a", "b", "c", "d", "e", "f"]);
        let mut polys = map(&t, &["e-a*b", "f-c*d"]);
        let before = polys.clone();
        assert_eq!(merge_equal_inputs(&mut polys), 0);
        assert_eq!(erase_zero_products(&mut polys, &[]), 0);
        assert_eq!(propagate_equivalences(&mut polys, &mut BTreeSet::new()), 0);
        assert_eq!(polys, before);
    }

    #[test]
    fn positive_node_is_refolded() {
        let t = VarTable::from_chain(&["a", "b", "c", "d", "e", "f"]);
        let v = |n: &str| t.get(n).unwrap();
        let mut polys = map(&t, &["f-d*a", "e-c*a", "d-c*b"]);
        let n = eliminate_positive_nodes(
            &mut polys,
            &[v("d")].into(),
            &BTreeSet::new(),
            &mut BTreeSet::new(),
        );
        assert_eq!(n, 1);
        assert_eq!(polys[&v("f")], parse_poly("f-e*b", &t, LEX).unwrap());
        assert!(polys.contains_key(&v("d")));
    }

    #[test]
    fn protected_nodes_stay() {
        let t = VarTable::from_chain(&["a", "b", "c", "d", "f"]);
        let v = |n: &str| t.get(n).unwrap();
        let mut polys = map(&t, &["f-d*a", "d-c*b"]);
        let n = eliminate_positive_nodes(
            &mut polys,
            &[v("d")].into(),
            &[v("d")].into(),
            &mut BTreeSet::new(),
        );
        assert_eq!(n, 0);
    }

    #[test]
    fn equivalences() {
        let t = VarTable::from_chain(&["w", "y", "x", "z"]);
        let v = |n: &str| t.get(n).unwrap();
        let mut polys = map(&t, &["x-y", "z-x*w"]);
        assert_eq!(propagate_equivalences(&mut polys, &mut BTreeSet::new()), 1);
        assert_eq!(polys[&v("z")], parse_poly("z-y*w", &t, LEX).unwrap());
        let mut polys = map(&t, &["x+y-1", "z-x*w"]);
        propagate_equivalences(&mut polys, &mut BTreeSet::new());
        assert_eq!(polys[&v("z")], parse_poly("z+y*w-w", &t, LEX).unwrap());
    }
}
