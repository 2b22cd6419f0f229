//! Polynomial encoding of an AIG and linearization of the specification.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use crate::aig::{Aig, AndNode, Literal};
use crate::groebner::reference::RefPoly;
use crate::ordering::{gate_name, row_wise_rtto, InputNaming, OrderError, VarOrder, VarRole};
use crate::poly::{
    parse_poly, Monomial, MonomialOrder, ParseError, Polynomial, Term, VarId, VarKind,
};

const LEX: MonomialOrder = MonomialOrder::Lex;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("multiplier specification needs 2n inputs and 2n outputs (got {inputs} inputs, {outputs} outputs)")]
    ArityMismatch { inputs: usize, outputs: usize },
    #[error("specification: {0}")]
    Parse(#[from] ParseError),
    #[error("specification may only use inputs and outputs, found `{0}`")]
    SpecVariable(String),
    #[error(transparent)]
    Order(#[from] OrderError),
}

/// Where the specification comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecInput {
    /// Unsigned `n x n` multiplication, `n` taken from the input count.
    Multiplier,
    /// A polynomial over input and output names.
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Linearization {
    /// Replace `sigma` by `v` when the gate polynomial `v - sigma` exists,
    /// otherwise by a fresh extension variable.
    #[default]
    ReuseGates,
    /// Every non-linear monomial gets an extension variable.
    ExtensionsOnly,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EncodeOptions {
    pub naming: InputNaming,
    pub linearization: Linearization,
}

/// The circuit's polynomial encoding under the row-wise order. All
/// polynomials are stored under LEX.
#[derive(Debug, Clone)]
pub struct PolySystem {
    pub order: VarOrder,
    /// Gate and output-alias polynomials keyed by leading variable.
    pub gates: BTreeMap<VarId, Polynomial>,
    /// Extension polynomials `t - sigma`.
    pub ext: Vec<Polynomial>,
    pub spec: Polynomial,
    pub spec_lin: Polynomial,
    /// Minimum distance to the inputs along polynomial dependencies.
    pub dist: Vec<u32>,
    /// Variable pairs whose product vanishes: AND nodes over the same
    /// operand nodes with different polarities.
    pub zero_products: Vec<(VarId, VarId)>,
    /// Gate variables used only un-negated and not driving an output.
    pub positive_only: BTreeSet<VarId>,
    constraints: HashMap<VarId, String>,
}

/// `x`, `1 - x` or a constant for an AIG literal.
pub fn literal_poly(lit: Literal, order: &VarOrder) -> Polynomial {
    if lit.is_constant() {
        return Polynomial::constant(LEX, lit.0);
    }
    let v = Polynomial::var(
        LEX,
        order
            .node_var(lit.index())
            .expect("literal of a known node"),
    );
    if lit.is_negated() {
        Polynomial::constant(LEX, 1).sub(&v)
    } else {
        v
    }
}

/// `g - L(left) * L(right)`; constant operands are substituted.
pub fn gate_polynomial(node: &AndNode, order: &VarOrder) -> Polynomial {
    let g = Polynomial::var(LEX, order.node_var(node.index).expect("gate variable"));
    g.sub(&literal_poly(node.left, order).mul(&literal_poly(node.right, order)))
}

/// `s - L(o)`: `s - l` for a positive output, `s + l - 1` for a negated one.
pub fn alias_polynomial(s: VarId, out: Literal, order: &VarOrder) -> Polynomial {
    Polynomial::var(LEX, s).sub(&literal_poly(out, order))
}

/// `x^2 - x` for every primary input, with explicit exponents.
pub fn boolean_input_polys(order: &VarOrder) -> Vec<RefPoly> {
    order
        .inputs()
        .iter()
        .map(|&v| RefPoly::field(order.len(), v))
        .collect()
}

/// `sum 2^k s_k - (sum 2^i a_i)(sum 2^j b_j)` over `order`'s names.
pub fn multiplier_spec(n: usize, order: &VarOrder) -> Result<Polynomial, EncodeError> {
    let (ni, no) = (order.inputs().len(), order.outputs().len());
    let arity = || EncodeError::ArityMismatch {
        inputs: ni,
        outputs: no,
    };
    if n == 0 || ni != 2 * n || no != 2 * n {
        return Err(arity());
    }
    let var = |name: String| order.get(&name).ok_or_else(arity);
    let mut terms = Vec::new();
    for k in 0..2 * n {
        terms.push(Term {
            coeff: BigInt::one() << k,
            mono: Monomial::var(var(format!("s{k}"))?),
        });
    }
    for i in 0..n {
        for j in 0..n {
            let m = Monomial::from_vars([var(format!("a{i}"))?, var(format!("b{j}"))?]);
            terms.push(Term {
                coeff: -(BigInt::one() << (i + j)),
                mono: m,
            });
        }
    }
    Ok(Polynomial::from_terms(LEX, terms))
}

/// What a non-linear specification monomial is replaced by.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Replacement {
    Gate(VarId),
    Extension(String),
}

/// Decides a replacement for every non-linear monomial of `spec`, scanning
/// terms in LEX order. Gate reuse is syntactic: only a polynomial that is
/// exactly `v - sigma` qualifies.
pub fn plan_linearization(
    spec: &Polynomial,
    gates: &BTreeMap<VarId, Polynomial>,
    order: &VarOrder,
    mode: Linearization,
) -> Vec<(Monomial, Replacement)> {
    let mut by_tail: HashMap<Monomial, VarId> = HashMap::new();
    if mode == Linearization::ReuseGates {
        for (&v, p) in gates {
            if let [lead, tail] = p.terms() {
                if matches!(order.role(v), VarRole::Gate(_))
                    && lead.mono == Monomial::var(v)
                    && lead.coeff.is_one()
                    && tail.coeff == -BigInt::one()
                    && tail.mono.degree() >= 2
                {
                    by_tail.entry(tail.mono.clone()).or_insert(v);
                }
            }
        }
    }
    let mut used: BTreeSet<String> = (0..order.len() as u32)
        .map(|i| order.name(VarId(i)).to_string())
        .collect();
    let mut generic = 0;
    let mut plan = Vec::new();
    for t in spec.with_order(LEX).terms() {
        if t.mono.degree() < 2 || plan.iter().any(|(m, _)| m == &t.mono) {
            continue;
        }
        if let Some(&v) = by_tail.get(&t.mono) {
            plan.push((t.mono.clone(), Replacement::Gate(v)));
            continue;
        }
        let mut name = product_name(&t.mono, order);
        while name.as_ref().is_none_or(|n| used.contains(n)) {
            name = Some(format!("t{generic}"));
            generic += 1;
        }
        let name = name.expect("set above");
        used.insert(name.clone());
        plan.push((t.mono.clone(), Replacement::Extension(name)));
    }
    plan
}

/// `t{i}{j}` for `a_i * b_j`.
fn product_name(m: &Monomial, order: &VarOrder) -> Option<String> {
    let [x, y] = m.vars() else { return None };
    let (nx, ny) = (order.name(*x), order.name(*y));
    let idx = |n: &str, c: char| n.strip_prefix(c).and_then(|r| r.parse::<usize>().ok());
    let (i, j) = match (idx(nx, 'a'), idx(ny, 'b'), idx(ny, 'a'), idx(nx, 'b')) {
        (Some(i), Some(j), _, _) | (_, _, Some(i), Some(j)) => (i, j),
        _ => return None,
    };
    if !order.is_input(*x) || !order.is_input(*y) {
        return None;
    }
    Some(if i >= 10 || j >= 10 {
        format!("t{i}_{j}")
    } else {
        format!("t{i}{j}")
    })
}

/// Replaces every planned monomial of `spec` by its variable.
pub fn apply_linearization(spec: &Polynomial, repl: &HashMap<Monomial, VarId>) -> Polynomial {
    Polynomial::from_terms(
        LEX,
        spec.terms()
            .iter()
            .map(|t| match repl.get(&t.mono) {
                Some(&v) => Term {
                    coeff: t.coeff.clone(),
                    mono: Monomial::var(v),
                },
                None => t.clone(),
            })
            .collect(),
    )
}

fn build_gates(aig: &Aig, order: &VarOrder) -> BTreeMap<VarId, Polynomial> {
    let mut gates = BTreeMap::new();
    for a in aig.ands() {
        gates.insert(
            order.node_var(a.index).expect("gate"),
            gate_polynomial(a, order),
        );
    }
    for (k, &o) in aig.outputs().iter().enumerate() {
        let s = order.outputs()[k];
        gates.insert(s, alias_polynomial(s, o, order));
    }
    gates
}

fn lit_text(lit: Literal, order: &VarOrder) -> String {
    match lit.0 {
        0 => "0".into(),
        1 => "1".into(),
        _ => {
            let n = order.name(order.node_var(lit.index()).expect("known"));
            if lit.is_negated() {
                format!("!{n}")
            } else {
                n.to_string()
            }
        }
    }
}

/// Encodes `aig` and linearizes the specification.
pub fn encode(aig: &Aig, spec: &SpecInput, opts: EncodeOptions) -> Result<PolySystem, EncodeError> {
    let base = row_wise_rtto(aig, &[], opts.naming);
    let base_spec = match spec {
        SpecInput::Multiplier => multiplier_spec(aig.inputs().len() / 2, &base)?,
        SpecInput::Text(s) => {
            let p = parse_poly(s, base.table(), LEX)?;
            for v in p.vars() {
                if !matches!(base.table().kind(v), VarKind::Input | VarKind::Output) {
                    return Err(EncodeError::SpecVariable(base.name(v).to_string()));
                }
            }
            p
        }
    };
    let base_gates = build_gates(aig, &base);
    let plan = plan_linearization(&base_spec, &base_gates, &base, opts.linearization);
    let ext_names: Vec<String> = plan
        .iter()
        .filter_map(|(_, r)| match r {
            Replacement::Extension(n) => Some(n.clone()),
            Replacement::Gate(_) => None,
        })
        .collect();

    let order = row_wise_rtto(aig, &ext_names, opts.naming);
    let to_new = |v: VarId| order.get(base.name(v)).expect("same circuit variables");
    let spec_poly = base_spec.map_vars(LEX, to_new);
    let gates = build_gates(aig, &order);
    let mut repl = HashMap::new();
    let mut ext = Vec::new();
    let mut constraints = HashMap::new();
    for (m, r) in &plan {
        let m = Monomial::from_vars(m.vars().iter().map(|&v| to_new(v)));
        let v = match r {
            Replacement::Gate(g) => to_new(*g),
            Replacement::Extension(n) => {
                let t = order.get(n).expect("interned extension");
                ext.push(Polynomial::var(LEX, t).sub(&Polynomial::term(LEX, 1, m.clone())));
                let parts: Vec<&str> = m.vars().iter().rev().map(|&x| order.name(x)).collect();
                constraints.insert(t, format!("{n} = {}", parts.join(" & ")));
                t
            }
        };
        repl.insert(m, v);
    }
    let spec_lin = apply_linearization(&spec_poly, &repl);

    for a in aig.ands() {
        let v = order.node_var(a.index).expect("gate");
        constraints.insert(
            v,
            format!(
                "{} = {} & {}",
                order.name(v),
                lit_text(a.left, &order),
                lit_text(a.right, &order)
            ),
        );
    }
    for (k, &o) in aig.outputs().iter().enumerate() {
        let s = order.outputs()[k];
        constraints.insert(s, format!("{} = {}", order.name(s), lit_text(o, &order)));
    }

    let mut sys = PolySystem {
        dist: Vec::new(),
        zero_products: zero_products(aig, &order),
        positive_only: positive_only(aig, &order),
        order,
        gates,
        ext,
        spec: spec_poly,
        spec_lin,
        constraints,
    };
    sys.dist = sys.compute_dist();
    Ok(sys)
}

/// Gate node with the polarity of each operand.
type Polarized = (u32, (bool, bool));

fn zero_products(aig: &Aig, order: &VarOrder) -> Vec<(VarId, VarId)> {
    // operand nodes (ascending) -> gates over them
    let mut groups: BTreeMap<(u32, u32), Vec<Polarized>> = BTreeMap::new();
    for a in aig.ands() {
        let (l, r) = (a.left, a.right);
        if l.is_constant() || r.is_constant() || l.index() == r.index() {
            continue;
        }
        let (lo, hi) = if l.index() < r.index() {
            (l, r)
        } else {
            (r, l)
        };
        groups
            .entry((lo.index(), hi.index()))
            .or_default()
            .push((a.index, (lo.is_negated(), hi.is_negated())));
    }
    let mut out = Vec::new();
    for members in groups.values() {
        for (i, (gi, pi)) in members.iter().enumerate() {
            for (gj, pj) in &members[i + 1..] {
                if pi != pj {
                    let (x, y) = (
                        order.node_var(*gi).expect("gate"),
                        order.node_var(*gj).expect("gate"),
                    );
                    out.push((x.min(y), x.max(y)));
                }
            }
        }
    }
    out
}

fn positive_only(aig: &Aig, order: &VarOrder) -> BTreeSet<VarId> {
    let n = aig.max_index() as usize + 1;
    let mut negated = vec![false; n];
    let mut used = vec![false; n];
    for a in aig.ands() {
        for l in a.operands() {
            used[l.index() as usize] = true;
            negated[l.index() as usize] |= l.is_negated();
        }
    }
    for o in aig.outputs() {
        negated[o.index() as usize] = true;
    }
    aig.ands()
        .iter()
        .filter(|a| used[a.index as usize] && !negated[a.index as usize])
        .map(|a| order.node_var(a.index).expect("gate"))
        .collect()
}

impl PolySystem {
    /// Gate, alias and extension polynomials, ascending by leading variable.
    pub fn polynomials(&self) -> Vec<Polynomial> {
        let mut all: Vec<Polynomial> = self
            .gates
            .values()
            .cloned()
            .chain(self.ext.iter().cloned())
            .collect();
        all.sort_by_key(|p| p.leading_var());
        all
    }

    /// All polynomials keyed by the variable they define. Under the default
    /// order this is also their leading variable.
    pub fn polynomial_map(&self) -> BTreeMap<VarId, Polynomial> {
        let mut map = self.gates.clone();
        for p in &self.ext {
            let t = p
                .terms()
                .iter()
                .find(|t| t.mono.degree() == 1)
                .expect("extension variable");
            map.insert(t.mono.vars()[0], p.clone());
        }
        map
    }

    fn compute_dist(&self) -> Vec<u32> {
        let map = self.polynomial_map();
        let mut dist = vec![0u32; self.order.len()];
        for i in 0..self.order.len() as u32 {
            let v = VarId(i);
            if let Some(p) = map.get(&v) {
                dist[i as usize] = 1 + p
                    .vars()
                    .iter()
                    .filter(|&&w| w < v)
                    .map(|w| dist[w.0 as usize])
                    .min()
                    .unwrap_or(0);
            }
        }
        dist
    }

    /// The same system under another variable chain (smallest first).
    pub fn reordered<S: AsRef<str>>(&self, names: &[S]) -> Result<PolySystem, EncodeError> {
        let (order, map) = self.order.reorder(names)?;
        let f = |v: VarId| map[v.0 as usize];
        let tr = |p: &Polynomial| p.map_vars(LEX, f);
        let gates = self.gates.iter().map(|(&v, p)| (f(v), tr(p)));
        let mut sys = PolySystem {
            gates: gates.collect(),
            ext: self.ext.iter().map(tr).collect(),
            spec: tr(&self.spec),
            spec_lin: tr(&self.spec_lin),
            dist: Vec::new(),
            zero_products: self
                .zero_products
                .iter()
                .map(|&(x, y)| (f(x).min(f(y)), f(x).max(f(y))))
                .collect(),
            positive_only: self.positive_only.iter().map(|&v| f(v)).collect(),
            constraints: self
                .constraints
                .iter()
                .map(|(&k, v)| (f(k), v.clone()))
                .collect(),
            order,
        };
        sys.dist = sys.compute_dist();
        Ok(sys)
    }

    /// Table of polynomials from the largest leading variable down:
    /// `g<k>  <polynomial>  <constraint>`.
    pub fn dump(&self) -> String {
        let map = self.polynomial_map();
        let rows: Vec<&Polynomial> = map.values().rev().collect();
        let keys: Vec<VarId> = map.keys().rev().copied().collect();
        let table = self.order.table();
        let texts: Vec<String> = rows.iter().map(|p| p.display(table).to_string()).collect();
        let w = texts.iter().map(|t| t.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, t) in texts.iter().enumerate() {
            let c = self
                .constraints
                .get(&keys[k])
                .map(String::as_str)
                .unwrap_or("");
            let _ = writeln!(out, "g{k:<4} {t:<w$}  {c}");
        }
        let _ = writeln!(out, "spec     {}", self.spec.display(table));
        let _ = writeln!(out, "spec_lin {}", self.spec_lin.display(table));
        out
    }

    /// `gate_name` of an AND node, for callers that only know indices.
    pub fn gate_var(&self, index: u32) -> Option<VarId> {
        self.order.get(&gate_name(index))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::parse_ascii_aiger;
    use crate::benchgen::MULT2_AAG;
    use crate::poly::format_poly;
    use num_traits::Zero;

    fn mult2() -> Aig {
        parse_ascii_aiger(MULT2_AAG.as_bytes()).unwrap()
    }

    fn text(sys: &PolySystem, p: &Polynomial) -> String {
        format_poly(p, sys.order.table())
    }

    fn lex(sys: &PolySystem, s: &str) -> Polynomial {
        parse_poly(s, sys.order.table(), LEX).unwrap()
    }

    #[test]
    fn gate_encodings() {
        let sys = encode(&mult2(), &SpecInput::Multiplier, EncodeOptions::default()).unwrap();
        let g = |name: &str| &sys.gates[&sys.order.get(name).unwrap()];
        assert_eq!(g("l22"), &lex(&sys, "l22-a1*b1"));
        assert_eq!(g("l18"), &lex(&sys, "l18-l14*l12+l14+l12-1"));
        assert_eq!(g("l28"), &lex(&sys, "l28-l26*l24+l26+l24-1"));
        assert_eq!(g("s3"), &lex(&sys, "s3-l24"));
        let polys: Vec<Polynomial> = sys.gates.values().cloned().collect();
        assert!(crate::ordering::is_umlt(&polys));
    }

    #[test]
    fn gate_encodings_match_truth_tables() {
        let aig =
            parse_ascii_aiger(b"aag 6 2 0 0 4\n2\n4\n6 2 4\n8 3 4\n10 2 5\n12 3 5\n").unwrap();
        let order = row_wise_rtto(&aig, &[], InputNaming::Interleaved);
        for a in aig.ands() {
            let p = gate_polynomial(a, &order);
            let g = order.node_var(a.index).unwrap();
            for bits in 0..4u32 {
                let vals = [bits & 1 == 1, bits & 2 == 2];
                let node = aig.simulate(&vals);
                for out in [false, true] {
                    let pt = |v: VarId| {
                        if v == g {
                            out
                        } else {
                            let k = order.inputs().iter().position(|&x| x == v).unwrap();
                            vals[k]
                        }
                    };
                    assert_eq!(p.eval(pt).is_zero(), out == node[a.index as usize]);
                }
            }
        }
    }

    #[test]
    fn constant_operands_are_substituted() {
        let aig = parse_ascii_aiger(b"aag 3 1 0 2 2\n2\n4\n6\n4 2 1\n6 2 0\n").unwrap();
        let sys = encode(
            &aig,
            &SpecInput::Text("s0-x0".into()),
            EncodeOptions::default(),
        )
        .unwrap();
        assert_eq!(
            text(&sys, &sys.gates[&sys.order.get("l4").unwrap()]),
            "l4-x0"
        );
        assert_eq!(text(&sys, &sys.gates[&sys.order.get("l6").unwrap()]), "l6");
    }

    #[test]
    fn multiplier_specs() {
        let sys = encode(&mult2(), &SpecInput::Multiplier, EncodeOptions::default()).unwrap();
        assert_eq!(
            sys.spec,
            lex(&sys, "8*s3+4*s2+2*s1+s0-4*a1*b1-2*a1*b0-2*a0*b1-a0*b0")
        );
        let one = parse_ascii_aiger(b"aag 3 2 0 2 1\n2\n4\n6\n0\n6 4 2\n").unwrap();
        let s1 = encode(&one, &SpecInput::Multiplier, EncodeOptions::default()).unwrap();
        assert_eq!(text(&s1, &s1.spec), "s0+2*s1-b0*a0");
        let three = crate::benchgen::generate(&crate::benchgen::MultiplierConfig::new(3)).unwrap();
        let s3 = encode(&three, &SpecInput::Multiplier, EncodeOptions::default()).unwrap();
        assert_eq!(
            s3.spec
                .terms()
                .iter()
                .filter(|t| t.mono.degree() == 2)
                .count(),
            9
        );
        // every output and input set: sum of weights minus 7*7
        let all = s3.spec.eval(|_| true);
        assert_eq!(all, BigInt::from(63 - 49));
    }

    #[test]
    fn multiplier_arity() {
        let aig = parse_ascii_aiger(b"aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n").unwrap();
        assert!(matches!(
            encode(&aig, &SpecInput::Multiplier, EncodeOptions::default()),
            Err(EncodeError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn linearization_reuses_gates() {
        let sys = encode(&mult2(), &SpecInput::Multiplier, EncodeOptions::default()).unwrap();
        assert!(sys.ext.is_empty());
        assert_eq!(
            sys.spec_lin,
            lex(&sys, "8*s3+4*s2+2*s1+s0-4*l22-2*l12-2*l14-l10")
        );
    }

    #[test]
    fn linearization_with_extensions() {
        let opts = EncodeOptions {
            linearization: Linearization::ExtensionsOnly,
            ..Default::default()
        };
        let sys = encode(&mult2(), &SpecInput::Multiplier, opts).unwrap();
        assert_eq!(sys.ext.len(), 4);
        assert_eq!(
            sys.spec_lin,
            lex(&sys, "8*s3+4*s2+2*s1+s0-4*t11-2*t10-2*t01-t00")
        );
        assert!(sys
            .order
            .chain()
            .starts_with("a0 < b0 < a1 < b1 < t11 < t01 < t10 < t00 < l10"));
        assert_eq!(text(&sys, &sys.ext[0]), "t11-b1*a1");
    }

    #[test]
    fn linear_spec_is_unchanged() {
        let sys = encode(
            &mult2(),
            &SpecInput::Text("s0-a0".into()),
            EncodeOptions::default(),
        )
        .unwrap();
        assert!(sys.ext.is_empty());
        assert_eq!(sys.spec_lin, sys.spec);
        assert!(matches!(
            encode(
                &mult2(),
                &SpecInput::Text("l10".into()),
                EncodeOptions::default()
            ),
            Err(EncodeError::SpecVariable(_))
        ));
    }

    #[test]
    fn structural_facts() {
        let sys = encode(&mult2(), &SpecInput::Multiplier, EncodeOptions::default()).unwrap();
        let v = |n: &str| sys.order.get(n).unwrap();
        assert!(sys.zero_products.contains(&(v("l16"), v("l18"))));
        assert!(sys.zero_products.contains(&(v("l24"), v("l26"))));
        // l14, l12 feed l18 negated; l16 feeds l20 negated; l22 feeds l26 negated
        assert!(sys.positive_only.is_empty());
        assert_eq!(sys.dist[v("l28").0 as usize], 3);
        assert_eq!(sys.dist[v("s2").0 as usize], 4);
    }

    #[test]
    fn field_polynomials_for_inputs() {
        let sys = encode(&mult2(), &SpecInput::Multiplier, EncodeOptions::default()).unwrap();
        let f = boolean_input_polys(&sys.order);
        assert_eq!(f.len(), 4);
        assert_eq!(f[0].display(sys.order.table()).to_string(), "a0^2-a0");
    }
}
