//! Local linearization: Gröbner bases of small sub-circuits around the
//! leading variable of the specification.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::time::Instant;

use super::preprocess::PolyMap;
use super::{lex_substitute, GbCalls, StepCounts, MAX_FREE_VARS};
use crate::groebner::modular::circuit_basis;
use crate::groebner::{buchberger, GbError, Limits};
use crate::poly::{linear_reduce_scaled, MonomialOrder, Polynomial, VarId};

const LEX: MonomialOrder = MonomialOrder::Lex;
const DRL: MonomialOrder = MonomialOrder::DegRevLex;

/// The polynomial system seen as a dependency graph: each leading variable
/// depends on the variables of its tail.
#[derive(Debug, Clone)]
pub struct Graph {
    polys: PolyMap,
    deps: HashMap<VarId, Vec<VarId>>,
    users: HashMap<VarId, BTreeSet<VarId>>,
}

impl Graph {
    pub fn new(polys: PolyMap) -> Self {
        let mut g = Graph {
            polys: PolyMap::new(),
            deps: HashMap::new(),
            users: HashMap::new(),
        };
        for (v, p) in polys {
            g.set(v, p);
        }
        g
    }

    pub fn polys(&self) -> &PolyMap {
        &self.polys
    }

    pub fn get(&self, v: VarId) -> Option<&Polynomial> {
        self.polys.get(&v)
    }

    pub fn set(&mut self, v: VarId, p: Polynomial) {
        for d in self.deps.remove(&v).unwrap_or_default() {
            if let Some(u) = self.users.get_mut(&d) {
                u.remove(&v);
            }
        }
        let deps: Vec<VarId> = p.tail().vars();
        for &d in &deps {
            self.users.entry(d).or_default().insert(v);
        }
        self.deps.insert(v, deps);
        self.polys.insert(v, p);
    }

    fn deps(&self, v: VarId) -> &[VarId] {
        self.deps.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    fn is_linear(&self, v: VarId) -> bool {
        self.polys.get(&v).is_none_or(Polynomial::is_linear)
    }

    /// Nodes of the sub-circuit of depth `d` around `v`: children reached
    /// through non-linear nodes, siblings sharing an input with `v`, and
    /// parents whose inputs all lie inside.
    pub fn subcircuit(&self, v: VarId, d: u32) -> BTreeSet<VarId> {
        let mut c = BTreeSet::from([v]);
        let mut queue = VecDeque::from([(v, 0u32)]);
        while let Some((u, level)) = queue.pop_front() {
            if level >= d || (u != v && self.is_linear(u)) {
                continue;
            }
            for &w in self.deps(u) {
                if c.insert(w) {
                    queue.push_back((w, level + 1));
                }
            }
        }
        for &w in self.deps(v) {
            if let Some(us) = self.users.get(&w) {
                c.extend(us.iter().filter(|&&s| s < v));
            }
        }
        let snapshot: Vec<VarId> = c.iter().copied().collect();
        for m in snapshot {
            if let Some(us) = self.users.get(&m) {
                for &p in us {
                    if p < v && !c.contains(&p) && self.deps(p).iter().all(|x| c.contains(x)) {
                        c.insert(p);
                    }
                }
            }
        }
        c
    }
}

/// Local search parameters.
#[derive(Debug, Clone, Copy)]
pub struct LocalParams {
    pub d0: u32,
    pub booth_threshold: u32,
    pub limits: Limits,
}

/// Outcome of linearizing one node.
#[derive(Debug, Clone, PartialEq)]
pub enum Linearized {
    Found(Polynomial),
    /// No linear polynomial with the node as leading term was found.
    Missing {
        /// whether the search covered the whole cone below the node
        complete: bool,
    },
}

fn find_linear(basis: &[Polynomial], v: VarId) -> Option<Polynomial> {
    basis
        .iter()
        .find(|p| p.is_linear() && p.leading_var() == Some(v))
        .map(|p| p.with_order(LEX))
}

/// DRL basis of the polynomials of `members`: interpolated when the
/// sub-circuit is small enough, integer Buchberger otherwise.
fn timed_gb(
    graph: &Graph,
    members: impl Iterator<Item = VarId>,
    limits: &Limits,
    calls: &mut GbCalls,
    key: Option<u32>,
) -> Result<Vec<Polynomial>, GbError> {
    let start = Instant::now();
    let defs: PolyMap = members
        .filter_map(|u| graph.get(u).map(|p| (u, p.clone())))
        .collect();
    let r = match circuit_basis(&defs, DRL, limits, MAX_FREE_VARS) {
        Ok(Some(g)) => Ok(g),
        Ok(None) => {
            let gens: Vec<Polynomial> = defs.values().map(|p| p.with_order(DRL)).collect();
            buchberger(&gens, DRL, limits).map(|g| g.into_polys())
        }
        Err(e) => Err(e),
    };
    calls.record(key, start.elapsed().as_secs_f64());
    r
}

/// Searches sub-circuits of growing depth for a linear polynomial with
/// leading variable `v`; `dist` bounds the depth. Falls back to all
/// polynomials ranked at most `v` unless `dist < booth_threshold`.
pub fn linearize_single(
    graph: &Graph,
    v: VarId,
    dist: u32,
    params: &LocalParams,
    calls: &mut GbCalls,
) -> Result<Linearized, GbError> {
    let p = graph.get(v).expect("node has a polynomial");
    if p.is_linear() {
        return Ok(Linearized::Found(p.clone()));
    }
    let lo = params.d0.min(dist).max(1);
    for d in lo..=dist {
        let c = graph.subcircuit(v, d);
        let basis = timed_gb(graph, c.into_iter(), &params.limits, calls, Some(d))?;
        if let Some(l) = find_linear(&basis, v) {
            return Ok(Linearized::Found(l));
        }
    }
    if params.booth_threshold > 0 && dist < params.booth_threshold {
        return Ok(Linearized::Missing { complete: false });
    }
    let members: Vec<VarId> = graph.polys().range(..=v).map(|(&u, _)| u).collect();
    let basis = timed_gb(graph, members.into_iter(), &params.limits, calls, None)?;
    Ok(match find_linear(&basis, v) {
        Some(l) => Linearized::Found(l),
        None => Linearized::Missing { complete: true },
    })
}

/// How the main loop ended.
#[derive(Debug, Clone, PartialEq)]
pub enum LoopEnd {
    Zero,
    /// The remaining polynomial cannot be reduced further.
    Stuck(Polynomial),
}

/// Reduces the linear specification step by step, linearizing the
/// polynomial of its leading variable when needed. Once a node cannot be
/// linearized below the threshold, the rest of the reduction is plain LEX
/// substitution.
pub fn reduce_spec(
    graph: &mut Graph,
    spec_lin: &Polynomial,
    dist: &[u32],
    params: &LocalParams,
    calls: &mut GbCalls,
    steps: &mut StepCounts,
) -> Result<LoopEnd, GbError> {
    let mut s = spec_lin.with_order(LEX);
    let mut fallback = false;
    loop {
        if s.is_zero() {
            return Ok(LoopEnd::Zero);
        }
        let Some(v) = s.leading_var() else {
            return Ok(LoopEnd::Stuck(s));
        };
        if graph.get(v).is_none() {
            return Ok(LoopEnd::Stuck(s));
        }
        if let Some(dl) = params.limits.deadline {
            if Instant::now() >= dl {
                return Err(GbError::ResourceLimit("time limit reached".into()));
            }
        }
        if !fallback && !graph.get(v).expect("checked").is_linear() {
            match linearize_single(graph, v, dist[v.0 as usize], params, calls)? {
                Linearized::Found(l) => graph.set(v, l),
                Linearized::Missing { complete: true } => return Ok(LoopEnd::Stuck(s)),
                Linearized::Missing { complete: false } => fallback = true,
            }
        }
        let g = graph.get(v).expect("checked");
        if fallback {
            s = lex_substitute(&s, v, g);
            steps.nonlinear += 1;
            if s.size() as u64 > params.limits.max_monomials {
                return Err(GbError::ResourceLimit(format!(
                    "more than {} monomials",
                    params.limits.max_monomials
                )));
            }
        } else {
            let (_, _, r) = linear_reduce_scaled(&s, g).expect("leading variables agree");
            s = r.primitive();
            steps.linear += 1;
        }
    }
}
