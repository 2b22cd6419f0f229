//! Verification drivers and reports.
//!
//! Three modes share one encoding:
//! - `local`: preprocessing, then the specification is reduced with linear
//!   polynomials taken from Gröbner bases of small sub-circuits;
//! - `fullgb`: one DRL basis of the whole system and linear reduction by its
//!   linear members;
//! - `lex`: classic backward substitution under LEX.

pub mod local;
pub mod preprocess;

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::aig::Aig;
use crate::encode::{encode, EncodeError, EncodeOptions, Linearization, PolySystem, SpecInput};
use crate::groebner::modular::circuit_basis;
use crate::groebner::{buchberger, linear_subset, GbError, Limits};
use crate::ordering::InputNaming;
use crate::poly::{linear_reduce_scaled, Monomial, MonomialOrder, Polynomial, Term, VarId};

use local::{reduce_spec, Graph, LocalParams, LoopEnd};
use preprocess::{preprocess, PolyMap, PreprocessStats};

const LEX: MonomialOrder = MonomialOrder::Lex;
const DRL: MonomialOrder = MonomialOrder::DegRevLex;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Local,
    FullGb,
    Lex,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Local => "local",
            Mode::FullGb => "fullgb",
            Mode::Lex => "lex",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Verified,
    NotVerified,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone)]
pub struct Config {
    pub mode: Mode,
    /// first sub-circuit depth tried
    pub d0: u32,
    /// nodes closer to the inputs than this skip the whole-cone basis and
    /// switch to LEX substitution; 0 disables the switch
    pub booth_threshold: u32,
    pub max_pairs: u64,
    pub max_monomials: u64,
    pub time_limit: Option<Duration>,
    pub naming: InputNaming,
}

impl Default for Config {
    fn default() -> Self {
        let l = Limits::default();
        Config {
            mode: Mode::Local,
            d0: 3,
            booth_threshold: 6,
            max_pairs: l.max_pairs,
            max_monomials: l.max_monomials,
            time_limit: None,
            naming: InputNaming::Interleaved,
        }
    }
}

impl Config {
    fn limits(&self, start: Instant) -> Limits {
        Limits {
            max_pairs: self.max_pairs,
            max_monomials: self.max_monomials,
            deadline: self.time_limit.map(|t| start + t),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GbCallStats {
    pub count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_s: Option<f64>,
}

/// Basis computations by sub-circuit depth, plus whole-cone calls.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GbCalls {
    pub by_depth: BTreeMap<u32, GbCallStats>,
    pub terminal: GbCallStats,
}

impl GbCalls {
    pub fn record(&mut self, depth: Option<u32>, secs: f64) {
        let e = match depth {
            Some(d) => self.by_depth.entry(d).or_default(),
            None => &mut self.terminal,
        };
        e.count += 1;
        *e.time_s.get_or_insert(0.0) += secs;
    }

    pub fn total(&self) -> u64 {
        self.terminal.count + self.by_depth.values().map(|c| c.count).sum::<u64>()
    }

    fn total_time(&self) -> f64 {
        self.by_depth
            .values()
            .chain([&self.terminal])
            .filter_map(|c| c.time_s)
            .fold(0.0, |a, b| a + b)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StepCounts {
    /// reductions by a linear polynomial
    pub linear: u64,
    /// LEX substitutions after giving up on linearization
    pub nonlinear: u64,
}

/// `scale * s = sum(cofactors[i] * basis[i])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub scale: BigInt,
    pub cofactors: Vec<BigInt>,
    pub basis: Vec<Polynomial>,
}

impl Certificate {
    pub fn combination(&self) -> Polynomial {
        let order = self.basis.first().map(Polynomial::order).unwrap_or(LEX);
        self.cofactors
            .iter()
            .zip(&self.basis)
            .fold(Polynomial::zero(order), |acc, (c, g)| {
                acc.add_scaled(c, &g.with_order(order))
            })
    }

    pub fn check(&self, s: &Polynomial) -> bool {
        let order = self.basis.first().map(Polynomial::order).unwrap_or(LEX);
        self.combination() == s.with_order(order).scale(&self.scale)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// what is left after reducing by the linear polynomials
    pub remainder: Polynomial,
    /// present when `member` holds and the basis is not `{1}`
    pub certificate: Option<Certificate>,
}

/// Reduces a linear `s` by the linear members of a reduced Gröbner basis,
/// tracking integer cofactors.
pub fn linear_gb_membership(linear: &[Polynomial], s: &Polynomial) -> Membership {
    let basis: Vec<Polynomial> = linear.iter().map(|g| g.with_order(LEX)).collect();
    if basis.iter().any(|g| g.is_constant() && !g.is_zero()) {
        return Membership {
            member: true,
            remainder: Polynomial::zero(LEX),
            certificate: None,
        };
    }
    let mut r = s.with_order(LEX);
    let mut scale = BigInt::one();
    let mut cof = vec![BigInt::zero(); basis.len()];
    while let Some(lm) = r.lm().cloned() {
        let Some(k) = basis.iter().position(|g| g.lm() == Some(&lm)) else {
            return Membership {
                member: false,
                remainder: r,
                certificate: None,
            };
        };
        let (m, alpha, next) = linear_reduce_scaled(&r, &basis[k]).expect("same leading monomial");
        if !m.is_one() {
            scale *= &m;
            for c in &mut cof {
                *c *= &m;
            }
        }
        cof[k] += alpha;
        r = next;
    }
    Membership {
        member: true,
        remainder: r,
        certificate: Some(Certificate {
            scale,
            cofactors: cof,
            basis,
        }),
    }
}

/// One LEX substitution step: eliminates `v` from `s` using `g`, whose
/// leading term is `c*v`. Returns `c*s - q*g` where `s = q*v + r`.
pub fn lex_substitute(s: &Polynomial, v: VarId, g: &Polynomial) -> Polynomial {
    let lead = g.lt().expect("nonzero");
    debug_assert_eq!(lead.mono, Monomial::var(v));
    let (with, without): (Vec<&Term>, Vec<&Term>) =
        s.terms().iter().partition(|t| t.mono.contains(v));
    if with.is_empty() {
        return s.clone();
    }
    let q = Polynomial::from_terms(
        LEX,
        with.into_iter()
            .map(|t| Term {
                coeff: t.coeff.clone(),
                mono: t.mono.without(v),
            })
            .collect(),
    );
    let r = Polynomial::from_terms(LEX, without.into_iter().cloned().collect());
    let tail = g.tail().with_order(LEX);
    let c = &lead.coeff;
    if c.is_one() {
        r.sub(&q.mul(&tail))
    } else if *c == -BigInt::one() {
        r.add(&q.mul(&tail))
    } else {
        r.scale(c).sub(&q.mul(&tail))
    }
}

/// Backward substitution until no variable of `s` has a polynomial. With
/// a triangular system this is the LEX normal form (up to a constant factor
/// when leading coefficients are not units).
pub fn lex_normal_form(
    s: &Polynomial,
    polys: &PolyMap,
    limits: &Limits,
) -> Result<Polynomial, GbError> {
    let mut s = s.with_order(LEX);
    let mut steps = 0u64;
    while let Some(v) = s.leading_var() {
        let Some(g) = polys.get(&v) else { break };
        s = lex_substitute(&s, v, g);
        steps += 1;
        if s.size() as u64 > limits.max_monomials {
            return Err(GbError::ResourceLimit(format!(
                "more than {} monomials",
                limits.max_monomials
            )));
        }
        if steps.is_multiple_of(64) && limits.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(GbError::ResourceLimit("time limit reached".into()));
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub verdict: Verdict,
    pub mode: Mode,
    /// nonzero witness over the inputs when not verified
    pub remainder: String,
    pub remainder_inputs_only: bool,
    pub merged_nodes: usize,
    pub positive_nodes_eliminated: usize,
    pub equiv_propagations: usize,
    pub gb_calls: GbCalls,
    pub linear_steps: u64,
    pub nonlinear_steps: u64,
    /// share of LEX substitution steps, in percent
    pub nonlinear_fraction: f64,
    pub variables: usize,
    pub polynomials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gb_time_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_time_s: Option<f64>,
    #[serde(skip)]
    pub certificate: Option<Certificate>,
}

impl VerificationReport {
    fn new(mode: Mode, sys: &PolySystem) -> Self {
        VerificationReport {
            verdict: Verdict::Inconclusive,
            mode,
            remainder: String::new(),
            remainder_inputs_only: false,
            merged_nodes: 0,
            positive_nodes_eliminated: 0,
            equiv_propagations: 0,
            gb_calls: GbCalls::default(),
            linear_steps: 0,
            nonlinear_steps: 0,
            nonlinear_fraction: 0.0,
            variables: sys.order.len(),
            polynomials: sys.gates.len() + sys.ext.len(),
            note: None,
            gb_time_s: None,
            total_time_s: None,
            certificate: None,
        }
    }

    /// Drops wall-clock fields so that output is reproducible.
    pub fn strip_times(&mut self) {
        self.gb_time_s = None;
        self.total_time_s = None;
        for c in self.gb_calls.by_depth.values_mut() {
            c.time_s = None;
        }
        self.gb_calls.terminal.time_s = None;
    }

    fn set_steps(&mut self, steps: StepCounts) {
        self.linear_steps = steps.linear;
        self.nonlinear_steps = steps.nonlinear;
        let total = steps.linear + steps.nonlinear;
        self.nonlinear_fraction = if total == 0 {
            0.0
        } else {
            100.0 * steps.nonlinear as f64 / total as f64
        };
    }

    fn set_stats(&mut self, s: PreprocessStats) {
        self.merged_nodes = s.merged_nodes;
        self.positive_nodes_eliminated = s.positive_nodes_eliminated;
        self.equiv_propagations = s.equiv_propagations;
    }

    fn inconclusive(&mut self, e: GbError) {
        self.verdict = Verdict::Inconclusive;
        self.note = Some(e.to_string());
    }

    /// Marks the result as refuted and stores the input-level remainder of
    /// `s`, computed over the original encoding.
    fn refute(&mut self, sys: &PolySystem, s: &Polynomial, limits: &Limits) {
        self.verdict = Verdict::NotVerified;
        let table = sys.order.table();
        match lex_normal_form(s, &sys.polynomial_map(), limits) {
            Ok(r) => {
                self.remainder_inputs_only = r.vars().iter().all(|&v| sys.order.is_input(v));
                self.remainder = r.primitive().display(table).to_string();
            }
            Err(e) => {
                self.remainder = s.display(table).to_string();
                self.note = Some(format!("remainder not expanded: {e}"));
            }
        }
    }

    fn finish(&mut self, start: Instant) {
        self.total_time_s = Some(start.elapsed().as_secs_f64());
        self.gb_time_s = Some(self.gb_calls.total_time());
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "verdict: {}", self.verdict);
        let _ = writeln!(out, "mode: {}", self.mode);
        if self.verdict == Verdict::NotVerified {
            let _ = writeln!(out, "remainder: {}", self.remainder);
            let _ = writeln!(
                out,
                "remainder over inputs only: {}",
                self.remainder_inputs_only
            );
        }
        if let Some(n) = &self.note {
            let _ = writeln!(out, "note: {n}");
        }
        let _ = writeln!(
            out,
            "variables: {}, polynomials: {}",
            self.variables, self.polynomials
        );
        let _ = writeln!(
            out,
            "merged nodes: {}, positive nodes eliminated: {}, equivalences propagated: {}",
            self.merged_nodes, self.positive_nodes_eliminated, self.equiv_propagations
        );
        let mut calls: Vec<String> = self
            .gb_calls
            .by_depth
            .iter()
            .map(|(d, c)| format!("d={d}: {}", c.count))
            .collect();
        calls.push(format!("terminal: {}", self.gb_calls.terminal.count));
        let _ = writeln!(out, "gb calls: {}", calls.join(", "));
        let _ = writeln!(
            out,
            "steps: {} linear, {} nonlinear ({:.1}% nonlinear)",
            self.linear_steps, self.nonlinear_steps, self.nonlinear_fraction
        );
        if let (Some(g), Some(t)) = (self.gb_time_s, self.total_time_s) {
            let _ = writeln!(out, "time: {t:.3} s total, {g:.3} s in bases");
        }
        out
    }
}

/// Encodes `aig` for the chosen mode and verifies it.
pub fn verify(
    aig: &Aig,
    spec: &SpecInput,
    config: &Config,
) -> Result<VerificationReport, EncodeError> {
    let linearization = match config.mode {
        Mode::FullGb => Linearization::ExtensionsOnly,
        Mode::Local | Mode::Lex => Linearization::ReuseGates,
    };
    let sys = encode(
        aig,
        spec,
        EncodeOptions {
            naming: config.naming,
            linearization,
        },
    )?;
    Ok(verify_system(&sys, config))
}

/// Verifies an already encoded system.
pub fn verify_system(sys: &PolySystem, config: &Config) -> VerificationReport {
    match config.mode {
        Mode::Local => verify_local(sys, config),
        Mode::FullGb => verify_full_gb(sys, config),
        Mode::Lex => verify_lex(sys, config),
    }
}

pub fn verify_local(sys: &PolySystem, config: &Config) -> VerificationReport {
    let start = Instant::now();
    let limits = config.limits(start);
    let mut report = VerificationReport::new(Mode::Local, sys);
    let (polys, stats) = preprocess(sys);
    report.set_stats(stats);
    let mut graph = Graph::new(polys);
    let params = LocalParams {
        d0: config.d0,
        booth_threshold: config.booth_threshold,
        limits,
    };
    let mut steps = StepCounts::default();
    match reduce_spec(
        &mut graph,
        &sys.spec_lin,
        &sys.dist,
        &params,
        &mut report.gb_calls,
        &mut steps,
    ) {
        Ok(LoopEnd::Zero) => report.verdict = Verdict::Verified,
        Ok(LoopEnd::Stuck(s)) => report.refute(sys, &s, &limits),
        Err(e) => report.inconclusive(e),
    }
    report.set_steps(steps);
    report.finish(start);
    report
}

/// Largest number of free variables for which a zero set is enumerated.
pub const MAX_FREE_VARS: usize = 10;

/// DRL Gröbner basis of the whole system. Circuit systems are interpolated
/// from their zero set and certified; anything else goes through integer
/// Buchberger.
pub fn full_basis(sys: &PolySystem, limits: &Limits) -> Result<Vec<Polynomial>, GbError> {
    let defs = sys.polynomial_map();
    if defs.len() == sys.polynomials().len() {
        if let Some(g) = circuit_basis(&defs, DRL, limits, MAX_FREE_VARS)? {
            return Ok(g);
        }
    }
    let gens: Vec<Polynomial> = sys
        .polynomials()
        .iter()
        .map(|p| p.with_order(DRL))
        .collect();
    Ok(buchberger(&gens, DRL, limits)?.into_polys())
}

pub fn verify_full_gb(sys: &PolySystem, config: &Config) -> VerificationReport {
    let start = Instant::now();
    let limits = config.limits(start);
    let mut report = VerificationReport::new(Mode::FullGb, sys);
    let t = Instant::now();
    let gb = full_basis(sys, &limits);
    report.gb_calls.record(None, t.elapsed().as_secs_f64());
    match gb {
        Ok(gb) => {
            let m = linear_gb_membership(&linear_subset(&gb), &sys.spec_lin);
            let steps = m
                .certificate
                .as_ref()
                .map_or(0, |c| c.cofactors.iter().filter(|x| !x.is_zero()).count());
            report.set_steps(StepCounts {
                linear: steps as u64,
                nonlinear: 0,
            });
            if m.member {
                report.verdict = Verdict::Verified;
                report.certificate = m.certificate;
            } else {
                report.refute(sys, &m.remainder, &limits);
            }
        }
        Err(e) => report.inconclusive(e),
    }
    report.finish(start);
    report
}

pub fn verify_lex(sys: &PolySystem, config: &Config) -> VerificationReport {
    let start = Instant::now();
    let limits = config.limits(start);
    let mut report = VerificationReport::new(Mode::Lex, sys);
    let polys = sys.polynomial_map();
    match lex_normal_form(&sys.spec, &polys, &limits) {
        Ok(r) if r.is_zero() => report.verdict = Verdict::Verified,
        Ok(r) => {
            report.verdict = Verdict::NotVerified;
            report.remainder_inputs_only = r.vars().iter().all(|&v| sys.order.is_input(v));
            report.remainder = r.primitive().display(sys.order.table()).to_string();
        }
        Err(e) => report.inconclusive(e),
    }
    report.finish(start);
    report
}
