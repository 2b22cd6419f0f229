//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::Zero;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use aiglin::aig::{parse_ascii_aiger, write_ascii_aiger, write_binary_aiger};
use aiglin::benchgen::{generate, Fault, MultiplierConfig, MULT2_AAG};
use aiglin::groebner::reference::{reference_buchberger, with_field_polys, RefPoly};
use aiglin::groebner::{format_basis, is_groebner, linear_subset, parse_basis, same_ideal};
use aiglin::ordering::input_names;
use aiglin::poly::{parse_poly, reduce};
use aiglin::verify::preprocess::{
    eliminate_positive_nodes, merge_equal_inputs, propagate_equivalences, PolyMap,
};
use aiglin::verify::{full_basis, lex_normal_form, lex_substitute, linear_gb_membership};
use aiglin::{
    buchberger, encode, parse_aiger, verify, Aig, AndNode, Config, EncodeOptions, InputNaming,
    Limits, Linearization, Literal, Mode, Monomial, MonomialOrder, PolySystem, Polynomial,
    SpecInput, VarId, Verdict,
};

const DRL: MonomialOrder = MonomialOrder::DegRevLex;
const LEX: MonomialOrder = MonomialOrder::Lex;

const REFERENCE_ORDER: [&str; 22] = [
    "a0", "a1", "b0", "b1", "t11", "t10", "t01", "t00", "l16", "l10", "s0", "l12", "l14", "l18",
    "l20", "s1", "l22", "l24", "l26", "l28", "s2", "s3",
];
const REFERENCE_BASIS: &str = include_str!("fixtures/mult2_basis.txt");
const EXAMPLE2_RESULT: &str =
    "4*l24*l22*l16-4*l24*l22-4*l24*l16+8*l24-4*l22*l16+4*l22+2*s1+4*l16+s0-4*a1*b1-2*a1*b0-2*a0*b1-a0*b0";

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn mult2() -> Aig {
    parse_ascii_aiger(MULT2_AAG.as_bytes()).unwrap()
}

fn reference_system() -> PolySystem {
    let opts = EncodeOptions {
        naming: InputNaming::Interleaved,
        linearization: Linearization::ExtensionsOnly,
    };
    encode(&mult2(), &SpecInput::Multiplier, opts)
        .unwrap()
        .reordered(&REFERENCE_ORDER)
        .unwrap()
}

fn reference_fixture(sys: &PolySystem) -> Vec<Polynomial> {
    parse_basis(REFERENCE_BASIS, sys.order.table(), DRL).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let sys = reference_system();
    let fixture = reference_fixture(&sys);
    check(
        fixture.len() == 52,
        format!("fixture has {} polynomials", fixture.len()),
    )?;
    let b = full_basis(&sys, &Limits::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(
        fixture.iter().all(|p| reduce(p, &b).is_zero()),
        "a reference polynomial does not reduce to 0",
    )?;
    check(
        b.iter().all(|p| reduce(p, &fixture).is_zero()),
        "a basis member does not reduce to 0 by the reference basis",
    )?;
    check(is_groebner(&b, DRL), "result is not a Gröbner basis")?;
    let gens: Vec<Polynomial> = sys
        .polynomials()
        .iter()
        .map(|p| p.with_order(DRL))
        .collect();
    let exact = buchberger(&gens, DRL, &Limits::default()).map_err(|e| e.to_string())?;
    check(
        same_ideal(&b, exact.polys()),
        "interpolated basis differs from integer Buchberger",
    )?;
    check(
        elapsed < Duration::from_secs(1),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "{} members, ideal equal to the 52 reference polynomials, {elapsed:.2?}",
        b.len()
    ))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let sys = reference_system();
    let b = full_basis(&sys, &Limits::default()).map_err(|e| e.to_string())?;
    let linear = linear_subset(&b);
    let m = linear_gb_membership(&linear, &sys.spec_lin);
    check(m.member, "S_lin is not in the span of the linear members")?;
    let cert = m.certificate.ok_or("no certificate")?;
    check(
        cert.check(&sys.spec_lin),
        "cofactors do not reconstruct S_lin",
    )?;
    let fixture = reference_fixture(&sys);
    let g = |k: usize| fixture[k - 1].with_order(LEX);
    let combination = [(8, 13), (4, 12), (4, 11), (2, 7), (2, 6), (1, 2), (1, 1)]
        .iter()
        .fold(Polynomial::zero(LEX), |acc, &(c, k)| {
            acc.add_scaled(&BigInt::from(c), &g(k))
        });
    check(
        combination == sys.spec_lin.with_order(LEX),
        "8g13+4g12+4g11+2g7+2g6+g2+g1 differs from S_lin",
    )?;
    let reference_linear: Vec<Polynomial> = fixture[..13].to_vec();
    check(
        reference_linear.iter().all(Polynomial::is_linear),
        "reference g1..g13 are not all linear",
    )?;
    check(
        reference_linear
            .iter()
            .all(|p| reduce(p, &linear).is_zero())
            && linear
                .iter()
                .all(|p| reduce(p, &reference_linear).is_zero()),
        "linear spans differ",
    )?;
    let elapsed = start.elapsed();
    check(
        elapsed < Duration::from_secs(1),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "{} linear members, {} nonzero cofactors, {elapsed:.2?}",
        linear.len(),
        cert.cofactors.len()
    ))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let sys = encode(&mult2(), &SpecInput::Multiplier, EncodeOptions::default()).unwrap();
    let map = sys.polynomial_map();
    let mut s = sys.spec.with_order(LEX);
    for name in ["s3", "s2", "l28", "l26"] {
        let v = sys.order.get(name).ok_or(format!("no variable {name}"))?;
        s = lex_substitute(&s, v, &map[&v]);
    }
    let expected =
        parse_poly(EXAMPLE2_RESULT, sys.order.table(), LEX).map_err(|e| e.to_string())?;
    check(s.size() == 13, format!("{} monomials", s.size()))?;
    check(s.degree() == 3, format!("degree {}", s.degree()))?;
    check(
        s == expected,
        format!("got {}", s.display(sys.order.table())),
    )?;
    Ok(format!("13 monomials, degree 3, {:.2?}", start.elapsed()))
}

fn faults(n: usize) -> Vec<Fault> {
    let gates = generate(&MultiplierConfig::new(n)).unwrap().ands().len();
    let step = if n <= 2 { 1 } else { 5 };
    let mut out: Vec<Fault> = (0..gates)
        .step_by(step)
        .map(Fault::FlipOperandPolarity)
        .collect();
    out.extend((0..gates - 1).step_by(step).map(Fault::SwapOperands));
    out.extend((0..2 * n).map(Fault::DropOutputNegation));
    out
}

/// Multipliers of criterion 4 with at most 4 bits: correct ones and the
/// mutants the generator accepts.
fn small_multipliers() -> Vec<(String, Aig, bool)> {
    let mut out = Vec::new();
    for n in [2, 4] {
        out.push((
            format!("mult{n}"),
            generate(&MultiplierConfig::new(n)).unwrap(),
            true,
        ));
        for f in faults(n) {
            if let Ok(aig) = generate(&MultiplierConfig::with_fault(n, f)) {
                out.push((format!("mult{n} {f:?}"), aig, false));
            }
        }
    }
    out
}

fn criterion_4() -> Outcome {
    let cfg = Config::default();
    let mut times = Vec::new();
    for n in [2, 4, 8, 16] {
        let aig = generate(&MultiplierConfig::new(n)).unwrap();
        let start = Instant::now();
        let r = verify(&aig, &SpecInput::Multiplier, &cfg).map_err(|e| e.to_string())?;
        let t = start.elapsed();
        check(
            r.verdict == Verdict::Verified,
            format!("n={n}: {:?} {:?}", r.verdict, r.note),
        )?;
        if n == 16 {
            check(t < Duration::from_secs(120), format!("n=16 took {t:?}"))?;
        }
        times.push(format!("n={n} {t:.1?}"));
    }
    let mut mutants = 0;
    for (name, aig, correct) in small_multipliers() {
        if correct {
            continue;
        }
        let r = verify(&aig, &SpecInput::Multiplier, &cfg).map_err(|e| e.to_string())?;
        check(
            r.verdict == Verdict::NotVerified,
            format!("{name}: {:?}", r.verdict),
        )?;
        mutants += 1;
    }
    check(mutants > 0, "no mutants generated")?;
    Ok(format!("{}; {mutants} mutants refuted", times.join(", ")))
}

fn random_poly(rng: &mut StdRng, nvars: u32, max_terms: usize, max_deg: usize) -> Polynomial {
    let terms = rng.gen_range(1..=max_terms);
    Polynomial::from_pairs(
        DRL,
        (0..terms).map(|_| {
            let deg = rng.gen_range(0..=max_deg);
            let vars: Vec<VarId> = (0..deg).map(|_| VarId(rng.gen_range(0..nvars))).collect();
            (rng.gen_range(-3i64..=3), Monomial::from_vars(vars))
        }),
    )
}

fn random_system(rng: &mut StdRng, nvars: u32, max_gens: usize) -> Vec<Polynomial> {
    let count = rng.gen_range(1..=max_gens);
    (0..count)
        .map(|_| random_poly(rng, nvars, 4, 3))
        .filter(|p| !p.is_zero())
        .collect()
}

fn common_zeros(gens: &[Polynomial], nvars: u32) -> Vec<u32> {
    (0u32..1 << nvars)
        .filter(|bits| {
            gens.iter()
                .all(|g| g.eval(|v| bits >> v.0 & 1 == 1).is_zero())
        })
        .collect()
}

fn criterion_5() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let (mut members, mut non_members) = (0, 0);
    for case in 0..100 {
        let nvars = rng.gen_range(2..=6);
        let gens = random_system(&mut rng, nvars, 8);
        let gb = buchberger(&gens, DRL, &Limits::default()).map_err(|e| e.to_string())?;
        let linear = linear_subset(gb.polys());
        let target = if rng.gen_bool(0.5) && !linear.is_empty() {
            linear.iter().fold(Polynomial::zero(DRL), |acc, g| {
                acc.add_scaled(&BigInt::from(rng.gen_range(-3..=3)), g)
            })
        } else {
            random_poly(&mut rng, nvars, 4, 1)
        };
        let by_full = reduce(&target, gb.polys()).is_zero();
        let by_linear = reduce(&target, &linear).is_zero();
        let zeros = common_zeros(&gens, nvars);
        let oracle = zeros
            .iter()
            .all(|bits| target.eval(|v| bits >> v.0 & 1 == 1).is_zero());
        check(
            by_full == by_linear && by_linear == oracle,
            format!("case {case}: {by_full} {by_linear} {oracle}"),
        )?;
        if oracle {
            members += 1;
        } else {
            non_members += 1;
        }
    }
    Ok(format!(
        "100/100 agree ({members} members, {non_members} non-members)"
    ))
}

fn criterion_6() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    for case in 0..50 {
        let nvars = rng.gen_range(2..=8);
        let gens = random_system(&mut rng, nvars, 5);
        let gb = buchberger(&gens, DRL, &Limits::default()).map_err(|e| e.to_string())?;
        check(
            is_groebner(gb.polys(), DRL),
            format!("case {case}: not a Gröbner basis"),
        )?;
        let r = reference_buchberger(
            &with_field_polys(&gens, nvars as usize, DRL),
            DRL,
            1_000_000,
        )
        .map_err(|e| e.to_string())?;
        let r: Vec<Polynomial> = r
            .iter()
            .map(RefPoly::to_poly)
            .filter(|q| !q.is_zero())
            .collect();
        check(
            same_ideal(gb.polys(), &r),
            format!("case {case}: ideals differ"),
        )?;
    }
    Ok("50/50 equal to the reference engine".into())
}

/// A random AIG together with a specification `sum 2^i s_i - P` where `P`
/// is the exact multilinear form of the circuit's weighted outputs, perturbed
/// by one monomial half of the time.
struct RandomCase {
    aig: Aig,
    spec: String,
    holds: bool,
}

fn random_aig(rng: &mut StdRng) -> Aig {
    let k = rng.gen_range(2..=10u32);
    let g = rng.gen_range(1..=25u32);
    let mut ands = Vec::new();
    for i in 0..g {
        let index = k + 1 + i;
        let a = rng.gen_range(1..index);
        let mut b = rng.gen_range(1..index);
        if a == b {
            b = if a > 1 { a - 1 } else { a + 1 };
        }
        if b >= index {
            b = a;
        }
        ands.push(AndNode::new(
            index,
            Literal::new(a, rng.gen_bool(0.5)),
            Literal::new(b, rng.gen_bool(0.5)),
        ));
    }
    let outs = rng.gen_range(1..=3u32.min(g));
    let outputs = (0..outs)
        .map(|j| Literal::new(k + g - j, rng.gen_bool(0.3)))
        .collect();
    let inputs = (1..=k).map(|i| Literal::new(i, false)).collect();
    Aig::new(k + g, inputs, outputs, ands).unwrap()
}

fn weighted_outputs(aig: &Aig, bits: u32) -> i64 {
    let k = aig.inputs().len();
    let values: Vec<bool> = (0..k).map(|i| bits >> i & 1 == 1).collect();
    aig.evaluate(&values)
        .iter()
        .enumerate()
        .map(|(i, &b)| if b { 1i64 << i } else { 0 })
        .sum()
}

fn monomial_text(mask: u32, names: &[String]) -> String {
    let vars: Vec<&str> = (0..names.len())
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| names[i].as_str())
        .collect();
    if vars.is_empty() {
        "1".into()
    } else {
        vars.join("*")
    }
}

fn random_case(rng: &mut StdRng) -> RandomCase {
    let aig = random_aig(rng);
    let k = aig.inputs().len();
    let names = input_names(k, InputNaming::Interleaved);
    // Moebius transform of the weighted output table
    let mut coeffs: Vec<i64> = (0u32..1 << k).map(|b| weighted_outputs(&aig, b)).collect();
    for i in 0..k {
        for mask in 0..coeffs.len() {
            if mask >> i & 1 == 1 {
                coeffs[mask] -= coeffs[mask ^ (1 << i)];
            }
        }
    }
    let holds = rng.gen_bool(0.5);
    if !holds {
        let m = rng.gen_range(0..coeffs.len());
        coeffs[m] += if rng.gen_bool(0.5) { 1 } else { -1 };
    }
    let mut spec: Vec<String> = (0..aig.outputs().len())
        .map(|i| format!("+{}*s{i}", 1i64 << i))
        .collect();
    for (mask, &c) in coeffs.iter().enumerate() {
        if c != 0 {
            spec.push(format!("{:+}*{}", -c, monomial_text(mask as u32, &names)));
        }
    }
    let spec = spec.concat().trim_start_matches('+').to_string();
    RandomCase { aig, spec, holds }
}

/// Truth-table oracle: evaluates the specification on every input pattern.
fn oracle(case: &RandomCase) -> bool {
    let sys = encode(
        &case.aig,
        &SpecInput::Text(case.spec.clone()),
        EncodeOptions::default(),
    )
    .unwrap();
    let k = case.aig.inputs().len();
    let inputs = sys.order.inputs().to_vec();
    let outputs = sys.order.outputs().to_vec();
    (0u32..1 << k).all(|bits| {
        let values: Vec<bool> = (0..k).map(|i| bits >> i & 1 == 1).collect();
        let outs = case.aig.evaluate(&values);
        sys.spec
            .eval(|v| match inputs.iter().position(|&x| x == v) {
                Some(i) => values[i],
                None => {
                    outs[outputs
                        .iter()
                        .position(|&x| x == v)
                        .expect("spec over inputs and outputs")]
                }
            })
            .is_zero()
    })
}

fn lex_verdict(sys: &PolySystem, polys: &PolyMap) -> Result<bool, String> {
    Ok(lex_normal_form(&sys.spec, polys, &Limits::default())
        .map_err(|e| e.to_string())?
        .is_zero())
}

fn criterion_7() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let mut rewrites = [0usize; 3];
    let mut holding = 0;
    for case_no in 0..100 {
        let case = random_case(&mut rng);
        let truth = oracle(&case);
        check(
            truth == case.holds,
            format!("case {case_no}: oracle disagrees with construction"),
        )?;
        holding += usize::from(truth);
        let sys = encode(
            &case.aig,
            &SpecInput::Text(case.spec.clone()),
            EncodeOptions::default(),
        )
        .unwrap();
        let base = sys.polynomial_map();
        let before = lex_verdict(&sys, &base)?;
        let protected: BTreeSet<VarId> = sys.spec.vars().into_iter().collect();
        let mut merged = base.clone();
        rewrites[0] += merge_equal_inputs(&mut merged);
        let mut eliminated = base.clone();
        rewrites[1] += eliminate_positive_nodes(
            &mut eliminated,
            &sys.positive_only,
            &protected,
            &mut BTreeSet::new(),
        );
        let mut propagated = base.clone();
        rewrites[2] += propagate_equivalences(&mut propagated, &mut BTreeSet::new());
        let after = [
            lex_verdict(&sys, &merged)?,
            lex_verdict(&sys, &eliminated)?,
            lex_verdict(&sys, &propagated)?,
        ];
        check(
            before == truth && after.iter().all(|&a| a == truth),
            format!("case {case_no}: oracle {truth}, before {before}, after {after:?}"),
        )?;
    }
    Ok(format!(
        "100/100 agree ({holding} hold; rewrites applied: {} merges, {} eliminations, {} propagations)",
        rewrites[0], rewrites[1], rewrites[2]
    ))
}

fn criterion_8() -> Outcome {
    let modes = [Mode::Local, Mode::FullGb, Mode::Lex];
    let verdicts = |aig: &Aig, spec: &SpecInput| -> Result<Vec<Verdict>, String> {
        modes
            .iter()
            .map(|&mode| {
                let cfg = Config {
                    mode,
                    ..Config::default()
                };
                Ok(verify(aig, spec, &cfg).map_err(|e| e.to_string())?.verdict)
            })
            .collect()
    };
    let mut multipliers = 0;
    for (name, aig, correct) in small_multipliers() {
        let v = verdicts(&aig, &SpecInput::Multiplier)?;
        let expected = if correct {
            Verdict::Verified
        } else {
            Verdict::NotVerified
        };
        check(v.iter().all(|&x| x == expected), format!("{name}: {v:?}"))?;
        multipliers += 1;
    }
    let mut rng = StdRng::seed_from_u64(7);
    for case_no in 0..100 {
        let case = random_case(&mut rng);
        let v = verdicts(&case.aig, &SpecInput::Text(case.spec.clone()))?;
        let expected = if case.holds {
            Verdict::Verified
        } else {
            Verdict::NotVerified
        };
        check(
            v.iter().all(|&x| x == expected),
            format!("random case {case_no}: {v:?}"),
        )?;
    }
    Ok(format!(
        "{multipliers} multipliers and 100 random circuits agree in all modes"
    ))
}

fn criterion_9() -> Outcome {
    let mut aigs: Vec<Aig> = [2, 4, 8]
        .iter()
        .map(|&n| generate(&MultiplierConfig::new(n)).unwrap())
        .collect();
    let mut rng = StdRng::seed_from_u64(9);
    aigs.extend((0..20).map(|_| random_aig(&mut rng).canonicalize()));
    for (i, aig) in aigs.iter().enumerate() {
        let ascii = write_ascii_aiger(aig);
        let binary = write_binary_aiger(&parse_aiger(&ascii).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let back = write_ascii_aiger(&parse_aiger(&binary).map_err(|e| e.to_string())?);
        check(
            back == ascii,
            format!("circuit {i}: ASCII -> binary -> ASCII changed the file"),
        )?;
        let again = write_binary_aiger(&parse_aiger(&back).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        check(
            again == binary,
            format!("circuit {i}: binary output not stable"),
        )?;
    }
    let sys = reference_system();
    let b = full_basis(&sys, &Limits::default()).map_err(|e| e.to_string())?;
    let text = format_basis(&b, sys.order.table());
    let parsed = parse_basis(&text, sys.order.table(), DRL).map_err(|e| e.to_string())?;
    check(
        parsed == b,
        "dump-gb output does not re-parse to the same basis",
    )?;
    Ok(format!(
        "{} circuits round-trip; basis of {} members re-parses",
        aigs.len(),
        b.len()
    ))
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failed = Vec::new();
    for (k, f) in criteria {
        match f() {
            Ok(detail) => println!("criterion {k}: PASS ({detail})"),
            Err(why) => {
                println!("criterion {k}: FAIL ({why})");
                failed.push(k);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
