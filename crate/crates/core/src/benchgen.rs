//! Array multipliers (ripple-carry accumulation) with optional injected
//! faults.
//!
//! Inputs are interleaved `a0, b0, a1, b1, ...`; output `k` carries bit `k`
//! of the product. Adders use three AND nodes per half adder:
//! `c = x & y`, `n = !x & !y`, `s = !n & !c`.

use thiserror::Error;

use crate::aig::{Aig, AndNode, Literal};

/// The 2-bit array multiplier as the generator numbers it.
pub const MULT2_AAG: &str = "aag 14 4 0 4 10\n2\n4\n6\n8\n10\n20\n28\n24\n\
10 4 2\n12 6 4\n14 8 2\n16 14 12\n18 15 13\n20 19 17\n22 8 6\n24 22 16\n26 23 17\n28 27 25\n";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Negates the right operand of AND gate `k` (generation order).
    FlipOperandPolarity(usize),
    /// Exchanges the right operands of AND gates `k` and `k + 1`.
    SwapOperands(usize),
    /// Toggles the negation of output `k`.
    DropOutputNegation(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiplierConfig {
    pub n: usize,
    pub fault: Option<Fault>,
}

impl MultiplierConfig {
    pub fn new(n: usize) -> Self {
        MultiplierConfig { n, fault: None }
    }

    pub fn with_fault(n: usize, fault: Fault) -> Self {
        MultiplierConfig {
            n,
            fault: Some(fault),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BenchError {
    #[error("bit width must be at least 1")]
    ZeroWidth,
    #[error("fault target {0} does not exist")]
    FaultOutOfRange(usize),
    #[error("swapping operands at gate {0} would create a cycle")]
    FaultCreatesCycle(usize),
    #[error("fault {0:?} does not change the circuit's function")]
    FaultIsNoOp(Fault),
    #[error("expected {expected} inputs and outputs, found {inputs} inputs and {outputs} outputs")]
    ArityMismatch {
        expected: usize,
        inputs: usize,
        outputs: usize,
    },
    #[error("truth tables are limited to n <= 10")]
    TooWide,
}

struct Builder {
    next: u32,
    ands: Vec<AndNode>,
}

impl Builder {
    fn and(&mut self, a: Literal, b: Literal) -> Literal {
        let node = AndNode::new(self.next, a, b);
        self.next += 1;
        self.ands.push(node);
        node.literal()
    }

    fn half_adder(&mut self, x: Literal, y: Literal) -> (Literal, Literal) {
        let c = self.and(x, y);
        let n = self.and(x.negate(), y.negate());
        let s = self.and(n.negate(), c.negate());
        (s, c)
    }

    fn full_adder(&mut self, x: Literal, y: Literal, z: Literal) -> (Literal, Literal) {
        let (s1, c1) = self.half_adder(x, y);
        let (s, c2) = self.half_adder(s1, z);
        let o = self.and(c1.negate(), c2.negate());
        (s, o.negate())
    }
}

fn a_input(i: usize) -> Literal {
    Literal::new(2 * i as u32 + 1, false)
}

fn b_input(j: usize) -> Literal {
    Literal::new(2 * j as u32 + 2, false)
}

fn build(n: usize) -> Aig {
    let mut b = Builder {
        next: 2 * n as u32 + 1,
        ands: Vec::new(),
    };
    let mut bits: Vec<Literal> = (0..n).map(|i| b.and(a_input(i), b_input(0))).collect();
    let mut outputs = Vec::with_capacity(2 * n);
    if n == 1 {
        outputs.extend([bits[0], Literal::FALSE]);
    } else {
        // bits[k] holds the running sum for column k
        for j in 1..n {
            let mut carry: Option<Literal> = None;
            for i in 0..n {
                let col = i + j;
                let pp = b.and(a_input(i), b_input(j));
                let acc = bits.get(col).copied();
                let (s, c) = match (acc, carry) {
                    (None, None) => (pp, None),
                    (Some(x), None) | (None, Some(x)) => {
                        let (s, c) = b.half_adder(pp, x);
                        (s, Some(c))
                    }
                    (Some(x), Some(z)) => {
                        let (s, c) = b.full_adder(pp, x, z);
                        (s, Some(c))
                    }
                };
                if col < bits.len() {
                    bits[col] = s;
                } else {
                    bits.push(s);
                }
                carry = c;
            }
            if let Some(c) = carry {
                bits.push(c);
            }
        }
        outputs = bits;
        outputs.resize(2 * n, Literal::FALSE);
    }
    let inputs = (0..n).flat_map(|i| [a_input(i), b_input(i)]).collect();
    Aig::new(b.next - 1, inputs, outputs, b.ands).expect("generator builds valid graphs")
}

fn apply_fault(aig: &Aig, fault: Fault) -> Result<Aig, BenchError> {
    let mut ands = aig.ands().to_vec();
    let mut outputs = aig.outputs().to_vec();
    match fault {
        Fault::FlipOperandPolarity(k) => {
            let a = ands.get(k).ok_or(BenchError::FaultOutOfRange(k))?;
            ands[k] = AndNode::new(a.index, a.left, a.right.negate());
        }
        Fault::SwapOperands(k) => {
            if k + 1 >= ands.len() {
                return Err(BenchError::FaultOutOfRange(k));
            }
            let (x, y) = (ands[k], ands[k + 1]);
            // gate k cannot read a node defined after it
            if y.right.index() >= x.index {
                return Err(BenchError::FaultCreatesCycle(k));
            }
            ands[k] = AndNode::new(x.index, x.left, y.right);
            ands[k + 1] = AndNode::new(y.index, y.left, x.right);
        }
        Fault::DropOutputNegation(k) => {
            let o = outputs.get(k).ok_or(BenchError::FaultOutOfRange(k))?;
            outputs[k] = o.negate();
        }
    }
    Ok(
        Aig::new(aig.max_index(), aig.inputs().to_vec(), outputs, ands)
            .expect("fault keeps graph valid"),
    )
}

fn same_function(a: &Aig, b: &Aig, n: usize) -> bool {
    let rows: Box<dyn Iterator<Item = u64>> = if n <= 8 {
        Box::new(0..1u64 << (2 * n))
    } else {
        // deterministic sample for wide circuits
        let mut x = 0x9e37_79b9_7f4a_7c15u64;
        Box::new((0..4096).map(move |_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            x
        }))
    };
    for r in rows {
        let vals: Vec<bool> = (0..2 * n).map(|k| r >> (k % 64) & 1 == 1).collect();
        if a.evaluate(&vals) != b.evaluate(&vals) {
            return false;
        }
    }
    true
}

/// Builds an `n x n` array multiplier, optionally with one fault. Faults that
/// leave the function unchanged are rejected.
pub fn generate(config: &MultiplierConfig) -> Result<Aig, BenchError> {
    if config.n == 0 {
        return Err(BenchError::ZeroWidth);
    }
    let good = build(config.n);
    match config.fault {
        None => Ok(good),
        Some(f) => {
            let bad = apply_fault(&good, f)?;
            if same_function(&good, &bad, config.n) {
                return Err(BenchError::FaultIsNoOp(f));
            }
            Ok(bad)
        }
    }
}

/// Exhaustively checks that the outputs encode `a * b` (interleaved inputs).
pub fn truth_table_check(aig: &Aig, n: usize) -> Result<bool, BenchError> {
    if aig.inputs().len() != 2 * n || aig.outputs().len() != 2 * n {
        return Err(BenchError::ArityMismatch {
            expected: 2 * n,
            inputs: aig.inputs().len(),
            outputs: aig.outputs().len(),
        });
    }
    if n > 10 {
        return Err(BenchError::TooWide);
    }
    let mut vals = vec![false; 2 * n];
    for a in 0u64..1 << n {
        for b in 0u64..1 << n {
            for i in 0..n {
                vals[2 * i] = a >> i & 1 == 1;
                vals[2 * i + 1] = b >> i & 1 == 1;
            }
            let out = aig.evaluate(&vals);
            let got = out
                .iter()
                .enumerate()
                .fold(0u64, |acc, (k, &v)| acc | (v as u64) << k);
            if got != a * b {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
