//! Combinational and-inverter graphs and the AIGER file format.
//!
//! Only headers `M I L O A` with `L = 0` are accepted. Symbol tables and
//! comment sections are skipped on input and never written.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

/// Errors raised while reading or validating an AIG.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum AigError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("latches are not supported (L = {0})")]
    LatchesUnsupported(u64),
    #[error("literal {literal} out of range for maximum index {max_index}")]
    IndexOutOfRange { literal: u64, max_index: u32 },
    #[error("AND node {node} has operand literal {operand} that does not precede it")]
    CycleDetected { node: u32, operand: u32 },
    #[error("binary AND section ends prematurely")]
    TruncatedDeltaStream,
    #[error("malformed line {line}: {msg}")]
    MalformedLine { line: usize, msg: String },
    #[error("index {0} is defined more than once")]
    DuplicateDefinition(u32),
    #[error("index {0} is neither an input nor an AND node")]
    UndefinedIndex(u32),
    #[error("unknown node index {0}")]
    UnknownIndex(u32),
    #[error("graph is not numbered canonically (inputs 1..=I, AND nodes I+1..=M in order)")]
    NotBinaryCompatible,
}

/// AIGER literal: `2 * index + negated`. Literal 0 is constant false, 1 is
/// constant true.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal(pub u32);

impl Literal {
    pub const FALSE: Literal = Literal(0);
    pub const TRUE: Literal = Literal(1);

    pub fn new(index: u32, negated: bool) -> Self {
        Literal(2 * index + negated as u32)
    }

    pub fn index(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn is_constant(self) -> bool {
        self.0 < 2
    }

    #[must_use]
    pub fn negate(self) -> Self {
        Literal(self.0 ^ 1)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A two-input AND node. Operands are stored with `left >= right`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AndNode {
    pub index: u32,
    pub left: Literal,
    pub right: Literal,
}

impl AndNode {
    pub fn new(index: u32, a: Literal, b: Literal) -> Self {
        let (left, right) = if a >= b { (a, b) } else { (b, a) };
        AndNode { index, left, right }
    }

    pub fn literal(&self) -> Literal {
        Literal::new(self.index, false)
    }

    pub fn operands(&self) -> [Literal; 2] {
        [self.left, self.right]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Constant,
    Input(usize),
    And(usize),
}

/// An immutable combinational AIG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aig {
    max_index: u32,
    inputs: Vec<Literal>,
    outputs: Vec<Literal>,
    ands: Vec<AndNode>,
    kinds: Vec<NodeKind>,
    dist: Vec<u32>,
    depth: Vec<u32>,
    fanouts: Vec<Vec<u32>>,
}

impl Aig {
    /// Builds and validates a graph. AND operands are normalized to
    /// `left >= right`.
    pub fn new(
        max_index: u32,
        inputs: Vec<Literal>,
        outputs: Vec<Literal>,
        ands: Vec<AndNode>,
    ) -> Result<Self, AigError> {
        let n = max_index as usize + 1;
        let mut kinds: Vec<Option<NodeKind>> = vec![None; n];
        kinds[0] = Some(NodeKind::Constant);
        let check = |lit: Literal| -> Result<(), AigError> {
            if lit.index() > max_index {
                Err(AigError::IndexOutOfRange {
                    literal: lit.0 as u64,
                    max_index,
                })
            } else {
                Ok(())
            }
        };
        for (pos, &lit) in inputs.iter().enumerate() {
            check(lit)?;
            if lit.is_negated() || lit.is_constant() {
                return Err(AigError::MalformedLine {
                    line: 0,
                    msg: format!("input literal {lit} must be even and non-constant"),
                });
            }
            let slot = &mut kinds[lit.index() as usize];
            if slot.is_some() {
                return Err(AigError::DuplicateDefinition(lit.index()));
            }
            *slot = Some(NodeKind::Input(pos));
        }
        let ands: Vec<AndNode> = ands
            .into_iter()
            .map(|a| AndNode::new(a.index, a.left, a.right))
            .collect();
        for (pos, and) in ands.iter().enumerate() {
            if and.index == 0 || and.index > max_index {
                return Err(AigError::IndexOutOfRange {
                    literal: 2 * and.index as u64,
                    max_index,
                });
            }
            for op in and.operands() {
                check(op)?;
                if op.index() >= and.index {
                    return Err(AigError::CycleDetected {
                        node: and.index,
                        operand: op.0,
                    });
                }
            }
            let slot = &mut kinds[and.index as usize];
            if slot.is_some() {
                return Err(AigError::DuplicateDefinition(and.index));
            }
            *slot = Some(NodeKind::And(pos));
        }
        let kinds = kinds
            .into_iter()
            .enumerate()
            .map(|(i, k)| k.ok_or(AigError::UndefinedIndex(i as u32)))
            .collect::<Result<Vec<_>, _>>()?;
        for &o in &outputs {
            check(o)?;
        }

        let mut dist = vec![0u32; n];
        let mut depth = vec![0u32; n];
        let mut fanouts = vec![Vec::new(); n];
        // operands precede their node, so index order is topological
        let mut by_index: Vec<&AndNode> = ands.iter().collect();
        by_index.sort_by_key(|a| a.index);
        for and in by_index {
            let (l, r) = (and.left.index() as usize, and.right.index() as usize);
            dist[and.index as usize] = 1 + dist[l].min(dist[r]);
            depth[and.index as usize] = 1 + depth[l].max(depth[r]);
            for op in [l, r] {
                if op != 0 && !fanouts[op].contains(&and.index) {
                    fanouts[op].push(and.index);
                }
            }
        }
        Ok(Aig {
            max_index,
            inputs,
            outputs,
            ands,
            kinds,
            dist,
            depth,
            fanouts,
        })
    }

    pub fn max_index(&self) -> u32 {
        self.max_index
    }

    pub fn inputs(&self) -> &[Literal] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Literal] {
        &self.outputs
    }

    pub fn ands(&self) -> &[AndNode] {
        &self.ands
    }

    pub fn kind(&self, index: u32) -> Result<NodeKind, AigError> {
        self.kinds
            .get(index as usize)
            .copied()
            .ok_or(AigError::UnknownIndex(index))
    }

    pub fn and_node(&self, index: u32) -> Option<&AndNode> {
        match self.kinds.get(index as usize) {
            Some(NodeKind::And(pos)) => Some(&self.ands[*pos]),
            _ => None,
        }
    }

    pub fn is_input(&self, index: u32) -> bool {
        matches!(self.kinds.get(index as usize), Some(NodeKind::Input(_)))
    }

    fn known(&self, index: u32) -> Result<(), AigError> {
        match self.kinds.get(index as usize) {
            Some(NodeKind::Input(_)) | Some(NodeKind::And(_)) => Ok(()),
            _ => Err(AigError::UnknownIndex(index)),
        }
    }

    /// Minimum number of AND levels between the node and a primary input.
    pub fn distance_to_inputs(&self, index: u32) -> Result<u32, AigError> {
        self.known(index)?;
        Ok(self.dist[index as usize])
    }

    /// Longest path from the node down to a primary input.
    pub fn depth(&self, index: u32) -> Result<u32, AigError> {
        self.known(index)?;
        Ok(self.depth[index as usize])
    }

    /// Key of the row-wise variable order: greater key = topologically larger.
    pub fn rank_key(&self, index: u32) -> (u32, u32) {
        (self.depth[index as usize], index)
    }

    /// AND nodes that use `index` as an operand.
    pub fn fanouts(&self, index: u32) -> Result<&[u32], AigError> {
        self.known(index)?;
        Ok(&self.fanouts[index as usize])
    }

    /// Non-constant operand indices of an AND node; empty for inputs.
    pub fn operand_indices(&self, index: u32) -> Result<Vec<u32>, AigError> {
        self.known(index)?;
        Ok(match self.and_node(index) {
            Some(a) => {
                let mut v: Vec<u32> = a
                    .operands()
                    .iter()
                    .filter(|l| !l.is_constant())
                    .map(|l| l.index())
                    .collect();
                v.dedup();
                v
            }
            None => Vec::new(),
        })
    }

    /// All nodes reachable downward from `index` within at most `d` edges.
    pub fn children(&self, index: u32, d: u32) -> Result<BTreeSet<u32>, AigError> {
        self.known(index)?;
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([(index, 0u32)]);
        while let Some((node, level)) = queue.pop_front() {
            if level == d {
                continue;
            }
            for child in self.operand_indices(node)? {
                if seen.insert(child) {
                    queue.push_back((child, level + 1));
                }
            }
        }
        Ok(seen)
    }

    /// AND nodes ranked below `index` that share at least one operand node.
    pub fn siblings(&self, index: u32) -> Result<BTreeSet<u32>, AigError> {
        let key = self.rank_key(index);
        let mut out = BTreeSet::new();
        for child in self.operand_indices(index)? {
            for &p in &self.fanouts[child as usize] {
                if p != index && self.rank_key(p) < key {
                    out.insert(p);
                }
            }
        }
        Ok(out)
    }

    /// AND nodes whose non-constant operands all lie in `set`.
    pub fn parents_within(&self, set: &BTreeSet<u32>) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        for &member in set {
            if let Some(fo) = self.fanouts.get(member as usize) {
                for &p in fo {
                    let ops = self.operand_indices(p).unwrap_or_default();
                    if ops.iter().all(|o| set.contains(o)) {
                        out.insert(p);
                    }
                }
            }
        }
        out
    }

    /// Evaluates every node under an input assignment (`values[k]` for
    /// input `k`). Returns one Boolean per node index.
    pub fn simulate(&self, values: &[bool]) -> Vec<bool> {
        let mut node = vec![false; self.max_index as usize + 1];
        for (k, lit) in self.inputs.iter().enumerate() {
            node[lit.index() as usize] = values[k];
        }
        let mut ands: Vec<&AndNode> = self.ands.iter().collect();
        ands.sort_by_key(|a| a.index);
        for a in ands {
            node[a.index as usize] = lit_value(&node, a.left) && lit_value(&node, a.right);
        }
        node
    }

    /// Output values under an input assignment.
    pub fn evaluate(&self, values: &[bool]) -> Vec<bool> {
        let node = self.simulate(values);
        self.outputs.iter().map(|&o| lit_value(&node, o)).collect()
    }

    /// Whether the numbering is the one the binary format implies.
    pub fn is_binary_compatible(&self) -> bool {
        let ni = self.inputs.len() as u32;
        self.max_index == ni + self.ands.len() as u32
            && self
                .inputs
                .iter()
                .enumerate()
                .all(|(k, l)| l.index() == k as u32 + 1)
            && self
                .ands
                .iter()
                .enumerate()
                .all(|(k, a)| a.index == ni + 1 + k as u32)
    }

    /// Renumbers nodes canonically: inputs `1..=I` in order, AND nodes after
    /// them in ascending original index. Unreachable structure is kept.
    pub fn canonicalize(&self) -> Aig {
        let mut map = vec![0u32; self.max_index as usize + 1];
        let mut next = 1;
        for l in &self.inputs {
            map[l.index() as usize] = next;
            next += 1;
        }
        let mut ands: Vec<&AndNode> = self.ands.iter().collect();
        ands.sort_by_key(|a| a.index);
        for a in &ands {
            map[a.index as usize] = next;
            next += 1;
        }
        let tr = |l: Literal| Literal::new(map[l.index() as usize], l.is_negated());
        Aig::new(
            next - 1,
            self.inputs.iter().map(|&l| tr(l)).collect(),
            self.outputs.iter().map(|&l| tr(l)).collect(),
            ands.iter()
                .map(|a| AndNode::new(map[a.index as usize], tr(a.left), tr(a.right)))
                .collect(),
        )
        .expect("renumbering preserves validity")
    }
}

fn lit_value(node: &[bool], lit: Literal) -> bool {
    node[lit.index() as usize] ^ lit.is_negated()
}

struct Header {
    max_index: u32,
    inputs: usize,
    outputs: usize,
    ands: usize,
}

fn parse_header(line: &str, magic: &str) -> Result<Header, AigError> {
    let mut it = line.split_ascii_whitespace();
    if it.next() != Some(magic) {
        return Err(AigError::MalformedHeader(line.to_string()));
    }
    let nums: Vec<u64> = it
        .map(|t| t.parse::<u64>())
        .collect::<Result<_, _>>()
        .map_err(|_| AigError::MalformedHeader(line.to_string()))?;
    // AIGER 1.9 allows B C J F after A; they must be zero here
    if nums.len() < 5 || nums[5..].iter().any(|&x| x != 0) {
        return Err(AigError::MalformedHeader(line.to_string()));
    }
    if nums[2] > 0 {
        return Err(AigError::LatchesUnsupported(nums[2]));
    }
    let max_index =
        u32::try_from(nums[0]).map_err(|_| AigError::MalformedHeader(line.to_string()))?;
    if nums[1] + nums[4] > nums[0] {
        return Err(AigError::MalformedHeader(format!(
            "{line} (I + A exceeds M)"
        )));
    }
    Ok(Header {
        max_index,
        inputs: nums[1] as usize,
        outputs: nums[3] as usize,
        ands: nums[4] as usize,
    })
}

fn parse_literal(tok: &str, line: usize, max_index: u32) -> Result<Literal, AigError> {
    let v: u64 = tok.parse().map_err(|_| AigError::MalformedLine {
        line,
        msg: format!("bad literal '{tok}'"),
    })?;
    if v / 2 > max_index as u64 {
        return Err(AigError::IndexOutOfRange {
            literal: v,
            max_index,
        });
    }
    Ok(Literal(v as u32))
}

fn numbers_on_line(
    lines: &mut std::iter::Enumerate<std::str::Lines<'_>>,
    count: usize,
    max_index: u32,
) -> Result<(usize, Vec<Literal>), AigError> {
    let (no, line) = lines.next().ok_or(AigError::MalformedLine {
        line: 0,
        msg: "unexpected end of file".into(),
    })?;
    let toks: Vec<&str> = line.split_ascii_whitespace().collect();
    if toks.len() != count {
        return Err(AigError::MalformedLine {
            line: no + 1,
            msg: format!("expected {count} literal(s), found {}", toks.len()),
        });
    }
    let lits = toks
        .iter()
        .map(|t| parse_literal(t, no + 1, max_index))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((no + 1, lits))
}

/// Parses the ASCII (`aag`) format.
pub fn parse_ascii_aiger(text: &[u8]) -> Result<Aig, AigError> {
    let text = std::str::from_utf8(text)
        .map_err(|_| AigError::MalformedHeader("input is not valid UTF-8".into()))?;
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l).unwrap_or("");
    let h = parse_header(header, "aag")?;
    let mut inputs = Vec::with_capacity(h.inputs);
    for _ in 0..h.inputs {
        let (line, lits) = numbers_on_line(&mut lines, 1, h.max_index)?;
        let lit = lits[0];
        if lit.is_negated() || lit.is_constant() {
            return Err(AigError::MalformedLine {
                line,
                msg: format!("invalid input literal {lit}"),
            });
        }
        inputs.push(lit);
    }
    let mut outputs = Vec::with_capacity(h.outputs);
    for _ in 0..h.outputs {
        outputs.push(numbers_on_line(&mut lines, 1, h.max_index)?.1[0]);
    }
    let mut ands = Vec::with_capacity(h.ands);
    for _ in 0..h.ands {
        let (line, lits) = numbers_on_line(&mut lines, 3, h.max_index)?;
        if lits[0].is_negated() || lits[0].is_constant() {
            return Err(AigError::MalformedLine {
                line,
                msg: format!("invalid AND literal {}", lits[0]),
            });
        }
        ands.push(AndNode::new(lits[0].index(), lits[1], lits[2]));
    }
    Aig::new(h.max_index, inputs, outputs, ands)
}

/// Parses the binary (`aig`) format.
pub fn parse_binary_aiger(bytes: &[u8]) -> Result<Aig, AigError> {
    let mut pos = 0usize;
    let next_line = |pos: &mut usize| -> Result<&str, AigError> {
        let start = *pos;
        let end = bytes[start..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|o| start + o)
            .ok_or(AigError::MalformedLine {
                line: 0,
                msg: "unterminated line".into(),
            })?;
        *pos = end + 1;
        std::str::from_utf8(&bytes[start..end]).map_err(|_| AigError::MalformedLine {
            line: 0,
            msg: "invalid UTF-8".into(),
        })
    };
    let header =
        next_line(&mut pos).map_err(|_| AigError::MalformedHeader("missing header".into()))?;
    let h = parse_header(header, "aig")?;
    if h.max_index as usize != h.inputs + h.ands {
        return Err(AigError::MalformedHeader(format!(
            "{header} (binary format requires M = I + A)"
        )));
    }
    let inputs: Vec<Literal> = (1..=h.inputs as u32)
        .map(|i| Literal::new(i, false))
        .collect();
    let mut outputs = Vec::with_capacity(h.outputs);
    for k in 0..h.outputs {
        let line = next_line(&mut pos)?;
        outputs.push(parse_literal(line.trim(), k + 2, h.max_index)?);
    }
    let mut ands = Vec::with_capacity(h.ands);
    for k in 0..h.ands {
        let lhs = 2 * (h.inputs + 1 + k) as u64;
        let d0 = read_delta(bytes, &mut pos)?;
        let d1 = read_delta(bytes, &mut pos)?;
        let rhs0 = lhs
            .checked_sub(d0)
            .filter(|_| d0 > 0)
            .ok_or(AigError::CycleDetected {
                node: (lhs / 2) as u32,
                operand: lhs.saturating_sub(d0) as u32,
            })?;
        let rhs1 = rhs0.checked_sub(d1).ok_or(AigError::MalformedLine {
            line: 0,
            msg: format!("negative operand in AND {k}"),
        })?;
        ands.push(AndNode::new(
            (lhs / 2) as u32,
            Literal(rhs0 as u32),
            Literal(rhs1 as u32),
        ));
    }
    Aig::new(h.max_index, inputs, outputs, ands)
}

fn read_delta(bytes: &[u8], pos: &mut usize) -> Result<u64, AigError> {
    let mut x = 0u64;
    let mut shift = 0;
    loop {
        let b = *bytes.get(*pos).ok_or(AigError::TruncatedDeltaStream)?;
        *pos += 1;
        if shift > 63 {
            return Err(AigError::TruncatedDeltaStream);
        }
        x |= ((b & 0x7f) as u64) << shift;
        if b & 0x80 == 0 {
            return Ok(x);
        }
        shift += 7;
    }
}

fn write_delta(out: &mut Vec<u8>, mut x: u64) {
    while x & !0x7f != 0 {
        out.push((x & 0x7f) as u8 | 0x80);
        x >>= 7;
    }
    out.push(x as u8);
}

/// Detects the format from the magic word.
pub fn parse_aiger(bytes: &[u8]) -> Result<Aig, AigError> {
    if bytes.starts_with(b"aag") {
        parse_ascii_aiger(bytes)
    } else if bytes.starts_with(b"aig") {
        parse_binary_aiger(bytes)
    } else {
        Err(AigError::MalformedHeader("expected 'aag' or 'aig'".into()))
    }
}

pub fn write_ascii_aiger(aig: &Aig) -> Vec<u8> {
    use std::fmt::Write;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "aag {} {} 0 {} {}",
        aig.max_index,
        aig.inputs.len(),
        aig.outputs.len(),
        aig.ands.len()
    );
    for l in &aig.inputs {
        let _ = writeln!(s, "{l}");
    }
    for l in &aig.outputs {
        let _ = writeln!(s, "{l}");
    }
    for a in &aig.ands {
        let _ = writeln!(s, "{} {} {}", a.literal(), a.left, a.right);
    }
    s.into_bytes()
}

/// Writes the binary format. The graph must already be canonically numbered
/// (see [`Aig::canonicalize`]).
pub fn write_binary_aiger(aig: &Aig) -> Result<Vec<u8>, AigError> {
    if !aig.is_binary_compatible() {
        return Err(AigError::NotBinaryCompatible);
    }
    let mut out = format!(
        "aig {} {} 0 {} {}\n",
        aig.max_index,
        aig.inputs.len(),
        aig.outputs.len(),
        aig.ands.len()
    )
    .into_bytes();
    for l in &aig.outputs {
        out.extend_from_slice(format!("{l}\n").as_bytes());
    }
    for a in &aig.ands {
        let lhs = a.literal().0 as u64;
        write_delta(&mut out, lhs - a.left.0 as u64);
        write_delta(&mut out, (a.left.0 - a.right.0) as u64);
    }
    Ok(out)
}
