//! Row-wise reverse topological variable order.
//!
//! Primary inputs come first (by node index), then extension variables in
//! the order they were introduced, then gate and output variables sorted by
//! `(level, node index)`. A gate's level is its depth; an output alias sits
//! one level above its defining node and precedes gates on equal keys.

use std::collections::HashMap;

use thiserror::Error;

use crate::aig::Aig;
use crate::poly::{MonomialOrder, Polynomial, VarId, VarKind, VarTable};

/// How primary inputs are named.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputNaming {
    /// `a0, b0, a1, b1, ...` in input order.
    #[default]
    Interleaved,
    /// `a0, ..., a{n-1}, b0, ..., b{n-1}`.
    Blocked,
}

/// What a variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarRole {
    /// Position in the AIG input list.
    Input(usize),
    /// Position in the extension list.
    Extension(usize),
    /// AIG node index.
    Gate(u32),
    /// Position in the AIG output list.
    Output(usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OrderError {
    #[error("variable chain does not match the system's variables (first difference: {0})")]
    ChainMismatch(String),
}

/// A ranked variable table plus the role of every variable.
#[derive(Debug, Clone)]
pub struct VarOrder {
    table: VarTable,
    roles: Vec<VarRole>,
    node_vars: HashMap<u32, VarId>,
    inputs: Vec<VarId>,
    outputs: Vec<VarId>,
    exts: Vec<VarId>,
}

/// Names for `count` inputs under `naming`. Odd counts fall back to `x{k}`.
pub fn input_names(count: usize, naming: InputNaming) -> Vec<String> {
    if count % 2 == 1 {
        return (0..count).map(|k| format!("x{k}")).collect();
    }
    let h = count / 2;
    (0..count)
        .map(|k| match naming {
            InputNaming::Interleaved => format!("{}{}", if k % 2 == 0 { 'a' } else { 'b' }, k / 2),
            InputNaming::Blocked => format!("{}{}", if k < h { 'a' } else { 'b' }, k % h),
        })
        .collect()
}

pub fn gate_name(index: u32) -> String {
    format!("l{}", 2 * index)
}

impl VarOrder {
    pub fn table(&self) -> &VarTable {
        &self.table
    }

    pub fn role(&self, v: VarId) -> VarRole {
        self.roles[v.0 as usize]
    }

    pub fn name(&self, v: VarId) -> &str {
        self.table.name(v)
    }

    pub fn get(&self, name: &str) -> Option<VarId> {
        self.table.get(name)
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    /// Variable of an input or AND node.
    pub fn node_var(&self, index: u32) -> Option<VarId> {
        self.node_vars.get(&index).copied()
    }

    /// Input variables in AIG input-list order.
    pub fn inputs(&self) -> &[VarId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[VarId] {
        &self.outputs
    }

    pub fn exts(&self) -> &[VarId] {
        &self.exts
    }

    pub fn is_input(&self, v: VarId) -> bool {
        matches!(self.role(v), VarRole::Input(_))
    }

    /// The chain `v1 < v2 < ...`.
    pub fn chain(&self) -> String {
        self.table.chain()
    }

    /// Re-ranks the same variables following `names` (smallest first).
    /// Returns the new order and the old-to-new id map.
    pub fn reorder<S: AsRef<str>>(
        &self,
        names: &[S],
    ) -> Result<(VarOrder, Vec<VarId>), OrderError> {
        if names.len() != self.len() {
            return Err(OrderError::ChainMismatch(format!(
                "{} names given, {} variables present",
                names.len(),
                self.len()
            )));
        }
        let mut table = VarTable::new();
        let mut roles = Vec::with_capacity(names.len());
        let mut map = vec![VarId(u32::MAX); self.len()];
        for n in names {
            let n = n.as_ref();
            let old = self
                .get(n)
                .ok_or_else(|| OrderError::ChainMismatch(n.to_string()))?;
            if map[old.0 as usize].0 != u32::MAX {
                return Err(OrderError::ChainMismatch(format!("{n} listed twice")));
            }
            map[old.0 as usize] = table.intern(n, self.table.kind(old));
            roles.push(self.role(old));
        }
        let tr = |v: &VarId| map[v.0 as usize];
        let order = VarOrder {
            table,
            roles,
            node_vars: self.node_vars.iter().map(|(&k, v)| (k, tr(v))).collect(),
            inputs: self.inputs.iter().map(tr).collect(),
            outputs: self.outputs.iter().map(tr).collect(),
            exts: self.exts.iter().map(tr).collect(),
        };
        Ok((order, map))
    }
}

/// Builds the row-wise order for `aig` with the given extension variables.
pub fn row_wise_rtto(aig: &Aig, ext_names: &[String], naming: InputNaming) -> VarOrder {
    let in_names = input_names(aig.inputs().len(), naming);
    let mut table = VarTable::new();
    let mut roles = Vec::new();
    let mut node_vars = HashMap::new();

    let mut ins: Vec<usize> = (0..aig.inputs().len()).collect();
    ins.sort_by_key(|&k| aig.inputs()[k].index());
    let mut inputs = vec![VarId(0); ins.len()];
    for k in ins {
        let v = table.intern(&in_names[k], VarKind::Input);
        roles.push(VarRole::Input(k));
        inputs[k] = v;
        node_vars.insert(aig.inputs()[k].index(), v);
    }
    let mut exts = Vec::with_capacity(ext_names.len());
    for (k, n) in ext_names.iter().enumerate() {
        exts.push(table.intern(n, VarKind::Extension));
        roles.push(VarRole::Extension(k));
    }

    // (level, node index, alias-before-gate, output position)
    let level = |idx: u32| {
        if idx == 0 {
            0
        } else {
            aig.depth(idx).unwrap_or(0)
        }
    };
    let mut keyed: Vec<((u32, u32, u8, usize), VarRole)> = Vec::new();
    for a in aig.ands() {
        keyed.push(((level(a.index), a.index, 1, 0), VarRole::Gate(a.index)));
    }
    for (k, o) in aig.outputs().iter().enumerate() {
        let idx = o.index();
        keyed.push(((level(idx) + 1, idx, 0, k), VarRole::Output(k)));
    }
    keyed.sort_by_key(|(key, _)| *key);
    let mut outputs = vec![VarId(0); aig.outputs().len()];
    for (_, role) in keyed {
        match role {
            VarRole::Gate(idx) => {
                let v = table.intern(&gate_name(idx), VarKind::Gate);
                node_vars.insert(idx, v);
            }
            VarRole::Output(k) => outputs[k] = table.intern(&format!("s{k}"), VarKind::Output),
            _ => unreachable!(),
        }
        roles.push(role);
    }
    VarOrder {
        table,
        roles,
        node_vars,
        inputs,
        outputs,
        exts,
    }
}

/// True iff all leading monomials (under LEX) are distinct single variables.
pub fn is_umlt(polys: &[Polynomial]) -> bool {
    let mut seen = std::collections::HashSet::new();
    polys.iter().all(|p| {
        let p = p.with_order(MonomialOrder::Lex);
        match p.lm() {
            Some(m) if m.degree() == 1 => seen.insert(m.max_var()),
            _ => false,
        }
    })
}
