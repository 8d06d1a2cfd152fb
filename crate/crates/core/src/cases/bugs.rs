use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::CaseError;
use crate::lang::{Builtin, GateRef, Program, Statement};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BugKind {
    DropGate,
    /// Swap in another gate; `qubits` replaces the operands when given.
    ReplaceGate { name: String, qubits: Option<Vec<usize>> },
    /// Insert a gate right after the target.
    InsertGate { name: String, qubits: Vec<usize> },
    /// Reverse the operand order.
    SwapOperands,
}

/// A mutation of one unitary statement.
///
/// `target` indexes into nested blocks: each entry after the first steps into
/// the body of a `while`, or into an `if` where indices past the then-branch
/// continue into the else-branch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BugSpec {
    pub kind: BugKind,
    pub target: Vec<usize>,
}

/// A named bug for a built-in program, with the first assertion that should catch it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BugExample {
    pub name: &'static str,
    pub spec: BugSpec,
    pub site: &'static str,
}

/// The three Shor mutations: drop the first `H`, retarget `CNOT q2, q4` to `q3`,
/// and insert `X q4` just before `A2`.
pub fn bug_examples() -> Vec<BugExample> {
    vec![
        BugExample { name: "drop-h", spec: BugSpec { kind: BugKind::DropGate, target: vec![1, 2] }, site: "A1" },
        BugExample {
            name: "replace-cnot",
            spec: BugSpec {
                kind: BugKind::ReplaceGate { name: String::from("CNOT"), qubits: Some(vec![2, 3]) },
                target: vec![1, 7],
            },
            site: "A2",
        },
        BugExample {
            name: "insert-x",
            spec: BugSpec {
                kind: BugKind::InsertGate { name: String::from("X"), qubits: vec![4] },
                target: vec![1, 7],
            },
            site: "A2",
        },
    ]
}

fn bad(path: &[usize], reason: &'static str) -> CaseError {
    CaseError::BadTarget { path: path.to_vec(), reason }
}

/// The block holding the target statement, and the statement's index in it.
fn locate<'a>(body: &'a mut Vec<Statement>, path: &[usize]) -> Result<(&'a mut Vec<Statement>, usize), CaseError> {
    let (&first, rest) = path.split_first().ok_or_else(|| bad(path, "empty path"))?;
    if rest.is_empty() {
        return if first < body.len() { Ok((body, first)) } else { Err(bad(path, "index out of range")) };
    }
    match body.get_mut(first) {
        Some(Statement::WhileMeasure { body, .. }) => locate(body, rest),
        Some(Statement::IfMeasure { then_branch, else_branch, .. }) => {
            let j = rest[0];
            if j < then_branch.len() {
                locate(then_branch, rest)
            } else {
                let mut inner = rest.to_vec();
                inner[0] = j - then_branch.len();
                locate(else_branch, &inner).map_err(|e| match e {
                    CaseError::BadTarget { reason, .. } => bad(path, reason),
                    other => other,
                })
            }
        }
        Some(_) => Err(bad(path, "path steps into a statement without a body")),
        None => Err(bad(path, "index out of range")),
    }
}

fn gate_ref(program: &Program, name: &str, path: &[usize]) -> Result<GateRef, CaseError> {
    if let Some(b) = Builtin::from_name(name) {
        Ok(GateRef::Builtin(b))
    } else if program.gate(name).is_some() {
        Ok(GateRef::Defined(String::from(name)))
    } else {
        Err(bad(path, "unknown gate"))
    }
}

fn check_operands(program: &Program, gate: &GateRef, qubits: &[usize], path: &[usize]) -> Result<(), CaseError> {
    if qubits.iter().any(|&q| q >= program.qubit_count) {
        return Err(bad(path, "qubit out of range"));
    }
    let arity = match gate {
        GateRef::Builtin(b) => b.arity(),
        GateRef::Defined(name) => program.gate(name).map(|m| m.rows().trailing_zeros() as usize),
    };
    match arity {
        Some(a) if a != qubits.len() => Err(bad(path, "operand count does not match the gate")),
        _ if qubits.is_empty() => Err(bad(path, "no operands")),
        _ => Ok(()),
    }
}

fn fmt_qubits(qubits: &[usize]) -> String {
    qubits.iter().map(|q| format!("q{q}")).collect::<Vec<_>>().join(", ")
}

/// Copy of `program` with `bug` applied; the mutation is appended to the metadata.
pub fn inject_bug(program: &Program, bug: &BugSpec) -> Result<Program, CaseError> {
    let path = bug.target.as_slice();
    let mut out = program.clone();
    let replacement = match &bug.kind {
        BugKind::ReplaceGate { name, .. } | BugKind::InsertGate { name, .. } => Some(gate_ref(program, name, path)?),
        _ => None,
    };
    let (block, i) = locate(&mut out.body, path)?;
    let Statement::Unitary { gate, qubits, location } = &mut block[i] else {
        return Err(bad(path, "target is not a unitary statement"));
    };
    let before = format!("{} {}", gate.name(), fmt_qubits(qubits));
    let note = match &bug.kind {
        BugKind::DropGate => {
            block.remove(i);
            format!("bug: dropped `{before}` at {path:?}")
        }
        BugKind::ReplaceGate { qubits: new_qubits, .. } => {
            let new_gate = replacement.expect("resolved above");
            let q = new_qubits.clone().unwrap_or_else(|| qubits.clone());
            check_operands(program, &new_gate, &q, path)?;
            *qubits = q;
            *gate = new_gate;
            format!("bug: replaced `{before}` with `{} {}` at {path:?}", gate.name(), fmt_qubits(qubits))
        }
        BugKind::InsertGate { qubits: new_qubits, .. } => {
            let new_gate = replacement.expect("resolved above");
            check_operands(program, &new_gate, new_qubits, path)?;
            let text = format!("{} {}", new_gate.name(), fmt_qubits(new_qubits));
            let location = *location;
            block.insert(i + 1, Statement::Unitary { gate: new_gate, qubits: new_qubits.clone(), location });
            format!("bug: inserted `{text}` after `{before}` at {path:?}")
        }
        BugKind::SwapOperands => {
            qubits.reverse();
            format!("bug: reversed operands of `{before}` at {path:?}")
        }
    };
    out.metadata.push(note);
    Ok(out)
}
