use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::ast::*;
use crate::numerics::C64;

/// Shortest decimal text that parses back to exactly `x` (non-negative input).
pub fn fmt_exact(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_complex(z: C64) -> String {
    let (re, im) = (z.re, z.im);
    let signed = |v: f64| if v < 0.0 { format!("-{}", fmt_exact(-v)) } else { fmt_exact(v) };
    if im == 0.0 {
        signed(re)
    } else if re == 0.0 {
        format!("{}i", signed(im))
    } else {
        let op = if im < 0.0 { '-' } else { '+' };
        format!("{}{op}{}i", signed(re), fmt_exact(im.abs()))
    }
}

fn qlist(qs: &[usize]) -> String {
    qs.iter().map(|q| format!("q{q}")).collect::<Vec<_>>().join(", ")
}

fn wlist(ws: &[Wire]) -> String {
    ws.iter()
        .map(|w| match w {
            Wire::Qubit(q) => format!("q{q}"),
            Wire::Aux => String::from("aux"),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn bits(value: usize, width: usize) -> String {
    (0..width).map(|t| if (value >> (width - 1 - t)) & 1 == 1 { '1' } else { '0' }).collect()
}

fn bitset(values: &[usize], width: usize) -> String {
    let items: Vec<String> = values.iter().map(|&v| bits(v, width)).collect();
    format!("{{{}}}", items.join(", "))
}

fn ketsum(sum: &KetSum) -> String {
    let mut out = String::new();
    for (i, t) in sum.terms.iter().enumerate() {
        let neg = t.coeff < 0.0;
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let c = t.coeff.abs();
        if c != 1.0 {
            out.push_str(&fmt_exact(c));
            out.push('*');
        }
        let _ = write!(out, "|{}>", t.bits);
    }
    out
}

fn expr(e: &ProjExpr) -> String {
    let operand = |e: &ProjExpr| match e {
        ProjExpr::Meet(..) | ProjExpr::Join(..) | ProjExpr::Tensor(..) => format!("({})", expr(e)),
        _ => expr(e),
    };
    match e {
        ProjExpr::Span(sums) => {
            let items: Vec<String> = sums.iter().map(ketsum).collect();
            format!("span{{{}}}", items.join(", "))
        }
        ProjExpr::Identity(k) => format!("I[{k}]"),
        ProjExpr::Not(inner) => format!("~{}", operand(inner)),
        ProjExpr::Meet(a, b) => format!("{} & {}", operand(a), operand(b)),
        ProjExpr::Join(a, b) => format!("{} | {}", operand(a), operand(b)),
        ProjExpr::Tensor(a, b) => format!("{} (x) {}", operand(a), operand(b)),
    }
}

/// Renders a program in the text format accepted by `parse_program`.
pub fn print_program(program: &Program) -> String {
    let mut out = String::new();
    for line in &program.metadata {
        for l in line.lines() {
            let _ = writeln!(out, "# {l}");
        }
    }
    let _ = writeln!(out, "qubits {};", program.qubit_count);
    for (name, m) in &program.gates {
        let rows: Vec<String> = (0..m.rows())
            .map(|r| {
                let entries: Vec<String> = m.row(r).iter().map(|z| fmt_complex(*z)).collect();
                format!("[{}]", entries.join(", "))
            })
            .collect();
        let _ = writeln!(out, "defgate {name} = [{}];", rows.join(",\n    "));
    }
    print_block(&mut out, &program.body, 0);
    out
}

fn print_block(out: &mut String, body: &[Statement], depth: usize) {
    for s in body {
        print_statement(out, s, depth);
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn print_statement(out: &mut String, s: &Statement, depth: usize) {
    indent(out, depth);
    match s {
        Statement::Skip { .. } => out.push_str("skip;\n"),
        Statement::Init { qubits, .. } => {
            let _ = writeln!(out, "init {};", qlist(qubits));
        }
        Statement::Unitary { gate, qubits, .. } => {
            let _ = writeln!(out, "{} {};", gate.name(), qlist(qubits));
        }
        Statement::IfMeasure { qubits, outcomes, then_branch, else_branch, .. } => {
            let _ = writeln!(out, "if measure({}) in {} {{", qlist(qubits), bitset(outcomes, qubits.len()));
            print_block(out, then_branch, depth + 1);
            indent(out, depth);
            if else_branch.is_empty() {
                out.push_str("}\n");
            } else {
                out.push_str("} else {\n");
                print_block(out, else_branch, depth + 1);
                indent(out, depth);
                out.push_str("}\n");
            }
        }
        Statement::WhileMeasure { qubits, outcomes, body, cap, .. } => {
            let _ = writeln!(out, "while measure({}) in {} cap {cap} {{", qlist(qubits), bitset(outcomes, qubits.len()));
            print_block(out, body, depth + 1);
            indent(out, depth);
            out.push_str("}\n");
        }
        Statement::Assert(site) => {
            let _ = write!(out, "assert {}: {} on {}", site.id, expr(&site.expr), qlist(&site.qubits));
            match &site.circuit {
                None => out.push_str(";\n"),
                Some(steps) => {
                    out.push_str(" via {\n");
                    for step in steps {
                        indent(out, depth + 1);
                        match step {
                            CircuitStep::Gate { gate, wires, .. } => {
                                let _ = writeln!(out, "{} {};", gate.name(), wlist(wires));
                            }
                            CircuitStep::Check { wires, expect, .. } => {
                                let _ = write!(out, "check {}", wlist(wires));
                                if expect.iter().any(|&b| b) {
                                    let e: String = expect.iter().map(|&b| if b { '1' } else { '0' }).collect();
                                    let _ = write!(out, " expect {e}");
                                }
                                out.push_str(";\n");
                            }
                        }
                    }
                    indent(out, depth);
                    out.push_str("};\n");
                }
            }
        }
    }
}
