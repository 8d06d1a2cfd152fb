use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::ast::*;
use super::lexer::{tokenize, Token};
use super::{ParseError, ParseErrorKind};
use crate::numerics::{exact_log2, ComplexMatrix, C64};
use crate::projections::Projection;

/// Unitarity tolerance for `defgate` matrices.
pub const GATE_UNITARY_TOL: f64 = 1e-8;

/// Parses a program in the text format.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0, qubit_count: 0, gates: Vec::new(), site_ids: Vec::new() };
    p.program()
}

struct Parser {
    tokens: Vec<(Token, Location)>,
    pos: usize,
    qubit_count: usize,
    gates: Vec<(String, ComplexMatrix)>,
    site_ids: Vec<String>,
}

const KEYWORDS: &[&str] = &[
    "qubits", "defgate", "skip", "init", "assert", "on", "via", "check", "expect", "if", "measure", "in", "else", "while",
    "cap", "span", "I", "aux",
];

fn err(kind: ParseErrorKind, location: Location, message: impl Into<String>) -> ParseError {
    ParseError { kind, location, message: message.into() }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn loc(&self) -> Location {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Token, Location) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, expected: &str) -> ParseError {
        err(ParseErrorKind::Syntax, self.loc(), format!("expected {expected}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, tok: Token, what: &str) -> Result<Location, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.syntax(what))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Token::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<Location, ParseError> {
        if self.is_keyword(kw) {
            Ok(self.bump().1)
        } else {
            Err(self.syntax(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self) -> Result<(String, Location), ParseError> {
        match self.peek().clone() {
            Token::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let loc = self.bump().1;
                Ok((s, loc))
            }
            _ => Err(self.syntax("an identifier")),
        }
    }

    fn int(&mut self) -> Result<usize, ParseError> {
        match self.peek().clone() {
            Token::Number(text) if text.bytes().all(|b| b.is_ascii_digit()) => {
                let loc = self.bump().1;
                text.parse().map_err(|_| err(ParseErrorKind::Syntax, loc, format!("integer `{text}` is too large")))
            }
            _ => Err(self.syntax("an integer")),
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        self.keyword("qubits")?;
        let n_loc = self.loc();
        let n = self.int()?;
        if n == 0 || n > 16 {
            return Err(err(ParseErrorKind::Syntax, n_loc, "qubit count must be between 1 and 16"));
        }
        self.qubit_count = n;
        self.expect(Token::Semi, "`;`")?;
        let mut body = Vec::new();
        while *self.peek() != Token::Eof {
            if self.is_keyword("defgate") {
                self.gatedef()?;
            } else {
                body.push(self.statement()?);
            }
        }
        Ok(Program { qubit_count: n, gates: core::mem::take(&mut self.gates), body, metadata: Vec::new() })
    }

    fn gatedef(&mut self) -> Result<(), ParseError> {
        self.keyword("defgate")?;
        let (name, loc) = self.ident()?;
        if Builtin::from_name(&name).is_some() || self.gates.iter().any(|(n, _)| *n == name) {
            return Err(err(ParseErrorKind::Syntax, loc, format!("gate `{name}` is already defined")));
        }
        self.expect(Token::Eq, "`=`")?;
        let m_loc = self.loc();
        let rows = self.matrix()?;
        self.expect(Token::Semi, "`;`")?;
        let dim = rows.len();
        if dim < 2 || exact_log2(dim).is_none() || rows.iter().any(|r| r.len() != dim) {
            return Err(err(ParseErrorKind::Syntax, m_loc, "gate matrix must be square with power-of-two size"));
        }
        let m = ComplexMatrix::from_vec(dim, dim, rows.into_iter().flatten().collect())
            .map_err(|_| err(ParseErrorKind::Syntax, m_loc, "non-finite matrix entry"))?;
        let dev = (&m.adjoint() * &m).max_abs_diff(&ComplexMatrix::identity(dim));
        if dev > GATE_UNITARY_TOL {
            return Err(err(
                ParseErrorKind::NonUnitaryGateDef,
                m_loc,
                format!("gate `{name}` is not unitary (deviation {dev:.3e})"),
            ));
        }
        self.gates.push((name, m));
        Ok(())
    }

    fn matrix(&mut self) -> Result<Vec<Vec<C64>>, ParseError> {
        self.expect(Token::LBracket, "`[`")?;
        let mut rows = Vec::new();
        loop {
            self.expect(Token::LBracket, "`[`")?;
            let mut row = vec![self.complex()?];
            while *self.peek() == Token::Comma {
                self.bump();
                row.push(self.complex()?);
            }
            self.expect(Token::RBracket, "`]`")?;
            rows.push(row);
            if *self.peek() == Token::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Token::RBracket, "`]`")?;
        Ok(rows)
    }

    fn real_number(&mut self) -> Result<f64, ParseError> {
        match self.peek().clone() {
            Token::Number(text) => {
                let loc = self.bump().1;
                text.parse::<f64>().map_err(|_| err(ParseErrorKind::Syntax, loc, format!("malformed number `{text}`")))
            }
            _ => Err(self.syntax("a number")),
        }
    }

    /// `a`, `bi`, `a+bi`, `a-bi`, `i`, each optionally signed.
    fn complex(&mut self) -> Result<C64, ParseError> {
        let sign = self.sign();
        if let Some(im) = self.imag_part() {
            return Ok(C64::new(0.0, sign * im));
        }
        let re = sign * self.real_number()?;
        if matches!(self.peek(), Token::Plus | Token::Minus) {
            let s = self.sign();
            let im = self.imag_part().ok_or_else(|| self.syntax("an imaginary part"))?;
            return Ok(C64::new(re, s * im));
        }
        Ok(C64::new(re, 0.0))
    }

    fn sign(&mut self) -> f64 {
        match self.peek() {
            Token::Minus => {
                self.bump();
                -1.0
            }
            Token::Plus => {
                self.bump();
                1.0
            }
            _ => 1.0,
        }
    }

    fn imag_part(&mut self) -> Option<f64> {
        let v = match self.peek() {
            Token::Imag(v) => *v,
            Token::Ident(s) if s == "i" => 1.0,
            _ => return None,
        };
        self.bump();
        Some(v)
    }

    fn qubit(&mut self) -> Result<usize, ParseError> {
        match *self.peek() {
            Token::Qubit(q) => {
                let loc = self.bump().1;
                if q >= self.qubit_count {
                    return Err(err(
                        ParseErrorKind::QubitOutOfRange,
                        loc,
                        format!("qubit q{q} is out of range for {} qubits", self.qubit_count),
                    ));
                }
                Ok(q)
            }
            _ => Err(self.syntax("a qubit")),
        }
    }

    fn qlist(&mut self) -> Result<Vec<usize>, ParseError> {
        let loc = self.loc();
        let mut qs = vec![self.qubit()?];
        while *self.peek() == Token::Comma {
            self.bump();
            qs.push(self.qubit()?);
        }
        check_distinct(&qs, loc)?;
        Ok(qs)
    }

    fn wire(&mut self) -> Result<Wire, ParseError> {
        if self.is_keyword("aux") {
            self.bump();
            Ok(Wire::Aux)
        } else {
            Ok(Wire::Qubit(self.qubit()?))
        }
    }

    fn wlist(&mut self) -> Result<Vec<Wire>, ParseError> {
        let loc = self.loc();
        let mut ws = vec![self.wire()?];
        while *self.peek() == Token::Comma {
            self.bump();
            ws.push(self.wire()?);
        }
        for (i, w) in ws.iter().enumerate() {
            if ws[..i].contains(w) {
                return Err(err(ParseErrorKind::Syntax, loc, "a wire is listed twice"));
            }
        }
        Ok(ws)
    }

    fn bits(&mut self, width: usize) -> Result<Vec<bool>, ParseError> {
        match self.peek().clone() {
            Token::Number(text) if text.bytes().all(|b| b == b'0' || b == b'1') => {
                let loc = self.bump().1;
                if text.len() != width {
                    return Err(err(
                        ParseErrorKind::Syntax,
                        loc,
                        format!("bitstring `{text}` has {} bits, expected {width}", text.len()),
                    ));
                }
                Ok(text.bytes().map(|b| b == b'1').collect())
            }
            _ => Err(self.syntax("a bitstring")),
        }
    }

    fn bitset(&mut self, width: usize) -> Result<Vec<usize>, ParseError> {
        self.expect(Token::LBrace, "`{`")?;
        let mut out = Vec::new();
        loop {
            let loc = self.loc();
            let v = bits_to_index(&self.bits(width)?);
            if out.contains(&v) {
                return Err(err(ParseErrorKind::Syntax, loc, "bitstring listed twice"));
            }
            out.push(v);
            if *self.peek() == Token::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Token::RBrace, "`}`")?;
        Ok(out)
    }

    fn block(&mut self) -> Result<Vec<Statement>, ParseError> {
        self.expect(Token::LBrace, "`{`")?;
        let mut body = Vec::new();
        while *self.peek() != Token::RBrace {
            if *self.peek() == Token::Eof {
                return Err(self.syntax("`}`"));
            }
            body.push(self.statement()?);
        }
        self.bump();
        Ok(body)
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        let location = self.loc();
        let word = match self.peek() {
            Token::Ident(s) => s.clone(),
            _ => return Err(self.syntax("a statement")),
        };
        match word.as_str() {
            "skip" => {
                self.bump();
                self.expect(Token::Semi, "`;`")?;
                Ok(Statement::Skip { location })
            }
            "init" => {
                self.bump();
                let qubits = self.qlist()?;
                self.expect(Token::Semi, "`;`")?;
                Ok(Statement::Init { qubits, location })
            }
            "assert" => self.assertion(),
            "if" => {
                self.bump();
                let (qubits, outcomes) = self.measure_head()?;
                let then_branch = self.block()?;
                let else_branch = if self.is_keyword("else") {
                    self.bump();
                    self.block()?
                } else {
                    Vec::new()
                };
                Ok(Statement::IfMeasure { qubits, outcomes, then_branch, else_branch, location })
            }
            "while" => {
                self.bump();
                let (qubits, outcomes) = self.measure_head()?;
                let cap = if self.is_keyword("cap") {
                    self.bump();
                    let loc = self.loc();
                    let c = self.int()?;
                    if c == 0 {
                        return Err(err(ParseErrorKind::Syntax, loc, "loop cap must be positive"));
                    }
                    c
                } else {
                    DEFAULT_LOOP_CAP
                };
                let body = self.block()?;
                Ok(Statement::WhileMeasure { qubits, outcomes, body, cap, location })
            }
            _ if KEYWORDS.contains(&word.as_str()) => Err(self.syntax("a statement")),
            _ => {
                self.bump();
                let gate = self.resolve_gate(&word, location)?;
                let qubits = self.qlist()?;
                self.check_arity(&gate, qubits.len(), location)?;
                self.expect(Token::Semi, "`;`")?;
                Ok(Statement::Unitary { gate, qubits, location })
            }
        }
    }

    fn measure_head(&mut self) -> Result<(Vec<usize>, Vec<usize>), ParseError> {
        self.keyword("measure")?;
        self.expect(Token::LParen, "`(`")?;
        let qubits = self.qlist()?;
        self.expect(Token::RParen, "`)`")?;
        self.keyword("in")?;
        let outcomes = self.bitset(qubits.len())?;
        Ok((qubits, outcomes))
    }

    fn resolve_gate(&self, name: &str, loc: Location) -> Result<GateRef, ParseError> {
        if let Some(b) = Builtin::from_name(name) {
            Ok(GateRef::Builtin(b))
        } else if self.gates.iter().any(|(n, _)| n == name) {
            Ok(GateRef::Defined(name.to_string()))
        } else {
            Err(err(ParseErrorKind::UnknownGate, loc, format!("unknown gate `{name}`")))
        }
    }

    fn check_arity(&self, gate: &GateRef, found: usize, loc: Location) -> Result<(), ParseError> {
        let expected = match gate {
            GateRef::Builtin(b) => b.arity(),
            GateRef::Defined(n) => {
                let m = &self.gates.iter().find(|(g, _)| g == n).expect("resolved gate").1;
                exact_log2(m.rows())
            }
        };
        match expected {
            Some(k) if k != found => Err(err(
                ParseErrorKind::Syntax,
                loc,
                format!("gate `{}` acts on {k} qubits, {found} given", gate.name()),
            )),
            _ => Ok(()),
        }
    }

    fn assertion(&mut self) -> Result<Statement, ParseError> {
        let location = self.keyword("assert")?;
        let (id, id_loc) = self.ident()?;
        if self.site_ids.contains(&id) {
            return Err(err(ParseErrorKind::Syntax, id_loc, format!("assertion `{id}` is already defined")));
        }
        self.expect(Token::Colon, "`:`")?;
        let expr_loc = self.loc();
        let expr = self.proj_join()?;
        self.keyword("on")?;
        let qubits = self.qlist()?;
        let projection = evaluate(&expr)
            .map_err(|m| err(ParseErrorKind::BadProjectionExpr, expr_loc, m))?;
        if projection.qubit_count() != qubits.len() {
            return Err(err(
                ParseErrorKind::BadProjectionExpr,
                expr_loc,
                format!("predicate acts on {} qubits but {} are listed", projection.qubit_count(), qubits.len()),
            ));
        }
        let circuit = if self.is_keyword("via") {
            self.bump();
            Some(self.circuit()?)
        } else {
            None
        };
        self.expect(Token::Semi, "`;`")?;
        self.site_ids.push(id.clone());
        Ok(Statement::Assert(AssertSite { id, qubits, expr, projection, circuit, location }))
    }

    fn circuit(&mut self) -> Result<Vec<CircuitStep>, ParseError> {
        self.expect(Token::LBrace, "`{`")?;
        let mut steps = Vec::new();
        while *self.peek() != Token::RBrace {
            let location = self.loc();
            if self.is_keyword("check") {
                self.bump();
                let wires = self.wlist()?;
                let expect = if self.is_keyword("expect") {
                    self.bump();
                    self.bits(wires.len())?
                } else {
                    vec![false; wires.len()]
                };
                self.expect(Token::Semi, "`;`")?;
                steps.push(CircuitStep::Check { wires, expect, location });
            } else {
                let (name, loc) = match self.peek().clone() {
                    Token::Ident(s) if !KEYWORDS.contains(&s.as_str()) => (s, self.bump().1),
                    _ => return Err(self.syntax("a gate or `check`")),
                };
                let gate = self.resolve_gate(&name, loc)?;
                let wires = self.wlist()?;
                self.check_arity(&gate, wires.len(), loc)?;
                self.expect(Token::Semi, "`;`")?;
                steps.push(CircuitStep::Gate { gate, wires, location });
            }
        }
        self.bump();
        Ok(steps)
    }

    fn proj_join(&mut self) -> Result<ProjExpr, ParseError> {
        let mut lhs = self.proj_meet()?;
        while *self.peek() == Token::Bar {
            self.bump();
            let rhs = self.proj_meet()?;
            lhs = ProjExpr::Join(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn proj_meet(&mut self) -> Result<ProjExpr, ParseError> {
        let mut lhs = self.proj_tensor()?;
        while *self.peek() == Token::Amp {
            self.bump();
            let rhs = self.proj_tensor()?;
            lhs = ProjExpr::Meet(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn proj_tensor(&mut self) -> Result<ProjExpr, ParseError> {
        let mut lhs = self.proj_unary()?;
        while *self.peek() == Token::Tensor {
            self.bump();
            let rhs = self.proj_unary()?;
            lhs = ProjExpr::Tensor(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn proj_unary(&mut self) -> Result<ProjExpr, ParseError> {
        match self.peek().clone() {
            Token::Tilde => {
                self.bump();
                Ok(ProjExpr::Not(Box::new(self.proj_unary()?)))
            }
            Token::LParen => {
                self.bump();
                let e = self.proj_join()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(e)
            }
            Token::Ident(s) if s == "I" => {
                self.bump();
                self.expect(Token::LBracket, "`[`")?;
                let loc = self.loc();
                let k = self.int()?;
                if k == 0 || k > 16 {
                    return Err(err(ParseErrorKind::BadProjectionExpr, loc, "identity width must be between 1 and 16"));
                }
                self.expect(Token::RBracket, "`]`")?;
                Ok(ProjExpr::Identity(k))
            }
            Token::Ident(s) if s == "span" => {
                self.bump();
                self.expect(Token::LBrace, "`{`")?;
                let mut sums = vec![self.ketsum()?];
                while *self.peek() == Token::Comma {
                    self.bump();
                    sums.push(self.ketsum()?);
                }
                self.expect(Token::RBrace, "`}`")?;
                Ok(ProjExpr::Span(sums))
            }
            _ => Err(self.syntax("a projection term")),
        }
    }

    fn ketsum(&mut self) -> Result<KetSum, ParseError> {
        let mut sign = match self.peek() {
            Token::Minus => {
                self.bump();
                -1.0
            }
            _ => 1.0,
        };
        let mut terms = Vec::new();
        loop {
            let coeff = if matches!(self.peek(), Token::Number(_)) {
                let c = self.real_number()?;
                self.expect(Token::Star, "`*`")?;
                c
            } else {
                1.0
            };
            let bits = match self.peek().clone() {
                Token::Ket(b) => {
                    self.bump();
                    b
                }
                _ => return Err(self.syntax("a ket")),
            };
            terms.push(KetTerm { coeff: sign * coeff, bits });
            sign = match self.peek() {
                Token::Plus => 1.0,
                Token::Minus => -1.0,
                _ => break,
            };
            self.bump();
        }
        Ok(KetSum { terms })
    }
}

fn check_distinct(qs: &[usize], loc: Location) -> Result<(), ParseError> {
    for (i, q) in qs.iter().enumerate() {
        if qs[..i].contains(q) {
            return Err(err(ParseErrorKind::Syntax, loc, format!("qubit q{q} is listed twice")));
        }
    }
    Ok(())
}

/// Bits (most significant first) to an integer.
pub fn bits_to_index(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

/// Amplitude vector of a product ket over `0 1 + -`.
pub fn ket_vector(bits: &str) -> Vec<C64> {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let mut v = vec![C64::new(1.0, 0.0)];
    for ch in bits.chars() {
        let (a0, a1) = match ch {
            '0' => (1.0, 0.0),
            '1' => (0.0, 1.0),
            '+' => (s, s),
            _ => (s, -s),
        };
        let mut next = Vec::with_capacity(v.len() * 2);
        for x in &v {
            next.push(*x * a0);
            next.push(*x * a1);
        }
        v = next;
    }
    v
}

/// Evaluates a projection expression; the error message explains arity or
/// degeneracy problems.
pub fn evaluate(expr: &ProjExpr) -> Result<Projection, String> {
    match expr {
        ProjExpr::Identity(k) => Ok(Projection::identity(*k)),
        ProjExpr::Span(sums) => {
            let k = sums[0].arity();
            let mut kets = Vec::with_capacity(sums.len());
            for sum in sums {
                if sum.terms.iter().any(|t| t.bits.len() != k) {
                    return Err("kets in a span must all have the same width".to_string());
                }
                let mut v = vec![C64::new(0.0, 0.0); 1 << k];
                for t in &sum.terms {
                    for (a, b) in v.iter_mut().zip(ket_vector(&t.bits)) {
                        *a += b * t.coeff;
                    }
                }
                if v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() < 1e-12 {
                    return Err("a ket sum in the span is zero".to_string());
                }
                kets.push(v);
            }
            Projection::from_kets(&kets, k).map_err(|e| e.to_string())
        }
        ProjExpr::Not(e) => Ok(evaluate(e)?.complement()),
        ProjExpr::Tensor(a, b) => Ok(evaluate(a)?.tensor(&evaluate(b)?)),
        ProjExpr::Meet(a, b) | ProjExpr::Join(a, b) => {
            let (pa, pb) = (evaluate(a)?, evaluate(b)?);
            if pa.qubit_count() != pb.qubit_count() {
                return Err(format!(
                    "operands act on {} and {} qubits",
                    pa.qubit_count(),
                    pb.qubit_count()
                ));
            }
            let r = if matches!(expr, ProjExpr::Meet(..)) { pa.meet(&pb) } else { pa.join(&pb) };
            r.map_err(|e| e.to_string())
        }
    }
}
