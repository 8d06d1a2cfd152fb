use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::Location;
use super::{ParseError, ParseErrorKind};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Token {
    Ident(String),
    Qubit(usize),
    /// Unsigned decimal literal; the raw text is kept for bitstrings.
    Number(String),
    /// Imaginary literal such as `0.5i`.
    Imag(f64),
    /// Ket body between `|` and `>`.
    Ket(String),
    Tensor,
    Semi,
    Colon,
    Comma,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Eq,
    Amp,
    Bar,
    Tilde,
    Plus,
    Minus,
    Star,
    Eof,
}

impl Token {
    pub(crate) fn describe(&self) -> String {
        match self {
            Token::Ident(s) => alloc::format!("`{s}`"),
            Token::Qubit(q) => alloc::format!("`q{q}`"),
            Token::Number(s) => alloc::format!("`{s}`"),
            Token::Imag(v) => alloc::format!("`{v}i`"),
            Token::Ket(s) => alloc::format!("`|{s}>`"),
            Token::Eof => "end of input".to_string(),
            other => {
                let s = match other {
                    Token::Tensor => "(x)",
                    Token::Semi => ";",
                    Token::Colon => ":",
                    Token::Comma => ",",
                    Token::LBrace => "{",
                    Token::RBrace => "}",
                    Token::LParen => "(",
                    Token::RParen => ")",
                    Token::LBracket => "[",
                    Token::RBracket => "]",
                    Token::Eq => "=",
                    Token::Amp => "&",
                    Token::Bar => "|",
                    Token::Tilde => "~",
                    Token::Plus => "+",
                    Token::Minus => "-",
                    _ => "*",
                };
                alloc::format!("`{s}`")
            }
        }
    }
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<(Token, Location)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let loc = Location { line, column: col };
        let start = i;
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            qubit_index(&word).map_or(Token::Ident(word), Token::Qubit)
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            i = scan_number(&chars, i);
            let text: String = chars[start..i].iter().collect();
            if chars.get(i) == Some(&'i') && !chars.get(i + 1).is_some_and(|d| d.is_ascii_alphanumeric() || *d == '_') {
                i += 1;
                let value = text.parse::<f64>().map_err(|_| bad_number(&text, loc))?;
                Token::Imag(value)
            } else {
                Token::Number(text)
            }
        } else if c == '|' {
            let mut j = i + 1;
            while j < chars.len() && matches!(chars[j], '0' | '1' | '+' | '-') {
                j += 1;
            }
            if j > i + 1 && chars.get(j) == Some(&'>') {
                let body: String = chars[i + 1..j].iter().collect();
                i = j + 1;
                Token::Ket(body)
            } else {
                i += 1;
                Token::Bar
            }
        } else if c == '(' && chars.get(i + 1) == Some(&'x') && chars.get(i + 2) == Some(&')') {
            i += 3;
            Token::Tensor
        } else {
            i += 1;
            match c {
                ';' => Token::Semi,
                ':' => Token::Colon,
                ',' => Token::Comma,
                '{' => Token::LBrace,
                '}' => Token::RBrace,
                '(' => Token::LParen,
                ')' => Token::RParen,
                '[' => Token::LBracket,
                ']' => Token::RBracket,
                '=' => Token::Eq,
                '&' => Token::Amp,
                '~' => Token::Tilde,
                '+' => Token::Plus,
                '-' => Token::Minus,
                '*' => Token::Star,
                _ => {
                    return Err(ParseError {
                        kind: ParseErrorKind::Syntax,
                        location: loc,
                        message: alloc::format!("unexpected character `{c}`"),
                    })
                }
            }
        };
        col += i - start;
        out.push((tok, loc));
    }
    out.push((Token::Eof, Location { line, column: col }));
    Ok(out)
}

fn qubit_index(word: &str) -> Option<usize> {
    let digits = word.strip_prefix('q')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn scan_number(chars: &[char], mut i: usize) -> usize {
    while i < chars.len() && chars[i].is_ascii_digit() {
        i += 1;
    }
    if chars.get(i) == Some(&'.') {
        i += 1;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
    }
    if matches!(chars.get(i), Some('e') | Some('E')) {
        let mut j = i + 1;
        if matches!(chars.get(j), Some('+') | Some('-')) {
            j += 1;
        }
        if chars.get(j).is_some_and(|d| d.is_ascii_digit()) {
            i = j;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
        }
    }
    i
}

fn bad_number(text: &str, location: Location) -> ParseError {
    ParseError { kind: ParseErrorKind::Syntax, location, message: alloc::format!("malformed number `{text}`") }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn kinds(src: &str) -> Vec<Token> {
        tokenize(src).unwrap().into_iter().map(|(t, _)| t).collect()
    }

    #[test]
    fn kets_bars_and_tensor() {
        assert_eq!(
            kinds("span{|0+>} | I[1] (x) ~x"),
            vec![
                Token::Ident("span".into()),
                Token::LBrace,
                Token::Ket("0+".into()),
                Token::RBrace,
                Token::Bar,
                Token::Ident("I".into()),
                Token::LBracket,
                Token::Number("1".into()),
                Token::RBracket,
                Token::Tensor,
                Token::Tilde,
                Token::Ident("x".into()),
                Token::Eof,
            ]
        );
    }

    #[test]
    fn numbers_and_qubits() {
        assert_eq!(
            kinds("q12 q1x 010 0.5i 1e-3 i 2.5e+2i"),
            vec![
                Token::Qubit(12),
                Token::Ident("q1x".into()),
                Token::Number("010".into()),
                Token::Imag(0.5),
                Token::Number("1e-3".into()),
                Token::Ident("i".into()),
                Token::Imag(250.0),
                Token::Eof,
            ]
        );
    }

    #[test]
    fn locations_and_comments() {
        let toks = tokenize("qubits 1; # note\n  H q0;").unwrap();
        assert_eq!(toks[3].0, Token::Ident("H".into()));
        assert_eq!((toks[3].1.line, toks[3].1.column), (2, 3));
        let err = tokenize("qubits 1 @").unwrap_err();
        assert_eq!((err.location.line, err.location.column), (1, 10));
    }
}
