use std::fmt;

use num_bigint::BigInt;

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Unsigned literal; `3/2` is a single token.
    Number(Scalar),
    Semi,
    Comma,
    Eq,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Arrow,
    Plus,
    Minus,
    Star,
    Caret,
    Prime,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(q) => write!(f, "`{}`", crate::scalar::format_scalar(q)),
            Tok::Eof => f.write_str("end of input"),
            other => {
                let s = match other {
                    Tok::Semi => ";",
                    Tok::Comma => ",",
                    Tok::Eq => "=",
                    Tok::LBrace => "{",
                    Tok::RBrace => "}",
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LBracket => "[",
                    Tok::RBracket => "]",
                    Tok::Arrow => "->",
                    Tok::Plus => "+",
                    Tok::Minus => "-",
                    Tok::Star => "*",
                    Tok::Caret => "^",
                    _ => "'",
                };
                write!(f, "`{s}`")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{pos}: {message}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let digits = |i: &mut usize, col: &mut usize| -> String {
        let start = *i;
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            *i += 1;
            *col += 1;
        }
        chars[start..*i].iter().collect()
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
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
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
                col += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let num = digits(&mut i, &mut col);
            let mut value = Scalar::from_integer(num.parse::<BigInt>().expect("digits"));
            if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                i += 1;
                col += 1;
                let den_pos = Pos { line, col };
                let den: BigInt = digits(&mut i, &mut col).parse().expect("digits");
                if den == BigInt::from(0) {
                    return Err(SyntaxError {
                        pos: den_pos,
                        message: "zero denominator".into(),
                    });
                }
                value /= Scalar::from_integer(den);
            }
            out.push((Tok::Number(value), pos));
            continue;
        }
        let tok = match c {
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '=' => Tok::Eq,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '\'' => Tok::Prime,
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 1;
                col += 1;
                Tok::Arrow
            }
            '-' => Tok::Minus,
            other => {
                return Err(SyntaxError {
                    pos,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        i += 1;
        col += 1;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn rationals_are_single_tokens() {
        let toks: Vec<Tok> = tokenize("x = -3/2*psi'' # note\n->")
            .unwrap()
            .into_iter()
            .map(|t| t.0)
            .collect();
        assert_eq!(
            toks,
            vec![
                Tok::Ident("x".into()),
                Tok::Eq,
                Tok::Minus,
                Tok::Number(ratio(3, 2)),
                Tok::Star,
                Tok::Ident("psi".into()),
                Tok::Prime,
                Tok::Prime,
                Tok::Arrow,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_and_errors() {
        let toks = tokenize("a\n  b").unwrap();
        assert_eq!(toks[1].1, Pos { line: 2, col: 3 });
        let err = tokenize("a $").unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, col: 3 });
        assert!(tokenize("1/0").is_err());
    }
}
