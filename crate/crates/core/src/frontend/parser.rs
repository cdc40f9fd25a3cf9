//! Recursive-descent parser producing an unresolved syntax tree.

use num_traits::{ToPrimitive, Zero};

use super::lexer::{tokenize, Pos, SyntaxError, Tok};
use crate::scalar::{is_integer, Scalar};
use crate::superpoly::Parity;

#[derive(Clone, Debug, PartialEq)]
pub struct Ident {
    pub name: String,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Scalar),
    Gen {
        name: Ident,
        order: u32,
    },
    Neg(Box<Expr>),
    /// Terms with a flag telling whether they are subtracted.
    Sum(Vec<(bool, Expr)>),
    Product(Vec<Expr>),
    Pow {
        base: Box<Expr>,
        exp: u32,
        pos: Pos,
    },
}

/// `coefficient * D^power`; a missing coefficient means 1.
#[derive(Clone, Debug, PartialEq)]
pub struct OpTerm {
    pub negated: bool,
    pub coefficient: Option<Expr>,
    pub power: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntryDecl {
    pub row: Ident,
    pub col: Ident,
    pub terms: Vec<OpTerm>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasisDecl {
    pub name: Ident,
    pub parity: Parity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstDecl {
    pub args: Vec<Ident>,
    pub orders: Vec<u32>,
    pub value: Scalar,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Family {
        name: Ident,
        parity: Parity,
    },
    Poly {
        name: Ident,
        expr: Expr,
    },
    Operator {
        name: Ident,
        entries: Vec<EntryDecl>,
    },
    Lie {
        name: Ident,
        basis: Vec<BasisDecl>,
        brackets: Vec<ConstDecl>,
    },
    Form {
        name: Ident,
        pairs: Vec<ConstDecl>,
    },
    Conformal {
        name: Ident,
        basis: Vec<BasisDecl>,
        lambdas: Vec<ConstDecl>,
        mus: Vec<ConstDecl>,
    },
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

type PResult<T> = Result<T, SyntaxError>;

fn err<T>(pos: Pos, message: impl Into<String>) -> PResult<T> {
    Err(SyntaxError {
        pos,
        message: message.into(),
    })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> PResult<Pos> {
        if *self.peek() == want {
            Ok(self.bump().1)
        } else {
            err(
                self.pos(),
                format!("expected {want}, found {}", self.peek()),
            )
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<Pos> {
        if self.is_keyword(kw) {
            Ok(self.bump().1)
        } else {
            err(
                self.pos(),
                format!("expected `{kw}`, found {}", self.peek()),
            )
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let pos = self.bump().1;
                Ok(Ident { name, pos })
            }
            other => err(self.pos(), format!("expected identifier, found {other}")),
        }
    }

    fn nat(&mut self) -> PResult<u32> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Number(q) if is_integer(&q) => {
                self.bump();
                q.to_integer()
                    .to_u32()
                    .map_or_else(|| err(pos, "number too large"), Ok)
            }
            other => err(pos, format!("expected natural number, found {other}")),
        }
    }

    /// `-`? RATIONAL
    fn rational(&mut self) -> PResult<Scalar> {
        let negate = *self.peek() == Tok::Minus;
        if negate {
            self.bump();
        }
        match self.peek().clone() {
            Tok::Number(q) => {
                self.bump();
                Ok(if negate { -q } else { q })
            }
            other => err(
                self.pos(),
                format!("expected rational number, found {other}"),
            ),
        }
    }

    fn parity(&mut self) -> PResult<Parity> {
        self.keyword("parity")?;
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) if s == "even" => {
                self.bump();
                Ok(Parity::Even)
            }
            Tok::Ident(s) if s == "odd" => {
                self.bump();
                Ok(Parity::Odd)
            }
            other => err(pos, format!("expected `even` or `odd`, found {other}")),
        }
    }

    fn items(&mut self) -> PResult<Vec<Item>> {
        let mut items = Vec::new();
        while *self.peek() != Tok::Eof {
            items.push(self.item()?);
        }
        Ok(items)
    }

    fn item(&mut self) -> PResult<Item> {
        let pos = self.pos();
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            other => return err(pos, format!("expected an item keyword, found {other}")),
        };
        match kw.as_str() {
            "family" => {
                self.bump();
                let name = self.ident()?;
                let parity = self.parity()?;
                self.expect(Tok::Semi)?;
                Ok(Item::Family { name, parity })
            }
            "poly" => {
                self.bump();
                let name = self.ident()?;
                self.expect(Tok::Eq)?;
                let expr = self.expr()?;
                self.expect(Tok::Semi)?;
                Ok(Item::Poly { name, expr })
            }
            "operator" => {
                self.bump();
                let name = self.ident()?;
                self.expect(Tok::LBrace)?;
                let mut entries = Vec::new();
                while self.is_keyword("entry") {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let row = self.ident()?;
                    self.expect(Tok::Comma)?;
                    let col = self.ident()?;
                    self.expect(Tok::RParen)?;
                    self.expect(Tok::Eq)?;
                    let terms = self.opexpr()?;
                    self.expect(Tok::Semi)?;
                    entries.push(EntryDecl { row, col, terms });
                }
                self.expect(Tok::RBrace)?;
                Ok(Item::Operator { name, entries })
            }
            "lie" => {
                self.bump();
                let name = self.ident()?;
                self.expect(Tok::LBrace)?;
                let basis = self.basis_lines()?;
                let brackets = self.const_lines("bracket", true, &[])?;
                self.expect(Tok::RBrace)?;
                Ok(Item::Lie { name, basis, brackets })
            }
            "form" => {
                self.bump();
                let name = self.ident()?;
                self.expect(Tok::LBrace)?;
                let pairs = self.const_lines("pair", false, &["m"])?;
                self.expect(Tok::RBrace)?;
                Ok(Item::Form { name, pairs })
            }
            "conformal" => {
                self.bump();
                let name = self.ident()?;
                self.expect(Tok::LBrace)?;
                let basis = self.basis_lines()?;
                let lambdas = self.const_lines("lambda", true, &["n", "m"])?;
                let mus = self.const_lines("mu", false, &["m"])?;
                self.expect(Tok::RBrace)?;
                Ok(Item::Conformal {
                    name,
                    basis,
                    lambdas,
                    mus,
                })
            }
            _ => err(
                pos,
                format!("expected one of `family`, `poly`, `operator`, `lie`, `form`, `conformal`, found `{kw}`"),
            ),
        }
    }

    fn basis_lines(&mut self) -> PResult<Vec<BasisDecl>> {
        let mut out = Vec::new();
        while self.is_keyword("basis") {
            self.bump();
            let name = self.ident()?;
            let parity = self.parity()?;
            self.expect(Tok::Semi)?;
            out.push(BasisDecl { name, parity });
        }
        Ok(out)
    }

    /// `kw ( a , b [-> c] ) [ [o1 = N , o2 = N] ] = RATIONAL ;`
    fn const_lines(&mut self, kw: &str, target: bool, orders: &[&str]) -> PResult<Vec<ConstDecl>> {
        let mut out = Vec::new();
        while self.is_keyword(kw) {
            let pos = self.bump().1;
            self.expect(Tok::LParen)?;
            let mut args = vec![self.ident()?];
            self.expect(Tok::Comma)?;
            args.push(self.ident()?);
            if target {
                self.expect(Tok::Arrow)?;
                args.push(self.ident()?);
            }
            self.expect(Tok::RParen)?;
            let mut values = Vec::new();
            if !orders.is_empty() {
                self.expect(Tok::LBracket)?;
                for (k, o) in orders.iter().enumerate() {
                    if k > 0 {
                        self.expect(Tok::Comma)?;
                    }
                    self.keyword(o)?;
                    self.expect(Tok::Eq)?;
                    values.push(self.nat()?);
                }
                self.expect(Tok::RBracket)?;
            }
            self.expect(Tok::Eq)?;
            let value = self.rational()?;
            self.expect(Tok::Semi)?;
            out.push(ConstDecl {
                args,
                orders: values,
                value,
                pos,
            });
        }
        Ok(out)
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut terms = vec![(false, self.term()?)];
        loop {
            let negated = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => break,
            };
            self.bump();
            terms.push((negated, self.term()?));
        }
        Ok(if terms.len() == 1 && !terms[0].0 {
            terms.pop().unwrap().1
        } else {
            Expr::Sum(terms)
        })
    }

    fn term(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.term()?)));
        }
        let mut factors = vec![self.factor()?];
        while *self.peek() == Tok::Star {
            self.bump();
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Product(factors)
        })
    }

    /// Whether the tokens ahead are a bare `D` or `D^n` (an operator power
    /// rather than a generator reference such as `D^2[psi]`).
    fn at_operator_power(&self) -> bool {
        if !self.is_keyword("D") {
            return false;
        }
        match self.peek_at(1) {
            Tok::LBracket => false,
            Tok::Caret => !matches!(self.peek_at(3), Tok::LBracket),
            _ => true,
        }
    }

    fn factor(&mut self) -> PResult<Expr> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            let pos = self.bump().1;
            let exp = self.nat()?;
            return Ok(Expr::Pow {
                base: Box::new(base),
                exp,
                pos,
            });
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Number(q) => {
                self.bump();
                Ok(Expr::Num(q))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) if name == "D" => {
                if self.at_operator_power() {
                    return err(
                        pos,
                        "`D` as an operator may only end a term of an operator entry",
                    );
                }
                self.bump();
                let order = if *self.peek() == Tok::Caret {
                    self.bump();
                    self.nat()?
                } else {
                    1
                };
                self.expect(Tok::LBracket)?;
                let name = self.ident()?;
                self.expect(Tok::RBracket)?;
                Ok(Expr::Gen { name, order })
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                let mut order = 0;
                while *self.peek() == Tok::Prime {
                    let p = self.bump().1;
                    order += 1;
                    if order > 3 {
                        return err(
                            p,
                            "at most three primes; write D^n[name] for higher derivatives",
                        );
                    }
                }
                Ok(Expr::Gen { name, order })
            }
            other => err(pos, format!("expected an expression, found {other}")),
        }
    }

    fn operator_power(&mut self) -> PResult<u32> {
        self.keyword("D")?;
        if *self.peek() == Tok::Caret {
            self.bump();
            self.nat()
        } else {
            Ok(1)
        }
    }

    fn opexpr(&mut self) -> PResult<Vec<OpTerm>> {
        let mut out = Vec::new();
        let mut negated = false;
        if *self.peek() == Tok::Minus {
            self.bump();
            negated = true;
        }
        loop {
            let mut factors = Vec::new();
            let mut power = 0;
            loop {
                if self.at_operator_power() {
                    power = self.operator_power()?;
                    if *self.peek() == Tok::Star {
                        return err(self.pos(), "`D` must be the last factor of a term");
                    }
                    break;
                }
                factors.push(self.factor()?);
                if *self.peek() != Tok::Star {
                    break;
                }
                self.bump();
            }
            let coefficient = match factors.len() {
                0 => None,
                1 => factors.pop(),
                _ => Some(Expr::Product(factors)),
            };
            out.push(OpTerm {
                negated,
                coefficient,
                power,
            });
            negated = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => break,
            };
            self.bump();
        }
        Ok(out)
    }
}

pub fn parse_items(src: &str) -> Result<Vec<Item>, SyntaxError> {
    let toks = tokenize(src)?;
    Parser { toks, at: 0 }.items()
}

/// Parses a standalone polynomial expression.
pub fn parse_expr(src: &str) -> Result<Expr, SyntaxError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, at: 0 };
    let e = p.expr()?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

/// Parses a standalone operator expression such as `D^3 + 4*psi*D`.
pub fn parse_opexpr(src: &str) -> Result<Vec<OpTerm>, SyntaxError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, at: 0 };
    let e = p.opexpr()?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

impl Expr {
    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Num(q) if q.is_zero())
    }
}
