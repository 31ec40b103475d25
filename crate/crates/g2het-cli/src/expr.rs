//! Expression mini-language used inside scenario strings.
//!
//! ```text
//! expr     := ['+'|'-'] term (('+'|'-') term)*
//! term     := factor ('*' factor)*
//! factor   := rational | atom ('^' atom)*
//! rational := int ['/' posint]
//! atom     := parameter | generator | alias | named form
//! ```
//!
//! A term carries at most one wedge product. Expressions without any form
//! factor are scalars.

use std::collections::HashMap;
use std::str::FromStr;
use std::sync::Arc;

use g2het::exterior::{Coframe, Form};
use g2het::ring::{ParamSet, Rational, Scalar};
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("column {column}: {message}")]
pub struct ExprError {
    /// 1-based character column inside the expression string.
    pub column: usize,
    pub message: String,
}

fn err<T>(column: usize, message: impl Into<String>) -> Result<T, ExprError> {
    Err(ExprError { column, message: message.into() })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Scalar(Scalar),
    Form(Form),
}

/// Names visible to an expression.
pub struct Context<'a> {
    pub coframe: &'a Coframe,
    pub params: &'a Arc<ParamSet>,
    pub forms: &'a HashMap<String, Form>,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(String),
    Ident(String),
    Op(char),
}

/// A coefficient and, for wedge factors, the form with its degree if known.
type Factor = (Scalar, Option<(Form, Option<usize>)>);

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            out.push((col, Tok::Int(chars[start..i].iter().collect())));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((col, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^".contains(c) {
            out.push((col, Tok::Op(c)));
            i += 1;
        } else {
            return err(col, format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

enum Atom {
    Param(Scalar),
    Form(Form, Option<usize>),
}

struct Parser<'a, 'c> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    ctx: &'a Context<'c>,
}

/// A term: coefficient and an optional form with its syntactic degree.
struct Term {
    coeff: Scalar,
    form: Option<(Form, Option<usize>)>,
    column: usize,
}

impl<'a, 'c> Parser<'a, 'c> {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.pos)
    }

    fn column(&self) -> usize {
        self.peek().map(|t| t.0).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat(&mut self, op: char) -> bool {
        if matches!(self.peek(), Some((_, Tok::Op(c))) if *c == op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn atom(&mut self, col: usize, name: &str) -> Result<Atom, ExprError> {
        let ctx = self.ctx;
        if let Some(i) = ctx.coframe.index(name) {
            return Ok(Atom::Form(Form::gen(ctx.coframe.dim(), i), Some(1)));
        }
        if let Some(f) = ctx.coframe.alias(name).or_else(|| ctx.forms.get(name)) {
            return Ok(Atom::Form(f.clone(), f.degree()));
        }
        if ctx.params.index(name).is_some() {
            return Ok(Atom::Param(ctx.params.var(name).expect("indexed")));
        }
        err(col, format!("unknown name `{name}`"))
    }

    fn factor(&mut self) -> Result<Factor, ExprError> {
        let col = self.column();
        match self.next() {
            Some((_, Tok::Int(n))) => {
                let mut r = Rational::from_str(&n).expect("digits");
                if self.eat('/') {
                    let dcol = self.column();
                    match self.next() {
                        Some((_, Tok::Int(d))) => {
                            let d = Rational::from_str(&d).expect("digits");
                            if d.is_zero() {
                                return err(dcol, "zero denominator");
                            }
                            r /= d;
                        }
                        _ => return err(dcol, "expected a positive integer denominator"),
                    }
                }
                if matches!(self.peek(), Some((_, Tok::Op('^')))) {
                    return err(self.column(), "`^` needs a generator on its left");
                }
                Ok((Scalar::from_rational(r), None))
            }
            Some((_, Tok::Ident(name))) => match self.atom(col, &name)? {
                Atom::Param(p) => {
                    if matches!(self.peek(), Some((_, Tok::Op('^')))) {
                        return err(self.column(), format!("parameter `{name}` cannot be wedged"));
                    }
                    Ok((p, None))
                }
                Atom::Form(mut f, mut deg) => {
                    while self.eat('^') {
                        let c = self.column();
                        let Some((_, Tok::Ident(n))) = self.next() else {
                            return err(c, "expected a generator after `^`");
                        };
                        match self.atom(c, &n)? {
                            Atom::Form(g, dg) => {
                                deg = deg.zip(dg).map(|(a, b)| a + b);
                                f = f.wedge(&g);
                            }
                            Atom::Param(_) => return err(c, format!("parameter `{n}` cannot be wedged")),
                        }
                    }
                    Ok((Scalar::one(), Some((f, deg))))
                }
            },
            Some((_, Tok::Op(o))) => err(col, format!("unexpected `{o}`")),
            None => err(col, "unexpected end of expression"),
        }
    }

    fn term(&mut self, negate: bool) -> Result<Term, ExprError> {
        let column = self.column();
        let mut coeff = if negate { -Scalar::one() } else { Scalar::one() };
        let mut form = None;
        loop {
            let col = self.column();
            let (c, f) = self.factor()?;
            coeff = &coeff * &c;
            if let Some(f) = f {
                if form.is_some() {
                    return err(col, "two form factors in one term; use `^` for the wedge product");
                }
                form = Some(f);
            }
            if !self.eat('*') {
                break;
            }
        }
        Ok(Term { coeff, form, column })
    }

    fn expr(&mut self) -> Result<Vec<Term>, ExprError> {
        let mut terms = Vec::new();
        let mut negate = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        loop {
            terms.push(self.term(negate)?);
            if self.eat('+') {
                negate = false;
            } else if self.eat('-') {
                negate = true;
            } else {
                break;
            }
        }
        if let Some((c, t)) = self.peek() {
            return err(*c, format!("unexpected {t:?} after expression"));
        }
        Ok(terms)
    }
}

pub fn parse(src: &str, ctx: &Context) -> Result<Value, ExprError> {
    let toks = tokenize(src)?;
    let end = src.chars().count() + 1;
    if toks.is_empty() {
        return err(1, "empty expression");
    }
    let mut p = Parser { toks, pos: 0, end, ctx };
    let terms = p.expr()?;
    let scalars = terms.iter().filter(|t| t.form.is_none()).count();
    if scalars == terms.len() {
        let s = terms.into_iter().fold(Scalar::zero(), |acc, t| acc + t.coeff);
        return Ok(Value::Scalar(s));
    }
    if scalars > 0 {
        let t = terms.iter().find(|t| t.form.is_none()).expect("counted");
        return err(t.column, "grade mismatch: scalar term in a form expression");
    }
    let dim = ctx.coframe.dim();
    let mut degree: Option<usize> = None;
    let mut acc = Form::zero(dim);
    for t in terms {
        let (f, d) = t.form.expect("form term");
        if let Some(d) = d {
            match degree {
                Some(k) if k != d => return err(t.column, format!("grade mismatch: degree {d} after degree {k}")),
                _ => degree = Some(d),
            }
        }
        acc = acc + f.scale(&t.coeff);
    }
    Ok(Value::Form(acc))
}

/// Parses a form, optionally of a required degree.
pub fn parse_form(src: &str, ctx: &Context, degree: Option<usize>) -> Result<Form, ExprError> {
    match parse(src, ctx)? {
        Value::Form(f) => {
            if let Some(k) = degree {
                if !f.is_zero() && !f.is_homogeneous_of(k) {
                    return err(1, format!("grade mismatch: expected a {k}-form"));
                }
            }
            Ok(f)
        }
        Value::Scalar(s) if s.is_zero() => Ok(Form::zero(ctx.coframe.dim())),
        Value::Scalar(_) if degree == Some(0) => err(1, "use a form expression"),
        Value::Scalar(_) => err(1, "grade mismatch: expected a form, found a scalar"),
    }
}

pub fn parse_scalar(src: &str, ctx: &Context) -> Result<Scalar, ExprError> {
    match parse(src, ctx)? {
        Value::Scalar(s) => Ok(s),
        Value::Form(_) => err(1, "grade mismatch: expected a scalar, found a form"),
    }
}
