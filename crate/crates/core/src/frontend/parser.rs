//! Recursive-descent parser for `.vspec` sources.
//!
//! Precedence, loosest first: `if`/`forall`/`exists`/lambda (bodies extend to
//! the right), `or`, `and`, `not`, comparisons, `+ - .+.`, `*`, unary minus,
//! `!`, application.

use super::lexer::{tokenize, Token, TokenKind};
use super::syntax::{BinOp, BinderGroup, Builtin, Decl, Quantifier, Span, Term, TermKind};
use super::types::Type;
use super::ParseError;

pub fn parse(source: &str) -> Result<Vec<Decl>, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut decls = Vec::new();
    while !p.at(&TokenKind::Eof) {
        decls.push(p.decl()?);
    }
    Ok(decls)
}

/// Parses a single expression (used by tests and the REPL-style helpers).
pub fn parse_term(source: &str) -> Result<Term, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0 };
    let t = p.expr()?;
    p.expect(TokenKind::Eof)?;
    Ok(t)
}

pub fn parse_type(source: &str) -> Result<Type, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0 };
    let t = p.ty()?;
    p.expect(TokenKind::Eof)?;
    Ok(t)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_kind(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn at(&self, kind: &TokenKind) -> bool {
        self.peek_kind() == kind
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.at(kind) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let tok = self.peek();
        ParseError::new(tok.span, format!("unexpected {}", tok.kind), expected.iter().map(|s| s.to_string()).collect())
    }

    fn expect(&mut self, kind: TokenKind) -> Result<Token, ParseError> {
        if self.at(&kind) {
            Ok(self.advance())
        } else {
            Err(self.error(&[&kind.to_string()]))
        }
    }

    fn ident(&mut self) -> Result<(String, Span), ParseError> {
        match self.peek_kind().clone() {
            TokenKind::Ident(name) => {
                let span = self.advance().span;
                Ok((name, span))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn decl(&mut self) -> Result<Decl, ParseError> {
        let span = self.peek().span;
        match self.peek_kind() {
            TokenKind::NetworkKw => {
                self.advance();
                let (name, _) = self.ident()?;
                self.expect(TokenKind::Colon)?;
                let ty = self.ty()?;
                Ok(Decl::Network { name, ty, span })
            }
            TokenKind::PropertyKw => {
                self.advance();
                let (name, _) = self.ident()?;
                self.expect(TokenKind::Assign)?;
                let body = self.expr()?;
                Ok(Decl::Property { name, body, span })
            }
            _ => Err(self.error(&["`@network`", "`@property`"])),
        }
    }

    // ---- types ----

    fn ty(&mut self) -> Result<Type, ParseError> {
        let domain = self.ty_app()?;
        if self.eat(&TokenKind::Arrow) {
            let codomain = self.ty()?;
            Ok(Type::fun(domain, codomain))
        } else {
            Ok(domain)
        }
    }

    fn size(&mut self) -> Result<u64, ParseError> {
        match self.peek_kind().clone() {
            TokenKind::Number(text) if !text.contains('.') => {
                let span = self.peek().span;
                self.advance();
                text.parse().map_err(|_| ParseError::new(span, format!("size `{text}` is too large"), Vec::new()))
            }
            _ => Err(self.error(&["natural number"])),
        }
    }

    fn ty_app(&mut self) -> Result<Type, ParseError> {
        if let TokenKind::Ident(name) = self.peek_kind() {
            match name.as_str() {
                "Vector" => {
                    self.advance();
                    let elem = self.ty_atom()?;
                    let n = self.size()?;
                    return Ok(Type::vector(elem, n));
                }
                "Index" => {
                    self.advance();
                    return Ok(Type::Index(self.size()?));
                }
                _ => {}
            }
        }
        self.ty_atom()
    }

    fn ty_atom(&mut self) -> Result<Type, ParseError> {
        match self.peek_kind().clone() {
            TokenKind::Ident(name) => match name.as_str() {
                "Real" | "Rat" => {
                    self.advance();
                    Ok(Type::Real)
                }
                "Bool" => {
                    self.advance();
                    Ok(Type::Bool)
                }
                _ => Err(ParseError::new(
                    self.peek().span,
                    format!("unknown type `{name}`"),
                    vec!["`Real`".into(), "`Bool`".into(), "`Vector`".into(), "`Index`".into()],
                )),
            },
            TokenKind::Number(_) => Ok(Type::Nat(self.size()?)),
            TokenKind::LParen => {
                self.advance();
                let t = self.ty()?;
                self.expect(TokenKind::RParen)?;
                Ok(t)
            }
            _ => Err(self.error(&["type"])),
        }
    }

    // ---- expressions ----

    fn expr(&mut self) -> Result<Term, ParseError> {
        match self.peek_kind() {
            TokenKind::If | TokenKind::Backslash | TokenKind::Forall | TokenKind::Exists => self.prefix(),
            _ => self.or_expr(),
        }
    }

    fn prefix(&mut self) -> Result<Term, ParseError> {
        let start = self.advance();
        let span = start.span;
        match start.kind {
            TokenKind::If => {
                let c = self.expr()?;
                self.expect(TokenKind::Then)?;
                let t = self.expr()?;
                self.expect(TokenKind::Else)?;
                let e = self.expr()?;
                Ok(Term::new(TermKind::If(Box::new(c), Box::new(t), Box::new(e)), span))
            }
            TokenKind::Backslash => {
                let groups = self.binders(&TokenKind::Arrow)?;
                self.expect(TokenKind::Arrow)?;
                let body = self.expr()?;
                Ok(Term::new(TermKind::Lam(groups, Box::new(body)), span))
            }
            TokenKind::Forall | TokenKind::Exists => {
                let q = if start.kind == TokenKind::Forall { Quantifier::Forall } else { Quantifier::Exists };
                let groups = self.binders(&TokenKind::Dot)?;
                self.expect(TokenKind::Dot)?;
                let body = self.expr()?;
                Ok(Term::new(TermKind::Quant(q, groups, Box::new(body)), span))
            }
            _ => unreachable!("prefix called on a non-prefix token"),
        }
    }

    fn binders(&mut self, terminator: &TokenKind) -> Result<Vec<BinderGroup>, ParseError> {
        let mut groups = Vec::new();
        loop {
            match self.peek_kind().clone() {
                TokenKind::Ident(name) => {
                    let span = self.advance().span;
                    groups.push(BinderGroup { names: vec![name], ty: None, span });
                }
                TokenKind::LParen => {
                    let span = self.advance().span;
                    let mut names = vec![self.ident()?.0];
                    while let TokenKind::Ident(name) = self.peek_kind().clone() {
                        self.advance();
                        names.push(name);
                    }
                    self.expect(TokenKind::Colon)?;
                    let ty = self.ty()?;
                    self.expect(TokenKind::RParen)?;
                    groups.push(BinderGroup { names, ty: Some(ty), span });
                }
                ref k if k == terminator && !groups.is_empty() => return Ok(groups),
                _ => {
                    let term = terminator.to_string();
                    return Err(if groups.is_empty() {
                        self.error(&["identifier", "`(`"])
                    } else {
                        self.error(&["identifier", "`(`", &term])
                    });
                }
            }
        }
    }

    fn or_expr(&mut self) -> Result<Term, ParseError> {
        let lhs = self.and_expr()?;
        if self.at(&TokenKind::Or) {
            self.advance();
            let rhs = self.operand(Self::or_expr)?;
            let span = lhs.span;
            return Ok(Term::new(TermKind::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs)), span));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Term, ParseError> {
        let lhs = self.not_expr()?;
        if self.at(&TokenKind::And) {
            self.advance();
            let rhs = self.operand(Self::and_expr)?;
            let span = lhs.span;
            return Ok(Term::new(TermKind::Binary(BinOp::And, Box::new(lhs), Box::new(rhs)), span));
        }
        Ok(lhs)
    }

    /// A right operand: either the next tighter level, or a prefix form that
    /// swallows the rest of the expression.
    fn operand(&mut self, next: fn(&mut Self) -> Result<Term, ParseError>) -> Result<Term, ParseError> {
        match self.peek_kind() {
            TokenKind::If | TokenKind::Backslash | TokenKind::Forall | TokenKind::Exists => self.prefix(),
            _ => next(self),
        }
    }

    fn not_expr(&mut self) -> Result<Term, ParseError> {
        if self.at(&TokenKind::Not) {
            let span = self.advance().span;
            let t = self.operand(Self::not_expr)?;
            return Ok(Term::new(TermKind::Not(Box::new(t)), span));
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> Result<Term, ParseError> {
        let lhs = self.add_expr()?;
        let op = match self.peek_kind() {
            TokenKind::EqEq => BinOp::Eq,
            TokenKind::NotEq => BinOp::Neq,
            TokenKind::Le => BinOp::Le,
            TokenKind::Lt => BinOp::Lt,
            TokenKind::Ge => BinOp::Ge,
            TokenKind::Gt => BinOp::Gt,
            TokenKind::VecEq => BinOp::VecEq,
            _ => return Ok(lhs),
        };
        self.advance();
        let rhs = self.operand(Self::add_expr)?;
        let span = lhs.span;
        Ok(Term::new(TermKind::Binary(op, Box::new(lhs), Box::new(rhs)), span))
    }

    fn add_expr(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek_kind() {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                TokenKind::VecAdd => BinOp::VecAdd,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.operand(Self::mul_expr)?;
            let span = lhs.span;
            lhs = Term::new(TermKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn mul_expr(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.neg_expr()?;
        while self.at(&TokenKind::Star) {
            self.advance();
            let rhs = self.operand(Self::neg_expr)?;
            let span = lhs.span;
            lhs = Term::new(TermKind::Binary(BinOp::Mul, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn neg_expr(&mut self) -> Result<Term, ParseError> {
        if self.at(&TokenKind::Minus) {
            let span = self.advance().span;
            if let TokenKind::Number(text) = self.peek_kind().clone() {
                self.advance();
                let lit = Term::new(TermKind::Num(format!("-{text}")), span);
                return self.at_tail(lit);
            }
            let t = self.operand(Self::neg_expr)?;
            return Ok(Term::new(TermKind::Neg(Box::new(t)), span));
        }
        self.at_expr()
    }

    fn at_expr(&mut self) -> Result<Term, ParseError> {
        let head = self.app_expr()?;
        self.at_tail(head)
    }

    fn at_tail(&mut self, mut lhs: Term) -> Result<Term, ParseError> {
        while self.at(&TokenKind::Bang) {
            self.advance();
            let rhs = self.app_expr()?;
            let span = lhs.span;
            lhs = Term::new(TermKind::Binary(BinOp::At, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek_kind(),
            TokenKind::Ident(_)
                | TokenKind::Number(_)
                | TokenKind::True
                | TokenKind::False
                | TokenKind::LBracket
                | TokenKind::LParen
        )
    }

    fn app_expr(&mut self) -> Result<Term, ParseError> {
        let builtin = match self.peek_kind() {
            TokenKind::Map => Some(Builtin::Map),
            TokenKind::Fold => Some(Builtin::Fold),
            TokenKind::ZipWith => Some(Builtin::ZipWith),
            _ => None,
        };
        if let Some(b) = builtin {
            let span = self.advance().span;
            let mut args = Vec::with_capacity(b.arity());
            for _ in 0..b.arity() {
                if !self.starts_atom() {
                    return Err(self.error(&["argument"]));
                }
                args.push(self.atom()?);
            }
            return Ok(Term::new(TermKind::Builtin(b, args), span));
        }
        let head = self.atom()?;
        let mut args = Vec::new();
        while self.starts_atom() {
            args.push(self.atom()?);
        }
        if args.is_empty() {
            Ok(head)
        } else {
            let span = head.span;
            Ok(Term::new(TermKind::App(Box::new(head), args), span))
        }
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        let tok = self.peek().clone();
        let span = tok.span;
        match tok.kind {
            TokenKind::Ident(name) => {
                self.advance();
                Ok(Term::new(TermKind::Var(name), span))
            }
            TokenKind::Number(text) => {
                self.advance();
                Ok(Term::new(TermKind::Num(text), span))
            }
            TokenKind::True | TokenKind::False => {
                self.advance();
                Ok(Term::new(TermKind::Bool(tok.kind == TokenKind::True), span))
            }
            TokenKind::LBracket => {
                self.advance();
                let mut elems = Vec::new();
                if !self.eat(&TokenKind::RBracket) {
                    loop {
                        elems.push(self.expr()?);
                        if self.eat(&TokenKind::Comma) {
                            continue;
                        }
                        if self.eat(&TokenKind::RBracket) {
                            break;
                        }
                        return Err(self.error(&["`,`", "`]`"]));
                    }
                }
                Ok(Term::new(TermKind::Vec(elems), span))
            }
            TokenKind::LParen => {
                self.advance();
                let mut t = self.expr()?;
                self.expect(TokenKind::RParen)?;
                t.span = span;
                Ok(t)
            }
            TokenKind::If | TokenKind::Backslash | TokenKind::Forall | TokenKind::Exists => self.prefix(),
            _ => Err(self.error(&["expression"])),
        }
    }
}
