use std::fmt;

use super::syntax::Span;
use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Number(String),
    NetworkKw,
    PropertyKw,
    Forall,
    Exists,
    If,
    Then,
    Else,
    Not,
    And,
    Or,
    True,
    False,
    Map,
    Fold,
    ZipWith,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Dot,
    Arrow,
    Backslash,
    Bang,
    Plus,
    Minus,
    Star,
    EqEq,
    NotEq,
    Le,
    Lt,
    Ge,
    Gt,
    Assign,
    VecAdd,
    VecEq,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Ident(name) => return write!(f, "identifier `{name}`"),
            TokenKind::Number(n) => return write!(f, "number `{n}`"),
            TokenKind::NetworkKw => "`@network`",
            TokenKind::PropertyKw => "`@property`",
            TokenKind::Forall => "`forall`",
            TokenKind::Exists => "`exists`",
            TokenKind::If => "`if`",
            TokenKind::Then => "`then`",
            TokenKind::Else => "`else`",
            TokenKind::Not => "`not`",
            TokenKind::And => "`and`",
            TokenKind::Or => "`or`",
            TokenKind::True => "`true`",
            TokenKind::False => "`false`",
            TokenKind::Map => "`map`",
            TokenKind::Fold => "`fold`",
            TokenKind::ZipWith => "`zipWith`",
            TokenKind::LParen => "`(`",
            TokenKind::RParen => "`)`",
            TokenKind::LBracket => "`[`",
            TokenKind::RBracket => "`]`",
            TokenKind::Comma => "`,`",
            TokenKind::Colon => "`:`",
            TokenKind::Dot => "`.`",
            TokenKind::Arrow => "`->`",
            TokenKind::Backslash => "`\\`",
            TokenKind::Bang => "`!`",
            TokenKind::Plus => "`+`",
            TokenKind::Minus => "`-`",
            TokenKind::Star => "`*`",
            TokenKind::EqEq => "`==`",
            TokenKind::NotEq => "`!=`",
            TokenKind::Le => "`<=`",
            TokenKind::Lt => "`<`",
            TokenKind::Ge => "`>=`",
            TokenKind::Gt => "`>`",
            TokenKind::Assign => "`=`",
            TokenKind::VecAdd => "`.+.`",
            TokenKind::VecEq => "`.==.`",
            TokenKind::Eof => "end of input",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

fn keyword(word: &str) -> Option<TokenKind> {
    Some(match word {
        "forall" => TokenKind::Forall,
        "exists" => TokenKind::Exists,
        "if" => TokenKind::If,
        "then" => TokenKind::Then,
        "else" => TokenKind::Else,
        "not" => TokenKind::Not,
        "and" => TokenKind::And,
        "or" => TokenKind::Or,
        "true" => TokenKind::True,
        "false" => TokenKind::False,
        "map" => TokenKind::Map,
        "fold" => TokenKind::Fold,
        "zipWith" => TokenKind::ZipWith,
        _ => return None,
    })
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    rest: &'a str,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn starts_with(&self, s: &str) -> bool {
        self.rest.starts_with(s)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        self.rest = &self.rest[c.len_utf8()..];
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn span(&self) -> Span {
        Span { line: self.line, column: self.column }
    }
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { chars: source.chars().peekable(), rest: source, line: 1, column: 1 };
    let mut tokens = Vec::new();
    loop {
        // whitespace and `--` line comments
        loop {
            match cur.peek() {
                Some(c) if c.is_whitespace() => {
                    cur.bump();
                }
                Some('-') if cur.starts_with("--") => {
                    while let Some(c) = cur.peek() {
                        if c == '\n' {
                            break;
                        }
                        cur.bump();
                    }
                }
                _ => break,
            }
        }
        let span = cur.span();
        let Some(c) = cur.peek() else {
            tokens.push(Token { kind: TokenKind::Eof, span });
            return Ok(tokens);
        };
        let kind = if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                    word.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            keyword(&word).unwrap_or(TokenKind::Ident(word))
        } else if c.is_ascii_digit() {
            let mut text = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_digit() {
                    text.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            // a fractional part only when a digit follows the dot
            let mut ahead = cur.rest.chars();
            if ahead.next() == Some('.') && ahead.next().is_some_and(|d| d.is_ascii_digit()) {
                text.push('.');
                cur.bump();
                while let Some(c) = cur.peek() {
                    if c.is_ascii_digit() {
                        text.push(c);
                        cur.bump();
                    } else {
                        break;
                    }
                }
            }
            TokenKind::Number(text)
        } else if c == '@' {
            cur.bump();
            let mut word = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphabetic() {
                    word.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            match word.as_str() {
                "network" => TokenKind::NetworkKw,
                "property" => TokenKind::PropertyKw,
                _ => {
                    return Err(ParseError::new(
                        span,
                        format!("unknown annotation `@{word}`"),
                        vec!["`@network`".into(), "`@property`".into()],
                    ))
                }
            }
        } else {
            let (kind, len) = if cur.starts_with(".==.") {
                (TokenKind::VecEq, 4)
            } else if cur.starts_with(".+.") {
                (TokenKind::VecAdd, 3)
            } else if cur.starts_with("->") {
                (TokenKind::Arrow, 2)
            } else if cur.starts_with("==") {
                (TokenKind::EqEq, 2)
            } else if cur.starts_with("!=") {
                (TokenKind::NotEq, 2)
            } else if cur.starts_with("<=") {
                (TokenKind::Le, 2)
            } else if cur.starts_with(">=") {
                (TokenKind::Ge, 2)
            } else {
                let single = match c {
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    '[' => TokenKind::LBracket,
                    ']' => TokenKind::RBracket,
                    ',' => TokenKind::Comma,
                    ':' => TokenKind::Colon,
                    '.' => TokenKind::Dot,
                    '\\' | 'λ' => TokenKind::Backslash,
                    '!' => TokenKind::Bang,
                    '+' => TokenKind::Plus,
                    '-' => TokenKind::Minus,
                    '*' => TokenKind::Star,
                    '<' => TokenKind::Lt,
                    '>' => TokenKind::Gt,
                    '=' => TokenKind::Assign,
                    '⊕' => TokenKind::VecAdd,
                    '⊜' => TokenKind::VecEq,
                    '∀' => TokenKind::Forall,
                    '∃' => TokenKind::Exists,
                    '≤' => TokenKind::Le,
                    '≥' => TokenKind::Ge,
                    '≠' => TokenKind::NotEq,
                    '→' => TokenKind::Arrow,
                    _ => {
                        return Err(ParseError::new(span, format!("unexpected character `{c}`"), Vec::new()));
                    }
                };
                (single, 1)
            };
            for _ in 0..len {
                cur.bump();
            }
            kind
        };
        tokens.push(Token { kind, span });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn numbers_do_not_swallow_binder_dots() {
        assert_eq!(
            kinds("Index 2 . 0.5"),
            vec![
                TokenKind::Ident("Index".into()),
                TokenKind::Number("2".into()),
                TokenKind::Dot,
                TokenKind::Number("0.5".into()),
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn vector_operators_and_aliases() {
        assert_eq!(kinds("a .+. b ⊕ c"), kinds("a .+. b .+. c"));
        assert_eq!(kinds("x .==. y"), kinds("x ⊜ y"));
    }

    #[test]
    fn comments_and_positions() {
        let toks = tokenize("-- header\n  @property p").unwrap();
        assert_eq!(toks[0].kind, TokenKind::PropertyKw);
        assert_eq!(toks[0].span, Span { line: 2, column: 3 });
        assert_eq!(toks[1].span, Span { line: 2, column: 13 });
    }

    #[test]
    fn rejects_unknown_characters() {
        let err = tokenize("@property p = 1 $ 2").unwrap_err();
        assert_eq!(err.span, Span { line: 1, column: 17 });
    }
}
