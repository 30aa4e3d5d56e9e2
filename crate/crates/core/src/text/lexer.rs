//! Tokenizer shared by the policy, schema and system-model parsers.
//!
//! Newlines separate lines but carry no meaning beyond ending `#` comments;
//! the grammars above decide structure. Integer tokens are unsigned
//! magnitudes, a leading `-` is lexed as [`Tok::Minus`] and applied by the
//! parsers where a signed literal is expected.

use super::{SourceSpan, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    /// Identifier, possibly dotted (`cacheHandler.size`).
    Ident(String),
    /// Unsigned integer magnitude.
    Int(i64),
    /// Quoted qualitative value: `'high'`.
    Quoted(String),
    EqEq,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
    Eq,
    ColonEq,
    Colon,
    Comma,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    FatArrow,
    Plus,
    Minus,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Int(n) => format!("integer {n}"),
            Tok::Quoted(s) => format!("quoted value '{s}'"),
            Tok::EqEq => "'=='".into(),
            Tok::Ne => "'!='".into(),
            Tok::Le => "'<='".into(),
            Tok::Ge => "'>='".into(),
            Tok::Lt => "'<'".into(),
            Tok::Gt => "'>'".into(),
            Tok::Eq => "'='".into(),
            Tok::ColonEq => "':='".into(),
            Tok::Colon => "':'".into(),
            Tok::Comma => "','".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::FatArrow => "'=>'".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

/// Tokenize a whole document. Lines are numbered from 1.
pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut tokens = Vec::new();
    for (i, line) in text.lines().enumerate() {
        tokenize_line(line, (i + 1) as u32, &mut tokens)?;
    }
    Ok(tokens)
}

/// Tokenize one line, appending to `out`. Stops at `#`.
pub(crate) fn tokenize_line(
    line: &str,
    line_no: u32,
    out: &mut Vec<Token>,
) -> Result<(), SyntaxError> {
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0usize;
    let span = |col: usize, len: usize| SourceSpan::new(line_no, (col + 1) as u32, len as u32);
    while i < chars.len() {
        let c = chars[i];
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            'a'..='z' | 'A'..='Z' | '_' => {
                i += 1;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                // dotted segments: a '.' must introduce another segment
                while i + 1 < chars.len()
                    && chars[i] == '.'
                    && (chars[i + 1].is_ascii_alphabetic() || chars[i + 1] == '_')
                {
                    i += 2;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                }
                Tok::Ident(chars[start..i].iter().collect())
            }
            '0'..='9' => {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let value: i64 = text.parse().map_err(|_| {
                    SyntaxError::new(span(start, i - start), "integer literal out of range")
                })?;
                Tok::Int(value)
            }
            '\'' => {
                i += 1;
                let vstart = i;
                while i < chars.len() && chars[i] != '\'' {
                    i += 1;
                }
                if i >= chars.len() {
                    return Err(SyntaxError::new(
                        span(start, i - start),
                        "unterminated quoted value",
                    ));
                }
                let value: String = chars[vstart..i].iter().collect();
                i += 1; // closing quote
                if value.is_empty()
                    || !value
                        .chars()
                        .all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
                {
                    return Err(SyntaxError::new(
                        span(start, i - start),
                        format!("invalid quoted value '{value}'"),
                    ));
                }
                Tok::Quoted(value)
            }
            '=' => {
                i += 1;
                if i < chars.len() && chars[i] == '=' {
                    i += 1;
                    Tok::EqEq
                } else if i < chars.len() && chars[i] == '>' {
                    i += 1;
                    Tok::FatArrow
                } else {
                    Tok::Eq
                }
            }
            '!' => {
                i += 1;
                if i < chars.len() && chars[i] == '=' {
                    i += 1;
                    Tok::Ne
                } else {
                    return Err(SyntaxError::new(span(start, 1), "expected '=' after '!'"));
                }
            }
            '<' => {
                i += 1;
                if i < chars.len() && chars[i] == '=' {
                    i += 1;
                    Tok::Le
                } else {
                    Tok::Lt
                }
            }
            '>' => {
                i += 1;
                if i < chars.len() && chars[i] == '=' {
                    i += 1;
                    Tok::Ge
                } else {
                    Tok::Gt
                }
            }
            ':' => {
                i += 1;
                if i < chars.len() && chars[i] == '=' {
                    i += 1;
                    Tok::ColonEq
                } else {
                    Tok::Colon
                }
            }
            ',' => {
                i += 1;
                Tok::Comma
            }
            '[' => {
                i += 1;
                Tok::LBracket
            }
            ']' => {
                i += 1;
                Tok::RBracket
            }
            '{' => {
                i += 1;
                Tok::LBrace
            }
            '}' => {
                i += 1;
                Tok::RBrace
            }
            '+' => {
                i += 1;
                Tok::Plus
            }
            '-' => {
                i += 1;
                Tok::Minus
            }
            other => {
                return Err(SyntaxError::new(
                    span(start, 1),
                    format!("unexpected character {other:?}"),
                ));
            }
        };
        out.push(Token { tok, span: span(start, i - start) });
    }
    Ok(())
}

/// Cursor over a token stream with expect-style helpers. Errors carry the
/// span of the offending token (or end of input).
pub(crate) struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
    eof_span: SourceSpan,
}

impl Cursor {
    pub(crate) fn new(tokens: Vec<Token>, eof_span: SourceSpan) -> Self {
        Cursor { tokens, pos: 0, eof_span }
    }

    pub(crate) fn from_text(text: &str) -> Result<Self, SyntaxError> {
        let tokens = tokenize(text)?;
        let last_line = text.lines().count().max(1) as u32;
        let eof_col = text.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1) as u32;
        Ok(Cursor::new(tokens, SourceSpan::new(last_line, eof_col, 0)))
    }

    pub(crate) fn is_done(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub(crate) fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    pub(crate) fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn here(&self) -> SourceSpan {
        self.peek().map(|t| t.span).unwrap_or(self.eof_span)
    }

    pub(crate) fn error(&self, expected: &str) -> SyntaxError {
        let found = match self.peek() {
            Some(t) => t.tok.describe(),
            None => "end of input".into(),
        };
        SyntaxError::new(self.here(), format!("expected {expected}, found {found}"))
    }

    /// Consume a keyword, matched case-insensitively.
    pub(crate) fn expect_keyword(&mut self, word: &str) -> Result<Token, SyntaxError> {
        match self.peek() {
            Some(Token { tok: Tok::Ident(s), .. }) if s.eq_ignore_ascii_case(word) => {
                Ok(self.next().unwrap())
            }
            _ => Err(self.error(&format!("'{word}'"))),
        }
    }

    pub(crate) fn peek_keyword(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Ident(s), .. }) if s.eq_ignore_ascii_case(word))
    }

    /// Consume an identifier that is not a reserved keyword.
    pub(crate) fn expect_ident(
        &mut self,
        what: &str,
        reserved: &[&str],
        allow_dotted: bool,
    ) -> Result<(String, SourceSpan), SyntaxError> {
        match self.peek() {
            Some(Token { tok: Tok::Ident(s), span }) => {
                if reserved.iter().any(|r| s.eq_ignore_ascii_case(r)) {
                    return Err(SyntaxError::new(
                        *span,
                        format!("expected {what}, found reserved keyword '{s}'"),
                    ));
                }
                if !allow_dotted && s.contains('.') {
                    return Err(SyntaxError::new(
                        *span,
                        format!("expected {what}, found dotted identifier '{s}'"),
                    ));
                }
                let span = *span;
                let s = s.clone();
                self.next();
                Ok((s, span))
            }
            _ => Err(self.error(what)),
        }
    }

    /// Consume a possibly negated integer literal.
    pub(crate) fn expect_signed_int(&mut self) -> Result<i64, SyntaxError> {
        let negative = if matches!(self.peek(), Some(Token { tok: Tok::Minus, .. })) {
            self.next();
            true
        } else {
            false
        };
        match self.peek() {
            Some(Token { tok: Tok::Int(n), .. }) => {
                let n = *n;
                self.next();
                Ok(if negative { -n } else { n })
            }
            _ => Err(self.error("integer")),
        }
    }

    pub(crate) fn expect_tok(&mut self, tok: Tok, what: &str) -> Result<Token, SyntaxError> {
        match self.peek() {
            Some(t) if t.tok == tok => Ok(self.next().unwrap()),
            _ => Err(self.error(what)),
        }
    }

    /// Consume a quoted qualitative value, returned lower-cased.
    pub(crate) fn expect_quoted(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(Token { tok: Tok::Quoted(s), .. }) => {
                let s = s.to_ascii_lowercase();
                self.next();
                Ok(s)
            }
            _ => Err(self.error("quoted value")),
        }
    }
}
