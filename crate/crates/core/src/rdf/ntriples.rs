//! Line-oriented N-Triples subset: IRIs, `_:` blank nodes, literals with an
//! optional datatype or language tag.

use std::fmt;

use super::{Literal, RdfError, Term, Triple};

/// Parses one N-Triples statement. Errors carry the byte offset within `line`.
pub fn parse_ntriple(line: &str) -> Result<Triple, RdfError> {
    let mut cur = Cursor { src: line, pos: 0 };
    cur.skip_ws();
    let s = cur.term()?;
    if matches!(s, Term::Literal(_)) {
        return Err(cur.err_at(0, "subject must be an IRI or blank node"));
    }
    cur.skip_ws();
    let p_start = cur.pos;
    let p = cur.term()?;
    if !p.is_iri() {
        return Err(cur.err_at(p_start, "predicate must be an IRI"));
    }
    cur.skip_ws();
    let o = cur.term()?;
    cur.skip_ws();
    if !cur.eat('.') {
        return Err(cur.err("expected '.'"));
    }
    cur.skip_ws();
    if cur.peek() == Some('#') {
        cur.pos = line.len();
    }
    if cur.pos != line.len() {
        return Err(cur.err("trailing characters after '.'"));
    }
    Ok(Triple::new(s, p, o))
}

pub fn serialize_ntriple(t: &Triple) -> String {
    t.to_string()
}

/// True for lines that carry no statement (blank or comment).
pub fn is_blank_line(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

pub(crate) fn write_escaped(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\r' => f.write_str("\\r")?,
            '\t' => f.write_str("\\t")?,
            c if (c as u32) < 0x20 || c as u32 == 0x7f => write!(f, "\\u{:04X}", c as u32)?,
            c => fmt::Write::write_char(f, c)?,
        }
    }
    Ok(())
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\r' | '\n')) {
            self.pos += 1;
        }
    }

    fn err(&self, msg: &str) -> RdfError {
        self.err_at(self.pos, msg)
    }

    fn err_at(&self, offset: usize, msg: &str) -> RdfError {
        RdfError::Parse { offset, message: msg.to_string() }
    }

    fn term(&mut self) -> Result<Term, RdfError> {
        match self.peek() {
            Some('<') => self.iri().map(Term::Iri),
            Some('_') => self.blank(),
            Some('"') => self.literal(),
            Some(_) => Err(self.err("expected IRI, blank node or literal")),
            None => Err(self.err("unexpected end of line")),
        }
    }

    fn iri(&mut self) -> Result<String, RdfError> {
        let start = self.pos;
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some('\\') => out.push(self.unicode_escape()?),
                Some(c) if c.is_whitespace() || c == '<' || c == '"' => {
                    return Err(self.err_at(self.pos - c.len_utf8(), "invalid character in IRI"))
                }
                Some(c) => out.push(c),
                None => return Err(self.err_at(start, "unterminated IRI")),
            }
        }
        if out.is_empty() {
            return Err(self.err_at(start, "empty IRI"));
        }
        Ok(out)
    }

    fn blank(&mut self) -> Result<Term, RdfError> {
        let start = self.pos;
        if !self.src[self.pos..].starts_with("_:") {
            return Err(self.err("expected '_:'"));
        }
        self.pos += 2;
        let label_start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        // a trailing '.' belongs to the statement terminator
        while self.pos > label_start && self.src[..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        if self.pos == label_start {
            return Err(self.err_at(start, "empty blank node label"));
        }
        Ok(Term::Blank(self.src[label_start..self.pos].to_string()))
    }

    fn literal(&mut self) -> Result<Term, RdfError> {
        let start = self.pos;
        self.bump();
        let mut lexical = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => {
                    let esc_at = self.pos - 1;
                    match self.bump() {
                        Some('"') => lexical.push('"'),
                        Some('\\') => lexical.push('\\'),
                        Some('\'') => lexical.push('\''),
                        Some('n') => lexical.push('\n'),
                        Some('r') => lexical.push('\r'),
                        Some('t') => lexical.push('\t'),
                        Some('b') => lexical.push('\u{8}'),
                        Some('f') => lexical.push('\u{c}'),
                        Some('u') | Some('U') => {
                            self.pos -= 1;
                            lexical.push(self.unicode_escape()?);
                        }
                        _ => return Err(self.err_at(esc_at, "invalid escape sequence")),
                    }
                }
                Some(c) => lexical.push(c),
                None => return Err(self.err_at(start, "unterminated literal")),
            }
        }
        if self.eat('@') {
            let tag_start = self.pos;
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || c == '-' {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if self.pos == tag_start {
                return Err(self.err("empty language tag"));
            }
            return Ok(Term::Literal(Literal::lang(lexical, &self.src[tag_start..self.pos])));
        }
        if self.src[self.pos..].starts_with("^^") {
            self.pos += 2;
            if self.peek() != Some('<') {
                return Err(self.err("expected datatype IRI"));
            }
            let dt = self.iri()?;
            return Ok(Term::Literal(Literal::typed(lexical, dt)));
        }
        Ok(Term::Literal(Literal::plain(lexical)))
    }

    /// Parses `uXXXX` or `UXXXXXXXX` (the backslash is already consumed).
    fn unicode_escape(&mut self) -> Result<char, RdfError> {
        let at = self.pos;
        let len = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.err_at(at, "invalid escape sequence")),
        };
        let hex = self.src.get(self.pos..self.pos + len).ok_or_else(|| self.err_at(at, "truncated escape"))?;
        let code = u32::from_str_radix(hex, 16).map_err(|_| self.err_at(at, "invalid hex in escape"))?;
        self.pos += len;
        char::from_u32(code).ok_or_else(|| self.err_at(at, "escape is not a scalar value"))
    }
}
