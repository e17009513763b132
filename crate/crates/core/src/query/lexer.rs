use super::QueryError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Iri(String),
    /// `prefix:local`, prefix possibly empty.
    PName(String, String),
    Var(String),
    /// Lexical form with optional `@lang`; a datatype follows as `^^` tokens.
    Str(String, Option<String>),
    Integer(String),
    Decimal(String),
    Word(String),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const PUNCTS: [&str; 20] = [
    "^^", "&&", "||", "!=", "<=", ">=", "{", "}", "(", ")", ".", ",", ";", "/", "*", "+", "=", "<", ">", "!",
];

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, QueryError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| QueryError::Syntax { line, col, msg };

    while i < chars.len() {
        let c = chars[i];
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
        let (start_line, start_col) = (line, col);
        let start = i;
        let tok = if c == '<' && looks_like_iri(&chars[i..]) {
            let end = i + chars[i..].iter().position(|&ch| ch == '>').expect("checked by looks_like_iri");
            let iri: String = chars[i + 1..end].iter().collect();
            i = end + 1;
            Tok::Iri(iri)
        } else if c == '?' || c == '$' {
            i += 1;
            let name = take_while(&chars, &mut i, |ch| ch.is_alphanumeric() || ch == '_');
            if name.is_empty() {
                return Err(err(start_line, start_col, "empty variable name".into()));
            }
            Tok::Var(name)
        } else if c == '"' {
            i += 1;
            let mut lex = String::new();
            loop {
                let Some(&ch) = chars.get(i) else {
                    return Err(err(start_line, start_col, "unterminated string".into()));
                };
                i += 1;
                match ch {
                    '"' => break,
                    '\n' => return Err(err(start_line, start_col, "newline in string".into())),
                    '\\' => {
                        let esc = chars.get(i).copied().ok_or_else(|| err(line, col, "dangling escape".into()))?;
                        i += 1;
                        match esc {
                            'n' => lex.push('\n'),
                            't' => lex.push('\t'),
                            'r' => lex.push('\r'),
                            '"' => lex.push('"'),
                            '\\' => lex.push('\\'),
                            'u' | 'U' => {
                                let n = if esc == 'u' { 4 } else { 8 };
                                let hex: String = chars.get(i..i + n).map(|s| s.iter().collect()).unwrap_or_default();
                                let ch = u32::from_str_radix(&hex, 16)
                                    .ok()
                                    .filter(|_| hex.len() == n)
                                    .and_then(char::from_u32)
                                    .ok_or_else(|| err(start_line, start_col, format!("bad \\{esc} escape")))?;
                                lex.push(ch);
                                i += n;
                            }
                            other => return Err(err(start_line, start_col, format!("unknown escape \\{other}"))),
                        }
                    }
                    other => lex.push(other),
                }
            }
            let lang = if chars.get(i) == Some(&'@') {
                i += 1;
                let tag = take_while(&chars, &mut i, |ch| ch.is_ascii_alphanumeric() || ch == '-');
                if tag.is_empty() {
                    return Err(err(start_line, start_col, "empty language tag".into()));
                }
                Some(tag)
            } else {
                None
            };
            Tok::Str(lex, lang)
        } else if c.is_ascii_digit()
            || ((c == '-' || c == '+') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let mut text = String::from(c);
            i += 1;
            text.push_str(&take_while(&chars, &mut i, |ch| ch.is_ascii_digit()));
            if chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                i += 1;
                text.push('.');
                text.push_str(&take_while(&chars, &mut i, |ch| ch.is_ascii_digit()));
                Tok::Decimal(text)
            } else {
                Tok::Integer(text)
            }
        } else if c.is_alphabetic() || c == '_' || c == ':' {
            let word = take_while(&chars, &mut i, |ch| ch.is_alphanumeric() || ch == '_' || ch == '-');
            if chars.get(i) == Some(&':') {
                i += 1;
                let mut local = take_while(&chars, &mut i, |ch| ch.is_alphanumeric() || matches!(ch, '_' | '-' | '.'));
                while local.ends_with('.') {
                    local.pop();
                    i -= 1;
                }
                Tok::PName(word, local)
            } else if word.starts_with('_') {
                return Err(err(start_line, start_col, "blank nodes are not supported in queries".into()));
            } else {
                Tok::Word(word)
            }
        } else if let Some(p) = PUNCTS.iter().find(|p| starts_with(&chars[i..], p)) {
            i += p.len();
            Tok::Punct(p)
        } else {
            return Err(err(start_line, start_col, format!("unexpected character {c:?}")));
        };
        col += i - start;
        out.push(Token { tok, line: start_line, col: start_col });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

fn take_while(chars: &[char], i: &mut usize, pred: impl Fn(char) -> bool) -> String {
    let start = *i;
    while *i < chars.len() && pred(chars[*i]) {
        *i += 1;
    }
    chars[start..*i].iter().collect()
}

fn starts_with(chars: &[char], p: &str) -> bool {
    p.chars().enumerate().all(|(k, pc)| chars.get(k) == Some(&pc))
}

/// `<` opens an IRI when a `>` closes it before any whitespace.
fn looks_like_iri(chars: &[char]) -> bool {
    for (k, &ch) in chars.iter().enumerate().skip(1) {
        if ch == '>' {
            return k > 1;
        }
        if ch.is_whitespace() || ch == '<' || ch == '"' || ch == '{' || ch == '}' {
            return false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn iri_vs_less_than() {
        assert_eq!(toks("<http://a>")[0], Tok::Iri("http://a".into()));
        assert_eq!(toks("?a < ?b")[1], Tok::Punct("<"));
        assert_eq!(toks("?a <= 3")[1], Tok::Punct("<="));
    }

    #[test]
    fn pname_trailing_dot() {
        assert_eq!(
            toks("?s :p :o."),
            vec![
                Tok::Var("s".into()),
                Tok::PName("".into(), "p".into()),
                Tok::PName("".into(), "o".into()),
                Tok::Punct("."),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions() {
        let t = tokenize("SELECT\n  ?x").unwrap();
        assert_eq!((t[1].line, t[1].col), (2, 3));
    }

    #[test]
    fn numbers() {
        assert_eq!(toks("1.5 7")[..2], [Tok::Decimal("1.5".into()), Tok::Integer("7".into())]);
    }
}
