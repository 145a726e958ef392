use crate::error::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    /// A brace-joined class label such as `{a+b}`, kept whole.
    Class(String),
    LBrace,
    RBrace,
    Colon,
    Eq,
    Dot,
    Arrow,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Class(s) => format!("class label '{s}'"),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::Colon => "':'".into(),
            Tok::Eq => "'='".into(),
            Tok::Dot => "'.'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Length in bytes of a well-formed class label at the start of `s`, if any.
/// `class := '{' item ('+' item)* '}'`, `item := ident | class`.
fn class_len(s: &str) -> Option<usize> {
    fn item(b: &[u8], i: usize) -> Option<usize> {
        if b.get(i) == Some(&b'{') {
            class(b, i)
        } else {
            let n = b[i..]
                .iter()
                .take_while(|&&c| is_ident_char(c as char))
                .count();
            (n > 0).then_some(i + n)
        }
    }
    fn class(b: &[u8], i: usize) -> Option<usize> {
        if b.get(i) != Some(&b'{') {
            return None;
        }
        let mut j = item(b, i + 1)?;
        while b.get(j) == Some(&b'+') {
            j = item(b, j + 1)?;
        }
        (b.get(j) == Some(&b'}')).then_some(j + 1)
    }
    let end = class(s.as_bytes(), 0)?;
    // A class must end at a token boundary.
    match s[end..].chars().next() {
        Some(c) if is_ident_char(c) || c == '{' => None,
        _ => Some(end),
    }
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut rest = src;

    while let Some(c) = rest.chars().next() {
        let pos = Pos { line, column: col };
        let (tok, len) = match c {
            '\n' => {
                line += 1;
                col = 1;
                rest = &rest[1..];
                continue;
            }
            c if c.is_whitespace() => {
                col += 1;
                rest = &rest[c.len_utf8()..];
                continue;
            }
            '#' => {
                let n = rest.find('\n').unwrap_or(rest.len());
                col += rest[..n].chars().count();
                rest = &rest[n..];
                continue;
            }
            '{' => match class_len(rest) {
                Some(n) => (Tok::Class(rest[..n].to_owned()), n),
                None => (Tok::LBrace, 1),
            },
            '}' => (Tok::RBrace, 1),
            ':' => (Tok::Colon, 1),
            '=' => (Tok::Eq, 1),
            '.' => (Tok::Dot, 1),
            '-' if rest[1..].starts_with('>') => (Tok::Arrow, 2),
            c if is_ident_char(c) => {
                let n = rest.find(|c: char| !is_ident_char(c)).unwrap_or(rest.len());
                (Tok::Ident(rest[..n].to_owned()), n)
            }
            other => {
                return Err(ParseError {
                    line,
                    column: col,
                    message: format!("unexpected character {other:?}"),
                    expected: Vec::new(),
                })
            }
        };
        // Tokens are ASCII, so byte length equals column width.
        col += len;
        rest = &rest[len..];
        out.push(Token { tok, pos });
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, column: col },
    });
    Ok(out)
}
