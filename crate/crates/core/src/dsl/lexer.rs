use std::path::Path;

use crate::diagnostic::{Code, Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Str(String),
    /// `$Name`
    RoleRef(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Arrow,
    Comma,
    Colon,
    Eq,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(_) => "string".to_string(),
            Tok::RoleRef(r) => format!("`${r}`"),
            Tok::LBrace => "`{`".to_string(),
            Tok::RBrace => "`}`".to_string(),
            Tok::LBracket => "`[`".to_string(),
            Tok::RBracket => "`]`".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::Arrow => "`->`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Colon => "`:`".to_string(),
            Tok::Eq => "`=`".to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl Token {
    pub fn span(&self, file: &Path) -> SourceSpan {
        SourceSpan::new(file, self.line, self.column, self.length)
    }
}

pub fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

pub fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '-')
}

/// True when `s` lexes as a single identifier token.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars().peekable();
    match chars.next() {
        Some(c) if is_ident_start(c) => {}
        _ => return false,
    }
    while let Some(c) = chars.next() {
        if !is_ident_continue(c) || (c == '-' && chars.peek() == Some(&'>')) {
            return false;
        }
    }
    true
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

pub fn tokenize(text: &str, file: &Path) -> Result<Vec<Token>, Diagnostic> {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut out = Vec::new();
    let error = |line, column, msg: String| Diagnostic::new(Code::D0, msg, Some(SourceSpan::new(file, line, column, 1)));

    while let Some(c) = cur.peek() {
        let (line, column) = (cur.line, cur.column);
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '/' {
            cur.bump();
            if cur.peek() != Some('/') {
                return Err(error(line, column, "unexpected `/`".into()));
            }
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        let single = match c {
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(tok) = single {
            cur.bump();
            out.push(Token { tok, line, column, length: 1 });
            continue;
        }
        if c == '-' {
            cur.bump();
            if cur.peek() != Some('>') {
                return Err(error(line, column, "unexpected `-`".into()));
            }
            cur.bump();
            out.push(Token { tok: Tok::Arrow, line, column, length: 2 });
            continue;
        }
        if c == '"' {
            cur.bump();
            let mut value = String::new();
            let mut length = 1;
            loop {
                let Some(c) = cur.bump() else {
                    return Err(error(line, column, "unterminated string".into()));
                };
                length += 1;
                match c {
                    '"' => break,
                    '\\' => {
                        let escaped = cur.bump();
                        length += 1;
                        match escaped {
                            Some('"') => value.push('"'),
                            Some('\\') => value.push('\\'),
                            Some('n') => value.push('\n'),
                            Some('t') => value.push('\t'),
                            Some(other) => {
                                return Err(error(cur.line, cur.column - 1, format!("unknown escape `\\{other}`")));
                            }
                            None => return Err(error(line, column, "unterminated string".into())),
                        }
                    }
                    c => value.push(c),
                }
            }
            out.push(Token { tok: Tok::Str(value), line, column, length });
            continue;
        }
        if c == '$' || is_ident_start(c) {
            let role = c == '$';
            if role {
                cur.bump();
                match cur.peek() {
                    Some(c) if is_ident_start(c) => {}
                    _ => return Err(error(line, column, "expected a role name after `$`".into())),
                }
            }
            let mut ident = String::new();
            while let Some(c) = cur.peek() {
                if !is_ident_continue(c) {
                    break;
                }
                if c == '-' {
                    // `a->b`: the hyphen starts an arrow, not the identifier.
                    let mut ahead = cur.chars.clone();
                    ahead.next();
                    if ahead.peek() == Some(&'>') {
                        break;
                    }
                }
                if role && matches!(c, '.' | '-') {
                    break;
                }
                ident.push(c);
                cur.bump();
            }
            let length = ident.chars().count() + usize::from(role);
            let tok = if role { Tok::RoleRef(ident) } else { Tok::Ident(ident) };
            out.push(Token { tok, line, column, length });
            continue;
        }
        return Err(error(line, column, format!("unexpected character `{c}`")));
    }
    out.push(Token {
        tok: Tok::Eof,
        line: cur.line,
        column: cur.column,
        length: 1,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(text: &str) -> Vec<Tok> {
        tokenize(text, Path::new("t")).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn arrows_split_identifiers() {
        assert_eq!(
            toks("(a->b-c.1)"),
            vec![
                Tok::LParen,
                Tok::Ident("a".into()),
                Tok::Arrow,
                Tok::Ident("b-c.1".into()),
                Tok::RParen,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn strings_comments_roles() {
        assert_eq!(
            toks("// note\n\"a \\\"b\\\"\\n\" $Role"),
            vec![Tok::Str("a \"b\"\n".into()), Tok::RoleRef("Role".into()), Tok::Eof]
        );
    }

    #[test]
    fn positions_are_one_based() {
        let t = tokenize("model\n  \"x\"", Path::new("t")).unwrap();
        assert_eq!((t[0].line, t[0].column), (1, 1));
        assert_eq!((t[1].line, t[1].column, t[1].length), (2, 3, 3));
    }

    #[test]
    fn errors_have_positions() {
        let err = tokenize("model \"open", Path::new("t")).unwrap_err();
        assert_eq!(err.code, Code::D0);
        assert_eq!(err.span.unwrap().column, 7);
        assert!(tokenize("a ? b", Path::new("t")).is_err());
    }

    #[test]
    fn identifier_check() {
        assert!(is_identifier("violation-anticipation.3"));
        assert!(!is_identifier("a b"));
        assert!(!is_identifier("a->b"));
        assert!(!is_identifier("3a"));
        assert!(!is_identifier(""));
    }
}
