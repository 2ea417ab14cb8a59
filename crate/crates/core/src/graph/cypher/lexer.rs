use super::CypherError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(super) enum Tok {
    Ident(String),
    Str(String),
    Int(i64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Colon,
    Comma,
    Dot,
    Dash,
    Lt,
    Gt,
    Eq,
    Ne,
    Le,
    Ge,
    Star,
    Semicolon,
    Other(char),
    Eof,
}

#[derive(Debug, Clone)]
pub(super) struct Token {
    pub tok: Tok,
    pub offset: usize,
}

/// Keywords of the subset plus Cypher keywords it rejects.
#[cfg(test)]
const RESERVED: &[&str] = &[
    "and", "as", "asc", "by", "call", "case", "contains", "count", "create", "delete", "desc", "detach", "distinct",
    "ends", "exists", "false", "foreach", "in", "is", "limit", "load", "match", "merge", "not", "null", "optional",
    "or", "order", "remove", "return", "set", "skip", "starts", "true", "type", "union", "unwind", "where", "with",
    "xor", "yield",
];

#[cfg(test)]
pub(super) fn is_reserved(s: &str) -> bool {
    RESERVED.contains(&s.to_ascii_lowercase().as_str())
}

pub(super) fn tokenize(text: &str) -> Result<Vec<Token>, CypherError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let simple = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ':' => Some(Tok::Colon),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '-' => Some(Tok::Dash),
            '=' => Some(Tok::Eq),
            '*' => Some(Tok::Star),
            ';' => Some(Tok::Semicolon),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token { tok, offset: start });
            i += 1;
            continue;
        }
        match c {
            '<' | '>' => {
                let next = chars.get(i + 1).copied();
                let (tok, len) = match (c, next) {
                    ('<', Some('=')) => (Tok::Le, 2),
                    ('<', Some('>')) => (Tok::Ne, 2),
                    ('>', Some('=')) => (Tok::Ge, 2),
                    ('<', _) => (Tok::Lt, 1),
                    _ => (Tok::Gt, 1),
                };
                out.push(Token { tok, offset: start });
                i += len;
            }
            '"' | '\'' => {
                let quote = c;
                let mut s = String::new();
                i += 1;
                loop {
                    let Some(&ch) = chars.get(i) else {
                        return Err(CypherError::Parse {
                            offset: start,
                            message: "unterminated string literal".into(),
                        });
                    };
                    i += 1;
                    if ch == quote {
                        break;
                    }
                    if ch == '\\' {
                        let Some(&esc) = chars.get(i) else {
                            return Err(CypherError::Parse { offset: i - 1, message: "dangling escape".into() });
                        };
                        i += 1;
                        s.push(match esc {
                            'n' => '\n',
                            't' => '\t',
                            'r' => '\r',
                            other => other,
                        });
                    } else {
                        s.push(ch);
                    }
                }
                out.push(Token { tok: Tok::Str(s), offset: start });
            }
            c if c.is_ascii_digit() => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                let value = digits.parse().map_err(|_| CypherError::Parse {
                    offset: start,
                    message: format!("integer literal {digits} out of range"),
                })?;
                out.push(Token { tok: Tok::Int(value), offset: start });
            }
            c if c.is_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), offset: start });
            }
            other => {
                out.push(Token { tok: Tok::Other(other), offset: start });
                i += 1;
            }
        }
    }
    out.push(Token { tok: Tok::Eof, offset: chars.len() });
    Ok(out)
}
