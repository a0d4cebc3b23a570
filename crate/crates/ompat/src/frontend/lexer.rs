//! Tokenizer for the C subset.
//!
//! `#pragma omp` lines are bracketed by `PragmaOmp`/`PragmaEnd` tokens so the
//! parser can reuse ordinary expression parsing for clause arguments.

use super::span::Span;
use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Float(f64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Colon,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Gt,
    Le,
    Ge,
    EqEq,
    Ne,
    Not,
    AndAnd,
    OrOr,
    Assign,
    PlusAssign,
    MinusAssign,
    StarAssign,
    SlashAssign,
    PercentAssign,
    PlusPlus,
    MinusMinus,
    /// Start of a `#pragma omp` line.
    PragmaOmp,
    /// End of a pragma line (the newline).
    PragmaEnd,
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0usize;
    let mut in_pragma = false;

    macro_rules! push {
        ($tok:expr, $lo:expr, $hi:expr) => {
            toks.push(Token { tok: $tok, span: Span::new($lo as u32, $hi as u32) })
        };
    }

    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'\n' => {
                if in_pragma {
                    push!(Tok::PragmaEnd, i, i + 1);
                    in_pragma = false;
                }
                i += 1;
            }
            b' ' | b'\t' | b'\r' => i += 1,
            b'\\' if in_pragma && i + 1 < bytes.len() && bytes[i + 1] == b'\n' => {
                // Line continuation inside a pragma.
                i += 2;
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'/' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'*' => {
                let lo = i;
                i += 2;
                loop {
                    if i + 1 >= bytes.len() {
                        return Err(ParseError::syntax(
                            Span::new(lo as u32, bytes.len() as u32),
                            "unterminated block comment",
                        ));
                    }
                    if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                        i += 2;
                        break;
                    }
                    i += 1;
                }
            }
            b'#' => {
                let lo = i;
                i += 1;
                let word1 = read_word(bytes, &mut i);
                skip_spaces(bytes, &mut i);
                if word1 != "pragma" {
                    return Err(ParseError::unsupported(
                        Span::new(lo as u32, i as u32),
                        "preprocessor directive",
                    ));
                }
                let word2 = read_word(bytes, &mut i);
                if word2 != "omp" {
                    return Err(ParseError::unsupported(
                        Span::new(lo as u32, i as u32),
                        format!("#pragma {word2}"),
                    ));
                }
                push!(Tok::PragmaOmp, lo, i);
                in_pragma = true;
            }
            b'0'..=b'9' | b'.' => {
                let lo = i;
                let (tok, hi) = lex_number(bytes, &mut i, lo)?;
                push!(tok, lo, hi);
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let lo = i;
                let w = read_word(bytes, &mut i);
                push!(Tok::Ident(w), lo, i);
            }
            _ => {
                let lo = i;
                let two = if i + 1 < bytes.len() { &bytes[i..i + 2] } else { &bytes[i..i + 1] };
                let (tok, len) = match two {
                    b"<=" => (Tok::Le, 2),
                    b">=" => (Tok::Ge, 2),
                    b"==" => (Tok::EqEq, 2),
                    b"!=" => (Tok::Ne, 2),
                    b"&&" => (Tok::AndAnd, 2),
                    b"||" => (Tok::OrOr, 2),
                    b"+=" => (Tok::PlusAssign, 2),
                    b"-=" => (Tok::MinusAssign, 2),
                    b"*=" => (Tok::StarAssign, 2),
                    b"/=" => (Tok::SlashAssign, 2),
                    b"%=" => (Tok::PercentAssign, 2),
                    b"++" => (Tok::PlusPlus, 2),
                    b"--" => (Tok::MinusMinus, 2),
                    _ => match c {
                        b'(' => (Tok::LParen, 1),
                        b')' => (Tok::RParen, 1),
                        b'{' => (Tok::LBrace, 1),
                        b'}' => (Tok::RBrace, 1),
                        b'[' => (Tok::LBracket, 1),
                        b']' => (Tok::RBracket, 1),
                        b';' => (Tok::Semi, 1),
                        b',' => (Tok::Comma, 1),
                        b':' => (Tok::Colon, 1),
                        b'+' => (Tok::Plus, 1),
                        b'-' => (Tok::Minus, 1),
                        b'*' => (Tok::Star, 1),
                        b'/' => (Tok::Slash, 1),
                        b'%' => (Tok::Percent, 1),
                        b'<' => (Tok::Lt, 1),
                        b'>' => (Tok::Gt, 1),
                        b'=' => (Tok::Assign, 1),
                        b'!' => (Tok::Not, 1),
                        b'"' => {
                            return Err(ParseError::unsupported(
                                Span::new(lo as u32, lo as u32 + 1),
                                "string literal",
                            ))
                        }
                        b'&' => {
                            return Err(ParseError::unsupported(
                                Span::new(lo as u32, lo as u32 + 1),
                                "address-of / bitwise and",
                            ))
                        }
                        other => {
                            return Err(ParseError::syntax(
                                Span::new(lo as u32, lo as u32 + 1),
                                format!("unexpected character `{}`", other as char),
                            ))
                        }
                    },
                };
                i += len;
                push!(tok, lo, i);
            }
        }
    }
    if in_pragma {
        push!(Tok::PragmaEnd, bytes.len(), bytes.len());
    }
    push!(Tok::Eof, bytes.len(), bytes.len());
    Ok(toks)
}

fn skip_spaces(bytes: &[u8], i: &mut usize) {
    while *i < bytes.len() && (bytes[*i] == b' ' || bytes[*i] == b'\t') {
        *i += 1;
    }
}

fn read_word(bytes: &[u8], i: &mut usize) -> String {
    skip_spaces(bytes, i);
    let lo = *i;
    while *i < bytes.len() && (bytes[*i].is_ascii_alphanumeric() || bytes[*i] == b'_') {
        *i += 1;
    }
    String::from_utf8_lossy(&bytes[lo..*i]).into_owned()
}

fn lex_number(bytes: &[u8], i: &mut usize, lo: usize) -> Result<(Tok, usize), ParseError> {
    let mut is_float = false;
    let start = *i;
    while *i < bytes.len() && bytes[*i].is_ascii_digit() {
        *i += 1;
    }
    if *i < bytes.len() && bytes[*i] == b'.' {
        is_float = true;
        *i += 1;
        while *i < bytes.len() && bytes[*i].is_ascii_digit() {
            *i += 1;
        }
    }
    if *i < bytes.len() && (bytes[*i] == b'e' || bytes[*i] == b'E') {
        let save = *i;
        *i += 1;
        if *i < bytes.len() && (bytes[*i] == b'+' || bytes[*i] == b'-') {
            *i += 1;
        }
        if *i < bytes.len() && bytes[*i].is_ascii_digit() {
            is_float = true;
            while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                *i += 1;
            }
        } else {
            *i = save;
        }
    }
    let text = std::str::from_utf8(&bytes[start..*i]).unwrap();
    if text == "." {
        return Err(ParseError::syntax(
            Span::new(lo as u32, *i as u32),
            "stray `.`",
        ));
    }
    let span = Span::new(lo as u32, *i as u32);
    if is_float {
        let v: f64 = text
            .parse()
            .map_err(|_| ParseError::syntax(span, format!("bad float literal `{text}`")))?;
        Ok((Tok::Float(v), *i))
    } else {
        let v: i64 = text
            .parse()
            .map_err(|_| ParseError::syntax(span, format!("integer literal out of range `{text}`")))?;
        Ok((Tok::Int(v), *i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn basic_tokens() {
        let ts = kinds("for (i = 0; i < n; i++) a[i] += 2.5;");
        assert!(ts.contains(&Tok::Ident("for".into())));
        assert!(ts.contains(&Tok::PlusAssign));
        assert!(ts.contains(&Tok::Float(2.5)));
        assert!(ts.contains(&Tok::PlusPlus));
    }

    #[test]
    fn pragma_brackets() {
        let ts = kinds("#pragma omp parallel for private(x)\nfor(;;)");
        assert_eq!(ts[0], Tok::PragmaOmp);
        assert!(ts.contains(&Tok::PragmaEnd));
    }

    #[test]
    fn comments_skipped() {
        let ts = kinds("a /* x */ = 1; // done\nb = 2;");
        assert_eq!(
            ts.iter().filter(|t| matches!(t, Tok::Ident(_))).count(),
            2
        );
    }

    #[test]
    fn exponent_floats() {
        assert_eq!(kinds("1e99")[0], Tok::Float(1e99));
        assert_eq!(kinds("0.25")[0], Tok::Float(0.25));
        assert_eq!(kinds("3")[0], Tok::Int(3));
    }

    #[test]
    fn string_literal_rejected() {
        assert!(lex("printf(\"x\")").is_err());
    }
}
