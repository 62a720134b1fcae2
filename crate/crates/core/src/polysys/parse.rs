use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::Polynomial;
use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
}

fn err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        pos,
        msg: msg.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, ch) = chars[i];
        match ch {
            c if c.is_whitespace() => i += 1,
            '+' => {
                out.push((pos, Tok::Plus));
                i += 1;
            }
            '-' => {
                out.push((pos, Tok::Minus));
                i += 1;
            }
            '*' => {
                out.push((pos, Tok::Star));
                i += 1;
            }
            '^' => {
                out.push((pos, Tok::Caret));
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                    i += 1;
                }
                // exponent only when followed by digits, so "2e" stays "2" then "e"
                if i < chars.len() && (chars[i].1 == 'e' || chars[i].1 == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j].1 == '+' || chars[j].1 == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].1.is_ascii_digit() {
                        while j < chars.len() && chars[j].1.is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let end = if i < chars.len() { chars[i].0 } else { text.len() };
                let lit = &text[pos..end];
                let value: f64 = lit
                    .parse()
                    .map_err(|_| err(chars[start].0, alloc::format!("malformed number `{lit}`")))?;
                let imag_suffix = i < chars.len()
                    && chars[i].1 == 'i'
                    && !(i + 1 < chars.len() && (chars[i + 1].1.is_alphanumeric() || chars[i + 1].1 == '_'));
                if imag_suffix {
                    out.push((pos, Tok::Imag(value)));
                    i += 1;
                } else {
                    out.push((pos, Tok::Num(value)));
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                    i += 1;
                }
                let end = if i < chars.len() { chars[i].0 } else { text.len() };
                out.push((pos, Tok::Ident(String::from(&text[pos..end]))));
            }
            c => return Err(err(pos, alloc::format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

/// Parses a `+`/`-` separated list of terms such as `"0.9999*x1*x2 - 3.5i*x3^2 + 1"`.
///
/// Each term is a product of numbers, variables with optional `^k`, and the
/// imaginary unit `i` (unless `i` is itself a declared variable). The `*` may
/// be omitted between factors.
pub fn parse_poly(text: &str, vars: &[&str]) -> Result<Polynomial> {
    let toks = lex(text)?;
    let n = vars.len();
    let mut poly = Polynomial::zero(vars);
    let mut at = 0;
    if toks.is_empty() {
        return Err(err(0, "empty expression"));
    }
    let mut first = true;
    while at < toks.len() {
        let mut sign = 1.0;
        match toks[at].1 {
            Tok::Plus => at += 1,
            Tok::Minus => {
                sign = -1.0;
                at += 1;
            }
            _ if first => {}
            _ => return Err(err(toks[at].0, "expected `+` or `-` between terms")),
        }
        first = false;
        let mut coef = C64::new(sign, 0.0);
        let mut exps = vec![0u32; n];
        let mut factors = 0;
        while let Some((pos, tok)) = toks.get(at) {
            match tok {
                Tok::Num(v) => coef *= *v,
                Tok::Imag(v) => coef *= C64::new(0.0, *v),
                Tok::Ident(name) => {
                    if let Some(idx) = vars.iter().position(|v| v == name) {
                        let mut p = 1u32;
                        if let Some((_, Tok::Caret)) = toks.get(at + 1) {
                            match toks.get(at + 2) {
                                Some((_, Tok::Num(v))) if *v >= 0.0 && libm::trunc(*v) == *v && *v < 1e6 => {
                                    p = *v as u32;
                                    at += 2;
                                }
                                Some((q, _)) => return Err(err(*q, "exponent must be a nonnegative integer")),
                                None => return Err(err(text.len(), "missing exponent")),
                            }
                        }
                        exps[idx] += p;
                    } else if name == "i" {
                        coef *= C64::new(0.0, 1.0);
                    } else {
                        return Err(err(*pos, alloc::format!("unknown variable `{name}`")));
                    }
                }
                Tok::Caret => return Err(err(*pos, "`^` must follow a variable")),
                Tok::Star => return Err(err(*pos, "`*` must sit between factors")),
                Tok::Plus | Tok::Minus => break,
            }
            factors += 1;
            at += 1;
            if let Some((_, Tok::Star)) = toks.get(at) {
                at += 1;
                match toks.get(at) {
                    Some((_, Tok::Num(_) | Tok::Imag(_) | Tok::Ident(_))) => {}
                    Some((q, _)) => return Err(err(*q, "expected a factor after `*`")),
                    None => return Err(err(text.len(), "expression ends after `*`")),
                }
            }
        }
        if factors == 0 {
            let pos = toks.get(at).map_or(text.len(), |t| t.0);
            return Err(err(pos, "missing term"));
        }
        poly.add_term(exps, coef);
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn simple_sum() {
        let p = parse_poly("x1+x2", &["x1", "x2"]).unwrap();
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.coefficient(&[1, 0]), c(1.0));
        assert_eq!(p.coefficient(&[0, 1]), c(1.0));
    }

    #[test]
    fn product_minus_constant() {
        let p = parse_poly("x1*x2*x3*x4-1", &["x1", "x2", "x3", "x4"]).unwrap();
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.coefficient(&[1, 1, 1, 1]), c(1.0));
        assert_eq!(p.coefficient(&[0, 0, 0, 0]), c(-1.0));
    }

    #[test]
    fn quintic_literal() {
        let p = parse_poly("-1.3333-2.3333*x-4*x^2-3.6667*x^3-2.6667*x^4-x^5", &["x"]).unwrap();
        assert_eq!(p.degree(), 5);
        let want = [-1.3333, -2.3333, -4.0, -3.6667, -2.6667, -1.0];
        for (d, w) in want.iter().enumerate() {
            assert_eq!(p.coefficient(&[d as u32]), c(*w));
        }
    }

    #[test]
    fn complex_and_implicit_products() {
        let p = parse_poly("2.5i*x + i - 1e-3x^2 + 3 x*y", &["x", "y"]).unwrap();
        assert_eq!(p.coefficient(&[1, 0]), C64::new(0.0, 2.5));
        assert_eq!(p.coefficient(&[0, 0]), C64::new(0.0, 1.0));
        assert_eq!(p.coefficient(&[2, 0]), c(-1e-3));
        assert_eq!(p.coefficient(&[1, 1]), c(3.0));
        // a declared variable named i shadows the imaginary unit
        let q = parse_poly("2*i", &["i"]).unwrap();
        assert_eq!(q.coefficient(&[1]), c(2.0));
        // trailing dots as in "14.*x"
        let r = parse_poly("1.6+14.*x+x^2", &["x"]).unwrap();
        assert_eq!(r.coefficient(&[1]), c(14.0));
    }

    #[test]
    fn errors_carry_positions() {
        let vars = ["x", "y"];
        assert!(matches!(parse_poly("x + z", &vars), Err(Error::Parse { pos: 4, .. })));
        assert!(matches!(parse_poly("x +", &vars), Err(Error::Parse { .. })));
        assert!(matches!(parse_poly("x^y", &vars), Err(Error::Parse { pos: 2, .. })));
        assert!(matches!(parse_poly("x ** y", &vars), Err(Error::Parse { pos: 3, .. })));
        assert!(matches!(parse_poly("", &vars), Err(Error::Parse { .. })));
        assert!(matches!(parse_poly("x # y", &vars), Err(Error::Parse { pos: 2, .. })));
        assert!(matches!(parse_poly("1..2", &vars), Err(Error::Parse { pos: 0, .. })));
    }
}
