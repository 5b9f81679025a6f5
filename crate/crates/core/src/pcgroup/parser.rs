//! Text format for pc presentations.
//!
//! Grammar (statements end with `;`, `#` starts a comment running to end of
//! line, whitespace is otherwise insignificant):
//!
//! ```text
//! prime 2;            # exactly once, before any generator
//! gen x order 4;      # declares the next pc generator and its relative order
//! gen y order 4;
//! gen z order 2;
//! pow x = ;           # x^4 = 1 (empty word = identity); optional per gen
//! conj y^x = y z;     # y^x = y*z; omitted pairs commute
//! ```
//!
//! Words are space-separated factors `name` or `name^exp`; exponents may be
//! negative and are reduced modulo the generator's relative order.  Power
//! relations for `g_i` may only use later generators; the conjugate relation
//! `conj b^a = w` requires `a` to come before `b` and `w` to use only `b` and
//! later generators.  [`PcPresentation`]'s `Display` implementation prints
//! this format back out, and `parse(p.to_string())` round-trips.

use std::collections::BTreeMap;

use super::presentation::{PcPresentation, Word};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Caret,
    Equals,
    Semi,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut toks = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let err = |msg: String| Error::Parse {
            line: lineno + 1,
            msg,
        };
        let mut chars = line.chars().peekable();
        while let Some(&c) = chars.peek() {
            if c.is_whitespace() {
                chars.next();
            } else if c == '^' {
                chars.next();
                toks.push((lineno + 1, Tok::Caret));
            } else if c == '=' {
                chars.next();
                toks.push((lineno + 1, Tok::Equals));
            } else if c == ';' {
                chars.next();
                toks.push((lineno + 1, Tok::Semi));
            } else if c.is_ascii_digit() || c == '-' {
                let mut s = String::new();
                s.push(chars.next().unwrap());
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        s.push(chars.next().unwrap());
                    } else {
                        break;
                    }
                }
                let v: i64 = s
                    .parse()
                    .map_err(|_| err(format!("bad integer literal {s:?}")))?;
                toks.push((lineno + 1, Tok::Int(v)));
            } else if c.is_ascii_alphabetic() {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(chars.next().unwrap());
                    } else {
                        break;
                    }
                }
                toks.push((lineno + 1, Tok::Ident(s)));
            } else {
                return Err(err(format!("unexpected character {c:?}")));
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map_or(0, |t| t.0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            line: self.line(),
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        self.pos += t.is_some() as usize;
        t
    }

    fn expect_ident(&mut self, what: &str) -> Result<String> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            other => self.err(format!("expected {what}, found {other:?}")),
        }
    }

    fn expect_int(&mut self, what: &str) -> Result<i64> {
        match self.next() {
            Some(Tok::Int(v)) => Ok(v),
            other => self.err(format!("expected {what}, found {other:?}")),
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        match self.next() {
            Some(found) if found == t => Ok(()),
            other => self.err(format!("expected {what}, found {other:?}")),
        }
    }

    /// Parses a word up to (not consuming) `;`, reducing exponents modulo the
    /// relative orders and merging adjacent equal generators.
    fn word(&mut self, pres: &PcPresentation) -> Result<Word> {
        let mut w: Word = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Semi) | None => break,
                Some(Tok::Ident(_)) => {
                    let name = self.expect_ident("generator")?;
                    let g = match pres.gen_index(&name) {
                        Some(g) => g,
                        None => return self.err(format!("unknown generator {name:?}")),
                    };
                    let mut e: i64 = 1;
                    if self.peek() == Some(&Tok::Caret) {
                        self.next();
                        e = self.expect_int("exponent")?;
                    }
                    let r = pres.rel_orders[g] as i64;
                    let e = e.rem_euclid(r) as u64;
                    match w.last_mut() {
                        Some(last) if last.0 == g => {
                            last.1 = (last.1 + e) % pres.rel_orders[g];
                            if last.1 == 0 {
                                w.pop();
                            }
                        }
                        _ => {
                            if e != 0 {
                                w.push((g, e));
                            }
                        }
                    }
                }
                Some(t) => return self.err(format!("unexpected token {t:?} in word")),
            }
        }
        Ok(w)
    }
}

/// Parses the presentation text format.  See the module docs for the grammar.
pub fn parse(text: &str) -> Result<PcPresentation> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let mut pres: Option<PcPresentation> = None;
    let mut conj_rels: BTreeMap<(usize, usize), Word> = BTreeMap::new();
    let mut pow_seen: Vec<bool> = Vec::new();

    while let Some(tok) = p.next() {
        let keyword = match tok {
            Tok::Ident(s) => s,
            other => return p.err(format!("expected statement keyword, found {other:?}")),
        };
        match keyword.as_str() {
            "prime" => {
                if pres.is_some() {
                    return p.err("duplicate prime declaration");
                }
                let v = p.expect_int("prime")?;
                if v < 2 {
                    return p.err(format!("invalid prime {v}"));
                }
                pres = Some(PcPresentation::trivial(v as u64));
            }
            "gen" => {
                let pres = match pres.as_mut() {
                    Some(pr) => pr,
                    None => return p.err("prime must be declared before generators"),
                };
                let name = p.expect_ident("generator name")?;
                match p.next() {
                    Some(Tok::Ident(kw)) if kw == "order" => {}
                    other => return p.err(format!("expected 'order', found {other:?}")),
                }
                let r = p.expect_int("relative order")?;
                if r < 2 {
                    return p.err(format!("invalid relative order {r}"));
                }
                pres.gens.push(name);
                pres.rel_orders.push(r as u64);
                pres.power_rels.push(Vec::new());
                pow_seen.push(false);
            }
            "pow" => {
                let pres_ref = match pres.as_ref() {
                    Some(pr) => pr,
                    None => return p.err("pow before prime declaration"),
                };
                let name = p.expect_ident("generator")?;
                let i = match pres_ref.gen_index(&name) {
                    Some(i) => i,
                    None => return p.err(format!("unknown generator {name:?}")),
                };
                p.expect(Tok::Equals, "'='")?;
                let w = p.word(pres_ref)?;
                if pow_seen[i] {
                    return p.err(format!("duplicate power relation for {name}"));
                }
                pow_seen[i] = true;
                pres.as_mut().unwrap().power_rels[i] = w;
            }
            "conj" => {
                let pres_ref = match pres.as_ref() {
                    Some(pr) => pr,
                    None => return p.err("conj before prime declaration"),
                };
                let b = p.expect_ident("generator")?;
                p.expect(Tok::Caret, "'^'")?;
                let a = p.expect_ident("generator")?;
                let (i, j) = match (pres_ref.gen_index(&a), pres_ref.gen_index(&b)) {
                    (Some(i), Some(j)) => (i, j),
                    _ => return p.err(format!("unknown generator in conj {b}^{a}")),
                };
                if i >= j {
                    return p.err(format!(
                        "conj {b}^{a}: {a} must come before {b} in the generator order"
                    ));
                }
                p.expect(Tok::Equals, "'='")?;
                let w = p.word(pres_ref)?;
                if conj_rels.contains_key(&(i, j)) {
                    return p.err(format!("duplicate conjugate relation {b}^{a}"));
                }
                // A word equal to the bare generator means the pair commutes;
                // that is the canonical "no entry" form.
                if w != vec![(j, 1)] {
                    conj_rels.insert((i, j), w);
                }
            }
            other => return p.err(format!("unknown statement {other:?}")),
        }
        p.expect(Tok::Semi, "';'")?;
    }

    let mut pres = match pres {
        Some(pr) => pr,
        None => return Err(Error::Parse {
            line: 0,
            msg: "empty input: missing prime declaration".into(),
        }),
    };
    pres.conj_rels = conj_rels;
    pres.validate()?;
    Ok(pres)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_presentation() {
        let text = "prime 5;\ngen x order 5;\ngen y order 5;\n";
        let p = parse(text).unwrap();
        assert_eq!(p.prime, 5);
        assert_eq!(p.gens, vec!["x", "y"]);
        assert_eq!(p.rel_orders, vec![5, 5]);
        assert!(p.conj_rels.is_empty());
        assert_eq!(p.order(), Some(25));
    }

    #[test]
    fn parses_words_and_comments() {
        let text = "\
            prime 2;            # the prime\n\
            gen x order 4;\n\
            gen y order 4;\n\
            gen z order 2;\n\
            pow x = ;\n\
            pow y = z;\n\
            conj y^x = y z;\n\
            conj z^x = z;       # explicit trivial relation is allowed\n";
        let p = parse(text).unwrap();
        assert_eq!(p.power_rels[0], vec![]);
        assert_eq!(p.power_rels[1], vec![(2, 1)]);
        assert_eq!(p.conj_rels.get(&(0, 1)), Some(&vec![(1, 1), (2, 1)]));
        // The explicit trivial relation normalizes away.
        assert!(!p.conj_rels.contains_key(&(0, 2)));
    }

    #[test]
    fn negative_exponents_reduce() {
        let text = "prime 5;\ngen a order 25;\ngen b order 25;\nconj b^a = b^-4;\n";
        let p = parse(text).unwrap();
        assert_eq!(p.conj_rels.get(&(0, 1)), Some(&vec![(1, 21)]));
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(parse("gen x order 4;"), Err(Error::Parse { .. })));
        assert!(parse("prime 4;").is_err());
        assert!(matches!(
            parse("prime 2;\ngen x order 4;\npow x = q;"),
            Err(Error::Parse { line: 3, .. })
        ));
        // Conjugation must point from an earlier generator to a later one.
        assert!(matches!(
            parse("prime 2;\ngen x order 2;\ngen y order 2;\nconj x^y = x;"),
            Err(Error::Parse { .. })
        ));
        // Power words may only use later generators (validate catches this).
        assert!(parse("prime 2;\ngen x order 2;\ngen y order 2;\npow y = x;").is_err());
    }

    #[test]
    fn display_round_trips() {
        let text = "\
            prime 2;\n\
            gen x order 4;\n\
            gen y order 4;\n\
            gen z order 2;\n\
            pow y = z;\n\
            conj y^x = y z;\n\
            conj z^y = z;\n";
        let p = parse(text).unwrap();
        let reparsed = parse(&p.to_string()).unwrap();
        assert_eq!(p, reparsed);
    }
}
