//! Recursive-descent parser for the ASCII formula grammar.
//!
//! ```text
//! formula  := impl ( "<->" impl )*            (desugars, left-assoc)
//! impl     := or ( "->" impl )?               (right-assoc)
//! or       := and ( "|" and )*
//! and      := unary ( "&" unary )*
//! unary    := "~" unary | quant | atom | "(" formula ")"
//! quant    := ("forall" | "exists") IDENT "." formula
//! atom     := "_|_" | IDENT "(" term ("," term)* ")" | term "=" term
//! ```
//!
//! Quantifier scope extends maximally to the right, so a quantifier is
//! admissible wherever the remainder of the input belongs to its body.

use super::{Formula, Signature, SyntaxError, Term, KEYWORDS};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    Comma,
    Dot,
    EqSign,
    Amp,
    Pipe,
    Arrow,
    Iff,
    Tilde,
    Bottom,
    Forall,
    Exists,
    Ident(String),
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            b',' => {
                toks.push((Tok::Comma, i));
                i += 1;
            }
            b'.' => {
                toks.push((Tok::Dot, i));
                i += 1;
            }
            b'=' => {
                toks.push((Tok::EqSign, i));
                i += 1;
            }
            b'&' => {
                toks.push((Tok::Amp, i));
                i += 1;
            }
            b'|' => {
                toks.push((Tok::Pipe, i));
                i += 1;
            }
            b'~' => {
                toks.push((Tok::Tilde, i));
                i += 1;
            }
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((Tok::Arrow, i));
                    i += 2;
                } else {
                    return Err(err(i, "expected `->`"));
                }
            }
            b'<' => {
                if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') {
                    toks.push((Tok::Iff, i));
                    i += 3;
                } else {
                    return Err(err(i, "expected `<->`"));
                }
            }
            b'_' => {
                if bytes.get(i + 1) == Some(&b'|') && bytes.get(i + 2) == Some(&b'_') {
                    toks.push((Tok::Bottom, i));
                    i += 3;
                } else {
                    return Err(err(i, "expected `_|_`"));
                }
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "forall" => Tok::Forall,
                    "exists" => Tok::Exists,
                    _ => Tok::Ident(word.to_string()),
                };
                toks.push((tok, start));
            }
            _ => return Err(err(i, &format!("unexpected character `{}`", b as char))),
        }
    }
    Ok(toks)
}

fn err(pos: usize, msg: &str) -> SyntaxError {
    SyntaxError::Parse {
        pos,
        msg: msg.to_string(),
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    sig: &'a Signature,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|&(_, p)| p)
            .unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), SyntaxError> {
        let at = self.here();
        match self.next() {
            Some(t) if t == want => Ok(()),
            _ => Err(err(at, &format!("expected {what}"))),
        }
    }

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        let mut f = self.implication()?;
        while self.peek() == Some(&Tok::Iff) {
            self.next();
            let g = self.implication()?;
            f = Formula::and(
                Formula::implies(f.clone(), g.clone()),
                Formula::implies(g, f),
            );
        }
        Ok(f)
    }

    fn implication(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.next();
            let rhs = self.implication()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut f = self.conjunction()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.next();
            f = Formula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut f = self.unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.next();
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        let at = self.here();
        match self.peek() {
            Some(Tok::Tilde) => {
                self.next();
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Forall) | Some(Tok::Exists) => self.quantified(),
            Some(Tok::LParen) => {
                self.next();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Bottom) => {
                self.next();
                Ok(Formula::Bottom)
            }
            Some(Tok::Ident(_)) => self.atom(),
            _ => Err(err(at, "expected a formula")),
        }
    }

    fn quantified(&mut self) -> Result<Formula, SyntaxError> {
        let univ = matches!(self.next(), Some(Tok::Forall));
        let at = self.here();
        let Some(Tok::Ident(x)) = self.next() else {
            return Err(err(at, "expected a variable after the quantifier"));
        };
        self.classify_var(&x, at)?;
        self.expect(Tok::Dot, "`.` after the quantified variable")?;
        let body = self.formula()?;
        Ok(if univ {
            Formula::forall(x, body)
        } else {
            Formula::exists(x, body)
        })
    }

    fn atom(&mut self) -> Result<Formula, SyntaxError> {
        let at = self.here();
        let Some(Tok::Ident(name)) = self.next() else {
            return Err(err(at, "expected a formula"));
        };
        if self.peek() == Some(&Tok::LParen) {
            self.next();
            if self.peek() == Some(&Tok::RParen) {
                return Err(err(self.here(), "predicates take at least one argument"));
            }
            let Some(&arity) = self.sig.preds.get(&name) else {
                return Err(SyntaxError::UnknownPred(name));
            };
            let mut terms = vec![self.term()?];
            while self.peek() == Some(&Tok::Comma) {
                self.next();
                terms.push(self.term()?);
            }
            self.expect(Tok::RParen, "`)`")?;
            if terms.len() != arity {
                return Err(SyntaxError::ArityMismatch {
                    name,
                    expected: arity,
                    got: terms.len(),
                });
            }
            Ok(Formula::Atom(name, terms))
        } else {
            // No 0-ary predicates, so a bare identifier can only open an
            // equality atom.
            let lhs = self.classify_term(name, at)?;
            self.expect(Tok::EqSign, "`(`, or `=` for an equality atom")?;
            if !self.sig.equality {
                return Err(SyntaxError::EqualityNotInLanguage);
            }
            let rhs = self.term()?;
            Ok(Formula::Eq(lhs, rhs))
        }
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        let at = self.here();
        match self.next() {
            Some(Tok::Ident(name)) => self.classify_term(name, at),
            _ => Err(err(at, "expected a term")),
        }
    }

    fn classify_term(&self, name: String, at: usize) -> Result<Term, SyntaxError> {
        if self.sig.consts.contains(&name) {
            Ok(Term::Const(name))
        } else if self.sig.preds.contains_key(&name) {
            Err(SyntaxError::PredAsTerm(name))
        } else {
            let _ = at;
            Ok(Term::Var(name))
        }
    }

    fn classify_var(&self, name: &str, at: usize) -> Result<(), SyntaxError> {
        if self.sig.preds.contains_key(name) {
            Err(SyntaxError::PredAsTerm(name.to_string()))
        } else if self.sig.consts.contains(name) {
            Err(err(
                at,
                &format!("constant `{name}` cannot be quantified over directly"),
            ))
        } else {
            Ok(())
        }
    }
}

/// Parses `text` against `sig`.  Identifiers in term position are
/// classified by signature membership: constants of the signature parse
/// as constants, everything else as a variable.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, SyntaxError> {
    debug_assert!(KEYWORDS.contains(&"forall"));
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        sig,
        end: text.len(),
    };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return Err(err(p.here(), "trailing input after the formula"));
    }
    Ok(f)
}
