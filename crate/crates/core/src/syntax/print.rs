//! Parenthesization-minimal printer.  `parse_formula(print_formula(f))`
//! returns a structurally identical AST; the round trip is enforced by
//! property tests.

use super::{Formula, Term};

const PREC_IMPL: u8 = 1;
const PREC_OR: u8 = 2;
const PREC_AND: u8 = 3;
const PREC_UNARY: u8 = 4;

/// Renders `f` in the ASCII grammar with as few parentheses as the
/// grammar allows.  `Implies(φ, ⊥)` prints as the negation sugar `~φ`.
pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    pp(f, 0, true, &mut out);
    out
}

fn term(t: &Term, out: &mut String) {
    out.push_str(t.name());
}

/// `min_prec` is the loosest operator the context admits without
/// parentheses; `rightmost` says whether this subformula extends to the
/// right edge of its enclosing group, which is exactly when a quantifier
/// may appear bare.
fn pp(f: &Formula, min_prec: u8, rightmost: bool, out: &mut String) {
    match f {
        Formula::Bottom => out.push_str("_|_"),
        Formula::Atom(p, ts) => {
            out.push_str(p);
            out.push('(');
            for (i, t) in ts.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                term(t, out);
            }
            out.push(')');
        }
        Formula::Eq(l, r) => {
            term(l, out);
            out.push_str(" = ");
            term(r, out);
        }
        Formula::Implies(l, r) if **r == Formula::Bottom => {
            out.push('~');
            pp(l, PREC_UNARY, rightmost, out);
        }
        Formula::And(l, r) => binary(l, " & ", r, PREC_AND, true, min_prec, rightmost, out),
        Formula::Or(l, r) => binary(l, " | ", r, PREC_OR, true, min_prec, rightmost, out),
        Formula::Implies(l, r) => {
            binary(l, " -> ", r, PREC_IMPL, false, min_prec, rightmost, out)
        }
        Formula::Forall(x, b) => quant("forall", x, b, rightmost, out),
        Formula::Exists(x, b) => quant("exists", x, b, rightmost, out),
    }
}

#[allow(clippy::too_many_arguments)]
fn binary(
    l: &Formula,
    op: &str,
    r: &Formula,
    prec: u8,
    left_assoc: bool,
    min_prec: u8,
    rightmost: bool,
    out: &mut String,
) {
    let parens = min_prec > prec;
    if parens {
        out.push('(');
    }
    let (lp, rp) = if left_assoc {
        (prec, prec + 1)
    } else {
        (prec + 1, prec)
    };
    pp(l, lp, false, out);
    out.push_str(op);
    pp(r, rp, if parens { true } else { rightmost }, out);
    if parens {
        out.push(')');
    }
}

fn quant(kw: &str, x: &str, body: &Formula, rightmost: bool, out: &mut String) {
    if !rightmost {
        out.push('(');
    }
    out.push_str(kw);
    out.push(' ');
    out.push_str(x);
    out.push_str(". ");
    pp(body, 0, true, out);
    if !rightmost {
        out.push(')');
    }
}
