//! The canonical sentence family: a deterministic, size-then-lexicographic
//! enumeration of closed formulas over a signature, capped in rank and in
//! count.  Theories and types are computed as verdicts over this family,
//! so its determinism is what makes slice comparisons meaningful.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use crate::syntax::{normalize_sentence, print_formula, Formula, Signature, Term};

/// Quantified variables are drawn from `x1, x2` only.
pub const MAX_QUANT_VARS: usize = 2;

/// Default cap on the number of sentences per (signature, rank) family.
pub const DEFAULT_MAX_SENTENCES: usize = 200;

/// Abort tier expansion once a single size tier would exceed this many
/// formulas; the family is then served short.  Keeps degenerate
/// signatures (many high-arity predicates) from exploding.
const TIER_LIMIT: usize = 400_000;

thread_local! {
    static CACHE: RefCell<HashMap<(Signature, u32, usize), Rc<Vec<Formula>>>> =
        RefCell::new(HashMap::new());
}

/// The first `max_sentences` normalized closed formulas of rank ≤ `rank`
/// over `sig`, ordered by node count and then by printed form.  Results
/// are cached per thread; the returned vector is shared.
pub fn sentence_family(sig: &Signature, rank: u32, max_sentences: usize) -> Rc<Vec<Formula>> {
    let key = (sig.clone(), rank, max_sentences);
    if let Some(hit) = CACHE.with(|c| c.borrow().get(&key).cloned()) {
        return hit;
    }
    let family = Rc::new(build(sig, rank, max_sentences));
    CACHE.with(|c| c.borrow_mut().insert(key, Rc::clone(&family)));
    family
}

/// A formula in a tier, with its free variables as a bitmask over
/// `x1..x{MAX_QUANT_VARS}` and its rank (both maintained incrementally).
struct Entry {
    f: Formula,
    mask: u8,
    rank: u32,
}

fn build(sig: &Signature, rank: u32, max_sentences: usize) -> Vec<Formula> {
    let pool: Vec<String> = (1..=MAX_QUANT_VARS).map(|i| format!("x{i}")).collect();
    let mut terms: Vec<(Term, u8)> = sig
        .consts
        .iter()
        .map(|c| (Term::Const(c.clone()), 0u8))
        .collect();
    for (i, x) in pool.iter().enumerate() {
        terms.push((Term::Var(x.clone()), 1 << i));
    }

    let mut tiers: Vec<Vec<Entry>> = Vec::new();
    let mut family: BTreeMap<(usize, String), Formula> = BTreeMap::new();
    loop {
        let size = tiers.len() + 1;
        if projected_tier(size, &tiers, sig, &terms) > TIER_LIMIT {
            break;
        }
        let tier = build_tier(size, &tiers, sig, &terms, &pool, rank);
        for e in &tier {
            if e.mask == 0 {
                let n = normalize_sentence(&e.f);
                let key = (n.size(), print_formula(&n));
                family.entry(key).or_insert(n);
            }
        }
        tiers.push(tier);
        if family.len() >= max_sentences {
            break;
        }
    }
    family.into_values().take(max_sentences).collect()
}

/// Upper bound on the next tier's size, from the shapes alone.
fn projected_tier(size: usize, tiers: &[Vec<Entry>], sig: &Signature, terms: &[(Term, u8)]) -> usize {
    if size == 1 {
        let atoms: usize = sig
            .preds
            .values()
            .map(|&ar| terms.len().saturating_pow(ar as u32))
            .sum();
        let eqs = if sig.equality { terms.len() * terms.len() } else { 0 };
        return atoms + eqs + 1;
    }
    let quant = 2 * MAX_QUANT_VARS * tiers[size - 2].len();
    let mut binary = 0usize;
    for l in 1..size.saturating_sub(1) {
        let r = size - 1 - l;
        binary = binary.saturating_add(3 * tiers[l - 1].len() * tiers[r - 1].len());
    }
    quant + binary
}

fn build_tier(
    size: usize,
    tiers: &[Vec<Entry>],
    sig: &Signature,
    terms: &[(Term, u8)],
    pool: &[String],
    rank: u32,
) -> Vec<Entry> {
    let mut out = Vec::new();
    if size == 1 {
        for (p, &ar) in &sig.preds {
            let mut rows: Vec<(Vec<Term>, u8)> = vec![(Vec::new(), 0)];
            for _ in 0..ar {
                rows = rows
                    .iter()
                    .flat_map(|(row, m)| {
                        terms.iter().map(move |(t, tm)| {
                            let mut row = row.clone();
                            row.push(t.clone());
                            (row, m | tm)
                        })
                    })
                    .collect();
            }
            for (row, mask) in rows {
                out.push(Entry {
                    f: Formula::Atom(p.clone(), row),
                    mask,
                    rank: 0,
                });
            }
        }
        if sig.equality {
            for (l, lm) in terms {
                for (r, rm) in terms {
                    out.push(Entry {
                        f: Formula::Eq(l.clone(), r.clone()),
                        mask: lm | rm,
                        rank: 0,
                    });
                }
            }
        }
        out.push(Entry {
            f: Formula::Bottom,
            mask: 0,
            rank: 0,
        });
        return out;
    }
    for (i, x) in pool.iter().enumerate() {
        for e in &tiers[size - 2] {
            if e.rank + 1 > rank {
                continue;
            }
            let mask = e.mask & !(1 << i);
            out.push(Entry {
                f: Formula::forall(x.clone(), e.f.clone()),
                mask,
                rank: e.rank + 1,
            });
            out.push(Entry {
                f: Formula::exists(x.clone(), e.f.clone()),
                mask,
                rank: e.rank + 1,
            });
        }
    }
    for l_size in 1..size - 1 {
        let r_size = size - 1 - l_size;
        for le in &tiers[l_size - 1] {
            for re in &tiers[r_size - 1] {
                let max = le.rank.max(re.rank);
                if max <= rank {
                    out.push(Entry {
                        f: Formula::and(le.f.clone(), re.f.clone()),
                        mask: le.mask | re.mask,
                        rank: max,
                    });
                    out.push(Entry {
                        f: Formula::or(le.f.clone(), re.f.clone()),
                        mask: le.mask | re.mask,
                        rank: max,
                    });
                }
                if max + 1 <= rank {
                    out.push(Entry {
                        f: Formula::implies(le.f.clone(), re.f.clone()),
                        mask: le.mask | re.mask,
                        rank: max + 1,
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn sig() -> Signature {
        Signature::new([("P".to_string(), 1)], ["c".to_string()], false).unwrap()
    }

    #[test]
    fn family_is_deterministic_and_capped() {
        let a = sentence_family(&sig(), 2, 100);
        let b = sentence_family(&sig(), 2, 100);
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        // Prefixes agree: the cap only truncates.
        let small = sentence_family(&sig(), 2, 30);
        assert_eq!(&a[..30], &small[..]);
    }

    #[test]
    fn family_is_sorted_sized_and_deduplicated() {
        let fam = sentence_family(&sig(), 2, 150);
        let keys: Vec<(usize, String)> =
            fam.iter().map(|f| (f.size(), print_formula(f))).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(keys, sorted);
        for f in fam.iter() {
            assert!(f.free_vars().is_empty());
            assert!(f.rank() <= 2);
            assert!(f.check(&sig()).is_ok());
        }
    }

    #[test]
    fn rank_zero_means_no_arrows_or_quantifiers() {
        let fam = sentence_family(&sig(), 0, 50);
        let s = sig();
        assert!(fam.contains(&parse_formula("P(c)", &s).unwrap()));
        for f in fam.iter() {
            assert_eq!(f.rank(), 0);
        }
    }

    #[test]
    fn alpha_variants_collapse() {
        let fam = sentence_family(&sig(), 1, 200);
        let s = sig();
        let via_x1 = normalize_sentence(&parse_formula("forall x1. P(x1)", &s).unwrap());
        let via_x2 = normalize_sentence(&parse_formula("forall x2. P(x2)", &s).unwrap());
        assert_eq!(via_x1, via_x2);
        assert_eq!(fam.iter().filter(|f| **f == via_x1).count(), 1);
    }

    #[test]
    fn equality_atoms_appear_only_with_the_flag() {
        let with = sentence_family(&sig().with_equality(true), 0, 60);
        assert!(with
            .iter()
            .any(|f| matches!(f, Formula::Eq(..))));
        let without = sentence_family(&sig(), 0, 60);
        assert!(!without
            .iter()
            .any(|f| f.size() == 1 && matches!(f, Formula::Eq(..))));
    }
}
