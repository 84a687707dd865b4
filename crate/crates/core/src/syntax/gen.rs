//! Seeded random formula generation for the property suites.

use std::collections::BTreeSet;

use rand::Rng;

use super::{fresh_names, Formula, Signature, Term};

/// Shape bounds for [`random_formula`].
#[derive(Debug, Clone)]
pub struct GenBounds {
    pub max_rank: u32,
    pub max_size: usize,
}

impl Default for GenBounds {
    fn default() -> Self {
        GenBounds {
            max_rank: 3,
            max_size: 12,
        }
    }
}

/// Draws a well-formed formula over `sig` with free variables drawn from
/// `free` and rank at most `bounds.max_rank`.  Deterministic in the RNG
/// state.
pub fn random_formula<R: Rng>(
    rng: &mut R,
    sig: &Signature,
    free: &[String],
    bounds: &GenBounds,
) -> Formula {
    let mut avoid: BTreeSet<String> = sig.preds.keys().cloned().collect();
    avoid.extend(sig.consts.iter().cloned());
    avoid.extend(free.iter().cloned());
    let var_pool = fresh_names("v", 4, &avoid);
    let mut scope: Vec<String> = Vec::new();
    go(rng, sig, free, &var_pool, bounds.max_size, bounds.max_rank, &mut scope)
}

/// A closed random formula (sentence).
pub fn random_sentence<R: Rng>(rng: &mut R, sig: &Signature, bounds: &GenBounds) -> Formula {
    random_formula(rng, sig, &[], bounds)
}

fn go<R: Rng>(
    rng: &mut R,
    sig: &Signature,
    free: &[String],
    var_pool: &[String],
    size: usize,
    rank: u32,
    scope: &mut Vec<String>,
) -> Formula {
    let atom_possible = !sig.preds.is_empty() || sig.equality;
    let term_pool_size = free.len() + scope.len() + sig.consts.len();
    let can_atom = atom_possible && term_pool_size > 0;
    if size <= 1 {
        return if can_atom {
            random_atom(rng, sig, free, scope)
        } else {
            Formula::Bottom
        };
    }
    let roll = rng.random_range(0u32..100);
    match roll {
        // Leaves keep the trees shallow on average.
        0..=34 if can_atom => random_atom(rng, sig, free, scope),
        35..=39 => Formula::Bottom,
        40..=64 => {
            let ls = rng.random_range(1..size);
            let l = go(rng, sig, free, var_pool, ls, rank, scope);
            let r = go(rng, sig, free, var_pool, size - 1 - ls, rank, scope);
            if rng.random_bool(0.5) {
                Formula::and(l, r)
            } else {
                Formula::or(l, r)
            }
        }
        65..=79 if rank > 0 => {
            let ls = rng.random_range(1..size);
            let l = go(rng, sig, free, var_pool, ls, rank - 1, scope);
            let r = go(rng, sig, free, var_pool, size - 1 - ls, rank - 1, scope);
            Formula::implies(l, r)
        }
        _ if rank > 0 => {
            let x = var_pool[scope.len() % var_pool.len()].clone();
            scope.push(x.clone());
            let b = go(rng, sig, free, var_pool, size - 1, rank - 1, scope);
            scope.pop();
            if rng.random_bool(0.5) {
                Formula::forall(x, b)
            } else {
                Formula::exists(x, b)
            }
        }
        _ if can_atom => random_atom(rng, sig, free, scope),
        _ => Formula::Bottom,
    }
}

fn random_atom<R: Rng>(
    rng: &mut R,
    sig: &Signature,
    free: &[String],
    scope: &[String],
) -> Formula {
    let mut terms: Vec<Term> = Vec::new();
    for v in free.iter().chain(scope.iter()) {
        terms.push(Term::Var(v.clone()));
    }
    for c in &sig.consts {
        terms.push(Term::Const(c.clone()));
    }
    let pick = |rng: &mut R| terms[rng.random_range(0..terms.len())].clone();
    let n_preds = sig.preds.len();
    let use_eq = sig.equality && (n_preds == 0 || rng.random_bool(0.3));
    if use_eq {
        Formula::Eq(pick(rng), pick(rng))
    } else {
        let idx = rng.random_range(0..n_preds);
        let (p, &ar) = sig.preds.iter().nth(idx).expect("index in range");
        Formula::Atom(p.clone(), (0..ar).map(|_| pick(rng)).collect())
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::super::{parse_formula, print_formula};
    use super::*;

    fn sig() -> Signature {
        Signature::new(
            [
                ("P".to_string(), 1),
                ("Q".to_string(), 1),
                ("R".to_string(), 2),
            ],
            ["c".to_string(), "d".to_string()],
            true,
        )
        .unwrap()
    }

    #[test]
    fn generated_formulas_are_well_formed_and_bounded() {
        let s = sig();
        let free = vec!["x".to_string(), "y".to_string()];
        let bounds = GenBounds::default();
        for seed in 0..500u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_formula(&mut rng, &s, &free, &bounds);
            f.check(&s).expect("well-formed");
            assert!(f.rank() <= bounds.max_rank, "rank bound violated by {f}");
            assert!(f
                .free_vars()
                .iter()
                .all(|v| free.contains(v)), "free vars escape in {f}");
        }
    }

    #[test]
    fn print_parse_roundtrip_on_a_thousand_random_asts() {
        let s = sig();
        let free = vec!["x".to_string()];
        let bounds = GenBounds {
            max_rank: 4,
            max_size: 18,
        };
        for seed in 0..1000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_formula(&mut rng, &s, &free, &bounds);
            let text = print_formula(&f);
            let g = parse_formula(&text, &s)
                .unwrap_or_else(|e| panic!("reparse failed for `{text}`: {e}"));
            assert_eq!(f, g, "round trip changed `{text}`");
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let s = sig();
        let bounds = GenBounds::default();
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(
            random_sentence(&mut a, &s, &bounds),
            random_sentence(&mut b, &s, &bounds)
        );
    }
}
