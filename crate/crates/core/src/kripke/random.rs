//! Seeded random models.  Two recipes: forests, where every cover edge
//! gets an independently random map (composites along the unique paths
//! are then free), and layered diamond posets, where per-world
//! permutations conjugate a family of monotone resize maps so that all
//! paths between two worlds agree.  Predicates are seeded below and
//! closed upward; constants are chosen at the roots and pushed along.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{KripkeModel, ModelData, ModelError};
use crate::syntax::Signature;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassReq {
    Any,
    In,
    Su,
    Bi,
}

#[derive(Debug, Clone)]
pub struct RandomModelParams {
    pub sig: Signature,
    pub max_worlds: usize,
    pub max_domain: usize,
    pub class: ClassReq,
    pub rooted: bool,
}

impl RandomModelParams {
    pub fn new(sig: Signature) -> RandomModelParams {
        RandomModelParams {
            sig,
            max_worlds: 4,
            max_domain: 3,
            class: ClassReq::Any,
            rooted: false,
        }
    }
}

/// A pure function of the seed: equal seeds and parameters give equal
/// models.
pub fn generate_random_model(
    seed: u64,
    params: &RandomModelParams,
) -> Result<KripkeModel, ModelError> {
    if params.max_worlds == 0 || params.max_domain == 0 {
        return Err(ModelError::GenerationFailed(0));
    }
    params.sig.check_names()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..50 {
        let attempt = ChaCha8Rng::seed_from_u64(rng.random());
        if let Some(m) = try_generate(attempt, params) {
            return Ok(m);
        }
    }
    Err(ModelError::GenerationFailed(50))
}

fn try_generate(mut rng: ChaCha8Rng, params: &RandomModelParams) -> Option<KripkeModel> {
    let n = rng.random_range(1..=params.max_worlds);
    let diamond = n >= 4 && rng.random_bool(0.4);

    let (parents, sizes) = if diamond {
        diamond_shape(&mut rng, n, params)
    } else {
        forest_shape(&mut rng, n, params)
    };
    let model = assemble(&mut rng, params, &parents, &sizes, diamond)?;
    if !model.validate().is_empty() {
        return None;
    }
    let flags = model.classify().ok()?;
    let ok = match params.class {
        ClassReq::Any => true,
        ClassReq::In => flags.in_class,
        ClassReq::Su => flags.su_class,
        ClassReq::Bi => flags.bi_class,
    };
    if !ok {
        return None;
    }
    if params.rooted && !(0..n).all(|v| model.le(0, v)) {
        return None;
    }
    Some(model)
}

/// Cover relation as a parent list: world i > 0 covers each world in
/// `parents[i]`, all of smaller index.  Forests have at most one parent.
type Covers = Vec<Vec<usize>>;

fn forest_shape(rng: &mut ChaCha8Rng, n: usize, params: &RandomModelParams) -> (Covers, Vec<usize>) {
    let mut parents: Covers = vec![Vec::new(); n];
    let mut sizes = vec![0usize; n];
    sizes[0] = rng.random_range(1..=params.max_domain);
    for i in 1..n {
        // Rooted models grow a single tree; otherwise new roots may start
        // fresh components.
        if params.rooted || !rng.random_bool(0.25) {
            let p = rng.random_range(0..i);
            parents[i].push(p);
            sizes[i] = child_size(rng, sizes[p], params);
        } else {
            sizes[i] = rng.random_range(1..=params.max_domain);
        }
    }
    (parents, sizes)
}

fn child_size(rng: &mut ChaCha8Rng, parent: usize, params: &RandomModelParams) -> usize {
    match params.class {
        ClassReq::Any => rng.random_range(1..=params.max_domain),
        ClassReq::In => rng.random_range(parent..=params.max_domain.max(parent)),
        ClassReq::Su => rng.random_range(1..=parent),
        ClassReq::Bi => parent,
    }
}

/// Two or three levels with cross edges; sizes monotone along the levels
/// so the conjugated resize maps compose path-independently.
fn diamond_shape(rng: &mut ChaCha8Rng, n: usize, params: &RandomModelParams) -> (Covers, Vec<usize>) {
    let mut level = vec![0usize; n];
    for (i, l) in level.iter_mut().enumerate().skip(1) {
        *l = if i == 1 { 1 } else { rng.random_range(1..=2.min(i)) };
    }
    level.sort();
    let mut parents: Covers = vec![Vec::new(); n];
    for i in 1..n {
        let below: Vec<usize> = (0..i).filter(|&j| level[j] + 1 == level[i]).collect();
        if below.is_empty() {
            parents[i].push(i - 1);
        } else {
            let k = rng.random_range(1..=below.len());
            let mut picks = below;
            picks.shuffle(rng);
            picks.truncate(k);
            picks.sort();
            parents[i] = picks;
        }
    }
    let ascending = match params.class {
        ClassReq::In => true,
        ClassReq::Su | ClassReq::Bi => false,
        ClassReq::Any => rng.random_bool(0.5),
    };
    let mut by_level = vec![0usize; level[n - 1] + 1];
    for l in by_level.iter_mut() {
        *l = rng.random_range(1..=params.max_domain);
    }
    if matches!(params.class, ClassReq::Bi) {
        let s = by_level[0];
        by_level.fill(s);
    } else if ascending {
        by_level.sort();
    } else {
        by_level.sort_by(|a, b| b.cmp(a));
    }
    let sizes = (0..n).map(|i| by_level[level[i]]).collect();
    (parents, sizes)
}

fn assemble(
    rng: &mut ChaCha8Rng,
    params: &RandomModelParams,
    parents: &Covers,
    sizes: &[usize],
    diamond: bool,
) -> Option<KripkeModel> {
    let n = parents.len();
    let world = |i: usize| format!("w{i:02}");
    let elem = |e: usize| format!("e{e:02}");
    let perms: Vec<Vec<usize>> = sizes
        .iter()
        .map(|&s| {
            let mut p: Vec<usize> = (0..s).collect();
            p.shuffle(rng);
            p
        })
        .collect();
    let inv = |p: &Vec<usize>| {
        let mut q = vec![0usize; p.len()];
        for (i, &t) in p.iter().enumerate() {
            q[t] = i;
        }
        q
    };

    // Resolve with the constants stripped: their denotations are pushed
    // from the roots once the homs (including completed composites) exist.
    let mut bare = params.sig.clone();
    bare.consts.clear();
    let mut data = ModelData {
        signature: bare,
        worlds: (0..n).map(world).collect(),
        ..ModelData::default()
    };
    for (i, &s) in sizes.iter().enumerate() {
        data.domains.insert(world(i), (0..s).map(elem).collect());
    }
    for (i, ps) in parents.iter().enumerate() {
        for &p in ps {
            data.order.push((world(p), world(i)));
            let table: BTreeMap<String, String> = if diamond {
                let pinv = inv(&perms[p]);
                (0..sizes[p])
                    .map(|e| (elem(e), elem(perms[i][pinv[e].min(sizes[i] - 1)])))
                    .collect()
            } else {
                random_edge_map(rng, sizes[p], sizes[i], params.class)?
                    .into_iter()
                    .enumerate()
                    .map(|(e, t)| (elem(e), elem(t)))
                    .collect()
            };
            data.homs.insert(format!("{}>{}", world(p), world(i)), table);
        }
    }

    let mut m = data.resolve().ok()?;
    m.sig = params.sig.clone();
    let roots: Vec<usize> = (0..n).filter(|&i| parents[i].is_empty()).collect();
    for c in &params.sig.consts.clone() {
        for &r in &roots {
            let at_root = rng.random_range(0..sizes[r]) as u32;
            for v in 0..n {
                if m.le(r, v) {
                    let image = m.push(r, v, at_root);
                    m.consts[v].insert(c.clone(), image);
                }
            }
        }
    }
    for (p, &arity) in &params.sig.preds.clone() {
        for w in 0..n {
            let space: usize = sizes[w].pow(arity as u32);
            let mut rows = std::collections::BTreeSet::new();
            if space <= 64 {
                for idx in 0..space {
                    if rng.random_bool(0.25) {
                        rows.insert(unrank(idx, arity, sizes[w]));
                    }
                }
            } else {
                for _ in 0..16 {
                    let idx = rng.random_range(0..space);
                    rows.insert(unrank(idx, arity, sizes[w]));
                }
            }
            let existing = m.preds[w].entry(p.clone()).or_default();
            existing.extend(rows);
        }
    }
    // Close the predicates upward so monotonicity holds by construction.
    for w in 0..n {
        let succs: Vec<usize> = m.leq[w].iter().copied().filter(|&v| v != w).collect();
        for p in params.sig.preds.keys() {
            let rows: Vec<Vec<u32>> = m.preds[w]
                .get(p)
                .map(|r| r.iter().cloned().collect())
                .unwrap_or_default();
            for v in &succs {
                for row in &rows {
                    let pushed = m.push_tuple(w, *v, row);
                    m.preds[*v].entry(p.clone()).or_default().insert(pushed);
                }
            }
        }
    }
    m.prune_empty_preds();
    Some(m)
}

fn unrank(mut idx: usize, arity: usize, base: usize) -> Vec<u32> {
    let mut row = Vec::with_capacity(arity);
    for _ in 0..arity {
        row.push((idx % base) as u32);
        idx /= base;
    }
    row
}

fn random_edge_map(
    rng: &mut ChaCha8Rng,
    from: usize,
    to: usize,
    class: ClassReq,
) -> Option<Vec<usize>> {
    match class {
        ClassReq::Any => Some((0..from).map(|_| rng.random_range(0..to)).collect()),
        ClassReq::In => {
            if from > to {
                return None;
            }
            let mut targets: Vec<usize> = (0..to).collect();
            targets.shuffle(rng);
            targets.truncate(from);
            Some(targets)
        }
        ClassReq::Su => {
            if from < to {
                return None;
            }
            // Each target is hit by the shuffle prefix; the rest are free.
            let mut sources: Vec<usize> = (0..from).collect();
            sources.shuffle(rng);
            let mut map = vec![usize::MAX; from];
            for (t, &s) in sources.iter().take(to).enumerate() {
                map[s] = t;
            }
            for slot in map.iter_mut() {
                if *slot == usize::MAX {
                    *slot = rng.random_range(0..to);
                }
            }
            Some(map)
        }
        ClassReq::Bi => {
            if from != to {
                return None;
            }
            let mut targets: Vec<usize> = (0..to).collect();
            targets.shuffle(rng);
            Some(targets)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::fixtures::fix_cd;
    use crate::syntax::Signature;

    fn base_sig() -> Signature {
        fix_cd().sig().clone()
    }

    #[test]
    fn seeded_generation_is_deterministic() {
        let params = RandomModelParams::new(base_sig());
        for seed in 0..20 {
            let a = generate_random_model(seed, &params).unwrap();
            let b = generate_random_model(seed, &params).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn generated_models_are_valid_and_in_class() {
        for (class, seeds) in [
            (ClassReq::Any, 0..60),
            (ClassReq::In, 0..60),
            (ClassReq::Su, 0..60),
            (ClassReq::Bi, 0..60),
        ] {
            let mut params = RandomModelParams::new(base_sig());
            params.class = class;
            for seed in seeds {
                let m = generate_random_model(seed, &params).unwrap();
                assert!(m.validate().is_empty(), "seed {seed}");
                let flags = m.classify().unwrap();
                let ok = match class {
                    ClassReq::Any => true,
                    ClassReq::In => flags.in_class,
                    ClassReq::Su => flags.su_class,
                    ClassReq::Bi => flags.bi_class,
                };
                assert!(ok, "seed {seed} missed its class");
            }
        }
    }

    #[test]
    fn rooted_models_are_rooted() {
        let mut params = RandomModelParams::new(base_sig());
        params.rooted = true;
        params.max_worlds = 5;
        for seed in 0..40 {
            let m = generate_random_model(seed, &params).unwrap();
            let root = (0..m.n_worlds())
                .find(|&w| (0..m.n_worlds()).all(|v| m.le(w, v)));
            assert!(root.is_some(), "seed {seed}");
        }
    }

    #[test]
    fn shapes_vary() {
        let mut params = RandomModelParams::new(base_sig());
        params.max_worlds = 6;
        let mut world_counts = std::collections::BTreeSet::new();
        let mut saw_branching = false;
        for seed in 0..150 {
            let m = generate_random_model(seed, &params).unwrap();
            world_counts.insert(m.n_worlds());
            let covers: usize = (0..m.n_worlds())
                .map(|w| {
                    m.successors(w)
                        .iter()
                        .filter(|&&v| {
                            v != w
                                && !m.successors(w).iter().any(|&t| {
                                    t != w && t != v && m.le(t, v)
                                })
                        })
                        .count()
                })
                .sum();
            if covers >= m.n_worlds() {
                saw_branching = true;
            }
        }
        assert!(world_counts.len() >= 3);
        assert!(saw_branching);
    }
}
