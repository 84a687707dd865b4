//! Derived relations: subtuple projections, generated-submodel
//! restrictions, and the candidate relation read off from type inclusion.

use std::collections::BTreeSet;

use super::quotient::validate_model_pair;
use super::{index_tuples, AsimError, Dir, RawAsimulation, TuplePair};
use crate::kripke::{KripkeModel, ModelError};
use crate::semantics::{type_slice, Logic, DEFAULT_MAX_SENTENCES, TUPLE_CAP};
use crate::syntax::{fresh_consts, Formula};

/// The scale-down closure `A↓` cut to a selection alphabet: every pair of
/// `a` contributes all its coordinate selections (repetition and
/// reordering allowed, never longer than the pair) drawn from `indices`.
///
/// The full index set therefore reproduces `a` and adds its reshuffles;
/// the empty set flattens everything to world-level pairs.
pub fn project_subtuple(
    a: &RawAsimulation,
    indices: &[usize],
) -> Result<RawAsimulation, AsimError> {
    let max_len = a.pairs.iter().map(|p| p.from_tuple.len()).max().unwrap_or(0);
    let picks: BTreeSet<usize> = indices.iter().copied().collect();
    for &i in &picks {
        if i >= max_len {
            return Err(AsimError::InvalidIndex(i));
        }
    }
    let mut out = BTreeSet::new();
    for p in &a.pairs {
        let m = p.from_tuple.len();
        if p.to_tuple.len() != m {
            return Err(AsimError::MalformedPair {
                pair: p.to_string(),
                why: format!("tuple lengths differ ({} vs {})", m, p.to_tuple.len()),
            });
        }
        let valid: Vec<usize> = picks.iter().copied().filter(|&i| i < m).collect();
        for len in 0..=m {
            for sel in index_tuples(valid.len(), len) {
                out.insert(TuplePair {
                    dir: p.dir,
                    from_world: p.from_world.clone(),
                    from_tuple: sel.iter().map(|&k| p.from_tuple[valid[k]].clone()).collect(),
                    to_world: p.to_world.clone(),
                    to_tuple: sel.iter().map(|&k| p.to_tuple[valid[k]].clone()).collect(),
                });
            }
        }
    }
    Ok(RawAsimulation {
        pairs: out.into_iter().collect(),
    })
}

/// Keeps the pairs whose worlds lie inside the cones of `w1` and `w2`,
/// i.e. the part of `a` that relates the generated submodels.  Errors if
/// nothing is left running from `w1` to `w2`.
pub fn restrict_generated(
    a: &RawAsimulation,
    m1: &KripkeModel,
    m2: &KripkeModel,
    w1: &str,
    w2: &str,
) -> Result<RawAsimulation, AsimError> {
    m1.require_valid()?;
    m2.require_valid()?;
    let models = [m1, m2];
    let roots = [
        m1.world_index(w1)
            .ok_or_else(|| ModelError::UnknownWorld(w1.to_string()))?,
        m2.world_index(w2)
            .ok_or_else(|| ModelError::UnknownWorld(w2.to_string()))?,
    ];
    let mut pairs = Vec::new();
    for p in &a.pairs {
        let d = p.dir.index();
        let fw = models[d]
            .world_index(&p.from_world)
            .ok_or_else(|| AsimError::MalformedPair {
                pair: p.to_string(),
                why: format!("unknown world `{}`", p.from_world),
            })?;
        let tw = models[1 ^ d]
            .world_index(&p.to_world)
            .ok_or_else(|| AsimError::MalformedPair {
                pair: p.to_string(),
                why: format!("unknown world `{}`", p.to_world),
            })?;
        if models[d].le(roots[d], fw) && models[1 ^ d].le(roots[1 ^ d], tw) {
            pairs.push(p.clone());
        }
    }
    if !pairs
        .iter()
        .any(|p| p.dir == Dir::OneTwo && p.from_world == w1 && p.to_world == w2)
    {
        return Err(AsimError::MissingStart {
            from: w1.to_string(),
            to: w2.to_string(),
        });
    }
    Ok(RawAsimulation { pairs })
}

/// All name tuples of length `len` over a world's domain.
fn name_tuples(domain: &[String], len: usize) -> Vec<Vec<String>> {
    index_tuples(domain.len(), len)
        .into_iter()
        .map(|t| t.into_iter().map(|i| domain[i].clone()).collect())
        .collect()
}

/// The candidate relation defined by positive type inclusion: every pair
/// of positions (tuples up to [`TUPLE_CAP`]) whose rank-`d` positive type
/// slices are included, in both directions.  On saturated models this is
/// an asimulation; on arbitrary finite models it is returned for
/// empirical checking and may fail [`super::check_asimulation_raw`].
pub fn relation_from_type_inclusion(
    logic: Logic,
    m1: &KripkeModel,
    m2: &KripkeModel,
    d: u32,
) -> Result<RawAsimulation, AsimError> {
    validate_model_pair(logic, m1, m2)?;
    let models = [m1, m2];
    let mut avoid: BTreeSet<String> = m1.sig().consts.clone();
    avoid.extend(m1.sig().preds.keys().cloned());

    // positives[side][len] lists (world, tuple, Tp⁺ slice) per position.
    type Entry = (usize, Vec<String>, BTreeSet<Formula>);
    let mut positives: [Vec<Vec<Entry>>; 2] = [Vec::new(), Vec::new()];
    for (side, m) in models.iter().enumerate() {
        for len in 0..=TUPLE_CAP {
            let names = fresh_consts(len, &avoid);
            let mut entries = Vec::new();
            for w in 0..m.n_worlds() {
                for tuple in name_tuples(m.domain(w), len) {
                    let slice = type_slice(
                        logic,
                        m,
                        m.world_name(w),
                        &names,
                        &tuple,
                        d,
                        DEFAULT_MAX_SENTENCES,
                    )?;
                    entries.push((w, tuple, slice.slice.positive));
                }
            }
            positives[side].push(entries);
        }
    }

    let mut pairs = Vec::new();
    for dir in 0..2 {
        for len in 0..=TUPLE_CAP {
            for (u, at, s1) in &positives[dir][len] {
                for (s, bt, s2) in &positives[1 ^ dir][len] {
                    if s1.is_subset(s2) {
                        pairs.push(TuplePair {
                            dir: Dir::of(dir),
                            from_world: models[dir].world_name(*u).to_string(),
                            from_tuple: at.clone(),
                            to_world: models[1 ^ dir].world_name(*s).to_string(),
                            to_tuple: bt.clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(RawAsimulation { pairs })
}
