//! Isomorphic correction: grow the source of an elementary embedding into
//! a full isomorph of its target.
//!
//! Given an embedding `(g, h)` of `m` into `n`, the corrected model pulls
//! the whole structure of `n` back along the maps: hit worlds and elements
//! keep their `m`-names, unhit ones get fresh deterministic names.  The
//! result contains `m` as a submodel and is isomorphic to `n` via the
//! extended maps.

use std::collections::{BTreeMap, BTreeSet};

use crate::kripke::{Element, KripkeModel};
use crate::semantics::{check_elementary_embedding_upto, Logic};

use super::TransformError;

fn fresh_name(base: &str, suffix: char, used: &BTreeSet<String>) -> String {
    if !used.contains(base) {
        return base.to_string();
    }
    let mut i = 2usize;
    loop {
        let cand = format!("{base}_{suffix}{i}");
        if !used.contains(&cand) {
            return cand;
        }
        i += 1;
    }
}

/// Extend `(g, h)` to an isomorphism by adjoining fresh carriers to `m`.
///
/// The precondition — that `(g, h)` is an elementary embedding at the
/// working rank — is re-checked; on success the returned `(m′, g′, h′)`
/// satisfy `g ⊆ g′`, `h ⊆ h′`, `m′` is isomorphic to `n` via `(g′, h′)`,
/// and `m` sits inside `m′` as a submodel.
pub fn isomorphic_correction(
    logic: Logic,
    m: &KripkeModel,
    n: &KripkeModel,
    g: &BTreeMap<String, String>,
    h: &BTreeMap<Element, Element>,
    rank: u32,
) -> Result<(KripkeModel, BTreeMap<String, String>, BTreeMap<Element, Element>), TransformError> {
    if !check_elementary_embedding_upto(logic, m, n, g, h, rank)? {
        return Err(TransformError::NotAnEmbedding(rank));
    }

    let nw = n.n_worlds();
    // Name every world of n in m′: hit worlds keep their m-name, the rest
    // reuse n's name unless it is already taken.
    let mut back_w: BTreeMap<usize, String> = BTreeMap::new();
    let mut used_w: BTreeSet<String> = m.worlds().iter().cloned().collect();
    for (mw, target) in g {
        let v = n.world_index(target).expect("the embedding check passed");
        back_w.insert(v, mw.clone());
    }
    for v in 0..nw {
        if back_w.contains_key(&v) {
            continue;
        }
        let name = fresh_name(n.world_name(v), 'c', &used_w);
        used_w.insert(name.clone());
        back_w.insert(v, name);
    }

    // Likewise for elements, worldwise.
    let mut back_e: Vec<Vec<Option<String>>> =
        (0..nw).map(|v| vec![None; n.domain(v).len()]).collect();
    for (me, ne) in h {
        let v = n.world_index(&ne.world).expect("the embedding check passed");
        let b = n.elem_index(v, &ne.local).expect("the embedding check passed");
        back_e[v][b as usize] = Some(me.local.clone());
    }
    let mut locals: Vec<Vec<String>> = Vec::with_capacity(nw);
    for (v, row) in back_e.into_iter().enumerate() {
        let mut used: BTreeSet<String> = row.iter().flatten().cloned().collect();
        let mut named = Vec::with_capacity(row.len());
        for (b, slot) in row.into_iter().enumerate() {
            let name = match slot {
                Some(name) => name,
                None => {
                    let fresh = fresh_name(&n.domain(v)[b], 'd', &used);
                    used.insert(fresh.clone());
                    fresh
                }
            };
            named.push(name);
        }
        locals.push(named);
    }

    // Pull the structure of n back along the naming: sorted worlds and
    // domains, with index maps both ways.
    let mut order: Vec<usize> = (0..nw).collect();
    order.sort_by(|&a, &b| back_w[&a].cmp(&back_w[&b]));
    let mut mp_of = vec![0usize; nw];
    for (i, &v) in order.iter().enumerate() {
        mp_of[v] = i;
    }

    let mut worlds = Vec::with_capacity(nw);
    let mut domains: Vec<Vec<String>> = Vec::with_capacity(nw);
    let mut preds = Vec::with_capacity(nw);
    let mut consts = Vec::with_capacity(nw);
    let mut emap: Vec<Vec<u32>> = vec![Vec::new(); nw]; // n elem -> m′ elem
    let mut einv: Vec<Vec<u32>> = vec![Vec::new(); nw]; // m′ elem -> n elem
    for &v in &order {
        let mut tagged: Vec<(String, u32)> = locals[v]
            .iter()
            .cloned()
            .zip(0u32..)
            .collect();
        tagged.sort();
        let mut map = vec![0u32; tagged.len()];
        let mut inv = vec![0u32; tagged.len()];
        for (new, (_, old)) in tagged.iter().enumerate() {
            map[*old as usize] = new as u32;
            inv[new] = *old;
        }

        let mut table: BTreeMap<String, BTreeSet<Vec<u32>>> = BTreeMap::new();
        for p in n.sig().preds.keys() {
            if let Some(rows) = n.pred_rows(v, p) {
                let moved = rows
                    .iter()
                    .map(|row| row.iter().map(|&e| map[e as usize]).collect())
                    .collect();
                table.insert(p.clone(), moved);
            }
        }
        let ctable: BTreeMap<String, u32> = n
            .sig()
            .consts
            .iter()
            .map(|c| {
                let e = n.const_at(v, c).expect("valid models interpret constants");
                (c.clone(), map[e as usize])
            })
            .collect();

        worlds.push(back_w[&v].clone());
        domains.push(tagged.into_iter().map(|(name, _)| name).collect());
        preds.push(table);
        consts.push(ctable);
        emap[v] = map;
        einv[v] = inv;
    }

    let mut leq: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nw];
    let mut homs = BTreeMap::new();
    for a in 0..nw {
        let va = order[a];
        for b in 0..nw {
            let vb = order[b];
            if !n.le(va, vb) {
                continue;
            }
            leq[a].insert(b);
            let table: Vec<u32> = (0..domains[a].len())
                .map(|e| {
                    let ne = einv[va][e];
                    emap[vb][n.push(va, vb, ne) as usize]
                })
                .collect();
            homs.insert((a, b), table);
        }
    }

    let mut mp = KripkeModel {
        sig: n.sig().clone(),
        worlds,
        leq,
        domains,
        preds,
        consts,
        homs,
    };
    mp.prune_empty_preds();
    mp.require_valid()?;

    let mut g2 = g.clone();
    let mut h2 = h.clone();
    for v in 0..nw {
        g2.insert(back_w[&v].clone(), n.world_name(v).to_string());
        for (b, local) in locals[v].iter().enumerate() {
            h2.insert(
                Element::new(back_w[&v].clone(), local.clone()),
                Element::new(n.world_name(v), n.domain(v)[b].clone()),
            );
        }
    }
    Ok((mp, g2, h2))
}
