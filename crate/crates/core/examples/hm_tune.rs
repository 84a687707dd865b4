use std::collections::BTreeSet;
use std::time::Instant;

use ikw::asim::asim_exists;
use ikw::cli::suites::tiny_pointed_corpus;
use ikw::semantics::{sentence_family, theory_slice, Logic};
use ikw::syntax::Formula;

fn main() {
    let corpus = tiny_pointed_corpus();
    let n = corpus.len();
    eprintln!("corpus: {n} points");

    // Precompute the asimulation verdict matrix once.
    let t0 = Instant::now();
    let mut related = vec![false; n * n];
    for (i, (m1, w1)) in corpus.iter().enumerate() {
        for (j, (m2, w2)) in corpus.iter().enumerate() {
            related[i * n + j] = asim_exists(Logic::Il, m1, w1, &[], m2, w2, &[]).unwrap();
        }
    }
    eprintln!("asim matrix: {:?}", t0.elapsed());

    let sig = corpus[0].0.sig().clone();
    for rank in [3u32, 4, 5] {
        for cap in [200usize, 1000, 5000, 20000] {
            let fam = sentence_family(&sig, rank, cap).len();
            if cap > 200 && fam < cap && fam == sentence_family(&sig, rank, cap / 5).len() {
                // family saturated below this cap; skip duplicate work
            }
            let t = Instant::now();
            let slices: Vec<BTreeSet<Formula>> = corpus
                .iter()
                .map(|(m, w)| {
                    theory_slice(Logic::Il, m, w, rank, cap)
                        .unwrap()
                        .positive
                })
                .collect();
            let mut bad = 0usize;
            let mut unsound = 0usize;
            for i in 0..n {
                for j in 0..n {
                    let inc = slices[i].is_subset(&slices[j]);
                    if inc != related[i * n + j] {
                        bad += 1;
                        if related[i * n + j] && !inc {
                            unsound += 1;
                        }
                    }
                }
            }
            println!(
                "rank {rank} cap {cap:>6} family {fam:>6} | disagreements {bad:>4} (unsound {unsound}) | slices took {:?}",
                t.elapsed()
            );
        }
    }
}
