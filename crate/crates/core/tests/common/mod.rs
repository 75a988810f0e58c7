#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use treecut::thesaurus::NodeSpec;
use treecut::{SlotSample, Thesaurus};

pub const ANIMAL: &str =
    "ANIMAL\n\tBIRD\n\t\tswallow\n\t\tcrow\n\t\teagle\n\t\tbird\n\tINSECT\n\t\tbug\n\t\tbee\n\t\tinsect\n";
pub const FLY: &str = "fly\targ1\tbird\t4\nfly\targ1\teagle\t2\nfly\targ1\tcrow\t2\nfly\targ1\tbee\t2\n";

pub fn animal() -> Thesaurus {
    treecut::parse_thesaurus(ANIMAL).unwrap()
}

pub fn fly() -> SlotSample {
    SlotSample::from_counts("fly", "arg1", [("bird", 4.0), ("eagle", 2.0), ("crow", 2.0), ("bee", 2.0)])
}

/// Random tree with exactly `leaves` leaves, each holding one unique word.
pub fn random_tree(rng: &mut impl Rng, leaves: usize) -> Thesaurus {
    let mut next = 0;
    Thesaurus::from_spec(grow(rng, leaves, &mut next, 4)).unwrap()
}

fn grow(rng: &mut impl Rng, leaves: usize, next: &mut usize, max_children: usize) -> NodeSpec {
    if leaves == 1 {
        let w = format!("w{next}");
        *next += 1;
        return NodeSpec::word(&w);
    }
    let k = rng.gen_range(2..=leaves.min(max_children));
    // Split `leaves` into k positive parts.
    let mut cuts: Vec<usize> = (1..leaves).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(k - 1).collect();
    cuts.sort_unstable();
    let mut parts = Vec::with_capacity(k);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(leaves)) {
        parts.push(c - prev);
        prev = c;
    }
    let label = format!("C{next}_{leaves}");
    let children = parts.into_iter().map(|p| grow(rng, p, next, max_children)).collect();
    NodeSpec::class(&label, children)
}

/// Random sample over a random subset of the tree's words; total at least 1.
pub fn random_sample(rng: &mut impl Rng, t: &Thesaurus) -> SlotSample {
    let words: Vec<String> = t.words().map(str::to_string).collect();
    let mut s = SlotSample::new("h", "s");
    let density = rng.gen_range(0.1..1.0);
    for w in &words {
        if rng.gen_bool(density) {
            let c = if rng.gen_bool(0.2) { rng.gen_range(0.5..10.0) } else { rng.gen_range(1..30) as f64 };
            s.add(w, c);
        }
    }
    if s.total < 1.0 {
        s.add(&words[rng.gen_range(0..words.len())], 1.0 + rng.gen_range(0..5) as f64);
    }
    s
}

/// `count` (tree, sample) pairs with up to `max_leaves` leaves.
pub fn random_instances(seed: u64, count: usize, max_leaves: usize) -> Vec<(Thesaurus, SlotSample)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let leaves = rng.gen_range(1..=max_leaves);
            let t = random_tree(&mut rng, leaves);
            let s = random_sample(&mut rng, &t);
            (t, s)
        })
        .collect()
}
