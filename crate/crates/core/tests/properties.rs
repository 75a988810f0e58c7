mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treecut::disambig::{
    decide_la, decide_mdl, generate_synthetic, Gold, HeadKind, MdlModels, PPInstance, SynthSpec, TaggedTriple,
};
use treecut::mdl::find_mdl_with_length;
use treecut::mdl::oracle::{find_mdl_brute_nf, subtree_l_prime};
use treecut::thesaurus::NodeSpec;
use treecut::{
    assign_frequencies, count_cuts, data_len, enumerate_cuts, find_mdl, mle_estimate, parse_thesaurus, parse_triples,
    prune_observed_subtrees, slot_sample, Cut, SlotSample, Thesaurus, TreeCutModel, Triple,
};

use common::{random_sample, random_tree};

fn instance(seed: u64, max_leaves: usize) -> (Thesaurus, SlotSample) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let leaves = rng.gen_range(1..=max_leaves);
    let t = random_tree(&mut rng, leaves);
    let s = random_sample(&mut rng, &t);
    (t, s)
}

/// Random tree where some internal nodes carry words and some words sit
/// under two nodes.
fn tangled_tree(rng: &mut ChaCha8Rng, leaves: usize) -> Thesaurus {
    let base = random_tree(rng, leaves);
    let words: Vec<String> = base.words().map(str::to_string).collect();
    fn rebuild(t: &Thesaurus, id: treecut::NodeId, rng: &mut ChaCha8Rng, words: &[String]) -> NodeSpec {
        let n = t.node(id);
        if n.is_leaf() {
            let mut members = n.members.clone();
            if rng.gen_bool(0.2) {
                let extra = &words[rng.gen_range(0..words.len())];
                if !members.contains(extra) {
                    members.push(extra.clone());
                }
            }
            return NodeSpec { label: n.label.clone(), members, children: Vec::new() };
        }
        let children = n.children.iter().map(|&c| rebuild(t, c, rng, words)).collect();
        let mut spec = NodeSpec::class(&n.label, children);
        if rng.gen_bool(0.2) {
            spec.members.push(format!("{}_self", n.label));
        }
        spec
    }
    Thesaurus::from_spec(rebuild(&base, base.root(), rng, &words)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cut_count_matches_enumeration(seed in any::<u64>()) {
        let (t, _) = instance(seed, 12);
        let cuts = enumerate_cuts(&t, t.root(), 1 << 20).unwrap();
        prop_assert_eq!(count_cuts(&t, t.root()).exact, Some(cuts.len() as u128));
        let distinct: HashSet<Vec<usize>> = cuts.iter().map(|c| c.nodes.iter().map(|n| n.0).collect()).collect();
        prop_assert_eq!(distinct.len(), cuts.len());
        for c in &cuts {
            prop_assert!(t.check_cut(t.root(), c).is_ok());
        }
    }

    #[test]
    fn every_subtree_cut_count_matches(seed in any::<u64>()) {
        let (t, _) = instance(seed, 10);
        for n in t.nodes() {
            let cuts = enumerate_cuts(&t, n.id, 1 << 20).unwrap();
            prop_assert_eq!(count_cuts(&t, n.id).exact, Some(cuts.len() as u128));
        }
    }

    #[test]
    fn frequency_mass_is_conserved(seed in any::<u64>()) {
        let (t, mut s) = instance(seed, 12);
        s.add("not_a_word", 3.0);
        let nf = assign_frequencies(&s, &t);
        prop_assert!((nf.total + nf.dropped - s.total).abs() < 1e-9);
        prop_assert!((nf.dropped - 3.0).abs() < 1e-12);
        for n in t.nodes() {
            let children: f64 = n.children.iter().map(|&c| nf.get(c)).sum();
            prop_assert!((nf.get(n.id) - children - nf.direct[n.id.0]).abs() < 1e-9);
        }
    }

    #[test]
    fn slot_sample_ignores_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut triples: Vec<Triple> = (0..30)
            .map(|_| Triple::new(["a", "b"][rng.gen_range(0..2)], "s", &format!("w{}", rng.gen_range(0..6)), rng.gen_range(1..5) as f64))
            .collect();
        let before = slot_sample(&triples, "a", "s");
        triples.shuffle(&mut rng);
        prop_assert_eq!(slot_sample(&triples, "a", "s"), before);
    }

    #[test]
    fn pruning_is_idempotent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let leaves = rng.gen_range(1..=12);
        let t = tangled_tree(&mut rng, leaves);
        let observed: HashSet<String> = t.words().filter(|_| rng.gen_bool(0.3)).map(str::to_string).collect();
        let once = prune_observed_subtrees(&t, &observed);
        let twice = prune_observed_subtrees(&once, &observed);
        prop_assert_eq!(once.to_text(), twice.to_text());
        for n in once.nodes() {
            if n.members.iter().any(|m| observed.contains(m)) {
                prop_assert!(n.is_leaf());
            }
        }
        prop_assert!(once.len() <= t.len());
    }

    #[test]
    fn find_mdl_matches_brute_force_on_tangled_trees(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let leaves = rng.gen_range(1..=10);
        let t = tangled_tree(&mut rng, leaves);
        let s = random_sample(&mut rng, &t);
        let nf = assign_frequencies(&s, &t);
        let (cut, len) = find_mdl_with_length(&t, t.root(), &nf, nf.total).unwrap();
        prop_assert!(t.check_cut(t.root(), &cut).is_ok());
        let (_, min) = find_mdl_brute_nf(&t, t.root(), &nf, nf.total, 1 << 20).unwrap();
        let got = subtree_l_prime(&t, t.root(), &cut, &nf, nf.total);
        prop_assert!((got - min).abs() < 1e-9, "find_mdl {} vs brute {}", got, min);
        prop_assert!((len - got).abs() < 1e-9);
        // Internal words are never split away from their node.
        for n in t.nodes().iter().filter(|n| nf.direct[n.id.0] > 0.0) {
            prop_assert!(cut.nodes.iter().any(|&c| t.dominates(c, n.id)));
        }
    }

    #[test]
    fn find_mdl_on_subtrees_is_a_subtree_cut(seed in any::<u64>()) {
        let (t, s) = instance(seed, 12);
        let nf = assign_frequencies(&s, &t);
        for n in t.nodes() {
            let cut = find_mdl(&t, n.id, &nf, nf.total).unwrap();
            prop_assert!(t.check_cut(n.id, &cut).is_ok());
        }
    }

    #[test]
    fn mle_minimizes_data_length(seed in any::<u64>(), eps in 0.001f64..0.2) {
        let (t, s) = instance(seed, 12);
        let nf = assign_frequencies(&s, &t);
        let cut = find_mdl(&t, t.root(), &nf, nf.total).unwrap();
        let m = mle_estimate(&cut, &nf).unwrap();
        let best = data_len(&m, &s, &t);
        if m.params.len() >= 2 {
            // Move mass between the first two classes; the sum stays 1.
            let mut params = m.params.clone();
            let shift = eps * params[0].max(params[1]);
            if params[0] >= params[1] { params[0] -= shift; params[1] += shift; } else { params[0] += shift; params[1] -= shift; }
            let perturbed = TreeCutModel { params, ..m.clone() };
            prop_assert!(data_len(&perturbed, &s, &t) >= best - 1e-9);
        }
    }

    #[test]
    fn finest_cut_has_shortest_data_length(seed in any::<u64>()) {
        let (t, s) = instance(seed, 10);
        let nf = assign_frequencies(&s, &t);
        let leaf = data_len(&mle_estimate(&t.leaf_cut(t.root()), &nf).unwrap(), &s, &t);
        for cut in enumerate_cuts(&t, t.root(), 1 << 20).unwrap() {
            let l = data_len(&mle_estimate(&cut, &nf).unwrap(), &s, &t);
            prop_assert!(leaf <= l + 1e-9);
        }
    }

    #[test]
    fn mdl_decisions_ignore_count_scale(seed in any::<u64>()) {
        let t = common::animal();
        let words: Vec<&str> = t.words().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base: Vec<TaggedTriple> = (0..12)
            .map(|i| {
                let (kind, head) = if i % 2 == 0 { (HeadKind::Verb, "v") } else { (HeadKind::Noun, "n") };
                let mut tr = TaggedTriple::new(kind, head, "p", words[rng.gen_range(0..words.len())]);
                tr.count = rng.gen_range(1..6) as f64;
                tr
            })
            .collect();
        let train = |k: f64| {
            let scaled: Vec<TaggedTriple> = base.iter().cloned().map(|mut tr| { tr.count *= k; tr }).collect();
            MdlModels::train(&scaled, &t)
        };
        let verdicts = |models: &MdlModels| {
            words.iter().map(|w| decide_mdl(&PPInstance::new("v", "n", "p", w, Gold::Unknown), models, &t).verdict).collect::<Vec<_>>()
        };
        // Scaling changes L_par relative to L_dat and so may move the cut;
        // with the same cuts, the MLE and hence every verdict are unchanged.
        let (m4, m8) = (train(4.0), train(8.0));
        let same_cuts = [(HeadKind::Verb, "v"), (HeadKind::Noun, "n")]
            .iter()
            .all(|&(kind, h)| m4.get(kind, h, "p").map(|m| &m.cut) == m8.get(kind, h, "p").map(|m| &m.cut));
        if same_cuts {
            prop_assert_eq!(verdicts(&m4), verdicts(&m8));
        }
    }

    #[test]
    fn stricter_t_gate_never_decides_more(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = treecut::assoc::LexicalCounts::default();
        for _ in 0..40 {
            let head = format!("{}:{}", ["verb", "noun"][rng.gen_range(0..2)], ["a", "b"][rng.gen_range(0..2)]);
            counts.add(&head, ["p", "q"][rng.gen_range(0..2)], rng.gen_range(1..4) as f64);
        }
        let q = PPInstance::new("a", "b", "p", "x", Gold::Unknown);
        let loose = decide_la(&q, &counts, 1.0).verdict.is_decided();
        let strict = decide_la(&q, &counts, 3.0).verdict.is_decided();
        prop_assert!(loose || !strict);
    }
}

#[test]
fn synthetic_corpus_is_reproducible() {
    let spec = SynthSpec { train_size: 400, test_size: 40, ..SynthSpec::default() };
    for seed in 0..5 {
        let a = generate_synthetic(&spec, seed).unwrap();
        let b = generate_synthetic(&spec, seed).unwrap();
        assert_eq!(a.training, b.training);
        assert_eq!(a.test, b.test);
        // Every sampled word is in the generated thesaurus.
        for tr in &a.training {
            assert!(a.thesaurus.contains_word(&tr.value));
        }
    }
}

#[test]
fn serialized_fixtures_round_trip() {
    let t = parse_thesaurus(common::ANIMAL).unwrap();
    assert_eq!(parse_thesaurus(&t.to_text()).unwrap().to_text(), t.to_text());
    let triples = parse_triples(common::FLY).unwrap();
    assert_eq!(parse_triples(&treecut::cooccur::write_triples(&triples)).unwrap(), triples);
}

#[test]
fn cut_order_is_left_to_right() {
    let t = common::animal();
    let cut =
        Cut::new(vec![t.lookup("bee")[0], t.node(t.root()).children[0], t.lookup("bug")[0], t.lookup("insect")[0]]);
    assert_eq!(t.cut_labels(&cut), "[BIRD, bug, bee, insect]");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn parsers_accept_or_reject_without_panicking(text in "([a-z:,#?0-9.\\- ]{0,8}[\t\n]){0,12}") {
        if let Ok(t) = parse_thesaurus(&text) {
            let written = t.to_text();
            prop_assert_eq!(parse_thesaurus(&written).unwrap().to_text(), written);
        }
        if let Ok(triples) = parse_triples(&text) {
            prop_assert!(triples.iter().all(|t| t.count.is_finite() && t.count >= 0.0));
        }
        if let Ok(training) = treecut::disambig::parse_training(&text) {
            let again = treecut::disambig::parse_training(&treecut::disambig::write_training(&training)).unwrap();
            prop_assert_eq!(again, training);
        }
        if let Ok(pp) = treecut::disambig::parse_pp_instances(&text) {
            let again = treecut::disambig::parse_pp_instances(&treecut::disambig::write_pp_instances(&pp)).unwrap();
            prop_assert_eq!(again, pp);
        }
    }
}
