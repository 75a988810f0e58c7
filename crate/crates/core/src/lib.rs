//! Case slot generalization with minimum description length tree cut
//! models over a thesaurus, and prepositional phrase attachment
//! disambiguation built on top of it.
//!
//! - [`thesaurus`]: the tree, its cuts, parsing and pruning.
//! - [`cooccur`]: (head, slot, value) triples and node frequencies.
//! - [`mdl`]: tree cut models, description lengths and the MDL cut search.
//! - [`assoc`]: selectional and lexical association baselines.
//! - [`disambig`]: attachment strategies, synthetic corpora, evaluation.
//! - [`report`]: length tables and TSV / JSON output.
//! - [`cli`]: the `treecut` command line.
//!
//! ```
//! use treecut::{assign_frequencies, find_mdl, mle_estimate, parse_thesaurus, word_prob, SlotSample};
//!
//! let t = parse_thesaurus("ANIMAL\n\tBIRD\n\t\tswallow\n\t\tcrow\n\t\teagle\n\t\tbird\n\tINSECT\n\t\tbug\n\t\tbee\n\t\tinsect\n")?;
//! let s = SlotSample::from_counts("fly", "arg1", [("bird", 4.0), ("eagle", 2.0), ("crow", 2.0), ("bee", 2.0)]);
//! let nf = assign_frequencies(&s, &t);
//! let cut = find_mdl(&t, t.root(), &nf, nf.total)?;
//! assert_eq!(t.cut_labels(&cut), "[BIRD, INSECT]");
//! let model = mle_estimate(&cut, &nf)?;
//! assert!((word_prob(&model, &t, "swallow")? - 0.2).abs() < 1e-12);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod assoc;
pub mod cli;
pub mod cooccur;
pub mod disambig;
pub mod mdl;
pub mod report;
pub mod thesaurus;

pub use assoc::{lexical_association, sa_generalize, selectional_association, t_score};
pub use cooccur::{assign_frequencies, parse_triples, slot_sample, NodeFrequencies, SlotSample, Triple};
pub use disambig::{
    evaluate, generate_synthetic, parse_pp_instances, parse_training, Decision, Disambiguator, EvalReport, PPInstance,
    Strategy, Verdict,
};
pub use mdl::{
    data_len, describe, find_mdl, generalize, mle_estimate, model_len, param_len_free, param_len_nodes, word_prob,
    GeneralizationResult, LengthReport, ModelError, TreeCutModel,
};
pub use thesaurus::{count_cuts, enumerate_cuts, parse_thesaurus, prune_observed_subtrees, Cut, NodeId, Thesaurus};
