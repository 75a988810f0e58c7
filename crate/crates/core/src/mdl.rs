//! Tree cut models and their description lengths.
//!
//! All logarithms are base 2, so every length is in bits. A cut class `C`
//! with frequency `f(C)` gets probability `f(C) / |S|`, shared uniformly by
//! the `|C|` word slots it dominates.
//!
//! Two parameter-length conventions coexist. Reports use the free-parameter
//! count `(K - 1) / 2 * log|S|` for a cut of `K` nodes; the search uses
//! `K / 2 * log|S|` because it composes additively over subtrees. They differ
//! by the constant `log|S| / 2`, so both select the same cut.

use serde::Serialize;
use thiserror::Error;

use crate::cooccur::{assign_frequencies, slot_sample, NodeFrequencies, SlotSample, Triple};
use crate::thesaurus::{count_cuts, Cut, CutError, NodeId, Thesaurus};

pub use oracle::{find_mdl_brute, find_mdl_brute_nf};

/// Default reporting threshold for generalized classes.
pub const DEFAULT_THRESHOLD: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("sample is empty")]
    EmptySample,
    #[error("sample size {0} is below 1; log|S| would be negative")]
    SampleTooSmall(f64),
    #[error("word `{0}` is not in the thesaurus")]
    UnknownWord(String),
    #[error("word `{0}` is not covered by the cut")]
    NotCovered(String),
    #[error("threshold {0} outside [0, 1]")]
    BadThreshold(f64),
    #[error(transparent)]
    Cut(#[from] CutError),
}

/// A cut with one probability per cut node.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeCutModel {
    pub cut: Cut,
    pub params: Vec<f64>,
    pub sample_total: f64,
}

/// Maximum-likelihood parameters for `cut`: each class gets its share of the
/// sample mass.
pub fn mle_estimate(cut: &Cut, nf: &NodeFrequencies) -> Result<TreeCutModel, ModelError> {
    if nf.total <= 0.0 {
        return Err(ModelError::EmptySample);
    }
    let params = cut.nodes.iter().map(|&c| nf.get(c) / nf.total).collect();
    Ok(TreeCutModel { cut: cut.clone(), params, sample_total: nf.total })
}

/// Cut position of the class dominating `node`, if any.
fn covering_class(m: &TreeCutModel, t: &Thesaurus, node: NodeId) -> Option<usize> {
    t.ancestors(node).find_map(|a| m.cut.position(a))
}

/// Smoothed probability of `word`: each node carrying the word contributes
/// `P(C) / |C|` for the cut class `C` above it.
pub fn word_prob(m: &TreeCutModel, t: &Thesaurus, word: &str) -> Result<f64, ModelError> {
    let nodes = t.lookup(word);
    if nodes.is_empty() {
        return Err(ModelError::UnknownWord(word.to_string()));
    }
    let mut p = 0.0;
    let mut covered = false;
    for &n in nodes {
        if let Some(i) = covering_class(m, t, n) {
            covered = true;
            p += m.params[i] / t.node(m.cut.nodes[i]).word_count() as f64;
        }
    }
    if covered {
        Ok(p)
    } else {
        Err(ModelError::NotCovered(word.to_string()))
    }
}

/// `-Σ f(n) log P(n)` over the sample words. Words absent from the
/// thesaurus are skipped (they were dropped when frequencies were
/// assigned); an observed word with zero probability gives `+inf`.
pub fn data_len(m: &TreeCutModel, s: &SlotSample, t: &Thesaurus) -> f64 {
    // cover[v] = cut position of the class dominating v
    let mut cover: Vec<Option<usize>> = vec![None; t.len()];
    for (i, node) in t.nodes().iter().enumerate() {
        cover[i] = m.cut.position(node.id).or_else(|| node.parent.and_then(|p| cover[p.0]));
    }
    let mut bits = 0.0;
    for (word, &f) in &s.freq {
        if f <= 0.0 {
            continue;
        }
        let nodes = t.lookup(word);
        if nodes.is_empty() {
            continue;
        }
        let p: f64 = nodes
            .iter()
            .filter_map(|n| cover[n.0])
            .map(|i| m.params[i] / t.node(m.cut.nodes[i]).word_count() as f64)
            .sum();
        if p <= 0.0 {
            return f64::INFINITY;
        }
        bits -= f * p.log2();
    }
    bits
}

fn check_sample_size(sample_total: f64) -> Result<f64, ModelError> {
    if sample_total >= 1.0 {
        Ok(sample_total.log2())
    } else {
        Err(ModelError::SampleTooSmall(sample_total))
    }
}

/// `(K - 1) / 2 * log|S|`, `K` the number of cut nodes.
pub fn param_len_free(cut: &Cut, sample_total: f64) -> Result<f64, ModelError> {
    let log_s = check_sample_size(sample_total)?;
    Ok((cut.len() as f64 - 1.0) / 2.0 * log_s)
}

/// `K / 2 * log|S|`, the convention used while searching.
pub fn param_len_nodes(cut: &Cut, sample_total: f64) -> Result<f64, ModelError> {
    let log_s = check_sample_size(sample_total)?;
    Ok(cut.len() as f64 / 2.0 * log_s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelLength {
    pub bits: f64,
    /// The cut count overflowed and `bits` comes from a log-domain estimate.
    pub approximate: bool,
}

/// `log |G|` for the set `G` of all cuts of the tree. Equal for every cut.
pub fn model_len(t: &Thesaurus) -> ModelLength {
    let count = count_cuts(t, t.root());
    ModelLength { bits: count.log2, approximate: count.is_approximate() }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LengthReport {
    pub model_len: f64,
    pub param_len: f64,
    pub data_len: f64,
    pub l_prime: f64,
    pub total: f64,
}

/// All description lengths of the MLE model on `cut` (free-parameter
/// convention).
pub fn describe(cut: &Cut, s: &SlotSample, t: &Thesaurus) -> Result<LengthReport, ModelError> {
    t.check_cut(t.root(), cut)?;
    let nf = assign_frequencies(s, t);
    if nf.total <= 0.0 {
        return Err(ModelError::EmptySample);
    }
    let m = mle_estimate(cut, &nf)?;
    let param_len = param_len_free(cut, nf.total)?;
    let data_len = data_len(&m, s, t);
    let model_len = model_len(t).bits;
    let l_prime = param_len + data_len;
    Ok(LengthReport { model_len, param_len, data_len, l_prime, total: model_len + l_prime })
}

/// Data length of a single class: `-f log(f / (|S| |C|))`, zero when `f = 0`.
fn class_data_len(freq: f64, words: usize, sample_total: f64) -> f64 {
    if freq <= 0.0 {
        0.0
    } else {
        -freq * (freq / (sample_total * words as f64)).log2()
    }
}

/// Minimum description length cut of the subtree rooted at `node`.
///
/// Works bottom-up: a node collapses to a single class only when that is
/// strictly shorter than the best cuts of its children joined together, so
/// ties keep the finer cut. Mass attached directly to an internal node is
/// only describable by cuts at or above that node.
pub fn find_mdl(t: &Thesaurus, node: NodeId, nf: &NodeFrequencies, sample_total: f64) -> Result<Cut, ModelError> {
    Ok(find_mdl_with_length(t, node, nf, sample_total)?.0)
}

/// [`find_mdl`] together with the `L'` of the returned cut (node-count
/// parameter convention).
pub fn find_mdl_with_length(
    t: &Thesaurus,
    node: NodeId,
    nf: &NodeFrequencies,
    sample_total: f64,
) -> Result<(Cut, f64), ModelError> {
    if sample_total <= 0.0 {
        return Err(ModelError::EmptySample);
    }
    let per_class = check_sample_size(sample_total)? / 2.0;
    let range = t.subtree(node);
    let base = range.start;
    let mut best = vec![0.0; range.len()];
    let mut collapse = vec![false; range.len()];
    for i in range.clone().rev() {
        let n = &t.nodes()[i];
        let single = per_class + class_data_len(nf.by_node[i], n.word_count(), sample_total);
        if n.is_leaf() {
            best[i - base] = single;
            collapse[i - base] = true;
            continue;
        }
        let mut joined: f64 = n.children.iter().map(|c| best[c.0 - base]).sum();
        if nf.direct[i] > 0.0 {
            joined = f64::INFINITY;
        }
        if single < joined {
            best[i - base] = single;
            collapse[i - base] = true;
        } else {
            best[i - base] = joined;
        }
    }

    let mut cut = Vec::new();
    let mut i = range.start;
    while i < range.end {
        if collapse[i - base] {
            cut.push(NodeId(i));
            i = t.subtree(NodeId(i)).end;
        } else {
            i += 1;
        }
    }
    Ok((Cut { nodes: cut }, best[0]))
}

pub mod oracle {
    //! Exhaustive search over all cuts, used to cross-check [`super::find_mdl`].

    use super::*;
    use crate::thesaurus::enumerate_cuts;

    /// Data length of `cut` on the subtree at `node`, summed per node mass:
    /// every node's direct mass is charged at the probability of the cut
    /// class dominating it, or `+inf` if no class does.
    pub fn split_data_len(t: &Thesaurus, node: NodeId, cut: &Cut, nf: &NodeFrequencies, sample_total: f64) -> f64 {
        let mut bits = 0.0;
        for i in t.subtree(node) {
            let mass = nf.direct[i];
            if mass <= 0.0 {
                continue;
            }
            let class =
                t.ancestors(NodeId(i)).take_while(|a| t.dominates(node, *a)).find(|a| cut.position(*a).is_some());
            match class {
                Some(c) => {
                    let p = nf.get(c) / sample_total / t.node(c).word_count() as f64;
                    bits -= mass * p.log2();
                }
                None => return f64::INFINITY,
            }
        }
        bits
    }

    /// `L'` of `cut` on the subtree at `node`, node-count parameter convention.
    pub fn subtree_l_prime(t: &Thesaurus, node: NodeId, cut: &Cut, nf: &NodeFrequencies, sample_total: f64) -> f64 {
        let par = cut.len() as f64 / 2.0 * sample_total.log2();
        par + split_data_len(t, node, cut, nf, sample_total)
    }

    /// Brute-force minimum over every cut of the subtree at `node`. Among
    /// equal lengths (within 1e-9) the cut with more nodes wins, then the
    /// earliest in left-to-right order.
    pub fn find_mdl_brute_nf(
        t: &Thesaurus,
        node: NodeId,
        nf: &NodeFrequencies,
        sample_total: f64,
        limit: u128,
    ) -> Result<(Cut, f64), ModelError> {
        if sample_total <= 0.0 {
            return Err(ModelError::EmptySample);
        }
        check_sample_size(sample_total)?;
        let mut best: Option<(Cut, f64)> = None;
        for cut in enumerate_cuts(t, node, limit)? {
            let len = subtree_l_prime(t, node, &cut, nf, sample_total);
            let better = match &best {
                None => true,
                Some((b, bl)) => {
                    if (len - bl).abs() <= 1e-9 || (len.is_infinite() && bl.is_infinite()) {
                        cut.len() > b.len() || (cut.len() == b.len() && cut.nodes < b.nodes)
                    } else {
                        len < *bl
                    }
                }
            };
            if better {
                best = Some((cut, len));
            }
        }
        Ok(best.expect("every subtree has at least one cut"))
    }

    /// Brute-force minimum description length cut of the whole tree.
    pub fn find_mdl_brute(t: &Thesaurus, s: &SlotSample, limit: u128) -> Result<Cut, ModelError> {
        let nf = assign_frequencies(s, t);
        Ok(find_mdl_brute_nf(t, t.root(), &nf, nf.total, limit)?.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeneralizeConfig {
    pub threshold: f64,
    /// Example words listed per class.
    pub examples: usize,
}

impl Default for GeneralizeConfig {
    fn default() -> Self {
        GeneralizeConfig { threshold: DEFAULT_THRESHOLD, examples: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassEntry {
    pub label: String,
    pub node: NodeId,
    pub probability: f64,
    pub examples: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneralizationResult {
    pub head: String,
    pub slot: String,
    pub threshold: f64,
    pub sample_total: f64,
    pub dropped: f64,
    pub cut: Vec<String>,
    pub entries: Vec<ClassEntry>,
}

/// Generalize the values of one (head, slot) pair to the MDL cut, keeping
/// classes whose probability reaches the threshold.
pub fn generalize(
    head: &str,
    slot: &str,
    triples: &[Triple],
    t: &Thesaurus,
    cfg: &GeneralizeConfig,
) -> Result<GeneralizationResult, ModelError> {
    generalize_sample(&slot_sample(triples, head, slot), t, cfg)
}

pub fn generalize_sample(
    s: &SlotSample,
    t: &Thesaurus,
    cfg: &GeneralizeConfig,
) -> Result<GeneralizationResult, ModelError> {
    if !(0.0..=1.0).contains(&cfg.threshold) {
        return Err(ModelError::BadThreshold(cfg.threshold));
    }
    let nf = assign_frequencies(s, t);
    if nf.total <= 0.0 {
        return Err(ModelError::EmptySample);
    }
    let cut = find_mdl(t, t.root(), &nf, nf.total)?;
    let model = mle_estimate(&cut, &nf)?;

    let mut observed: Vec<Vec<(f64, &str)>> = vec![Vec::new(); cut.len()];
    for (word, &f) in &s.freq {
        let mut classes: Vec<usize> = t.lookup(word).iter().filter_map(|&n| covering_class(&model, t, n)).collect();
        classes.dedup();
        for c in classes {
            observed[c].push((f, word));
        }
    }

    let mut entries: Vec<ClassEntry> = Vec::new();
    for (i, &node) in cut.nodes.iter().enumerate() {
        let p = model.params[i];
        if p < cfg.threshold {
            continue;
        }
        let words = &mut observed[i];
        words.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
        entries.push(ClassEntry {
            label: t.label(node).to_string(),
            node,
            probability: p,
            examples: words.iter().take(cfg.examples).map(|(_, w)| w.to_string()).collect(),
        });
    }
    entries.sort_by(|a, b| b.probability.total_cmp(&a.probability).then(a.node.cmp(&b.node)));
    Ok(GeneralizationResult {
        head: s.head.clone(),
        slot: s.slot.clone(),
        threshold: cfg.threshold,
        sample_total: nf.total,
        dropped: nf.dropped,
        cut: cut.nodes.iter().map(|&n| t.label(n).to_string()).collect(),
        entries,
    })
}
