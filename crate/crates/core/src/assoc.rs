//! Association baselines: selectional association over a noun's ancestor
//! classes, lexical association of a preposition with a head, and the
//! t-score used to gate both.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::cooccur::{assign_frequencies, slot_sample, NodeFrequencies, SlotSample, Triple};
use crate::thesaurus::{NodeId, Thesaurus};

/// One-sided 95% critical value.
pub const SIGNIFICANCE_95: f64 = 1.645;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssocError {
    #[error("word `{0}` is not in the thesaurus")]
    UnknownWord(String),
    #[error("P(C) = 0 while P(C|v,s) = {0}")]
    ZeroMarginal(f64),
}

/// Which triples estimate the marginal class probability `P(C)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum MarginalScope {
    /// All triples with the same slot, pooled over heads.
    #[default]
    Slot,
    /// Every triple in the corpus.
    Global,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssociationScore {
    pub class_or_word: String,
    pub node: NodeId,
    /// Selectional association in bits.
    pub score: f64,
    /// Frequency of the class in the (head, slot) sample.
    pub support: f64,
    /// `P(C|v,s)` for the chosen class.
    pub probability: f64,
    /// Size of the (head, slot) sample.
    pub sample_size: f64,
}

/// `P(C|v,s) * log(P(C|v,s) / P(C))`, zero when `P(C|v,s) = 0`.
pub fn selectional_association(p_c_given_vs: f64, p_c: f64) -> Result<f64, AssocError> {
    if p_c_given_vs <= 0.0 {
        return Ok(0.0);
    }
    if p_c <= 0.0 {
        return Err(AssocError::ZeroMarginal(p_c_given_vs));
    }
    Ok(p_c_given_vs * (p_c_given_vs / p_c).log2())
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Marginal sample for `slot` under the given scope.
pub fn marginal_sample(triples: &[Triple], slot: &str, scope: MarginalScope) -> SlotSample {
    let mut s = SlotSample::new("*", slot);
    for t in triples.iter().filter(|t| scope == MarginalScope::Global || t.slot == slot) {
        s.add(&t.value, t.count);
    }
    s
}

/// Class maximizing the selectional association among `word`'s ancestor
/// classes (its own nodes and the root included). Ties go to the deepest
/// class, then the leftmost.
pub fn sa_generalize(
    word: &str,
    head: &str,
    slot: &str,
    triples: &[Triple],
    t: &Thesaurus,
) -> Result<AssociationScore, AssocError> {
    let pair = assign_frequencies(&slot_sample(triples, head, slot), t);
    let marginal = assign_frequencies(&marginal_sample(triples, slot, MarginalScope::Slot), t);
    sa_generalize_nf(word, &pair, &marginal, t)
}

/// [`sa_generalize`] over precomputed pair and marginal frequencies.
pub fn sa_generalize_nf(
    word: &str,
    pair: &NodeFrequencies,
    marginal: &NodeFrequencies,
    t: &Thesaurus,
) -> Result<AssociationScore, AssocError> {
    let nodes = t.lookup(word);
    if nodes.is_empty() {
        return Err(AssocError::UnknownWord(word.to_string()));
    }
    let mut classes: Vec<NodeId> = nodes.iter().flat_map(|&n| t.ancestors(n)).collect();
    classes.sort_unstable();
    classes.dedup();

    let mut best: Option<AssociationScore> = None;
    for c in classes {
        let p_cv = ratio(pair.get(c), pair.total);
        let p_c = ratio(marginal.get(c), marginal.total);
        let score = selectional_association(p_cv, p_c)?;
        let better = match &best {
            None => true,
            Some(b) => {
                if (score - b.score).abs() <= 1e-12 {
                    t.node(c).depth > t.node(b.node).depth
                } else {
                    score > b.score
                }
            }
        };
        if better {
            best = Some(AssociationScore {
                class_or_word: t.label(c).to_string(),
                node: c,
                score,
                support: pair.get(c),
                probability: p_cv,
                sample_size: pair.total,
            });
        }
    }
    Ok(best.expect("a word has at least one node"))
}

/// Counts backing lexical association: per-head totals and per-(head, slot)
/// totals.
#[derive(Clone, Debug, Default)]
pub struct LexicalCounts {
    head_total: HashMap<String, f64>,
    head_slot: HashMap<(String, String), f64>,
}

impl LexicalCounts {
    pub fn from_triples(triples: &[Triple]) -> Self {
        let mut c = LexicalCounts::default();
        for t in triples {
            c.add(&t.head, &t.slot, t.count);
        }
        c
    }

    pub fn add(&mut self, head: &str, slot: &str, count: f64) {
        *self.head_total.entry(head.to_string()).or_insert(0.0) += count;
        *self.head_slot.entry((head.to_string(), slot.to_string())).or_insert(0.0) += count;
    }

    /// `(P(prep|head), count(head))`.
    pub fn association(&self, prep: &str, head: &str) -> (f64, f64) {
        let support = self.head_total.get(head).copied().unwrap_or(0.0);
        let with_prep = self.head_slot.get(&(head.to_string(), prep.to_string())).copied().unwrap_or(0.0);
        (ratio(with_prep, support), support)
    }
}

/// `(P(prep|head), count(head))` estimated from the triples with that head.
pub fn lexical_association(prep: &str, head: &str, triples: &[Triple]) -> (f64, f64) {
    let (mut support, mut with_prep) = (0.0, 0.0);
    for t in triples.iter().filter(|t| t.head == head) {
        support += t.count;
        if t.slot == prep {
            with_prep += t.count;
        }
    }
    (ratio(with_prep, support), support)
}

/// Two-proportion t-score with per-sample binomial variance. Zero when either
/// sample is empty.
pub fn t_score(p1: f64, n1: f64, p2: f64, n2: f64) -> f64 {
    if n1 <= 0.0 || n2 <= 0.0 || p1 == p2 {
        return 0.0;
    }
    let var = p1 * (1.0 - p1) / n1 + p2 * (1.0 - p2) / n2;
    let diff = p1 - p2;
    if var <= 0.0 {
        return diff.signum() * f64::INFINITY;
    }
    diff / var.sqrt()
}
