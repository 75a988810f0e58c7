//! Co-occurrence triples and per-(head, slot) frequency data.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::thesaurus::{NodeId, Thesaurus};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Triple {
    pub head: String,
    pub slot: String,
    pub value: String,
    pub count: f64,
}

impl Triple {
    pub fn new(head: &str, slot: &str, value: &str, count: f64) -> Self {
        Triple { head: head.to_string(), slot: slot.to_string(), value: value.to_string(), count }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TripleError {
    #[error("line {line}: expected 3 or 4 tab-separated columns, found {found}")]
    Arity { line: usize, found: usize },
    #[error("line {line}: empty field")]
    EmptyField { line: usize },
    #[error("line {line}: count `{text}` is not a number")]
    BadCount { line: usize, text: String },
    #[error("line {line}: count {text} must be finite and non-negative")]
    NegativeCount { line: usize, text: String },
}

/// Parse `head<TAB>slot<TAB>value[<TAB>count]` lines. The count defaults to 1.
pub fn parse_triples(text: &str) -> Result<Vec<Triple>, TripleError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
        if !(3..=4).contains(&cols.len()) {
            return Err(TripleError::Arity { line, found: cols.len() });
        }
        if cols[..3].iter().any(|c| c.is_empty()) {
            return Err(TripleError::EmptyField { line });
        }
        let count = match cols.get(3) {
            None => 1.0,
            Some(text) => {
                let c: f64 = text.parse().map_err(|_| TripleError::BadCount { line, text: text.to_string() })?;
                if !c.is_finite() || c < 0.0 {
                    return Err(TripleError::NegativeCount { line, text: text.to_string() });
                }
                c
            }
        };
        out.push(Triple::new(cols[0], cols[1], cols[2], count));
    }
    Ok(out)
}

/// Write triples in the format read by [`parse_triples`].
pub fn write_triples(triples: &[Triple]) -> String {
    let mut out = String::from("# head\tslot\tvalue\tcount\n");
    for t in triples {
        out.push_str(&format!("{}\t{}\t{}\t{}\n", t.head, t.slot, t.value, t.count));
    }
    out
}

/// Observed slot values for one (head, slot) pair.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SlotSample {
    pub head: String,
    pub slot: String,
    pub freq: BTreeMap<String, f64>,
    pub total: f64,
}

impl SlotSample {
    pub fn new(head: &str, slot: &str) -> Self {
        SlotSample { head: head.to_string(), slot: slot.to_string(), ..Default::default() }
    }

    /// Add `count` occurrences of `value`. Zero counts are ignored.
    pub fn add(&mut self, value: &str, count: f64) {
        if count > 0.0 {
            *self.freq.entry(value.to_string()).or_insert(0.0) += count;
            self.total += count;
        }
    }

    pub fn from_counts<'a>(head: &str, slot: &str, counts: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        let mut s = SlotSample::new(head, slot);
        for (w, c) in counts {
            s.add(w, c);
        }
        s
    }

    pub fn is_empty(&self) -> bool {
        self.total <= 0.0
    }
}

/// Collect the values of every triple matching `head` and `slot`.
pub fn slot_sample(triples: &[Triple], head: &str, slot: &str) -> SlotSample {
    let mut s = SlotSample::new(head, slot);
    for t in triples.iter().filter(|t| t.head == head && t.slot == slot) {
        s.add(&t.value, t.count);
    }
    s
}

/// Group all triples into samples keyed by (head, slot).
pub fn slot_samples(triples: &[Triple]) -> BTreeMap<(String, String), SlotSample> {
    let mut out: BTreeMap<(String, String), SlotSample> = BTreeMap::new();
    for t in triples {
        out.entry((t.head.clone(), t.slot.clone()))
            .or_insert_with(|| SlotSample::new(&t.head, &t.slot))
            .add(&t.value, t.count);
    }
    out
}

/// Frequencies over thesaurus nodes. `by_node[v]` is the mass in the
/// subtree of `v`; `direct[v]` is the mass assigned to `v` itself.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeFrequencies {
    pub by_node: Vec<f64>,
    pub direct: Vec<f64>,
    pub total: f64,
    /// Mass of sample words not found in the thesaurus.
    pub dropped: f64,
}

impl NodeFrequencies {
    pub fn get(&self, node: NodeId) -> f64 {
        self.by_node[node.0]
    }
}

/// Spread each word's frequency equally over the nodes carrying it, then sum
/// bottom-up. Words absent from the thesaurus are dropped and their mass is
/// reported in [`NodeFrequencies::dropped`].
pub fn assign_frequencies(s: &SlotSample, t: &Thesaurus) -> NodeFrequencies {
    let n = t.len();
    let mut direct = vec![0.0; n];
    let mut dropped = 0.0;
    for (word, &f) in &s.freq {
        if f <= 0.0 {
            continue;
        }
        let nodes = t.lookup(word);
        if nodes.is_empty() {
            dropped += f;
            continue;
        }
        let share = f / nodes.len() as f64;
        for id in nodes {
            direct[id.0] += share;
        }
    }
    let mut by_node = direct.clone();
    for i in (1..n).rev() {
        let parent = t.nodes()[i].parent.expect("non-root node has a parent");
        by_node[parent.0] += by_node[i];
    }
    let total = by_node[0];
    NodeFrequencies { by_node, direct, total, dropped }
}
