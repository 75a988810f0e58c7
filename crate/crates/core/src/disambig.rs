//! PP-attachment disambiguation.
//!
//! Training data are (head, preposition, noun2) triples whose head is tagged
//! `verb:` or `noun:` according to where the phrase attached. Each strategy
//! maps a `(verb, noun1, prep, noun2)` instance to a [`Decision`]; chains
//! take the first strategy that decides.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::assoc::{sa_generalize_nf, t_score, AssociationScore, LexicalCounts, MarginalScope, SIGNIFICANCE_95};
use crate::cooccur::{assign_frequencies, parse_triples, NodeFrequencies, SlotSample, Triple, TripleError};
use crate::mdl::{find_mdl, mle_estimate, word_prob, TreeCutModel};
use crate::thesaurus::{NodeId, NodeSpec, Thesaurus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum HeadKind {
    Verb,
    Noun,
}

impl HeadKind {
    pub fn tag(self) -> &'static str {
        match self {
            HeadKind::Verb => "verb",
            HeadKind::Noun => "noun",
        }
    }
}

/// A training triple whose head carries its part of speech.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaggedTriple {
    pub kind: HeadKind,
    pub head: String,
    pub prep: String,
    pub value: String,
    pub count: f64,
}

impl TaggedTriple {
    pub fn new(kind: HeadKind, head: &str, prep: &str, value: &str) -> Self {
        TaggedTriple { kind, head: head.to_string(), prep: prep.to_string(), value: value.to_string(), count: 1.0 }
    }

    fn tagged_head(&self) -> String {
        format!("{}:{}", self.kind.tag(), self.head)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TrainingError {
    #[error(transparent)]
    Triple(#[from] TripleError),
    #[error("head `{0}` lacks a `verb:` or `noun:` tag")]
    Untagged(String),
}

/// Parse training triples: the triple format with heads written
/// `verb:<word>` or `noun:<word>`.
pub fn parse_training(text: &str) -> Result<Vec<TaggedTriple>, TrainingError> {
    parse_triples(text)?
        .into_iter()
        .map(|t| {
            let (kind, head) = match t.head.split_once(':') {
                Some(("verb", h)) if !h.is_empty() => (HeadKind::Verb, h),
                Some(("noun", h)) if !h.is_empty() => (HeadKind::Noun, h),
                _ => return Err(TrainingError::Untagged(t.head.clone())),
            };
            Ok(TaggedTriple { kind, head: head.to_string(), prep: t.slot, value: t.value, count: t.count })
        })
        .collect()
}

pub fn write_training(triples: &[TaggedTriple]) -> String {
    let plain: Vec<Triple> =
        triples.iter().map(|t| Triple::new(&t.tagged_head(), &t.prep, &t.value, t.count)).collect();
    crate::cooccur::write_triples(&plain)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Gold {
    Verb,
    Noun,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PPInstance {
    pub verb: String,
    pub noun1: String,
    pub prep: String,
    pub noun2: String,
    pub gold: Gold,
}

impl PPInstance {
    pub fn new(verb: &str, noun1: &str, prep: &str, noun2: &str, gold: Gold) -> Self {
        PPInstance {
            verb: verb.to_string(),
            noun1: noun1.to_string(),
            prep: prep.to_string(),
            noun2: noun2.to_string(),
            gold,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PPError {
    #[error("line {line}: expected 4 or 5 tab-separated columns, found {found}")]
    Arity { line: usize, found: usize },
    #[error("line {line}: empty field")]
    EmptyField { line: usize },
    #[error("line {line}: gold label `{text}` is not `v`, `n` or `?`")]
    BadGold { line: usize, text: String },
}

/// Parse `verb<TAB>noun1<TAB>prep<TAB>noun2[<TAB>gold]` lines, gold being
/// `v`, `n` or `?` (unknown, also the default).
pub fn parse_pp_instances(text: &str) -> Result<Vec<PPInstance>, PPError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
        if !(4..=5).contains(&cols.len()) {
            return Err(PPError::Arity { line, found: cols.len() });
        }
        if cols[..4].iter().any(|c| c.is_empty()) {
            return Err(PPError::EmptyField { line });
        }
        let gold = match cols.get(4).copied() {
            None | Some("?") | Some("") => Gold::Unknown,
            Some("v") | Some("V") => Gold::Verb,
            Some("n") | Some("N") => Gold::Noun,
            Some(other) => return Err(PPError::BadGold { line, text: other.to_string() }),
        };
        out.push(PPInstance::new(cols[0], cols[1], cols[2], cols[3], gold));
    }
    Ok(out)
}

pub fn write_pp_instances(instances: &[PPInstance]) -> String {
    let mut out = String::from("# verb\tnoun1\tprep\tnoun2\tgold\n");
    for q in instances {
        let gold = match q.gold {
            Gold::Verb => "v",
            Gold::Noun => "n",
            Gold::Unknown => "?",
        };
        out.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", q.verb, q.noun1, q.prep, q.noun2, gold));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Verb,
    Noun,
    Undecided,
}

impl Verdict {
    fn from_comparison(verb_side: f64, noun_side: f64) -> Verdict {
        if verb_side > noun_side {
            Verdict::Verb
        } else if noun_side > verb_side {
            Verdict::Noun
        } else {
            Verdict::Undecided
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::Verb => "verb",
            Verdict::Noun => "noun",
            Verdict::Undecided => "undecided",
        }
    }

    pub fn is_decided(self) -> bool {
        self != Verdict::Undecided
    }

    pub fn matches(self, gold: Gold) -> bool {
        matches!((self, gold), (Verdict::Verb, Gold::Verb) | (Verdict::Noun, Gold::Noun))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Strategy {
    Default,
    La,
    Sa,
    Mdl,
    Mdl2,
    Combined,
    Combined2,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::Default,
        Strategy::La,
        Strategy::Sa,
        Strategy::Mdl,
        Strategy::Mdl2,
        Strategy::Combined,
        Strategy::Combined2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Default => "default",
            Strategy::La => "la",
            Strategy::Sa => "sa",
            Strategy::Mdl => "mdl",
            Strategy::Mdl2 => "mdl2",
            Strategy::Combined => "combined",
            Strategy::Combined2 => "combined2",
        }
    }

    /// The primitive strategies a composite one runs, in order.
    pub fn steps(self) -> &'static [Strategy] {
        match self {
            Strategy::Combined => &[Strategy::Mdl, Strategy::La, Strategy::Default],
            Strategy::Combined2 => &[Strategy::Mdl2, Strategy::La, Strategy::Default],
            Strategy::Default => &[Strategy::Default],
            Strategy::La => &[Strategy::La],
            Strategy::Sa => &[Strategy::Sa],
            Strategy::Mdl => &[Strategy::Mdl],
            Strategy::Mdl2 => &[Strategy::Mdl2],
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown strategy `{0}`")]
pub struct UnknownStrategy(pub String);

impl FromStr for Strategy {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownStrategy(s.to_string()))
    }
}

/// An attachment verdict with the scores that were compared
/// (verb side, noun side).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Decision {
    pub verdict: Verdict,
    pub strategy: Strategy,
    pub evidence: (f64, f64),
}

/// MDL tree cut models per (head kind, head, preposition).
#[derive(Clone, Debug, Default)]
pub struct MdlModels {
    models: HashMap<(HeadKind, String, String), TreeCutModel>,
}

/// Fit the MDL model of one sample; `None` when the sample is too small.
fn fit(sample: &SlotSample, t: &Thesaurus) -> Option<TreeCutModel> {
    let nf = assign_frequencies(sample, t);
    if nf.total < 1.0 {
        return None;
    }
    let cut = find_mdl(t, t.root(), &nf, nf.total).ok()?;
    mle_estimate(&cut, &nf).ok()
}

fn prob_under(model: Option<&TreeCutModel>, t: &Thesaurus, word: &str) -> f64 {
    model.and_then(|m| word_prob(m, t, word).ok()).unwrap_or(0.0)
}

impl MdlModels {
    pub fn train(triples: &[TaggedTriple], t: &Thesaurus) -> Self {
        let mut samples: BTreeMap<(HeadKind, String, String), SlotSample> = BTreeMap::new();
        for tr in triples {
            samples
                .entry((tr.kind, tr.head.clone(), tr.prep.clone()))
                .or_insert_with(|| SlotSample::new(&tr.head, &tr.prep))
                .add(&tr.value, tr.count);
        }
        let models = samples.into_iter().filter_map(|(key, s)| fit(&s, t).map(|m| (key, m))).collect();
        MdlModels { models }
    }

    pub fn get(&self, kind: HeadKind, head: &str, prep: &str) -> Option<&TreeCutModel> {
        self.models.get(&(kind, head.to_string(), prep.to_string()))
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    /// `P(word | head, prep)`; zero without a model or coverage.
    pub fn prob(&self, kind: HeadKind, head: &str, prep: &str, word: &str, t: &Thesaurus) -> f64 {
        prob_under(self.get(kind, head, prep), t, word)
    }
}

/// Per-head MDL models plus models pooled over the ancestor classes of
/// noun heads.
#[derive(Clone, Debug, Default)]
pub struct Mdl2Models {
    pub heads: MdlModels,
    pooled: HashMap<(NodeId, String), TreeCutModel>,
}

/// Train per-head models and, for noun heads in the thesaurus, models over
/// counts pooled at every class above (and including) the head's nodes.
pub fn train_mdl2_models(triples: &[TaggedTriple], t: &Thesaurus) -> Mdl2Models {
    let heads = MdlModels::train(triples, t);
    let mut samples: BTreeMap<(NodeId, String), SlotSample> = BTreeMap::new();
    for tr in triples.iter().filter(|tr| tr.kind == HeadKind::Noun) {
        let mut classes: Vec<NodeId> = t.lookup(&tr.head).iter().flat_map(|&n| t.ancestors(n)).collect();
        classes.sort_unstable();
        classes.dedup();
        for c in classes {
            samples
                .entry((c, tr.prep.clone()))
                .or_insert_with(|| SlotSample::new(t.label(c), &tr.prep))
                .add(&tr.value, tr.count);
        }
    }
    let pooled = samples.into_iter().filter_map(|(key, s)| fit(&s, t).map(|m| (key, m))).collect();
    Mdl2Models { heads, pooled }
}

impl Mdl2Models {
    /// Model used for a noun head: its own if trained, else the one at the
    /// most specific ancestor class with pooled data.
    pub fn noun_model(&self, head: &str, prep: &str, t: &Thesaurus) -> Option<&TreeCutModel> {
        if let Some(m) = self.heads.get(HeadKind::Noun, head, prep) {
            return Some(m);
        }
        let mut classes: Vec<NodeId> = t.lookup(head).iter().flat_map(|&n| t.ancestors(n)).collect();
        classes.sort_unstable();
        classes.dedup();
        classes.sort_by_key(|&c| std::cmp::Reverse(t.node(c).depth));
        classes.into_iter().find_map(|c| self.pooled.get(&(c, prep.to_string())))
    }
}

/// Frequencies for selectional association: per (head kind, head, prep)
/// and the marginal per preposition.
#[derive(Clone, Debug)]
pub struct SaTables {
    pairs: HashMap<(HeadKind, String, String), NodeFrequencies>,
    marginals: HashMap<String, NodeFrequencies>,
    empty: NodeFrequencies,
}

impl SaTables {
    pub fn build(triples: &[TaggedTriple], t: &Thesaurus, scope: MarginalScope) -> Self {
        let mut pairs: BTreeMap<(HeadKind, String, String), SlotSample> = BTreeMap::new();
        let mut marginals: BTreeMap<String, SlotSample> = BTreeMap::new();
        let mut global = SlotSample::new("*", "*");
        for tr in triples {
            pairs
                .entry((tr.kind, tr.head.clone(), tr.prep.clone()))
                .or_insert_with(|| SlotSample::new(&tr.head, &tr.prep))
                .add(&tr.value, tr.count);
            marginals.entry(tr.prep.clone()).or_insert_with(|| SlotSample::new("*", &tr.prep)).add(&tr.value, tr.count);
            global.add(&tr.value, tr.count);
        }
        let global = assign_frequencies(&global, t);
        SaTables {
            pairs: pairs.into_iter().map(|(k, s)| (k, assign_frequencies(&s, t))).collect(),
            marginals: marginals
                .into_iter()
                .map(|(k, s)| {
                    let nf = match scope {
                        MarginalScope::Slot => assign_frequencies(&s, t),
                        MarginalScope::Global => global.clone(),
                    };
                    (k, nf)
                })
                .collect(),
            empty: assign_frequencies(&SlotSample::default(), t),
        }
    }

    /// Best selectional association of `word` for the (head, prep) pair, or
    /// `None` if the word is not in the thesaurus.
    pub fn score(&self, kind: HeadKind, head: &str, prep: &str, word: &str, t: &Thesaurus) -> Option<AssociationScore> {
        let pair = self.pairs.get(&(kind, head.to_string(), prep.to_string())).unwrap_or(&self.empty);
        let marginal = self.marginals.get(prep).unwrap_or(&self.empty);
        sa_generalize_nf(word, pair, marginal, t).ok()
    }
}

pub fn decide_default(_q: &PPInstance) -> Decision {
    Decision { verdict: Verdict::Noun, strategy: Strategy::Default, evidence: (0.0, 0.0) }
}

/// Compare `P(noun2 | verb, prep)` with `P(noun2 | noun1, prep)`.
pub fn decide_mdl(q: &PPInstance, models: &MdlModels, t: &Thesaurus) -> Decision {
    let pv = models.prob(HeadKind::Verb, &q.verb, &q.prep, &q.noun2, t);
    let pn = models.prob(HeadKind::Noun, &q.noun1, &q.prep, &q.noun2, t);
    Decision { verdict: Verdict::from_comparison(pv, pn), strategy: Strategy::Mdl, evidence: (pv, pn) }
}

/// As [`decide_mdl`], with the noun side falling back to pooled class models.
pub fn decide_mdl2(q: &PPInstance, models: &Mdl2Models, t: &Thesaurus) -> Decision {
    let pv = models.heads.prob(HeadKind::Verb, &q.verb, &q.prep, &q.noun2, t);
    let pn = prob_under(models.noun_model(&q.noun1, &q.prep, t), t, &q.noun2);
    Decision { verdict: Verdict::from_comparison(pv, pn), strategy: Strategy::Mdl2, evidence: (pv, pn) }
}

/// Compare the best selectional associations of `noun2` on both sides. The
/// decision stands only if the t-score of the chosen classes' proportions
/// is significant and points the same way.
pub fn decide_sa(q: &PPInstance, tables: &SaTables, t: &Thesaurus, t_threshold: f64) -> Decision {
    let undecided = |evidence| Decision { verdict: Verdict::Undecided, strategy: Strategy::Sa, evidence };
    let (Some(v), Some(n)) = (
        tables.score(HeadKind::Verb, &q.verb, &q.prep, &q.noun2, t),
        tables.score(HeadKind::Noun, &q.noun1, &q.prep, &q.noun2, t),
    ) else {
        return undecided((0.0, 0.0));
    };
    let evidence = (v.score, n.score);
    let ts = t_score(v.probability, v.sample_size, n.probability, n.sample_size);
    let verdict = Verdict::from_comparison(v.score, n.score);
    let agrees = match verdict {
        Verdict::Verb => ts > 0.0,
        Verdict::Noun => ts < 0.0,
        Verdict::Undecided => false,
    };
    if ts.abs() < t_threshold || !agrees {
        return undecided(evidence);
    }
    Decision { verdict, strategy: Strategy::Sa, evidence }
}

/// Compare `P(prep | verb)` with `P(prep | noun1)` under the t-score gate.
pub fn decide_la(q: &PPInstance, counts: &LexicalCounts, t_threshold: f64) -> Decision {
    let (pv, nv) = counts.association(&q.prep, &format!("verb:{}", q.verb));
    let (pn, nn) = counts.association(&q.prep, &format!("noun:{}", q.noun1));
    let ts = t_score(pv, nv, pn, nn);
    let verdict = if ts.abs() >= t_threshold && ts != 0.0 {
        if ts > 0.0 {
            Verdict::Verb
        } else {
            Verdict::Noun
        }
    } else {
        Verdict::Undecided
    };
    Decision { verdict, strategy: Strategy::La, evidence: (pv, pn) }
}

/// First decided verdict along `steps`; the last step's decision if none
/// decides.
///
/// # Panics
///
/// If `steps` is empty.
pub fn decide_chain(q: &PPInstance, steps: &[&dyn Fn(&PPInstance) -> Decision]) -> Decision {
    assert!(!steps.is_empty(), "a strategy chain needs at least one step");
    let mut last = None;
    for step in steps {
        let d = step(q);
        if d.verdict.is_decided() {
            return d;
        }
        last = Some(d);
    }
    last.expect("non-empty chain")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DisambigConfig {
    pub t_threshold: f64,
    pub marginal: MarginalScope,
}

impl Default for DisambigConfig {
    fn default() -> Self {
        DisambigConfig { t_threshold: SIGNIFICANCE_95, marginal: MarginalScope::Slot }
    }
}

type Step<'a> = Box<dyn Fn(&PPInstance) -> Decision + 'a>;

/// Everything trained from one corpus, ready to run any strategy.
pub struct Disambiguator<'t> {
    pub thesaurus: &'t Thesaurus,
    pub config: DisambigConfig,
    pub mdl: Mdl2Models,
    pub sa: SaTables,
    pub la: LexicalCounts,
}

impl<'t> Disambiguator<'t> {
    pub fn train(triples: &[TaggedTriple], t: &'t Thesaurus, config: DisambigConfig) -> Self {
        let mut la = LexicalCounts::default();
        for tr in triples {
            la.add(&tr.tagged_head(), &tr.prep, tr.count);
        }
        Disambiguator {
            thesaurus: t,
            config,
            mdl: train_mdl2_models(triples, t),
            sa: SaTables::build(triples, t, config.marginal),
            la,
        }
    }

    fn decide_one(&self, q: &PPInstance, s: Strategy) -> Decision {
        let t = self.thesaurus;
        match s {
            Strategy::Default => decide_default(q),
            Strategy::La => decide_la(q, &self.la, self.config.t_threshold),
            Strategy::Sa => decide_sa(q, &self.sa, t, self.config.t_threshold),
            Strategy::Mdl => decide_mdl(q, &self.mdl.heads, t),
            Strategy::Mdl2 => decide_mdl2(q, &self.mdl, t),
            Strategy::Combined | Strategy::Combined2 => self.decide_chain(q, s.steps()),
        }
    }

    pub fn decide(&self, q: &PPInstance, s: Strategy) -> Decision {
        self.decide_one(q, s)
    }

    pub fn decide_chain(&self, q: &PPInstance, strategies: &[Strategy]) -> Decision {
        let steps: Vec<Step<'_>> =
            strategies.iter().map(|&s| Box::new(move |q: &PPInstance| self.decide_one(q, s)) as Box<_>).collect();
        let refs: Vec<&dyn Fn(&PPInstance) -> Decision> = steps.iter().map(|b| b.as_ref()).collect();
        decide_chain(q, &refs)
    }

    pub fn decide_all(&self, instances: &[PPInstance], s: Strategy) -> Vec<Decision> {
        instances.iter().map(|q| self.decide(q, s)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub n_total: usize,
    pub n_decided: usize,
    pub n_correct: usize,
    /// Percent of instances decided.
    pub coverage: f64,
    /// Percent of decided instances decided correctly (0 when none decided).
    pub accuracy: f64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{decisions} decisions for {instances} instances")]
pub struct LengthMismatch {
    pub decisions: usize,
    pub instances: usize,
}

pub fn evaluate(decisions: &[Decision], gold: &[PPInstance]) -> Result<EvalReport, LengthMismatch> {
    if decisions.len() != gold.len() {
        return Err(LengthMismatch { decisions: decisions.len(), instances: gold.len() });
    }
    let n_total = decisions.len();
    let n_decided = decisions.iter().filter(|d| d.verdict.is_decided()).count();
    let n_correct = decisions.iter().zip(gold).filter(|(d, q)| d.verdict.matches(q.gold)).count();
    let pct = |a: usize, b: usize| if b == 0 { 0.0 } else { 100.0 * a as f64 / b as f64 };
    Ok(EvalReport {
        n_total,
        n_decided,
        n_correct,
        coverage: pct(n_decided, n_total),
        accuracy: pct(n_correct, n_decided),
    })
}

/// Shape and sizes of a synthetic corpus.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SynthSpec {
    /// Children per internal node.
    pub branching: usize,
    /// Depth of the leaves below the root.
    pub depth: usize,
    pub words_per_leaf: usize,
    pub verbs: usize,
    pub preps: usize,
    pub train_size: usize,
    pub test_size: usize,
    /// Mean probability that a phrase attaches to the verb.
    pub verb_attach_prob: f64,
    /// Chance that a planted cut stops at a given internal node.
    pub collapse_prob: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            branching: 3,
            depth: 4,
            words_per_leaf: 1,
            verbs: 12,
            preps: 3,
            train_size: 2000,
            test_size: 200,
            verb_attach_prob: 0.4,
            collapse_prob: 0.4,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("{0} must be at least 1")]
    TooSmall(&'static str),
    #[error("{name} = {value} is not a probability")]
    NotProbability { name: &'static str, value: f64 },
    #[error("tree with branching {branching} and depth {depth} is too large")]
    TooLarge { branching: usize, depth: usize },
}

pub struct SyntheticCorpus {
    pub thesaurus: Thesaurus,
    pub training: Vec<TaggedTriple>,
    pub test: Vec<PPInstance>,
}

const MAX_SYNTH_LEAVES: usize = 1 << 20;

fn synth_tree(spec: &SynthSpec) -> NodeSpec {
    fn build(spec: &SynthSpec, path: &mut Vec<usize>, leaf: &mut usize) -> NodeSpec {
        if path.len() == spec.depth {
            let id = *leaf;
            *leaf += 1;
            let word = format!("n{id}");
            let mut members = vec![word.clone()];
            members.extend((1..spec.words_per_leaf).map(|j| format!("n{id}_{j}")));
            return NodeSpec { label: word, members, children: Vec::new() };
        }
        let children = (0..spec.branching)
            .map(|b| {
                path.push(b);
                let c = build(spec, path, leaf);
                path.pop();
                c
            })
            .collect();
        let label = if path.is_empty() {
            "ROOT".to_string()
        } else {
            format!("C{}", path.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("."))
        };
        NodeSpec::class(&label, children)
    }
    build(spec, &mut Vec::new(), &mut 0)
}

/// A planted tree cut distribution over every word slot, as sampling
/// weights aligned with `words`.
fn planted_distribution(
    t: &Thesaurus,
    words: &[(NodeId, String)],
    collapse: f64,
    rng: &mut ChaCha8Rng,
) -> WeightedIndex<f64> {
    let mut cut = Vec::new();
    let mut i = 0;
    while i < t.len() {
        let node = &t.nodes()[i];
        let stop = node.is_leaf() || (i != 0 && rng.gen_bool(collapse));
        if stop {
            cut.push(node.id);
            i = t.subtree(node.id).end;
        } else {
            i += 1;
        }
    }
    // Heavy-tailed class weights so a few classes dominate.
    let class_weight: Vec<f64> = cut.iter().map(|_| rng.gen::<f64>().powi(4)).collect();
    let weights: Vec<f64> = words
        .iter()
        .map(|(node, _)| {
            let c = cut.iter().position(|&c| t.dominates(c, *node)).expect("cut covers every leaf");
            class_weight[c] / t.node(cut[c]).word_count() as f64 + 1e-12
        })
        .collect();
    WeightedIndex::new(weights).expect("positive weights")
}

fn zipf(n: usize) -> WeightedIndex<f64> {
    WeightedIndex::new((1..=n).map(|r| 1.0 / r as f64)).expect("n >= 1")
}

/// Sample a training corpus and a labeled test set from planted tree cut
/// distributions. Verb heads get one distribution per (verb, preposition);
/// noun heads share one per (top-level class, preposition). Output is fully
/// determined by `spec` and `seed`.
pub fn generate_synthetic(spec: &SynthSpec, seed: u64) -> Result<SyntheticCorpus, SynthError> {
    for (name, v) in [
        ("branching", spec.branching),
        ("depth", spec.depth),
        ("words_per_leaf", spec.words_per_leaf),
        ("verbs", spec.verbs),
        ("preps", spec.preps),
    ] {
        if v == 0 {
            return Err(SynthError::TooSmall(name));
        }
    }
    for (name, value) in [("verb_attach_prob", spec.verb_attach_prob), ("collapse_prob", spec.collapse_prob)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(SynthError::NotProbability { name, value });
        }
    }
    let leaves =
        (0..spec.depth).try_fold(1usize, |acc, _| acc.checked_mul(spec.branching).filter(|&n| n <= MAX_SYNTH_LEAVES));
    if leaves.is_none() {
        return Err(SynthError::TooLarge { branching: spec.branching, depth: spec.depth });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = Thesaurus::from_spec(synth_tree(spec)).expect("generated tree is valid");
    let words: Vec<(NodeId, String)> = t
        .nodes()
        .iter()
        .filter(|n| n.is_leaf())
        .flat_map(|n| n.members.iter().map(move |w| (n.id, w.clone())))
        .collect();
    let verbs: Vec<String> = (0..spec.verbs).map(|i| format!("v{i}")).collect();
    let preps: Vec<String> = (0..spec.preps).map(|i| format!("p{i}")).collect();
    let groups: Vec<NodeId> = t.node(t.root()).children.clone();
    let group_of = |node: NodeId| -> usize { groups.iter().position(|&g| t.dominates(g, node)).unwrap_or(0) };

    let verb_dist: Vec<Vec<WeightedIndex<f64>>> = (0..spec.verbs)
        .map(|_| (0..spec.preps).map(|_| planted_distribution(&t, &words, spec.collapse_prob, &mut rng)).collect())
        .collect();
    let noun_dist: Vec<Vec<WeightedIndex<f64>>> = (0..groups.len().max(1))
        .map(|_| (0..spec.preps).map(|_| planted_distribution(&t, &words, spec.collapse_prob, &mut rng)).collect())
        .collect();
    let p = spec.verb_attach_prob;
    let attach: Vec<Vec<f64>> = (0..spec.verbs)
        .map(|_| (0..spec.preps).map(|_| p + (2.0 * rng.gen::<f64>() - 1.0) * p.min(1.0 - p) * 0.75).collect())
        .collect();

    let mut verb_rank: Vec<usize> = (0..spec.verbs).collect();
    verb_rank.shuffle(&mut rng);
    let mut noun_rank: Vec<usize> = (0..words.len()).collect();
    noun_rank.shuffle(&mut rng);
    let verb_pick = zipf(spec.verbs);
    let noun_pick = zipf(words.len());

    let draw = |rng: &mut ChaCha8Rng| {
        let v = verb_rank[verb_pick.sample(rng)];
        let n1 = noun_rank[noun_pick.sample(rng)];
        let pr = rng.gen_range(0..spec.preps);
        let to_verb = rng.gen_bool(attach[v][pr].clamp(0.0, 1.0));
        let dist = if to_verb { &verb_dist[v][pr] } else { &noun_dist[group_of(words[n1].0)][pr] };
        let n2 = dist.sample(rng);
        let gold = if to_verb { Gold::Verb } else { Gold::Noun };
        PPInstance::new(&verbs[v], &words[n1].1, &preps[pr], &words[n2].1, gold)
    };

    let training = (0..spec.train_size)
        .map(|_| {
            let q = draw(&mut rng);
            match q.gold {
                Gold::Verb => TaggedTriple::new(HeadKind::Verb, &q.verb, &q.prep, &q.noun2),
                _ => TaggedTriple::new(HeadKind::Noun, &q.noun1, &q.prep, &q.noun2),
            }
        })
        .collect();
    let test = (0..spec.test_size).map(|_| draw(&mut rng)).collect();
    Ok(SyntheticCorpus { thesaurus: t, training, test })
}
