//! Tables and text output for the command line.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::cooccur::{assign_frequencies, SlotSample};
use crate::disambig::{EvalReport, Strategy};
use crate::mdl::{describe, model_len, GeneralizationResult, ModelError};
use crate::thesaurus::{count_cuts, enumerate_cuts, CutCount, CutError, Thesaurus};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("too many cuts to list: {count} exceeds the limit of {limit}")]
    TooManyCuts { count: CutCount, limit: u128 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LengthRow {
    pub cut: Vec<String>,
    pub param_len: f64,
    pub data_len: f64,
    pub l_prime: f64,
    pub total: f64,
    pub best: bool,
}

/// Description lengths of every cut of the tree for one sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LengthTable {
    pub head: String,
    pub slot: String,
    pub sample_total: f64,
    pub model_len: f64,
    /// `log2 |S| / 2`, the constant gap between the free-parameter and the
    /// node-count parameter conventions.
    pub offset: f64,
    pub rows: Vec<LengthRow>,
}

/// Enumerate all cuts (at most `limit`) and describe each; the row with the
/// smallest `L'` is marked best.
pub fn length_table(s: &SlotSample, t: &Thesaurus, limit: u128) -> Result<LengthTable, ReportError> {
    let count = count_cuts(t, t.root());
    let cuts = enumerate_cuts(t, t.root(), limit).map_err(|e| match e {
        CutError::LimitExceeded { .. } => ReportError::TooManyCuts { count, limit },
        other => ReportError::Model(other.into()),
    })?;
    let sample_total = assign_frequencies(s, t).total;
    let mut rows = Vec::with_capacity(cuts.len());
    for cut in &cuts {
        let r = describe(cut, s, t)?;
        rows.push(LengthRow {
            cut: cut.nodes.iter().map(|&n| t.label(n).to_string()).collect(),
            param_len: r.param_len,
            data_len: r.data_len,
            l_prime: r.l_prime,
            total: r.total,
            best: false,
        });
    }
    let best =
        rows.iter().enumerate().min_by(|a, b| a.1.l_prime.total_cmp(&b.1.l_prime).then(a.0.cmp(&b.0))).map(|(i, _)| i);
    if let Some(i) = best {
        rows[i].best = true;
    }
    Ok(LengthTable {
        head: s.head.clone(),
        slot: s.slot.clone(),
        sample_total,
        model_len: model_len(t).bits,
        offset: sample_total.log2() / 2.0,
        rows,
    })
}

/// Shortest decimal form: `0.8`, `0.25`, `1`.
pub fn format_prob(p: f64) -> String {
    let s = format!("{p:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".into()
    } else {
        s.to_string()
    }
}

pub fn bracket(labels: &[String]) -> String {
    format!("[{}]", labels.join(", "))
}

pub fn lengths_tsv(table: &LengthTable) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# {} {}  |S| = {}  L_mod = {:.2}",
        table.head,
        table.slot,
        format_prob(table.sample_total),
        table.model_len
    );
    let _ = writeln!(out, "# node-count parameter lengths add log2|S|/2 = {:.2} to every L_par", table.offset);
    out.push_str("cut\tL_par\tL_dat\tL'\tL\tbest\n");
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{}\t{:.2}\t{:.2}\t{:.2}\t{:.2}\t{}",
            bracket(&r.cut),
            r.param_len,
            r.data_len,
            r.l_prime,
            r.total,
            if r.best { "*" } else { "" }
        );
    }
    out
}

pub fn generalization_tsv(r: &GeneralizationResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# {} {}  |S| = {}  threshold = {}  cut = {}",
        r.head,
        r.slot,
        format_prob(r.sample_total),
        format_prob(r.threshold),
        bracket(&r.cut)
    );
    if r.dropped > 0.0 {
        let _ = writeln!(out, "# {} occurrences of words outside the thesaurus ignored", format_prob(r.dropped));
    }
    out.push_str("class\tprobability\texamples\n");
    for e in &r.entries {
        let _ = writeln!(out, "{}\t{}\t{}", e.label, format_prob(e.probability), e.examples.join(","));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrategyReport {
    pub strategy: String,
    #[serde(flatten)]
    pub report: EvalReport,
}

impl StrategyReport {
    pub fn new(strategy: Strategy, report: EvalReport) -> Self {
        StrategyReport { strategy: strategy.name().to_string(), report }
    }
}

pub fn eval_tsv(reports: &[StrategyReport]) -> String {
    let mut out = String::from("strategy\tcoverage\taccuracy\tdecided\tcorrect\ttotal\n");
    for r in reports {
        let e = &r.report;
        let _ = writeln!(
            out,
            "{}\t{:.1}\t{:.1}\t{}\t{}\t{}",
            r.strategy, e.coverage, e.accuracy, e.n_decided, e.n_correct, e.n_total
        );
    }
    out
}

/// Pretty JSON with a trailing newline.
pub fn structured<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
