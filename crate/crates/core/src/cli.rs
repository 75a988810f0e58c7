//! Command-line interface.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::assoc::{MarginalScope, SIGNIFICANCE_95};
use crate::cooccur::{parse_triples, slot_sample};
use crate::disambig::{
    evaluate, generate_synthetic, parse_pp_instances, parse_training, write_pp_instances, write_training,
    DisambigConfig, Disambiguator, Strategy, SynthSpec,
};
use crate::mdl::{generalize_sample, GeneralizeConfig, ModelError, DEFAULT_THRESHOLD};
use crate::report::{
    eval_tsv, format_prob, generalization_tsv, length_table, lengths_tsv, structured, ReportError, StrategyReport,
};
use crate::thesaurus::{parse_thesaurus, prune_observed_subtrees, Thesaurus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 2;
pub const EXIT_EMPTY_SAMPLE: i32 = 3;
pub const EXIT_ENUM_LIMIT: i32 = 4;
pub const EXIT_BAD_STRATEGY: i32 = 5;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  unreadable or malformed input, bad flags
  3  the requested (head, slot) sample is empty
  4  more cuts than --enum-limit
  5  unknown --strategy";

#[derive(Parser, Debug)]
#[command(name = "treecut", version, about = "Generalize case slots with MDL tree cut models and disambiguate PP attachment.", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generalize the values of one (head, slot) pair to thesaurus classes.
    Generalize(GeneralizeArgs),
    /// Print the description lengths of every cut for one (head, slot) pair.
    Lengths(LengthsArgs),
    /// Train on tagged triples and score PP-attachment test instances.
    Ppattach(PpattachArgs),
    /// Write a synthetic thesaurus, training corpus and test set.
    Synth(SynthArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Structured,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Marginal {
    Slot,
    Global,
}

#[derive(Args, Debug)]
struct SlotArgs {
    #[arg(long)]
    thesaurus: PathBuf,
    #[arg(long)]
    triples: PathBuf,
    #[arg(long)]
    head: String,
    #[arg(long)]
    slot: String,
    /// Collapse subtrees below nodes that directly carry an observed word.
    #[arg(long)]
    prune: bool,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
}

#[derive(Args, Debug)]
struct GeneralizeArgs {
    #[command(flatten)]
    slot: SlotArgs,
    /// Classes below this probability are not listed.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Example words per class.
    #[arg(long, default_value_t = 3)]
    examples: usize,
}

#[derive(Args, Debug)]
struct LengthsArgs {
    #[command(flatten)]
    slot: SlotArgs,
    /// Refuse trees with more cuts than this.
    #[arg(long, default_value_t = 1_000_000)]
    enum_limit: u128,
}

#[derive(Args, Debug)]
struct PpattachArgs {
    #[arg(long)]
    thesaurus: PathBuf,
    /// Training triples with `verb:` / `noun:` tagged heads.
    #[arg(long)]
    triples: PathBuf,
    /// Test instances: verb, noun1, prep, noun2, gold (v|n|?).
    #[arg(long)]
    test: PathBuf,
    /// One of default, la, sa, mdl, mdl2, combined, combined2. All when omitted.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long, default_value_t = SIGNIFICANCE_95)]
    t_threshold: f64,
    /// Marginal used by selectional association.
    #[arg(long, value_enum, default_value_t = Marginal::Slot)]
    marginal: Marginal,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
    /// Also print the decision for every instance.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Output path for the thesaurus.
    #[arg(long)]
    thesaurus: PathBuf,
    /// Output path for the tagged training triples.
    #[arg(long)]
    triples: PathBuf,
    /// Output path for the test instances.
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    train_size: usize,
    #[arg(long, default_value_t = 200)]
    test_size: usize,
    #[arg(long, default_value_t = 3)]
    branching: usize,
    #[arg(long, default_value_t = 4)]
    depth: usize,
    #[arg(long, default_value_t = 12)]
    verbs: usize,
    #[arg(long, default_value_t = 3)]
    preps: usize,
    #[arg(long, default_value_t = 0.4)]
    verb_attach_prob: f64,
}

/// An error carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Outcome {
    std::fs::write(path, contents).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, text: &str) -> Outcome {
    out.write_all(text.as_bytes()).map_err(|e| Failure::new(EXIT_IO, format!("writing output: {e}")))
}

fn load_thesaurus(path: &Path) -> Result<Thesaurus, Failure> {
    parse_thesaurus(&read(path)?).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn model_failure(e: ModelError) -> Failure {
    match e {
        ModelError::EmptySample | ModelError::SampleTooSmall(_) => Failure::new(EXIT_EMPTY_SAMPLE, e.to_string()),
        other => Failure::new(EXIT_IO, other.to_string()),
    }
}

/// Load the thesaurus and the (head, slot) sample, pruning if asked.
fn load_sample(a: &SlotArgs) -> Result<(Thesaurus, crate::cooccur::SlotSample), Failure> {
    let t = load_thesaurus(&a.thesaurus)?;
    let triples = parse_triples(&read(&a.triples)?)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", a.triples.display())))?;
    let s = slot_sample(&triples, &a.head, &a.slot);
    if s.is_empty() {
        return Err(Failure::new(EXIT_EMPTY_SAMPLE, format!("no triples for head `{}` and slot `{}`", a.head, a.slot)));
    }
    let t = if a.prune {
        let observed: HashSet<&str> = s.freq.keys().map(String::as_str).collect();
        prune_observed_subtrees(&t, &observed)
    } else {
        t
    };
    Ok((t, s))
}

fn cmd_generalize(a: &GeneralizeArgs, out: &mut dyn Write) -> Outcome {
    if !(0.0..=1.0).contains(&a.threshold) {
        return Err(Failure::new(EXIT_IO, format!("--threshold {} is outside [0, 1]", a.threshold)));
    }
    let (t, s) = load_sample(&a.slot)?;
    let cfg = GeneralizeConfig { threshold: a.threshold, examples: a.examples };
    let r = generalize_sample(&s, &t, &cfg).map_err(model_failure)?;
    let text = match a.slot.format {
        Format::Tsv => generalization_tsv(&r),
        Format::Structured => structured(&r),
    };
    emit(out, &text)
}

fn cmd_lengths(a: &LengthsArgs, out: &mut dyn Write) -> Outcome {
    let (t, s) = load_sample(&a.slot)?;
    let table = length_table(&s, &t, a.enum_limit).map_err(|e| match e {
        ReportError::TooManyCuts { count, limit } => {
            Failure::new(EXIT_ENUM_LIMIT, format!("the tree has {count} cuts, more than --enum-limit {limit}"))
        }
        ReportError::Model(m) => model_failure(m),
    })?;
    let text = match a.slot.format {
        Format::Tsv => lengths_tsv(&table),
        Format::Structured => structured(&table),
    };
    emit(out, &text)
}

fn cmd_ppattach(a: &PpattachArgs, out: &mut dyn Write) -> Outcome {
    let strategies: Vec<Strategy> = match &a.strategy {
        Some(name) => vec![name.parse().map_err(|e| Failure::new(EXIT_BAD_STRATEGY, format!("{e}")))?],
        None => Strategy::ALL.to_vec(),
    };
    let t = load_thesaurus(&a.thesaurus)?;
    let training = parse_training(&read(&a.triples)?)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", a.triples.display())))?;
    let test =
        parse_pp_instances(&read(&a.test)?).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", a.test.display())))?;
    let marginal = match a.marginal {
        Marginal::Slot => MarginalScope::Slot,
        Marginal::Global => MarginalScope::Global,
    };
    let d = Disambiguator::train(&training, &t, DisambigConfig { t_threshold: a.t_threshold, marginal });

    let mut reports = Vec::new();
    let mut details = String::new();
    for &s in &strategies {
        let decisions = d.decide_all(&test, s);
        let report = evaluate(&decisions, &test).expect("one decision per instance");
        if a.verbose {
            for (q, dec) in test.iter().zip(&decisions) {
                details.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    s,
                    q.verb,
                    q.noun1,
                    q.prep,
                    q.noun2,
                    dec.verdict.name(),
                    dec.strategy,
                    format_prob(dec.evidence.0),
                    format_prob(dec.evidence.1)
                ));
            }
        }
        reports.push(StrategyReport::new(s, report));
    }
    match a.format {
        Format::Tsv => {
            if a.verbose {
                emit(out, "# strategy\tverb\tnoun1\tprep\tnoun2\tverdict\tdecided_by\tverb_score\tnoun_score\n")?;
                emit(out, &details)?;
            }
            emit(out, &eval_tsv(&reports))
        }
        Format::Structured => emit(out, &structured(&reports)),
    }
}

fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> Outcome {
    let spec = SynthSpec {
        branching: a.branching,
        depth: a.depth,
        verbs: a.verbs,
        preps: a.preps,
        train_size: a.train_size,
        test_size: a.test_size,
        verb_attach_prob: a.verb_attach_prob,
        ..SynthSpec::default()
    };
    let corpus = generate_synthetic(&spec, a.seed).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    write_file(&a.thesaurus, &corpus.thesaurus.to_text())?;
    write_file(&a.triples, &write_training(&corpus.training))?;
    write_file(&a.test, &write_pp_instances(&corpus.test))?;
    emit(
        out,
        &format!(
            "wrote {} nodes, {} training triples, {} test instances (seed {})\n",
            corpus.thesaurus.len(),
            corpus.training.len(),
            corpus.test.len(),
            a.seed
        ),
    )
}

/// Run the command line `args` (program name first) and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match &cli.command {
        Command::Generalize(a) => cmd_generalize(a, out),
        Command::Lengths(a) => cmd_lengths(a, out),
        Command::Ppattach(a) => cmd_ppattach(a, out),
        Command::Synth(a) => cmd_synth(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "treecut: {}", f.message);
            f.code
        }
    }
}
