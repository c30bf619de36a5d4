//! Per-game reports and corpus aggregation.

use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::alignment::{histogram_bin, sample_alignment, AlignmentOptions, AlignmentReport, Judge};
use super::compliance::{check_compliance, ComplianceReport};
use super::validity::{check_validity, ValidityOptions, ValidityReport};
use super::winnability::{search_winnable, SearchOptions, WinnabilityResult};
use super::{Fraction, HARNESS_VERSION};
use crate::corpus::{list_corpus, CorpusError};
use crate::dsl::check;
use crate::engine::Game;
use crate::spec::{load_spec, TaskSpecification};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalOptions {
    pub seed: u64,
    pub depth: usize,
    pub branch_cap: usize,
    pub search: SearchOptions,
    pub trajectories: usize,
    pub alignment_depth: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { seed: 42, depth: 3, branch_cap: 100, search: SearchOptions::default(), trajectories: 100, alignment_depth: 3 }
    }
}

impl EvalOptions {
    pub fn validity(&self) -> ValidityOptions {
        ValidityOptions { depth: self.depth, branch_cap: self.branch_cap, seed: self.seed }
    }

    pub fn alignment(&self) -> AlignmentOptions {
        AlignmentOptions { trajectories: self.trajectories, depth: self.alignment_depth, seed: self.seed }
    }
}

/// Everything the harness found out about one game. Wall-clock timings are
/// kept out of the serialized form so report files stay byte-identical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EvalReport {
    pub game_id: String,
    pub seed: u64,
    pub harness_version: String,
    pub validity: ValidityReport,
    pub compliance: Option<ComplianceReport>,
    pub winnability: Option<WinnabilityResult>,
    pub alignment: Option<AlignmentReport>,
    #[serde(skip)]
    pub timings: Timings,
}

/// Wall-clock time per phase. Always compares equal, like its absence from
/// the serialized report.
#[derive(Clone, Debug, Default)]
pub struct Timings(pub Vec<(String, Duration)>);

impl PartialEq for Timings {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

pub fn evaluate_game(
    game_id: &str,
    source: &str,
    spec: Option<&TaskSpecification>,
    judge: &dyn Judge,
    opts: &EvalOptions,
) -> EvalReport {
    let mut timings = Vec::new();
    let mut timed = |phase: &str, start: Instant| timings.push((phase.to_string(), start.elapsed()));

    let t = Instant::now();
    let validity = check_validity(source, &opts.validity());
    timed("validity", t);

    let def = check(source).ok();
    let t = Instant::now();
    let compliance = match (&def, spec) {
        (Some(def), Some(spec)) => Some(check_compliance(def, spec)),
        _ => None,
    };
    timed("compliance", t);

    let (mut winnability, mut alignment) = (None, None);
    if let (true, Some(def)) = (validity.init_ok, def) {
        let game = Game::new(def);
        let t = Instant::now();
        winnability = search_winnable(&game, &opts.search, opts.seed).ok();
        timed("winnability", t);
        let t = Instant::now();
        alignment = sample_alignment(&game, judge, &opts.alignment()).ok();
        timed("alignment", t);
    }
    EvalReport {
        game_id: game_id.to_string(),
        seed: opts.seed,
        harness_version: HARNESS_VERSION.to_string(),
        validity,
        compliance,
        winnability,
        alignment,
        timings: Timings(timings),
    }
}

/// A passing fraction with its percentage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub passed: usize,
    pub total: usize,
    pub percent: f64,
}

impl From<Fraction> for Rate {
    fn from(f: Fraction) -> Self {
        Rate { passed: f.passed, total: f.total, percent: f.ratio() * 100.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CorpusSummary {
    pub games: Vec<String>,
    pub seed: u64,
    pub harness_version: String,
    pub init_ok: Rate,
    pub valid_actions_ok: Rate,
    pub runnable_ok: Rate,
    pub winnable: Rate,
    /// Mean fraction of task-critical objects matched (games with a spec).
    pub mean_object_compliance: f64,
    pub mean_action_compliance: f64,
    /// Games whose distractors all matched.
    pub distractors_matched: Rate,
    pub mean_alignment: f64,
    /// Counts per alignment bin `[k/10, (k+1)/10)`, last bin closed.
    pub alignment_histogram: [usize; 10],
}

fn rate(reports: &[EvalReport], pass: impl Fn(&EvalReport) -> bool) -> Rate {
    Fraction { passed: reports.iter().filter(|r| pass(r)).count(), total: reports.len() }.into()
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub fn summarize(reports: &[EvalReport], seed: u64) -> CorpusSummary {
    let mut histogram = [0usize; 10];
    for a in reports.iter().filter_map(|r| r.alignment.as_ref()) {
        histogram[histogram_bin(a.score)] += 1;
    }
    let with_spec: Vec<&ComplianceReport> = reports.iter().filter_map(|r| r.compliance.as_ref()).collect();
    CorpusSummary {
        games: reports.iter().map(|r| r.game_id.clone()).collect(),
        seed,
        harness_version: HARNESS_VERSION.to_string(),
        init_ok: rate(reports, |r| r.validity.init_ok),
        valid_actions_ok: rate(reports, |r| r.validity.valid_actions_ok),
        runnable_ok: rate(reports, |r| r.validity.runnable_ok),
        winnable: rate(reports, |r| r.winnability.as_ref().is_some_and(|w| w.winnable)),
        mean_object_compliance: mean(with_spec.iter().map(|c| c.objects.ratio())),
        mean_action_compliance: mean(with_spec.iter().map(|c| c.actions.ratio())),
        distractors_matched: rate(reports, |r| r.compliance.as_ref().is_some_and(|c| c.distractors.complete())),
        mean_alignment: mean(reports.iter().filter_map(|r| r.alignment.as_ref()).map(|a| a.score)),
        alignment_histogram: histogram,
    }
}

/// `bin_low,bin_high,count` rows for the ten alignment bins.
pub fn histogram_csv(histogram: &[usize; 10]) -> String {
    let mut out = String::from("bin_low,bin_high,count\n");
    for (k, count) in histogram.iter().enumerate() {
        out.push_str(&format!("{:.1},{:.1},{count}\n", k as f64 / 10.0, (k + 1) as f64 / 10.0));
    }
    out
}

#[derive(Clone, Debug)]
pub struct CorpusEvaluation {
    pub reports: Vec<EvalReport>,
    pub summary: CorpusSummary,
}

impl CorpusEvaluation {
    /// Writes `<game>.report.json`, `corpus-summary.json`, and `histogram.csv`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for r in &self.reports {
            std::fs::write(dir.join(format!("{}.report.json", r.game_id)), to_json(r))?;
        }
        std::fs::write(dir.join("corpus-summary.json"), to_json(&self.summary))?;
        std::fs::write(dir.join("histogram.csv"), histogram_csv(&self.summary.alignment_histogram))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Evaluates every entry under `dir` on up to `jobs` threads. Results are
/// merged in name order regardless of completion order.
pub fn evaluate_corpus(
    dir: &Path,
    judge: &dyn Judge,
    opts: &EvalOptions,
    include_negative: bool,
    jobs: usize,
) -> Result<CorpusEvaluation, CorpusError> {
    let entries: Vec<_> = list_corpus(dir)?.into_iter().filter(|e| include_negative || !e.is_negative()).collect();
    let mut inputs = Vec::with_capacity(entries.len());
    for e in &entries {
        let source = std::fs::read_to_string(&e.game_file)
            .map_err(|source| CorpusError::Io { path: e.game_file.display().to_string(), source })?;
        let spec = load_spec(&e.spec_file).map_err(|source| CorpusError::Spec { name: e.name.clone(), source })?;
        inputs.push((e.name.clone(), source, spec));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().expect("thread pool");
    let reports: Vec<EvalReport> = pool.install(|| {
        inputs.par_iter().map(|(name, source, spec)| evaluate_game(name, source, Some(spec), judge, opts)).collect()
    });
    let summary = summarize(&reports, opts.seed);
    Ok(CorpusEvaluation { reports, summary })
}
