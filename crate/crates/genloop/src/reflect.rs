use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use tracing::info;

use worldforge_core::harness::{check_validity, ValidityOptions, ValidityReport};

use crate::client::{ChatModel, LlmClientError};
use crate::config::ClientConfig;
use crate::prompt::{assemble_prompt, extract_source, reflection_prompt, PromptBundle};

/// One generation or reflection round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GenerationRecord {
    pub round: u32,
    pub prompt_text: String,
    pub token_estimate: usize,
    pub response_text: String,
    pub extracted_source: String,
    pub validity: ValidityReport,
    /// The error fed to the next round, if any.
    pub first_error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LoopOutcome {
    pub records: Vec<GenerationRecord>,
    /// Set when a client error cut the loop short.
    pub error: Option<LlmClientError>,
}

impl LoopOutcome {
    pub fn final_record(&self) -> Option<&GenerationRecord> {
        self.records.last()
    }

    pub fn succeeded(&self) -> bool {
        self.final_record().is_some_and(|r| r.validity.runnable_ok)
    }
}

/// Directory that receives every prompt, response, and record of one run.
#[derive(Clone, Debug)]
pub struct RunStore {
    dir: PathBuf,
}

impl RunStore {
    /// Creates `<root>/<UTC timestamp>/`.
    pub fn create(root: impl AsRef<Path>) -> std::io::Result<Self> {
        let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.6fZ").to_string();
        let mut dir = root.as_ref().join(&stamp);
        let mut n = 1;
        while dir.exists() {
            dir = root.as_ref().join(format!("{stamp}-{n}"));
            n += 1;
        }
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn open(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// A sub-store for one game of a multi-spec run.
    pub fn child(&self, name: &str) -> std::io::Result<Self> {
        Self::open(self.dir.join(name))
    }

    fn write_record(&self, r: &GenerationRecord) -> std::io::Result<()> {
        let base = self.dir.join(format!("round-{}", r.round));
        std::fs::write(base.with_extension("prompt.txt"), &r.prompt_text)?;
        std::fs::write(base.with_extension("response.txt"), &r.response_text)?;
        std::fs::write(base.with_extension("wg"), &r.extracted_source)?;
        std::fs::write(base.with_extension("validity.json"), to_json(&r.validity))
    }

    fn write_outcome(&self, outcome: &LoopOutcome) -> std::io::Result<()> {
        std::fs::write(self.dir.join("records.json"), to_json(outcome))
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("records serialize");
    s.push('\n');
    s
}

/// Generates a game, then keeps feeding back the first detected error and
/// asking for a complete rewrite until the game runs cleanly or
/// `config.max_rounds` reflections have been made.
pub fn reflect_loop(
    model: &dyn ChatModel,
    config: &ClientConfig,
    bundle: &PromptBundle,
    validity: &ValidityOptions,
    store: Option<&RunStore>,
) -> std::io::Result<LoopOutcome> {
    let deadline = Instant::now() + config.per_game_timeout();
    let mut outcome = LoopOutcome { records: Vec::new(), error: None };
    for round in 0..=config.max_rounds {
        let prompt = match outcome.records.last() {
            None => assemble_prompt(bundle),
            Some(prev) => match &prev.first_error {
                Some(err) => reflection_prompt(bundle, &prev.extracted_source, err),
                None => break,
            },
        };
        let remaining = deadline.saturating_duration_since(Instant::now());
        let response = match model.complete(&prompt.text, remaining) {
            Ok(r) => r,
            Err(e) => {
                outcome.error = Some(e);
                break;
            }
        };
        let source = extract_source(&response);
        let report = check_validity(&source, validity);
        let first_error = if report.runnable_ok { None } else { Some(error_text(&report)) };
        info!(round, runnable = report.runnable_ok, faults = report.faults.len(), "generation round");
        let record = GenerationRecord {
            round,
            prompt_text: prompt.text,
            token_estimate: prompt.token_estimate,
            response_text: response,
            extracted_source: source,
            validity: report,
            first_error,
        };
        if let Some(store) = store {
            store.write_record(&record)?;
        }
        outcome.records.push(record);
    }
    if let Some(store) = store {
        store.write_outcome(&outcome)?;
    }
    Ok(outcome)
}

fn error_text(report: &ValidityReport) -> String {
    match report.first_error() {
        Some(f) => f.to_string(),
        None => "the game could not be run".to_string(),
    }
}

/// Runs one loop per bundle with at most `config.max_in_flight` loops (and
/// so requests) active at a time. Outcomes come back in input order.
pub fn reflect_many(
    model: &dyn ChatModel,
    config: &ClientConfig,
    bundles: &[(String, PromptBundle)],
    validity: &ValidityOptions,
    store: Option<&RunStore>,
) -> std::io::Result<Vec<LoopOutcome>> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<std::io::Result<LoopOutcome>>>> =
        Mutex::new((0..bundles.len()).map(|_| None).collect());
    let workers = config.max_in_flight.max(1).min(bundles.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((name, bundle)) = bundles.get(i) else { break };
                let result = match store.map(|s| s.child(name)).transpose() {
                    Ok(child) => reflect_loop(model, config, bundle, validity, child.as_ref()),
                    Err(e) => Err(e),
                };
                results.lock().expect("results lock")[i] = Some(result);
            });
        }
    });
    results.into_inner().expect("results lock").into_iter().map(|r| r.expect("every bundle ran")).collect()
}
