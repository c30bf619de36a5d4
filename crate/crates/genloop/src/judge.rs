use std::time::Duration;

use worldforge_core::harness::{Judge, JudgeError, Judgement, Transition};

use crate::client::ChatModel;

pub const JUDGE_INSTRUCTION: &str = "You judge whether a step of a text game agrees with everyday physical reality. \
Answer with ALIGNED or MISALIGNED on the first line, then one sentence of justification.";

/// Asks a chat model for a binary verdict on each transition.
pub struct LlmJudge<M> {
    model: M,
    timeout: Duration,
}

impl<M: ChatModel> LlmJudge<M> {
    pub fn new(model: M, timeout: Duration) -> Self {
        Self { model, timeout }
    }
}

pub fn judge_prompt(t: &Transition<'_>) -> String {
    format!(
        "{JUDGE_INSTRUCTION}\n\nBefore: {}\nAction: {}\nObservation: {}\nAfter: {}\n",
        t.before, t.action, t.observation, t.after
    )
}

/// Reads the verdict from the first word of the reply.
pub fn parse_verdict(reply: &str) -> Result<Judgement, JudgeError> {
    let trimmed = reply.trim();
    let first = trimmed.split_whitespace().next().unwrap_or("");
    let word: String = first.chars().filter(|c| c.is_ascii_alphabetic()).collect::<String>().to_ascii_uppercase();
    let aligned = match word.as_str() {
        "ALIGNED" => true,
        "MISALIGNED" => false,
        _ => return Err(JudgeError(format!("unrecognized verdict: {}", trimmed.chars().take(80).collect::<String>()))),
    };
    let justification = trimmed[first.len()..].trim().to_string();
    Ok(Judgement { aligned, justification })
}

impl<M: ChatModel> Judge for LlmJudge<M> {
    fn judge(&self, t: &Transition<'_>) -> Result<Judgement, JudgeError> {
        let reply = self.model.complete(&judge_prompt(t), self.timeout).map_err(|e| JudgeError(e.to_string()))?;
        parse_verdict(&reply)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts() {
        assert!(parse_verdict("ALIGNED\nWater warms on a stove.").unwrap().aligned);
        let m = parse_verdict("**Misaligned**: ice does not float up.").unwrap();
        assert!(!m.aligned);
        assert_eq!(m.justification, "ice does not float up.");
        assert!(parse_verdict("maybe").is_err());
    }
}
