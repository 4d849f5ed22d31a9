//! Turning a raw model output into a 0/1 score against an answer key.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::bank::normalize_answer;

const CHOICES: &[char] = &['A', 'B', 'C', 'D'];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grade {
    pub score: u8,
    /// Set when no answer could be extracted; the score is then 0.
    pub warning: Option<String>,
}

impl Grade {
    fn correct(ok: bool) -> Self {
        Self {
            score: ok as u8,
            warning: None,
        }
    }

    fn failed(msg: String) -> Self {
        log::warn!("{msg}");
        Self {
            score: 0,
            warning: Some(msg),
        }
    }
}

/// A deterministic scoring rule. Implementations must never panic on
/// arbitrary model output.
pub trait Grader: Send + Sync {
    fn grade(&self, raw_output: &str, answer_key: &str) -> Grade;
}

/// Multiple-choice letter extraction.
///
/// The output is normalized (full-width folded, uppercased) and split into
/// maximal runs of ASCII letters. For a single-letter key the first run
/// that is exactly one of `A`..`D` is the answer. For a multi-letter key the
/// answer is the first group of choice-only runs separated by punctuation
/// or whitespace, compared as a set.
#[derive(Debug, Clone, Copy, Default)]
pub struct ChoiceLetter;

/// Whole-string equality after normalization.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactMatch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradingRule {
    #[default]
    ChoiceLetter,
    Exact,
}

impl GradingRule {
    pub fn grader(self) -> &'static dyn Grader {
        match self {
            GradingRule::ChoiceLetter => &ChoiceLetter,
            GradingRule::Exact => &ExactMatch,
        }
    }
}

impl fmt::Display for GradingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GradingRule::ChoiceLetter => "choice-letter",
            GradingRule::Exact => "exact",
        })
    }
}

impl FromStr for GradingRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "choice-letter" => Ok(GradingRule::ChoiceLetter),
            "exact" => Ok(GradingRule::Exact),
            other => Err(format!("unknown grading rule {other:?} (expected choice-letter or exact)")),
        }
    }
}

impl Grader for GradingRule {
    fn grade(&self, raw_output: &str, answer_key: &str) -> Grade {
        self.grader().grade(raw_output, answer_key)
    }
}

fn key_letters(key: &str) -> BTreeSet<char> {
    normalize_answer(key).chars().filter(|c| CHOICES.contains(c)).collect()
}

/// Half-open index ranges of maximal ASCII-letter runs.
fn letter_runs(text: &[char]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut i = 0;
    while i < text.len() {
        if text[i].is_ascii_alphabetic() {
            let start = i;
            while i < text.len() && text[i].is_ascii_alphabetic() {
                i += 1;
            }
            runs.push((start, i));
        } else {
            i += 1;
        }
    }
    runs
}

fn is_choice_run(chars: &[char]) -> bool {
    !chars.is_empty() && chars.iter().all(|c| CHOICES.contains(c))
}

impl ChoiceLetter {
    /// Returns the extracted answer letters, or `None` when nothing matches.
    pub fn extract(&self, raw_output: &str, multi: bool) -> Option<BTreeSet<char>> {
        let text: Vec<char> = normalize_answer(raw_output).chars().collect();
        let runs = letter_runs(&text);
        if !multi {
            return runs
                .iter()
                .find(|&&(s, e)| e - s == 1 && CHOICES.contains(&text[s]))
                .map(|&(s, _)| BTreeSet::from([text[s]]));
        }
        let first = runs.iter().position(|&(s, e)| is_choice_run(&text[s..e]))?;
        let mut letters: BTreeSet<char> = text[runs[first].0..runs[first].1].iter().copied().collect();
        let mut prev_end = runs[first].1;
        for &(s, e) in &runs[first + 1..] {
            let gap_is_separator = text[prev_end..s]
                .iter()
                .all(|c| c.is_whitespace() || matches!(c, ',' | '、' | '，' | '/' | ';' | '；' | '&' | '+'));
            if !gap_is_separator || !is_choice_run(&text[s..e]) {
                break;
            }
            letters.extend(text[s..e].iter().copied());
            prev_end = e;
        }
        Some(letters)
    }
}

impl Grader for ChoiceLetter {
    fn grade(&self, raw_output: &str, answer_key: &str) -> Grade {
        let key = key_letters(answer_key);
        if key.is_empty() {
            return Grade::failed(format!("answer key {answer_key:?} has no choice letters"));
        }
        match self.extract(raw_output, key.len() > 1) {
            Some(found) => Grade::correct(found == key),
            None => Grade::failed(format!("no choice letter found in output {raw_output:?}")),
        }
    }
}

impl Grader for ExactMatch {
    fn grade(&self, raw_output: &str, answer_key: &str) -> Grade {
        let out = normalize_answer(raw_output);
        if out.is_empty() {
            return Grade::failed("empty output".into());
        }
        Grade::correct(out == normalize_answer(answer_key))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn choice_letter_examples() {
        let g = ChoiceLetter;
        assert_eq!(g.grade("答案：B", "B").score, 1);
        assert_eq!(g.grade("I think the answer is C", "B").score, 0);
        assert_eq!(g.grade("B。理由是……", "B").score, 1);
        assert_eq!(g.grade("answer: b", "B").score, 1);
        assert_eq!(g.grade("选Ｂ", "B").score, 1);
    }

    #[test]
    fn extraction_regex_on_fixture_corpus() {
        // (output, expected extracted letter)
        let corpus = [
            ("答案：B", Some('B')),
            ("B。理由是……", Some('B')),
            ("The correct option is (D).", Some('D')),
            ("I think the answer is C", Some('C')),
            ("正确答案是A选项", Some('A')),
            ("ABOUT this question, B", Some('B')),
            ("不知道", None),
        ];
        for (raw, want) in corpus {
            let got = ChoiceLetter.extract(raw, false).map(|s| *s.iter().next().unwrap());
            assert_eq!(got, want, "{raw}");
        }
    }

    #[test]
    fn multi_select_is_order_insensitive() {
        let g = ChoiceLetter;
        assert_eq!(g.grade("答案：DB", "BD").score, 1);
        assert_eq!(g.grade("答案：D、B", "B,D").score, 1);
        assert_eq!(g.grade("答案：B", "BD").score, 0);
        assert_eq!(g.grade("ABD", "BD").score, 0);
    }

    #[test]
    fn extraction_failure_scores_zero_with_warning() {
        let grade = ChoiceLetter.grade("我无法回答", "B");
        assert_eq!(grade.score, 0);
        assert!(grade.warning.is_some());
    }

    #[test]
    fn exact_rule() {
        assert_eq!(ExactMatch.grade(" 42 ", "42").score, 1);
        assert_eq!(ExactMatch.grade("43", "42").score, 0);
        assert_eq!("exact".parse::<GradingRule>().unwrap(), GradingRule::Exact);
        assert!("fuzzy".parse::<GradingRule>().is_err());
    }
}
