//! Expected verdicts: one `rule axiom pass|fail` triple per line.

use std::path::Path;

use thiserror::Error;

use reward_axioms::{AllocationRule, Axiom, AxiomVerdict, Rule};

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Syntax {
        path: String,
        line: usize,
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expectation {
    /// Label of the rule as verdicts report it.
    pub rule: String,
    pub axiom: Axiom,
    pub pass: bool,
}

pub fn parse_manifest(text: &str, path: &str) -> Result<Vec<Expectation>, ManifestError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: String| ManifestError::Syntax {
            path: path.to_string(),
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [rule, axiom, verdict] = fields[..] else {
            return Err(syntax(format!(
                "expected `rule axiom pass|fail`, got `{line}`"
            )));
        };
        let rule: AllocationRule = rule.parse().map_err(|e| syntax(format!("{e}")))?;
        let axiom: Axiom = axiom
            .parse()
            .map_err(|_| syntax(format!("unknown axiom `{axiom}`")))?;
        let pass = match verdict {
            "pass" => true,
            "fail" => false,
            other => return Err(syntax(format!("expected pass or fail, got `{other}`"))),
        };
        out.push(Expectation {
            rule: rule.label(),
            axiom,
            pass,
        });
    }
    Ok(out)
}

pub fn read_manifest(path: &Path) -> Result<Vec<Expectation>, ManifestError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: shown.clone(),
        source,
    })?;
    parse_manifest(&text, &shown)
}

/// Human-readable mismatches; empty when every expectation holds.
pub fn mismatches<'a>(
    expectations: &[Expectation],
    verdicts: impl Iterator<Item = &'a AxiomVerdict> + Clone,
) -> Vec<String> {
    expectations
        .iter()
        .filter_map(|e| {
            match verdicts
                .clone()
                .find(|v| v.rule == e.rule && v.axiom == e.axiom)
            {
                None => Some(format!("{} {}: no verdict produced", e.rule, e.axiom)),
                Some(v) if v.passed() != e.pass => Some(format!(
                    "{} {}: expected {}, got {}",
                    e.rule,
                    e.axiom,
                    if e.pass { "pass" } else { "fail" },
                    if v.passed() { "pass" } else { "fail" }
                )),
                Some(_) => None,
            }
        })
        .collect()
}
