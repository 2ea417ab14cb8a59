use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AgentError;

/// Preference-optimization record: `chosen` is the preferred reply to
/// `prompt`, `rejected` the dispreferred one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferencePair {
    pub prompt: String,
    pub chosen: String,
    pub rejected: String,
    pub annotator: String,
    pub context_snapshot: String,
}

impl PreferencePair {
    pub fn validate(&self) -> Result<(), AgentError> {
        if self.prompt.trim().is_empty() {
            return Err(AgentError::ValidationFailed("preference pair has an empty prompt".into()));
        }
        if self.chosen == self.rejected {
            return Err(AgentError::ValidationFailed("chosen and rejected replies are identical".into()));
        }
        Ok(())
    }
}

fn io(path: &Path, e: impl std::fmt::Display) -> AgentError {
    AgentError::Io(format!("{}: {e}", path.display()))
}

/// Writes one JSON object per line. All pairs are validated before the file
/// is touched.
pub fn export_preference_pairs(pairs: &[PreferencePair], path: &Path) -> Result<usize, AgentError> {
    for (i, p) in pairs.iter().enumerate() {
        p.validate().map_err(|e| AgentError::ValidationFailed(format!("pair {i}: {e}")))?;
    }
    let file = std::fs::File::create(path).map_err(|e| io(path, e))?;
    let mut out = BufWriter::new(file);
    for p in pairs {
        let line = serde_json::to_string(p).map_err(|e| io(path, e))?;
        writeln!(out, "{line}").map_err(|e| io(path, e))?;
    }
    out.flush().map_err(|e| io(path, e))?;
    Ok(pairs.len())
}

pub fn load_preference_pairs(path: &Path) -> Result<Vec<PreferencePair>, AgentError> {
    let file = std::fs::File::open(path).map_err(|e| io(path, e))?;
    let mut pairs = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let pair: PreferencePair = serde_json::from_str(&line).map_err(|e| io(path, format!("line {}: {e}", n + 1)))?;
        pairs.push(pair);
    }
    Ok(pairs)
}
