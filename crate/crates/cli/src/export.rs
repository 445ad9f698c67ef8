//! Selecting and copying the tables of a finished run.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;
use crate::run::{RunRecord, Status};

/// Table paths of the selected analysis, or of every completed one for
/// `"all"`. With `to`, the tables are copied there and the copies returned.
pub fn export_tables(run_dir: &Path, which: &str, to: Option<&Path>) -> Result<Vec<PathBuf>, CliError> {
    let record = RunRecord::load(run_dir)?;
    let completed: Vec<&str> = record
        .analyses
        .iter()
        .filter(|a| a.status == Status::Ok)
        .map(|a| a.name.as_str())
        .collect();
    let selected: Vec<&str> = if which == "all" {
        completed.clone()
    } else {
        match record.analysis(which) {
            Some(a) if a.status == Status::Ok => vec![which],
            Some(a) => {
                return Err(CliError::NotFound(format!(
                    "analysis '{which}' failed in this run: {}",
                    a.diagnostic.as_deref().unwrap_or("no diagnostic")
                )))
            }
            None => return Err(CliError::NotFound(not_found_message(which, &completed))),
        }
    };
    let mut out = Vec::new();
    for name in selected {
        let a = record.analysis(name).expect("selected from the record");
        for t in &a.tables {
            let src = run_dir.join(t);
            match to {
                None => out.push(src),
                Some(dest) => {
                    fs::create_dir_all(dest).map_err(|e| CliError::Io(format!("{}: {e}", dest.display())))?;
                    let target = dest.join(t);
                    fs::copy(&src, &target).map_err(|e| CliError::Io(format!("{}: {e}", src.display())))?;
                    out.push(target);
                }
            }
        }
    }
    Ok(out)
}

fn not_found_message(which: &str, available: &[&str]) -> String {
    let mut ranked: Vec<(f64, &str)> = available
        .iter()
        .map(|a| (strsim::jaro_winkler(which, a), *a))
        .filter(|(score, _)| *score >= 0.7)
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut msg = format!(
        "no analysis named '{which}' in this run; available: {}",
        if available.is_empty() {
            "none".to_string()
        } else {
            available.join(", ")
        }
    );
    if !ranked.is_empty() {
        let names: Vec<&str> = ranked.iter().map(|(_, n)| *n).collect();
        msg.push_str(&format!("; did you mean {}?", names.join(" or ")));
    }
    msg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suggestions_rank_close_names() {
        let m = not_found_message("consistncy", &["moderateness", "consistency"]);
        assert!(m.contains("did you mean consistency?"), "{m}");
        assert!(m.contains("available: moderateness, consistency"));
        let far = not_found_message("zzz", &["audit"]);
        assert!(!far.contains("did you mean"));
    }
}
