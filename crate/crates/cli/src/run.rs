//! Run orchestration: content-addressed run directories, concurrent
//! analyses, atomic table writes and the run record.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analyses::{run_analysis, AnalysisOutput, Context};
use crate::error::CliError;
use crate::scenario::{LoadedScenario, TOOL_VERSION};
use crate::tables::write_atomic;

pub const RECORD_FILE: &str = "record.json";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const OUTPUT_ROOT_ENV: &str = "VWLAB_OUTPUT_ROOT";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Recompute even when an identical run exists.
    pub force: bool,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Output root; takes precedence over the scenario's `output_dir`.
    pub output_root: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRecord {
    pub name: String,
    pub status: Status,
    pub verdict: Option<String>,
    pub values: Vec<(String, String)>,
    /// Table file names relative to the run directory.
    pub tables: Vec<String>,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario_name: String,
    pub scenario_hash: String,
    pub tool_version: String,
    /// Unix seconds.
    pub started: u64,
    pub finished: u64,
    pub analyses: Vec<AnalysisRecord>,
    /// Set when an existing run was found and nothing was recomputed.
    #[serde(skip)]
    pub reused: bool,
    #[serde(skip)]
    pub directory: PathBuf,
}

impl RunRecord {
    pub fn failed(&self) -> Vec<&AnalysisRecord> {
        self.analyses.iter().filter(|a| a.status == Status::Failed).collect()
    }

    pub fn analysis(&self, name: &str) -> Option<&AnalysisRecord> {
        self.analyses.iter().find(|a| a.name == name)
    }

    pub fn load(dir: &Path) -> Result<RunRecord, CliError> {
        let path = dir.join(RECORD_FILE);
        let text = fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut r: RunRecord =
            serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        r.directory = dir.to_path_buf();
        Ok(r)
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Root under which run directories are created.
pub fn output_root(sc: &LoadedScenario, opts: &RunOptions) -> PathBuf {
    if let Some(root) = &opts.output_root {
        return root.clone();
    }
    let base = sc.path.parent().unwrap_or(Path::new("."));
    match &sc.scenario.output_dir {
        Some(dir) => base.join(dir),
        None => base.join("vwlab-runs"),
    }
}

pub fn run_dir_name(sc: &LoadedScenario) -> String {
    format!("{}-{}", sc.scenario.name, &sc.hash[..12])
}

/// Runs every requested analysis, or reuses an identical earlier run.
pub fn run_scenario(sc: &LoadedScenario, opts: &RunOptions) -> Result<RunRecord, CliError> {
    let dir = output_root(sc, opts).join(run_dir_name(sc));
    if !opts.force {
        if let Ok(mut existing) = RunRecord::load(&dir) {
            if existing.scenario_hash == sc.hash && existing.tool_version == TOOL_VERSION {
                existing.reused = true;
                return Ok(existing);
            }
        }
    }
    fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let started = now();
    let names = sc.scenario.analyses.requested();
    let ctx = Context::new(sc);
    let work = || -> Vec<Result<AnalysisOutput, String>> {
        names.par_iter().map(|n| run_analysis(n, &ctx)).collect()
    };
    let outputs = match opts.jobs {
        None => work(),
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?
            .install(work),
    };

    let mut records = Vec::new();
    for (name, out) in names.iter().zip(outputs) {
        records.push(match out {
            Ok(out) => {
                let mut files = Vec::new();
                for t in &out.tables {
                    let bytes = t.to_bytes(&sc.hash, TOOL_VERSION)?;
                    write_atomic(&dir.join(t.file_name()), &bytes)?;
                    files.push(t.file_name());
                }
                AnalysisRecord {
                    name: name.to_string(),
                    status: Status::Ok,
                    verdict: Some(out.verdict),
                    values: out.values,
                    tables: files,
                    diagnostic: None,
                }
            }
            Err(why) => AnalysisRecord {
                name: name.to_string(),
                status: Status::Failed,
                verdict: None,
                values: Vec::new(),
                tables: Vec::new(),
                diagnostic: Some(why),
            },
        });
    }
    let record = RunRecord {
        scenario_name: sc.scenario.name.clone(),
        scenario_hash: sc.hash.clone(),
        tool_version: TOOL_VERSION.to_string(),
        started,
        finished: now(),
        analyses: records,
        reused: false,
        directory: dir.clone(),
    };
    write_atomic(&dir.join(SUMMARY_FILE), summary(&record).as_bytes())?;
    let json = serde_json::to_vec_pretty(&record).map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&dir.join(RECORD_FILE), &json)?;
    Ok(record)
}

/// Key-value summary: one `key = value` line each.
pub fn summary(r: &RunRecord) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario = {}", r.scenario_name);
    let _ = writeln!(s, "scenario_hash = {}", r.scenario_hash);
    let _ = writeln!(s, "tool_version = {}", r.tool_version);
    for a in &r.analyses {
        let status = match a.status {
            Status::Ok => "ok",
            Status::Failed => "failed",
        };
        let _ = writeln!(s, "{}.status = {status}", a.name);
        if let Some(v) = &a.verdict {
            let _ = writeln!(s, "{}.verdict = {v}", a.name);
        }
        for (k, v) in &a.values {
            let _ = writeln!(s, "{}.{k} = {v}", a.name);
        }
        for t in &a.tables {
            let _ = writeln!(s, "{}.table = {t}", a.name);
        }
        if let Some(d) = &a.diagnostic {
            let _ = writeln!(s, "{}.diagnostic = {}", a.name, d.replace('\n', " "));
        }
    }
    s
}
