//! Output sinks. Every file starts with a metadata line carrying the model,
//! seed and config hash; numbers are written in full double precision so
//! reruns with the same seed are byte-identical.

use crate::config::{ExperimentConfig, OutputKind};
use serde_json::{Map, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

pub struct RunMeta {
    pub model: String,
    pub seed: u64,
    pub config_hash: String,
}

impl RunMeta {
    pub fn new(cfg: &ExperimentConfig, seed: u64) -> Self {
        let model = match cfg.model {
            crate::config::ModelKind::SpinSpin => "spin_spin",
            crate::config::ModelKind::SpinFermion => "spin_fermion",
        };
        RunMeta { model: model.to_string(), seed, config_hash: cfg.hash() }
    }

    fn comment_line(&self) -> String {
        format!("# model={} seed={} config_hash={}", self.model, self.seed, self.config_hash)
    }
}

/// Full-precision scientific notation with '.' separator.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.17e}")
}

pub struct CsvTable {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: Vec<&'static str>) -> Self {
        CsvTable { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn render(&self, meta: &RunMeta) -> String {
        let mut out = String::new();
        out.push_str(&meta.comment_line());
        out.push('\n');
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Summary in the fixed schema {model, seed, config_hash, estimates{},
/// targets{}, discrepancies{}} plus command-specific extras.
pub struct Summary {
    pub estimates: Map<String, Value>,
    pub targets: Map<String, Value>,
    pub discrepancies: Map<String, Value>,
    pub extra: Map<String, Value>,
}

impl Summary {
    pub fn new() -> Self {
        Summary {
            estimates: Map::new(),
            targets: Map::new(),
            discrepancies: Map::new(),
            extra: Map::new(),
        }
    }

    pub fn render(&self, meta: &RunMeta) -> String {
        let mut root = Map::new();
        root.insert("model".into(), Value::String(meta.model.clone()));
        root.insert("seed".into(), Value::from(meta.seed));
        root.insert("config_hash".into(), Value::String(meta.config_hash.clone()));
        root.insert("estimates".into(), Value::Object(self.estimates.clone()));
        root.insert("targets".into(), Value::Object(self.targets.clone()));
        root.insert("discrepancies".into(), Value::Object(self.discrepancies.clone()));
        for (k, v) in &self.extra {
            root.insert(k.clone(), v.clone());
        }
        serde_json::to_string_pretty(&Value::Object(root)).expect("summary serializes") + "\n"
    }
}

pub fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

/// Write the rendered CSV/JSON payloads to every configured sink, joined
/// under `out_dir` when given. Files are only created after all content is
/// rendered, so failed runs leave nothing behind.
pub fn write_outputs(
    cfg: &ExperimentConfig,
    out_dir: Option<&Path>,
    csv: Option<&str>,
    json: Option<&str>,
) -> anyhow::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for sink in &cfg.outputs {
        let payload = match sink.kind {
            OutputKind::Csv => csv,
            OutputKind::Json => json,
        };
        let Some(payload) = payload else { continue };
        let path = match out_dir {
            Some(dir) => dir.join(&sink.path),
            None => PathBuf::from(&sink.path),
        };
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let mut f = std::fs::File::create(&path)?;
        f.write_all(payload.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
