use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Where and how a command writes its files. Every file carries the config
/// hash and library version; JSON files also carry the config verbatim.
#[derive(Debug, Clone)]
pub struct OutputSink {
    pub dir: PathBuf,
    pub config_hash: String,
    pub config_text: String,
    pub seed: u64,
}

/// Write `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

impl OutputSink {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// `body` is the CSV without provenance lines.
    pub fn csv(&self, name: &str, body: &str) -> Result<PathBuf> {
        let text = format!("# config_hash: {}\n# version: {VERSION}\n{body}", self.config_hash);
        let p = self.path(name);
        write_atomic(&p, text.as_bytes())?;
        Ok(p)
    }

    pub fn json(&self, name: &str, command: &str, payload: Value) -> Result<PathBuf> {
        let mut m = Map::new();
        m.insert("command".into(), command.into());
        m.insert("version".into(), VERSION.into());
        m.insert("config_hash".into(), self.config_hash.clone().into());
        m.insert("config".into(), self.config_text.clone().into());
        m.insert("seed".into(), self.seed.into());
        match payload {
            Value::Object(o) => m.extend(o),
            other => {
                m.insert("result".into(), other);
            }
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(m)).expect("json values always serialize");
        text.push('\n');
        let p = self.path(name);
        write_atomic(&p, text.as_bytes())?;
        Ok(p)
    }
}

/// CSV from a header and rows of numbers at full precision.
pub fn numeric_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| crate::trajectory::fmt_f64(*v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/a.csv");
        write_atomic(&p, b"x").unwrap();
        write_atomic(&p, b"y").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "y");
        let names: Vec<_> = fs::read_dir(dir.path().join("sub")).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn provenance_lines() {
        let dir = tempfile::tempdir().unwrap();
        let sink =
            OutputSink { dir: dir.path().into(), config_hash: "abc".into(), config_text: "seed = 1\n".into(), seed: 1 };
        let p = sink.csv("t.csv", &numeric_csv(&["a", "b"], [vec![1.0, 0.1]])).unwrap();
        let text = fs::read_to_string(p).unwrap();
        assert!(text.starts_with("# config_hash: abc\n# version: "));
        assert!(text.contains("1.0000000000000001e-1"));
        let p = sink.json("r.json", "x", serde_json::json!({"pass": true})).unwrap();
        let v: Value = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
        assert_eq!(v["config"], "seed = 1\n");
        assert_eq!(v["pass"], true);
    }
}
