//! Reading inputs and routing output between files, stdout and stderr.
//!
//! An artifact goes to `-o` when given. Without `-o` it is the whole of
//! stdout in text mode (the summary moves to stderr) and an extra key of the
//! report in JSON mode.

use super::Outcome;
use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let s = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&s).with_context(|| format!("cannot parse {}", path.display()))
}

pub struct Emit {
    json: bool,
    output: Option<PathBuf>,
    /// Artifact not written to a file: its key and its printed form.
    pending: Option<(&'static str, Value, String)>,
}

impl Emit {
    pub fn new(json: bool, output: Option<PathBuf>) -> Self {
        Emit {
            json,
            output,
            pending: None,
        }
    }

    pub fn artifact<T: Serialize>(self, key: &'static str, value: &T) -> Result<Self> {
        let v = serde_json::to_value(value)?;
        let text = serde_json::to_string_pretty(&v)? + "\n";
        self.place(key, v, text)
    }

    pub fn text_artifact(self, key: &'static str, text: String) -> Result<Self> {
        self.place(key, Value::String(text.clone()), text)
    }

    fn place(mut self, key: &'static str, v: Value, text: String) -> Result<Self> {
        match &self.output {
            Some(p) => fs::write(p, &text).with_context(|| format!("cannot write {}", p.display()))?,
            None => self.pending = Some((key, v, text)),
        }
        Ok(self)
    }

    pub fn finish(self, report: Value, text: String) -> Result<Outcome> {
        self.finish_with(report, text, true)
    }

    pub fn finish_with(self, mut report: Value, text: String, ok: bool) -> Result<Outcome> {
        if self.json {
            if let (Some((key, v, _)), Value::Object(map)) = (self.pending, &mut report) {
                map.insert(key.to_string(), v);
            }
            out(&(serde_json::to_string(&report)? + "\n"))?;
        } else if let Some((_, _, body)) = self.pending {
            out(&body)?;
            eprintln!("{text}");
        } else {
            out(&(text + "\n"))?;
        }
        Ok(Outcome { ok })
    }
}

/// Write to stdout; a reader that went away is not an error.
fn out(s: &str) -> Result<()> {
    let mut lock = io::stdout().lock();
    match lock.write_all(s.as_bytes()).and_then(|_| lock.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}
