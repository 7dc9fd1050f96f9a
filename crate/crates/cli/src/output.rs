use std::io::Write;
use std::path::PathBuf;

use serde_json::Value;

use crate::CliError;

/// Seventeen significant digits, `.` decimal.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text from a header and numeric rows.
pub fn csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.iter().map(|&v| num(v)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

/// Writes artifacts into `--out`, or to stdout when no directory was given.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Self { dir })
    }

    pub fn to_stdout(&self) -> bool {
        self.dir.is_none()
    }

    /// Data file. On stdout only the data is printed.
    pub fn data(&self, name: &str, body: &str) -> Result<(), CliError> {
        match &self.dir {
            Some(d) => std::fs::write(d.join(name), body)?,
            None => std::io::stdout().lock().write_all(body.as_bytes())?,
        }
        Ok(())
    }

    /// Metadata sidecar; skipped on stdout so that the data stays parseable.
    pub fn metadata(&self, name: &str, meta: &Value) -> Result<(), CliError> {
        if let Some(d) = &self.dir {
            let mut text = serde_json::to_string_pretty(meta).expect("metadata is plain JSON");
            text.push('\n');
            std::fs::write(d.join(name), text)?;
        }
        Ok(())
    }
}
