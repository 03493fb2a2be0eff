use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::Serialize;

/// Writes artifacts into a directory, or the main artifact to stdout.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
        }
        Ok(Self { dir })
    }

    /// The command's main result: a file under the output directory, else stdout.
    pub fn primary(&self, name: &str, content: &str) -> Result<()> {
        match &self.dir {
            Some(_) => self.extra(name, content),
            None => {
                let mut out = std::io::stdout().lock();
                let written = out.write_all(content.as_bytes()).and_then(|_| {
                    if content.ends_with('\n') { Ok(()) } else { out.write_all(b"\n") }
                });
                match written {
                    // a closed downstream pipe (e.g. `| head`) is not a failure
                    Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                    r => Ok(r?),
                }
            }
        }
    }

    /// Secondary artifacts, written only when an output directory is set.
    pub fn extra(&self, name: &str, content: &str) -> Result<()> {
        if let Some(d) = &self.dir {
            let path = d.join(name);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

pub fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
