//! Flat key-value experiment configuration with `[section]` headers.
//!
//! The format is deliberately plain so configs stay human-diffable:
//! full-line `#` comments, `key = value` pairs, repeated keys allowed
//! (used for constraint lists). Values are parsed on demand with errors
//! that name the file, section, key, and line.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use gyre_patrol::Vec2;

#[derive(Debug, Clone)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct Section {
    pub name: String,
    pub entries: Vec<Entry>,
    file: PathBuf,
}

#[derive(Debug, Clone)]
pub struct ConfigFile {
    pub path: PathBuf,
    sections: Vec<Section>,
    /// The raw text, echoed into trajectory metadata.
    pub text: String,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("failed to read config {}", path.display()))?;
        Self::parse(&text, path.to_path_buf())
    }

    pub fn parse(text: &str, path: PathBuf) -> Result<Self> {
        let mut sections: Vec<Section> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(name) = trimmed.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| anyhow!("{}:{line}: unterminated section header", path.display()))?
                    .trim()
                    .to_string();
                if name.is_empty() {
                    bail!("{}:{line}: empty section name", path.display());
                }
                sections.push(Section {
                    name,
                    entries: Vec::new(),
                    file: path.clone(),
                });
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| {
                anyhow!(
                    "{}:{line}: expected 'key = value' or a [section] header, got {trimmed:?}",
                    path.display()
                )
            })?;
            let section = sections.last_mut().ok_or_else(|| {
                anyhow!(
                    "{}:{line}: key {key:?} appears before any [section]",
                    path.display()
                )
            })?;
            section.entries.push(Entry {
                key: key.trim().to_string(),
                value: value.trim().to_string(),
                line,
            });
        }
        Ok(Self {
            path,
            sections,
            text: text.to_string(),
        })
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn require_section(&self, name: &str) -> Result<&Section> {
        self.section(name).ok_or_else(|| {
            anyhow!(
                "{}: missing required section [{name}]",
                self.path.display()
            )
        })
    }
}

impl Section {
    /// Last occurrence wins for single-valued keys.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|e| e.key == key)
            .map(|e| e.value.as_str())
    }

    pub fn get_all(&self, key: &str) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.key == key)
            .map(|e| e.value.as_str())
            .collect()
    }

    fn describe(&self, key: &str) -> String {
        format!("{}: [{}] {key}", self.file.display(), self.name)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| anyhow!("{} is required", self.describe(key)))
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.parse_f64(key, self.require(key)?)
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| self.parse_f64(key, v)).transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| anyhow!("{} is not a count: {v:?}", self.describe(key))),
            None => Ok(default),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            Some(v) => v
                .parse::<u64>()
                .map_err(|_| anyhow!("{} is not an integer: {v:?}", self.describe(key))),
            None => Ok(default),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            Some("true") | Some("yes") | Some("on") => Ok(true),
            Some("false") | Some("no") | Some("off") => Ok(false),
            Some(v) => bail!("{} is not a boolean: {v:?}", self.describe(key)),
            None => Ok(default),
        }
    }

    /// Parses a `x y` pair.
    pub fn opt_vec2(&self, key: &str) -> Result<Option<Vec2>> {
        let Some(raw) = self.get(key) else {
            return Ok(None);
        };
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.len() != 2 {
            bail!(
                "{} expects two numbers 'x y', got {raw:?}",
                self.describe(key)
            );
        }
        Ok(Some(Vec2::new(
            self.parse_f64(key, fields[0])?,
            self.parse_f64(key, fields[1])?,
        )))
    }

    pub fn require_vec2(&self, key: &str) -> Result<Vec2> {
        self.opt_vec2(key)?
            .ok_or_else(|| anyhow!("{} is required", self.describe(key)))
    }

    /// Parses a `lo hi` interval.
    pub fn opt_interval(&self, key: &str) -> Result<Option<(f64, f64)>> {
        let Some(raw) = self.get(key) else {
            return Ok(None);
        };
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.len() != 2 {
            bail!(
                "{} expects two numbers 'lo hi', got {raw:?}",
                self.describe(key)
            );
        }
        let lo = self.parse_f64(key, fields[0])?;
        let hi = self.parse_f64(key, fields[1])?;
        if !(lo < hi) {
            bail!("{} expects lo < hi, got {raw:?}", self.describe(key));
        }
        Ok(Some((lo, hi)))
    }

    fn parse_f64(&self, key: &str, value: &str) -> Result<f64> {
        let parsed: f64 = value
            .parse()
            .map_err(|_| anyhow!("{} is not a number: {value:?}", self.describe(key)))?;
        if !parsed.is_finite() {
            bail!("{} must be finite, got {value:?}", self.describe(key));
        }
        Ok(parsed)
    }
}
