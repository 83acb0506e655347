use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub id: String,
    pub raw_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_path: Option<PathBuf>,
    pub split: Split,
    #[serde(default)]
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub entries: Vec<Entry>,
}

pub const FLAG_MISSING: &str = "missing";

impl Manifest {
    /// Loads a manifest, resolving paths against its directory. Entries whose
    /// files do not exist gain the `missing` flag.
    pub fn load(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut m: Manifest = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut ids = BTreeSet::new();
        for e in &mut m.entries {
            if !ids.insert(e.id.clone()) {
                bail!("duplicate manifest id `{}`", e.id);
            }
            let mut missing = false;
            for p in std::iter::once(&mut e.raw_path).chain(e.canonical_path.as_mut()).chain(e.mesh_path.as_mut()) {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
                missing |= !p.exists();
            }
            if missing && !e.flags.iter().any(|f| f == FLAG_MISSING) {
                e.flags.push(FLAG_MISSING.into());
            }
        }
        Ok(m)
    }

    /// One test-split entry per `.fs` file of a directory, sorted by name.
    pub fn from_dir(dir: &Path) -> Result<Manifest> {
        let entries = fs_files(dir)?
            .into_iter()
            .map(|p| Entry {
                id: stem(&p),
                raw_path: p,
                canonical_path: None,
                mesh_path: None,
                split: Split::Test,
                flags: Vec::new(),
            })
            .collect();
        Ok(Manifest { entries })
    }
}

pub fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Files with one of `exts` directly inside `dir`, sorted by path.
pub fn files_with(dir: &Path, exts: &[&str]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).with_context(|| format!("reading directory {}", dir.display()))? {
        let p = e?.path();
        if p.is_file() && p.extension().and_then(|x| x.to_str()).is_some_and(|x| exts.contains(&x)) {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

pub fn fs_files(dir: &Path) -> Result<Vec<PathBuf>> {
    files_with(dir, &["fs"])
}
