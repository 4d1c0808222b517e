// Copyright 2026 The gateforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Output directories that appear all at once and never clobber existing
//! files unless asked to.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use crate::UsageError;

/// Files are written into a hidden sibling directory and moved into place by
/// [`OutputDir::commit`]. Dropping without committing discards them.
pub struct OutputDir {
    target: PathBuf,
    staging: PathBuf,
    committed: bool,
}

impl OutputDir {
    pub fn prepare(target: &Path, force: bool) -> Result<Self> {
        if target.exists() {
            if !target.is_dir() {
                return Err(UsageError(format!("{} exists and is not a directory", target.display())).into());
            }
            let non_empty = fs::read_dir(target)?.next().is_some();
            if non_empty && !force {
                return Err(UsageError(format!(
                    "output directory {} is not empty; pass --force to overwrite",
                    target.display()
                ))
                .into());
            }
        }
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).with_context(|| format!("creating {}", parent.display()))?;
        let name = target
            .file_name()
            .map_or_else(|| "out".into(), |n| n.to_string_lossy().into_owned());
        let staging = parent.join(format!(".{name}.partial-{}", std::process::id()));
        if staging.exists() {
            fs::remove_dir_all(&staging)?;
        }
        fs::create_dir(&staging).with_context(|| format!("creating {}", staging.display()))?;
        Ok(Self {
            target: target.to_path_buf(),
            staging,
            committed: false,
        })
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<()> {
        let path = self.staging.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    }

    pub fn commit(mut self) -> Result<PathBuf> {
        if !self.target.exists() {
            fs::rename(&self.staging, &self.target)
                .with_context(|| format!("moving results to {}", self.target.display()))?;
        } else {
            for entry in fs::read_dir(&self.staging)? {
                let entry = entry?;
                let dest = self.target.join(entry.file_name());
                if dest.is_dir() {
                    bail!("{} is a directory", dest.display());
                }
                fs::rename(entry.path(), &dest).with_context(|| format!("writing {}", dest.display()))?;
            }
            fs::remove_dir_all(&self.staging)?;
        }
        self.committed = true;
        Ok(self.target.clone())
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}
