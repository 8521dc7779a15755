//! Directory datasets: one subdirectory per person, named by its label,
//! holding that person's PNG/PNM images.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const IMAGE_EXTENSIONS: [&str; 4] = ["png", "ppm", "pgm", "pnm"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetEntry {
    pub label: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub root: PathBuf,
    /// Sorted by label, then file name.
    pub entries: Vec<DatasetEntry>,
}

fn sorted_dir(path: &Path) -> Result<Vec<PathBuf>> {
    let mut out = std::fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(path, err)))
        .collect::<Result<Vec<_>>>()?;
    out.sort();
    Ok(out)
}

fn is_image(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

impl Dataset {
    /// Lists every image under the root. Files directly under the root and
    /// non-image files are ignored.
    pub fn scan(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref();
        if !root.is_dir() {
            return Err(Error::InvalidInput(format!(
                "dataset root {} is not a directory",
                root.display()
            )));
        }
        let mut entries = Vec::new();
        for dir in sorted_dir(root)?.into_iter().filter(|p| p.is_dir()) {
            let label = dir
                .file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| Error::InvalidInput(format!("non UTF-8 person directory {}", dir.display())))?
                .to_string();
            for path in sorted_dir(&dir)?.into_iter().filter(|p| is_image(p)) {
                entries.push(DatasetEntry {
                    label: label.clone(),
                    path,
                });
            }
        }
        if entries.is_empty() {
            return Err(Error::InvalidInput(format!("no images found under {}", root.display())));
        }
        Ok(Self {
            root: root.to_path_buf(),
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct labels in sorted order.
    pub fn persons(&self) -> Vec<String> {
        let mut labels: Vec<String> = self.entries.iter().map(|e| e.label.clone()).collect();
        labels.dedup();
        labels
    }
}
