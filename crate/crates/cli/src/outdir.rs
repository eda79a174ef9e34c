//! Output-directory bookkeeping: files are registered as they are created
//! and swept away unless the run commits, so a failed command never leaves
//! partial outputs behind.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
    committed: bool,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)
            .with_context(|| format!("creating output directory {}", root.display()))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            written: Vec::new(),
            committed: false,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Open `name` for writing and remember it for failure cleanup.
    pub fn create_file(&mut self, name: &str) -> Result<Box<dyn Write>> {
        let path = self.path(name);
        let file = File::create(&path)
            .with_context(|| format!("creating output file {}", path.display()))?;
        self.written.push(path);
        Ok(Box::new(BufWriter::new(file)))
    }

    pub fn outputs(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        if !self.committed {
            for path in &self.written {
                let _ = std::fs::remove_file(path);
            }
        }
    }
}
