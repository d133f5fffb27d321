//! CSV emission: comma-separated with a header row, floats at 17
//! significant digits so files round-trip bit-exactly.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::Result;

/// Full-precision float field: 17 significant digits round-trip f64 exactly.
pub struct F(pub f64);

impl fmt::Display for F {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

pub struct Csv {
    w: BufWriter<File>,
}

impl Csv {
    pub fn create(path: &Path, header: &[&str]) -> Result<Csv> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{}", header.join(","))?;
        Ok(Csv { w })
    }

    pub fn row(&mut self, fields: fmt::Arguments<'_>) -> Result<()> {
        self.w.write_fmt(fields)?;
        writeln!(self.w)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.w.flush()?;
        Ok(())
    }
}

/// Output directory helper.
pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
