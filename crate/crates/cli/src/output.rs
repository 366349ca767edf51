use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

pub use beamharvest_core::analytic::format_sig17 as fmt;

/// File at `path`, or stdout.
pub fn open(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot write {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// CSV rows followed by `# key=value,...` footer lines.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    footer: Vec<Vec<(String, String)>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            footer: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    /// Appends one `# k=v,...` line.
    pub fn footer(&mut self, pairs: &[(&str, String)]) {
        self.footer
            .push(pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect());
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        let mut out = w.into_inner().map_err(|e| anyhow::anyhow!("{}", e.error()))?;
        for line in &self.footer {
            let body: Vec<String> = line.iter().map(|(k, v)| format!("{k}={v}")).collect();
            writeln!(out, "# {}", body.join(","))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_to(&self, path: Option<&Path>) -> Result<()> {
        self.write(open(path)?)
    }
}
