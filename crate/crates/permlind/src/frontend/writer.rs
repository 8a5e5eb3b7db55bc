//! Column-oriented ASCII output files.
//!
//! Property files carry one row per monitor event: the time followed by one
//! column per observable, 17 significant digits, whitespace separated. The
//! first header line lists the column names; further `#` lines record the
//! system and the assembled terms so a file identifies its run. Distribution
//! files hold one `# t=<time>` block of index/value pairs per monitor event.
//! Reruns with identical inputs produce byte-identical files.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{print_model, ModelDocument};

/// 17 significant digits, plain ASCII scientific notation.
pub fn format_sci(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn header_meta(w: &mut impl Write, doc: &ModelDocument) -> io::Result<()> {
    writeln!(w, "# systems = {}", doc.system.systems)?;
    writeln!(w, "# levels = {}", doc.system.levels)?;
    let energies: Vec<String> = doc.system.energies.iter().map(|e| format!("{e:?}")).collect();
    writeln!(w, "# energies = {}", energies.join(" "))?;
    for m in &doc.system.modes {
        writeln!(w, "# mode {} fock={} energy={:?}", m.name, m.fock, m.energy)?;
    }
    // one line per assembled term, lifted from the canonical print form
    let printed = print_model(doc);
    let mut in_liou = false;
    for line in printed.lines() {
        if line == "[liouvillian]" {
            in_liou = true;
            continue;
        }
        if line.starts_with('[') {
            in_liou = false;
        }
        if in_liou && !line.is_empty() {
            writeln!(w, "# term {line}")?;
        }
    }
    Ok(())
}

pub struct PropWriter {
    w: BufWriter<File>,
    pub path: PathBuf,
}

impl PropWriter {
    pub fn create(dir: &Path, name: &str, labels: &[String], doc: &ModelDocument) -> io::Result<Self> {
        let path = dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "# time {}", labels.join(" "))?;
        header_meta(&mut w, doc)?;
        Ok(Self { w, path })
    }

    pub fn write_row(&mut self, t: f64, values: &[Option<f64>]) -> io::Result<()> {
        write!(self.w, "{}", format_sci(t))?;
        for v in values {
            match v {
                Some(v) => write!(self.w, " {}", format_sci(*v))?,
                None => write!(self.w, " nan")?,
            }
        }
        writeln!(self.w)
    }

    pub fn abort(&mut self, reason: &str) {
        let _ = writeln!(self.w, "# run aborted: {reason}");
        let _ = self.w.flush();
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.w.flush()
    }
}

pub struct DistWriter {
    w: BufWriter<File>,
    pub path: PathBuf,
}

impl DistWriter {
    pub fn create(dir: &Path, name: &str, doc: &ModelDocument) -> io::Result<Self> {
        let path = dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "# index value, one block per monitor event")?;
        header_meta(&mut w, doc)?;
        Ok(Self { w, path })
    }

    pub fn write_block(&mut self, t: f64, values: &[f64]) -> io::Result<()> {
        writeln!(self.w, "# t={}", format_sci(t))?;
        for (i, v) in values.iter().enumerate() {
            writeln!(self.w, "{i} {}", format_sci(*v))?;
        }
        writeln!(self.w)
    }

    pub fn abort(&mut self, reason: &str) {
        let _ = writeln!(self.w, "# run aborted: {reason}");
        let _ = self.w.flush();
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.w.flush()
    }
}
