//! CSV writers and the run manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use globalprop::signal::format_sig17;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// One CSV cell. Floats carry 17 significant digits so files are exact.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(usize),
    Float(f64),
    Text(String),
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<Option<usize>> for Cell {
    fn from(v: Option<usize>) -> Self {
        v.map_or(Cell::Empty, Cell::Int)
    }
}

fn render(cell: &Cell) -> String {
    match cell {
        Cell::Int(v) => v.to_string(),
        Cell::Float(x) => format_sig17(*x),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `header` and `rows` to `path`. Header entries name the column
/// and its unit, e.g. `t[a.u.]`.
pub fn write_csv<I>(path: &Path, header: &[String], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<Cell>>,
{
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    let body = || -> std::io::Result<()> {
        writeln!(out, "{}", header.join(","))?;
        for row in rows {
            let line: Vec<String> = row.iter().map(render).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        out.flush()
    };
    body().map_err(io_err(path))
}

/// Collects the files of one run into a directory.
#[derive(Debug)]
pub struct Emitter {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Emitter {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, CliError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(Self {
            dir,
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<Cell>>,
    {
        let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
        self.csv_owned(name, &header, rows)
    }

    pub fn csv_owned<I>(&mut self, name: &str, header: &[String], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<Cell>>,
    {
        let path = self.dir.join(name);
        write_csv(&path, header, rows)?;
        self.written.push(path);
        Ok(())
    }

    pub fn text(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(io_err(&path))?;
        self.written.push(path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Provenance record: inputs hash, versions, thread count, timings and
/// the files produced.
#[derive(Debug, Default)]
pub struct Manifest {
    pub command: String,
    /// Canonical text of every input that determines the outputs.
    pub inputs: String,
    pub timings: Vec<(String, f64)>,
    pub notes: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str, inputs: String) -> Self {
        Self {
            command: command.to_string(),
            inputs,
            ..Self::default()
        }
    }

    pub fn time(&mut self, phase: &str, seconds: f64) {
        self.timings.push((phase.to_string(), seconds));
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self, outputs: &[PathBuf]) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: &str| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(v);
            s.push('\n');
        };
        kv("command", &self.command);
        kv("config_sha256", &sha256_hex(&self.inputs));
        kv("globalprop_cli_version", env!("CARGO_PKG_VERSION"));
        kv(
            "platform",
            &format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS),
        );
        kv("threads", &rayon::current_num_threads().to_string());
        for (k, v) in &self.notes {
            kv(k, v);
        }
        for (phase, secs) in &self.timings {
            kv(&format!("seconds.{phase}"), &format!("{secs:.6}"));
        }
        for path in outputs {
            kv("output", &path.display().to_string());
        }
        s.push_str("\n# inputs\n");
        for line in self.inputs.lines() {
            s.push_str("# ");
            s.push_str(line);
            s.push('\n');
        }
        s
    }

    /// Writes `manifest.txt` into the emitter's directory.
    pub fn finish(&self, emitter: &mut Emitter) -> Result<PathBuf, CliError> {
        let text = self.render(emitter.written());
        emitter.text("manifest.txt", &text)?;
        Ok(emitter.dir().join("manifest.txt"))
    }

    /// Writes the manifest next to a single output file.
    pub fn finish_beside(&self, output: &Path) -> Result<PathBuf, CliError> {
        let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".manifest.txt");
        let path = output.with_file_name(name);
        fs::write(&path, self.render(&[output.to_path_buf()])).map_err(io_err(&path))?;
        Ok(path)
    }
}
