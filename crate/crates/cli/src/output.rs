use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rieszgas::kernel::RadialTable;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::CliError;

/// Collects the files written into one output directory.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf(), written: Vec::new() })
    }

    /// Streams a file through `body` and records its name.
    pub fn write_with<F>(&mut self, name: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
    {
        let mut w = BufWriter::new(File::create(self.root.join(name))?);
        body(&mut w)?;
        w.flush()?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<(), CliError> {
        self.write_with(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)
                .map_err(|e| CliError::Core(rieszgas::Error::Io(e.into())))?;
            writeln!(w)?;
            Ok(())
        })
    }

    /// Writes the resolved config and `manifest.json`; call last.
    pub fn finish(mut self, command: &str, cfg: &ExperimentConfig) -> Result<(), CliError> {
        let text = cfg.to_toml();
        self.write_with("config.toml", |w| Ok(w.write_all(text.as_bytes())?))?;
        let manifest = Manifest {
            command,
            seed: cfg.sampler.seed,
            config_digest: cfg.digest(),
            outputs: &self.written,
        };
        let mut w = BufWriter::new(File::create(self.root.join("manifest.json"))?);
        serde_json::to_writer_pretty(&mut w, &manifest).map_err(|e| CliError::Core(rieszgas::Error::Io(e.into())))?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    seed: u64,
    config_digest: String,
    outputs: &'a [String],
}

/// Reads a `r,V,dV` table as written by `prescribe`.
pub fn read_field_table(path: &Path) -> Result<RadialTable<f64>, CliError> {
    let file = File::open(path).map_err(|e| CliError::Config(format!("cannot open field table {}: {e}", path.display())))?;
    let parse_err = |line: usize, msg: &str| {
        CliError::Core(rieszgas::Error::Parse(format!("{}:{line}: {msg}", path.display())))
    };
    let mut lines = BufReader::new(file).lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != "r,V,dV" {
        return Err(parse_err(1, "expected header r,V,dV"));
    }
    let (mut radii, mut values, mut slopes) = (Vec::new(), Vec::new(), Vec::new());
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| parse_err(k + 2, &e.to_string()))?;
        if cols.len() != 3 {
            return Err(parse_err(k + 2, "expected 3 columns"));
        }
        radii.push(cols[0]);
        values.push(cols[1]);
        slopes.push(cols[2]);
    }
    Ok(RadialTable::new(radii, values, slopes)?)
}

pub fn write_field_table<W: Write>(w: &mut W, table: &RadialTable<f64>) -> Result<(), CliError> {
    writeln!(w, "r,V,dV")?;
    for ((r, v), dv) in table.radii().iter().zip(table.values()).zip(table.slopes()) {
        writeln!(w, "{r:.16e},{v:.16e},{dv:.16e}")?;
    }
    Ok(())
}

/// JSON has no NaN or infinity; those become `null`.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}
