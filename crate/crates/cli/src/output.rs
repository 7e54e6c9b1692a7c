use std::path::{Path, PathBuf};

use crate::failure::Failure;
use crate::{Cli, Format};

/// Path of the config echo written next to a CSV file.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".config.toml");
    PathBuf::from(s)
}

/// Writes the data file, plus the TOML config echo for CSV output.
pub fn write(cli: &Cli, stem: &str, csv: impl FnOnce() -> String, json: impl FnOnce() -> String, echo: &str) -> Result<(), Failure> {
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{stem}.{}", cli.format.extension())));
    let put = |path: &Path, text: &str| {
        std::fs::write(path, text).map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
    };
    match cli.format {
        Format::Csv => {
            put(&out, &csv())?;
            put(&sidecar_path(&out), echo)?;
        }
        Format::Json => put(&out, &json())?,
    }
    log::info!("wrote {}", out.display());
    Ok(())
}
