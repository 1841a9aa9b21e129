//! Deterministic CSV and meta-file writers.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

/// 17 significant digits, so every f64 round-trips.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        // + 0.0 folds -0 into 0
        format!("{:.16e}", x + 0.0)
    }
}

pub struct Csv {
    header: &'static str,
    rows: Vec<String>,
}

impl Csv {
    pub fn new(header: &'static str) -> Self {
        Self { header, rows: vec![] }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.rows.push(fields.join(","));
    }

    /// Writes `# config_hash=<hash>` then the header then the rows.
    pub fn write(&self, dir: &Path, name: &str, hash: &str) -> io::Result<PathBuf> {
        let path = dir.join(name);
        let mut text = format!("# config_hash={hash}\n{}\n", self.header);
        for r in &self.rows {
            text.push_str(r);
            text.push('\n');
        }
        fs::write(&path, text)?;
        Ok(path)
    }
}

/// The resolved config as TOML behind comment lines; the file parses back to the same config.
pub fn write_meta(dir: &Path, hash: &str, notes: &[(String, String)], canonical: &str) -> io::Result<PathBuf> {
    let path = dir.join("meta.toml");
    let mut f = fs::File::create(&path)?;
    writeln!(f, "# config_hash = {hash}")?;
    for (k, v) in notes {
        writeln!(f, "# {k} = {v}")?;
    }
    writeln!(f)?;
    f.write_all(canonical.as_bytes())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.trim_start_matches('-').split('e').next().unwrap().replace('.', "");
            assert_eq!(mantissa.len(), 17, "{s}");
        }
        assert_eq!(num(f64::NAN), "NaN");
        assert_eq!(num(-0.0), num(0.0));
    }
}
