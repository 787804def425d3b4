//! CSV and JSON artifacts. Every CSV opens with `# <config as JSON>`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use serde::Serialize;
use serde_json::Value;

/// Round-trip exact, 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<I>(path: &Path, echo: &Value, header: &[&str], rows: I) -> anyhow::Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# {}", serde_json::to_string(echo)?)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// A CSV written by [`write_csv`]: its config echo and numeric rows by column name.
pub struct Table {
    pub echo: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> anyhow::Result<Vec<f64>> {
        let k = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("missing column `{name}`"))?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn read_csv(path: &Path) -> anyhow::Result<Table> {
    let file = File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let echo = match first.strip_prefix('#') {
        Some(json) => serde_json::from_str(json.trim())
            .with_context(|| format!("bad config line in {}", path.display()))?,
        None => bail!(
            "{} does not start with a `# {{config}}` line",
            path.display()
        ),
    };
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    let rows = r
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec?;
            rec.iter()
                .map(|f| {
                    f.trim().parse::<f64>().with_context(|| {
                        format!(
                            "{}: row {} has non-numeric field `{f}`",
                            path.display(),
                            i + 1
                        )
                    })
                })
                .collect()
        })
        .collect::<anyhow::Result<_>>()?;
    Ok(Table { echo, header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, 0.0] {
            let s = num(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            assert_eq!(s.trim_start_matches('-').find('e'), Some(18));
        }
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let echo = serde_json::json!({"size": 11});
        write_csv(&p, &echo, &["a", "b"], vec![vec![num(1.5), num(-2.0)]]).unwrap();
        let t = read_csv(&p).unwrap();
        assert_eq!(t.echo, echo);
        assert_eq!(t.column("b").unwrap(), vec![-2.0]);
        assert!(t.column("c").is_err());
    }
}
