//! Text output formats: fixed-precision CSV tables, JSON documents and
//! atomic file writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::ddseq::PulseSchedule;
use crate::error::{Error, Result};
use crate::scalar::{to_f64, Real};
use crate::twirl::{MeasureAtom, TwirlMeasure, TwirlVariant};

/// Locale-independent float with 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Comma-separated table with a header row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::DimensionMismatch {
                left: row.len(),
                right: self.header.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        out
    }

    /// Rows as JSON objects keyed by the header; cells that parse as numbers
    /// become numbers.
    pub fn to_json(&self) -> serde_json::Value {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let obj = self
                    .header
                    .iter()
                    .zip(r)
                    .map(|(k, v)| (k.clone(), json_cell(v)))
                    .collect::<serde_json::Map<_, _>>();
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::Value::Array(rows)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::domain("empty table"))?
            .split(',')
            .map(str::to_string)
            .collect::<Vec<_>>();
        let mut table = CsvTable {
            header,
            rows: Vec::new(),
        };
        for line in lines {
            table.push(line.split(',').map(str::to_string).collect())?;
        }
        Ok(table)
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::domain(format!("missing column '{name}'")))
    }
}

fn json_cell(v: &str) -> serde_json::Value {
    if let Ok(i) = v.parse::<i64>() {
        return i.into();
    }
    match v.parse::<f64>() {
        Ok(f) if f.is_finite() => {
            serde_json::Number::from_f64(f).map_or_else(|| v.into(), serde_json::Value::Number)
        }
        _ => match v {
            "true" => true.into(),
            "false" => false.into(),
            _ => v.into(),
        },
    }
}

/// Writes `contents` to a temporary file next to `path` and renames it into
/// place, so a failed run never leaves a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn measure_table<T: Real>(measure: &TwirlMeasure<T>) -> CsvTable {
    let mut t = CsvTable::new([
        "n",
        "m",
        "weight_numerator",
        "weight_denominator",
        "weight_float",
    ]);
    let den = measure.denominator();
    let den_f = big_to_f64(den);
    for a in measure.exact_atoms() {
        t.push(vec![
            a.n.to_string(),
            a.m.to_string(),
            a.numerator.to_string(),
            den.to_string(),
            fmt_float(big_to_f64(&a.numerator) / den_f),
        ])
        .expect("row width");
    }
    t
}

fn big_to_f64(x: &BigUint) -> f64 {
    num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::INFINITY)
}

/// Rebuilds an exact measure from [`measure_table`] output.
pub fn parse_measure_table<T: Real>(text: &str, variant: TwirlVariant) -> Result<TwirlMeasure<T>> {
    let t = CsvTable::parse(text)?;
    let (cn, cm, cw, cd) = (
        t.column("n")?,
        t.column("m")?,
        t.column("weight_numerator")?,
        t.column("weight_denominator")?,
    );
    let bad = |what: &str, v: &str| Error::domain(format!("bad {what} '{v}'"));
    let mut atoms = Vec::with_capacity(t.rows().len());
    let mut den: Option<BigUint> = None;
    for r in t.rows() {
        let d: BigUint = r[cd].parse().map_err(|_| bad("denominator", &r[cd]))?;
        if den.as_ref().is_some_and(|x| *x != d) {
            return Err(Error::domain("rows disagree on the denominator"));
        }
        den = Some(d);
        atoms.push(MeasureAtom {
            n: r[cn].parse().map_err(|_| bad("n", &r[cn]))?,
            m: r[cm].parse().map_err(|_| bad("m", &r[cm]))?,
            numerator: r[cw].parse().map_err(|_| bad("numerator", &r[cw]))?,
        });
    }
    TwirlMeasure::from_atoms(
        atoms,
        den.ok_or_else(|| Error::domain("empty measure table"))?,
        variant,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleHeader {
    #[serde(rename = "N")]
    pub level: u32,
    pub shift_set: String,
    #[serde(rename = "M")]
    pub entries: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ScheduleRow {
    pub k: usize,
    pub n: i64,
    pub m: i64,
    pub Q_re: f64,
    pub Q_im: f64,
    pub P_re: f64,
    pub P_im: f64,
    /// Exact integers as decimal strings; they outgrow 64 bits at large `N`.
    pub tau_num: String,
    pub tau_den: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub header: ScheduleHeader,
    pub entries: Vec<ScheduleRow>,
}

pub fn schedule_doc<T: Real>(sched: &PulseSchedule<T>) -> ScheduleDoc {
    ScheduleDoc {
        header: ScheduleHeader {
            level: sched.level(),
            shift_set: sched.shift_set().name().to_string(),
            entries: sched.len(),
        },
        entries: sched
            .entries()
            .iter()
            .enumerate()
            .map(|(k, e)| ScheduleRow {
                k: k + 1,
                n: e.vertex.0,
                m: e.vertex.1,
                Q_re: to_f64(e.q.re()),
                Q_im: to_f64(e.q.im()),
                P_re: to_f64(e.p.re()),
                P_im: to_f64(e.p.im()),
                tau_num: e.tau_num.to_string(),
                tau_den: e.tau_den.to_string(),
            })
            .collect(),
    }
}

pub fn schedule_table<T: Real>(sched: &PulseSchedule<T>) -> CsvTable {
    let mut t = CsvTable::new([
        "k", "n", "m", "Q_re", "Q_im", "P_re", "P_im", "tau_num", "tau_den",
    ]);
    for r in schedule_doc(sched).entries {
        t.push(vec![
            r.k.to_string(),
            r.n.to_string(),
            r.m.to_string(),
            fmt_float(r.Q_re),
            fmt_float(r.Q_im),
            fmt_float(r.P_re),
            fmt_float(r.P_im),
            r.tau_num,
            r.tau_den,
        ])
        .expect("row width");
    }
    t
}

/// Pretty JSON with a trailing newline.
pub fn render_json<S: Serialize>(value: &S) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Error::Numeric(format!("JSON encoding failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddseq::{pulse_schedule, ShiftSet};
    use crate::twirl::twirl_measure;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(fmt_float(0.25), "2.5000000000000000e-1");
        assert_eq!(fmt_float(-1.0 / 3.0), "-3.3333333333333331e-1");
        assert_eq!(fmt_float(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn measure_round_trip_is_exact() {
        for n in [1, 2, 7] {
            let m = twirl_measure::<f64>(n, TwirlVariant::Logical).unwrap();
            let text = measure_table(&m).render();
            let back = parse_measure_table::<f64>(&text, TwirlVariant::Logical).unwrap();
            assert_eq!(back.exact_atoms(), m.exact_atoms());
            assert_eq!(back.denominator(), m.denominator());
            assert_eq!(back.level(), n);
        }
        assert!(parse_measure_table::<f64>("n,m\n", TwirlVariant::Logical).is_err());
    }

    #[test]
    fn table_width_is_enforced() {
        let mut t = CsvTable::new(["a", "b"]);
        assert!(t.push(vec!["1".into()]).is_err());
        t.push(vec!["1".into(), "x".into()]).unwrap();
        assert_eq!(t.render(), "a,b\n1,x\n");
        assert_eq!(t.to_json()[0]["a"], 1);
        assert_eq!(CsvTable::parse(&t.render()).unwrap(), t);
    }

    #[test]
    fn schedule_document_round_trips() {
        let s = pulse_schedule::<f64>(2, ShiftSet::Stabilizer).unwrap();
        let doc = schedule_doc(&s);
        assert_eq!(doc.header.entries, 25);
        let text = render_json(&doc).unwrap();
        let back: ScheduleDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(schedule_table(&s).rows().len(), 25);
    }

    #[test]
    fn atomic_write_replaces_target() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, "one\n").unwrap();
        write_atomic(&p, "two\n").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(write_atomic(&dir.path().join("missing/x.csv"), "x").is_err());
    }
}
