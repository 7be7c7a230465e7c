use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, Error, Result};
use crate::units::{parse_quantity, Dimension};

/// Minimum shots per prepared state for a fit.
pub const MIN_SHOTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prepared {
    Ground,
    Excited,
}

impl fmt::Display for Prepared {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Prepared::Ground => "ground",
            Prepared::Excited => "excited",
        })
    }
}

impl FromStr for Prepared {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ground" | "g" | "0" => Ok(Prepared::Ground),
            "excited" | "e" | "1" => Ok(Prepared::Excited),
            other => Err(Error::Unknown {
                kind: "prepared state",
                name: other.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shot {
    pub prepared: Prepared,
    pub i: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IQDataset {
    pub qubit_id: String,
    pub shots: Vec<Shot>,
    /// Measurement (integration) duration T_m, s.
    pub readout_duration: f64,
    pub qubit_frequency: f64,
    pub t1_reference: Option<f64>,
}

impl IQDataset {
    pub fn count(&self, state: Prepared) -> usize {
        self.shots.iter().filter(|s| s.prepared == state).count()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.shots.iter().find(|s| !(s.i.is_finite() && s.q.is_finite())) {
            return Err(Error::invalid("shot", format!("non-finite voltage ({}, {})", s.i, s.q)));
        }
        if !(self.readout_duration >= 0.0 && self.qubit_frequency > 0.0) {
            return Err(Error::invalid(
                "readout metadata",
                format!("qubit {}: duration and frequency must be positive", self.qubit_id),
            ));
        }
        Ok(())
    }
}

/// Per-qubit metadata from the sidecar file.
#[derive(Debug, Clone, Default, PartialEq)]
struct Meta {
    readout_duration: Option<f64>,
    qubit_frequency: Option<f64>,
    t1_reference: Option<f64>,
}

/// Sidecar path for a shot file: `<file>.meta`.
pub fn sidecar_path(shots: &Path) -> PathBuf {
    let mut s = shots.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Parses `key = value unit` lines; a `qubit.key` form overrides the
/// default for one qubit.
fn parse_meta(text: &str, context: &str) -> Result<BTreeMap<String, Meta>> {
    let mut out: BTreeMap<String, Meta> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| Error::parse(context, lineno + 1, m);
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| err("expected `key = value unit`".into()))?;
        let (qubit, key) = match key.rsplit_once('.') {
            Some((q, k)) => (q.to_string(), k),
            None => (String::new(), key),
        };
        let entry = out.entry(qubit).or_default();
        let q = |dim| parse_quantity(value, dim).map_err(|e| err(e.to_string()));
        match key {
            "readout_duration" => entry.readout_duration = Some(q(Dimension::Time)?),
            "qubit_frequency" => entry.qubit_frequency = Some(q(Dimension::Frequency)?),
            "t1_reference" => entry.t1_reference = Some(q(Dimension::Time)?),
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    Ok(out)
}

/// Loads a shot CSV (`qubit_id,prepared,i_volts,q_volts`) and its sidecar,
/// returning one dataset per qubit in id order.
pub fn load_shots(path: &Path) -> Result<Vec<IQDataset>> {
    let text = read_to_string(path)?;
    let meta_path = sidecar_path(path);
    let meta = parse_meta(&read_to_string(&meta_path)?, &meta_path.display().to_string())?;
    parse_shots(&text, &path.display().to_string(), &meta)
}

fn parse_shots(text: &str, context: &str, meta: &BTreeMap<String, Meta>) -> Result<Vec<IQDataset>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["qubit_id", "prepared", "i_volts", "q_volts"] {
        return Err(Error::parse(context, 1, "header must be qubit_id,prepared,i_volts,q_volts"));
    }
    let mut shots: BTreeMap<String, Vec<Shot>> = BTreeMap::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::parse(context, line, format!("bad number `{s}`")));
        let prepared = rec[1].parse().map_err(|e: Error| Error::parse(context, line, e.to_string()))?;
        shots.entry(rec[0].to_string()).or_default().push(Shot {
            prepared,
            i: num(&rec[2])?,
            q: num(&rec[3])?,
        });
    }
    let default = meta.get("").cloned().unwrap_or_default();
    shots
        .into_iter()
        .map(|(id, shots)| {
            let own = meta.get(&id);
            let pick = |f: fn(&Meta) -> Option<f64>| own.and_then(f).or_else(|| f(&default));
            let missing = |k: &str| Error::parse(context, 0, format!("qubit {id}: sidecar lacks {k}"));
            let ds = IQDataset {
                readout_duration: pick(|m| m.readout_duration).ok_or_else(|| missing("readout_duration"))?,
                qubit_frequency: pick(|m| m.qubit_frequency).ok_or_else(|| missing("qubit_frequency"))?,
                t1_reference: pick(|m| m.t1_reference),
                qubit_id: id,
                shots,
            };
            ds.validate()?;
            Ok(ds)
        })
        .collect()
}

/// Shot CSV text for one or more datasets; floats in shortest round-trip form.
pub fn write_shots(datasets: &[IQDataset]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["qubit_id", "prepared", "i_volts", "q_volts"])?;
    for d in datasets {
        for s in &d.shots {
            w.write_record([d.qubit_id.clone(), s.prepared.to_string(), format!("{:e}", s.i), format!("{:e}", s.q)])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Domain(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Sidecar text with per-qubit keys.
pub fn write_sidecar(datasets: &[IQDataset]) -> String {
    let mut out = String::new();
    for d in datasets {
        out.push_str(&format!("{}.readout_duration = {:e} s\n", d.qubit_id, d.readout_duration));
        out.push_str(&format!("{}.qubit_frequency = {:e} Hz\n", d.qubit_id, d.qubit_frequency));
        if let Some(t1) = d.t1_reference {
            out.push_str(&format!("{}.t1_reference = {:e} s\n", d.qubit_id, t1));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_csv_with_sidecar_defaults() {
        let meta = parse_meta(
            "readout_duration = 6.2 us\nqubit_frequency = 4.5 GHz\nQ2.t1_reference = 97 us\n",
            "m",
        )
        .unwrap();
        let text = "qubit_id,prepared,i_volts,q_volts\nQ1,ground,-1e-3,0\nQ2,excited,1e-3,2e-4\nQ1,e,0.5e-3,0\n";
        let ds = parse_shots(text, "s", &meta).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds[0].qubit_id, "Q1");
        assert_eq!(ds[0].count(Prepared::Excited), 1);
        assert!((ds[0].readout_duration - 6.2e-6).abs() < 1e-18);
        assert_eq!(ds[0].t1_reference, None);
        assert!((ds[1].t1_reference.unwrap() - 97e-6).abs() < 1e-18);
    }

    #[test]
    fn rejects_bad_rows() {
        let meta = parse_meta("readout_duration = 1 us\nqubit_frequency = 5 GHz\n", "m").unwrap();
        assert!(parse_shots("a,b,c,d\n", "s", &meta).is_err());
        let bad = "qubit_id,prepared,i_volts,q_volts\nQ1,maybe,0,0\n";
        assert!(parse_shots(bad, "s", &meta).is_err());
        let nan = "qubit_id,prepared,i_volts,q_volts\nQ1,g,NaN,0\n";
        assert!(parse_shots(nan, "s", &meta).is_err());
        let no_meta = parse_meta("", "m").unwrap();
        assert!(parse_shots("qubit_id,prepared,i_volts,q_volts\nQ1,g,0,0\n", "s", &no_meta).is_err());
    }

    #[test]
    fn write_then_parse_round_trips() {
        let d = IQDataset {
            qubit_id: "Q9".into(),
            shots: vec![
                Shot {
                    prepared: Prepared::Ground,
                    i: -1.234_567_890_123e-3,
                    q: 0.1,
                },
                Shot {
                    prepared: Prepared::Excited,
                    i: 3e-3,
                    q: -7e-5,
                },
            ],
            readout_duration: 2e-6,
            qubit_frequency: 4.1e9,
            t1_reference: Some(80e-6),
        };
        let meta = parse_meta(&write_sidecar(std::slice::from_ref(&d)), "m").unwrap();
        let back = parse_shots(&write_shots(std::slice::from_ref(&d)).unwrap(), "s", &meta).unwrap();
        assert_eq!(back, vec![d]);
    }
}
