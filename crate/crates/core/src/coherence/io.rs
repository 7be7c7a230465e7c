//! Wafer-map and decay-curve files.

use std::collections::BTreeMap;
use std::path::Path;

use crate::cli::atomic_write;
use crate::coherence::decay::DecayCurve;
use crate::coherence::record::{CoherenceKind, QubitRecord};
use crate::error::{csv_to_string, read_to_string, Error, Result};
use crate::field::Point2;

const WAFER_HEADER: [&str; 7] = [
    "qubit_id",
    "x_m",
    "y_m",
    "design_f_hz",
    "measured_f_hz",
    "res_design_f_hz",
    "res_measured_f_hz",
];
const MANIFEST: &str = "manifest.csv";

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes())
}

fn number(s: &str, ctx: &str, line: usize) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(ctx, line, format!("bad number `{s}`")))
}

fn optional(s: &str, ctx: &str, line: usize) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        number(s, ctx, line).map(Some)
    }
}

/// Parses a wafer map; blank measured frequencies mark unmeasured values.
pub fn parse_wafer_map(text: &str, ctx: &str) -> Result<Vec<QubitRecord>> {
    let mut rdr = reader(text);
    if rdr.headers()?.iter().collect::<Vec<_>>() != WAFER_HEADER {
        return Err(Error::parse(ctx, 1, format!("header must be {}", WAFER_HEADER.join(","))));
    }
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != WAFER_HEADER.len() {
            return Err(Error::parse(ctx, line, "wrong number of fields"));
        }
        let id = rec[0].to_string();
        if seen.insert(id.clone(), ()).is_some() {
            return Err(Error::parse(ctx, line, format!("duplicate qubit `{id}`")));
        }
        out.push(QubitRecord {
            qubit_id: id,
            position: Point2::new(number(&rec[1], ctx, line)?, number(&rec[2], ctx, line)?)?,
            design_frequency: number(&rec[3], ctx, line)?,
            measured_frequency: optional(&rec[4], ctx, line)?,
            resonator_design_frequency: number(&rec[5], ctx, line)?,
            resonator_measured_frequency: optional(&rec[6], ctx, line)?,
            t1_samples: Vec::new(),
            t2e_samples: Vec::new(),
        });
    }
    Ok(out)
}

pub fn load_wafer_map(path: &Path) -> Result<Vec<QubitRecord>> {
    parse_wafer_map(&read_to_string(path)?, &path.display().to_string())
}

fn parse_curve(text: &str, ctx: &str, start: f64, end: f64) -> Result<DecayCurve> {
    let mut rdr = reader(text);
    if rdr.headers()?.iter().collect::<Vec<_>>() != ["delay_s", "signal"] {
        return Err(Error::parse(ctx, 1, "header must be delay_s,signal"));
    }
    let mut delays = Vec::new();
    let mut raw = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        delays.push(number(&rec[0], ctx, line)?);
        raw.push(number(&rec[1], ctx, line)?);
    }
    DecayCurve::from_raw(delays, &raw, start, end).map_err(|e| Error::parse(ctx, 0, e.to_string()))
}

/// Attaches decay curves listed in `<dir>/manifest.csv`
/// (`qubit_id,kind,file,signal_start,signal_end`; the two calibration levels
/// default to 1 and 0) to the matching records.
pub fn load_decays(dir: &Path, records: &mut [QubitRecord]) -> Result<()> {
    let manifest = dir.join(MANIFEST);
    let ctx = manifest.display().to_string();
    let text = read_to_string(&manifest)?;
    let mut rdr = reader(&text);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header[..header.len().min(3)] != ["qubit_id", "kind", "file"] {
        return Err(Error::parse(&ctx, 1, "header must start qubit_id,kind,file"));
    }
    let index: BTreeMap<String, usize> = records.iter().enumerate().map(|(i, r)| (r.qubit_id.clone(), i)).collect();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let &i = index
            .get(&rec[0])
            .ok_or_else(|| Error::parse(&ctx, line, format!("qubit `{}` not in the wafer map", &rec[0])))?;
        let kind: CoherenceKind = rec[1].parse().map_err(|e: Error| Error::parse(&ctx, line, e.to_string()))?;
        let level = |k: usize, default: f64| -> Result<f64> {
            Ok(optional(rec.get(k).unwrap_or(""), &ctx, line)?.unwrap_or(default))
        };
        let (start, end) = (level(3, 1.0)?, level(4, 0.0)?);
        let path = dir.join(&rec[2]);
        let curve = parse_curve(&read_to_string(&path)?, &path.display().to_string(), start, end)?;
        match kind {
            CoherenceKind::T1 => records[i].t1_samples.push(curve),
            CoherenceKind::T2e => records[i].t2e_samples.push(curve),
        }
    }
    Ok(())
}

/// Wafer map plus optional decay directory, validated against the wafer
/// radius.
pub fn load_coherence_data(wafer: &Path, decays: Option<&Path>, wafer_radius: f64) -> Result<Vec<QubitRecord>> {
    let mut records = load_wafer_map(wafer)?;
    if let Some(dir) = decays {
        load_decays(dir, &mut records)?;
    }
    for r in &records {
        r.validate(wafer_radius)?;
    }
    Ok(records)
}

pub fn write_wafer_map(records: &[QubitRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(WAFER_HEADER)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:e}"));
    for r in records {
        w.write_record([
            r.qubit_id.clone(),
            format!("{:e}", r.position.x),
            format!("{:e}", r.position.y),
            format!("{:e}", r.design_frequency),
            opt(r.measured_frequency),
            format!("{:e}", r.resonator_design_frequency),
            opt(r.resonator_measured_frequency),
        ])?;
    }
    csv_to_string(w)
}

/// Writes every curve (already normalised) plus a manifest into `dir`.
pub fn write_decays(dir: &Path, records: &[QubitRecord]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = csv::Writer::from_writer(Vec::new());
    manifest.write_record(["qubit_id", "kind", "file", "signal_start", "signal_end"])?;
    for r in records {
        for kind in [CoherenceKind::T1, CoherenceKind::T2e] {
            for (k, c) in r.samples(kind).iter().enumerate() {
                let name = format!("{}_{kind}_{k:02}.csv", r.qubit_id);
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["delay_s", "signal"])?;
                for (t, s) in c.delays.iter().zip(&c.signal) {
                    w.write_record([format!("{t:e}"), format!("{s:e}")])?;
                }
                atomic_write(&dir.join(&name), csv_to_string(w)?.as_bytes())?;
                manifest.write_record([r.qubit_id.clone(), kind.to_string(), name, "1".into(), "0".into()])?;
            }
        }
    }
    atomic_write(&dir.join(MANIFEST), csv_to_string(manifest)?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MAP: &str = "qubit_id,x_m,y_m,design_f_hz,measured_f_hz,res_design_f_hz,res_measured_f_hz\n\
                       q0,0,0,4.5e9,4.51e9,10e9,\n\
                       q1,1e-3,-2e-3,4.6e9,,10.1e9,10.09e9\n";

    #[test]
    fn wafer_map_round_trip() {
        let r = parse_wafer_map(MAP, "map").unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].resonator_measured_frequency, None);
        assert_eq!(r[1].measured_frequency, None);
        let again = parse_wafer_map(&write_wafer_map(&r).unwrap(), "again").unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn wafer_map_errors() {
        assert!(parse_wafer_map("qubit_id,x\nq,1\n", "m").is_err());
        let dup = format!("{MAP}q0,0,0,4.5e9,,10e9,\n");
        assert!(parse_wafer_map(&dup, "m").is_err());
    }

    #[test]
    fn decay_dir_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = parse_wafer_map(MAP, "map").unwrap();
        let delays = vec![0.0, 1e-5, 2e-5, 3e-5];
        r[1].t2e_samples.push(DecayCurve::new(delays.clone(), vec![1.0, 0.8, 0.6, 0.5]).unwrap());
        write_decays(dir.path(), &r).unwrap();
        let mut back = parse_wafer_map(MAP, "map").unwrap();
        load_decays(dir.path(), &mut back).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn manifest_levels_normalise() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("manifest.csv"),
            "qubit_id,kind,file,signal_start,signal_end\nq0,t1,a.csv,0.8,0.2\n",
        )
        .unwrap();
        std::fs::write(dir.path().join("a.csv"), "delay_s,signal\n0,0.8\n1e-6,0.5\n2e-6,0.3\n3e-6,0.2\n").unwrap();
        let mut r = parse_wafer_map(MAP, "map").unwrap();
        load_decays(dir.path(), &mut r).unwrap();
        let s = &r[0].t1_samples[0].signal;
        assert!((s[0] - 1.0).abs() < 1e-15 && (s[1] - 0.5).abs() < 1e-15 && s[3].abs() < 1e-15);
    }
}
