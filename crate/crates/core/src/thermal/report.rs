use crate::error::{csv_to_string, Result};
use crate::thermal::loads::LoadReport;

/// One row per stage: passive, active + dissipative, temperature,
/// with the split columns kept for auditing.
pub fn load_report_csv(report: &LoadReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "stage",
        "passive_w",
        "active_dissipative_w",
        "temperature_k",
        "active_w",
        "dissipative_w",
    ])?;
    for s in &report.stages {
        w.write_record([
            s.stage.to_string(),
            format!("{:e}", s.passive),
            format!("{:e}", s.active + s.dissipative),
            s.temperature.map_or(String::new(), |t| format!("{t:e}")),
            format!("{:e}", s.active),
            format!("{:e}", s.dissipative),
        ])?;
    }
    csv_to_string(w)
}

pub fn load_report_json(report: &LoadReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}
