use crate::error::{csv_to_string, Result};
use crate::loss::budget::{LossKind, QBudget};

fn fmt(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:e}")
    }
}

/// Per-channel rows followed by a `total` row.
pub fn budget_to_csv(b: &QBudget) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kind", "label", "material", "participation", "admittance_s_per_m", "q_limit", "status"])?;
    let split = |kind: LossKind, v: f64| {
        if kind == LossKind::Seam {
            (String::new(), fmt(v))
        } else {
            (fmt(v), String::new())
        }
    };
    for e in &b.channels {
        let (p, y) = split(e.channel.kind, e.channel.value);
        w.write_record([e.channel.kind.key(), &e.channel.label, &e.channel.material, &p, &y, &fmt(e.q_limit), "budgeted"])?;
    }
    for u in &b.unbudgeted {
        let (p, y) = split(u.channel.kind, u.channel.value);
        w.write_record([u.channel.kind.key(), &u.channel.label, &u.channel.material, &p, &y, "", "unbudgeted"])?;
    }
    w.write_record(["total", "", "", "", "", &fmt(b.total_q), ""])?;
    w.write_record(["t1_limit_s", "", "", "", "", &fmt(b.t1_limit), ""])?;
    w.write_record(["frequency_hz", "", "", "", "", &fmt(b.frequency), ""])?;
    csv_to_string(w)
}

/// JSON with non-finite Q limits written as the string "inf".
pub fn budget_to_json(b: &QBudget) -> Result<serde_json::Value> {
    let q = |v: f64| if v.is_finite() { serde_json::json!(v) } else { serde_json::json!("inf") };
    Ok(serde_json::json!({
        "frequency_hz": b.frequency,
        "total_q": q(b.total_q),
        "t1_limit_s": q(b.t1_limit),
        "channels": b.channels.iter().map(|e| serde_json::json!({
            "kind": e.channel.kind.key(),
            "label": e.channel.label,
            "material": e.channel.material,
            "value": e.channel.value,
            "q_limit": q(e.q_limit),
        })).collect::<Vec<_>>(),
        "unbudgeted": b.unbudgeted.iter().map(|u| serde_json::json!({
            "kind": u.channel.kind.key(),
            "label": u.channel.label,
            "material": u.channel.material,
            "value": u.channel.value,
            "reason": u.reason,
        })).collect::<Vec<_>>(),
    }))
}
