use std::io::Write;

use super::DriftReport;
use crate::error::Result;

pub fn write_report_json<W: Write>(report: &DriftReport, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, report)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// One row per merged drift point.
pub fn write_report_csv<W: Write>(report: &DriftReport, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([
        "event_index",
        "trace_index",
        "trace_id",
        "timestamp",
        "direction",
        "trigger_relation",
        "max_p_value",
        "merged_direction",
        "merged_event_index",
    ])?;
    for p in &report.points {
        let max_p = p
            .battery_p_values
            .iter()
            .copied()
            .fold(f64::NAN, f64::max);
        let (merged_dir, merged_idx) = match &p.merged_with {
            Some(m) => (m.direction.as_str().to_owned(), m.event_index.to_string()),
            None => (String::new(), String::new()),
        };
        writer.write_record([
            p.event_index.to_string(),
            p.trace_index.to_string(),
            p.trace_id.clone(),
            p.timestamp.map(|t| t.to_rfc3339()).unwrap_or_default(),
            p.direction.as_str().to_owned(),
            p.trigger_relation.to_string(),
            format!("{max_p:e}"),
            merged_dir,
            merged_idx,
        ])?;
    }
    writer.flush()?;
    Ok(())
}
