use std::io::Write;

use quick_xml::escape::escape;

use super::EventLog;
use crate::error::Result;

/// Writes `case_id,activity,timestamp` rows; untimed events leave the
/// timestamp cell empty.
pub fn write_csv<W: Write>(log: &EventLog, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["case_id", "activity", "timestamp"])?;
    for trace in &log.traces {
        for event in &trace.events {
            let ts = event.timestamp.map(|t| t.to_rfc3339()).unwrap_or_default();
            writer.write_record([trace.id.as_str(), event.activity.as_str(), ts.as_str()])?;
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn write_xes<W: Write>(log: &EventLog, mut out: W) -> Result<()> {
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(out, r#"<log xes.version="1.0" xes.features="">"#)?;
    writeln!(
        out,
        r#"  <extension name="Concept" prefix="concept" uri="http://www.xes-standard.org/concept.xesext"/>"#
    )?;
    writeln!(
        out,
        r#"  <extension name="Time" prefix="time" uri="http://www.xes-standard.org/time.xesext"/>"#
    )?;
    for trace in &log.traces {
        writeln!(out, "  <trace>")?;
        writeln!(
            out,
            r#"    <string key="concept:name" value="{}"/>"#,
            escape(trace.id.as_str())
        )?;
        for event in &trace.events {
            writeln!(out, "    <event>")?;
            writeln!(
                out,
                r#"      <string key="concept:name" value="{}"/>"#,
                escape(event.activity.as_str())
            )?;
            if let Some(ts) = event.timestamp {
                writeln!(out, r#"      <date key="time:timestamp" value="{}"/>"#, ts.to_rfc3339())?;
            }
            writeln!(out, "    </event>")?;
        }
        writeln!(out, "  </trace>")?;
    }
    writeln!(out, "</log>")?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{parse_csv, parse_xes, ColumnMapping, Event, Timestamp, Trace};
    use super::*;
    use proptest::prelude::*;

    fn arb_log() -> impl Strategy<Value = EventLog> {
        let event = ("[A-Za-z<&\" ,]{1,6}", proptest::option::of(0i64..4_000_000_000_000))
            .prop_map(|(a, t)| Event {
                activity: a,
                timestamp: t.map(Timestamp),
            });
        proptest::collection::vec(proptest::collection::vec(event, 1..6), 0..6).prop_map(|traces| {
            EventLog::new(
                traces
                    .into_iter()
                    .enumerate()
                    .map(|(i, events)| Trace::new(format!("case {i}"), events))
                    .collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn csv_and_xes_round_trip(log in arb_log()) {
            let mut csv_bytes = Vec::new();
            write_csv(&log, &mut csv_bytes).unwrap();
            prop_assert_eq!(&parse_csv(&csv_bytes, &ColumnMapping::default()).unwrap(), &log);

            let mut xes_bytes = Vec::new();
            write_xes(&log, &mut xes_bytes).unwrap();
            prop_assert_eq!(&parse_xes(&xes_bytes).unwrap(), &log);
        }
    }
}
