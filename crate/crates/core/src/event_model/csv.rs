use std::collections::HashMap;

use super::{Event, EventLog, Timestamp, Trace};
use crate::error::{Error, Result};

/// Header names of the columns holding case id, activity and (optionally)
/// timestamp.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMapping {
    pub trace_id: String,
    pub activity: String,
    pub timestamp: Option<String>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping {
            trace_id: "case_id".into(),
            activity: "activity".into(),
            timestamp: Some("timestamp".into()),
        }
    }
}

/// Rows are grouped by trace id; traces appear in order of first occurrence
/// and keep file order internally. A mapped timestamp column missing from the
/// header is treated as absent, while an empty cell gives an untimed event.
pub fn parse_csv(input: &[u8], mapping: &ColumnMapping) -> Result<EventLog> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);

    let trace_col =
        column(&mapping.trace_id).ok_or_else(|| Error::MissingColumn(mapping.trace_id.clone()))?;
    let activity_col =
        column(&mapping.activity).ok_or_else(|| Error::MissingColumn(mapping.activity.clone()))?;
    let timestamp_col = mapping.timestamp.as_deref().and_then(column);

    let mut index: HashMap<String, usize> = HashMap::new();
    let mut traces: Vec<Trace> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // header is row 1
        let row = i + 2;
        let record = record?;
        let field = |col: usize| {
            record.get(col).ok_or_else(|| Error::CsvRow {
                row,
                message: format!("missing field {col}"),
            })
        };
        let trace_id = field(trace_col)?;
        let activity = field(activity_col)?;
        if activity.is_empty() {
            return Err(Error::CsvRow {
                row,
                message: "empty activity".into(),
            });
        }
        let timestamp = match timestamp_col {
            Some(col) => {
                let raw = field(col)?;
                if raw.trim().is_empty() {
                    None
                } else {
                    Some(Timestamp::parse(raw).ok_or_else(|| Error::CsvRow {
                        row,
                        message: format!("unparseable timestamp `{raw}`"),
                    })?)
                }
            }
            None => None,
        };
        let slot = *index.entry(trace_id.to_owned()).or_insert_with(|| {
            traces.push(Trace::new(trace_id, Vec::new()));
            traces.len() - 1
        });
        traces[slot].events.push(Event {
            activity: activity.to_owned(),
            timestamp,
        });
    }
    Ok(EventLog::new(traces))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mapping() -> ColumnMapping {
        ColumnMapping::default()
    }

    fn shapes(log: &EventLog) -> Vec<(String, Vec<String>)> {
        log.traces
            .iter()
            .map(|t| (t.id.clone(), t.activities().map(str::to_owned).collect()))
            .collect()
    }

    #[test]
    fn groups_rows() {
        let data = "case_id,activity\nt1,A\nt1,B\nt2,A\n";
        let log = parse_csv(data.as_bytes(), &mapping()).unwrap();
        assert_eq!(
            shapes(&log),
            vec![
                ("t1".into(), vec!["A".into(), "B".into()]),
                ("t2".into(), vec!["A".into()])
            ]
        );
    }

    #[test]
    fn header_only() {
        let log = parse_csv(b"case_id,activity,timestamp\n", &mapping()).unwrap();
        assert!(log.is_empty());
    }

    #[test]
    fn out_of_order_rows() {
        let data = "case_id,activity\nt1,A\nt2,A\nt1,B\n";
        let log = parse_csv(data.as_bytes(), &mapping()).unwrap();
        assert_eq!(
            shapes(&log),
            vec![
                ("t1".into(), vec!["A".into(), "B".into()]),
                ("t2".into(), vec!["A".into()])
            ]
        );
    }

    #[test]
    fn missing_column() {
        let err = parse_csv(b"case,activity\n", &mapping()).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(c) if c == "case_id"));
    }

    #[test]
    fn bad_timestamp_reports_row() {
        let data = "case_id,activity,timestamp\nt1,A,2020-01-01T00:00:00Z\nt1,B,not-a-date\n";
        let err = parse_csv(data.as_bytes(), &mapping()).unwrap_err();
        assert!(matches!(err, Error::CsvRow { row: 3, .. }));
    }

    #[test]
    fn quoted_fields_and_custom_mapping() {
        let data = "Case ID,Activity Name,When\n\"c,1\",\"Pay \"\"now\"\"\",2020-01-01 10:00:00\n";
        let m = ColumnMapping {
            trace_id: "Case ID".into(),
            activity: "Activity Name".into(),
            timestamp: Some("When".into()),
        };
        let log = parse_csv(data.as_bytes(), &m).unwrap();
        assert_eq!(log.traces[0].id, "c,1");
        assert_eq!(log.traces[0].events[0].activity, "Pay \"now\"");
        assert!(log.traces[0].events[0].timestamp.is_some());
    }
}
