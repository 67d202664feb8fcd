//! Read-only XES support: `log` / `trace` / `event` with string and date
//! attributes. Only `concept:name` (trace id, activity) and `time:timestamp`
//! are kept; everything else, including nested attributes, is skipped.

use quick_xml::events::{BytesStart, Event as XmlEvent};
use quick_xml::{Reader, XmlVersion};

use super::{Event, EventLog, Timestamp, Trace};
use crate::error::{Error, Result};

const NAME_KEY: &str = "concept:name";
const TIME_KEY: &str = "time:timestamp";

#[derive(Default)]
struct PendingEvent {
    activity: Option<String>,
    timestamp: Option<Timestamp>,
}

#[derive(Default)]
struct PendingTrace {
    id: Option<String>,
    events: Vec<PendingEvent>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Scope {
    Log,
    Trace,
    Event,
    Other,
}

pub fn parse_xes(input: &[u8]) -> Result<EventLog> {
    let mut reader = Reader::from_reader(input);
    let mut buf = Vec::new();
    let mut scopes: Vec<Scope> = Vec::new();
    let mut saw_log = false;
    let mut trace: Option<PendingTrace> = None;
    let mut traces: Vec<Trace> = Vec::new();

    loop {
        let position = reader.buffer_position() as usize;
        let ev = reader
            .read_event_into(&mut buf)
            .map_err(|e| xml_error(input, reader.error_position() as usize, e.to_string()))?;
        match ev {
            XmlEvent::Start(ref start) | XmlEvent::Empty(ref start) => {
                let is_empty = matches!(ev, XmlEvent::Empty(_));
                let name = start.local_name();
                let parent = scopes.last().copied();
                let scope = match (parent, name.as_ref()) {
                    (None, "log") => {
                        saw_log = true;
                        Scope::Log
                    }
                    (None, other) => {
                        return Err(xml_error(
                            input,
                            position,
                            format!(
                                "root element must be <log>, found <{}>",
                                other
                            ),
                        ))
                    }
                    (Some(Scope::Log), "trace") => {
                        trace = Some(PendingTrace::default());
                        Scope::Trace
                    }
                    (Some(Scope::Trace), "event") => {
                        if let Some(t) = trace.as_mut() {
                            t.events.push(PendingEvent::default());
                        }
                        Scope::Event
                    }
                    (Some(Scope::Trace), kind) => {
                        if let Some((key, value)) = attribute(input, position, start)? {
                            if kind == "string" && key == NAME_KEY {
                                if let Some(t) = trace.as_mut() {
                                    t.id = Some(value);
                                }
                            }
                        }
                        Scope::Other
                    }
                    (Some(Scope::Event), kind) => {
                        if let Some((key, value)) = attribute(input, position, start)? {
                            let event = trace.as_mut().and_then(|t| t.events.last_mut());
                            if let Some(event) = event {
                                if kind == "string" && key == NAME_KEY {
                                    event.activity = Some(value);
                                } else if kind == "date" && key == TIME_KEY {
                                    let ts = Timestamp::parse(&value).ok_or_else(|| {
                                        xml_error(
                                            input,
                                            position,
                                            format!("unparseable timestamp `{value}`"),
                                        )
                                    })?;
                                    event.timestamp = Some(ts);
                                }
                            }
                        }
                        Scope::Other
                    }
                    _ => Scope::Other,
                };
                if is_empty {
                    close(scope, &mut trace, &mut traces)?;
                } else {
                    scopes.push(scope);
                }
            }
            XmlEvent::End(_) => {
                if let Some(scope) = scopes.pop() {
                    close(scope, &mut trace, &mut traces)?;
                }
            }
            XmlEvent::Eof => break,
            _ => {}
        }
        buf.clear();
    }

    if !scopes.is_empty() {
        return Err(xml_error(
            input,
            input.len(),
            "unexpected end of document: unclosed elements".into(),
        ));
    }
    if !saw_log {
        return Err(xml_error(input, input.len(), "no <log> element".into()));
    }
    let log = EventLog::new(traces);
    log.validate()?;
    Ok(log)
}

fn close(scope: Scope, trace: &mut Option<PendingTrace>, traces: &mut Vec<Trace>) -> Result<()> {
    if scope != Scope::Trace {
        return Ok(());
    }
    let Some(pending) = trace.take() else {
        return Ok(());
    };
    let index = traces.len();
    let id = pending.id.ok_or(Error::MissingTraceId { index })?;
    let mut events = Vec::with_capacity(pending.events.len());
    for (i, e) in pending.events.into_iter().enumerate() {
        let activity = e.activity.ok_or_else(|| Error::MissingActivity {
            trace: id.clone(),
            event: i,
        })?;
        events.push(Event {
            activity,
            timestamp: e.timestamp,
        });
    }
    traces.push(Trace::new(id, events));
    Ok(())
}

fn attribute(input: &[u8], position: usize, start: &BytesStart<'_>) -> Result<Option<(String, String)>> {
    let mut key = None;
    let mut value = None;
    for attr in start.attributes() {
        let attr = attr.map_err(|e| xml_error(input, position, e.to_string()))?;
        let text = attr
            .normalized_value(XmlVersion::Implicit1_0)
            .map_err(|e| xml_error(input, position, e.to_string()))?
            .into_owned();
        match attr.key.as_ref() {
            "key" => key = Some(text),
            "value" => value = Some(text),
            _ => {}
        }
    }
    Ok(key.zip(value))
}

fn xml_error(input: &[u8], offset: usize, message: String) -> Error {
    let offset = offset.min(input.len());
    let before = &input[..offset];
    let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
    let line_start = before.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
    Error::Xes {
        line,
        column: offset - line_start + 1,
        message,
    }
}
