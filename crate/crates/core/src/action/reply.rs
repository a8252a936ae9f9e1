//! Parser for the single-object action reply grammar.
//!
//! A reply is one JSON object with an `action` field and exactly one payload
//! field: `label` (integer) for touch and long_press, `direction` or `variant`
//! for scroll, zoom, multi_touch and hardware, `text` for typing.

use serde_json::{Map, Value};

use super::{Action, ActionError, CandidateAction};

const PAYLOAD_FIELDS: [&str; 4] = ["label", "direction", "variant", "text"];

fn fail(span: &str, reason: impl Into<String>) -> ActionError {
    let span: String = span.chars().take(200).collect();
    ActionError::UnparseableAction { span, reason: reason.into() }
}

fn enum_value<T: serde::de::DeserializeOwned>(raw: &str, kind: &str, v: &Value) -> Result<T, ActionError> {
    serde_json::from_value(v.clone()).map_err(|_| fail(raw, format!("unknown {kind} variant {v}")))
}

pub fn parse_action_response(raw: &str) -> Result<CandidateAction, ActionError> {
    let trimmed = raw.trim();
    let mut stream = serde_json::Deserializer::from_str(trimmed).into_iter::<Value>();
    let first = match stream.next() {
        Some(Ok(v)) => v,
        Some(Err(e)) => return Err(fail(trimmed, format!("not JSON: {e}"))),
        None => return Err(fail(trimmed, "empty reply")),
    };
    if stream.next().is_some() {
        return Err(fail(trimmed, "more than one action in reply"));
    }
    let obj: Map<String, Value> = match first {
        Value::Object(m) => m,
        Value::Array(_) => return Err(fail(trimmed, "more than one action in reply")),
        _ => return Err(fail(trimmed, "reply is not an object")),
    };

    for key in obj.keys() {
        if key != "action" && !PAYLOAD_FIELDS.contains(&key.as_str()) {
            return Err(fail(trimmed, format!("unexpected field {key:?}")));
        }
    }
    let present: Vec<&str> = PAYLOAD_FIELDS.iter().copied().filter(|k| obj.contains_key(*k)).collect();
    if present.len() != 1 {
        return Err(fail(trimmed, format!("expected exactly one payload field, found {present:?}")));
    }
    let field = present[0];
    let payload = &obj[field];

    let action = obj
        .get("action")
        .and_then(Value::as_str)
        .ok_or_else(|| fail(trimmed, "missing string field \"action\""))?;

    let expect_field = |allowed: &[&str]| -> Result<(), ActionError> {
        if allowed.contains(&field) {
            Ok(())
        } else {
            Err(fail(trimmed, format!("{action} does not take {field:?}")))
        }
    };

    match action {
        "touch" | "long_press" => {
            expect_field(&["label"])?;
            let label = payload
                .as_u64()
                .filter(|l| *l >= 1 && *l <= u32::MAX as u64)
                .ok_or_else(|| fail(trimmed, "label must be a positive integer"))?;
            Ok(CandidateAction::Element { long_press: action == "long_press", label: label as u32 })
        }
        "scroll" => {
            expect_field(&["direction", "variant"])?;
            Ok(CandidateAction::Direct(Action::Scroll { direction: enum_value(trimmed, "scroll", payload)? }))
        }
        "zoom" => {
            expect_field(&["direction", "variant"])?;
            Ok(CandidateAction::Direct(Action::Zoom { direction: enum_value(trimmed, "zoom", payload)? }))
        }
        "multi_touch" => {
            expect_field(&["direction", "variant"])?;
            Ok(CandidateAction::Direct(Action::MultiTouch { variant: enum_value(trimmed, "multi_touch", payload)? }))
        }
        "hardware" => {
            expect_field(&["direction", "variant"])?;
            Ok(CandidateAction::Direct(Action::Hardware { variant: enum_value(trimmed, "hardware", payload)? }))
        }
        "typing" => {
            expect_field(&["text"])?;
            let text = payload.as_str().ok_or_else(|| fail(trimmed, "text must be a string"))?;
            if text.trim().is_empty() {
                return Err(fail(trimmed, "typing text is empty"));
            }
            Ok(CandidateAction::Direct(Action::Typing { text: text.to_string() }))
        }
        other => Err(fail(trimmed, format!("unknown action {other:?}"))),
    }
}
