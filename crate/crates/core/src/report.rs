//! Canonical JSON: keys sorted lexicographically at every level, floats in
//! shortest round-trip form, two-space indentation, trailing newline.

use serde::Serialize;
use serde_json::Value;

pub fn to_value<T: Serialize>(v: &T) -> Value {
    // serde_json's default map is ordered, so converting through Value sorts keys
    serde_json::to_value(v).expect("report types serialize")
}

pub fn to_canonical_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(&to_value(v)).expect("value serializes");
    s.push('\n');
    s
}
