//! Deterministic JSON output: keys sorted (the `serde_json` map is a
//! B-tree), floats printed with 17 significant digits, non-finite values
//! mapped to strings. Re-running a command with the same inputs and seed
//! reproduces output files byte for byte.

use serde_json::Value;

/// A JSON value for a float, mapping non-finite values to the strings
/// `"inf"`, `"-inf"`, `"nan"` (plain JSON numbers cannot carry them).
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        Value::from(v)
    } else if v.is_nan() {
        Value::String("nan".into())
    } else if v > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

pub fn num_array(values: &[f64]) -> Value {
    Value::Array(values.iter().map(|&v| num(v)).collect())
}

pub fn matrix_value(m: &fuzzymc::linalg::Matrix) -> Value {
    Value::Array((0..m.rows()).map(|i| num_array(m.row(i))).collect())
}

/// Render with two-space indentation and 17-significant-digit floats.
pub fn to_json_string(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(value: &Value, indent: usize, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_u64() || n.is_i64() {
                out.push_str(&n.to_string());
            } else {
                let v = n.as_f64().expect("checked numeric variant");
                out.push_str(&format!("{v:.16e}"));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("strings always serialize"));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push('\n');
                push_indent(indent + 1, out);
                write_value(item, indent + 1, out);
            }
            out.push('\n');
            push_indent(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (k, (key, item)) in map.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push('\n');
                push_indent(indent + 1, out);
                out.push_str(&serde_json::to_string(key).expect("strings always serialize"));
                out.push_str(": ");
                write_value(item, indent + 1, out);
            }
            out.push('\n');
            push_indent(indent, out);
            out.push('}');
        }
    }
}

fn push_indent(indent: usize, out: &mut String) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// Fixed-precision scientific notation for CSV cells, matching the JSON
/// float format.
pub fn csv_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}
