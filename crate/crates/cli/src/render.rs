//! Plain-text rendering of JSON artifacts as stable `key: value` lines.

use serde_json::Value;

/// Flattens `value` into `path: scalar` lines. Object keys come out
/// sorted, array elements are addressed by index, and nested keys are
/// joined with dots.
pub fn flatten(prefix: &str, value: &Value, out: &mut Vec<String>) {
    let join = |key: &str| {
        if prefix.is_empty() {
            key.to_string()
        } else {
            format!("{prefix}.{key}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&join(k), v, out);
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push(format!("{prefix}: []"));
            }
            for (i, v) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), v, out);
            }
        }
        Value::String(s) => out.push(format!("{prefix}: {s}")),
        Value::Null => out.push(format!("{prefix}: null")),
        other => out.push(format!("{prefix}: {other}")),
    }
}

/// One block per artifact, introduced by a `source:` line.
pub fn render(artifacts: &[(String, Value)]) -> String {
    let mut lines = Vec::new();
    for (i, (source, value)) in artifacts.iter().enumerate() {
        if i > 0 {
            lines.push(String::new());
        }
        lines.push(format!("source: {source}"));
        flatten("", value, &mut lines);
    }
    let mut text = lines.join("\n");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn nested_values_flatten_to_dotted_keys() {
        let mut out = Vec::new();
        flatten(
            "",
            &json!({"accuracy": 0.5, "confusion": {"tp": 3, "fn": 1}, "tags": ["a"], "none": null, "empty": []}),
            &mut out,
        );
        assert_eq!(
            out,
            vec![
                "accuracy: 0.5",
                "confusion.fn: 1",
                "confusion.tp: 3",
                "empty: []",
                "none: null",
                "tags.0: a",
            ]
        );
    }

    #[test]
    fn blocks_are_separated() {
        let text = render(&[
            ("a.json".into(), json!({"x": 1})),
            ("b.json".into(), json!({"y": true})),
        ]);
        assert_eq!(text, "source: a.json\nx: 1\n\nsource: b.json\ny: true\n");
    }
}
