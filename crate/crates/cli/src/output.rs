use serde::Serialize;
use serde_json::Value;

use crate::config::OutputFormat;

fn cell(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

fn object<T: Serialize>(item: &T) -> serde_json::Map<String, Value> {
    match serde_json::to_value(item).expect("reports serialize") {
        Value::Object(m) => m,
        other => {
            let mut m = serde_json::Map::new();
            m.insert("value".into(), other);
            m
        }
    }
}

/// A single report: one JSON object, or `key: value` lines with hyphenated
/// keys.
pub fn render<T: Serialize>(item: &T, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => serde_json::to_string(item).expect("reports serialize"),
        OutputFormat::Table => object(item)
            .iter()
            .map(|(k, v)| format!("{}: {}", k.replace('_', "-"), cell(v)))
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

/// One line per record: JSON lines, or a tab-separated table with a header.
pub fn render_records<T: Serialize>(items: &[T], format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => items
            .iter()
            .map(|r| serde_json::to_string(r).expect("reports serialize"))
            .collect::<Vec<_>>()
            .join("\n"),
        OutputFormat::Table => {
            let rows: Vec<_> = items.iter().map(object).collect();
            let Some(first) = rows.first() else {
                return String::new();
            };
            let mut out = vec![first.keys().cloned().collect::<Vec<_>>().join("\t")];
            out.extend(rows.iter().map(|r| r.values().map(cell).collect::<Vec<_>>().join("\t")));
            out.join("\n")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        k1: usize,
        lower: Option<f64>,
        spectrum: Vec<f64>,
    }

    #[test]
    fn table_cells() {
        let r = Row {
            k1: 2,
            lower: None,
            spectrum: vec![-0.5, 0.5],
        };
        assert_eq!(render(&r, OutputFormat::Table), "k1: 2\nlower: -\nspectrum: -0.5 0.5");
        assert_eq!(render(&r, OutputFormat::Json), r#"{"k1":2,"lower":null,"spectrum":[-0.5,0.5]}"#);
        assert_eq!(render_records(&[r], OutputFormat::Table), "k1\tlower\tspectrum\n2\t-\t-0.5 0.5");
    }
}
