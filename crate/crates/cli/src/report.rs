//! Line-oriented report records: one `key: value` pair per line, UTF-8,
//! LF line endings. The writer and reader are inverses for values without
//! newlines, which is everything the tool emits.

use std::fmt::Display;

/// An ordered list of key/value pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pairs: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        let value = value.to_string();
        debug_assert!(!key.contains([':', '\n']), "bad report key {key:?}");
        debug_assert!(!value.contains('\n'), "bad report value {value:?}");
        self.pairs.push((key.to_string(), value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.pairs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.pairs {
            out.push_str(k);
            out.push_str(": ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    /// Parses the writer's output back into a record.
    pub fn parse(text: &str) -> Result<Report, String> {
        let mut pairs = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once(": ") else {
                return Err(format!("record line {}: missing `: ` separator", idx + 1));
            };
            pairs.push((key.to_string(), value.to_string()));
        }
        Ok(Report { pairs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let mut report = Report::new();
        report.push("command", "cover");
        report.push("verdict", "covered");
        report.push("witness.p", "n=6 t=1 f=1");
        report.push("witness.run", "r2 r2 r3");
        let text = report.to_text();
        assert_eq!(Report::parse(&text).unwrap(), report);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(Report::parse("no separator here").is_err());
    }
}
