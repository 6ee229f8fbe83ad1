//! Result rendering: aligned tables or `{"columns", "rows"}` JSON.

use std::io::IsTerminal;

use clap::ValueEnum;
use nestlog::algebra::Relation;
use nestlog::model::Value;
use serde::Serialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Json,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(untagged)]
pub enum Cell {
    /// A constant, or `None` for `⊥`.
    Value(Option<String>),
    Flag(bool),
    Count(usize),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Value(Some(s)) => s.clone(),
            Cell::Value(None) => "⊥".into(),
            Cell::Flag(true) => "yes".into(),
            Cell::Flag(false) => "no".into(),
            Cell::Count(n) => n.to_string(),
        }
    }
}

impl From<&Value> for Cell {
    fn from(v: &Value) -> Self {
        match v {
            Value::Null => Cell::Value(None),
            Value::Const(c) => Cell::Value(Some(c.to_string())),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Value(Some(s.to_string()))
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra lines printed under a table, or a JSON array of them.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table { columns, rows: Vec::new(), notes: Vec::new() }
    }

    pub fn from_relation(r: &Relation) -> Self {
        let mut t = Table::new(r.schema.iter().map(|a| a.to_string()).collect());
        t.rows = r.tuples.iter().map(|row| row.iter().map(Cell::from).collect()).collect();
        t
    }

    fn sorted(&self) -> Table {
        let mut t = self.clone();
        t.rows.sort_by_cached_key(|row| row.iter().map(Cell::text).collect::<Vec<_>>());
        t.rows.dedup();
        t
    }

    pub fn render(&self, format: Format) -> String {
        let t = self.sorted();
        match format {
            Format::Json => {
                let mut s = serde_json::to_string(&t).expect("tables serialize");
                s.push('\n');
                s
            }
            Format::Table => t.render_text(),
        }
    }

    fn render_text(&self) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::text).collect()).collect();
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |items: &[String]| {
            let padded: Vec<String> =
                items.iter().zip(&widths).map(|(s, &w)| format!("{s}{}", " ".repeat(w - s.chars().count()))).collect();
            padded.join("  ").trim_end().to_string()
        };
        let color = std::env::var_os("NO_COLOR").is_none() && std::io::stdout().is_terminal();
        let mut out = String::new();
        let header = line(&self.columns);
        if color {
            out.push_str(&format!("\x1b[1m{header}\x1b[0m\n"));
        } else {
            out.push_str(&header);
            out.push('\n');
        }
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w.max(1))).collect();
        out.push_str(&rule.join("  "));
        out.push('\n');
        for row in &cells {
            out.push_str(&line(row));
            out.push('\n');
        }
        for note in &self.notes {
            out.push_str(note);
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_uses_null_and_sorted_rows() {
        let mut t = Table::new(vec!["X".into(), "Y".into()]);
        t.rows.push(vec![Cell::from("b"), Cell::Value(None)]);
        t.rows.push(vec![Cell::from("a"), Cell::from("c")]);
        assert_eq!(t.render(Format::Json), "{\"columns\":[\"X\",\"Y\"],\"rows\":[[\"a\",\"c\"],[\"b\",null]]}\n");
        assert!(t.render(Format::Table).contains("b  ⊥"));
    }
}
