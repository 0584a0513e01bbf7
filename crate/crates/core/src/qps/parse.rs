use std::collections::HashMap;

use super::{
    BoundEntry, BoundKind, ColumnEntry, QpsDocument, QpsError, QuadEntry, QuadSection, RowKind, RowRecord, RowValue,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Name,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    Quad,
    Endata,
}

fn section_of(keyword: &str) -> Option<(Section, Option<QuadSection>)> {
    Some(match keyword {
        "NAME" => (Section::Name, None),
        "ROWS" => (Section::Rows, None),
        "COLUMNS" => (Section::Columns, None),
        "RHS" => (Section::Rhs, None),
        "RANGES" => (Section::Ranges, None),
        "BOUNDS" => (Section::Bounds, None),
        "QUADOBJ" => (Section::Quad, Some(QuadSection::Quadobj)),
        "QMATRIX" => (Section::Quad, Some(QuadSection::Qmatrix)),
        "ENDATA" => (Section::Endata, None),
        _ => return None,
    })
}

struct Parser {
    doc: QpsDocument,
    row_index: HashMap<String, usize>,
    col_index: HashMap<String, usize>,
    objective: Option<usize>,
    line: usize,
}

impl Parser {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, QpsError> {
        Err(QpsError::Parse { line: self.line, message: message.into() })
    }

    fn number(&self, field: &str) -> Result<f64, QpsError> {
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => self.err(format!("malformed number {field:?}")),
        }
    }

    fn row(&self, name: &str) -> Result<usize, QpsError> {
        match self.row_index.get(name) {
            Some(&r) => Ok(r),
            None => self.err(format!("undeclared row {name:?}")),
        }
    }

    fn col(&self, name: &str) -> Result<usize, QpsError> {
        match self.col_index.get(name) {
            Some(&c) => Ok(c),
            None => self.err(format!("undeclared column {name:?}")),
        }
    }

    fn rows_line(&mut self, f: &[&str]) -> Result<(), QpsError> {
        if f.len() != 2 {
            return self.err("ROWS entry needs a type and a name");
        }
        let kind = match f[0] {
            "N" => RowKind::N,
            "L" => RowKind::L,
            "G" => RowKind::G,
            "E" => RowKind::E,
            other => return self.err(format!("unknown row type {other:?}")),
        };
        if self.row_index.contains_key(f[1]) {
            return self.err(format!("row {:?} declared twice", f[1]));
        }
        if kind == RowKind::N {
            if self.objective.is_some() {
                return self.err("duplicate objective row");
            }
            self.objective = Some(self.doc.rows.len());
        }
        self.row_index.insert(f[1].to_string(), self.doc.rows.len());
        self.doc.rows.push(RowRecord { kind, name: f[1].to_string() });
        Ok(())
    }

    fn columns_line(&mut self, f: &[&str]) -> Result<(), QpsError> {
        if f.contains(&"'MARKER'") {
            return self.err("integer markers are not supported");
        }
        if f.len() != 3 && f.len() != 5 {
            return self.err("COLUMNS entry needs a column and one or two row/value pairs");
        }
        let col = match self.col_index.get(f[0]) {
            Some(&c) => c,
            None => {
                let c = self.doc.columns.len();
                self.col_index.insert(f[0].to_string(), c);
                self.doc.columns.push(f[0].to_string());
                c
            }
        };
        for pair in f[1..].chunks(2) {
            let row = self.row(pair[0])?;
            let value = self.number(pair[1])?;
            self.doc.entries.push(ColumnEntry { col, row, value });
        }
        Ok(())
    }

    /// RHS and RANGES lines: optional set name, then one or two row/value pairs.
    fn row_values(&self, f: &[&str]) -> Result<Vec<RowValue>, QpsError> {
        let pairs = match f.len() {
            2 | 4 => f,
            3 | 5 => &f[1..],
            _ => return self.err("expected [set] row value [row value]"),
        };
        pairs
            .chunks(2)
            .map(|p| Ok(RowValue { row: self.row(p[0])?, value: self.number(p[1])? }))
            .collect()
    }

    fn bounds_line(&mut self, f: &[&str]) -> Result<(), QpsError> {
        let kind = match f.first().copied() {
            Some("UP") => BoundKind::Up,
            Some("LO") => BoundKind::Lo,
            Some("FX") => BoundKind::Fx,
            Some("FR") => BoundKind::Fr,
            Some("MI") => BoundKind::Mi,
            Some("PL") => BoundKind::Pl,
            Some(other @ ("BV" | "LI" | "UI" | "SC")) => {
                return self.err(format!("integer bound type {other} is not supported"));
            }
            Some(other) => return self.err(format!("unknown bound type {other:?}")),
            None => return self.err("empty BOUNDS entry"),
        };
        let rest = &f[1..];
        let needs_value = matches!(kind, BoundKind::Up | BoundKind::Lo | BoundKind::Fx);
        // The set name is optional; decide by field count, then by which field names a column.
        let (col_field, value_field) = match (needs_value, rest.len()) {
            (true, 2) => (rest[0], Some(rest[1])),
            (true, 3) => (rest[1], Some(rest[2])),
            (false, 1) => (rest[0], None),
            (false, 2) if self.col_index.contains_key(rest[1]) => (rest[1], None),
            (false, 2) => (rest[0], Some(rest[1])),
            (false, 3) => (rest[1], Some(rest[2])),
            _ => return self.err("malformed BOUNDS entry"),
        };
        let col = self.col(col_field)?;
        let value = match value_field {
            Some(v) => Some(self.number(v)?),
            None => None,
        };
        let value = if needs_value { value } else { None };
        self.doc.bounds.push(BoundEntry { kind, col, value });
        Ok(())
    }

    fn quad_line(&mut self, f: &[&str]) -> Result<(), QpsError> {
        if f.len() != 3 {
            return self.err("quadratic entry needs two columns and a value");
        }
        let col1 = self.col(f[0])?;
        let col2 = self.col(f[1])?;
        let value = self.number(f[2])?;
        self.doc.quad.push(QuadEntry { col1, col2, value });
        Ok(())
    }
}

/// Parses QPS text. Lines starting with `*` are comments; section headers start in
/// column one and data lines are indented.
pub fn parse_qps(text: &str) -> Result<QpsDocument, QpsError> {
    let mut p = Parser {
        doc: QpsDocument::default(),
        row_index: HashMap::new(),
        col_index: HashMap::new(),
        objective: None,
        line: 0,
    };
    let mut section: Option<Section> = None;
    let mut seen_rows = false;
    let mut seen_columns = false;

    for (idx, raw) in text.lines().enumerate() {
        p.line = idx + 1;
        if raw.starts_with('*') || raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        let is_header = !raw.starts_with(|c: char| c.is_whitespace());

        if is_header {
            let Some((next, quad_kind)) = section_of(fields[0]) else {
                return p.err(format!("unknown section {:?}", fields[0]));
            };
            if section.is_none() && next != Section::Name {
                return p.err("document must start with NAME");
            }
            if section.is_some_and(|s| next <= s) {
                return p.err(format!("section {} out of order", fields[0]));
            }
            if next > Section::Rows && !seen_rows {
                return p.err("ROWS section missing");
            }
            if next > Section::Columns && !seen_columns {
                return p.err("COLUMNS section missing");
            }
            match next {
                Section::Name => p.doc.name = fields[1..].join(" "),
                Section::Rows => seen_rows = true,
                Section::Columns => {
                    seen_columns = true;
                    match p.objective {
                        Some(obj) => p.doc.objective_row = obj,
                        None => return p.err("no objective (N) row declared"),
                    }
                }
                Section::Quad => p.doc.quad_section = quad_kind.unwrap_or_default(),
                Section::Endata => return Ok(p.doc),
                _ => {}
            }
            if fields.len() > 1 && next != Section::Name {
                return p.err(format!("unexpected fields after {}", fields[0]));
            }
            section = Some(next);
            continue;
        }

        match section {
            None => return p.err("data before NAME"),
            Some(Section::Name) => return p.err("data line before ROWS"),
            Some(Section::Rows) => p.rows_line(&fields)?,
            Some(Section::Columns) => p.columns_line(&fields)?,
            Some(Section::Rhs) => {
                let values = p.row_values(&fields)?;
                p.doc.rhs.extend(values);
            }
            Some(Section::Ranges) => {
                let values = p.row_values(&fields)?;
                if values.iter().any(|v| v.row == p.doc.objective_row) {
                    return p.err("RANGES entry on the objective row");
                }
                p.doc.ranges.extend(values);
            }
            Some(Section::Bounds) => p.bounds_line(&fields)?,
            Some(Section::Quad) => p.quad_line(&fields)?,
            Some(Section::Endata) => unreachable!("parsing stops at ENDATA"),
        }
    }
    p.line = text.lines().count() + 1;
    p.err("missing ENDATA")
}
