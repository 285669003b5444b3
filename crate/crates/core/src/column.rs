//! Typed spreadsheet columns, formatted examples and task files.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{Datelike, NaiveDate, NaiveDateTime, NaiveTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rule::Rule;

/// Opaque format identifier. `0` is reserved for unformatted cells.
pub type FormatId = u32;

pub const UNFORMATTED: FormatId = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellType {
    Number,
    Date,
    Text,
}

impl CellType {
    pub fn as_str(self) -> &'static str {
        match self {
            CellType::Number => "number",
            CellType::Date => "date",
            CellType::Text => "text",
        }
    }
}

impl fmt::Display for CellType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Calendar date with an optional time of day.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DateValue {
    pub date: NaiveDate,
    pub time: Option<NaiveTime>,
}

impl DateValue {
    pub fn day(&self) -> u32 {
        self.date.day()
    }

    pub fn month(&self) -> u32 {
        self.date.month()
    }

    pub fn year(&self) -> i32 {
        self.date.year()
    }

    /// ISO weekday, Monday = 1 through Sunday = 7.
    pub fn weekday(&self) -> u32 {
        self.date.weekday().number_from_monday()
    }

    pub fn parse(s: &str) -> Option<DateValue> {
        let s = s.trim();
        if let Ok(date) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
            return Some(DateValue { date, time: None });
        }
        for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
            if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
                return Some(DateValue {
                    date: dt.date(),
                    time: Some(dt.time()),
                });
            }
        }
        chrono::DateTime::parse_from_rfc3339(s).ok().map(|dt| {
            let naive = dt.naive_local();
            DateValue {
                date: naive.date(),
                time: Some(naive.time()),
            }
        })
    }
}

impl fmt::Display for DateValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.time {
            None => write!(f, "{}", self.date.format("%Y-%m-%d")),
            Some(t) => write!(f, "{}T{}", self.date.format("%Y-%m-%d"), t.format("%H:%M:%S%.f")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CellValue {
    Number(f64),
    Date(DateValue),
    Text(String),
}

impl CellValue {
    pub fn cell_type(&self) -> CellType {
        match self {
            CellValue::Number(_) => CellType::Number,
            CellValue::Date(_) => CellType::Date,
            CellValue::Text(_) => CellType::Text,
        }
    }

    /// Infers the type of a raw string, trying `hint` first.
    pub fn infer(raw: &str, hint: Option<CellType>) -> CellValue {
        let order: &[CellType] = match hint {
            Some(CellType::Date) => &[CellType::Date, CellType::Number, CellType::Text],
            Some(CellType::Text) => &[CellType::Text],
            _ => &[CellType::Number, CellType::Date, CellType::Text],
        };
        for ty in order {
            if let Some(v) = CellValue::parse_as(raw, *ty) {
                return v;
            }
        }
        CellValue::Text(raw.to_string())
    }

    pub fn parse_as(raw: &str, ty: CellType) -> Option<CellValue> {
        match ty {
            CellType::Number => parse_number(raw).map(CellValue::Number),
            CellType::Date => DateValue::parse(raw).map(CellValue::Date),
            CellType::Text => Some(CellValue::Text(raw.to_string())),
        }
    }
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellValue::Number(n) => f.write_str(&format_number(*n)),
            CellValue::Date(d) => d.fmt(f),
            CellValue::Text(s) => f.write_str(s),
        }
    }
}

fn parse_number(raw: &str) -> Option<f64> {
    let t = raw.trim();
    // Rust accepts "inf"/"nan"; spreadsheets do not.
    if t.is_empty() || !t.bytes().any(|b| b.is_ascii_digit()) {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Shortest decimal that parses back to the same float; `-0` prints as `0`.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub value: CellValue,
    pub format: FormatId,
}

impl Cell {
    pub fn new(value: CellValue) -> Self {
        Cell {
            value,
            format: UNFORMATTED,
        }
    }

    pub fn with_format(value: CellValue, format: FormatId) -> Self {
        Cell { value, format }
    }

    pub fn number(v: f64) -> Self {
        Cell::new(CellValue::Number(v))
    }

    pub fn text(s: impl Into<String>) -> Self {
        Cell::new(CellValue::Text(s.into()))
    }

    pub fn date(y: i32, m: u32, d: u32) -> Self {
        let date = NaiveDate::from_ymd_opt(y, m, d).expect("valid calendar date");
        Cell::new(CellValue::Date(DateValue { date, time: None }))
    }

    pub fn cell_type(&self) -> CellType {
        self.value.cell_type()
    }
}

/// An ordered, non-empty column of cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    cells: Vec<Cell>,
    dominant_type: CellType,
}

impl Column {
    pub fn new(cells: Vec<Cell>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::EmptyColumn);
        }
        let mut counts = [0usize; 3];
        for c in &cells {
            counts[c.cell_type() as usize] += 1;
        }
        let max = *counts.iter().max().unwrap();
        // Ties resolve to Text.
        let dominant_type = [CellType::Text, CellType::Date, CellType::Number]
            .into_iter()
            .find(|t| counts[*t as usize] == max)
            .unwrap();
        Ok(Column {
            cells,
            dominant_type,
        })
    }

    pub fn from_values(values: impl IntoIterator<Item = CellValue>) -> Result<Self> {
        Column::new(values.into_iter().map(Cell::new).collect())
    }

    pub fn numbers(values: &[f64]) -> Result<Self> {
        Column::from_values(values.iter().map(|v| CellValue::Number(*v)))
    }

    pub fn texts<S: AsRef<str>>(values: &[S]) -> Result<Self> {
        Column::from_values(values.iter().map(|v| CellValue::Text(v.as_ref().to_string())))
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn dominant_type(&self) -> CellType {
        self.dominant_type
    }

    pub fn has_type(&self, ty: CellType) -> bool {
        self.cells.iter().any(|c| c.cell_type() == ty)
    }

    /// Returns a copy with every cell's format replaced.
    pub fn with_formats(&self, formats: &[FormatId]) -> Column {
        let cells = self
            .cells
            .iter()
            .zip(formats)
            .map(|(c, f)| Cell::with_format(c.value.clone(), *f))
            .collect();
        Column {
            cells,
            dominant_type: self.dominant_type,
        }
    }

    /// Keeps the cells at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Column> {
        Column::new(indices.iter().map(|&i| self.cells[i].clone()).collect())
    }

    pub fn to_cell_records(&self) -> Vec<CellRecord> {
        self.cells.iter().map(CellRecord::from_cell).collect()
    }

    pub fn from_cell_records(records: &[CellRecord]) -> Result<Column> {
        let cells = records
            .iter()
            .enumerate()
            .map(|(i, r)| r.to_cell().map_err(|e| Error::InvalidTask(format!("cell {i}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Column::new(cells)
    }
}

/// Reads one column of an RFC-4180 CSV document. Every row is data.
pub fn ingest_csv(raw: &str, column_index: usize, type_hint: Option<CellType>) -> Result<Column> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(raw.as_bytes());
    let mut cells = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let field = record.get(column_index).ok_or(Error::ColumnIndex {
            index: column_index,
            width: record.len(),
        })?;
        cells.push(Cell::new(CellValue::infer(field, type_hint)));
    }
    Column::new(cells)
}

/// One cell in the task JSON schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub value: serde_json::Value,
    #[serde(rename = "type")]
    pub cell_type: CellType,
    #[serde(default)]
    pub format: FormatId,
}

impl CellRecord {
    pub fn from_cell(cell: &Cell) -> Self {
        let value = match &cell.value {
            CellValue::Number(n) => serde_json::Number::from_f64(*n)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            other => serde_json::Value::String(other.to_string()),
        };
        CellRecord {
            value,
            cell_type: cell.cell_type(),
            format: cell.format,
        }
    }

    pub fn to_cell(&self) -> std::result::Result<Cell, String> {
        let raw = match &self.value {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => {
                if self.cell_type == CellType::Number {
                    let v = n.as_f64().ok_or("number out of range")?;
                    return Ok(Cell::with_format(CellValue::Number(v), self.format));
                }
                n.to_string()
            }
            other => return Err(format!("unsupported value {other}")),
        };
        let value = CellValue::parse_as(&raw, self.cell_type)
            .ok_or_else(|| format!("`{raw}` is not a valid {}", self.cell_type))?;
        Ok(Cell::with_format(value, self.format))
    }
}

/// Wire form of a task file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TaskRecord {
    pub column: Vec<CellRecord>,
    #[serde(default)]
    pub observed: Vec<usize>,
    #[serde(default)]
    pub gold_rule: Option<String>,
    #[serde(default)]
    pub gold_formats: Option<Vec<FormatId>>,
}

/// A column, the formatted examples a user supplied, and optional gold answers.
#[derive(Clone, Debug)]
pub struct Task {
    pub column: Column,
    pub observed: BTreeMap<usize, FormatId>,
    pub gold_rule: Option<Rule>,
    pub gold_formats: Option<Vec<FormatId>>,
}

impl Task {
    pub fn new(
        column: Column,
        observed: BTreeMap<usize, FormatId>,
        gold_rule: Option<Rule>,
        gold_formats: Option<Vec<FormatId>>,
    ) -> Result<Self> {
        let n = column.len();
        if let Some(g) = &gold_formats {
            if g.len() != n {
                return Err(Error::InvalidTask(format!(
                    "gold_formats has {} entries for {n} cells",
                    g.len()
                )));
            }
        }
        for (&i, &f) in &observed {
            if i >= n {
                return Err(Error::ObservedOutOfRange { index: i, len: n });
            }
            if f == UNFORMATTED {
                return Err(Error::UnformattedExample(i));
            }
            if let Some(g) = &gold_formats {
                if g[i] == UNFORMATTED {
                    return Err(Error::InvalidTask(format!(
                        "observed cell {i} is unformatted in gold_formats"
                    )));
                }
            }
        }
        Ok(Task {
            column,
            observed,
            gold_rule,
            gold_formats,
        })
    }

    /// Builds a task whose observed formats are read from the column's cells.
    pub fn from_column(column: Column, observed: &[usize]) -> Result<Self> {
        let n = column.len();
        let mut map = BTreeMap::new();
        for &i in observed {
            let cell = column
                .cells()
                .get(i)
                .ok_or(Error::ObservedOutOfRange { index: i, len: n })?;
            map.insert(i, cell.format);
        }
        Task::new(column, map, None, None)
    }

    pub fn len(&self) -> usize {
        self.column.len()
    }

    pub fn is_empty(&self) -> bool {
        self.column.is_empty()
    }

    /// Distinct observed formats, ascending.
    pub fn observed_formats(&self) -> Vec<FormatId> {
        let mut f: Vec<FormatId> = self.observed.values().copied().collect();
        f.sort_unstable();
        f.dedup();
        f
    }

    /// Indices of gold-formatted cells, top to bottom.
    pub fn gold_formatted(&self) -> Result<Vec<usize>> {
        let gold = self.gold_formats.as_ref().ok_or(Error::MissingGold)?;
        Ok((0..gold.len()).filter(|&i| gold[i] != UNFORMATTED).collect())
    }

    /// Copy of this task that exposes the given gold-formatted cells as examples.
    /// Unobserved cells are shown unformatted.
    pub fn reveal(&self, indices: &[usize]) -> Result<Task> {
        let gold = self.gold_formats.as_ref().ok_or(Error::MissingGold)?;
        let observed: BTreeMap<usize, FormatId> = indices.iter().map(|&i| (i, gold[i])).collect();
        let visible: Vec<FormatId> = (0..gold.len())
            .map(|i| observed.get(&i).copied().unwrap_or(UNFORMATTED))
            .collect();
        Task::new(
            self.column.with_formats(&visible),
            observed,
            self.gold_rule.clone(),
            self.gold_formats.clone(),
        )
    }

    /// Reveals the first `k` formatted cells in column order (clamped).
    pub fn reveal_first(&self, k: usize) -> Result<Task> {
        let formatted = self.gold_formatted()?;
        let k = k.min(formatted.len());
        self.reveal(&formatted[..k])
    }

    pub fn to_record(&self) -> TaskRecord {
        TaskRecord {
            column: self.column.to_cell_records(),
            observed: self.observed.keys().copied().collect(),
            gold_rule: self.gold_rule.as_ref().map(|r| r.to_string()),
            gold_formats: self.gold_formats.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_record()).expect("task serializes")
    }

    pub fn from_record(record: TaskRecord) -> Result<Task> {
        let column = Column::from_cell_records(&record.column)?;
        let gold_rule = record
            .gold_rule
            .as_deref()
            .filter(|s| !s.trim().is_empty())
            .map(Rule::parse)
            .transpose()?;
        let mut observed = BTreeMap::new();
        for &i in &record.observed {
            let cell = column.cells().get(i).ok_or(Error::ObservedOutOfRange {
                index: i,
                len: column.len(),
            })?;
            observed.insert(i, cell.format);
        }
        Task::new(column, observed, gold_rule, record.gold_formats)
    }
}

/// Parses and validates a task file.
pub fn load_task(json: &str) -> Result<Task> {
    let record: TaskRecord =
        serde_json::from_str(json).map_err(|e| Error::InvalidTask(e.to_string()))?;
    Task::from_record(record)
}

/// Unobserved cells positioned between two observed examples.
pub fn soft_negatives(task: &Task) -> Vec<usize> {
    let (Some(&first), Some(&last)) = (task.observed.keys().next(), task.observed.keys().next_back())
    else {
        return Vec::new();
    };
    (first + 1..last)
        .filter(|i| !task.observed.contains_key(i))
        .collect()
}
