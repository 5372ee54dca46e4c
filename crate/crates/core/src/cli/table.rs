use std::fs::File;
use std::io::Write;
use std::path::Path;

use num_rational::BigRational;

use super::CliError;
use crate::dynamics::{Mode, OrbitRecord};
use crate::picard::{Composition, PicardError};
use crate::scalar::format_rational;
use crate::surface::{SurfacePoint, C64};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Rational(BigRational),
    Empty,
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Rational(r) => format_rational(r),
            Cell::Empty => String::new(),
        }
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.header).map_err(|e| CliError::Io(e.to_string()))?;
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.header.len() {
                return Err(CliError::Invariant(format!(
                    "row {i} has {} cells, schema has {} columns",
                    row.len(),
                    self.header.len()
                )));
            }
            w.write_record(row.iter().map(Cell::render)).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

/// Writes `table` as RFC 4180 CSV.
pub fn emit_table(table: &Table, path: &Path) -> Result<(), CliError> {
    let bytes = table.to_csv()?;
    let mut f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    f.write_all(&bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

const FACTORS: [&str; 3] = ["x", "y", "z"];

fn orbit_header() -> Vec<String> {
    let mut h = vec!["step".to_string(), "composition".to_string()];
    for f in FACTORS {
        for k in 0..2 {
            h.push(format!("{f}{k}_re"));
            h.push(format!("{f}{k}_im"));
        }
    }
    for f in FACTORS {
        h.push(format!("renorm_log_{f}"));
    }
    h.push("exact".to_string());
    h
}

fn composition_label(c: &Composition) -> String {
    if c.inverse {
        format!("{}^-1", c.order_string())
    } else {
        c.order_string()
    }
}

fn parse_composition(s: &str) -> Result<Composition, PicardError> {
    match s.strip_suffix("^-1") {
        Some(base) => Ok(base.parse::<Composition>()?.inverted()),
        None => s.parse(),
    }
}

/// Row `k` holds `points[k]` and the renormalization logs of the step that
/// produced it (empty for the start point).
pub fn orbit_table(rec: &OrbitRecord) -> Table {
    let mut t = Table::new(orbit_header());
    let label = composition_label(&rec.composition);
    for (k, p) in rec.points.iter().enumerate() {
        let mut row = vec![Cell::Int(k as i64), Cell::Text(label.clone())];
        for w in p.pairs() {
            for z in w {
                row.push(Cell::Float(z.re));
                row.push(Cell::Float(z.im));
            }
        }
        match k.checked_sub(1).and_then(|i| rec.renorm_logs.get(i)) {
            Some(kappa) => row.extend(kappa.iter().map(|&x| Cell::Float(x))),
            None => row.extend([Cell::Empty, Cell::Empty, Cell::Empty]),
        }
        row.push(match rec.exact.get(k) {
            Some(e) => Cell::Text(e.to_string()),
            None => Cell::Empty,
        });
        t.push(row);
    }
    t
}

/// Reads an orbit CSV written by [`orbit_table`] back into a floating record.
pub fn read_orbit_csv(bytes: &[u8]) -> Result<OrbitRecord, CliError> {
    let mut r = csv::Reader::from_reader(bytes);
    let header: Vec<String> = r.headers().map_err(|e| CliError::Io(e.to_string()))?.iter().map(String::from).collect();
    if header != orbit_header() {
        return Err(CliError::Config("not an orbit table".into()));
    }
    let mut points = Vec::new();
    let mut renorm_logs = Vec::new();
    let mut composition = Composition::default();
    let mut exact_cells = 0;
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Io(e.to_string()))?;
        let num = |i: usize| -> Result<f64, CliError> {
            rec[i].parse::<f64>().map_err(|_| CliError::Config(format!("row {k}, column {}: bad number", header[i])))
        };
        composition = parse_composition(&rec[1]).map_err(CliError::Picard)?;
        let mut pairs = [[C64::new(0.0, 0.0); 2]; 3];
        for (j, pair) in pairs.iter_mut().enumerate() {
            for (c, z) in pair.iter_mut().enumerate() {
                let base = 2 + 4 * j + 2 * c;
                *z = C64::new(num(base)?, num(base + 1)?);
            }
        }
        points.push(SurfacePoint::new(pairs).map_err(|e| CliError::Config(format!("row {k}: {e}")))?);
        if k > 0 {
            renorm_logs.push([num(14)?, num(15)?, num(16)?]);
        }
        if !rec[17].is_empty() {
            exact_cells += 1;
        }
    }
    Ok(OrbitRecord {
        points,
        renorm_logs,
        composition,
        mode: if exact_cells > 0 { Mode::Exact } else { Mode::Float },
        exact: Vec::new(),
        abort: None,
    })
}
