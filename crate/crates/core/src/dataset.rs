//! Labeled point sets and their CSV representation.
//!
//! The on-disk format is a UTF-8 CSV whose header names the input columns
//! `x0..x{d-1}` followed by the target columns `y0..y{do-1}`. Values are plain
//! decimal floats, comma separated, no quoting.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Points `x_i ∈ R^d` paired with targets `y_i ∈ R^{d_o}`, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    points: Array2<f64>,
    targets: Array2<f64>,
}

impl LabeledDataset {
    pub fn new(points: Array2<f64>, targets: Array2<f64>) -> Result<Self> {
        let (n, d) = points.dim();
        let (nt, d_o) = targets.dim();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if n != nt {
            return Err(Error::shape(format!("{n} points but {nt} target rows")));
        }
        if d == 0 || d_o == 0 {
            return Err(Error::shape(format!(
                "input dimension {d} and target dimension {d_o} must both be >= 1"
            )));
        }
        if !points.iter().chain(targets.iter()).all(|v| v.is_finite()) {
            return Err(Error::param("dataset contains non-finite values"));
        }
        Ok(Self { points, targets })
    }

    /// Builds a dataset from 1-d inputs and scalar targets.
    pub fn from_1d(xs: &[f64], ys: &[f64]) -> Result<Self> {
        let points = Array2::from_shape_vec((xs.len(), 1), xs.to_vec()).map_err(|e| Error::shape(e.to_string()))?;
        let targets = Array2::from_shape_vec((ys.len(), 1), ys.to_vec()).map_err(|e| Error::shape(e.to_string()))?;
        Self::new(points, targets)
    }

    pub fn points(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }

    pub fn targets(&self) -> ArrayView2<'_, f64> {
        self.targets.view()
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.targets.ncols()
    }

    pub fn into_parts(self) -> (Array2<f64>, Array2<f64>) {
        (self.points, self.targets)
    }

    /// Divides every input column by its maximum absolute value so each
    /// column lies in `[-1, 1]`. All-zero columns are left as they are.
    pub fn normalize_dimensions(&self) -> Self {
        let mut points = self.points.clone();
        for mut col in points.axis_iter_mut(Axis(1)) {
            let max_abs = col.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if max_abs > 0.0 {
                col.mapv_inplace(|v| v / max_abs);
            }
        }
        Self {
            points,
            targets: self.targets.clone(),
        }
    }

    /// Rows `indices` in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            points: self.points.select(Axis(0), indices),
            targets: self.targets.select(Axis(0), indices),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (0..self.input_dim())
            .map(|j| format!("x{j}"))
            .chain((0..self.output_dim()).map(|j| format!("y{j}")))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for (x, y) in self.points.rows().into_iter().zip(self.targets.rows()) {
            let mut first = true;
            for v in x.iter().chain(y.iter()) {
                if !first {
                    out.push(',');
                }
                first = false;
                write!(out, "{v}").expect("writing to a String cannot fail");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the CSV format; `origin` is only used in error messages.
    pub fn from_csv_str(text: &str, origin: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header".into()))?;
        let columns: Vec<&str> = header.trim_end_matches('\r').split(',').collect();
        let d = columns.iter().take_while(|c| c.starts_with('x')).count();
        let d_o = columns.len() - d;
        for (j, name) in columns.iter().enumerate() {
            let expected = if j < d { format!("x{j}") } else { format!("y{}", j - d) };
            if *name != expected {
                return Err(parse_err(
                    1,
                    format!("header column {j} is `{name}`, expected `{expected}`"),
                ));
            }
        }
        if d == 0 || d_o == 0 {
            return Err(parse_err(
                1,
                "header needs at least one x column and one y column".into(),
            ));
        }

        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut rows = 0;
        for (idx, raw) in lines {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != d + d_o {
                return Err(parse_err(
                    line_no,
                    format!("expected {} fields, found {}", d + d_o, fields.len()),
                ));
            }
            for (j, field) in fields.iter().enumerate() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("field {j} `{field}` is not a number")))?;
                if !v.is_finite() {
                    return Err(parse_err(line_no, format!("field {j} is not finite")));
                }
                if j < d {
                    xs.push(v);
                } else {
                    ys.push(v);
                }
            }
            rows += 1;
        }
        if rows == 0 {
            return Err(parse_err(1, "no data rows".into()));
        }
        let points = Array2::from_shape_vec((rows, d), xs).expect("row-major by construction");
        let targets = Array2::from_shape_vec((rows, d_o), ys).expect("row-major by construction");
        Self::new(points, targets)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::from_csv_str(&text, &path.display().to_string())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}
