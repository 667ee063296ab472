//! Numeric CSV tables: loss histories, solution exports and oracle dumps.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which is
//! enough for every `f64` to read back bit-for-bit. Columns whose values
//! are all integers (epochs) are written without an exponent.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::oracle::ReferenceSolution;
use crate::problems::ProblemSpec;
use crate::train::LossRow;

pub const LOSS_HISTORY_HEADER: [&str; 7] = ["epoch", "l_r", "l_ic", "l_bc", "l_data", "total", "lr"];

/// 17 significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Columns written as plain integers.
    pub integer: Vec<bool>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        let header: Vec<String> = header.into_iter().map(Into::into).collect();
        let integer = vec![false; header.len()];
        Self {
            header,
            rows: Vec::new(),
            integer,
        }
    }

    pub fn with_integer_column(mut self, name: &str) -> Self {
        if let Some(i) = self.header.iter().position(|h| h == name) {
            self.integer[i] = true;
        }
        self
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::ShapeMismatch {
                expected: self.header.len(),
                actual: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = ::csv::Writer::from_writer(out);
        w.write_record(&self.header).map_err(io_err)?;
        for row in &self.rows {
            let cells = row.iter().zip(&self.integer).map(|(&v, &int)| {
                if int && v.fract() == 0.0 && v.abs() < 9.0e15 {
                    format!("{}", v as i64)
                } else {
                    format_float(v)
                }
            });
            w.write_record(cells).map_err(io_err)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut r = ::csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = r
            .headers()
            .map_err(parse_err)?
            .iter()
            .map(str::to_string)
            .collect();
        let mut integer = vec![true; header.len()];
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record.map_err(parse_err)?;
            if record.len() != header.len() {
                return Err(Error::Parse(format!(
                    "row {} has {} cells, header has {}",
                    rows.len() + 1,
                    record.len(),
                    header.len()
                )));
            }
            let mut row = Vec::with_capacity(header.len());
            for (j, cell) in record.iter().enumerate() {
                let cell = cell.trim();
                if cell.parse::<i64>().is_err() {
                    integer[j] = false;
                }
                row.push(
                    cell.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad number '{cell}' in column {}", header[j])))?,
                );
            }
            rows.push(row);
        }
        if rows.is_empty() {
            integer.iter_mut().for_each(|i| *i = false);
        }
        Ok(Self {
            header,
            rows,
            integer,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv_string()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

fn io_err(e: ::csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn parse_err(e: ::csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// `epoch,l_r,l_ic,l_bc,l_data,total,lr`
pub fn loss_history_table(rows: &[LossRow]) -> Table {
    let mut t = Table::new(LOSS_HISTORY_HEADER).with_integer_column("epoch");
    for r in rows {
        t.rows.push(vec![r.epoch as f64, r.l_r, r.l_ic, r.l_bc, r.l_data, r.total, r.lr]);
    }
    t
}

pub fn loss_history_from_table(table: &Table) -> Result<Vec<LossRow>> {
    if table.header != LOSS_HISTORY_HEADER {
        return Err(Error::Parse(format!(
            "loss history header {:?}, expected {:?}",
            table.header, LOSS_HISTORY_HEADER
        )));
    }
    table
        .rows
        .iter()
        .map(|r| {
            if r[0] < 0.0 || r[0].fract() != 0.0 {
                return Err(Error::Parse(format!("epoch {} is not a count", r[0])));
            }
            Ok(LossRow {
                epoch: r[0] as usize,
                l_r: r[1],
                l_ic: r[2],
                l_bc: r[3],
                l_data: r[4],
                total: r[5],
                lr: r[6],
            })
        })
        .collect()
}

/// Axis columns followed by one column per output, named after the
/// problem's coordinates (`t,x,y,z` for Lorenz).
pub fn reference_table(spec: &ProblemSpec, reference: &ReferenceSolution) -> Result<Table> {
    if reference.dim != spec.in_dim || reference.outputs() != spec.out_dim {
        return Err(Error::ShapeMismatch {
            expected: spec.in_dim + spec.out_dim,
            actual: reference.dim + reference.outputs(),
        });
    }
    let header = spec.axis_names.iter().chain(&spec.output_names).copied();
    let mut t = Table::new(header);
    for i in 0..reference.len() {
        let mut row = reference.point(i).to_vec();
        row.extend(reference.at(i));
        t.rows.push(row);
    }
    Ok(t)
}

/// Header of `solution.csv`: `axis0[,axis1],pred0[,..],ref0[,..],abs_err0[,..]`.
pub fn solution_header(in_dim: usize, out_dim: usize) -> Vec<String> {
    let mut h: Vec<String> = (0..in_dim).map(|a| format!("axis{a}")).collect();
    for prefix in ["pred", "ref", "abs_err"] {
        h.extend((0..out_dim).map(|o| format!("{prefix}{o}")));
    }
    h
}

/// Predictions next to the reference. ODEs use the full evaluation grid;
/// PDEs use the exported time slices.
pub fn solution_table(
    spec: &ProblemSpec,
    reference: &ReferenceSolution,
    predict: impl Fn(&[f64]) -> Result<Vec<f64>>,
) -> Result<Table> {
    let (din, dout) = (spec.in_dim, spec.out_dim);
    let mut table = Table::new(solution_header(din, dout));
    let mut push = |coords: Vec<f64>, truth: Vec<f64>| -> Result<()> {
        let pred = predict(&coords)?;
        if pred.len() < dout || truth.len() < dout {
            return Err(Error::ShapeMismatch {
                expected: dout,
                actual: pred.len().min(truth.len()),
            });
        }
        let mut row = coords;
        row.extend_from_slice(&pred[..dout]);
        row.extend_from_slice(&truth[..dout]);
        row.extend((0..dout).map(|o| (pred[o] - truth[o]).abs()));
        table.push(row)
    };
    if spec.is_pde() {
        for slice in &reference.slices {
            for (j, &x) in slice.x.iter().enumerate() {
                let truth = slice.values.iter().map(|v| v[j]).collect();
                push(vec![x, slice.t], truth)?;
            }
        }
    } else {
        for i in 0..reference.len() {
            push(reference.point(i).to_vec(), reference.at(i))?;
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_history_round_trip() {
        let rows = vec![
            LossRow {
                epoch: 0,
                l_r: 1.0 / 3.0,
                l_ic: 2.815,
                l_bc: 0.0,
                l_data: f64::MIN_POSITIVE,
                total: 3.1483333333333334,
                lr: 1e-3,
            },
            LossRow {
                epoch: 100,
                l_r: 1.2345678901234567e-7,
                l_ic: -0.0,
                l_bc: 5e-324,
                l_data: 1e300,
                total: 0.1 + 0.2,
                lr: 1e-4,
            },
        ];
        let text = loss_history_table(&rows).to_csv_string();
        assert!(text.starts_with("epoch,l_r,l_ic,l_bc,l_data,total,lr\n0,"));
        assert!(text.contains("\n100,"));
        let back = loss_history_from_table(&Table::parse(&text).unwrap()).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a.epoch, b.epoch);
            for (x, y) in [(a.l_r, b.l_r), (a.l_ic, b.l_ic), (a.l_data, b.l_data), (a.total, b.total), (a.lr, b.lr)] {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        let again = Table::parse(&text).unwrap().to_csv_string();
        assert_eq!(again, text);
    }

    #[test]
    fn rejects_ragged_rows_and_bad_cells() {
        assert!(Table::parse("a,b\n1,2\n3\n").is_err());
        assert!(Table::parse("a,b\n1,x\n").is_err());
        assert!(loss_history_from_table(&Table::parse("epoch,total\n1,2\n").unwrap()).is_err());
    }

    #[test]
    fn solution_header_shape() {
        assert_eq!(solution_header(1, 1), ["axis0", "pred0", "ref0", "abs_err0"]);
        assert_eq!(solution_header(2, 1).len(), 5);
        assert_eq!(solution_header(1, 3).len(), 10);
    }
}
