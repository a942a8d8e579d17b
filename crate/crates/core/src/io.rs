//! Text formats: ASCII cell masks and CSV dumps.
//!
//! Mask files start with a header line `width height h` followed by
//! `height` rows of `width` whitespace-separated `0`/`1` values, top row
//! first. Lines starting with `#` are ignored.
//!
//! CSV column orders:
//!
//! | file    | columns                                      |
//! |---------|----------------------------------------------|
//! | profile | `r,psi,dpsi`                                 |
//! | field   | `i,j,x,y,value`                              |
//! | sweep   | `p,lambda_h,residual`                        |
//! | verdict | `id,case,left,right,slack,tolerance,verdict` |
//!
//! Floats are written with 17 significant digits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GridDomain;
use crate::radial::RadialProfile;

/// Formats a float with 17 significant digits, enough to round-trip.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.16e}")
}

/// Cell mask of a rectangular grid, `cells[j * width + i]` with `j = 0` the
/// bottom row.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub h: f64,
    pub cells: Vec<bool>,
}

impl Mask {
    /// Mask of the interior cells of `grid`.
    pub fn of_grid(grid: &GridDomain) -> Self {
        let (width, height) = grid.dims();
        Mask {
            width,
            height,
            h: grid.spacing(),
            cells: grid.mask(),
        }
    }

    /// Mask of a subset of the interior cells, given per interior cell.
    pub fn of_set(grid: &GridDomain, set: &[bool]) -> Result<Self> {
        if set.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "set has {} entries, grid has {} cells",
                set.len(),
                grid.len()
            )));
        }
        let (width, height) = grid.dims();
        let mut cells = vec![false; width * height];
        for (k, &(i, j)) in grid.cells().iter().enumerate() {
            cells[j * width + i] = set[k];
        }
        Ok(Mask {
            width,
            height,
            h: grid.spacing(),
            cells,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty mask file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!(
                "mask header must be `width height h`, got `{header}`"
            )));
        }
        let width: usize = fields[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad width `{}`", fields[0])))?;
        let height: usize = fields[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad height `{}`", fields[1])))?;
        let h: f64 = fields[2]
            .parse()
            .map_err(|_| Error::Parse(format!("bad spacing `{}`", fields[2])))?;
        if width == 0 || height == 0 {
            return Err(Error::Parse("mask dimensions must be positive".into()));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Parse(format!("spacing must be positive, got {h}")));
        }
        let total = width
            .checked_mul(height)
            .filter(|&n| n <= 1 << 28)
            .ok_or_else(|| {
                Error::Parse(format!("mask of {width} x {height} cells is too large"))
            })?;
        // Rows are read top first; storage is bottom row first.
        let mut rows: Vec<Vec<bool>> = Vec::new();
        for row in 0..height {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing mask row {}", row + 1)))?;
            let mut cells = Vec::with_capacity(width.min(line.len()));
            for tok in line.split_whitespace() {
                if cells.len() == width {
                    return Err(Error::Parse(format!(
                        "mask row {} has more than {width} entries",
                        row + 1
                    )));
                }
                cells.push(match tok {
                    "0" => false,
                    "1" => true,
                    _ => return Err(Error::Parse(format!("mask entry `{tok}` is not 0 or 1"))),
                });
            }
            if cells.len() != width {
                return Err(Error::Parse(format!(
                    "mask row {} has {} entries, expected {width}",
                    row + 1,
                    cells.len()
                )));
            }
            rows.push(cells);
        }
        let mut cells = Vec::with_capacity(total);
        rows.iter().rev().for_each(|r| cells.extend_from_slice(r));
        if let Some(extra) = lines.next() {
            return Err(Error::Parse(format!(
                "trailing content after mask rows: `{extra}`"
            )));
        }
        Ok(Mask {
            width,
            height,
            h,
            cells,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.width, self.height, fmt_f64(self.h));
        for j in (0..self.height).rev() {
            let row: Vec<&str> = (0..self.width)
                .map(|i| {
                    if self.cells[j * self.width + i] {
                        "1"
                    } else {
                        "0"
                    }
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// Grid domain with lower-left corner at `origin`; every boundary face counts `h`.
    pub fn to_grid(&self, origin: [f64; 2]) -> Result<GridDomain> {
        GridDomain::from_mask(self.h, self.width, self.height, origin, &self.cells)
    }
}

/// One row of a field dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldRow {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// One row of a sweep table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub lambda_h: f64,
    pub residual: f64,
}

/// One row of a verdict table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub id: String,
    /// Free-form label of the checked instance (domain, parameters).
    pub case: String,
    pub left: f64,
    pub right: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub verdict: String,
}

fn write_rows<const N: usize>(
    header: [&str; N],
    rows: impl Iterator<Item = [String; N]>,
) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("ascii output")
}

fn read_rows<T: for<'de> Deserialize<'de>>(text: &str, header: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let found = r.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Parse(format!(
            "expected columns `{}`",
            header.join(",")
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Parse(e.to_string())))
        .collect()
}

/// Profile dump with columns `r,psi,dpsi`.
pub fn profile_csv(profile: &RadialProfile) -> String {
    let rows = (0..profile.r.len()).map(|k| {
        [
            fmt_f64(profile.r[k]),
            fmt_f64(profile.psi[k]),
            fmt_f64(profile.dpsi[k]),
        ]
    });
    write_rows(["r", "psi", "dpsi"], rows)
}

/// Field dump with columns `i,j,x,y,value`, one row per interior cell.
pub fn field_csv(grid: &GridDomain, values: &[f64]) -> Result<String> {
    if values.len() != grid.len() {
        return Err(Error::InvalidArgument(format!(
            "field has {} values, grid has {} cells",
            values.len(),
            grid.len()
        )));
    }
    let rows = grid.cells().iter().enumerate().map(|(k, &(i, j))| {
        let [x, y] = grid.center(k);
        [
            i.to_string(),
            j.to_string(),
            fmt_f64(x),
            fmt_f64(y),
            fmt_f64(values[k]),
        ]
    });
    Ok(write_rows(["i", "j", "x", "y", "value"], rows))
}

pub fn parse_field_csv(text: &str) -> Result<Vec<FieldRow>> {
    let rows: Vec<FieldRow> = read_rows(text, &["i", "j", "x", "y", "value"])?;
    if let Some(bad) = rows
        .iter()
        .find(|r| !(r.x.is_finite() && r.y.is_finite() && r.value.is_finite()))
    {
        return Err(Error::Parse(format!(
            "non-finite entry in field row ({}, {})",
            bad.i, bad.j
        )));
    }
    Ok(rows)
}

/// Reassembles a field on `grid` from dumped rows; every interior cell must appear once.
pub fn field_from_rows(grid: &GridDomain, rows: &[FieldRow]) -> Result<Vec<f64>> {
    let mut values = vec![f64::NAN; grid.len()];
    for r in rows {
        let k = grid
            .cell_at(r.i as isize, r.j as isize)
            .ok_or_else(|| Error::Parse(format!("cell ({}, {}) is not interior", r.i, r.j)))?;
        if !values[k].is_nan() {
            return Err(Error::Parse(format!(
                "cell ({}, {}) appears twice",
                r.i, r.j
            )));
        }
        values[k] = r.value;
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Parse(
            "field dump does not cover every interior cell".into(),
        ));
    }
    Ok(values)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    write_rows(
        ["p", "lambda_h", "residual"],
        rows.iter()
            .map(|r| [fmt_f64(r.p), fmt_f64(r.lambda_h), fmt_f64(r.residual)]),
    )
}

pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    read_rows(text, &["p", "lambda_h", "residual"])
}

pub fn verdict_csv(rows: &[VerdictRow]) -> String {
    let rows = rows.iter().map(|r| {
        [
            r.id.clone(),
            r.case.clone(),
            fmt_f64(r.left),
            fmt_f64(r.right),
            fmt_f64(r.slack),
            fmt_f64(r.tolerance),
            r.verdict.clone(),
        ]
    });
    write_rows(
        [
            "id",
            "case",
            "left",
            "right",
            "slack",
            "tolerance",
            "verdict",
        ],
        rows,
    )
}

pub fn parse_verdict_csv(text: &str) -> Result<Vec<VerdictRow>> {
    read_rows(
        text,
        &[
            "id",
            "case",
            "left",
            "right",
            "slack",
            "tolerance",
            "verdict",
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, DomainSpec};

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn mask_round_trip() {
        let grid = rasterize(&DomainSpec::ball(1.0), 0.25).unwrap();
        let mask = Mask::of_grid(&grid);
        let text = mask.to_text();
        assert!(text.starts_with(&format!("{} {} ", mask.width, mask.height)));
        let back = Mask::parse(&text).unwrap();
        assert_eq!(back, mask);
        let g2 = back.to_grid(grid.origin()).unwrap();
        assert_eq!(g2.len(), grid.len());
        assert_eq!(g2.cells(), grid.cells());
    }

    #[test]
    fn mask_top_row_first() {
        let m = Mask::parse("2 2 0.5\n1 0\n0 0\n").unwrap();
        assert_eq!(m.cells, vec![false, false, true, false]);
    }

    #[test]
    fn mask_rejects_malformed() {
        for bad in [
            "",
            "2 2\n1 1\n1 1",
            "2 2 0.5\n1 1\n1",
            "2 2 0.5\n1 2\n1 1",
            "2 1 -1\n1 1",
            "2 1 0.5\n1 1\n1 1",
            "0 3 1\n",
        ] {
            assert!(matches!(Mask::parse(bad), Err(Error::Parse(_))), "{bad:?}");
        }
    }

    #[test]
    fn field_round_trip() {
        let grid = rasterize(&DomainSpec::square(1.0), 0.25).unwrap();
        let values: Vec<f64> = (0..grid.len()).map(|k| (k as f64).sqrt() / 7.0).collect();
        let text = field_csv(&grid, &values).unwrap();
        assert!(text.starts_with("i,j,x,y,value\n"));
        let rows = parse_field_csv(&text).unwrap();
        assert_eq!(field_from_rows(&grid, &rows).unwrap(), values);
        assert!(field_from_rows(&grid, &rows[1..]).is_err());
    }

    #[test]
    fn tables_round_trip() {
        let sweep = vec![SweepRow {
            p: 1.5,
            lambda_h: 0.97,
            residual: 1e-5,
        }];
        assert_eq!(parse_sweep_csv(&sweep_csv(&sweep)).unwrap(), sweep);
        let verdicts = vec![VerdictRow {
            id: "fk1".into(),
            case: "square, beta = 0.5".into(),
            left: 1.2,
            right: 1.0,
            slack: 0.2,
            tolerance: 0.05,
            verdict: "pass".into(),
        }];
        assert_eq!(
            parse_verdict_csv(&verdict_csv(&verdicts)).unwrap(),
            verdicts
        );
        assert!(parse_sweep_csv("p,lambda\n1,2\n").is_err());
    }
}
