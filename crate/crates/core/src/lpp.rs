//! Last-passage times over a sampled weight field.
//!
//! Convention: a path from `a` to `b` collects the weights of the `‖b − a‖₁`
//! sites it visits after leaving `a`, so `X(a)` is excluded and `X(b)`
//! included. With `a` the origin this gives `T(0) = 0` and
//! `T(z) = X(z) + max_{i: zᵢ > 0} T(z − eᵢ)`.

use std::io::{self, Write};

use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::numfmt::sig12;
use crate::weights::WeightDistribution;

pub const DEFAULT_CELL_CAP: u128 = 200_000_000;

/// Dense weights on the box `[0, bounds]`, row-major with the last
/// coordinate varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    bounds: LatticePoint,
    strides: Vec<usize>,
    values: Vec<f64>,
}

/// Number of lattice points in `[0, bounds]`, refusing boxes above `cap`.
pub fn box_cells(bounds: &LatticePoint, cap: u128) -> Result<usize> {
    let cells = bounds
        .coords()
        .iter()
        .try_fold(1u128, |acc, &b| acc.checked_mul(b as u128 + 1))
        .unwrap_or(u128::MAX);
    if cells > cap {
        return Err(Error::FieldTooLarge { cells, cap });
    }
    Ok(cells as usize)
}

fn row_major_strides(extent: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; extent.len()];
    for i in (0..extent.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * extent[i + 1];
    }
    strides
}

impl WeightField {
    pub fn from_values(bounds: LatticePoint, values: Vec<f64>) -> Result<Self> {
        let cells = box_cells(&bounds, u128::MAX)?;
        if values.len() != cells {
            return Err(Error::DimensionMismatch {
                expected: cells,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "weight field entries must be finite".into(),
            ));
        }
        let extent: Vec<usize> = bounds.coords().iter().map(|b| b + 1).collect();
        Ok(Self {
            strides: row_major_strides(&extent),
            bounds,
            values,
        })
    }

    /// Samples every site of `[0, bounds]` in row-major order.
    pub fn sample<R: Rng + ?Sized>(
        dist: &WeightDistribution,
        bounds: LatticePoint,
        rng: &mut R,
        cell_cap: u128,
    ) -> Result<Self> {
        let cells = box_cells(&bounds, cell_cap)?;
        let mut values = vec![0.0; cells];
        dist.fill(rng, &mut values);
        let extent: Vec<usize> = bounds.coords().iter().map(|b| b + 1).collect();
        Ok(Self {
            strides: row_major_strides(&extent),
            bounds,
            values,
        })
    }

    pub fn bounds(&self) -> &LatticePoint {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn offset(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    pub fn get(&self, v: &LatticePoint) -> Option<f64> {
        v.dominated_by(&self.bounds)
            .then(|| self.values[self.offset(v.coords())])
    }

    pub fn set(&mut self, v: &LatticePoint, value: f64) -> Result<()> {
        self.check_inside(v)?;
        let o = self.offset(v.coords());
        self.values[o] = value;
        Ok(())
    }

    fn check_inside(&self, z: &LatticePoint) -> Result<()> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.dim(),
            });
        }
        if !z.dominated_by(&self.bounds) {
            return Err(Error::OutsideBox {
                target: z.coords().to_vec(),
                bounds: self.bounds.coords().to_vec(),
            });
        }
        Ok(())
    }

    /// CSV dump: header `x_1,...,x_d,value`, one row per site.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let d = self.dim();
        let header: Vec<String> = (1..=d).map(|i| format!("x_{i}")).collect();
        writeln!(w, "{},value", header.join(","))?;
        let mut c = vec![0usize; d];
        for &v in &self.values {
            let coords: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{},{}", coords.join(","), sig12(v))?;
            advance(&mut c, self.bounds.coords());
        }
        Ok(())
    }
}

/// Row-major increment of a multi-index within `[0, hi]`.
fn advance(c: &mut [usize], hi: &[usize]) {
    for i in (0..c.len()).rev() {
        if c[i] < hi[i] {
            c[i] += 1;
            return;
        }
        c[i] = 0;
    }
}

/// Point-to-point passage values over the sub-box `[from, to]`, row-major
/// over the sub-box. Entry 0 (at `from`) is zero.
fn sweep(field: &WeightField, from: &[usize], to: &[usize]) -> Vec<f64> {
    let d = from.len();
    let extent: Vec<usize> = from.iter().zip(to).map(|(a, b)| b - a + 1).collect();
    let sub_strides = row_major_strides(&extent);
    let cells: usize = extent.iter().product();
    let mut t = vec![0.0; cells];
    let mut c = vec![0usize; d];
    let span: Vec<usize> = extent.iter().map(|e| e - 1).collect();
    let base = field.offset(from);
    let mut foff = base;
    for idx in 0..cells {
        if idx > 0 {
            let mut best = f64::NEG_INFINITY;
            for i in 0..d {
                if c[i] > 0 {
                    best = best.max(t[idx - sub_strides[i]]);
                }
            }
            t[idx] = field.values[foff] + best;
        }
        // Advance the multi-index and the field offset together.
        for i in (0..d).rev() {
            if c[i] < span[i] {
                c[i] += 1;
                foff += field.strides[i];
                break;
            }
            foff -= c[i] * field.strides[i];
            c[i] = 0;
        }
    }
    debug_assert!(cells == 0 || foff == base);
    t
}

/// Two-dimensional passage value from `from` to `to` with a single rolling
/// row.
fn sweep_2d_corner(field: &WeightField, from: &[usize], to: &[usize]) -> f64 {
    let (r0, c0) = (from[0], from[1]);
    let (rows, cols) = (to[0] - r0 + 1, to[1] - c0 + 1);
    let stride = field.strides[0];
    let mut row = vec![0.0; cols];
    let first = &field.values[r0 * stride + c0..r0 * stride + c0 + cols];
    for j in 1..cols {
        row[j] = row[j - 1] + first[j];
    }
    for i in 1..rows {
        let start = (r0 + i) * stride + c0;
        let x = &field.values[start..start + cols];
        row[0] += x[0];
        for j in 1..cols {
            row[j] = x[j] + row[j].max(row[j - 1]);
        }
    }
    row[cols - 1]
}

/// `T(z)`: the maximal weight of a directed path from the origin to `z`.
pub fn last_passage_time(field: &WeightField, z: &LatticePoint) -> Result<f64> {
    last_passage_between(field, &LatticePoint::origin(z.dim().max(1)), z)
}

/// Best path weight from `from` to `to`, excluding `X(from)` and including
/// `X(to)`.
pub fn last_passage_between(
    field: &WeightField,
    from: &LatticePoint,
    to: &LatticePoint,
) -> Result<f64> {
    field.check_inside(from)?;
    field.check_inside(to)?;
    if !from.dominated_by(to) {
        return Err(Error::InvalidArgument(format!(
            "no directed path from {from} to {to}"
        )));
    }
    if field.dim() == 2 {
        return Ok(sweep_2d_corner(field, from.coords(), to.coords()));
    }
    let t = sweep(field, from.coords(), to.coords());
    Ok(*t.last().expect("non-empty sub-box"))
}

/// `T(z)` for every target from one sweep over their bounding box.
pub fn last_passage_profile(field: &WeightField, targets: &[LatticePoint]) -> Result<Vec<f64>> {
    if targets.is_empty() {
        return Ok(Vec::new());
    }
    for z in targets {
        field.check_inside(z)?;
    }
    let d = field.dim();
    let hi: Vec<usize> = (0..d)
        .map(|i| targets.iter().map(|z| z.coords()[i]).max().unwrap_or(0))
        .collect();
    let t = sweep(field, &vec![0; d], &hi);
    let extent: Vec<usize> = hi.iter().map(|h| h + 1).collect();
    let strides = row_major_strides(&extent);
    Ok(targets
        .iter()
        .map(|z| {
            let o: usize = z.coords().iter().zip(&strides).map(|(c, s)| c * s).sum();
            t[o]
        })
        .collect())
}
