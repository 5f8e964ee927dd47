//! Sampled fields on the torus and on torus × graded y-grid, with a flat
//! binary layout and CSV export.
//!
//! Binary layout, all little-endian: `dims: u64`, `N: u64`, `L: f64`,
//! `M: u64`, `Y: f64`, `gamma: f64`, then the values as `f64`. A scalar field
//! stores `M = 0, Y = 0, gamma = 0`. Extended fields are stored level by level,
//! `y_0` first, each level in row-major order.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{GradedYGrid, TorusGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!("field has {} values, grid has {} nodes", values.len(), grid.len())));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    /// Samples `f` at every node; the second coordinate is 0 in 1D.
    pub fn from_fn(grid: TorusGrid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn oscillation(&self) -> f64 {
        self.max() - self.min()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Discrete `L²` energy `h^dim Σ u²`.
    pub fn energy(&self) -> f64 {
        let cell = self.grid.spacing().powi(self.grid.dim() as i32);
        cell * self.values.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Pointwise linear combination `self + c·other` on the same grid.
    pub fn axpy(&self, c: f64, other: &ScalarField) -> Result<ScalarField> {
        if self.grid != other.grid {
            return Err(invalid("fields live on different grids"));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn scaled(&self, c: f64) -> ScalarField {
        Self { grid: self.grid, values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn sup_distance(&self, other: &ScalarField) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn write_binary(&self, w: &mut impl Write) -> Result<()> {
        write_header(w, &self.grid, None)?;
        write_values(w, &self.values)
    }

    pub fn read_binary(r: &mut impl Read) -> Result<Self> {
        let (grid, y) = read_header(r)?;
        if y.is_some() {
            return Err(invalid("stream holds an extended field"));
        }
        let values = read_values(r, grid.len())?;
        Self::new(grid, values)
    }

    /// CSV with columns `x,value` (1D) or `x1,x2,value` (2D).
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        if self.grid.dim() == 1 {
            writeln!(w, "x,value")?;
        } else {
            writeln!(w, "x1,x2,value")?;
        }
        for (i, v) in self.values.iter().enumerate() {
            let p = self.grid.point(i);
            if self.grid.dim() == 1 {
                writeln!(w, "{},{}", p[0], v)?;
            } else {
                writeln!(w, "{},{},{}", p[0], p[1], v)?;
            }
        }
        Ok(())
    }
}

/// Values on torus × `{y_0, ..., y_M}`, stored level by level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedField {
    xgrid: TorusGrid,
    ygrid: GradedYGrid,
    values: Vec<f64>,
}

impl ExtendedField {
    pub fn new(xgrid: TorusGrid, ygrid: GradedYGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != xgrid.len() * ygrid.len() {
            return Err(invalid(format!(
                "extended field has {} values, expected {}",
                values.len(),
                xgrid.len() * ygrid.len()
            )));
        }
        Ok(Self { xgrid, ygrid, values })
    }

    pub fn from_fn(xgrid: TorusGrid, ygrid: GradedYGrid, f: impl Fn([f64; 2], f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(xgrid.len() * ygrid.len());
        for &y in ygrid.nodes() {
            values.extend((0..xgrid.len()).map(|i| f(xgrid.point(i), y)));
        }
        Self { xgrid, ygrid, values }
    }

    pub fn xgrid(&self) -> &TorusGrid {
        &self.xgrid
    }

    pub fn ygrid(&self) -> &GradedYGrid {
        &self.ygrid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Values on the level `y_j`.
    pub fn level(&self, j: usize) -> &[f64] {
        let n = self.xgrid.len();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn level_field(&self, j: usize) -> ScalarField {
        ScalarField { grid: self.xgrid, values: self.level(j).to_vec() }
    }

    /// The slice at `y = 0`.
    pub fn trace(&self) -> ScalarField {
        self.level_field(0)
    }

    pub fn at(&self, j: usize, idx: usize) -> f64 {
        self.values[j * self.xgrid.len() + idx]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn write_binary(&self, w: &mut impl Write) -> Result<()> {
        write_header(w, &self.xgrid, Some(&self.ygrid))?;
        write_values(w, &self.values)
    }

    pub fn read_binary(r: &mut impl Read) -> Result<Self> {
        let (xgrid, y) = read_header(r)?;
        let ygrid = y.ok_or_else(|| invalid("stream holds a scalar field"))?;
        let values = read_values(r, xgrid.len() * ygrid.len())?;
        Self::new(xgrid, ygrid, values)
    }

    /// CSV with columns `x,y,value` (1D) or `x1,x2,y,value` (2D).
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        let two = self.xgrid.dim() == 2;
        writeln!(w, "{}", if two { "x1,x2,y,value" } else { "x,y,value" })?;
        for (j, &y) in self.ygrid.nodes().iter().enumerate() {
            for (i, v) in self.level(j).iter().enumerate() {
                let p = self.xgrid.point(i);
                if two {
                    writeln!(w, "{},{},{},{}", p[0], p[1], y, v)?;
                } else {
                    writeln!(w, "{},{},{}", p[0], y, v)?;
                }
            }
        }
        Ok(())
    }
}

fn write_header(w: &mut impl Write, x: &TorusGrid, y: Option<&GradedYGrid>) -> Result<()> {
    w.write_all(&(x.dim() as u64).to_le_bytes())?;
    w.write_all(&(x.n() as u64).to_le_bytes())?;
    w.write_all(&x.length().to_le_bytes())?;
    let (m, height, gamma) = y.map_or((0, 0.0, 0.0), |g| (g.intervals() as u64, g.height(), g.gamma()));
    w.write_all(&m.to_le_bytes())?;
    w.write_all(&height.to_le_bytes())?;
    w.write_all(&gamma.to_le_bytes())?;
    Ok(())
}

fn read_header(r: &mut impl Read) -> Result<(TorusGrid, Option<GradedYGrid>)> {
    let mut buf = [0u8; 8];
    let mut word = |r: &mut dyn Read| -> Result<[u8; 8]> {
        r.read_exact(&mut buf)?;
        Ok(buf)
    };
    let dim = u64::from_le_bytes(word(r)?) as usize;
    let n = u64::from_le_bytes(word(r)?) as usize;
    let length = f64::from_le_bytes(word(r)?);
    let m = u64::from_le_bytes(word(r)?) as usize;
    let height = f64::from_le_bytes(word(r)?);
    let gamma = f64::from_le_bytes(word(r)?);
    let grid = TorusGrid::new(dim, n, length)?;
    let y = if m == 0 { None } else { Some(GradedYGrid::new(height, m, gamma)?) };
    Ok((grid, y))
}

fn write_values(w: &mut impl Write, values: &[f64]) -> Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_values(r: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes)?;
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let g = TorusGrid::new(2, 8, 2.0).unwrap();
        let f = ScalarField::from_fn(g, |p| p[0] * 3.0 - p[1]);
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 48 + 64 * 8);
        assert_eq!(ScalarField::read_binary(&mut buf.as_slice()).unwrap(), f);

        let y = GradedYGrid::new(1.5, 6, 2.5).unwrap();
        let e = ExtendedField::from_fn(g, y, |p, y| p[0] + y * y);
        let mut buf = Vec::new();
        e.write_binary(&mut buf).unwrap();
        let back = ExtendedField::read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(back, e);
        assert!(ScalarField::read_binary(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn header_is_little_endian() {
        let g = TorusGrid::new(1, 16, 1.0).unwrap();
        let mut buf = Vec::new();
        ScalarField::zeros(g).write_binary(&mut buf).unwrap();
        assert_eq!(&buf[0..8], &1u64.to_le_bytes());
        assert_eq!(&buf[8..16], &16u64.to_le_bytes());
        assert_eq!(&buf[16..24], &1.0f64.to_le_bytes());
    }

    #[test]
    fn rejects_wrong_length() {
        let g = TorusGrid::new(1, 8, 1.0).unwrap();
        assert!(ScalarField::new(g, vec![0.0; 7]).is_err());
    }
}
