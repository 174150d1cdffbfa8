//! Snapshot serialization: flat little-endian binary and CSV.
//!
//! Binary layout: `dim: u32`, `N: u32`, `L: f64`, `components: u32`, then
//! `components × N^d` samples as `f64`, component-major and row-major.

use std::io::{Read, Write};

use super::{Grid, PhysicalField, Shape};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest grid written as CSV.
pub const CSV_MAX_POINTS: usize = 1 << 16;

pub fn write_binary<T: Real, W: Write>(field: &PhysicalField<T>, mut w: W) -> Result<()> {
    let g = field.grid();
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.n_per_axis() as u32).to_le_bytes())?;
    w.write_all(&g.box_length().to_64_le())?;
    w.write_all(&(field.components() as u32).to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.to_64_le())?;
    }
    Ok(())
}

trait ToLe {
    fn to_64_le(self) -> [u8; 8];
}

impl<T: Real> ToLe for T {
    fn to_64_le(self) -> [u8; 8] {
        self.to64().to_le_bytes()
    }
}

pub fn read_binary<T: Real, R: Read>(mut r: R) -> Result<PhysicalField<T>> {
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let dim = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b8)?;
    let l = f64::from_le_bytes(b8);
    r.read_exact(&mut b4)?;
    let comps = u32::from_le_bytes(b4) as usize;
    let grid = Grid::new(dim, n, T::of(l))?;
    let shape = Shape::from_components(comps, dim)
        .ok_or_else(|| Error::Format(format!("{comps} components for dim {dim}")))?;
    let len = comps * grid.npts();
    let mut data = Vec::with_capacity(len);
    for _ in 0..len {
        r.read_exact(&mut b8)?;
        data.push(T::of(f64::from_le_bytes(b8)));
    }
    PhysicalField::from_values(&grid, shape, data)
}

/// One row per lattice point: coordinates then components.
pub fn write_csv<T: Real, W: Write>(field: &PhysicalField<T>, mut w: W) -> Result<()> {
    let g = field.grid();
    if g.npts() > CSV_MAX_POINTS {
        return Err(Error::InvalidArgument(format!(
            "CSV export limited to {CSV_MAX_POINTS} points, grid has {}",
            g.npts()
        )));
    }
    let dim = g.dim();
    let nc = field.components();
    let mut header: Vec<String> = (0..dim).map(|a| format!("x{a}")).collect();
    header.extend((0..nc).map(|c| format!("c{c}")));
    writeln!(w, "{}", header.join(","))?;
    for idx in 0..g.npts() {
        let x = g.point(idx);
        let mut row: Vec<String> = (0..dim).map(|a| format!("{:e}", x[a].to64())).collect();
        row.extend((0..nc).map(|c| format!("{:e}", field.component(c)[idx].to64())));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
