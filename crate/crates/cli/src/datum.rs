//! Initial data for `evolve`: a few declarative shapes scaled by `Phi`, plus
//! import of arbitrary physical values from CSV.

use std::path::Path;

use anyhow::{Context, Result};
use pme_tube::dynamics::{TubeField, TubeGrid, Variable};
use pme_tube::{Field, Profile};

use crate::config::{DatumConfig, DatumKind};
use crate::exit::Invalid;

fn cap(y: f64, w: f64) -> f64 {
    (1.0 - (y / w).powi(2)).max(0.0)
}

pub fn build(d: &DatumConfig, grid: TubeGrid<f64>, profile: &Profile) -> Result<Field> {
    let m = profile.m;
    let phi = &profile.phi;
    let h = grid.hz();
    let shape: Box<dyn Fn(f64) -> f64> = match d.kind {
        DatumKind::Bump => Box::new(|y| cap(y, d.width)),
        DatumKind::Plateau => Box::new(|y| if y.abs() <= d.width { 1.0 } else { 0.0 }),
        DatumKind::TwoBump => {
            let s = 0.5 * d.separation;
            Box::new(move |y| cap(y - s, d.width) + cap(y + s, d.width))
        }
        DatumKind::Csv => {
            let path = d
                .path
                .as_deref()
                .ok_or_else(|| Invalid("datum kind csv needs a path".into()))?;
            return import(path, grid, m);
        }
    };
    let field = TubeField::from_fn(grid, m, Variable::Physical, |z, y| {
        d.amplitude * phi[(z / h).round() as usize] * shape(y)
    })?;
    Ok(field)
}

/// Reads `z,y,value` rows (header first) covering the grid in row-major
/// order by section node.
fn import(path: &Path, grid: TubeGrid<f64>, m: f64) -> Result<Field> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading datum {}", path.display()))?;
    let mut field = TubeField::zeros(grid, m, Variable::Physical)?;
    let ys = grid.ys();
    let mut count = 0usize;
    for (k, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || {
            Invalid(format!(
                "{} line {}: expected z,y,value",
                path.display(),
                k + 1
            ))
        };
        let cols: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let [z, y, v] = cols[..] else {
            return Err(bad().into());
        };
        if count >= grid.len() {
            return Err(Invalid(format!(
                "{}: more rows than grid nodes ({})",
                path.display(),
                grid.len()
            ))
            .into());
        }
        let (i, j) = (count / grid.ny(), count % grid.ny());
        let (zi, yj) = (grid.section.node(i), ys[j]);
        let slack = 1e-9 * (1.0 + zi.abs().max(yj.abs()));
        if (z - zi).abs() > slack || (y - yj).abs() > slack {
            return Err(Invalid(format!(
                "{} line {}: ({z}, {y}) is not grid node ({zi}, {yj})",
                path.display(),
                k + 1
            ))
            .into());
        }
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Invalid(format!(
                "{} line {}: value {v} must be finite and nonnegative",
                path.display(),
                k + 1
            ))
            .into());
        }
        field.values[count] = v;
        count += 1;
    }
    if count != grid.len() {
        return Err(Invalid(format!(
            "{}: {count} rows for {} grid nodes",
            path.display(),
            grid.len()
        ))
        .into());
    }
    Ok(field)
}
