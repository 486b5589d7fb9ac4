//! Plain-text and binary persistence: CSV tables, JSON sidecars and compact
//! little-endian field dumps.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Frame, TubeField, TubeGrid, Variable};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::section::{SectionGrid, SectionProfile};

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

pub fn read_json<V: for<'de> Deserialize<'de>>(path: &Path) -> Result<V> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Builds a CSV document from a header and rows of numbers.
pub fn csv<I, R>(header: &str, rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let mut first = true;
        for x in row.as_ref() {
            if !first {
                out.push(',');
            }
            first = false;
            let _ = write!(out, "{x}");
        }
        out.push('\n');
    }
    out
}

/// JSON sidecar of a stationary profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileMeta {
    #[serde(rename = "L")]
    pub length: f64,
    pub m: f64,
    pub n: usize,
    pub lambda1: f64,
    pub cstar: f64,
    pub sup_phi: f64,
}

/// Writes `<stem>.csv` (`z,phi`) and `<stem>.json`.
pub fn write_profile<T: Real>(p: &SectionProfile<T>, dir: &Path, stem: &str) -> Result<()> {
    let rows = p
        .grid
        .nodes()
        .into_iter()
        .zip(&p.phi)
        .map(|(z, &phi)| [z.as_f64(), phi.as_f64()]);
    write_text(&dir.join(format!("{stem}.csv")), &csv("z,phi", rows))?;
    let meta = ProfileMeta {
        length: p.grid.length().as_f64(),
        m: p.m.as_f64(),
        n: p.grid.n(),
        lambda1: p.lambda1.as_f64(),
        cstar: p.cstar.as_f64(),
        sup_phi: p.sup_phi.as_f64(),
    };
    write_json(&dir.join(format!("{stem}.json")), &meta)
}

pub fn read_profile<T: Real>(dir: &Path, stem: &str) -> Result<SectionProfile<T>> {
    let meta: ProfileMeta = read_json(&dir.join(format!("{stem}.json")))?;
    let path = dir.join(format!("{stem}.csv"));
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut phi = Vec::with_capacity(meta.n);
    for (k, line) in text.lines().enumerate().skip(1) {
        let value = line
            .split(',')
            .nth(1)
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::Format(format!("{}: bad row {}", path.display(), k + 1)))?;
        phi.push(T::lit(value));
    }
    let grid = SectionGrid::new(T::lit(meta.length), meta.n)?;
    SectionProfile::from_values(grid, T::lit(meta.m), phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridMeta {
    #[serde(rename = "L")]
    pub length: f64,
    pub nz: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
}

impl GridMeta {
    pub fn of<T: Real>(g: &TubeGrid<T>) -> Self {
        Self {
            length: g.section.length().as_f64(),
            nz: g.nz(),
            y_min: g.y_min().as_f64(),
            y_max: g.y_max().as_f64(),
            ny: g.ny(),
        }
    }

    pub fn grid<T: Real>(&self) -> Result<TubeGrid<T>> {
        TubeGrid::new(
            SectionGrid::new(T::lit(self.length), self.nz)?,
            T::lit(self.y_min),
            T::lit(self.y_max),
            self.ny,
        )
    }
}

/// JSON sidecar of a field snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldMeta {
    pub tau: f64,
    pub frame: Frame<f64>,
    pub variable: Variable,
    pub m: f64,
    pub t0: f64,
    pub grid: GridMeta,
}

impl FieldMeta {
    pub fn of<T: Real>(f: &TubeField<T>) -> Self {
        Self {
            tau: f.time.as_f64(),
            frame: match f.frame {
                Frame::Lab => Frame::Lab,
                Frame::Comoving { speed } => Frame::Comoving {
                    speed: speed.as_f64(),
                },
            },
            variable: f.variable,
            m: f.m.as_f64(),
            t0: f.t0.as_f64(),
            grid: GridMeta::of(&f.grid),
        }
    }
}

/// Raw little-endian `f64` values, row-major by section node.
pub fn field_bytes<T: Real>(f: &TubeField<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(f.values.len() * 8);
    for v in &f.values {
        out.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    out
}

/// Writes `<stem>.bin` and `<stem>.json`, plus `<stem>.csv` (`z,y,value`) when asked.
pub fn write_field<T: Real>(
    f: &TubeField<T>,
    dir: &Path,
    stem: &str,
    with_csv: bool,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let bin = dir.join(format!("{stem}.bin"));
    fs::write(&bin, field_bytes(f)).map_err(|e| Error::io(&bin, e))?;
    write_json(&dir.join(format!("{stem}.json")), &FieldMeta::of(f))?;
    if with_csv {
        write_text(&dir.join(format!("{stem}.csv")), &field_csv(f, "z,y,value"))?;
    }
    Ok(())
}

pub(crate) fn field_csv<T: Real>(f: &TubeField<T>, header: &str) -> String {
    let g = f.grid;
    let ys = g.ys();
    let rows = (0..g.nz()).flat_map(|i| {
        let z = g.section.node(i).as_f64();
        let ys = &ys;
        (0..g.ny()).map(move |j| [z, ys[j].as_f64(), f.value(i, j).as_f64()])
    });
    csv(header, rows)
}

pub fn read_field<T: Real>(dir: &Path, stem: &str) -> Result<TubeField<T>> {
    let meta: FieldMeta = read_json(&dir.join(format!("{stem}.json")))?;
    let bin = dir.join(format!("{stem}.bin"));
    let bytes = fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
    let grid: TubeGrid<T> = meta.grid.grid()?;
    if bytes.len() != grid.len() * 8 {
        return Err(Error::Format(format!(
            "{}: expected {} bytes, found {}",
            bin.display(),
            grid.len() * 8,
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| {
            T::lit(f64::from_le_bytes(
                c.try_into().expect("chunk of eight bytes"),
            ))
        })
        .collect();
    let mut field = TubeField::zeros(grid, T::lit(meta.m), meta.variable)?;
    field.values = values;
    field.time = T::lit(meta.tau);
    field.t0 = T::lit(meta.t0);
    field.frame = match meta.frame {
        Frame::Lab => Frame::Lab,
        Frame::Comoving { speed } => Frame::Comoving {
            speed: T::lit(speed),
        },
    };
    Ok(field)
}
