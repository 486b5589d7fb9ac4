use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::{Exponent, Real};
use crate::section::SectionGrid;

/// Section grid times a uniform `y` grid on `[y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubeGrid<T> {
    pub section: SectionGrid<T>,
    y_min: T,
    y_max: T,
    ny: usize,
}

impl<T: Real> TubeGrid<T> {
    pub fn new(section: SectionGrid<T>, y_min: T, y_max: T, ny: usize) -> Result<Self> {
        if !(y_min < y_max) || !y_min.is_finite() || !y_max.is_finite() {
            return Err(invalid(format!(
                "need y_min < y_max, got [{y_min}, {y_max}]"
            )));
        }
        if ny < 3 {
            return Err(invalid(format!("need at least 3 y-nodes, got {ny}")));
        }
        Ok(Self {
            section,
            y_min,
            y_max,
            ny,
        })
    }

    #[inline]
    pub fn nz(&self) -> usize {
        self.section.n()
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn y_min(&self) -> T {
        self.y_min
    }

    #[inline]
    pub fn y_max(&self) -> T {
        self.y_max
    }

    #[inline]
    pub fn hz(&self) -> T {
        self.section.h()
    }

    #[inline]
    pub fn hy(&self) -> T {
        (self.y_max - self.y_min) / T::from_usize_lossy(self.ny - 1)
    }

    #[inline]
    pub fn y(&self, j: usize) -> T {
        self.y_min + T::from_usize_lossy(j) * self.hy()
    }

    pub fn ys(&self) -> Vec<T> {
        (0..self.ny).map(|j| self.y(j)).collect()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nz() * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index of the node nearest to `y`, clamped to the grid.
    pub fn nearest_y(&self, y: T) -> usize {
        let s = ((y - self.y_min) / self.hy()).round();
        s.max(T::zero()).to_usize().unwrap_or(0).min(self.ny - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Frame<T> {
    Lab,
    Comoving { speed: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    /// `u` of the porous medium equation, time is `t`.
    Physical,
    /// `v` of the rescaled equation, time is `tau`.
    Rescaled,
}

/// Condition on the rows `z = 0` and `z = L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZBoundary {
    #[default]
    Dirichlet,
    /// Zero-flux mirror condition; used by the 1-D test harnesses.
    Reflecting,
}

/// Condition on the artificial ends `y = y_min` and `y = y_max`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum YBoundary<T> {
    #[default]
    Zero,
    /// Per-row values held fixed at the two ends.
    Held { low: Vec<T>, high: Vec<T> },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Boundary<T> {
    pub z: ZBoundary,
    pub y: YBoundary<T>,
}

/// Nonnegative field on a tube grid, stored row-major by section node:
/// `values[i * ny + j]` is the value at `(z_i, y_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeField<T> {
    pub grid: TubeGrid<T>,
    pub values: Vec<T>,
    pub time: T,
    pub frame: Frame<T>,
    pub variable: Variable,
    pub m: T,
    pub t0: T,
    pub boundary: Boundary<T>,
    /// Number of roundoff-level negative values reset to zero so far.
    pub clamps: u64,
}

impl<T: Real> TubeField<T> {
    pub fn zeros(grid: TubeGrid<T>, m: T, variable: Variable) -> Result<Self> {
        Exponent::new(m)?;
        Ok(Self {
            grid,
            values: vec![T::zero(); grid.len()],
            time: T::zero(),
            frame: Frame::Lab,
            variable,
            m,
            t0: T::one(),
            boundary: Boundary::default(),
            clamps: 0,
        })
    }

    /// Field sampled from `f(z, y)`; negative samples are rejected.
    pub fn from_fn(
        grid: TubeGrid<T>,
        m: T,
        variable: Variable,
        f: impl Fn(T, T) -> T,
    ) -> Result<Self> {
        let mut field = Self::zeros(grid, m, variable)?;
        let ny = grid.ny();
        for i in 0..grid.nz() {
            let z = grid.section.node(i);
            for j in 0..ny {
                let v = f(z, grid.y(j));
                if !(v >= T::zero()) || !v.is_finite() {
                    return Err(invalid(format!(
                        "field value {v} at node ({i}, {j}) is not a finite nonnegative number"
                    )));
                }
                field.values[i * ny + j] = v;
            }
        }
        Ok(field)
    }

    pub fn with_frame(mut self, frame: Frame<T>) -> Self {
        self.frame = frame;
        self
    }

    pub fn with_time(mut self, time: T) -> Self {
        self.time = time;
        self
    }

    pub fn with_t0(mut self, t0: T) -> Self {
        self.t0 = t0;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary<T>) -> Self {
        self.boundary = boundary;
        self
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> T {
        self.values[i * self.grid.ny() + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        let ny = self.grid.ny();
        &self.values[i * ny..(i + 1) * ny]
    }

    pub fn max_value(&self) -> T {
        self.values.iter().fold(T::zero(), |a, &v| a.max(v))
    }

    pub fn min_value(&self) -> T {
        self.values.iter().fold(T::infinity(), |a, &v| a.min(v))
    }

    /// Discrete mass `sum v hz hy`.
    pub fn mass(&self) -> T {
        self.values.iter().copied().sum::<T>() * self.grid.hz() * self.grid.hy()
    }

    /// Smallest and largest `y` index holding a value above `threshold`, if any.
    pub fn support_columns(&self, threshold: T) -> Option<(usize, usize)> {
        let ny = self.grid.ny();
        let mut lo = usize::MAX;
        let mut hi = 0;
        for row in self.values.chunks_exact(ny) {
            if let Some(j) = row.iter().position(|&v| v > threshold) {
                lo = lo.min(j);
            }
            if let Some(j) = row.iter().rposition(|&v| v > threshold) {
                hi = hi.max(j);
            }
        }
        (lo != usize::MAX).then_some((lo, hi))
    }
}
