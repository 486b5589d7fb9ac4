use serde::{Deserialize, Serialize};

use crate::dynamics::TubeField;
use crate::io;
use crate::scalar::Real;
use crate::waves::front_curve;

/// Free-boundary positions of one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontSample<T> {
    pub tau: T,
    /// `Gamma(z_i, tau)` per section row, `None` where the row has no support.
    pub rows: Vec<Option<T>>,
    /// Extremes over interior non-empty rows.
    pub max: Option<T>,
    pub min: Option<T>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FrontSeries<T> {
    pub samples: Vec<FrontSample<T>>,
}

impl<T: Real> FrontSeries<T> {
    pub fn new() -> Self {
        Self {
            samples: Vec::new(),
        }
    }

    /// Appends a sample; times must increase.
    pub fn push(&mut self, tau: T, rows: Vec<Option<T>>) {
        assert!(
            self.samples.last().is_none_or(|s| s.tau < tau),
            "front samples must be pushed in increasing tau"
        );
        let n = rows.len();
        let interior = rows.iter().take(n.saturating_sub(1)).skip(1).flatten();
        let max = interior.clone().copied().reduce(|a, b| a.max(b));
        let min = interior.copied().reduce(|a, b| a.min(b));
        self.samples.push(FrontSample {
            tau,
            rows,
            max,
            min,
        });
    }

    /// Records the right front of a field at the given threshold.
    pub fn record(&mut self, field: &TubeField<T>, threshold: T) {
        let rows = front_curve(&field.values, &field.grid.ys(), threshold);
        self.push(field.time, rows);
    }

    pub fn taus(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.tau).collect()
    }

    /// CSV with columns `tau,z,gamma`; empty rows are skipped.
    pub fn to_csv(&self, z: &[T]) -> String {
        io::csv(
            "tau,z,gamma",
            self.samples.iter().flat_map(|s| {
                s.rows.iter().zip(z).filter_map(move |(g, &z)| {
                    g.map(|g| vec![s.tau.as_f64(), z.as_f64(), g.as_f64()])
                })
            }),
        )
    }
}

/// Windowed relative error at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample<T> {
    pub tau: T,
    pub c: T,
    /// `None` marks an empty window.
    pub error: Option<T>,
    pub count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorSeries<T> {
    pub samples: Vec<ErrorSample<T>>,
}

impl<T: Real> ErrorSeries<T> {
    pub fn new() -> Self {
        Self {
            samples: Vec::new(),
        }
    }

    pub fn push(&mut self, sample: ErrorSample<T>) {
        self.samples.push(sample);
    }

    /// CSV with columns `tau,c,error,count`; empty windows have an empty error cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,c,error,count\n");
        for s in &self.samples {
            let e = s.error.map(|e| e.as_f64().to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.tau.as_f64(),
                s.c.as_f64(),
                e,
                s.count
            ));
        }
        out
    }
}
