//! Search boxes and dense point collections.

use alloc::vec::Vec;
use rand::Rng;

use crate::error::{invalid, Result};

/// An axis-aligned box, one `(lower, upper)` pair per dimension.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Domain {
    bounds: Vec<(f64, f64)>,
}

impl Domain {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(invalid("domain needs at least one dimension"));
        }
        for (j, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(invalid(alloc::format!(
                    "dimension {j}: bounds ({lo}, {hi}) must be finite with lower < upper"
                )));
            }
        }
        Ok(Self { bounds })
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.bounds)
                .all(|(&v, &(lo, hi))| lo <= v && v <= hi)
    }

    /// Draws one point uniformly from the box, appending it to `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        for &(lo, hi) in &self.bounds {
            let u: f64 = rng.random();
            out.push(lo + u * (hi - lo));
        }
    }

    /// Draws `count` i.i.d. uniform points.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Points {
        let mut data = Vec::with_capacity(count * self.dim());
        for _ in 0..count {
            self.sample_into(rng, &mut data);
        }
        Points {
            dim: self.dim(),
            data,
        }
    }

    /// Affine map of `x` into the unit cube.
    pub fn to_unit(&self, x: &[f64], out: &mut [f64]) {
        for ((o, &v), &(lo, hi)) in out.iter_mut().zip(x).zip(&self.bounds) {
            *o = (v - lo) / (hi - lo);
        }
    }
}

/// Row-major collection of `len()` points of a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Points {
    dim: usize,
    data: Vec<f64>,
}

impl Points {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("points must have dimension >= 1"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(invalid(
                "point data length is not a multiple of the dimension",
            ));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.as_ref().len() != dim {
                return Err(invalid("rows have inconsistent dimensions"));
            }
            data.extend_from_slice(r.as_ref());
        }
        Self::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> core::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn push(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(invalid("pushed point has the wrong dimension"));
        }
        self.data.extend_from_slice(x);
        Ok(())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}
