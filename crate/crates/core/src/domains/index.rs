use std::collections::{BTreeSet, HashMap};

use nalgebra::Vector4;

use super::grid::{DomainGrid, GridKind};

/// Uniform bucket hash over the ambient coordinates of a grid.
#[derive(Clone, Debug)]
pub struct SpatialIndex {
    cell: f64,
    /// Bucket count per axis on periodic axes.
    wrap: Option<i64>,
    buckets: HashMap<[i64; 4], Vec<u32>>,
}

impl SpatialIndex {
    pub fn new(grid: &DomainGrid, cell: f64) -> Self {
        let (cell, wrap) = if grid.kind == GridKind::Torus3 {
            let nb = (grid.extent / cell).floor().max(1.0);
            (grid.extent / nb, Some(nb as i64))
        } else {
            (cell, None)
        };
        let mut buckets: HashMap<[i64; 4], Vec<u32>> = HashMap::new();
        for (i, p) in grid.points.iter().enumerate() {
            let mut key = Self::key(cell, p);
            if let Some(nb) = wrap {
                for k in key.iter_mut().take(3) {
                    *k = k.rem_euclid(nb);
                }
            }
            buckets.entry(key).or_default().push(i as u32);
        }
        Self { cell, wrap, buckets }
    }

    fn key(cell: f64, p: &Vector4<f64>) -> [i64; 4] {
        [0, 1, 2, 3].map(|k| (p[k] / cell).floor() as i64)
    }

    /// Indices of all points in buckets meeting the ambient cube of half-side `r` around `x`.
    pub fn candidates(&self, x: &Vector4<f64>, r: f64) -> Vec<usize> {
        let lo = [0, 1, 2, 3].map(|k| ((x[k] - r) / self.cell).floor() as i64);
        let hi = [0, 1, 2, 3].map(|k| ((x[k] + r) / self.cell).floor() as i64);
        let axis = |k: usize| -> Vec<i64> {
            match self.wrap {
                Some(nb) if k < 3 => {
                    let set: BTreeSet<i64> = (lo[k]..=hi[k].min(lo[k] + nb - 1)).map(|i| i.rem_euclid(nb)).collect();
                    set.into_iter().collect()
                }
                _ => (lo[k]..=hi[k]).collect(),
            }
        };
        let axes = [axis(0), axis(1), axis(2), axis(3)];
        let mut out = Vec::new();
        for &a in &axes[0] {
            for &b in &axes[1] {
                for &c in &axes[2] {
                    for &d in &axes[3] {
                        if let Some(v) = self.buckets.get(&[a, b, c, d]) {
                            out.extend(v.iter().map(|&i| i as usize));
                        }
                    }
                }
            }
        }
        out
    }
}
