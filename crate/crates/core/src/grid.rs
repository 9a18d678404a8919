//! Parameter and time grids, and the coordinate map used for distances in
//! parameter space.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// `count` equally spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => alloc::vec![start],
        _ => {
            let step = (end - start) / (count - 1) as f64;
            (0..count)
                .map(|i| if i + 1 == count { end } else { start + step * i as f64 })
                .collect()
        }
    }
}

/// `count` points uniformly spaced in `log10`, endpoints reproduced exactly.
pub fn log_uniform(start: f64, end: f64, count: usize) -> Vec<f64> {
    let a = start.log10();
    let b = end.log10();
    let mut out: Vec<f64> = linspace(a, b, count)
        .into_iter()
        .map(|e| 10f64.powf(e))
        .collect();
    if let Some(first) = out.first_mut() {
        *first = start;
    }
    if count > 1 {
        if let Some(last) = out.last_mut() {
            *last = end;
        }
    }
    out
}

/// `t_j = j T / steps`, `j = 0..=steps`.
pub fn uniform_time_grid(t_end: f64, steps: usize) -> Vec<f64> {
    linspace(0.0, t_end, steps + 1)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisTransform {
    #[default]
    Identity,
    /// Distances measured between `log10` of the coordinate.
    Log10,
}

impl AxisTransform {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            AxisTransform::Identity => x,
            AxisTransform::Log10 => x.log10(),
        }
    }
}

/// Maps raw parameter vectors to the coordinates the parameter-space
/// networks measure Euclidean distances in. An empty transform list means
/// identity on every axis.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpace {
    pub transforms: Vec<AxisTransform>,
}

impl ParameterSpace {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn uniform(transform: AxisTransform, dim: usize) -> Self {
        Self {
            transforms: alloc::vec![transform; dim],
        }
    }

    pub fn to_coords(&self, mu: &[f64]) -> Vec<f64> {
        mu.iter()
            .enumerate()
            .map(|(k, &x)| {
                self.transforms
                    .get(k)
                    .copied()
                    .unwrap_or_default()
                    .apply(x)
            })
            .collect()
    }

    pub fn to_coords_all(&self, mus: &[Vec<f64>]) -> Vec<Vec<f64>> {
        mus.iter().map(|m| self.to_coords(m)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_endpoints_and_ratio() {
        let g = log_uniform(1e-5, 1.0, 6);
        assert_eq!(g[0], 1e-5);
        assert_eq!(g[5], 1.0);
        for w in g.windows(2) {
            assert!((w[1] / w[0] - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn time_grid_counts() {
        let t = uniform_time_grid(2.0, 100);
        assert_eq!(t.len(), 101);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[100], 2.0);
        assert!((t[1] - 0.02).abs() < 1e-16);
    }

    #[test]
    fn parameter_space_transform() {
        let s = ParameterSpace::uniform(AxisTransform::Log10, 1);
        assert_eq!(s.to_coords(&[100.0]), alloc::vec![2.0]);
        assert_eq!(ParameterSpace::identity().to_coords(&[3.0, 4.0]), alloc::vec![3.0, 4.0]);
    }
}
