use crate::error::{Error, Result};

/// Sorted sample points in `(0, ∞)` that avoid `x = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Default for Grid {
    /// 200 log-uniform points on `[1e-6, 1e6]`.
    fn default() -> Self {
        Grid::log_uniform(200, 1e-6, 1e6).expect("default grid is valid")
    }
}

impl Grid {
    /// `n` points log-uniformly spaced on `[lo, hi]`, endpoints included.
    /// Points within 1e-9 of 1 are dropped.
    pub fn log_uniform(n: usize, lo: f64, hi: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Grid(format!("need at least 2 points, got {n}")));
        }
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::Grid(format!("need 0 < lo < hi, got [{lo}, {hi}]")));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let pts = (0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .filter(|x| (x - 1.0).abs() >= 1e-9)
            .collect();
        Grid::from_points(pts)
    }

    pub fn from_points(mut points: Vec<f64>) -> Result<Self> {
        if let Some(&x) = points.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return Err(Error::Grid(format!("point {x} is not in (0, inf)")));
        }
        if points.iter().any(|x| (x - 1.0).abs() < 1e-9) {
            return Err(Error::Grid("grid must exclude x = 1".into()));
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        if points.len() < 2 {
            return Err(Error::Grid("need at least 2 distinct points".into()));
        }
        Ok(Grid { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Geometric midpoints of consecutive points.
    pub fn log_midpoints(&self) -> Result<Grid> {
        let mids = self
            .points
            .windows(2)
            .map(|w| (w[0] * w[1]).sqrt())
            .filter(|x| (x - 1.0).abs() >= 1e-9)
            .collect();
        Grid::from_points(mids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let g = Grid::default();
        assert_eq!(g.len(), 200);
        assert!((g.points()[0] - 1e-6).abs() < 1e-20);
        assert!((g.points()[199] - 1e6).abs() < 1e-6);
        assert!(g.points().iter().all(|&x| (x - 1.0).abs() > 1e-3));
        // the grid is symmetric about 1, so the central midpoint is 1 and is dropped
        assert_eq!(g.log_midpoints().unwrap().len(), 198);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::from_points(vec![0.5]).is_err());
        assert!(Grid::from_points(vec![0.5, 1.0]).is_err());
        assert!(Grid::from_points(vec![-0.5, 2.0]).is_err());
        assert!(Grid::log_uniform(1, 0.1, 10.0).is_err());
        // odd point count lands on x = 1 and drops it
        assert_eq!(Grid::log_uniform(5, 0.01, 100.0).unwrap().len(), 4);
    }
}
