use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("grid interval [{a}, {b}] is empty or not finite")]
    BadInterval { a: f64, b: f64 },
    #[error("non-finite value {value} at node {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("{x} lies outside the grid interval [{a}, {b}]")]
    OutOfRange { x: f64, a: f64, b: f64 },
    #[error("grids differ: [{a1}, {b1}] with {m1} nodes vs [{a2}, {b2}] with {m2} nodes")]
    Mismatch {
        a1: f64,
        b1: f64,
        m1: usize,
        a2: f64,
        b2: f64,
        m2: usize,
    },
}

/// Values on the uniform grid `a = x_0 < ... < x_{m-1} = b`, linearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    a: f64,
    b: f64,
    values: Vec<f64>,
}

/// Node `i` of the uniform `m`-point grid on `[a, b]`.
pub fn uniform_node(a: f64, b: f64, m: usize, i: usize) -> f64 {
    if i + 1 == m {
        b
    } else {
        a + (b - a) * (i as f64) / ((m - 1) as f64)
    }
}

pub fn uniform_nodes(a: f64, b: f64, m: usize) -> Vec<f64> {
    (0..m).map(|i| uniform_node(a, b, m, i)).collect()
}

/// Composite trapezoid weights on the uniform `m`-point grid.
pub fn trapezoid_weights(a: f64, b: f64, m: usize) -> Vec<f64> {
    let h = (b - a) / (m - 1) as f64;
    let mut w = vec![h; m];
    w[0] = 0.5 * h;
    w[m - 1] = 0.5 * h;
    w
}

impl GridFunction {
    pub fn new(a: f64, b: f64, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() < 2 {
            return Err(GridError::TooFewNodes(values.len()));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(GridError::BadInterval { a, b });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(GridError::NonFinite { index, value });
        }
        Ok(GridFunction { a, b, values })
    }

    pub fn from_fn(
        a: f64,
        b: f64,
        m: usize,
        mut f: impl FnMut(f64) -> f64,
    ) -> Result<Self, GridError> {
        if m < 2 {
            return Err(GridError::TooFewNodes(m));
        }
        let values = uniform_nodes(a, b, m).into_iter().map(&mut f).collect();
        GridFunction::new(a, b, values)
    }

    pub fn constant(a: f64, b: f64, m: usize, c: f64) -> Result<Self, GridError> {
        GridFunction::from_fn(a, b, m, |_| c)
    }

    pub fn start(&self) -> f64 {
        self.a
    }

    pub fn end(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / (self.len() - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        uniform_node(self.a, self.b, self.len(), i)
    }

    pub fn nodes(&self) -> Vec<f64> {
        uniform_nodes(self.a, self.b, self.len())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn interpolate(&self, x: f64) -> Result<f64, GridError> {
        let slack = 1e-12 * (self.b - self.a);
        if !(x >= self.a - slack && x <= self.b + slack) {
            return Err(GridError::OutOfRange {
                x,
                a: self.a,
                b: self.b,
            });
        }
        let m = self.len();
        let pos = ((x - self.a) / self.step()).clamp(0.0, (m - 1) as f64);
        let i = (pos.floor() as usize).min(m - 2);
        let w = pos - i as f64;
        Ok((1.0 - w) * self.values[i] + w * self.values[i + 1])
    }

    pub fn same_grid(&self, other: &GridFunction) -> Result<(), GridError> {
        if self.a == other.a && self.b == other.b && self.len() == other.len() {
            Ok(())
        } else {
            Err(GridError::Mismatch {
                a1: self.a,
                b1: self.b,
                m1: self.len(),
                a2: other.a,
                b2: other.b,
                m2: other.len(),
            })
        }
    }

    /// `max_i |self_i - other_i|` over the nodes.
    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64, GridError> {
        self.same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (x, y)| m.max((x - y).abs())))
    }

    /// Trapezoid `L^p` distance. For grids inside `[0, 1]` it never exceeds
    /// [`GridFunction::sup_distance`].
    pub fn lp_distance(&self, other: &GridFunction, p: f64) -> Result<f64, GridError> {
        self.same_grid(other)?;
        let d = self.sup_distance(other)?;
        if d == 0.0 {
            return Ok(0.0);
        }
        if p.is_infinite() {
            return Ok(d);
        }
        let w = trapezoid_weights(self.a, self.b, self.len());
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .zip(&w)
            .map(|((x, y), w)| w * ((x - y).abs() / d).powf(p))
            .sum();
        Ok(d * s.min(1.0).powf(1.0 / p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_is_exact_for_lines() {
        let g = GridFunction::from_fn(0.5, 1.0, 11, |x| 3.0 * x - 1.0).unwrap();
        for x in [0.5, 0.51, 0.77, 0.999, 1.0] {
            assert!((g.interpolate(x).unwrap() - (3.0 * x - 1.0)).abs() < 1e-14);
        }
        assert!(g.interpolate(0.4).is_err());
        assert!(g.interpolate(f64::NAN).is_err());
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(GridFunction::new(0.0, 1.0, vec![1.0]).is_err());
        assert!(GridFunction::new(1.0, 0.0, vec![1.0, 2.0]).is_err());
        assert!(matches!(
            GridFunction::new(0.0, 1.0, vec![1.0, f64::NAN]),
            Err(GridError::NonFinite { index: 1, .. })
        ));
    }

    #[test]
    fn last_node_is_exact() {
        let g = GridFunction::constant(1e-3, 1.0, 997, 0.0).unwrap();
        assert_eq!(g.node(996), 1.0);
        assert_eq!(g.node(0), 1e-3);
    }

    #[test]
    fn lp_distance_bounded_by_sup() {
        let a = GridFunction::from_fn(0.0, 1.0, 33, |x| x * x).unwrap();
        let b = GridFunction::constant(0.0, 1.0, 33, 0.0).unwrap();
        let d = a.sup_distance(&b).unwrap();
        for p in [1.0, 2.0, 7.5, f64::INFINITY] {
            assert!(a.lp_distance(&b, p).unwrap() <= d);
        }
        let l1 = a.lp_distance(&b, 1.0).unwrap();
        assert!((l1 - 1.0 / 3.0).abs() < 1e-3);
        let c = GridFunction::constant(0.0, 0.5, 33, 0.0).unwrap();
        assert!(a.sup_distance(&c).is_err());
    }
}
