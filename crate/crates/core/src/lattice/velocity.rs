use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{QlbmError, Result};

/// Standard lattice sound speed squared.
pub const DEFAULT_CS2: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String")]
pub enum VelocitySetName {
    D1Q3,
    D2Q9,
}

impl fmt::Display for VelocitySetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VelocitySetName::D1Q3 => f.write_str("D1Q3"),
            VelocitySetName::D2Q9 => f.write_str("D2Q9"),
        }
    }
}

impl FromStr for VelocitySetName {
    type Err = QlbmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "D1Q3" => Ok(VelocitySetName::D1Q3),
            "D2Q9" => Ok(VelocitySetName::D2Q9),
            _ => Err(QlbmError::Config(format!(
                "unknown velocity set `{s}`, expected one of D1Q3, D2Q9"
            ))),
        }
    }
}

impl TryFrom<String> for VelocitySetName {
    type Error = QlbmError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// A DdQq stencil: lattice velocities, weights and the opposite-direction pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocitySet {
    name: Option<VelocitySetName>,
    d: usize,
    c: Vec<[i32; 3]>,
    w: Vec<f64>,
    cs2: f64,
    pairs: Vec<(usize, usize)>,
}

/// Builds one of the shipped velocity sets with `cs2 = 1/3`.
pub fn make_velocity_set(name: VelocitySetName) -> VelocitySet {
    match name {
        VelocitySetName::D1Q3 => {
            let c = vec![[0, 0, 0], [1, 0, 0], [-1, 0, 0]];
            let w = rational_weights(&[(2, 3), (1, 6), (1, 6)]);
            VelocitySet::with_name(Some(name), 1, c, w, DEFAULT_CS2)
        }
        VelocitySetName::D2Q9 => {
            // E, N, W, S, NE, NW, SW, SE
            let c = vec![
                [0, 0, 0],
                [1, 0, 0],
                [0, 1, 0],
                [-1, 0, 0],
                [0, -1, 0],
                [1, 1, 0],
                [-1, 1, 0],
                [-1, -1, 0],
                [1, -1, 0],
            ];
            let w = rational_weights(&[
                (4, 9),
                (1, 9),
                (1, 9),
                (1, 9),
                (1, 9),
                (1, 36),
                (1, 36),
                (1, 36),
                (1, 36),
            ]);
            VelocitySet::with_name(Some(name), 2, c, w, DEFAULT_CS2)
        }
    }
    .expect("shipped velocity sets are well formed")
}

/// Correctly rounded doubles of exact rationals.
fn rational_weights(fractions: &[(u32, u32)]) -> Vec<f64> {
    fractions
        .iter()
        .map(|&(n, d)| f64::from(n) / f64::from(d))
        .collect()
}

impl VelocitySet {
    /// Builds a custom stencil. Index 0 must be the rest velocity; every other
    /// velocity needs an opposite partner with the same weight.
    pub fn custom(d: usize, c: Vec<[i32; 3]>, w: Vec<f64>, cs2: f64) -> Result<Self> {
        Self::with_name(None, d, c, w, cs2)
    }

    fn with_name(
        name: Option<VelocitySetName>,
        d: usize,
        c: Vec<[i32; 3]>,
        w: Vec<f64>,
        cs2: f64,
    ) -> Result<Self> {
        if d == 0 || d > 3 {
            return Err(QlbmError::Config(format!("dimension {d} not in 1..=3")));
        }
        if c.is_empty() || c.len() != w.len() {
            return Err(QlbmError::Config(format!(
                "{} velocities but {} weights",
                c.len(),
                w.len()
            )));
        }
        if c[0] != [0, 0, 0] {
            return Err(QlbmError::Config("velocity 0 must be the rest velocity".into()));
        }
        if !(cs2.is_finite() && cs2 > 0.0) {
            return Err(QlbmError::Config(format!("cs2 must be positive, got {cs2}")));
        }
        if w.iter().any(|&wi| !(wi.is_finite() && wi >= 0.0)) {
            return Err(QlbmError::Config("weights must be finite and nonnegative".into()));
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(QlbmError::Config(format!("weights sum to {total}, expected 1")));
        }
        if c.iter().any(|ci| ci[d..].iter().any(|&x| x != 0)) {
            return Err(QlbmError::Config(format!(
                "velocity has components beyond dimension {d}"
            )));
        }

        let mut pairs = Vec::new();
        let mut seen = vec![false; c.len()];
        seen[0] = true;
        for i in 1..c.len() {
            if seen[i] {
                continue;
            }
            let neg = [-c[i][0], -c[i][1], -c[i][2]];
            let j = (i + 1..c.len())
                .find(|&j| !seen[j] && c[j] == neg)
                .ok_or_else(|| {
                    QlbmError::Config(format!("velocity {i} {:?} has no opposite", c[i]))
                })?;
            if (w[i] - w[j]).abs() > 1e-15 {
                return Err(QlbmError::Config(format!(
                    "opposite velocities {i} and {j} have different weights"
                )));
            }
            seen[i] = true;
            seen[j] = true;
            pairs.push((i, j));
        }

        Ok(VelocitySet {
            name,
            d,
            c,
            w,
            cs2,
            pairs,
        })
    }

    /// Returns a copy with a different lattice sound speed squared.
    pub fn with_cs2(mut self, cs2: f64) -> Result<Self> {
        if !(cs2.is_finite() && cs2 > 0.0) {
            return Err(QlbmError::Config(format!("cs2 must be positive, got {cs2}")));
        }
        self.cs2 = cs2;
        Ok(self)
    }

    pub fn name(&self) -> Option<VelocitySetName> {
        self.name
    }

    pub fn label(&self) -> String {
        match self.name {
            Some(n) => n.to_string(),
            None => format!("D{}Q{}", self.d, self.q()),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn q(&self) -> usize {
        self.c.len()
    }

    pub fn velocities(&self) -> &[[i32; 3]] {
        &self.c
    }

    pub fn velocity(&self, i: usize) -> [i32; 3] {
        self.c[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.w[i]
    }

    pub fn cs2(&self) -> f64 {
        self.cs2
    }

    /// Opposite-direction pairs `(i, ī)` in selection order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// `c_i . u / cs2` for one site velocity.
    pub fn advection_ratio(&self, i: usize, u: &[f64; 3]) -> f64 {
        let c = &self.c[i];
        (f64::from(c[0]) * u[0] + f64::from(c[1]) * u[1] + f64::from(c[2]) * u[2]) / self.cs2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d1q3_weights_and_pairs() {
        let s = make_velocity_set(VelocitySetName::D1Q3);
        assert_eq!(s.q(), 3);
        assert_eq!(s.weights()[1], 1.0 / 6.0);
        assert_eq!(s.weight(0), 2.0 / 3.0);
        assert!((s.weights().iter().sum::<f64>() - 1.0).abs() <= f64::EPSILON);
        assert_eq!(s.pairs(), &[(1, 2)]);
        assert_eq!(s.cs2(), 1.0 / 3.0);
    }

    #[test]
    fn d2q9_weights_and_pairs() {
        let s = make_velocity_set(VelocitySetName::D2Q9);
        assert_eq!(s.weight(0), 4.0 / 9.0);
        assert!((s.weights().iter().sum::<f64>() - 1.0).abs() <= f64::EPSILON);
        assert_eq!(s.pairs(), &[(1, 3), (2, 4), (5, 7), (6, 8)]);
        for &(i, j) in s.pairs() {
            let (ci, cj) = (s.velocity(i), s.velocity(j));
            assert_eq!([ci[0] + cj[0], ci[1] + cj[1], ci[2] + cj[2]], [0, 0, 0]);
            assert_eq!(s.weight(i), s.weight(j));
        }
        assert_eq!(s.weight(5), 1.0 / 36.0);
    }

    #[test]
    fn unknown_name_is_config_error() {
        assert!(matches!(
            "D3Q27".parse::<VelocitySetName>(),
            Err(QlbmError::Config(_))
        ));
        assert_eq!("d2q9".parse::<VelocitySetName>().unwrap(), VelocitySetName::D2Q9);
    }

    #[test]
    fn custom_rejects_unpaired_velocity() {
        let r = VelocitySet::custom(1, vec![[0, 0, 0], [1, 0, 0]], vec![0.5, 0.5], 1.0 / 3.0);
        assert!(r.is_err());
        let rest_only = VelocitySet::custom(1, vec![[0, 0, 0]], vec![1.0], 1.0 / 3.0).unwrap();
        assert!(rest_only.pairs().is_empty());
    }
}
