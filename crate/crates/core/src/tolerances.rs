//! The numeric tolerance bundle shared by every module.

use serde::{Deserialize, Serialize};

/// Environment variable overriding [`Tolerances::default`].
pub const TOLERANCE_ENV: &str = "FINADAPT_TOL";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Primal feasibility of LP rows and bounds.
    pub feasibility: f64,
    /// Reduced-cost optimality and primal/dual agreement.
    pub optimality: f64,
    /// Distance to the nearest integer accepted as integral.
    pub integrality: f64,
    /// Margin used by the cover-verification oracle.
    pub verify: f64,
    /// Relative singular-value cutoff for affine rank.
    pub rank: f64,
    /// Coincidence threshold for points.
    pub point: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { feasibility: 1e-7, optimality: 1e-7, integrality: 1e-6, verify: 1e-6, rank: 1e-9, point: 1e-9 }
    }
}

impl Tolerances {
    /// Parses an override string.
    ///
    /// Either a single number, which sets `feasibility`, `optimality` and
    /// `verify`, or a comma-separated list of `key=value` pairs.
    pub fn parse_override(s: &str, base: Tolerances) -> Result<Tolerances, String> {
        let s = s.trim();
        if let Ok(v) = s.parse::<f64>() {
            check_positive("value", v)?;
            return Ok(Tolerances { feasibility: v, optimality: v, verify: v, ..base });
        }
        let mut t = base;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| format!("expected key=value, got `{part}`"))?;
            let v: f64 = v.trim().parse().map_err(|_| format!("bad number in `{part}`"))?;
            check_positive(k, v)?;
            match k.trim() {
                "feasibility" => t.feasibility = v,
                "optimality" => t.optimality = v,
                "integrality" => t.integrality = v,
                "verify" => t.verify = v,
                "rank" => t.rank = v,
                "point" => t.point = v,
                other => return Err(format!("unknown tolerance `{other}`")),
            }
        }
        Ok(t)
    }

    /// Defaults, overridden by `FINADAPT_TOL` when set.
    pub fn from_env() -> Result<Tolerances, String> {
        match std::env::var(TOLERANCE_ENV) {
            Ok(s) => Tolerances::parse_override(&s, Tolerances::default()),
            Err(_) => Ok(Tolerances::default()),
        }
    }
}

fn check_positive(k: &str, v: f64) -> Result<(), String> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(format!("tolerance `{k}` must be positive and finite"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_value_sets_the_main_three() {
        let t = Tolerances::parse_override("1e-5", Tolerances::default()).unwrap();
        assert_eq!(t.feasibility, 1e-5);
        assert_eq!(t.verify, 1e-5);
        assert_eq!(t.integrality, 1e-6);
    }

    #[test]
    fn key_value_pairs() {
        let t = Tolerances::parse_override("integrality=1e-4, verify=1e-8", Tolerances::default()).unwrap();
        assert_eq!(t.integrality, 1e-4);
        assert_eq!(t.verify, 1e-8);
        assert!(Tolerances::parse_override("bogus=1", Tolerances::default()).is_err());
        assert!(Tolerances::parse_override("verify=-1", Tolerances::default()).is_err());
    }
}
