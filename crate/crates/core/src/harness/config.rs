//! Run configuration: one JSON document with every default embedded.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feshbach::CutoffFunction;
use crate::kernels::DESIGN_SHRINK_FACTOR;
use crate::pipeline::FieldConfig;

/// Tolerances of every check; each one is echoed next to its measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub lemma1_overlap: f64,
    pub casimir: f64,
    pub frame: f64,
    pub rotation_rep: f64,
    pub kappa: f64,
    pub fock_algebra: f64,
    pub norm_quadrature: f64,
    /// Errors below this are round-off and carry no convergence order.
    pub quadrature_floor: f64,
    pub assembly: f64,
    pub norm_bound: f64,
    pub exact_coefficients: f64,
    pub averaged_probe: f64,
    pub design_shrink: f64,
    pub control_probe: f64,
    pub feshbach_closed_form: f64,
    pub isospectral: f64,
    pub pipeline_probe: f64,
    pub reduced_commutator: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            lemma1_overlap: 1e-10,
            casimir: 1e-10,
            frame: 1e-14,
            rotation_rep: 1e-12,
            kappa: 1e-12,
            fock_algebra: 1e-10,
            norm_quadrature: 1e-6,
            quadrature_floor: 1e-13,
            assembly: 1e-10,
            norm_bound: 1e-12,
            exact_coefficients: 1e-12,
            averaged_probe: 1e-10,
            design_shrink: DESIGN_SHRINK_FACTOR,
            control_probe: 1e-3,
            feshbach_closed_form: 1e-12,
            isospectral: 1e-10,
            pipeline_probe: 1e-9,
            reduced_commutator: 1e-11,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Largest multipole order of the field modes.
    pub l_max: usize,
    pub radial_nodes: usize,
    pub angular_degree: usize,
    /// Particle cap of the Fock space used by the kernel and Fock suites.
    pub n_max: usize,
    /// Energy cap of every Fock space.
    pub e_max: f64,
    /// Particle cap of the pipeline and vanishing Fock spaces.
    pub pipeline_n_max: usize,
    pub xi: f64,
    pub rgrid_size: usize,
    /// Haar product order `q`; the shrink check compares `q` with `2q`.
    pub haar_order: usize,
    pub seed: u64,
    pub eta: CutoffFunction,
    /// Ultraviolet cutoff `Λ` of the coupling functions `κ_{l,x}`.
    pub lambda: f64,
    /// Kernel orders `(m, n)` drawn by the kernel suites.
    pub index_set: Vec<(usize, usize)>,
    /// Truncations visited by the invariant-field check.
    pub lemma1_l_max: Vec<usize>,
    pub assembly_samples: usize,
    pub norm_samples: usize,
    pub identity_samples: usize,
    pub vanishing_seeds: usize,
    pub pairing_eps: Vec<f64>,
    pub pipeline_rotations: usize,
    pub tolerances: Tolerances,
}

/// `(m, n) ∈ {0, 1, 2}²` with `m + n ≤ 3`.
pub fn default_index_set() -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for m in 0..=2 {
        for n in 0..=2 {
            if m + n <= 3 {
                out.push((m, n));
            }
        }
    }
    out
}

impl Default for Config {
    fn default() -> Self {
        Self {
            l_max: 1,
            radial_nodes: 3,
            angular_degree: 4,
            n_max: 3,
            e_max: 1.0,
            pipeline_n_max: 2,
            xi: 0.5,
            rgrid_size: crate::kernels::DEFAULT_RGRID_SIZE,
            haar_order: 4,
            seed: 0,
            eta: CutoffFunction::default(),
            lambda: 1.0,
            index_set: default_index_set(),
            lemma1_l_max: vec![1, 2, 3, 4],
            assembly_samples: 50,
            norm_samples: 100,
            identity_samples: 100,
            vanishing_seeds: 3,
            pairing_eps: vec![0.2, 0.1, 0.05],
            pipeline_rotations: 10,
            tolerances: Tolerances::default(),
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.xi > 0.0 && self.xi < 1.0) {
            return bad(format!("xi must lie in (0, 1), got {}", self.xi));
        }
        if !(self.eta.a > 0.0 && self.eta.a < self.eta.b && self.eta.b < 1.0) {
            return bad(format!("eta needs 0 < a < b < 1, got a = {}, b = {}", self.eta.a, self.eta.b));
        }
        if !(self.e_max > 0.0 && self.e_max <= 1.0) {
            return bad(format!("e_max must lie in (0, 1], got {}", self.e_max));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        let counts = [
            ("l_max", self.l_max),
            ("radial_nodes", self.radial_nodes),
            ("angular_degree", self.angular_degree),
            ("n_max", self.n_max),
            ("pipeline_n_max", self.pipeline_n_max),
            ("rgrid_size", self.rgrid_size),
            ("haar_order", self.haar_order),
            ("assembly_samples", self.assembly_samples),
            ("norm_samples", self.norm_samples),
            ("identity_samples", self.identity_samples),
            ("vanishing_seeds", self.vanishing_seeds),
            ("pipeline_rotations", self.pipeline_rotations),
        ];
        for (name, v) in counts {
            if v < 1 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        if self.rgrid_size < 2 {
            return bad("rgrid_size must be at least 2".into());
        }
        if self.index_set.is_empty() || self.index_set.iter().any(|&(m, n)| m + n > 3) {
            return bad("index_set must be non-empty with m + n ≤ 3".into());
        }
        if self.lemma1_l_max.contains(&0) {
            return bad("lemma1_l_max entries must be at least 1".into());
        }
        if self.pairing_eps.len() < 2 || self.pairing_eps.windows(2).any(|w| !(w[1] < w[0] && w[1] > 0.0)) {
            return bad("pairing_eps needs at least two strictly decreasing positive widths".into());
        }
        Ok(())
    }

    /// Field discretization at particle cap `n_max`.
    pub fn field(&self, n_max: usize) -> FieldConfig {
        FieldConfig {
            l_max: self.l_max,
            radial_nodes: self.radial_nodes,
            angular_degree: self.angular_degree,
            n_max,
            e_max: Some(self.e_max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_and_validate() {
        let cfg = Config::default();
        cfg.validate().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(Config::from_json(&text).unwrap(), cfg);
        assert_eq!(Config::from_json("{}").unwrap(), cfg);
        assert_eq!(cfg.index_set.len(), 8);
    }

    #[test]
    fn invalid_settings_are_rejected() {
        for text in [
            r#"{"eta": {"a": 0.7, "b": 0.6}}"#,
            r#"{"eta": {"a": 0.6, "b": 0.6}}"#,
            r#"{"xi": 1.0}"#,
            r#"{"e_max": 1.5}"#,
            r#"{"radial_nodes": 0}"#,
            r#"{"index_set": [[2, 2]]}"#,
            r#"{"pairing_eps": [0.1, 0.2]}"#,
            r#"{"unknown": 1}"#,
        ] {
            assert!(Config::from_json(text).is_err(), "{text}");
        }
    }
}
