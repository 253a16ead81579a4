//! Per-command configuration files. Every field has a default, so an empty
//! object is a valid config; unknown keys are rejected.

use pfaffnet_core::liegeom::LocusCriterion;
use pfaffnet_core::{ActivationRef, BoxDomain, BracketMode};
use serde::{Deserialize, Serialize};

use crate::CliError;

fn tanh() -> ActivationRef {
    ActivationRef::Name("tanh".into())
}

/// `(d, widths, activation)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArchConfig {
    pub d: usize,
    pub widths: Vec<usize>,
    pub activation: ActivationRef,
}

impl Default for ArchConfig {
    fn default() -> Self {
        Self {
            d: 1,
            widths: vec![3],
            activation: tanh(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxConfig {
    pub fn cube(d: usize, lo: f64, hi: f64) -> Self {
        Self {
            lo: vec![lo; d],
            hi: vec![hi; d],
        }
    }

    pub fn domain(&self) -> Result<BoxDomain, CliError> {
        BoxDomain::new(self.lo.clone(), self.hi.clone()).map_err(|e| CliError::Schema(format!("box: {e}")))
    }
}

pub type FormatConfig = ArchConfig;

/// One bound to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "formula", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundRequest {
    ZeroBound {
        #[serde(rename = "R")]
        chain_len: u64,
        #[serde(rename = "L")]
        depth: u64,
    },
    BettiBound {
        d: u64,
        #[serde(rename = "R")]
        chain_len: u64,
        #[serde(rename = "L")]
        depth: u64,
    },
    GvBound {
        d: u64,
        s: u64,
        #[serde(rename = "R")]
        chain_len: u64,
        alpha: u64,
        beta: u64,
    },
    RankdropBound {
        d: u64,
        m: u64,
        k: u64,
        rho: u64,
        widths: Vec<usize>,
        r: usize,
    },
    /// Zero bound (when `d = 1`) and Betti bound of an architecture.
    Network {
        d: usize,
        widths: Vec<usize>,
        #[serde(default = "tanh")]
        activation: ActivationRef,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundConfig {
    /// Domain constant as a positive rational, e.g. `"1"` or `"3/2"`.
    pub constant: String,
    pub mode: BracketMode,
    pub requests: Vec<BoundRequest>,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self {
            constant: "1".into(),
            mode: BracketMode::Hall,
            requests: vec![
                BoundRequest::ZeroBound { chain_len: 2, depth: 1 },
                BoundRequest::BettiBound {
                    d: 1,
                    chain_len: 2,
                    depth: 1,
                },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub architecture: ArchConfig,
    /// Weights are uniform on `[−scale, scale]`.
    pub scale: f64,
    pub seeds: String,
    pub points: usize,
    /// Points are uniform on `[−half_width, half_width]^d`.
    pub half_width: f64,
    pub tol: f64,
    /// Corrupt one certificate before verifying; the run must then fail.
    pub self_test: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            architecture: ArchConfig {
                d: 2,
                widths: vec![3, 3],
                activation: tanh(),
            },
            scale: 1.0,
            seeds: "0..10".into(),
            points: 100,
            half_width: 2.0,
            tol: 1e-8,
            self_test: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZerosConfig {
    pub widths: Vec<usize>,
    pub activation: ActivationRef,
    pub scale: f64,
    pub interval: [f64; 2],
    pub seeds: String,
    pub initial_samples: usize,
    pub tol: f64,
    pub constant: String,
}

impl Default for ZerosConfig {
    fn default() -> Self {
        Self {
            widths: vec![3, 3],
            activation: tanh(),
            scale: 2.0,
            interval: [-4.0, 4.0],
            seeds: "0..100".into(),
            initial_samples: 8192,
            tol: 1e-12,
            constant: "1".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeFixture {
    Disk,
    Annulus,
    TwoDisks,
}

impl ShapeFixture {
    /// Signed function whose superlevel set `{f ≥ 0}` is the shape.
    pub fn eval(self, x: &[f64]) -> f64 {
        let r2 = |cx: f64| (x[0] - cx).powi(2) + x[1] * x[1];
        match self {
            ShapeFixture::Disk => 1.0 - r2(0.0),
            ShapeFixture::Annulus => (r2(0.0) - 0.25).min(1.0 - r2(0.0)),
            ShapeFixture::TwoDisks => (0.25 - r2(-1.0)).max(0.25 - r2(1.0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BettiSource {
    Fixture {
        name: ShapeFixture,
    },
    Network {
        d: usize,
        widths: Vec<usize>,
        #[serde(default = "tanh")]
        activation: ActivationRef,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BettiConfig {
    pub source: BettiSource,
    #[serde(rename = "box")]
    pub domain: BoxConfig,
    pub resolution: usize,
    pub threshold: f64,
    pub seeds: String,
    pub constant: String,
}

impl Default for BettiConfig {
    fn default() -> Self {
        Self {
            source: BettiSource::Fixture {
                name: ShapeFixture::Disk,
            },
            domain: BoxConfig::cube(2, -2.0, 2.0),
            resolution: 64,
            threshold: 0.0,
            seeds: "0".into(),
            constant: "1".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldFixture {
    Grushin,
    Heisenberg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySource {
    Fixture {
        name: FieldFixture,
    },
    /// A family declaration file.
    File {
        path: String,
    },
    Random {
        d: usize,
        m: usize,
        widths: Vec<usize>,
        #[serde(default = "tanh")]
        activation: ActivationRef,
        #[serde(default = "one")]
        scale: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionName {
    Svd,
    Minor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RankdropConfig {
    pub family: FamilySource,
    pub rho: usize,
    pub k_min: usize,
    pub k_max: usize,
    #[serde(rename = "box")]
    pub domain: BoxConfig,
    pub resolution: usize,
    pub criterion: CriterionName,
    pub tol: f64,
    /// Minor threshold; `null` derives it from the sampled minors.
    pub epsilon: Option<f64>,
    pub thicken: bool,
    pub mode: BracketMode,
    pub seeds: String,
    /// Write each sampled locus as a run-length encoded grid next to the
    /// report.
    pub export_grids: bool,
    pub constant: String,
}

impl Default for RankdropConfig {
    fn default() -> Self {
        Self {
            family: FamilySource::Fixture {
                name: FieldFixture::Grushin,
            },
            rho: 1,
            k_min: 1,
            k_max: 2,
            domain: BoxConfig::cube(2, -1.0, 1.0),
            resolution: 64,
            criterion: CriterionName::Svd,
            tol: 1e-8,
            epsilon: None,
            thicken: true,
            mode: BracketMode::Hall,
            seeds: "0".into(),
            export_grids: false,
            constant: "1".into(),
        }
    }
}

impl RankdropConfig {
    pub fn locus_criterion(&self) -> LocusCriterion {
        match self.criterion {
            CriterionName::Svd => LocusCriterion::Svd { tol: self.tol },
            CriterionName::Minor => LocusCriterion::Minor { epsilon: self.epsilon },
        }
    }
}

/// Parses `N`, `N..M` (end exclusive), `N..=M` or `a,b,c`.
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Schema(format!("seeds: cannot parse `{spec}` (use N, N..M, N..=M or a,b,c)"));
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
    let seeds: Vec<u64> = if let Some((a, b)) = spec.split_once("..=") {
        (num(a)?..=num(b)?).collect()
    } else if let Some((a, b)) = spec.split_once("..") {
        (num(a)?..num(b)?).collect()
    } else {
        spec.split(',').map(num).collect::<Result<_, _>>()?
    };
    if seeds.is_empty() {
        return Err(CliError::Schema(format!("seeds: `{spec}` is empty")));
    }
    Ok(seeds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_syntax() {
        assert_eq!(parse_seeds("3").unwrap(), vec![3]);
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("1..=3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seeds("5, 9").unwrap(), vec![5, 9]);
        assert!(parse_seeds("4..4").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn empty_objects_take_defaults() {
        let c: RankdropConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, RankdropConfig::default());
        let b: BoundConfig = serde_json::from_str(r#"{"requests":[{"formula":"zero_bound","R":2,"L":1}]}"#).unwrap();
        assert_eq!(b.requests.len(), 1);
        assert!(
            serde_json::from_str::<BoundConfig>(r#"{"requests":[{"formula":"zero_bound","R":2,"L":1,"x":0}]}"#)
                .is_err()
        );
        assert!(serde_json::from_str::<ZerosConfig>(r#"{"widthz":[3]}"#).is_err());
    }
}
