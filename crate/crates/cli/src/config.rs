//! Run configuration and grid syntax.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use aqm_core::lattice::LatticeParams;
use aqm_core::params::PhysicalParams;
use aqm_core::rgflow::{BoundaryRule, FlowOptions};
use clap::ValueEnum;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    PhaseDiagram,
    Boundary,
    Coefficients,
    Correlations,
    Xi,
    Trajectory,
    Validate,
}

/// Inclusive linear grid `lo:hi:n`, or a single value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn single(v: f64) -> Self {
        Self { lo: v, hi: v, n: 1 }
    }

    pub fn is_single(&self) -> bool {
        self.n == 1
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let span = self.hi - self.lo;
        let last = (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                if i + 1 == self.n {
                    self.hi
                } else {
                    self.lo + span * (i as f64 / last)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridParseError(String);

impl fmt::Display for GridParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid grid {:?}: expected lo:hi:n or a single number", self.0)
    }
}

impl std::error::Error for GridParseError {}

impl FromStr for Grid {
    type Err = GridParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || GridParseError(s.to_string());
        let parts: Vec<&str> = s.trim().split(':').collect();
        let grid = match parts.as_slice() {
            [v] => Grid::single(v.trim().parse().map_err(|_| err())?),
            [lo, hi, n] => Grid {
                lo: lo.trim().parse().map_err(|_| err())?,
                hi: hi.trim().parse().map_err(|_| err())?,
                n: n.trim().parse().map_err(|_| err())?,
            },
            _ => return Err(err()),
        };
        let ok = grid.n >= 1 && grid.lo.is_finite() && grid.hi.is_finite() && (grid.n == 1 || grid.lo <= grid.hi);
        if ok {
            Ok(grid)
        } else {
            Err(err())
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n == 1 {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}:{}:{}", self.lo, self.hi, self.n)
        }
    }
}

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Value(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Value(v) => Ok(Grid::single(v)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub g_s: Grid,
    pub gamma: Grid,
    /// Separations for the asymptotic correlators.
    pub x: Grid,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            g_s: Grid {
                lo: 1.0,
                hi: 3.0,
                n: 41,
            },
            gamma: Grid {
                lo: 0.0,
                hi: 1.0,
                n: 41,
            },
            x: Grid {
                lo: 1.0,
                hi: 10.0,
                n: 10,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct XiSpec {
    /// Stiffnesses k̃ as (re, im) pairs.
    pub k_tilde: Vec<[f64; 2]>,
    pub m_lambda: Vec<f64>,
    /// Replica index α = ±1 of the fitted correlator.
    pub alpha: i32,
}

impl Default for XiSpec {
    fn default() -> Self {
        Self {
            k_tilde: vec![[1.0, 0.0], [0.5, -0.3], [0.25, -0.15]],
            m_lambda: vec![0.5, 1.0, 2.0],
            alpha: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub physical: PhysicalParams,
    pub lattice: LatticeParams,
    pub grid: GridSpec,
    pub xi: XiSpec,
    pub flow: FlowOptions,
    pub boundary_rule: BoundaryRule,
    /// Bisection tolerance of the numerical boundary in γ.
    pub boundary_tol: f64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            physical: PhysicalParams::default(),
            lattice: LatticeParams::default(),
            grid: GridSpec::default(),
            xi: XiSpec::default(),
            flow: FlowOptions::default(),
            boundary_rule: BoundaryRule::default(),
            boundary_tol: 1e-3,
            out: PathBuf::from("out"),
        }
    }
}
