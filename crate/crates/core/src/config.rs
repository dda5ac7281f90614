//! JSON configuration documents.
//!
//! ```json
//! {
//!   "partition": { "kind": "geometric", "base": 4, "blocks": 8 },
//!   "weights":   { "kind": "constant_one" },
//!   "p": 2.0,
//!   "norming":   { "kind": "root_of_boundary" }
//! }
//! ```
//!
//! Partition kinds:
//! - `geometric`: `base` (integer >= 2), `blocks` (>= 1). Continues geometrically.
//! - `lacunary`: `boundaries` (strictly increasing), optional `extend_ratio`
//!   (integer >= 2) continuing `n_{k+1} = extend_ratio * n_k`.
//! - `singleton`: `blocks`. Continues with singletons.
//! - `explicit`: `block_lengths`, optional `extension`, either
//!   `{"kind": "geometric", "ratio": R}` or `{"kind": "constant", "length": L}`.
//!
//! Weight kinds (default `constant_one`): `constant_one`;
//! `explicit` with `values` and optional `tail` (default 1); `geometric` with
//! `scale` and `ratio`, `m_j = scale * ratio^(j-1)`.
//!
//! Norming kinds (default `derived`): `derived`; `power` with `alpha`,
//! `M_n = n^alpha`; `root_of_boundary`, `M_k = n_k^(1/q)`.
//!
//! Unknown fields are rejected everywhere.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::partitions::{
    geometric_partition, lacunary_partition, singleton_partition, AveragingConfig, ExponentPair,
    ExtensionRule, NormingScheme, Partition, WeightScheme,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSpec {
    pub partition: PartitionSpec,
    #[serde(default)]
    pub weights: WeightSpec,
    pub p: f64,
    #[serde(default)]
    pub norming: NormingSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PartitionSpec {
    Geometric {
        base: u64,
        blocks: usize,
    },
    Lacunary {
        boundaries: Vec<u64>,
        #[serde(default)]
        extend_ratio: Option<u64>,
    },
    Singleton {
        blocks: usize,
    },
    Explicit {
        block_lengths: Vec<u64>,
        #[serde(default)]
        extension: Option<ExtensionSpec>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExtensionSpec {
    Geometric { ratio: u64 },
    Constant { length: u64 },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    #[default]
    ConstantOne,
    Explicit {
        values: Vec<f64>,
        #[serde(default = "one")]
        tail: f64,
    },
    Geometric {
        scale: f64,
        ratio: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormingSpec {
    #[default]
    Derived,
    Power {
        alpha: f64,
    },
    RootOfBoundary,
}

fn field<T>(name: &str, result: Result<T>) -> Result<T> {
    result.map_err(|e| HardyError::Config(format!("field `{name}`: {e}")))
}

impl ConfigSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HardyError::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HardyError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn build(&self) -> Result<AveragingConfig> {
        let exponents = field("p", ExponentPair::from_p(self.p))?;
        let partition = field("partition", self.partition.build())?;
        let weights = field(
            "weights",
            match &self.weights {
                WeightSpec::ConstantOne => Ok(WeightScheme::ConstantOne),
                WeightSpec::Explicit { values, tail } => {
                    WeightScheme::explicit(values.clone(), *tail)
                }
                WeightSpec::Geometric { scale, ratio } => WeightScheme::geometric(*scale, *ratio),
            },
        )?;
        let norming = field(
            "norming",
            match self.norming {
                NormingSpec::Derived => Ok(NormingScheme::Derived),
                NormingSpec::Power { alpha } => NormingScheme::power(alpha),
                NormingSpec::RootOfBoundary => Ok(NormingScheme::RootOfBoundary),
            },
        )?;
        Ok(AveragingConfig::new(partition, weights, exponents, norming))
    }

    /// The integer base when the partition is geometric.
    pub fn geometric_base(&self) -> Option<u64> {
        match self.partition {
            PartitionSpec::Geometric { base, .. } => Some(base),
            _ => None,
        }
    }
}

impl PartitionSpec {
    pub fn build(&self) -> Result<Partition> {
        match self {
            PartitionSpec::Geometric { base, blocks } => geometric_partition(*base, *blocks),
            PartitionSpec::Lacunary {
                boundaries,
                extend_ratio,
            } => {
                let (partition, _) = lacunary_partition(boundaries)?;
                partition
                    .with_extension(extend_ratio.map(|ratio| ExtensionRule::Geometric { ratio }))
            }
            PartitionSpec::Singleton { blocks } => singleton_partition(*blocks),
            PartitionSpec::Explicit {
                block_lengths,
                extension,
            } => Partition::new(
                block_lengths.clone(),
                extension.map(|ext| match ext {
                    ExtensionSpec::Geometric { ratio } => ExtensionRule::Geometric { ratio },
                    ExtensionSpec::Constant { length } => ExtensionRule::Constant { length },
                }),
            ),
        }
    }
}
