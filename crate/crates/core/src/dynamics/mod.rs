//! Group-level dynamics: word balls, limits of normalized lifts, and the
//! estimated limit sets built from them.

mod ball;
mod estimate;
mod family;
mod kulkarni;
mod limits;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{KlabError, Result};
use crate::group::{GroupElement, TOL_CANON};

pub use ball::{
    enumerate_ball, enumerate_ball_partial, enumerate_ball_tol, BallEntry, BallEnumeration,
    DedupStats, Letter,
};
pub use estimate::{
    directed_lines, directed_points, hausdorff_lines, hausdorff_points, LimitEstimate, PencilFlag,
    Provenance, TOL_CLUSTER,
};
pub use family::{
    c_gamma_estimate, c_gamma_family, eq_complement, eq_complement_family, kernel_base,
    KernelFamily, DEFAULT_FAMILY_CAP,
};
pub use kulkarni::{
    fs_sphere, kulkarni_estimate, kulkarni_from_ball, l0_from_ball, lambda_estimate,
    lambda_from_parts, lambda_union_check, pencil_is_circular, union_check, KulkarniEstimate,
    SeedConfig, UnionCheck, UNION_TOL,
};
pub use limits::{accumulate, cyclic_limits, power_limit, CyclicLimits, DEFAULT_EPS_CLUSTER};

pub const DEFAULT_RADIUS: usize = 10;
pub const DEFAULT_CAP: usize = 200_000;

/// A finitely generated subgroup of PSL(3,C), given by generators.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupSpec {
    pub name: String,
    pub generators: Vec<GroupElement>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl GroupSpec {
    pub fn new(name: impl Into<String>, generators: Vec<GroupElement>) -> Result<Self> {
        let spec = GroupSpec {
            name: name.into(),
            generators,
            metadata: BTreeMap::new(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.generators.is_empty() {
            return Err(KlabError::InvalidInput("group has no generators".into()));
        }
        if let Some(i) = self
            .generators
            .iter()
            .position(|g| g.is_identity(TOL_CANON))
        {
            return Err(KlabError::InvalidInput(format!(
                "generator {i} is the identity"
            )));
        }
        Ok(())
    }
}
