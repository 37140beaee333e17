//! Size limits for the combinatorial searches.
//!
//! Defaults can be overridden with the `FCOLOR_BUDGET` environment variable,
//! a comma-separated list of `key=value` pairs, e.g.
//! `FCOLOR_BUDGET=power_vertices=5000,ilp_nodes=200000`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Largest vertex count an AND-power graph may materialize.
    pub power_vertices: usize,
    /// Largest graph for which all (not only maximal) independent sets are listed.
    pub all_sets_vertices: usize,
    /// Largest graph for maximal independent set enumeration.
    pub maximal_sets_vertices: usize,
    /// Cap on the number of independent sets returned by one enumeration.
    pub max_sets: usize,
    /// Column cap for the integer program.
    pub ilp_columns: usize,
    /// Branch-and-bound node cap for the integer program.
    pub ilp_nodes: usize,
    /// Largest graph on which minimum-entropy search runs to proven optimality.
    pub entropy_vertices: usize,
    /// Node cap for minimum-entropy search.
    pub entropy_nodes: u64,
    /// Cap on enumerated cases in exhaustive codec verification.
    pub verify_cases: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            power_vertices: 20_000,
            all_sets_vertices: 64,
            maximal_sets_vertices: 200,
            max_sets: 2_000_000,
            ilp_columns: 100_000,
            ilp_nodes: 1_000_000,
            entropy_vertices: 25,
            entropy_nodes: 200_000_000,
            verify_cases: 50_000_000,
        }
    }
}

pub const ENV_VAR: &str = "FCOLOR_BUDGET";

impl Budget {
    /// Defaults with `FCOLOR_BUDGET` overrides applied.
    pub fn from_env() -> Result<Self> {
        match std::env::var(ENV_VAR) {
            Ok(spec) => Self::default().with_overrides(&spec),
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn with_overrides(mut self, spec: &str) -> Result<Self> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("{ENV_VAR}: expected key=value, got `{item}`"))
            })?;
            let value: u64 = value.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("{ENV_VAR}: `{key}` needs an integer"))
            })?;
            let v = value as usize;
            match key.trim() {
                "power_vertices" => self.power_vertices = v,
                "all_sets_vertices" => self.all_sets_vertices = v,
                "maximal_sets_vertices" => self.maximal_sets_vertices = v,
                "max_sets" => self.max_sets = v,
                "ilp_columns" => self.ilp_columns = v,
                "ilp_nodes" => self.ilp_nodes = v,
                "entropy_vertices" => self.entropy_vertices = v,
                "entropy_nodes" => self.entropy_nodes = value,
                "verify_cases" => self.verify_cases = value,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "{ENV_VAR}: unknown key `{other}`"
                    )))
                }
            }
        }
        Ok(self)
    }
}
