use serde::{Deserialize, Serialize};

/// Explicit resource bounds for every search and semi-decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budgets {
    /// Words expanded by one identity test on presets not marked contracting.
    pub identity_nodes: u64,
    /// Recursion nodes for one element-order computation.
    pub order_nodes: u64,
    /// Candidates examined by one search (rigid elements, conjugators, harvests).
    pub search: u64,
    /// Cap on generators kept by harvested subgroups.
    pub max_generators: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            identity_nodes: 1_000_000,
            order_nodes: 200_000,
            search: 20_000,
            max_generators: 64,
        }
    }
}

impl Budgets {
    pub fn validate(&self) -> crate::Result<()> {
        if self.identity_nodes == 0 || self.order_nodes == 0 || self.search == 0 || self.max_generators == 0 {
            return Err(crate::Error::Precondition("budgets must be strictly positive".into()));
        }
        Ok(())
    }
}
