use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{infer_distribution, ProductionInstance};

/// First-stage decision with per-product revenue estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MasterSolution {
    /// Allocation `x_pf`.
    pub x: Vec<Vec<f64>>,
    /// Chosen level index per product and facility.
    pub levels: Vec<Vec<usize>>,
    /// Revenue estimate `μ_p` carried by the solving method.
    pub mu: Vec<f64>,
    pub objective: f64,
}

impl MasterSolution {
    /// Distribution enforced for each product.
    pub fn distributions(&self, inst: &ProductionInstance) -> Result<Vec<usize>> {
        (0..self.levels.len())
            .map(|p| infer_distribution(inst, p, &self.levels[p]))
            .collect()
    }

    pub fn zero(inst: &ProductionInstance) -> Self {
        let (np, nf) = (inst.num_products(), inst.num_facilities());
        MasterSolution {
            x: vec![vec![0.0; nf]; np],
            levels: vec![vec![0; nf]; np],
            mu: vec![0.0; np],
            objective: 0.0,
        }
    }
}
