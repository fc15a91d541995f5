use crate::model::Row;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
    /// Search closed to within the requested relative gap.
    GapLimit,
    IterationLimit,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolveStats {
    pub simplex_iterations: u64,
    pub nodes: u64,
    pub lazy_rows_added: usize,
    pub wall_seconds: f64,
}

/// Global bound and incumbent value after a processed node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundSample {
    pub nodes: u64,
    pub bound: f64,
    pub incumbent: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Best primal point; empty when none was found.
    pub x: Vec<f64>,
    pub objective: f64,
    /// Valid upper bound on the optimal value.
    pub bound: f64,
    /// Row duals with `d = c - y A`; empty for MIPs.
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    /// Improving direction when unbounded.
    pub ray: Option<Vec<f64>>,
    /// Row multipliers proving infeasibility.
    pub farkas: Option<Vec<f64>>,
    /// Rows returned by the incumbent callback, in order.
    pub lazy_rows: Vec<Row>,
    pub bound_trace: Vec<BoundSample>,
    pub stats: SolveStats,
}

impl SolveResult {
    pub(crate) fn empty(status: SolveStatus) -> Self {
        SolveResult {
            status,
            x: Vec::new(),
            objective: f64::NEG_INFINITY,
            bound: f64::INFINITY,
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            ray: None,
            farkas: None,
            lazy_rows: Vec::new(),
            bound_trace: Vec::new(),
            stats: SolveStats::default(),
        }
    }

    pub fn has_solution(&self) -> bool {
        !self.x.is_empty()
    }

    /// True for proven optimal results, including gap-limited closure.
    pub fn is_solved(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::GapLimit)
    }

    /// Relative gap between bound and objective, zero when closed.
    pub fn relative_gap(&self) -> f64 {
        if !self.has_solution() {
            return f64::INFINITY;
        }
        ((self.bound - self.objective) / self.objective.abs().max(1e-10)).max(0.0)
    }
}
