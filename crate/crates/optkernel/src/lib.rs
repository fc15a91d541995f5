//! Small self-contained LP/MIP toolkit: a bounded-variable primal simplex with
//! dual and infeasibility certificates, and best-first branch-and-bound over
//! binaries with an incumbent callback for lazily generated rows.
//!
//! All models are maximization problems.

mod certificate;
mod error;
mod factor;
mod lp;
mod lpformat;
mod mip;
mod model;
mod result;
mod simplex;

pub use certificate::{duality_report, verify_farkas, verify_ray, DualityReport};
pub use error::KernelError;
pub use lp::{solve_lp, solve_lp_with};
pub use lpformat::{to_lp_string, write_lp};
pub use mip::{solve_mip, IncumbentCallback, IncumbentCandidate, MipOptions};
pub use model::{LinearModel, Row, Sense, VarId, VarKind, Variable};
pub use result::{BoundSample, SolveResult, SolveStats, SolveStatus};
pub use simplex::{Basis, BasisStatus, LpOptions};
