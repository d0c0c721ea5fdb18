//! Exact half-integral solver for the fractional node-connectivity terminal
//! backup problem, with subtree-valued dual certificates and
//! separately-capacitated multiflow extraction.

pub mod circulation;
pub mod descent;
pub mod dualnet;
pub mod error;
pub mod fixtures;
pub mod generate;
pub mod instance;
pub mod maxflow;
pub mod multiflow;
pub mod numeric;
pub mod oracle;
pub mod report;
pub mod subtree;

pub use circulation::{kappa, solve_circulation, Circulation, CirculationOutcome, Cut, Side, UndirectedNetwork};
pub use descent::{descend, duality_gap, solve_scaled, verify_slackness, EdgeCapacity, SlacknessReport, SolveResult};
pub use error::{Error, ParseError, Result};
pub use instance::{check_feasibility, ensure_positive_costs, parse_instance, parse_network, Edge, Instance};
pub use maxflow::{terminal_cut_value, CutSide, FlowNetwork, MaxFlow};
pub use multiflow::{decompose, max_multiflow, validate_multiflow, Multiflow};
pub use numeric::{half_pos, ExtHalf, Half};
pub use subtree::{properize, NodePartition, Potential, Subtree, TreeKind};

/// The flow engine at the width every solver uses.
pub type FlowNetwork64 = FlowNetwork<i64>;
pub type MaxFlow64 = MaxFlow<i64>;
