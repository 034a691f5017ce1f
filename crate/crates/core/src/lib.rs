//! Bottleneck identification and capacity relaxation for resource-constrained
//! project scheduling with time-variant capacities.
//!
//! The usual flow: load or [`generate`] an instance, [`solver::solve_heuristic`]
//! it, pick a tardy project, and run [`iira::run_iira`] (untargeted) or
//! [`ssira::run_ssira`] (targeted) to get a [`proposal::RelaxationProposal`]
//! listing the capacity additions and migrations that improve the schedule.
//! [`harness`] evaluates both over parameter grids.

pub mod accounting;
pub mod format;
pub mod generate;
pub mod harness;
pub mod iira;
pub mod indicators;
pub mod model;
pub mod par;
pub mod proposal;
pub mod psplib;
pub mod solver;
pub mod ssira;

/// Exact rational used for indicator values and utilization ratios.
pub type Rational = num_rational::Ratio<i128>;
