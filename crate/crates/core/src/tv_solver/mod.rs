//! Exploratory minimisation of the discrete BV quotient under the
//! q-constraint, and the concentration diagnostic for minimising families.

mod concentration;
mod grid_function;
mod solver;

pub(crate) use grid_function::CellBlock;

pub use concentration::{concentration_report, concentration_report_with, Atom, ConcentrationConfig, ConcentrationReport};
pub use grid_function::{grid_quotient, lp_norm_power, total_variation, GridFunction, CELL_SUBSAMPLES};
pub use solver::{
    achievability_certificate, minimize_quotient, ConstantEstimate, DomainCertificate, DomainWitness, HistoryEntry,
    SolverConfig,
};
