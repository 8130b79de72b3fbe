//! Impulse response estimation by local projections and vector autoregressions,
//! with bias corrections, analytical and bootstrap intervals, closed-form
//! bias/coverage curves, and a deterministic Monte Carlo harness.

pub mod boot;
pub mod data;
pub mod dgp;
pub mod error;
pub mod estimator;
pub mod irf;
pub mod linalg;
pub mod lp;
pub mod mc;
pub mod regress;
pub mod theory;
pub mod var;

pub use boot::{lp_percentile_t_ci, var_efron_ci, BootConfig};
pub use data::Dataset;
pub use dgp::{simulate, DgpSpec, TrueIrf};
pub use error::{Error, Result};
pub use irf::IrfResult;
pub use lp::{lp_estimate, LpSpec};
pub use mc::{run_experiment, sweep, ExperimentConfig, McReport};
pub use var::{fit_var, Identification, Normalization, VarFit};
