//! Configured runs: time sweeps written as CSV, the qutrit cut demo and the
//! validation suite.

pub mod config;
pub mod output;
pub mod qutrit;
pub mod sweep;
pub mod validate;

pub use config::ExperimentConfig;
pub use output::{Row, Series, SummaryEntry, CSV_HEADER};
pub use qutrit::{run_qutrit_demo, QutritReport};
pub use sweep::{compute_covariance_sweep, compute_sweep, run_covariance_sweep, run_sweep, SweepResult};
pub use validate::{run_validate, CheckItem, ValidationReport};

/// Maps `f` over `items`, in parallel when the `parallel` feature is on.
/// Output order always follows input order.
pub(crate) fn ordered_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
