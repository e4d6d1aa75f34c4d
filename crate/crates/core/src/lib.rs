//! Steady-state Gaussian correlations of a driven qubit–cavity–magnon
//! system with coherent feedback.
//!
//! Quadratures are `X = (a + a†)/√2`, `Y = (a − a†)/(i√2)`, so the vacuum
//! has variance ½. Covariance matrices are ordered
//! `(X₁, Y₁, X₂, Y₂, …)`; in the physical model the modes are
//! cavity `c`, qubit `q`, magnon `m`, in that order.
//!
//! ```
//! use magnonsteer::{run_point, SystemParams};
//!
//! let report = run_point(&SystemParams::default()).unwrap();
//! assert!(report.get("LN_qm").unwrap().as_f64().unwrap() > 0.0);
//! assert_eq!(report.get("LN_cm").unwrap().as_f64().unwrap(), 0.0);
//! ```

pub mod analytic;
pub mod error;
pub mod gaussian;
pub mod lyapunov;
pub mod measures;
pub mod model;
pub mod sampling;
pub mod sweep;

pub use analytic::{analytic_covariance, cross_check, AnalyticCm, OracleCheck};
pub use error::{Error, Result};
pub use gaussian::{
    check_physicality, extract_submatrix, partial_transpose, schur_complement_steered,
    symplectic_eigenvalues, Bipartition, CovarianceMatrix, Physicality, SymplecticForm,
};
pub use lyapunov::{lyapunov_residual, solve_lyapunov};
pub use measures::{
    classify_steering, contangle, gaussian_steering, log_negativity_1v2, log_negativity_2mode,
    min_residual_contangle, residual_contangle, steering_asymmetry, steering_monogamy_residuals,
    CorrelationReport, MeasureValue, SteeringClass,
};
pub use model::{
    assert_stable, build_diffusion, build_drift, DerivedQuantities, DiffusionMode, DriftDiffusion,
    QubitCoupling, SystemParams,
};
pub use sweep::{
    find_threshold, preset, run_point, run_sweep, Axis, Direction, PresetId, SweepSpec, SweepTable,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/conventions.md")]
    mod conventions {}
    #[doc = include_str!("../../../book/src/lyapunov.md")]
    mod lyapunov {}
    #[doc = include_str!("../../../book/src/entanglement.md")]
    mod entanglement {}
    #[doc = include_str!("../../../book/src/steering.md")]
    mod steering {}
    #[doc = include_str!("../../../book/src/monogamy.md")]
    mod monogamy {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
}
