//! Closed-form steady-state covariance matrix.
//!
//! The steady state has only six independent entries:
//!
//! ```text
//!     ⎡ v11   0    0   v14   0   v16 ⎤
//!     ⎢  0   v11 −v14   0   v16   0  ⎥
//! V = ⎢  0  −v14  v33   0   v35   0  ⎥
//!     ⎢ v14   0    0   v33   0  −v35 ⎥
//!     ⎢  0   v16  v35   0   v66   0  ⎥
//!     ⎣ v16   0    0  −v35   0   v66 ⎦
//! ```
//!
//! Each entry is a rational function of the rates sharing the denominator
//! `2 (Γ g̃² − (g_q² + Γ k_fb) k_m) (g_q² (Γ + k_fb) + (k_fb + k_m)(−g̃² + (Γ + k_fb)(Γ + k_m)))`.
//! The cavity noise enters with the `u²(1−ε)²` prefactor, so these values
//! agree with the Lyapunov solution only under [`DiffusionMode::Paper`].
//!
//! Rates are divided by `κ_c` before evaluation; every entry is homogeneous
//! of degree zero, and the raw polynomials reach eighth powers of ~10⁷ rad/s.
//!
//! [`DiffusionMode::Paper`]: crate::model::DiffusionMode::Paper

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::model::{DerivedQuantities, SystemParams, MODE_LABELS};

/// Denominators at or below this magnitude (in `κ_c` units) are rejected.
pub const MIN_DENOMINATOR: f64 = 1e-12;

/// The six independent steady-state entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticCm {
    pub v11: f64,
    pub v14: f64,
    pub v16: f64,
    pub v33: f64,
    pub v35: f64,
    pub v66: f64,
}

impl AnalyticCm {
    pub fn evaluate(derived: &DerivedQuantities, params: &SystemParams) -> Result<Self> {
        let scale = params.kappa_c;
        let kf = derived.k_fb / scale;
        let km = params.kappa_m / scale;
        let ga = params.gamma_q / scale;
        let g = derived.g_m_eff / scale;
        let gq = derived.g_q / scale;
        let e = params.epsilon;
        // cavity noise strength u²(1−ε)²κ_c, in κ_c units
        let f = derived.u * derived.u * (1.0 - e) * (1.0 - e);
        let nc = 1.0 + 2.0 * derived.n_c;
        let nm = 1.0 + 2.0 * derived.n_m;
        let nq = 1.0 + 2.0 * derived.n_q;

        let (g2, gq2) = (g * g, gq * gq);
        let den = 2.0
            * (ga * g2 - (gq2 + ga * kf) * km)
            * (gq2 * (ga + kf) + (kf + km) * (-g2 + (ga + kf) * (ga + km)));
        if !(den.abs() > MIN_DENOMINATOR) {
            return Err(Error::DegenerateDenominator(den));
        }

        // recurring factor of the cavity-noise terms
        let cav = -ga * g2 + km * (gq2 + (ga + km) * (kf + km));

        let v11 = -(f
            * (ga * g2 * g2 + (gq2 + ga * (ga + kf)) * km * (gq2 + (ga + km) * (kf + km))
                - g2 * (ga.powi(3)
                    + gq2 * (ga + km)
                    + ga * km * (ga + km)
                    + ga * kf * (ga + 2.0 * km)))
            * nc
            + g2 * km * (-ga * g2 + ga * ga * (ga + kf) + (gq2 + ga * (ga + kf)) * km) * nm
            + ga * gq2 * cav * nq)
            / den;

        let v14 = gq
            * (ga * f * cav * nc
                + ga * g2 * km * (ga + kf + km) * nm
                + ga * (g2 * (ga + km) * (kf + km) - kf * km * (gq2 + (ga + km) * (kf + km))) * nq)
            / den;

        let v16 = g
            * km
            * (-f * (ga * (g2 - ga * (ga + kf)) - (gq2 + ga * (ga + kf)) * km) * nc
                + (gq2 * (ga + kf) * (ga + km) + ga * kf * ((ga + kf) * (ga + km) - g2)) * nm
                + ga * gq2 * (ga + kf + km) * nq)
            / den;

        let v33 = -(f * gq2 * cav * nc
            + g2 * gq2 * km * (ga + kf + km) * nm
            + ga * (gq2 * gq2 * km
                + (kf + km) * (-g2 + kf * km) * (-g2 + (ga + kf) * (ga + km))
                + gq2 * (g2 * (km - ga) + km * (kf * (2.0 * ga + kf) + (ga + kf) * km + km * km)))
                * nq)
            / den;

        let v35 = g
            * gq
            * (f * (-ga * g2 + km * (gq2 + ga * (ga + 2.0 * kf + km))) * nc
                + (gq2 * (ga + kf) + ga * (g2 + kf * (ga + kf))) * km * nm
                + ga * (gq2 * km + g2 * (kf + km) - kf * km * (kf + km)) * nq)
            / den;

        let v66 = (km
            * (-gq2 * gq2 * (ga + kf)
                + ga * (-g2 + (ga + kf) * (ga + km)) * (g2 - kf * (kf + km))
                + gq2 * (g2 * (km - ga) - (ga + kf) * (2.0 * ga * kf + (ga + kf) * km + km * km)))
            * nm
            + g2 * (f * (ga * (g2 - ga * (ga + kf)) - (gq2 + ga * (ga + kf)) * km) * nc
                - ga * gq2 * (ga + kf + km) * nq))
            / den;

        Ok(Self {
            v11,
            v14,
            v16,
            v33,
            v35,
            v66,
        })
    }

    /// Full 6×6 matrix in the fixed sparsity pattern.
    pub fn assembled(&self) -> DMatrix<f64> {
        let Self {
            v11,
            v14,
            v16,
            v33,
            v35,
            v66,
        } = *self;
        #[rustfmt::skip]
        let rows = [
            v11,  0.0,  0.0,  v14,  0.0,  v16,
            0.0,  v11,  -v14, 0.0,  v16,  0.0,
            0.0,  -v14, v33,  0.0,  v35,  0.0,
            v14,  0.0,  0.0,  v33,  0.0,  -v35,
            0.0,  v16,  v35,  0.0,  v66,  0.0,
            v16,  0.0,  0.0,  -v35, 0.0,  v66,
        ];
        DMatrix::from_row_slice(6, 6, &rows)
    }
}

/// Closed-form steady-state covariance matrix.
pub fn analytic_covariance(
    derived: &DerivedQuantities,
    params: &SystemParams,
) -> Result<CovarianceMatrix> {
    let cm = AnalyticCm::evaluate(derived, params)?;
    CovarianceMatrix::with_labels(
        cm.assembled(),
        MODE_LABELS.iter().map(|s| s.to_string()).collect(),
    )
}

/// Result of [`cross_check`].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct OracleCheck {
    pub trials: usize,
    pub seed: u64,
    /// Unstable draws that were replaced.
    pub resampled: usize,
    /// Worst entrywise relative error over entries above `1e-12`.
    pub max_relative_error: f64,
    /// Largest closed-form value where the Lyapunov entry is below `1e-12`.
    pub max_zero_entry: f64,
    pub passed: bool,
}

/// Entrywise relative tolerance of [`cross_check`].
pub const ORACLE_TOL: f64 = 1e-8;

/// Compares the closed form with the Lyapunov solution at `trials` random
/// stable points with `ε ∈ [0, 0.95]`, `T ∈ [0, 1]` K and
/// `g_q / g̃_m ∈ [0.5, 3]`, using [`DiffusionMode::Paper`].
///
/// [`DiffusionMode::Paper`]: crate::model::DiffusionMode::Paper
pub fn cross_check(trials: usize, seed: u64) -> Result<OracleCheck> {
    use crate::lyapunov::solve_lyapunov;
    use crate::model::{assert_stable, DiffusionMode, DriftDiffusion, QubitCoupling};
    use rand::{Rng, SeedableRng};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (mut done, mut resampled) = (0, 0);
    let (mut max_rel, mut max_zero) = (0.0f64, 0.0f64);
    while done < trials {
        let params = SystemParams {
            epsilon: rng.gen_range(0.0..=0.95),
            temperature: rng.gen_range(0.0..=1.0),
            g_q: QubitCoupling::RelativeToEffective(rng.gen_range(0.5..=3.0)),
            diffusion_mode: DiffusionMode::Paper,
            ..SystemParams::default()
        };
        let dd = DriftDiffusion::from_params(&params);
        if assert_stable(&dd.drift).is_err() {
            resampled += 1;
            if resampled > 100 * trials.max(1) {
                return Err(Error::InvalidSpec("no stable points in the sampling box".into()));
            }
            continue;
        }
        let numeric = solve_lyapunov(&dd.drift, &dd.diffusion)?.into_inner();
        let closed = AnalyticCm::evaluate(&dd.derived, &params)?.assembled();
        for (a, b) in closed.iter().zip(numeric.iter()) {
            if b.abs() > 1e-12 {
                max_rel = max_rel.max((a - b).abs() / b.abs());
            } else {
                max_zero = max_zero.max(a.abs());
            }
        }
        done += 1;
    }
    Ok(OracleCheck {
        trials,
        seed,
        resampled,
        max_relative_error: max_rel,
        max_zero_entry: max_zero,
        passed: max_rel <= ORACLE_TOL && max_zero <= 1e-12,
    })
}
