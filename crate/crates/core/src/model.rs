//! Physical model: parameters of the qubit–cavity–magnon system with a
//! coherent feedback loop, and the linear drift/diffusion pair that fixes
//! its Gaussian steady state.
//!
//! All rates and angular frequencies are stored in rad/s. Parameter files
//! give them as `frequency / 2π` in Hz (so `"kappa_c": 5e6` means
//! `κ_c = 2π × 5 MHz`) and they are converted on ingestion.
//!
//! Mode order is cavity, qubit, magnon; quadrature order is
//! `(X_c, Y_c, X_q, Y_q, X_m, Y_m)`.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lyapunov::spectral_abscissa;

/// Reduced Planck constant, J·s (CODATA 2018).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (CODATA 2018).
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Mode labels in quadrature order.
pub const MODE_LABELS: [&str; 3] = ["c", "q", "m"];
pub const CAVITY: usize = 0;
pub const QUBIT: usize = 1;
pub const MAGNON: usize = 2;

/// Which cavity noise prefactor enters the diffusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffusionMode {
    /// `u²(1−ε)²`, the prefactor used for the published figures.
    #[default]
    Paper,
    /// `u²(1 − 2ε cos θ + ε²)`, the feedback noise correlation at the
    /// configured phase.
    Consistent,
}

impl std::str::FromStr for DiffusionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Self::Paper),
            "consistent" => Ok(Self::Consistent),
            other => Err(Error::InvalidParameter {
                name: "diffusion_mode".into(),
                reason: format!("expected `paper` or `consistent`, got `{other}`"),
            }),
        }
    }
}

/// Qubit–cavity coupling, either absolute or as a multiple of the
/// effective optomagnonic coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QubitCoupling {
    /// rad/s
    Absolute(f64),
    RelativeToEffective(f64),
}

/// Physical inputs of one simulation point (SI units, rates in rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub omega_c: f64,
    pub omega_q: f64,
    /// Bias field, T.
    pub b0: f64,
    /// rad/(s·T)
    pub gyromagnetic_ratio: f64,
    pub kappa_c: f64,
    pub kappa_m: f64,
    pub gamma_q: f64,
    pub g_q: QubitCoupling,
    /// Beam-splitter reflectivity, `0 ≤ ε < 1`.
    pub epsilon: f64,
    /// Feedback phase, rad.
    pub theta: f64,
    /// K
    pub temperature: f64,
    /// W
    pub drive_power: f64,
    /// m
    pub drive_wavelength: f64,
    /// rad/m
    pub verdet: f64,
    pub refractive_index: f64,
    /// 1/m³
    pub spin_density: f64,
    /// m
    pub sphere_radius: f64,
    pub diffusion_mode: DiffusionMode,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            omega_c: TAU * 8.35e9,
            omega_q: TAU * 8.44e9,
            b0: 0.1,
            gyromagnetic_ratio: TAU * 28e9,
            kappa_c: TAU * 5e6,
            kappa_m: TAU * 1e6,
            gamma_q: TAU * 0.2e6,
            g_q: QubitCoupling::RelativeToEffective(2.0),
            epsilon: 0.0,
            theta: PI,
            temperature: 10e-3,
            drive_power: 10e-3,
            drive_wavelength: 1550e-9,
            verdet: 3.77e2,
            refractive_index: 2.19,
            spin_density: 2.1e28,
            sphere_radius: 1e-4,
            diffusion_mode: DiffusionMode::Paper,
        }
    }
}

/// Parameter file contents: every key optional, unknown keys rejected.
/// Rates and frequencies are in Hz (`value / 2π`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_q: Option<f64>,
    #[serde(rename = "B0", skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gyromagnetic_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_q_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drive_power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drive_wavelength: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdet: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refractive_index: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spin_density: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sphere_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diffusion_mode: Option<DiffusionMode>,
}

/// Numeric keys accepted in parameter files and as sweep axes.
pub const PARAMETER_KEYS: [&str; 18] = [
    "omega_c",
    "omega_q",
    "B0",
    "gyromagnetic_ratio",
    "kappa_c",
    "kappa_m",
    "gamma_q",
    "g_q",
    "g_q_ratio",
    "epsilon",
    "theta",
    "temperature",
    "drive_power",
    "drive_wavelength",
    "verdet",
    "refractive_index",
    "spin_density",
    "sphere_radius",
];

impl SystemParams {
    /// Parses a JSON parameter document, filling missing keys from the
    /// defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ParamsFile = serde_json::from_str(text).map_err(|e| Error::InvalidParameter {
            name: "<document>".into(),
            reason: e.to_string(),
        })?;
        Self::from_file(&file)
    }

    pub fn from_file(file: &ParamsFile) -> Result<Self> {
        if file.g_q.is_some() && file.g_q_ratio.is_some() {
            return Err(Error::InvalidParameter {
                name: "g_q".into(),
                reason: "give either `g_q` or `g_q_ratio`, not both".into(),
            });
        }
        let mut p = Self::default();
        let numeric = [
            ("omega_c", file.omega_c),
            ("omega_q", file.omega_q),
            ("B0", file.b0),
            ("gyromagnetic_ratio", file.gyromagnetic_ratio),
            ("kappa_c", file.kappa_c),
            ("kappa_m", file.kappa_m),
            ("gamma_q", file.gamma_q),
            ("g_q", file.g_q),
            ("g_q_ratio", file.g_q_ratio),
            ("epsilon", file.epsilon),
            ("theta", file.theta),
            ("temperature", file.temperature),
            ("drive_power", file.drive_power),
            ("drive_wavelength", file.drive_wavelength),
            ("verdet", file.verdet),
            ("refractive_index", file.refractive_index),
            ("spin_density", file.spin_density),
            ("sphere_radius", file.sphere_radius),
        ];
        for (key, value) in numeric {
            if let Some(v) = value {
                p.set(key, v)?;
            }
        }
        if let Some(mode) = file.diffusion_mode {
            p.diffusion_mode = mode;
        }
        p.validate()?;
        Ok(p)
    }

    /// Inverse of [`SystemParams::from_file`]: every key written out in file units.
    pub fn to_file(&self) -> ParamsFile {
        let (g_q, g_q_ratio) = match self.g_q {
            QubitCoupling::Absolute(g) => (Some(g / TAU), None),
            QubitCoupling::RelativeToEffective(r) => (None, Some(r)),
        };
        ParamsFile {
            omega_c: Some(self.omega_c / TAU),
            omega_q: Some(self.omega_q / TAU),
            b0: Some(self.b0),
            gyromagnetic_ratio: Some(self.gyromagnetic_ratio / TAU),
            kappa_c: Some(self.kappa_c / TAU),
            kappa_m: Some(self.kappa_m / TAU),
            gamma_q: Some(self.gamma_q / TAU),
            g_q,
            g_q_ratio,
            epsilon: Some(self.epsilon),
            theta: Some(self.theta),
            temperature: Some(self.temperature),
            drive_power: Some(self.drive_power),
            drive_wavelength: Some(self.drive_wavelength),
            verdet: Some(self.verdet),
            refractive_index: Some(self.refractive_index),
            spin_density: Some(self.spin_density),
            sphere_radius: Some(self.sphere_radius),
            diffusion_mode: Some(self.diffusion_mode),
        }
    }

    /// Sets a numeric parameter by file key, in file units.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "omega_c" => self.omega_c = TAU * value,
            "omega_q" => self.omega_q = TAU * value,
            "B0" => self.b0 = value,
            "gyromagnetic_ratio" => self.gyromagnetic_ratio = TAU * value,
            "kappa_c" => self.kappa_c = TAU * value,
            "kappa_m" => self.kappa_m = TAU * value,
            "gamma_q" => self.gamma_q = TAU * value,
            "g_q" => self.g_q = QubitCoupling::Absolute(TAU * value),
            "g_q_ratio" => self.g_q = QubitCoupling::RelativeToEffective(value),
            "epsilon" => self.epsilon = value,
            "theta" => self.theta = value,
            "temperature" => self.temperature = value,
            "drive_power" => self.drive_power = value,
            "drive_wavelength" => self.drive_wavelength = value,
            "verdet" => self.verdet = value,
            "refractive_index" => self.refractive_index = value,
            "spin_density" => self.spin_density = value,
            "sphere_radius" => self.sphere_radius = value,
            other => {
                return Err(Error::InvalidParameter {
                    name: other.into(),
                    reason: "unknown parameter key".into(),
                })
            }
        }
        Ok(())
    }

    /// Checks ranges: positive rates and material constants, `0 ≤ ε < 1`,
    /// `T ≥ 0`, `P ≥ 0`.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_c", self.omega_c),
            ("omega_q", self.omega_q),
            ("B0", self.b0),
            ("gyromagnetic_ratio", self.gyromagnetic_ratio),
            ("kappa_c", self.kappa_c),
            ("kappa_m", self.kappa_m),
            ("gamma_q", self.gamma_q),
            ("drive_wavelength", self.drive_wavelength),
            ("verdet", self.verdet),
            ("refractive_index", self.refractive_index),
            ("spin_density", self.spin_density),
            ("sphere_radius", self.sphere_radius),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        match self.g_q {
            QubitCoupling::Absolute(g) | QubitCoupling::RelativeToEffective(g)
                if !(g >= 0.0 && g.is_finite()) =>
            {
                return Err(invalid("g_q", format!("must be non-negative, got {g}")));
            }
            _ => {}
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(invalid("epsilon", format!("must lie in [0, 1), got {}", self.epsilon)));
        }
        if !self.theta.is_finite() {
            return Err(invalid("theta", "must be finite".into()));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(invalid("temperature", format!("must be ≥ 0, got {}", self.temperature)));
        }
        if !(self.drive_power >= 0.0 && self.drive_power.is_finite()) {
            return Err(invalid("drive_power", format!("must be ≥ 0, got {}", self.drive_power)));
        }
        Ok(())
    }

    /// Beam-splitter transmission `u = √(1 − ε²)`.
    pub fn transmission(&self) -> f64 {
        (1.0 - self.epsilon * self.epsilon).sqrt()
    }
}

fn invalid(name: &str, reason: String) -> Error {
    Error::InvalidParameter {
        name: name.into(),
        reason,
    }
}

/// Bose–Einstein occupation `1 / (exp(ħω / k_B T) − 1)`; exactly 0 at `T = 0`.
pub fn thermal_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * omega / (K_B * temperature)).exp_m1()
}

/// Bare optomagnonic coupling `V (c/n_r) √(2 / (n_s V_sp))`, rad/s.
pub fn optomagnonic_coupling(params: &SystemParams) -> f64 {
    let volume = 4.0 * PI / 3.0 * params.sphere_radius.powi(3);
    params.verdet * SPEED_OF_LIGHT / params.refractive_index
        * (2.0 / (params.spin_density * volume)).sqrt()
}

/// Intracavity photon number `2P / (κ_c ħ Ω_p)` with `Ω_p = 2πc/λ_p`.
pub fn intracavity_photons(params: &SystemParams) -> f64 {
    let omega_p = TAU * SPEED_OF_LIGHT / params.drive_wavelength;
    2.0 * params.drive_power / (params.kappa_c * HBAR * omega_p)
}

/// Drive-enhanced coupling `g̃_m = g_m √n_p`, rad/s.
pub fn effective_coupling(params: &SystemParams) -> f64 {
    optomagnonic_coupling(params) * intracavity_photons(params).sqrt()
}

/// Quantities computed from [`SystemParams`] that enter the drift and
/// diffusion matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedQuantities {
    /// Kittel-mode frequency `Γ₀ B₀`.
    pub omega_m: f64,
    pub g_m: f64,
    pub n_p: f64,
    pub g_m_eff: f64,
    /// Qubit–cavity coupling resolved to rad/s.
    pub g_q: f64,
    /// Cavity damping with feedback, `κ_c (1 − 2ε cos θ)`. Can be ≤ 0.
    pub k_fb: f64,
    /// Effective cavity detuning at the blue-sideband operating point,
    /// `Δ_fb = −Ω_m`.
    pub delta_fb: f64,
    /// Bare cavity detuning needed to hold that point,
    /// `Δ_c = Δ_fb + 2κ_c ε sin θ`.
    pub delta_c: f64,
    pub u: f64,
    pub n_c: f64,
    pub n_q: f64,
    pub n_m: f64,
}

impl DerivedQuantities {
    pub fn from_params(params: &SystemParams) -> Self {
        let omega_m = params.gyromagnetic_ratio * params.b0;
        let g_m = optomagnonic_coupling(params);
        let n_p = intracavity_photons(params);
        let g_m_eff = g_m * n_p.sqrt();
        let g_q = match params.g_q {
            QubitCoupling::Absolute(g) => g,
            QubitCoupling::RelativeToEffective(r) => r * g_m_eff,
        };
        let k_fb = params.kappa_c * (1.0 - 2.0 * params.epsilon * params.theta.cos());
        let delta_fb = -omega_m;
        let delta_c = delta_fb + 2.0 * params.kappa_c * params.epsilon * params.theta.sin();
        let t = params.temperature;
        Self {
            omega_m,
            g_m,
            n_p,
            g_m_eff,
            g_q,
            k_fb,
            delta_fb,
            delta_c,
            u: params.transmission(),
            n_c: thermal_occupation(params.omega_c, t),
            n_q: thermal_occupation(params.omega_q, t),
            n_m: thermal_occupation(omega_m, t),
        }
    }

    /// Whether feedback leaves the cavity net-damped.
    pub fn cavity_damped(&self) -> bool {
        self.k_fb > 0.0
    }
}

/// Cavity noise prefactor multiplying `κ_c (2N_c + 1)`.
pub fn cavity_noise_factor(params: &SystemParams) -> f64 {
    let (e, u2) = (params.epsilon, 1.0 - params.epsilon * params.epsilon);
    match params.diffusion_mode {
        DiffusionMode::Paper => u2 * (1.0 - e) * (1.0 - e),
        DiffusionMode::Consistent => u2 * (1.0 - 2.0 * e * params.theta.cos() + e * e),
    }
}

/// 6×6 drift matrix of the linearised quadrature equations in the
/// blue-sideband frame.
pub fn build_drift(params: &SystemParams) -> DMatrix<f64> {
    let d = DerivedQuantities::from_params(params);
    drift_from(&d, params.kappa_m, params.gamma_q)
}

fn drift_from(d: &DerivedQuantities, kappa_m: f64, gamma: f64) -> DMatrix<f64> {
    let (k, gq, gm) = (d.k_fb, d.g_q, d.g_m_eff);
    #[rustfmt::skip]
    let rows = [
        -k,   0.0,  0.0,    gq,     0.0,     -gm,
        0.0,  -k,   -gq,    0.0,    -gm,     0.0,
        0.0,  gq,   -gamma, 0.0,    0.0,     0.0,
        -gq,  0.0,  0.0,    -gamma, 0.0,     0.0,
        0.0,  -gm,  0.0,    0.0,    -kappa_m, 0.0,
        -gm,  0.0,  0.0,    0.0,    0.0,     -kappa_m,
    ];
    DMatrix::from_row_slice(6, 6, &rows)
}

/// 6×6 diagonal diffusion matrix.
pub fn build_diffusion(params: &SystemParams) -> DMatrix<f64> {
    let d = DerivedQuantities::from_params(params);
    diffusion_from(&d, params)
}

fn diffusion_from(d: &DerivedQuantities, params: &SystemParams) -> DMatrix<f64> {
    let cavity = params.kappa_c * cavity_noise_factor(params) * (2.0 * d.n_c + 1.0);
    let qubit = params.gamma_q * (2.0 * d.n_q + 1.0);
    let magnon = params.kappa_m * (2.0 * d.n_m + 1.0);
    DMatrix::from_diagonal(&DVector::from_vec(vec![
        cavity, cavity, qubit, qubit, magnon, magnon,
    ]))
}

/// Drift `Q` and diffusion `D` of one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftDiffusion {
    pub drift: DMatrix<f64>,
    pub diffusion: DMatrix<f64>,
    pub derived: DerivedQuantities,
}

impl DriftDiffusion {
    pub fn from_params(params: &SystemParams) -> Self {
        let derived = DerivedQuantities::from_params(params);
        Self {
            drift: drift_from(&derived, params.kappa_m, params.gamma_q),
            diffusion: diffusion_from(&derived, params),
            derived,
        }
    }
}

/// Accepts `q` iff every eigenvalue has real part below `−1e-9 ‖Q‖_F`.
pub fn assert_stable(q: &DMatrix<f64>) -> Result<()> {
    let abscissa = spectral_abscissa(q);
    if abscissa < -1e-9 * q.norm() {
        Ok(())
    } else {
        Err(Error::UnstableDrift {
            max_real_part: abscissa,
        })
    }
}
