//! Correlation quantifiers of Gaussian states: logarithmic negativity,
//! contangle, Gaussian steering and the monogamy residuals built on them.
//!
//! Steering uses `𝒢 = max[0, −Σ_{ν̄<½} ln(2ν̄)]` over the symplectic
//! eigenvalues `ν̄` of the Schur complement of the steering party. With the
//! vacuum variance at ½, the factor 2 makes the vacuum score exactly zero.

use std::fmt;

use serde::ser::{Serialize, SerializeMap, Serializer};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::gaussian::{
    check_physicality, extract_submatrix, partial_transpose, schur_complement_steered,
    symplectic_eigenvalues, Bipartition, CovarianceMatrix,
};

/// Values below this are reported as exactly zero.
pub const ZERO_CLAMP: f64 = 1e-12;
/// Threshold separating "steerable" from "not steerable" in the taxonomy.
pub const CLASS_TOL: f64 = 1e-9;
/// Relative slack on a negative two-mode discriminant before it is an error.
pub const DISCRIMINANT_TOL: f64 = 1e-10;

/// Mode pairs in report order.
pub const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn clamp(x: f64) -> f64 {
    if x < ZERO_CLAMP {
        0.0
    } else {
        x
    }
}

fn negativity_from_min(nu: f64) -> f64 {
    clamp(-(2.0 * nu).ln())
}

fn det2(m: &nalgebra::DMatrix<f64>, r: usize, c: usize) -> f64 {
    m[(r, c)] * m[(r + 1, c + 1)] - m[(r, c + 1)] * m[(r + 1, c)]
}

fn require_modes(v: &CovarianceMatrix, n: usize) -> Result<()> {
    if v.n_modes() != n {
        return Err(Error::InvalidModes(format!(
            "expected a {n}-mode covariance matrix, got {} modes",
            v.n_modes()
        )));
    }
    Ok(())
}

/// Smallest partially transposed symplectic eigenvalue of a two-mode state,
/// from `ϑ² = (σ − √(σ² − 4 det V)) / 2` with `σ = det X + det Y − 2 det Z`.
pub fn min_pt_eigenvalue_2mode(v4: &CovarianceMatrix) -> Result<f64> {
    require_modes(v4, 2)?;
    let m = v4.entries();
    let sigma = det2(m, 0, 0) + det2(m, 2, 2) - 2.0 * det2(m, 0, 2);
    let det = m.determinant();
    if !(det > 0.0) {
        return Err(Error::NonPositiveInput);
    }
    let disc = sigma * sigma - 4.0 * det;
    if disc < -DISCRIMINANT_TOL * sigma.abs().powi(2).max(1.0) {
        return Err(Error::NegativeDiscriminant(disc));
    }
    // (σ − √disc)/2 rewritten to avoid cancellation when σ² ≫ 4 det V
    let theta2 = 2.0 * det / (sigma + disc.max(0.0).sqrt());
    if !(theta2 > 0.0) {
        return Err(Error::NonPositiveInput);
    }
    Ok(theta2.sqrt())
}

/// `𝓛_N = max[0, −ln 2ϑ]` of a two-mode state, closed form.
pub fn log_negativity_2mode(v4: &CovarianceMatrix) -> Result<f64> {
    min_pt_eigenvalue_2mode(v4).map(negativity_from_min)
}

/// Same quantity from the full symplectic spectrum of the partial transpose.
pub fn log_negativity_2mode_spectral(v4: &CovarianceMatrix) -> Result<f64> {
    require_modes(v4, 2)?;
    let nu = symplectic_eigenvalues(&partial_transpose(v4, &[1])?)?;
    Ok(negativity_from_min(nu[0]))
}

/// Negativity of `pivot` against the other two modes of a three-mode state.
pub fn log_negativity_1v2(v6: &CovarianceMatrix, pivot: usize) -> Result<f64> {
    require_modes(v6, 3)?;
    let nu = symplectic_eigenvalues(&partial_transpose(v6, &[pivot])?)?;
    Ok(negativity_from_min(nu[0]))
}

/// Negativity between modes `i` and `j` of a larger state.
pub fn pair_log_negativity(v: &CovarianceMatrix, i: usize, j: usize) -> Result<f64> {
    log_negativity_2mode(&extract_submatrix(v, &[i, j])?)
}

/// Squared logarithmic negativity.
pub fn contangle(l: f64) -> f64 {
    l * l
}

fn others(pivot: usize) -> Result<(usize, usize)> {
    match pivot {
        0 => Ok((1, 2)),
        1 => Ok((0, 2)),
        2 => Ok((0, 1)),
        _ => Err(Error::InvalidModes(format!("pivot {pivot} out of range for 3 modes"))),
    }
}

/// `C_{i|jk} − C_{i|j} − C_{i|k}`.
pub fn residual_contangle(v6: &CovarianceMatrix, pivot: usize) -> Result<f64> {
    let (j, k) = others(pivot)?;
    let whole = contangle(log_negativity_1v2(v6, pivot)?);
    let a = contangle(pair_log_negativity(v6, pivot, j)?);
    let b = contangle(pair_log_negativity(v6, pivot, k)?);
    Ok(whole - a - b)
}

/// Minimum residual contangle over the three pivots.
pub fn min_residual_contangle(v6: &CovarianceMatrix) -> Result<f64> {
    let mut min = f64::INFINITY;
    for pivot in 0..3 {
        min = min.min(residual_contangle(v6, pivot)?);
    }
    Ok(min)
}

/// Gaussian steerability of `split.party_b()` by `split.party_a()`.
pub fn gaussian_steering(v: &CovarianceMatrix, split: &Bipartition) -> Result<f64> {
    let schur = schur_complement_steered(v, split)?;
    let nu = symplectic_eigenvalues(&schur)?;
    let sum: f64 = nu
        .iter()
        .filter(|&&n| n < 0.5)
        .map(|&n| (2.0 * n).ln())
        .sum();
    Ok(clamp(-sum))
}

fn one_to_one(v: &CovarianceMatrix, from: usize, to: usize) -> Result<f64> {
    gaussian_steering(v, &Bipartition::new(vec![from], vec![to])?)
}

/// `|𝒢^{A→B} − 𝒢^{B→A}|` for single modes `a` and `b`.
pub fn steering_asymmetry(v: &CovarianceMatrix, a: usize, b: usize) -> Result<f64> {
    let ab = one_to_one(v, a, b)?;
    let ba = one_to_one(v, b, a)?;
    Ok(clamp((ab - ba).abs()))
}

/// Steering taxonomy of an ordered pair `(A, B)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteeringClass {
    NoWay,
    /// Only `A → B`.
    OneWayAb,
    /// Only `B → A`.
    OneWayBa,
    TwoWaySymmetric,
    TwoWayAsymmetric,
}

impl SteeringClass {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::NoWay => "no_way",
            Self::OneWayAb => "one_way_ab",
            Self::OneWayBa => "one_way_ba",
            Self::TwoWaySymmetric => "two_way_symmetric",
            Self::TwoWayAsymmetric => "two_way_asymmetric",
        }
    }
}

impl fmt::Display for SteeringClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies the directed measures `ga = 𝒢^{A→B}` and `gb = 𝒢^{B→A}`.
pub fn classify_steering(ga: f64, gb: f64) -> SteeringClass {
    match (ga > CLASS_TOL, gb > CLASS_TOL) {
        (false, false) => SteeringClass::NoWay,
        (true, false) => SteeringClass::OneWayAb,
        (false, true) => SteeringClass::OneWayBa,
        (true, true) if (ga - gb).abs() <= CLASS_TOL => SteeringClass::TwoWaySymmetric,
        (true, true) => SteeringClass::TwoWayAsymmetric,
    }
}

/// Signed CKW-type residuals for `pivot` in a three-mode state:
/// `(𝒢^{k→ij} − 𝒢^{k→i} − 𝒢^{k→j}, 𝒢^{ij→k} − 𝒢^{i→k} − 𝒢^{j→k})`.
pub fn steering_monogamy_residuals(v6: &CovarianceMatrix, pivot: usize) -> Result<(f64, f64)> {
    require_modes(v6, 3)?;
    let (i, j) = others(pivot)?;
    let out = gaussian_steering(v6, &Bipartition::new(vec![pivot], vec![i, j])?)?
        - one_to_one(v6, pivot, i)?
        - one_to_one(v6, pivot, j)?;
    let inward = gaussian_steering(v6, &Bipartition::new(vec![i, j], vec![pivot])?)?
        - one_to_one(v6, i, pivot)?
        - one_to_one(v6, j, pivot)?;
    Ok((out, inward))
}

/// A single report entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureValue {
    Number(f64),
    Class(SteeringClass),
    Flag(bool),
}

impl MeasureValue {
    pub fn as_f64(self) -> Option<f64> {
        match self {
            Self::Number(x) => Some(x),
            _ => None,
        }
    }
}

impl fmt::Display for MeasureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Number(x) => write!(f, "{x:.11e}"),
            Self::Class(c) => write!(f, "{c}"),
            Self::Flag(b) => write!(f, "{b}"),
        }
    }
}

impl Serialize for MeasureValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Number(x) if x.is_finite() => s.serialize_f64(*x),
            Self::Number(_) => s.serialize_none(),
            Self::Class(c) => c.serialize(s),
            Self::Flag(b) => s.serialize_bool(*b),
        }
    }
}

/// Every correlation measure of a three-mode state.
///
/// Arrays indexed by mode follow the mode order of the input matrix; pair
/// arrays follow [`PAIRS`].
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub labels: [String; 3],
    pub ln_pair: [f64; 3],
    /// `𝓛_{k|ij}` by pivot `k`.
    pub ln_one_two: [f64; 3],
    /// `steering_one_one[a][b] = 𝒢^{a→b}`; the diagonal is zero.
    pub steering_one_one: [[f64; 3]; 3],
    /// `𝒢^{k→ij}` by pivot.
    pub steering_one_two: [f64; 3],
    /// `𝒢^{ij→k}` by pivot.
    pub steering_two_one: [f64; 3],
    pub asymmetry: [f64; 3],
    pub classes: [SteeringClass; 3],
    pub contangle_residuals: [f64; 3],
    pub r_min: f64,
    pub monogamy_out: [f64; 3],
    pub monogamy_in: [f64; 3],
    /// Filled in when the state came from a Lyapunov solve.
    pub lyapunov_residual: Option<f64>,
    pub min_symplectic: f64,
    pub physical: bool,
}

impl CorrelationReport {
    pub fn from_covariance(v: &CovarianceMatrix) -> Result<Self> {
        require_modes(v, 3)?;
        let labels = [0, 1, 2].map(|k| v.labels()[k].clone());

        let mut ln_pair = [0.0; 3];
        let mut asymmetry = [0.0; 3];
        let mut classes = [SteeringClass::NoWay; 3];
        let mut steering_one_one = [[0.0; 3]; 3];
        for (p, &(a, b)) in PAIRS.iter().enumerate() {
            ln_pair[p] = pair_log_negativity(v, a, b)?;
            let ab = one_to_one(v, a, b)?;
            let ba = one_to_one(v, b, a)?;
            steering_one_one[a][b] = ab;
            steering_one_one[b][a] = ba;
            asymmetry[p] = clamp((ab - ba).abs());
            classes[p] = classify_steering(ab, ba);
        }

        let mut ln_one_two = [0.0; 3];
        let mut steering_one_two = [0.0; 3];
        let mut steering_two_one = [0.0; 3];
        let mut contangle_residuals = [0.0; 3];
        let mut monogamy_out = [0.0; 3];
        let mut monogamy_in = [0.0; 3];
        for k in 0..3 {
            let (i, j) = others(k)?;
            ln_one_two[k] = log_negativity_1v2(v, k)?;
            steering_one_two[k] = gaussian_steering(v, &Bipartition::new(vec![k], vec![i, j])?)?;
            steering_two_one[k] = gaussian_steering(v, &Bipartition::new(vec![i, j], vec![k])?)?;
            contangle_residuals[k] = contangle(ln_one_two[k])
                - contangle(ln_pair[pair_index(k, i)])
                - contangle(ln_pair[pair_index(k, j)]);
            monogamy_out[k] =
                steering_one_two[k] - steering_one_one[k][i] - steering_one_one[k][j];
            monogamy_in[k] =
                steering_two_one[k] - steering_one_one[i][k] - steering_one_one[j][k];
        }
        let r_min = contangle_residuals.iter().copied().fold(f64::INFINITY, f64::min);
        let phys = check_physicality(v);

        Ok(Self {
            labels,
            ln_pair,
            ln_one_two,
            steering_one_one,
            steering_one_two,
            steering_two_one,
            asymmetry,
            classes,
            contangle_residuals,
            r_min,
            monogamy_out,
            monogamy_in,
            lyapunov_residual: None,
            min_symplectic: phys.min_symplectic_eigenvalue,
            physical: phys.physical,
        })
    }

    /// `𝓛_N` between modes `a` and `b`, in either order.
    pub fn ln(&self, a: usize, b: usize) -> f64 {
        self.ln_pair[pair_index(a, b)]
    }

    /// `𝒢^{from→to}` between single modes.
    pub fn steering(&self, from: usize, to: usize) -> f64 {
        self.steering_one_one[from][to]
    }

    /// Flat `(key, value)` list in a fixed order.
    pub fn entries(&self) -> Vec<(String, MeasureValue)> {
        use MeasureValue::{Class, Flag, Number};
        let l = &self.labels;
        let pair = |p: usize| {
            let (a, b) = PAIRS[p];
            format!("{}{}", l[a], l[b])
        };
        let rest = |k: usize| {
            let (i, j) = others(k).expect("pivot below 3");
            format!("{}{}", l[i], l[j])
        };
        let mut out = Vec::with_capacity(48);
        for p in 0..3 {
            out.push((format!("LN_{}", pair(p)), Number(self.ln_pair[p])));
        }
        for k in 0..3 {
            out.push((format!("LN_{}_{}", l[k], rest(k)), Number(self.ln_one_two[k])));
        }
        for &(a, b) in &PAIRS {
            out.push((format!("G_{}_to_{}", l[a], l[b]), Number(self.steering_one_one[a][b])));
            out.push((format!("G_{}_to_{}", l[b], l[a]), Number(self.steering_one_one[b][a])));
        }
        for k in 0..3 {
            out.push((format!("G_{}_to_{}", l[k], rest(k)), Number(self.steering_one_two[k])));
        }
        for k in 0..3 {
            out.push((format!("G_{}_to_{}", rest(k), l[k]), Number(self.steering_two_one[k])));
        }
        for p in 0..3 {
            out.push((format!("GA_{}", pair(p)), Number(self.asymmetry[p])));
        }
        for p in 0..3 {
            out.push((format!("class_{}", pair(p)), Class(self.classes[p])));
        }
        for k in 0..3 {
            out.push((format!("R_{}", l[k]), Number(self.contangle_residuals[k])));
        }
        out.push(("R_min".into(), Number(self.r_min)));
        for k in 0..3 {
            out.push((format!("mono_out_{}", l[k]), Number(self.monogamy_out[k])));
        }
        for k in 0..3 {
            out.push((format!("mono_in_{}", l[k]), Number(self.monogamy_in[k])));
        }
        out.push((
            "lyapunov_residual".into(),
            Number(self.lyapunov_residual.unwrap_or(f64::NAN)),
        ));
        out.push(("min_symplectic".into(), Number(self.min_symplectic)));
        out.push(("physical".into(), Flag(self.physical)));
        out
    }

    /// Looks up one entry by its JSON key.
    pub fn get(&self, key: &str) -> Result<MeasureValue> {
        self.entries()
            .into_iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::UnknownMeasure(key.to_string()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report entries are always serializable")
    }
}

impl Serialize for CorrelationReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self.entries();
        let mut map = s.serialize_map(Some(entries.len()))?;
        for (k, v) in &entries {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

fn pair_index(a: usize, b: usize) -> usize {
    match (a.min(b), a.max(b)) {
        (0, 1) => 0,
        (0, 2) => 1,
        (1, 2) => 2,
        other => panic!("no pair {other:?} among three modes"),
    }
}

/// Report keys for modes labelled `c`, `q`, `m`, in report order.
pub fn report_keys() -> Vec<String> {
    let labels = crate::model::MODE_LABELS.map(String::from).to_vec();
    let v = CovarianceMatrix::with_labels(
        nalgebra::DMatrix::identity(6, 6) * 0.5,
        labels,
    )
    .expect("vacuum is a valid covariance matrix");
    CorrelationReport::from_covariance(&v)
        .expect("vacuum report")
        .entries()
        .into_iter()
        .map(|(k, _)| k)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_physical_cm;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tmsv_plus_vacuum(r: f64) -> CovarianceMatrix {
        CovarianceMatrix::two_mode_squeezed_vacuum(r).direct_sum(&CovarianceMatrix::vacuum(1))
    }

    #[test]
    fn vacuum_has_no_correlations() {
        assert_eq!(log_negativity_2mode(&CovarianceMatrix::vacuum(2)).unwrap(), 0.0);
        let v = CovarianceMatrix::vacuum(3);
        for k in 0..3 {
            assert_eq!(log_negativity_1v2(&v, k).unwrap(), 0.0);
            assert_eq!(steering_monogamy_residuals(&v, k).unwrap(), (0.0, 0.0));
        }
        assert_eq!(min_residual_contangle(&v).unwrap(), 0.0);
    }

    #[test]
    fn tmsv_negativity_both_paths() {
        for r in [0.1, 0.5, 1.0] {
            let v = CovarianceMatrix::two_mode_squeezed_vacuum(r);
            assert_relative_eq!(log_negativity_2mode(&v).unwrap(), 2.0 * r, epsilon = 1e-12);
            assert_relative_eq!(log_negativity_2mode_spectral(&v).unwrap(), 2.0 * r, epsilon = 1e-12);
        }
    }

    #[test]
    fn spectator_mode() {
        let v = tmsv_plus_vacuum(0.5);
        assert_relative_eq!(log_negativity_1v2(&v, 0).unwrap(), 1.0, epsilon = 1e-12);
        for k in 0..3 {
            assert!(residual_contangle(&v, k).unwrap().abs() < 1e-12);
        }
        assert_relative_eq!(contangle(1.0), 1.0);
        assert_relative_eq!(
            contangle(log_negativity_1v2(&v, 1).unwrap()),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn tmsv_steering() {
        let v = CovarianceMatrix::two_mode_squeezed_vacuum(0.5);
        let ab = Bipartition::new(vec![0], vec![1]).unwrap();
        let g = gaussian_steering(&v, &ab).unwrap();
        assert_relative_eq!(g, 1.0f64.cosh().ln(), epsilon = 1e-12);
        assert_relative_eq!(g, 0.433_780_830, epsilon = 1e-9);
        assert_relative_eq!(g, gaussian_steering(&v, &ab.reversed()).unwrap(), epsilon = 1e-12);
        assert_eq!(steering_asymmetry(&v, 0, 1).unwrap(), 0.0);
        assert_eq!(
            gaussian_steering(&CovarianceMatrix::thermal(2, 0.3), &ab).unwrap(),
            0.0
        );
    }

    #[test]
    fn taxonomy() {
        assert_eq!(classify_steering(0.0, 0.0), SteeringClass::NoWay);
        assert_eq!(classify_steering(0.3, 0.0), SteeringClass::OneWayAb);
        assert_eq!(classify_steering(0.0, 0.3), SteeringClass::OneWayBa);
        assert_eq!(classify_steering(0.2, 0.2), SteeringClass::TwoWaySymmetric);
        assert_eq!(classify_steering(0.2, 0.4), SteeringClass::TwoWayAsymmetric);
        assert_eq!(classify_steering(5e-10, 0.0), SteeringClass::NoWay);
    }

    #[test]
    fn unphysical_inputs() {
        // positive definite but below the uncertainty bound: both paths still agree
        let mut m = nalgebra::DMatrix::identity(4, 4) * 0.3;
        m[(0, 2)] = 0.1;
        m[(2, 0)] = 0.1;
        let v = CovarianceMatrix::new(m).unwrap();
        assert_relative_eq!(
            log_negativity_2mode(&v).unwrap(),
            log_negativity_2mode_spectral(&v).unwrap(),
            epsilon = 1e-12
        );
        let mut m = nalgebra::DMatrix::identity(4, 4);
        m[(3, 3)] = -1.0;
        let v = CovarianceMatrix::new(m).unwrap();
        assert!(log_negativity_2mode(&v).is_err());
        assert!(log_negativity_2mode_spectral(&v).is_err());
    }

    #[test]
    fn wrong_sizes() {
        let v = CovarianceMatrix::vacuum(3);
        assert!(matches!(log_negativity_2mode(&v), Err(Error::InvalidModes(_))));
        assert!(matches!(log_negativity_1v2(&v, 3), Err(Error::InvalidModes(_))));
        assert!(matches!(
            CorrelationReport::from_covariance(&CovarianceMatrix::vacuum(2)),
            Err(Error::InvalidModes(_))
        ));
    }

    #[test]
    fn report_keys_and_lookup() {
        let keys = report_keys();
        for k in ["LN_cq", "LN_cm", "LN_qm", "LN_c_qm", "G_c_to_qm", "G_qm_to_c", "G_m_to_q", "GA_qm", "R_min", "mono_out_c", "mono_in_m", "class_cm", "physical"] {
            assert!(keys.iter().any(|x| x == k), "missing {k}");
        }
        let mut sorted = keys.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), keys.len());

        let labels = vec!["c".to_string(), "q".to_string(), "m".to_string()];
        let v = CovarianceMatrix::with_labels(tmsv_plus_vacuum(0.5).into_inner(), labels).unwrap();
        let rep = CorrelationReport::from_covariance(&v).unwrap();
        assert_relative_eq!(rep.get("LN_cq").unwrap().as_f64().unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(rep.get("class_cq").unwrap(), MeasureValue::Class(SteeringClass::TwoWaySymmetric));
        assert_eq!(rep.get("LN_qm").unwrap(), MeasureValue::Number(0.0));
        assert!(matches!(rep.get("LN_xx"), Err(Error::UnknownMeasure(_))));
        let json = rep.to_json();
        assert_eq!(json["class_cm"], "no_way");
        assert_eq!(json["physical"], true);
        assert!(json["lyapunov_residual"].is_null());
    }

    #[test]
    fn random_states_respect_steering_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let v = random_physical_cm(&mut rng, 3, 0.6, 1.0);
            let rep = CorrelationReport::from_covariance(&v).unwrap();
            for (p, &(a, b)) in PAIRS.iter().enumerate() {
                if rep.steering(a, b) > CLASS_TOL || rep.steering(b, a) > CLASS_TOL {
                    assert!(rep.ln_pair[p] > 0.0);
                }
                assert!(rep.asymmetry[p] <= std::f64::consts::LN_2 + 1e-9);
            }
            for k in 0..3 {
                assert!(rep.monogamy_out[k] >= -1e-10);
                assert!(rep.monogamy_in[k] >= -1e-10);
            }
        }
    }
}
