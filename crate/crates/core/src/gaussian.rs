//! Covariance-matrix toolkit for Gaussian states.
//!
//! Quadratures are ordered `(X_1, Y_1, X_2, Y_2, ...)` with
//! `X = (a + a†)/√2`, so the vacuum has covariance `½·I` and every physical
//! state has symplectic eigenvalues `≥ ½`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative symmetry tolerance accepted when building a covariance matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Slack below ½ still counted as physical.
pub const PHYSICALITY_TOL: f64 = 1e-10;
/// Maximum relative mismatch between the two members of a ± eigenvalue pair.
pub const PAIRING_TOL: f64 = 1e-9;
/// Condition number above which a steering block is treated as singular.
pub const MAX_BLOCK_CONDITION: f64 = 1e12;

/// Real symmetric `2n × 2n` covariance matrix of an `n`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    entries: DMatrix<f64>,
    labels: Vec<String>,
}

impl CovarianceMatrix {
    /// Wraps a matrix, labelling modes `0, 1, ...`.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let labels = (0..entries.nrows() / 2).map(|i| i.to_string()).collect();
        Self::with_labels(entries, labels)
    }

    pub fn with_labels(entries: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return Err(Error::InvalidMatrix(format!(
                "covariance matrix must be square with even nonzero size, got {r}×{c}"
            )));
        }
        if labels.len() != r / 2 {
            return Err(Error::InvalidMatrix(format!(
                "{} labels for {} modes",
                labels.len(),
                r / 2
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        let asym = (&entries - entries.transpose()).norm();
        if asym > SYMMETRY_TOL * entries.norm() {
            return Err(Error::InvalidMatrix(format!(
                "matrix is not symmetric (‖V − Vᵀ‖_F = {asym:e})"
            )));
        }
        let entries = (&entries + entries.transpose()) * 0.5;
        Ok(Self { entries, labels })
    }

    /// Builds an `n`-mode matrix from row-major data.
    pub fn from_row_slice(n_modes: usize, data: &[f64]) -> Result<Self> {
        let dim = 2 * n_modes;
        if data.len() != dim * dim {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for {n_modes} modes, got {}",
                dim * dim,
                data.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, data))
    }

    /// Product vacuum, `½·I`.
    pub fn vacuum(n_modes: usize) -> Self {
        Self::thermal(n_modes, 0.0)
    }

    /// Product thermal state with the same mean occupation in every mode.
    pub fn thermal(n_modes: usize, occupation: f64) -> Self {
        let dim = 2 * n_modes;
        let entries = DMatrix::identity(dim, dim) * (occupation + 0.5);
        Self::new(entries).expect("diagonal matrix is a valid covariance matrix")
    }

    /// Two-mode squeezed vacuum with squeezing parameter `r`.
    pub fn two_mode_squeezed_vacuum(r: f64) -> Self {
        let a = (2.0 * r).cosh() / 2.0;
        let s = (2.0 * r).sinh() / 2.0;
        #[rustfmt::skip]
        let data = [
            a, 0.0, s, 0.0,
            0.0, a, 0.0, -s,
            s, 0.0, a, 0.0,
            0.0, -s, 0.0, a,
        ];
        Self::from_row_slice(2, &data).expect("TMSV is symmetric")
    }

    /// Block-diagonal combination `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (n, m) = (self.dim(), other.dim());
        let mut entries = DMatrix::zeros(n + m, n + m);
        entries.view_mut((0, 0), (n, n)).copy_from(&self.entries);
        entries.view_mut((n, n), (m, m)).copy_from(&other.entries);
        let mut labels: Vec<String> = self.labels.iter().chain(&other.labels).cloned().collect();
        let distinct: std::collections::HashSet<&String> = labels.iter().collect();
        if distinct.len() != labels.len() {
            labels = (0..labels.len()).map(|i| i.to_string()).collect();
        }
        Self { entries, labels }
    }

    pub fn n_modes(&self) -> usize {
        self.entries.nrows() / 2
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.entries
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        self.entries.transpose().iter().copied().collect()
    }

    /// Reorders modes so that new mode `k` is old mode `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n_modes() {
            return Err(Error::InvalidModes(format!(
                "permutation of length {} for {} modes",
                order.len(),
                self.n_modes()
            )));
        }
        extract_submatrix(self, order)
    }

    /// Applies a symplectic (or any) congruence `S V Sᵀ`.
    pub fn congruence(&self, s: &DMatrix<f64>) -> Result<Self> {
        if s.shape() != self.entries.shape() {
            return Err(Error::InvalidMatrix("congruence dimension mismatch".into()));
        }
        let v = s * &self.entries * s.transpose();
        let v = (&v + v.transpose()) * 0.5;
        Self::with_labels(v, self.labels.clone())
    }
}

/// The symplectic form `Ω = ⊕ [[0, 1], [-1, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticForm {
    pub n_modes: usize,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Self {
        Self { n_modes }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let dim = 2 * self.n_modes;
        let mut omega = DMatrix::zeros(dim, dim);
        for k in 0..self.n_modes {
            omega[(2 * k, 2 * k + 1)] = 1.0;
            omega[(2 * k + 1, 2 * k)] = -1.0;
        }
        omega
    }

    /// Whether `S Ω Sᵀ = Ω` to within `tol` (max-abs entry).
    pub fn preserved_by(&self, s: &DMatrix<f64>, tol: f64) -> bool {
        let omega = self.matrix();
        if s.shape() != omega.shape() {
            return false;
        }
        (s * &omega * s.transpose() - omega).amax() <= tol
    }
}

/// Ordered split of mode indices into a steering (first) and steered
/// (second) party.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bipartition {
    party_a: Vec<usize>,
    party_b: Vec<usize>,
}

impl Bipartition {
    pub fn new(party_a: Vec<usize>, party_b: Vec<usize>) -> Result<Self> {
        if party_a.is_empty() || party_b.is_empty() {
            return Err(Error::InvalidModes("both parties must be non-empty".into()));
        }
        let mut all: Vec<usize> = party_a.iter().chain(&party_b).copied().collect();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidModes(format!(
                "repeated mode in {party_a:?} | {party_b:?}"
            )));
        }
        Ok(Self { party_a, party_b })
    }

    pub fn party_a(&self) -> &[usize] {
        &self.party_a
    }

    pub fn party_b(&self) -> &[usize] {
        &self.party_b
    }

    /// Same split with the roles exchanged.
    pub fn reversed(&self) -> Self {
        Self {
            party_a: self.party_b.clone(),
            party_b: self.party_a.clone(),
        }
    }

    fn check_against(&self, n_modes: usize) -> Result<()> {
        check_modes(self.party_a.iter().chain(&self.party_b), n_modes)
    }
}

/// Min symplectic eigenvalue together with the physicality verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physicality {
    pub physical: bool,
    pub min_symplectic_eigenvalue: f64,
}

fn check_modes<'a>(modes: impl IntoIterator<Item = &'a usize>, n_modes: usize) -> Result<()> {
    let mut seen = vec![false; n_modes];
    for &m in modes {
        if m >= n_modes {
            return Err(Error::InvalidModes(format!(
                "mode {m} out of range for {n_modes} modes"
            )));
        }
        if std::mem::replace(&mut seen[m], true) {
            return Err(Error::InvalidModes(format!("mode {m} repeated")));
        }
    }
    Ok(())
}

fn quadrature_indices(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect()
}

fn select(v: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| v[(rows[i], cols[j])])
}

/// Symplectic eigenvalues in ascending order.
///
/// With `V = L Lᵀ`, the matrix `Lᵀ Ω L` is antisymmetric and similar to
/// `ΩV`, so its singular values are the moduli of the eigenvalues of `iΩV`,
/// each appearing twice. Works for any positive definite matrix, physical
/// or not.
pub fn symplectic_eigenvalues(v: &CovarianceMatrix) -> Result<Vec<f64>> {
    let l = v
        .entries
        .clone()
        .cholesky()
        .ok_or(Error::NonPositiveInput)?
        .unpack();
    let omega = SymplecticForm::new(v.n_modes()).matrix();
    let k = l.transpose() * omega * &l;
    let mut moduli: Vec<f64> = k.singular_values().iter().copied().collect();
    moduli.sort_by(f64::total_cmp);
    moduli
        .chunks_exact(2)
        .map(|pair| {
            let (a, b) = (pair[0], pair[1]);
            if (a - b).abs() > PAIRING_TOL * b.max(1.0) {
                Err(Error::UnpairedSpectrum(a, b))
            } else {
                Ok(0.5 * (a + b))
            }
        })
        .collect()
}

/// Flips the sign of the momentum quadrature of every mode in `party`.
///
/// The result is `P V P` with `P` diagonal; it may describe an unphysical
/// state, which is the point of the PPT test.
pub fn partial_transpose(v: &CovarianceMatrix, party: &[usize]) -> Result<CovarianceMatrix> {
    check_modes(party, v.n_modes())?;
    let mut out = v.entries.clone();
    for &m in party {
        let y = 2 * m + 1;
        for k in 0..out.ncols() {
            if k != y {
                out[(y, k)] = -out[(y, k)];
                out[(k, y)] = -out[(k, y)];
            }
        }
    }
    Ok(CovarianceMatrix {
        entries: out,
        labels: v.labels.clone(),
    })
}

/// Covariance matrix of the listed modes, in the listed order.
pub fn extract_submatrix(v: &CovarianceMatrix, modes: &[usize]) -> Result<CovarianceMatrix> {
    if modes.is_empty() {
        return Err(Error::InvalidModes("empty mode selection".into()));
    }
    check_modes(modes, v.n_modes())?;
    let idx = quadrature_indices(modes);
    Ok(CovarianceMatrix {
        entries: select(&v.entries, &idx, &idx),
        labels: modes.iter().map(|&m| v.labels[m].clone()).collect(),
    })
}

/// Schur complement `Y − Zᵀ X⁻¹ Z` of the steering party's block `X`:
/// the conditional covariance of party B after Gaussian measurements on A.
pub fn schur_complement_steered(
    v: &CovarianceMatrix,
    split: &Bipartition,
) -> Result<CovarianceMatrix> {
    split.check_against(v.n_modes())?;
    let ia = quadrature_indices(split.party_a());
    let ib = quadrature_indices(split.party_b());
    let x = select(&v.entries, &ia, &ia);
    let y = select(&v.entries, &ib, &ib);
    let z = select(&v.entries, &ia, &ib);

    let sv = x.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_BLOCK_CONDITION {
        return Err(Error::SingularBlock { condition });
    }
    let x_inv_z = x
        .lu()
        .solve(&z)
        .ok_or(Error::SingularBlock { condition })?;
    let schur = y - z.transpose() * x_inv_z;
    let schur = (&schur + schur.transpose()) * 0.5;
    Ok(CovarianceMatrix {
        entries: schur,
        labels: split.party_b().iter().map(|&m| v.labels[m].clone()).collect(),
    })
}

/// Physical iff the smallest symplectic eigenvalue is at least `½ − 1e-10`.
///
/// Matrices that are not positive definite are reported as unphysical with
/// `min_symplectic_eigenvalue = NaN`.
pub fn check_physicality(v: &CovarianceMatrix) -> Physicality {
    match symplectic_eigenvalues(v) {
        Ok(nu) => {
            let min = nu[0];
            Physicality {
                physical: min >= 0.5 - PHYSICALITY_TOL,
                min_symplectic_eigenvalue: min,
            }
        }
        Err(_) => Physicality {
            physical: false,
            min_symplectic_eigenvalue: f64::NAN,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn vacuum_and_thermal_spectra() {
        let nu = symplectic_eigenvalues(&CovarianceMatrix::vacuum(3)).unwrap();
        assert_eq!(nu.len(), 3);
        for x in nu {
            assert_relative_eq!(x, 0.5, epsilon = 1e-15);
        }
        let nu = symplectic_eigenvalues(&CovarianceMatrix::thermal(1, 2.0)).unwrap();
        assert_relative_eq!(nu[0], 2.5, epsilon = 1e-14);
    }

    #[test]
    fn tmsv_spectrum_is_pure() {
        let v = CovarianceMatrix::two_mode_squeezed_vacuum(0.5);
        let nu = symplectic_eigenvalues(&v).unwrap();
        assert_eq!(nu.len(), 2);
        for x in nu {
            assert_relative_eq!(x, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn tmsv_partial_transpose_spectrum() {
        let r: f64 = 0.5;
        let pt = partial_transpose(&CovarianceMatrix::two_mode_squeezed_vacuum(r), &[0]).unwrap();
        let nu = symplectic_eigenvalues(&pt).unwrap();
        assert_relative_eq!(nu[0], (-2.0 * r).exp() / 2.0, epsilon = 1e-12);
        assert_relative_eq!(nu[0], 0.18393972058572117, epsilon = 1e-12);
        assert_relative_eq!(nu[1], (2.0 * r).exp() / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn partial_transpose_is_exact_involution() {
        let v = CovarianceMatrix::two_mode_squeezed_vacuum(0.3)
            .direct_sum(&CovarianceMatrix::thermal(1, 0.7));
        for party in [vec![0], vec![1, 2], vec![2]] {
            let twice = partial_transpose(&partial_transpose(&v, &party).unwrap(), &party).unwrap();
            assert_eq!(twice, v);
        }
        let vac = CovarianceMatrix::vacuum(2);
        assert_eq!(partial_transpose(&vac, &[1]).unwrap(), vac);
    }

    #[test]
    fn partial_transpose_rejects_bad_modes() {
        let v = CovarianceMatrix::vacuum(2);
        assert!(matches!(partial_transpose(&v, &[2]), Err(Error::InvalidModes(_))));
        assert!(matches!(partial_transpose(&v, &[0, 0]), Err(Error::InvalidModes(_))));
    }

    #[test]
    fn schur_complement_cases() {
        let vac = CovarianceMatrix::vacuum(2);
        let split = Bipartition::new(vec![0], vec![1]).unwrap();
        assert_eq!(schur_complement_steered(&vac, &split).unwrap().entries(), &(DMatrix::identity(2, 2) * 0.5));

        let r: f64 = 0.5;
        let s = schur_complement_steered(&CovarianceMatrix::two_mode_squeezed_vacuum(r), &split).unwrap();
        // brute block arithmetic: a − s²/a with a = cosh(2r)/2, s = sinh(2r)/2
        let (a, b) = ((2.0 * r).cosh() / 2.0, (2.0 * r).sinh() / 2.0);
        let expected = a - b * b / a;
        assert_relative_eq!(expected, 1.0 / (2.0 * (2.0 * r).cosh()), epsilon = 1e-15);
        assert_relative_eq!(s.entries()[(0, 0)], 0.324_027_137, epsilon = 1e-9);
        assert_relative_eq!(s.entries()[(1, 1)], expected, epsilon = 1e-14);
        assert!(s.entries()[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn schur_complement_singular_block() {
        let mut m = DMatrix::identity(4, 4) * 0.5;
        m[(0, 0)] = 1e-14;
        let v = CovarianceMatrix::new(m).unwrap();
        let split = Bipartition::new(vec![0], vec![1]).unwrap();
        assert!(matches!(
            schur_complement_steered(&v, &split),
            Err(Error::SingularBlock { .. })
        ));
    }

    #[test]
    fn extract_submatrix_cases() {
        let v = CovarianceMatrix::two_mode_squeezed_vacuum(0.4)
            .direct_sum(&CovarianceMatrix::thermal(1, 1.0));
        assert_eq!(extract_submatrix(&v, &[0, 1, 2]).unwrap(), v);
        let c = extract_submatrix(&CovarianceMatrix::vacuum(3), &[0]).unwrap();
        assert_eq!(c.entries(), &(DMatrix::identity(2, 2) * 0.5));
        let swapped = extract_submatrix(&v, &[2, 0]).unwrap();
        assert_eq!(swapped.entries()[(0, 0)], 1.5);
        assert_eq!(swapped.labels(), &["2".to_string(), "0".to_string()]);
    }

    #[test]
    fn physicality_gate() {
        let p = check_physicality(&CovarianceMatrix::vacuum(1));
        assert!(p.physical);
        assert_relative_eq!(p.min_symplectic_eigenvalue, 0.5, epsilon = 1e-15);
        let sub = CovarianceMatrix::new(DMatrix::identity(2, 2) * 0.4).unwrap();
        let p = check_physicality(&sub);
        assert!(!p.physical);
        assert_relative_eq!(p.min_symplectic_eigenvalue, 0.4, epsilon = 1e-15);
    }

    #[test]
    fn rejects_asymmetric_and_indefinite() {
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = 0.1;
        assert!(CovarianceMatrix::new(m).is_err());
        let mut m = DMatrix::identity(2, 2);
        m[(1, 1)] = -1.0;
        let v = CovarianceMatrix::new(m).unwrap();
        assert_eq!(symplectic_eigenvalues(&v), Err(Error::NonPositiveInput));
    }

    #[test]
    fn symplectic_form_invariants() {
        let omega = SymplecticForm::new(3).matrix();
        assert_eq!(&omega * &omega, -DMatrix::<f64>::identity(6, 6));
        assert_eq!(omega.transpose(), -omega);
    }

    #[test]
    fn bipartition_validation() {
        assert!(Bipartition::new(vec![], vec![1]).is_err());
        assert!(Bipartition::new(vec![0, 1], vec![1]).is_err());
        let b = Bipartition::new(vec![0], vec![1, 2]).unwrap();
        assert_eq!(b.reversed().party_a(), &[1, 2]);
    }
}
