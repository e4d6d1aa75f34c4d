//! Random symplectic transformations and random physical covariance
//! matrices, used for property checks.

use nalgebra::DMatrix;
use rand::Rng;

use crate::gaussian::CovarianceMatrix;

/// Single-mode squeezer `diag(e^{-r}, e^{r})` acting on `mode`.
pub fn squeezer(n_modes: usize, mode: usize, r: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    s[(2 * mode, 2 * mode)] = (-r).exp();
    s[(2 * mode + 1, 2 * mode + 1)] = r.exp();
    s
}

/// Phase rotation by `phi` on `mode`.
pub fn rotation(n_modes: usize, mode: usize, phi: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    let (sn, cs) = phi.sin_cos();
    let k = 2 * mode;
    s[(k, k)] = cs;
    s[(k, k + 1)] = sn;
    s[(k + 1, k)] = -sn;
    s[(k + 1, k + 1)] = cs;
    s
}

/// Beam splitter with mixing angle `t` between modes `i` and `j`.
pub fn beam_splitter(n_modes: usize, i: usize, j: usize, t: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    let (sn, cs) = t.sin_cos();
    for q in 0..2 {
        let (a, b) = (2 * i + q, 2 * j + q);
        s[(a, a)] = cs;
        s[(b, b)] = cs;
        s[(a, b)] = sn;
        s[(b, a)] = -sn;
    }
    s
}

/// Two-mode squeezer with parameter `r` between modes `i` and `j`.
pub fn two_mode_squeezer(n_modes: usize, i: usize, j: usize, r: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    let (ch, sh) = (r.cosh(), r.sinh());
    for q in 0..2 {
        let sign = if q == 0 { 1.0 } else { -1.0 };
        let (a, b) = (2 * i + q, 2 * j + q);
        s[(a, a)] = ch;
        s[(b, b)] = ch;
        s[(a, b)] = sign * sh;
        s[(b, a)] = sign * sh;
    }
    s
}

/// Product of random local and two-mode Gaussian unitaries, with
/// squeezing magnitudes bounded by `max_squeezing`.
pub fn random_symplectic<R: Rng + ?Sized>(
    rng: &mut R,
    n_modes: usize,
    max_squeezing: f64,
) -> DMatrix<f64> {
    let tau = std::f64::consts::TAU;
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for _ in 0..2 {
        for m in 0..n_modes {
            s = rotation(n_modes, m, rng.gen_range(0.0..tau)) * s;
            s = squeezer(n_modes, m, rng.gen_range(-max_squeezing..=max_squeezing)) * s;
        }
        for i in 0..n_modes {
            for j in i + 1..n_modes {
                s = beam_splitter(n_modes, i, j, rng.gen_range(0.0..tau)) * s;
                s = two_mode_squeezer(n_modes, i, j, rng.gen_range(-max_squeezing..=max_squeezing)) * s;
            }
        }
    }
    s
}

/// Random physical state `S (⊕ νₖ I₂) Sᵀ` with `νₖ ∈ [½, ½ + max_excess]`.
pub fn random_physical_cm<R: Rng + ?Sized>(
    rng: &mut R,
    n_modes: usize,
    max_squeezing: f64,
    max_excess: f64,
) -> CovarianceMatrix {
    let mut diag = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for m in 0..n_modes {
        let nu = 0.5 + rng.gen_range(0.0..=max_excess);
        diag[(2 * m, 2 * m)] = nu;
        diag[(2 * m + 1, 2 * m + 1)] = nu;
    }
    let s = random_symplectic(rng, n_modes, max_squeezing);
    let v = &s * diag * s.transpose();
    CovarianceMatrix::new((&v + v.transpose()) * 0.5).expect("congruence of a diagonal matrix is symmetric")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{check_physicality, SymplecticForm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_symplectic() {
        let form = SymplecticForm::new(3);
        for s in [
            squeezer(3, 1, 0.7),
            rotation(3, 2, 1.1),
            beam_splitter(3, 0, 2, 0.4),
            two_mode_squeezer(3, 0, 1, -0.6),
        ] {
            assert!(form.preserved_by(&s, 1e-14));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(form.preserved_by(&random_symplectic(&mut rng, 3, 0.5), 1e-10));
    }

    #[test]
    fn random_states_are_physical() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let v = random_physical_cm(&mut rng, 2, 0.8, 2.0);
            assert!(check_physicality(&v).physical);
        }
    }
}
