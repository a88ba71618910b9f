use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fockspace::C64;
use crate::liouvillian::DensityOperator;

/// `1 − Tr ρ²`, clamped at zero when round-off pushes it below by at most 1e-9.
pub fn impurity(rho: &DensityOperator) -> f64 {
    let eps = 1.0 - rho.purity();
    if eps < 0.0 && eps >= -1e-9 {
        0.0
    } else {
        eps
    }
}

/// Entries below this magnitude carry no usable phase.
pub const COHERENCE_FLOOR: f64 = 1e-4;

/// `arg M_ij − arg M⁰_ij` wrapped to (−π, π], where `M⁰` is the block of
/// the input state written in the same basis.
pub fn extract_relative_phase(block: &DMatrix<C64>, reference: &DMatrix<C64>, pair: (usize, usize)) -> Result<f64> {
    let (i, j) = pair;
    let d = block.nrows();
    if i >= d || j >= d || reference.nrows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: reference.nrows().max(i.max(j) + 1),
        });
    }
    let m = block[(i, j)];
    let m0 = reference[(i, j)];
    if m.norm() < COHERENCE_FLOOR {
        return Err(Error::CoherenceLost(m.norm()));
    }
    if m0.norm() < COHERENCE_FLOOR {
        return Err(Error::CoherenceLost(m0.norm()));
    }
    Ok(wrap_phase(m.arg() - m0.arg()))
}

/// Maps an angle to (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{SpaceConfig, StateVector};

    #[test]
    fn impurity_of_pure_and_mixed() {
        let cfg = SpaceConfig::with_dim(4).unwrap();
        let e0 = StateVector::fock(0, &cfg).unwrap();
        let e1 = StateVector::fock(1, &cfg).unwrap();
        assert!(impurity(&DensityOperator::pure(&e0)).abs() < 1e-9);
        let mixed = DensityOperator::mixture(&[(0.5, &e0), (0.5, &e1)]).unwrap();
        assert!((impurity(&mixed) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ideal_phase_map_is_recovered() {
        let phi = 0.7;
        let half = C64::from(0.5);
        let input = DMatrix::from_element(2, 2, half);
        let u = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::from(1.0), C64::from_polar(1.0, -phi)]));
        let out = &u * &input * u.adjoint();
        let got = extract_relative_phase(&out, &input, (1, 0)).unwrap();
        assert!((got + phi).abs() < 1e-14);
        assert!(extract_relative_phase(&input, &input, (1, 0)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn lost_coherence_is_reported() {
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::from(0.5), C64::from(0.5)]));
        let input = DMatrix::from_element(2, 2, C64::from(0.5));
        assert!(matches!(extract_relative_phase(&diag, &input, (1, 0)), Err(Error::CoherenceLost(_))));
    }

    #[test]
    fn wrapping_lands_in_half_open_interval() {
        assert!((wrap_phase(PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }
}
