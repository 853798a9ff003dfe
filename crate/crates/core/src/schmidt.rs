//! Schmidt form of a two-qubit pure state via the SVD of its amplitude matrix.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::COMPARE_TOL;

#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtForm {
    /// Singular values, descending.
    pub coefficients: [f64; 2],
    /// Unitary whose columns are the first qubit's Schmidt basis.
    pub left: Matrix2<Complex64>,
    /// Unitary whose rows are the (conjugated) second qubit's Schmidt basis.
    pub right: Matrix2<Complex64>,
}

impl SchmidtForm {
    /// `left · diag(coefficients) · right`.
    pub fn reconstruct(&self) -> Matrix2<Complex64> {
        let d = Matrix2::from_diagonal(&nalgebra::Vector2::new(
            Complex64::new(self.coefficients[0], 0.0),
            Complex64::new(self.coefficients[1], 0.0),
        ));
        self.left * d * self.right
    }
}

/// `amps[(p, q)]` is the amplitude of `|pq⟩`; must have unit Frobenius norm.
pub fn schmidt_decompose(amps: &Matrix2<Complex64>) -> Result<SchmidtForm> {
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if norm == 0.0 {
        return Err(Error::validation("zero amplitude matrix"));
    }
    if (norm - 1.0).abs() > COMPARE_TOL {
        return Err(Error::validation(format!("amplitude matrix has norm² {norm}, expected 1")));
    }
    let svd = amps.svd(true, true);
    let u = svd.u.ok_or_else(|| Error::validation("SVD did not converge"))?;
    let v_t = svd.v_t.ok_or_else(|| Error::validation("SVD did not converge"))?;
    let s = svd.singular_values;
    let (first, second) = if s[0] >= s[1] { (0, 1) } else { (1, 0) };
    let left = Matrix2::from_columns(&[u.column(first).into_owned(), u.column(second).into_owned()]);
    let right = Matrix2::from_rows(&[v_t.row(first).into_owned(), v_t.row(second).into_owned()]);
    Ok(SchmidtForm { coefficients: [s[first], s[second]], left, right })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(a: f64, b: f64, c: f64, d: f64) -> Matrix2<Complex64> {
        Matrix2::new(a, b, c, d).map(|x| Complex64::new(x, 0.0))
    }

    #[test]
    fn product_state() {
        let f = schmidt_decompose(&m(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(f.coefficients[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.coefficients[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn bell_state() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let f = schmidt_decompose(&m(h, 0.0, 0.0, h)).unwrap();
        assert_abs_diff_eq!(f.coefficients[0], h, epsilon = 1e-14);
        assert_abs_diff_eq!(f.coefficients[1], h, epsilon = 1e-14);
    }

    #[test]
    fn ascending_input_is_sorted() {
        let f = schmidt_decompose(&m(0.6, 0.0, 0.0, 0.8)).unwrap();
        assert!(f.coefficients[0] >= f.coefficients[1]);
        let back = f.reconstruct();
        assert_abs_diff_eq!(back[(1, 1)].re, 0.8, epsilon = 1e-12);
    }

    #[test]
    fn rejects_zero_and_unnormalized() {
        assert!(schmidt_decompose(&m(0.0, 0.0, 0.0, 0.0)).is_err());
        assert!(schmidt_decompose(&m(1.0, 1.0, 0.0, 0.0)).is_err());
    }
}
