use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, domain, Result};

/// A point in `ℂⁿ`, one complex amplitude per bosonic mode.
///
/// Entries are always finite and `n ≥ 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct ComplexVec(Vec<Complex64>);

impl ComplexVec {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(domain("complex vector must have at least one mode"));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(domain("complex vector entries must be finite"));
        }
        Ok(Self(entries))
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "complex vector must have at least one mode");
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    /// Single-mode vector.
    pub fn scalar(z: Complex64) -> Self {
        Self::new(vec![z]).expect("finite scalar")
    }

    /// Builds a vector from separate real and imaginary parts.
    pub fn from_parts(re: &[f64], im: &[f64]) -> Result<Self> {
        check_len(re.len(), im.len())?;
        Self::new(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect())
    }

    /// Real vector `(x, x, …, x)` scaled so that `|v|² = norm_sq`.
    pub fn uniform(n: usize, norm_sq: f64) -> Self {
        let x = (norm_sq / n as f64).sqrt();
        Self(vec![Complex64::new(x, 0.0); n])
    }

    /// Real vector `(√norm_sq, 0, …, 0)`.
    pub fn concentrated(n: usize, norm_sq: f64) -> Self {
        let mut v = Self::zeros(n);
        v.0[0] = Complex64::new(norm_sq.sqrt(), 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|z| -z).collect())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(self.0.iter().map(|z| z * s).collect())
    }
}

impl std::ops::Index<usize> for ComplexVec {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<[f64; 2]>> for ComplexVec {
    type Error = crate::error::Error;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(v.into_iter().map(|[a, b]| Complex64::new(a, b)).collect())
    }
}

impl From<ComplexVec> for Vec<[f64; 2]> {
    fn from(v: ComplexVec) -> Self {
        v.0.into_iter().map(|z| [z.re, z.im]).collect()
    }
}

/// `Σ_j |v_j|²`.
pub fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `e^{a†b − b†a} = e^{2i·Im(a†b)}`.
pub fn phase_kernel(a: &ComplexVec, b: &ComplexVec) -> Result<Complex64> {
    check_len(a.len(), b.len())?;
    Ok(phase_kernel_slices(&a.0, &b.0))
}

/// Unchecked slice form of [`phase_kernel`]; lengths must agree.
#[inline]
pub fn phase_kernel_slices(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let im: f64 = a.iter().zip(b).map(|(x, y)| x.re * y.im - x.im * y.re).sum();
    let (s, c) = (2.0 * im).sin_cos();
    Complex64::new(c, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kernel_examples() {
        let zero = ComplexVec::zeros(2);
        let b = ComplexVec::new(vec![c(0.3, -1.2), c(2.0, 0.5)]).unwrap();
        assert_eq!(phase_kernel(&zero, &b).unwrap(), c(1.0, 0.0));
        assert_eq!(phase_kernel(&b, &b).unwrap(), c(1.0, 0.0));

        let a = ComplexVec::scalar(c(1.0, 0.0));
        let b = ComplexVec::scalar(c(0.0, 1.0));
        let k = phase_kernel(&a, &b).unwrap();
        let want = c(2.0f64.cos(), 2.0f64.sin());
        assert!((k - want).norm() < 1e-15);
    }

    #[test]
    fn kernel_rejects_mismatch() {
        let a = ComplexVec::zeros(2);
        let b = ComplexVec::zeros(3);
        assert!(phase_kernel(&a, &b).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(ComplexVec::new(vec![c(f64::NAN, 0.0)]).is_err());
        assert!(ComplexVec::new(vec![]).is_err());
    }

    #[test]
    fn shapes() {
        let u = ComplexVec::uniform(50, 130.0);
        assert!((u.norm_sq() - 130.0).abs() < 1e-12);
        let k = ComplexVec::concentrated(50, 130.0);
        assert!((k.norm_sq() - 130.0).abs() < 1e-12);
    }

    #[test]
    fn serde_pairs() {
        let v = ComplexVec::new(vec![c(0.1, -2.5), c(1e-300, 7.0)]).unwrap();
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, "[[0.1,-2.5],[1e-300,7.0]]");
        let back: ComplexVec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
