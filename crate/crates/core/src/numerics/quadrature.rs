//! Gauss–Hermite quadrature for Gaussian expectations.

/// Nodes and weights of the `order`-point rule for `∫ e^{-x²} f(x) dx`,
/// found by Newton iteration on the orthonormal Hermite recurrence.
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let nf = n as f64;
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z: f64 = 0.0;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 3e-14 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `E[f(φ)]` for `φ ~ N(0, sd²)` with an `order`-point rule.
pub fn gaussian_expectation(order: usize, sd: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = gauss_hermite(order);
    let s = std::f64::consts::SQRT_2 * sd;
    x.iter().zip(&w).map(|(&xi, &wi)| wi * f(s * xi)).sum::<f64>() / std::f64::consts::PI.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_sqrt_pi() {
        for n in [1, 2, 5, 16, 64, 128] {
            let (_, w) = gauss_hermite(n);
            let s: f64 = w.iter().sum();
            assert!((s - std::f64::consts::PI.sqrt()).abs() < 1e-12, "n={n} s={s}");
        }
    }

    #[test]
    fn moments() {
        let m2 = gaussian_expectation(20, 0.7, |x| x * x);
        let m4 = gaussian_expectation(20, 0.7, |x| x.powi(4));
        assert!((m2 - 0.49).abs() < 1e-13);
        assert!((m4 - 3.0 * 0.49 * 0.49).abs() < 1e-13);
    }

    #[test]
    fn characteristic_function() {
        let sd: f64 = 0.3;
        let got = gaussian_expectation(40, sd, |x| (2.0 * x).cos());
        assert!((got - (-2.0 * sd * sd).exp()).abs() < 1e-14);
    }
}
