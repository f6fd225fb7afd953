//! Small dense linear-algebra and special-function helpers.
//!
//! Everything here operates on `Vec`-backed matrices at desk scale
//! (frame operators are d x d with d rarely above 10), so a hand-rolled
//! cyclic Jacobi eigensolver beats pulling in a linear-algebra crate.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations,
/// returned in ascending order.
///
/// Converges quadratically; 30 sweeps is far more than d <= 50 needs.
pub fn sym_eigenvalues(matrix: &[Vec<f64>]) -> Vec<f64> {
    let d = matrix.len();
    assert!(matrix.iter().all(|row| row.len() == d), "matrix not square");
    let mut a: Vec<Vec<f64>> = matrix.to_vec();

    let off = |a: &[Vec<f64>]| -> f64 {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    s += a[i][j] * a[i][j];
                }
            }
        }
        s
    };

    for _sweep in 0..30 {
        if off(&a) < 1e-30 {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p][q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                // Stable tangent of the rotation angle.
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }

    let mut eig: Vec<f64> = (0..d).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

/// Gamma function via the Lanczos approximation (g = 7, 9 coefficients),
/// accurate to ~1e-13 relative for the positive arguments used here.
pub fn gamma_fn(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];

    if x < 0.5 {
        // Reflection formula.
        return std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma_fn(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_known_values() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((gamma_fn(0.5) - sqrt_pi).abs() < 1e-12);
        assert!((gamma_fn(1.0) - 1.0).abs() < 1e-12);
        assert!((gamma_fn(1.5) - sqrt_pi / 2.0).abs() < 1e-12);
        assert!((gamma_fn(5.0) - 24.0).abs() < 1e-10);
        assert!((gamma_fn(10.5) - 1_133_278.388_948_905).abs() < 1e-4);
    }

    #[test]
    fn jacobi_diagonal_passthrough() {
        let m = vec![vec![3.0, 0.0], vec![0.0, -1.0]];
        let eig = sym_eigenvalues(&m);
        assert!((eig[0] + 1.0).abs() < 1e-12);
        assert!((eig[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_2x2_known() {
        // Eigenvalues of [[2,1],[1,2]] are 1 and 3.
        let m = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let eig = sym_eigenvalues(&m);
        assert!((eig[0] - 1.0).abs() < 1e-12);
        assert!((eig[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_trace_preserved() {
        let m = vec![
            vec![4.0, 1.0, -2.0],
            vec![1.0, 2.0, 0.5],
            vec![-2.0, 0.5, 3.0],
        ];
        let eig = sym_eigenvalues(&m);
        let trace: f64 = eig.iter().sum();
        assert!((trace - 9.0).abs() < 1e-10);
    }
}
