//! Dense symmetric eigensolver and small matrix helpers.
//!
//! The problem sizes in this crate are tiny (a CAS(6,6) determinant basis is
//! 400-dimensional), so a cyclic Jacobi sweep is both sufficient and easy to
//! trust. Eigenvectors come out orthonormal to machine precision.

/// Row-major dense symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, data: vec![0.0; n * n] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

/// Eigendecomposition of a symmetric matrix.
///
/// `values` ascending; `vectors[k]` is the eigenvector for `values[k]`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Cyclic Jacobi diagonalization. Panics if the input is not square.
pub fn symmetric_eigen(m: &SymMatrix) -> Eigen {
    let n = m.n;
    assert_eq!(m.data.len(), n * n, "matrix data length mismatch");
    if n == 0 {
        return Eigen { values: vec![], vectors: vec![] };
    }
    let mut a = m.data.clone();
    // v starts as identity, accumulates rotations; column k = eigenvector k.
    let mut v = vec![0.0f64; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[i * n + j] * a[i * n + j];
            }
        }
        s.sqrt()
    };

    let scale: f64 = m
        .data
        .iter()
        .fold(0.0f64, |acc, &x| acc.max(x.abs()))
        .max(1.0);
    let tol = 1e-15 * scale;

    for _sweep in 0..64 {
        if off(&a) <= tol * n as f64 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                // stable tangent of the rotation angle
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());

    let values: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&col| (0..n).map(|row| v[row * n + col]).collect())
        .collect();
    Eigen { values, vectors }
}

/// Lowest eigenpair convenience wrapper.
pub fn lowest_eigenpair(m: &SymMatrix) -> (f64, Vec<f64>) {
    let eig = symmetric_eigen(m);
    (eig.values[0], eig.vectors[0].clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix_is_its_own_spectrum() {
        let mut m = SymMatrix::zeros(3);
        m.set(0, 0, 2.0);
        m.set(1, 1, -1.0);
        m.set(2, 2, 0.5);
        let eig = symmetric_eigen(&m);
        assert!((eig.values[0] + 1.0).abs() < 1e-13);
        assert!((eig.values[1] - 0.5).abs() < 1e-13);
        assert!((eig.values[2] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[a, b], [b, c]] has eigenvalues (a+c)/2 ± sqrt(((a-c)/2)^2 + b^2)
        let (a, b, c) = (1.3, -0.7, -2.1);
        let mut m = SymMatrix::zeros(2);
        m.set(0, 0, a);
        m.set(0, 1, b);
        m.set(1, 1, c);
        let eig = symmetric_eigen(&m);
        let mid = (a + c) / 2.0;
        let rad = (((a - c) / 2.0).powi(2) + b * b).sqrt();
        assert!((eig.values[0] - (mid - rad)).abs() < 1e-13);
        assert!((eig.values[1] - (mid + rad)).abs() < 1e-13);
    }

    #[test]
    fn eigenvectors_satisfy_definition_and_orthonormality() {
        // fixed pseudo-random symmetric matrix
        let n = 12;
        let mut m = SymMatrix::zeros(n);
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for i in 0..n {
            for j in i..n {
                m.set(i, j, next());
            }
        }
        let eig = symmetric_eigen(&m);
        for k in 0..n {
            // ‖A v − λ v‖∞
            let vk = &eig.vectors[k];
            for i in 0..n {
                let mut av = 0.0;
                for j in 0..n {
                    av += m.get(i, j) * vk[j];
                }
                assert!((av - eig.values[k] * vk[i]).abs() < 1e-10);
            }
            for l in k..n {
                let dot: f64 = eig.vectors[k].iter().zip(&eig.vectors[l]).map(|(x, y)| x * y).sum();
                let want = if k == l { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10);
            }
        }
        // values ascending
        for k in 1..n {
            assert!(eig.values[k] >= eig.values[k - 1]);
        }
    }
}
