//! Fast evaluation of `Σ_i w_i K((q_i − u)/h)` for polynomial kernels.
//!
//! Points are sorted once and prefix sums of `w_i (q_i − c)^k` are stored for
//! `k = 0..=degree`. The window `|q_i − u| ≤ h` is then located by binary
//! search and the kernel polynomial is expanded binomially around `u`, so a
//! single evaluation costs `O(degree² + log n)` regardless of `n`. For small
//! bandwidths the expansion loses precision through cancellation, and the
//! window is summed directly instead.

use crate::kernels::KernelSpec;

const CENTER: f64 = 0.5;
/// Largest `((0.5 + |u − 0.5|)/h)^degree` for which the moment expansion is used.
const MAX_AMPLIFICATION: f64 = 1e3;

#[derive(Debug, Clone)]
pub struct WindowedKernelSum {
    sorted: Vec<f64>,
    sorted_weights: Vec<f64>,
    /// `prefix[k][j] = Σ_{i<j} w_i (q_i − CENTER)^k` over sorted points.
    prefix: Vec<Vec<f64>>,
    binom: Vec<Vec<f64>>,
}

impl WindowedKernelSum {
    pub fn new(points: &[f64], weights: &[f64], max_degree: usize) -> Self {
        assert_eq!(points.len(), weights.len());
        let mut idx: Vec<usize> = (0..points.len()).collect();
        idx.sort_by(|&a, &b| points[a].total_cmp(&points[b]));
        let sorted: Vec<f64> = idx.iter().map(|&i| points[i]).collect();
        let sorted_weights: Vec<f64> = idx.iter().map(|&i| weights[i]).collect();
        let mut prefix = vec![vec![0.0; sorted.len() + 1]; max_degree + 1];
        for (j, &i) in idx.iter().enumerate() {
            let d = points[i] - CENTER;
            let mut pw = weights[i];
            for row in prefix.iter_mut() {
                row[j + 1] = row[j] + pw;
                pw *= d;
            }
        }
        let mut binom = vec![vec![0.0; max_degree + 1]; max_degree + 1];
        for m in 0..=max_degree {
            binom[m][0] = 1.0;
            for k in 1..=m {
                binom[m][k] = binom[m - 1][k - 1] + if k < m { binom[m - 1][k] } else { 0.0 };
            }
        }
        Self {
            sorted,
            sorted_weights,
            prefix,
            binom,
        }
    }

    pub fn unweighted(points: &[f64], max_degree: usize) -> Self {
        Self::new(points, &vec![1.0; points.len()], max_degree)
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// `Σ_i w_i K((q_i − u)/h) / h`.
    pub fn eval(&self, k: &KernelSpec, h: f64, u: f64) -> f64 {
        let coeffs = k.coefficients();
        let deg = coeffs.len() - 1;
        assert!(deg < self.prefix.len(), "kernel degree exceeds the prefix table");
        let lo = self.sorted.partition_point(|&q| q < u - h);
        let hi = self.sorted.partition_point(|&q| q <= u + h);
        if lo >= hi {
            return 0.0;
        }
        let reach = (0.5 + (u - CENTER).abs()) / h;
        if reach.powi(deg as i32) > MAX_AMPLIFICATION || hi - lo <= 2 * (deg + 1) {
            return self.sorted[lo..hi]
                .iter()
                .zip(&self.sorted_weights[lo..hi])
                .map(|(&q, &w)| w * k.scaled(q, u, h))
                .sum();
        }
        // window moments about CENTER
        let mut s = [0.0f64; 16];
        for (kk, row) in self.prefix.iter().enumerate().take(deg + 1) {
            s[kk] = row[hi] - row[lo];
        }
        // (q − u)^m = Σ_k C(m,k) (q − c)^k (c − u)^{m−k}
        let shift = CENTER - u;
        let mut shift_pow = [1.0f64; 16];
        for j in 1..=deg {
            shift_pow[j] = shift_pow[j - 1] * shift;
        }
        let inv_h = 1.0 / h;
        let mut acc = 0.0;
        let mut scale = 1.0;
        for (m, &c) in coeffs.iter().enumerate() {
            if c != 0.0 {
                let mut moment = 0.0;
                for kk in 0..=m {
                    moment += self.binom[m][kk] * s[kk] * shift_pow[m - kk];
                }
                acc += c * scale * moment;
            }
            scale *= inv_h;
        }
        acc * inv_h
    }
}
