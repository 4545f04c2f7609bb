use serde::{Deserialize, Serialize};

/// Dense real polynomial, coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::new(vec![0.0]);
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn add_scaled(&mut self, other: &Polynomial, scale: f64) {
        if other.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), 0.0);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += scale * b;
        }
    }

    /// Real roots in `[a, b]`, located by sign changes on a dense grid and
    /// refined by bisection. Double roots that touch zero without crossing
    /// are reported when the grid hits them exactly.
    pub fn roots_in(&self, a: f64, b: f64) -> Vec<f64> {
        let steps = 4096usize.max(64 * self.degree());
        let dx = (b - a) / steps as f64;
        let mut roots = Vec::new();
        let mut x0 = a;
        let mut f0 = self.eval(x0);
        if f0 == 0.0 {
            roots.push(x0);
        }
        for i in 1..=steps {
            let x1 = if i == steps { b } else { a + i as f64 * dx };
            let f1 = self.eval(x1);
            if f1 == 0.0 {
                roots.push(x1);
            } else if f0 != 0.0 && f0.signum() != f1.signum() {
                roots.push(self.bisect(x0, x1, f0));
            }
            x0 = x1;
            f0 = f1;
        }
        roots
    }

    fn bisect(&self, mut lo: f64, mut hi: f64, flo: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = self.eval(mid);
            if fm == 0.0 {
                return mid;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `sup |p|` over `[a, b]`, taken over endpoints and stationary points.
    pub fn sup_abs(&self, a: f64, b: f64) -> f64 {
        let mut best = self.eval(a).abs().max(self.eval(b).abs());
        for r in self.derivative().roots_in(a, b) {
            best = best.max(self.eval(r).abs());
        }
        best
    }
}

/// Legendre polynomials `P_0, ..., P_n` in ascending-coefficient form.
pub fn legendre_family(n: usize) -> Vec<Polynomial> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    out.push(vec![1.0]);
    if n >= 1 {
        out.push(vec![0.0, 1.0]);
    }
    for k in 2..=n {
        let kf = k as f64;
        // k P_k = (2k-1) x P_{k-1} - (k-1) P_{k-2}
        let mut next = vec![0.0; k + 1];
        for (j, &c) in out[k - 1].iter().enumerate() {
            next[j + 1] += (2.0 * kf - 1.0) * c / kf;
        }
        for (j, &c) in out[k - 2].iter().enumerate() {
            next[j] -= (kf - 1.0) * c / kf;
        }
        out.push(next);
    }
    out.into_iter().map(Polynomial::new).collect()
}
