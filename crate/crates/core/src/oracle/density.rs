//! Known mixing densities on [0, 1] used by the exact oracles and the
//! simulations: uniform, Beta(a, b) and piecewise polynomials (including the
//! four-piece nonsmooth example whose group difference is identically zero).

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::special::ln_beta;
use crate::numeric::Polynomial;

/// Constants entering the Bernstein and bias bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessParams {
    /// Hölder/Lipschitz constant.
    pub l: f64,
    /// Hölder exponent in (0, 1].
    pub alpha: f64,
    /// Upper bound on the density.
    pub p_max: f64,
    /// Smoothness index.
    pub s: f64,
}

/// Piecewise polynomial on `breaks[0] = 0 < … < breaks[m] = 1`; piece `i`
/// covers `(breaks[i], breaks[i+1]]`, the first piece also includes 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePolynomial {
    breaks: Vec<f64>,
    pieces: Vec<Polynomial>,
    /// CDF at each break.
    cdf_at_break: Vec<f64>,
}

impl PiecewisePolynomial {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Polynomial>) -> Result<Self> {
        if breaks.len() != pieces.len() + 1 || pieces.is_empty() {
            return Err(Error::param("breaks", "need one more break than pieces"));
        }
        if breaks[0] != 0.0 || *breaks.last().unwrap() != 1.0 {
            return Err(Error::param("breaks", "pieces must cover [0, 1]"));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("breaks", "breaks must be increasing"));
        }
        let mut cdf = vec![0.0];
        for (i, p) in pieces.iter().enumerate() {
            let prev = cdf[i];
            cdf.push(prev + antiderivative(p, breaks[i], breaks[i + 1]));
        }
        Ok(Self {
            breaks,
            pieces,
            cdf_at_break: cdf,
        })
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Polynomial] {
        &self.pieces
    }

    fn piece_index(&self, u: f64) -> usize {
        // first i with u <= breaks[i+1]
        let m = self.pieces.len();
        (0..m).find(|&i| u <= self.breaks[i + 1]).unwrap_or(m - 1)
    }

    pub fn eval(&self, u: f64) -> f64 {
        if !(0.0..=1.0).contains(&u) {
            return 0.0;
        }
        self.pieces[self.piece_index(u)].eval(u)
    }

    /// `∫_0^u`.
    pub fn integral_to(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let i = self.piece_index(u);
        self.cdf_at_break[i] + antiderivative(&self.pieces[i], self.breaks[i], u)
    }

    pub fn total(&self) -> f64 {
        *self.cdf_at_break.last().unwrap()
    }

    fn scaled(&self, c: f64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Polynomial::new(p.coeffs().iter().map(|a| a * c).collect()))
            .collect();
        Self::new(self.breaks.clone(), pieces).expect("scaling keeps structure")
    }
}

/// `∫_a^b p(q) dq` via the exact antiderivative.
fn antiderivative(p: &Polynomial, a: f64, b: f64) -> f64 {
    let prim = |x: f64| {
        p.coeffs()
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * x + c / (k as f64 + 1.0))
            * x
    };
    prim(b) - prim(a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum DensityForm {
    Uniform,
    Beta { a: f64, b: f64 },
    Piecewise(PiecewisePolynomial),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySpec {
    pub name: String,
    pub form: DensityForm,
    pub smoothness: SmoothnessParams,
}

/// Normalizing constant of the nonsmooth example, `61/120`.
pub const NONSMOOTH_NORMALIZER: f64 = 61.0 / 120.0;

impl DensitySpec {
    pub fn uniform() -> Self {
        Self {
            name: "uniform".into(),
            form: DensityForm::Uniform,
            smoothness: SmoothnessParams {
                l: 0.0,
                alpha: 1.0,
                p_max: 1.0,
                s: 1.0,
            },
        }
    }

    /// Beta(a, b) with `a, b ≥ 1`. Smoothness constants are filled in for
    /// Beta(2, 2) analytically (`p_max = 1.5`, `L = sup|6 − 12u| = 6`, `s = 2`);
    /// for other shapes they are computed numerically with `s = 1`.
    pub fn beta(a: f64, b: f64) -> Result<Self> {
        if !(a >= 1.0 && b >= 1.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::param("beta", "shape parameters must be finite and at least 1"));
        }
        let mut spec = Self {
            name: format!("beta:{a},{b}"),
            form: DensityForm::Beta { a, b },
            smoothness: SmoothnessParams {
                l: 6.0,
                alpha: 1.0,
                p_max: 1.5,
                s: 2.0,
            },
        };
        if (a, b) != (2.0, 2.0) {
            spec.smoothness = SmoothnessParams {
                s: 1.0,
                ..spec.grid_constants(1.0)
            };
        }
        Ok(spec)
    }

    /// The four-piece density
    /// `(2u² + 2u | u | −u² + 2u + 0.2 | 1.5u − 1) / C` on the quarters of [0, 1].
    pub fn nonsmooth_example() -> Self {
        let raw = PiecewisePolynomial::new(
            vec![0.0, 0.25, 0.5, 0.75, 1.0],
            vec![
                Polynomial::new(vec![0.0, 2.0, 2.0]),
                Polynomial::new(vec![0.0, 1.0]),
                Polynomial::new(vec![0.2, 2.0, -1.0]),
                Polynomial::new(vec![-1.0, 1.5]),
            ],
        )
        .expect("valid pieces");
        let pw = raw.scaled(1.0 / raw.total());
        let mut spec = Self {
            name: "nonsmooth".into(),
            form: DensityForm::Piecewise(pw),
            smoothness: SmoothnessParams {
                l: 0.0,
                alpha: 1.0,
                p_max: 0.0,
                s: 1.0,
            },
        };
        // piecewise Lipschitz constant; the density jumps at the breaks
        let c = spec.grid_constants(1.0);
        spec.smoothness.l = c.l;
        spec.smoothness.p_max = c.p_max;
        spec
    }

    /// Parses `uniform`, `nonsmooth` or `beta:a,b`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        match t {
            "uniform" => Ok(Self::uniform()),
            "nonsmooth" => Ok(Self::nonsmooth_example()),
            _ => {
                let rest = t.strip_prefix("beta:").ok_or_else(|| {
                    Error::param("density", format!("unknown density `{t}`"))
                })?;
                let parts: Vec<&str> = rest.split(',').collect();
                if parts.len() != 2 {
                    return Err(Error::param("density", "expected beta:a,b"));
                }
                let a = parts[0]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::param("density", e.to_string()))?;
                let b = parts[1]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::param("density", e.to_string()))?;
                Self::beta(a, b)
            }
        }
    }

    pub fn pdf(&self, u: f64) -> f64 {
        if !(0.0..=1.0).contains(&u) {
            return 0.0;
        }
        match &self.form {
            DensityForm::Uniform => 1.0,
            DensityForm::Beta { a, b } => {
                if (u == 0.0 && *a > 1.0) || (u == 1.0 && *b > 1.0) {
                    return 0.0;
                }
                ((a - 1.0) * u.ln() + (b - 1.0) * (1.0 - u).ln() - ln_beta(*a, *b)).exp()
            }
            DensityForm::Piecewise(pw) => pw.eval(u),
        }
    }

    /// Points in (0, 1) where the density or its derivative may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.form {
            DensityForm::Piecewise(pw) => pw.breaks()[1..pw.breaks().len() - 1].to_vec(),
            _ => Vec::new(),
        }
    }

    pub fn cdf(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match &self.form {
            DensityForm::Uniform => u,
            DensityForm::Beta { a, b } => crate::numeric::special::beta_reg(*a, *b, u),
            DensityForm::Piecewise(pw) => pw.integral_to(u),
        }
    }

    /// Draws one value. Piecewise densities are inverted on their exact
    /// piecewise CDF with a bracketed Newton solve per piece.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.form {
            DensityForm::Uniform => rng.random::<f64>(),
            DensityForm::Beta { a, b } => Beta::new(*a, *b).expect("validated shapes").sample(rng),
            DensityForm::Piecewise(pw) => invert_piecewise(pw, rng.random::<f64>()),
        }
    }

    /// `sup p` and the largest `|p'|` over smooth stretches, each inflated by
    /// `safety`. Derivatives are evaluated between breakpoints only.
    pub fn grid_constants(&self, safety: f64) -> SmoothnessParams {
        let (p_max, l) = match &self.form {
            DensityForm::Uniform => (1.0, 0.0),
            DensityForm::Piecewise(pw) => {
                let mut p_max: f64 = 0.0;
                let mut l: f64 = 0.0;
                for (i, p) in pw.pieces().iter().enumerate() {
                    let (a, b) = (pw.breaks()[i], pw.breaks()[i + 1]);
                    p_max = p_max.max(p.sup_abs(a, b));
                    l = l.max(p.derivative().sup_abs(a, b));
                }
                (p_max, l)
            }
            DensityForm::Beta { .. } => {
                let n = 20_000;
                let mut p_max: f64 = 0.0;
                let mut l: f64 = 0.0;
                let mut prev = self.pdf(0.0);
                for i in 1..=n {
                    let u = i as f64 / n as f64;
                    let v = self.pdf(u);
                    p_max = p_max.max(v);
                    l = l.max((v - prev).abs() * n as f64);
                    prev = v;
                }
                (p_max, l)
            }
        };
        SmoothnessParams {
            l: l * safety,
            alpha: self.smoothness.alpha,
            p_max: p_max * safety,
            s: self.smoothness.s,
        }
    }

    /// `∫ f(q) p(q) dq` by adaptive quadrature honoring density breakpoints
    /// and the caller's own breakpoints of `f`.
    pub fn integrate_against<F: Fn(f64) -> f64>(&self, f: F, f_breaks: &[f64], tol: f64) -> f64 {
        let mut breaks = self.breakpoints();
        breaks.extend_from_slice(f_breaks);
        crate::numeric::quadrature::adaptive(|q| f(q) * self.pdf(q), 0.0, 1.0, &breaks, tol)
    }
}

fn invert_piecewise(pw: &PiecewisePolynomial, target: f64) -> f64 {
    let total = pw.total();
    let y = target * total;
    let m = pw.pieces().len();
    let i = (0..m)
        .find(|&i| y <= pw.cdf_at_break[i + 1])
        .unwrap_or(m - 1);
    let (mut lo, mut hi) = (pw.breaks()[i], pw.breaks()[i + 1]);
    let p = &pw.pieces()[i];
    let base = pw.cdf_at_break[i];
    let f = |x: f64| base + antiderivative(p, pw.breaks()[i], x) - y;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let fx = f(x);
        if fx.abs() < 1e-15 {
            break;
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = p.eval(x);
        let newton = x - fx / d;
        x = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-13 {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::quadrature::adaptive;
    use crate::rng::substream;

    #[test]
    fn nonsmooth_normalizer_and_cdf() {
        // ∫ of the raw pieces: 7/96 + 3/32 + 253/960 + 5/64 = 61/120
        let pieces = [
            (|u: f64| 2.0 * u * u + 2.0 * u) as fn(f64) -> f64,
            |u| u,
            |u| -u * u + 2.0 * u + 0.2,
            |u| 1.5 * u - 1.0,
        ];
        let quad: f64 = pieces
            .iter()
            .enumerate()
            .map(|(i, f)| adaptive(f, i as f64 * 0.25, (i + 1) as f64 * 0.25, &[], 1e-14))
            .sum();
        assert!((quad - NONSMOOTH_NORMALIZER).abs() < 1e-13);
        assert!((quad - 0.5083).abs() < 0.001);
        let d = DensitySpec::nonsmooth_example();
        assert!((d.cdf(1.0) - 1.0).abs() < 1e-12);
        assert!((d.integrate_against(|_| 1.0, &[], 1e-12) - 1.0).abs() < 1e-10);
        // jump at 0.5: left piece u, right piece −u² + 2u + 0.2
        assert!((d.pdf(0.5) - 0.5 / NONSMOOTH_NORMALIZER).abs() < 1e-12);
        assert!((d.pdf(0.5 + 1e-12) - 0.95 / NONSMOOTH_NORMALIZER).abs() < 1e-9);
    }

    #[test]
    fn nonsmooth_constants() {
        let sp = DensitySpec::nonsmooth_example().smoothness;
        assert!((sp.p_max - 1.1375 / NONSMOOTH_NORMALIZER).abs() < 1e-9);
        assert!((sp.l - 3.0 / NONSMOOTH_NORMALIZER).abs() < 1e-9);
    }

    #[test]
    fn beta22_values() {
        let d = DensitySpec::beta(2.0, 2.0).unwrap();
        assert!((d.pdf(0.5) - 1.5).abs() < 1e-12);
        assert!((d.pdf(0.2) - 6.0 * 0.2 * 0.8).abs() < 1e-12);
        let g = d.grid_constants(1.001);
        assert!(g.p_max >= 1.5 && g.p_max < 1.502);
        assert!(g.l >= 5.99 && g.l < 6.01);
        assert_eq!(d.smoothness.l, 6.0);
        assert!(DensitySpec::beta(0.5, 2.0).is_err());
    }

    #[test]
    fn parse_names() {
        assert_eq!(DensitySpec::parse("uniform").unwrap().name, "uniform");
        assert_eq!(DensitySpec::parse("beta:2,2").unwrap().form, DensityForm::Beta { a: 2.0, b: 2.0 });
        assert_eq!(DensitySpec::parse("nonsmooth").unwrap().name, "nonsmooth");
        assert!(DensitySpec::parse("gauss").is_err());
        assert!(DensitySpec::parse("beta:2").is_err());
    }

    #[test]
    fn inversion_hits_cdf() {
        let d = DensitySpec::nonsmooth_example();
        let DensityForm::Piecewise(pw) = &d.form else { unreachable!() };
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let x = invert_piecewise(pw, p);
            assert!((d.cdf(x) - p).abs() < 1e-12, "p={p} x={x}");
        }
        let mut rng = substream(1, 0);
        for _ in 0..1000 {
            let x = d.sample(&mut rng);
            assert!((0.0..=1.0).contains(&x));
        }
    }
}
