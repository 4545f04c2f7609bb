//! Compactly supported polynomial kernels on [-1, 1], including higher-order
//! kernels built by projecting the point mass at zero onto Legendre
//! polynomials.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::polynomial::{legendre_family, Polynomial};
use crate::numeric::quadrature::{adaptive, GaussLegendre};

/// Kernel orders accepted by [`KernelSpec::legendre`].
pub const SUPPORTED_ORDERS: [usize; 4] = [2, 4, 6, 8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Epanechnikov,
    Legendre,
}

/// Constants that enter the error bounds: `sup|K|`, the Hölder constant and
/// exponent of `K` on its support, and `∫|u|^s |K(u)| du` for a chosen `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelBounds {
    pub k_max: f64,
    pub m: f64,
    pub beta: f64,
    pub b: f64,
    /// Smoothness index at which `b` was evaluated.
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    family: KernelFamily,
    order: usize,
    poly: Polynomial,
    bounds: KernelBounds,
}

impl KernelSpec {
    /// `K(v) = 0.75 (1 - v²)` on [-1, 1].
    pub fn epanechnikov() -> Self {
        Self::from_polynomial(
            KernelFamily::Epanechnikov,
            2,
            Polynomial::new(vec![0.75, 0.0, -0.75]),
        )
    }

    /// `K(u) = Σ_{m=0}^{order} φ_m(0) φ_m(u)` with `φ_m = sqrt((2m+1)/2) P_m`
    /// orthonormal on [-1, 1]. Moments `1..order` vanish.
    pub fn legendre(order: usize) -> Result<Self> {
        if !SUPPORTED_ORDERS.contains(&order) {
            return Err(Error::param(
                "order",
                format!("kernel order must be one of {SUPPORTED_ORDERS:?}, got {order}"),
            ));
        }
        let family = legendre_family(order);
        let mut poly = Polynomial::new(vec![0.0]);
        for (m, p) in family.iter().enumerate() {
            let p0 = p.eval(0.0);
            if p0 == 0.0 {
                continue;
            }
            // φ_m(0) φ_m(u) = (2m+1)/2 · P_m(0) P_m(u)
            poly.add_scaled(p, (2.0 * m as f64 + 1.0) / 2.0 * p0);
        }
        Ok(Self::from_polynomial(KernelFamily::Legendre, order, poly))
    }

    /// Resolves a CLI-style choice: Epanechnikov ignores `order` unless it
    /// differs from 2.
    pub fn from_choice(family: KernelFamily, order: usize) -> Result<Self> {
        match family {
            KernelFamily::Epanechnikov if order == 2 => Ok(Self::epanechnikov()),
            KernelFamily::Epanechnikov => Err(Error::param(
                "order",
                format!("the Epanechnikov kernel has order 2, got {order}"),
            )),
            KernelFamily::Legendre => Self::legendre(order),
        }
    }

    fn from_polynomial(family: KernelFamily, order: usize, poly: Polynomial) -> Self {
        let mut spec = Self {
            family,
            order,
            poly,
            bounds: KernelBounds {
                k_max: 0.0,
                m: 0.0,
                beta: 1.0,
                b: 0.0,
                s: order as f64,
            },
        };
        spec.bounds = spec.bounds_for(order as f64);
        spec
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coefficients(&self) -> &[f64] {
        self.poly.coeffs()
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }

    pub fn bounds(&self) -> &KernelBounds {
        &self.bounds
    }

    /// Bound constants with `b = ∫|u|^s |K(u)| du` at the requested `s`.
    pub fn bounds_for(&self, s: f64) -> KernelBounds {
        KernelBounds {
            k_max: self.poly.sup_abs(-1.0, 1.0),
            m: self.poly.derivative().sup_abs(-1.0, 1.0),
            beta: 1.0,
            b: self.abs_moment(s),
            s,
        }
    }

    /// `K(v)`, exactly zero outside the closed support [-1, 1].
    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        if v.abs() > 1.0 {
            0.0
        } else {
            self.poly.eval(v)
        }
    }

    /// `K_h(q) = K((q - u)/h) / h`.
    #[inline]
    pub fn scaled(&self, q: f64, u: f64, h: f64) -> f64 {
        self.eval((q - u) / h) / h
    }

    fn rule(&self) -> GaussLegendre {
        GaussLegendre::new(2 * self.poly.degree() + 8)
    }

    /// `∫ u^j K(u) du` over the support.
    pub fn moment(&self, j: u32) -> f64 {
        self.rule()
            .integrate(|u| u.powi(j as i32) * self.poly.eval(u), -1.0, 1.0)
    }

    /// `∫ |u|^s |K(u)| du`, splitting at zero and at sign changes of `K`.
    pub fn abs_moment(&self, s: f64) -> f64 {
        let mut breaks = self.poly.roots_in(-1.0, 1.0);
        breaks.push(0.0);
        adaptive(
            |u| u.abs().powf(s) * self.poly.eval(u).abs(),
            -1.0,
            1.0,
            &breaks,
            1e-13,
        )
    }

    /// `∫ K(u)² du`.
    pub fn square_integral(&self) -> f64 {
        self.rule().integrate(|u| self.poly.eval(u).powi(2), -1.0, 1.0)
    }
}
