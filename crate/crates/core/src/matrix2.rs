//! 2x2 complex matrices, the carrier for Riemann-Hilbert solution values and
//! the outer model matrix.

use rug::ops::CompleteRound;
use rug::{Complex, Float};

use crate::precision::cabs;

/// Row-major 2x2 complex matrix.
#[derive(Debug, Clone)]
pub struct Matrix2 {
    pub e11: Complex,
    pub e12: Complex,
    pub e21: Complex,
    pub e22: Complex,
}

impl Matrix2 {
    pub fn new(e11: Complex, e12: Complex, e21: Complex, e22: Complex) -> Self {
        Matrix2 { e11, e12, e21, e22 }
    }

    pub fn identity(prec: u32) -> Self {
        Matrix2 {
            e11: Complex::with_val(prec, 1),
            e12: Complex::new(prec),
            e21: Complex::new(prec),
            e22: Complex::with_val(prec, 1),
        }
    }

    pub fn diag(a: Complex, d: Complex) -> Self {
        let prec = a.prec().0;
        Matrix2 {
            e11: a,
            e12: Complex::new(prec),
            e21: Complex::new(prec),
            e22: d,
        }
    }

    pub fn prec(&self) -> u32 {
        self.e11.prec().0
    }

    pub fn mul(&self, rhs: &Matrix2) -> Matrix2 {
        let p = (self.prec(), self.prec());
        Matrix2 {
            e11: (&self.e11 * &rhs.e11).complete(p) + (&self.e12 * &rhs.e21).complete(p),
            e12: (&self.e11 * &rhs.e12).complete(p) + (&self.e12 * &rhs.e22).complete(p),
            e21: (&self.e21 * &rhs.e11).complete(p) + (&self.e22 * &rhs.e21).complete(p),
            e22: (&self.e21 * &rhs.e12).complete(p) + (&self.e22 * &rhs.e22).complete(p),
        }
    }

    pub fn sub(&self, rhs: &Matrix2) -> Matrix2 {
        let p = (self.prec(), self.prec());
        Matrix2 {
            e11: (&self.e11 - &rhs.e11).complete(p),
            e12: (&self.e12 - &rhs.e12).complete(p),
            e21: (&self.e21 - &rhs.e21).complete(p),
            e22: (&self.e22 - &rhs.e22).complete(p),
        }
    }

    pub fn det(&self) -> Complex {
        let p = (self.prec(), self.prec());
        (&self.e11 * &self.e22).complete(p) - (&self.e12 * &self.e21).complete(p)
    }

    /// Inverse via the adjugate.
    pub fn inverse(&self) -> Matrix2 {
        let det = self.det();
        Matrix2 {
            e11: (self.e22.clone() / &det),
            e12: (-self.e12.clone()) / &det,
            e21: (-self.e21.clone()) / &det,
            e22: (self.e11.clone() / &det),
        }
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> Float {
        let mut m = cabs(&self.e11);
        for e in [&self.e12, &self.e21, &self.e22] {
            let a = cabs(e);
            if a > m {
                m = a;
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        [&self.e11, &self.e12, &self.e21, &self.e22]
            .iter()
            .all(|e| e.real().is_finite() && e.imag().is_finite())
    }
}
