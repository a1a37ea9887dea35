//! Arithmetic in GF(2^e).
//!
//! Elements are bit-packed polynomials over GF(2): bit `i` holds the
//! coefficient of `x^i`. Multiplication is carry-less and reduced modulo the
//! field's defining polynomial. Elements order by their integer value, which
//! gives every layer above a canonical total order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported extension degree. Keeps every carry-less product in a `u32`.
pub const MAX_DEGREE: u32 = 16;

/// An element of GF(2^e).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fe(pub u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Mul,
    Inv,
    Pow,
}

/// The field GF(q), q = 2^e, fixed by its irreducible modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    degree: u32,
    modulus: u32,
}

impl FieldSpec {
    /// GF(2^degree) with the lexicographically least irreducible modulus.
    pub fn new(degree: u32) -> Result<Self> {
        check_degree(degree)?;
        Ok(Self {
            degree,
            modulus: least_irreducible(degree),
        })
    }

    /// GF(2^e) where `e = deg(modulus)`. Rejects reducible polynomials.
    pub fn with_modulus(modulus: u32) -> Result<Self> {
        let degree = poly_degree(modulus)
            .ok_or_else(|| Error::Invalid("modulus must be a nonzero polynomial".into()))?;
        check_degree(degree)?;
        if !is_irreducible(modulus) {
            return Err(Error::Invalid(format!(
                "modulus {modulus:#x} is reducible over GF(2)"
            )));
        }
        Ok(Self { degree, modulus })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// q = 2^e.
    pub fn order(&self) -> u32 {
        1 << self.degree
    }

    pub fn element(&self, bits: u32) -> Result<Fe> {
        if bits < self.order() {
            Ok(Fe(bits))
        } else {
            Err(Error::Invalid(format!(
                "element {bits} out of range for GF({})",
                self.order()
            )))
        }
    }

    /// All q elements in increasing order of their bit encoding.
    pub fn elements(&self) -> impl Iterator<Item = Fe> + Clone {
        (0..self.order()).map(Fe)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        Fe(a.0 ^ b.0)
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        if self.degree == 1 {
            return Fe::ONE;
        }
        let mut prod = 0u32;
        let mut x = a.0;
        let mut y = b.0;
        while y != 0 {
            if y & 1 != 0 {
                prod ^= x;
            }
            x <<= 1;
            y >>= 1;
        }
        Fe(poly_rem(prod, self.modulus))
    }

    pub fn pow(&self, a: Fe, mut exp: u64) -> Fe {
        let mut base = a;
        let mut acc = Fe::ONE;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.is_zero() {
            return Err(Error::Domain("inverse of zero".into()));
        }
        // a^(q-2) = a^-1 in the multiplicative group of order q-1.
        Ok(self.pow(a, u64::from(self.order()) - 2))
    }

    /// Range-checked dispatch over the four field operations. For `Pow` the
    /// second operand's bits are the exponent.
    pub fn apply(&self, op: FieldOp, a: Fe, b: Fe) -> Result<Fe> {
        self.element(a.0)?;
        match op {
            FieldOp::Add => Ok(self.add(a, self.element(b.0)?)),
            FieldOp::Mul => Ok(self.mul(a, self.element(b.0)?)),
            FieldOp::Inv => self.inv(a),
            FieldOp::Pow => Ok(self.pow(a, u64::from(b.0))),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}) mod {:#x}", self.order(), self.modulus)
    }
}

fn check_degree(degree: u32) -> Result<()> {
    if degree == 0 || degree > MAX_DEGREE {
        return Err(Error::Invalid(format!(
            "extension degree must lie in 1..={MAX_DEGREE}, got {degree}"
        )));
    }
    Ok(())
}

fn poly_degree(p: u32) -> Option<u32> {
    (p != 0).then(|| 31 - p.leading_zeros())
}

fn poly_rem(mut a: u32, m: u32) -> u32 {
    let dm = match poly_degree(m) {
        Some(d) => d,
        None => return a,
    };
    while let Some(da) = poly_degree(a) {
        if da < dm {
            break;
        }
        a ^= m << (da - dm);
    }
    a
}

/// Irreducibility over GF(2) by trial division with every polynomial of
/// degree `1..=deg/2`.
pub fn is_irreducible(p: u32) -> bool {
    let d = match poly_degree(p) {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    for k in 1..=d / 2 {
        for divisor in (1u32 << k)..(1u32 << (k + 1)) {
            if poly_rem(p, divisor) == 0 {
                return false;
            }
        }
    }
    true
}

/// Smallest irreducible polynomial of the given degree, by integer value.
pub fn least_irreducible(degree: u32) -> u32 {
    ((1u32 << degree)..(1u32 << (degree + 1)))
        .find(|&p| is_irreducible(p))
        .expect("irreducible polynomials exist in every degree")
}
