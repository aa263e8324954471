use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{OplabError, Result};

/// A point of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub fn new(value: Complex64) -> Result<Self> {
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(OplabError::Invariant(format!("non-finite disk point {value}")));
        }
        if value.norm() >= 1.0 {
            return Err(OplabError::Invariant(format!(
                "point {value} is not in the open unit disk"
            )));
        }
        Ok(DiskPoint(value))
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::new(Complex64::new(x, 0.0))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn modulus(&self) -> f64 {
        self.0.norm()
    }
}

impl Serialize for DiskPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiskPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let z = crate::serde_ext::ComplexRepr::deserialize(d)?;
        DiskPoint::new(z.into()).map_err(serde::de::Error::custom)
    }
}

/// Pseudohyperbolic distance `|λ − μ| / |1 − μ̄λ|`.
pub fn pseudohyperbolic(lambda: DiskPoint, mu: DiskPoint) -> f64 {
    let (l, m) = (lambda.value(), mu.value());
    let num = (l - m).norm();
    if num == 0.0 {
        return 0.0;
    }
    (num / (Complex64::new(1.0, 0.0) - m.conj() * l).norm()).min(1.0)
}
