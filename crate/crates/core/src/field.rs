//! Prime field GF(q) used as the symbol alphabet for messages and answers.
//!
//! Every scheme in this crate only ever adds or subtracts symbols with unit
//! coefficients, so the field exposes addition, subtraction and negation.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    CompositeModulus(u64),
    #[error("operands belong to different fields (q={0} and q={1})")]
    ModulusMismatch(u64, u64),
    #[error("value {value} is out of range for q={q}")]
    ValueOutOfRange { value: u64, q: u64 },
}

/// A validated prime modulus; hands out elements of GF(q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Field {
    q: u64,
}

impl Field {
    pub fn new(q: u64) -> Result<Self, FieldError> {
        if !is_prime(q) {
            return Err(FieldError::CompositeModulus(q));
        }
        Ok(Self { q })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem { value: 0, q: self.q }
    }

    pub fn elem(&self, value: u64) -> Result<FieldElem, FieldError> {
        if value >= self.q {
            return Err(FieldError::ValueOutOfRange { value, q: self.q });
        }
        Ok(FieldElem { value, q: self.q })
    }

    /// Reduces an arbitrary integer into the field.
    pub fn reduce(&self, value: u64) -> FieldElem {
        FieldElem {
            value: value % self.q,
            q: self.q,
        }
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElem {
        FieldElem {
            value: rng.random_range(0..self.q),
            q: self.q,
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (0..self.q).map(move |value| FieldElem { value, q: self.q })
    }
}

impl Default for Field {
    fn default() -> Self {
        Self { q: 2 }
    }
}

/// Trial division; moduli in this crate are small.
pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    if q < 4 {
        return true;
    }
    if q.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldElem {
    value: u64,
    q: u64,
}

impl FieldElem {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    fn check(&self, other: &FieldElem) -> Result<(), FieldError> {
        if self.q != other.q {
            return Err(FieldError::ModulusMismatch(self.q, other.q));
        }
        Ok(())
    }

    pub fn add(&self, other: &FieldElem) -> Result<FieldElem, FieldError> {
        self.check(other)?;
        // both operands < q, so the u128 sum cannot overflow
        let sum = (self.value as u128 + other.value as u128) % self.q as u128;
        Ok(FieldElem {
            value: sum as u64,
            q: self.q,
        })
    }

    pub fn sub(&self, other: &FieldElem) -> Result<FieldElem, FieldError> {
        self.check(other)?;
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FieldElem {
        let value = if self.value == 0 { 0 } else { self.q - self.value };
        FieldElem { value, q: self.q }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}
