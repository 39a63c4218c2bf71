use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Non-negative rational number used for the coverage fraction and the
/// activation exponent. Parses `0.5`, `1.1`, `3/4` or `2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(Ratio<u64>);

#[derive(Debug, thiserror::Error)]
#[error("invalid rational `{0}`")]
pub struct ParseRationalError(String);

impl Rational {
    pub fn new(numer: u64, denom: u64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(Ratio::new(numer, denom))
    }

    pub fn integer(v: u64) -> Self {
        Rational(Ratio::from_integer(v))
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.numer() == 0
    }

    pub fn is_one(&self) -> bool {
        self.numer() == self.denom()
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// `ceil(self * n)`.
    pub fn ceil_mul(&self, n: u64) -> u64 {
        let p = self.numer() as u128 * n as u128;
        let d = self.denom() as u128;
        p.div_ceil(d) as u64
    }

    /// `floor(self * n)`.
    pub fn floor_mul(&self, n: u64) -> u64 {
        (self.numer() as u128 * n as u128 / self.denom() as u128) as u64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = (self.numer(), self.denom());
        // Terminating decimal iff the denominator has only factors 2 and 5.
        let mut rest = d;
        let (mut twos, mut fives) = (0u32, 0u32);
        while rest % 2 == 0 {
            rest /= 2;
            twos += 1;
        }
        while rest % 5 == 0 {
            rest /= 5;
            fives += 1;
        }
        if rest != 1 {
            return write!(f, "{n}/{d}");
        }
        let digits = twos.max(fives);
        if digits == 0 {
            return write!(f, "{n}");
        }
        let scale = 10u128.pow(digits);
        let scaled = n as u128 * (scale / d as u128);
        let int = scaled / scale;
        let frac = scaled % scale;
        let frac = format!("{:0width$}", frac, width = digits as usize);
        write!(f, "{}.{}", int, frac.trim_end_matches('0'))
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let a: u64 = a.trim().parse().map_err(|_| err())?;
            let b: u64 = b.trim().parse().map_err(|_| err())?;
            if b == 0 {
                return Err(err());
            }
            return Ok(Rational::new(a, b));
        }
        let (int, frac) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int.is_empty() && frac.is_empty() {
            return Err(err());
        }
        if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        if frac.len() > 18 {
            return Err(err());
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| err())? };
        let scale = 10u64.pow(frac.len() as u32);
        let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| err())? };
        let numer = int
            .checked_mul(scale)
            .and_then(|v| v.checked_add(frac))
            .ok_or_else(err)?;
        Ok(Rational::new(numer, scale))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Number(f64),
        }
        match Repr::deserialize(d)? {
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
            Repr::Number(v) => format!("{v}").parse().map_err(serde::de::Error::custom),
        }
    }
}
