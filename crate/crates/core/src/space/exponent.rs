use std::fmt;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use super::SpaceError;

/// An `ℓ_p` exponent: a real number `p ≥ 1` or `∞`.
///
/// `∞` is its own variant so that max/sup semantics stay exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub const ONE: Exponent = Exponent::Finite(1.0);
    pub const TWO: Exponent = Exponent::Finite(2.0);

    pub fn new(value: f64) -> Result<Self, SpaceError> {
        if value == f64::INFINITY {
            return Ok(Exponent::Infinite);
        }
        if !value.is_finite() || value < 1.0 {
            return Err(SpaceError::InvalidExponent(value));
        }
        Ok(Exponent::Finite(value))
    }

    /// Finite value of the exponent, `None` for `∞`.
    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(v) => Some(v),
            Exponent::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    /// Conjugate exponent `e' = e/(e-1)`, with `1 ↔ ∞`.
    pub fn dual(self) -> Exponent {
        match self {
            Exponent::Infinite => Exponent::Finite(1.0),
            Exponent::Finite(1.0) => Exponent::Infinite,
            Exponent::Finite(v) => Exponent::Finite(v / (v - 1.0)),
        }
    }

    /// `e` as an `f64`, with `∞` mapped to `f64::INFINITY`.
    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

/// Free-function form of [`Exponent::dual`].
pub fn dual_exponent(e: Exponent) -> Exponent {
    e.dual()
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = SpaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| SpaceError::InvalidExponentText(other.to_string()))?;
                Exponent::new(v)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(v) => serializer.serialize_f64(*v),
            Exponent::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(v) => Exponent::new(v).map_err(de::Error::custom),
            Raw::Text(s) => s.parse().map_err(de::Error::custom),
        }
    }
}

/// `(Σ |v|^p)^{1/p}` (or `max |v|` for `p = ∞`), rescaled by the largest
/// magnitude so that huge and tiny entries do not over/underflow.
pub fn lp_norm(values: &[f64], p: Exponent) -> f64 {
    let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return 0.0;
    }
    match p {
        Exponent::Infinite => max,
        Exponent::Finite(1.0) => values.iter().map(|v| v.abs()).sum(),
        Exponent::Finite(p) => {
            let s: f64 = values.iter().map(|v| (v.abs() / max).powf(p)).sum();
            max * s.powf(1.0 / p)
        }
    }
}

/// A unit vector of `ℓ_{p'}` norming `values`: `⟨u, v⟩ = ‖v‖_p`. Zero for
/// the zero vector; for `p = ∞` all weight sits on the first largest entry.
pub fn lp_dual(values: &[f64], p: Exponent) -> Vec<f64> {
    let total = lp_norm(values, p);
    let mut out = vec![0.0; values.len()];
    if total == 0.0 {
        return out;
    }
    match p {
        Exponent::Infinite => {
            let k = values
                .iter()
                .position(|v| v.abs() == total)
                .expect("the maximum is attained");
            out[k] = values[k].signum();
        }
        Exponent::Finite(1.0) => {
            for (o, v) in out.iter_mut().zip(values) {
                if *v != 0.0 {
                    *o = v.signum();
                }
            }
        }
        Exponent::Finite(p) => {
            for (o, v) in out.iter_mut().zip(values) {
                *o = v.signum() * (v.abs() / total).powf(p - 1.0);
            }
        }
    }
    out
}
