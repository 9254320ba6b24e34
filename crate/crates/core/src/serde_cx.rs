//! Complex numbers in configs: either a bare real number or a `[re, im]` pair.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::C64;

#[derive(Deserialize)]
#[serde(untagged)]
enum Repr {
    Real(f64),
    Pair([f64; 2]),
}

impl From<Repr> for C64 {
    fn from(r: Repr) -> Self {
        match r {
            Repr::Real(x) => C64::new(x, 0.0),
            Repr::Pair([re, im]) => C64::new(re, im),
        }
    }
}

pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
    Ok(Repr::deserialize(d)?.into())
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        Ok(Vec::<Repr>::deserialize(d)?.into_iter().map(Into::into).collect())
    }
}

pub mod vec2 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Vec<C64>], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|row| row.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<C64>>, D::Error> {
        Ok(Vec::<Vec<Repr>>::deserialize(d)?
            .into_iter()
            .map(|row| row.into_iter().map(Into::into).collect())
            .collect())
    }
}
