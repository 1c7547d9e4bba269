//! Serialize arbitrary-precision integers as decimal strings.

use num_bigint::BigUint;
use serde::ser::SerializeSeq;
use serde::Serializer;

pub fn many<S: Serializer>(xs: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}
