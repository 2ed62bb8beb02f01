//! Serde adapters for exact numbers in reports.

/// Rationals as `"p/q"` strings (`"p"` when integral).
pub mod rational {
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &BigRational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(value)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(|_| D::Error::custom(format!("not a rational: {s}")))
    }
}

/// Matrices as row-major arrays of integers. Entries beyond 64 bits are
/// written as decimal strings.
pub mod matrix {
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    use crate::lattice::IntMatrix;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Entry {
        Small(i64),
        Big(String),
    }

    pub fn serialize<S: Serializer>(value: &IntMatrix, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Entry>> = value
            .rows()
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| x.to_i64().map_or_else(|| Entry::Big(x.to_string()), Entry::Small))
                    .collect()
            })
            .collect();
        rows.serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<IntMatrix, D::Error> {
        let rows: Vec<Vec<Entry>> = Vec::deserialize(deserializer)?;
        let rows = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|e| match e {
                        Entry::Small(x) => Ok(BigInt::from(x)),
                        Entry::Big(s) => s.parse().map_err(|_| D::Error::custom(format!("not an integer: {s}"))),
                    })
                    .collect()
            })
            .collect::<Result<Vec<Vec<BigInt>>, D::Error>>()?;
        IntMatrix::from_rows(rows).map_err(D::Error::custom)
    }
}

/// Unsigned big integers as decimal strings.
pub mod biguint {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &BigUint, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(value)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(|_| D::Error::custom(format!("not an unsigned integer: {s}")))
    }
}
