//! Canonical JSON serialization: sorted object keys and a fixed scientific
//! rendering for reals, so identical values always produce identical bytes.

use serde::Serialize;
use std::io;

struct CanonicalFormatter;

impl serde_json::ser::Formatter for CanonicalFormatter {
    /// 17 significant digits: enough to round-trip every finite f64.
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serialize any value to canonical JSON text. Routing through
/// [`serde_json::Value`] sorts object keys; the formatter pins the number
/// rendering.
pub fn to_canonical_string<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let tree = serde_json::to_value(value)?;
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, CanonicalFormatter);
    tree.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Serialize;

    #[derive(Serialize)]
    struct Sample {
        zeta: f64,
        alpha: i64,
        nested: Nested,
    }

    #[derive(Serialize)]
    struct Nested {
        b: f64,
        a: Vec<u32>,
    }

    #[test]
    fn keys_are_sorted_and_reals_pinned() {
        let s = Sample {
            zeta: 0.25,
            alpha: -3,
            nested: Nested {
                b: 1.0,
                a: vec![1, 2],
            },
        };
        let text = to_canonical_string(&s).unwrap();
        assert_eq!(
            text,
            "{\"alpha\":-3,\"nested\":{\"a\":[1,2],\"b\":1.0000000000000000e0},\"zeta\":2.5000000000000000e-1}"
        );
    }

    #[test]
    fn reals_round_trip_exactly() {
        for &x in &[0.3, 1.0 / 3.0, 1e-300, std::f64::consts::PI, -0.0, 6.02e23] {
            let text = to_canonical_string(&x).unwrap();
            let back: f64 = serde_json::from_str(&text).unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{text}");
        }
    }

    #[test]
    fn output_is_stable_across_calls() {
        let s = vec![(1u32, 0.1f64), (2, 0.2)];
        assert_eq!(
            to_canonical_string(&s).unwrap(),
            to_canonical_string(&s).unwrap()
        );
    }
}
