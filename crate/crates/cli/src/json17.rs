//! JSON serialization with floats at 17 significant digits, enough to
//! reproduce every f64 bit pattern on re-parse.

use serde::Serialize;
use serde_json::ser::Formatter;
use std::io;

struct SigFig17;

impl Formatter for SigFig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes to a JSON string with deterministic float formatting.
pub fn to_json_17<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFig17);
    value.serialize(&mut ser).expect("serialization of in-memory value cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_bitwise() {
        for v in [0.005f64, 1.0 / 3.0, 2.4343085906807174, -1e-300, 6.0, 0.0] {
            let s = to_json_17(&v);
            let back: f64 = serde_json::from_str(&s).unwrap();
            assert_eq!(v.to_bits(), back.to_bits(), "{v} -> {s} -> {back}");
        }
    }

    #[test]
    fn integers_unchanged() {
        assert_eq!(to_json_17(&42u64), "42");
    }
}
