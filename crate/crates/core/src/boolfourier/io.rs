//! Truth-table and spectrum file formats.
//!
//! * Packed bits: `2ⁿ` bits, table entry `k` at byte `k / 8`, bit `k % 8`
//!   (least significant first); a set bit is TRUE (`+1`).
//! * JSON: `{"n": n, "table": [±1, …]}` (serde on [`BooleanFunction`]).
//! * Spectrum CSV: header `bitmask,coefficient`, one row per subset.

use std::io::{BufRead, Write};

use super::{BooleanFunction, FourierSpectrum};
use crate::distribution::fmt_f64;
use crate::error::{Error, Result};

impl BooleanFunction {
    /// Packs a `±1` table into bits.
    pub fn to_packed_bits(&self) -> Result<Vec<u8>> {
        if !self.is_boolean() {
            return Err(Error::Precondition("only ±1-valued tables can be packed".into()));
        }
        let mut out = vec![0u8; self.table.len().div_ceil(8)];
        for (k, v) in self.table.iter().enumerate() {
            if *v > 0.0 {
                out[k / 8] |= 1 << (k % 8);
            }
        }
        Ok(out)
    }

    pub fn from_packed_bits(n: usize, bytes: &[u8]) -> Result<Self> {
        super::check_vars(n)?;
        let len = 1usize << n;
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::Dimension(format!(
                "{} bytes supplied for a {n}-variable table (expected {})",
                bytes.len(),
                len.div_ceil(8)
            )));
        }
        let table = (0..len)
            .map(|k| if bytes[k / 8] >> (k % 8) & 1 == 1 { 1.0 } else { -1.0 })
            .collect();
        Self::new(n, table)
    }
}

pub fn write_spectrum_csv<W: Write>(spec: &FourierSpectrum, mut w: W) -> Result<()> {
    writeln!(w, "bitmask,coefficient")?;
    for (s, c) in spec.coeffs.iter().enumerate() {
        writeln!(w, "{s},{}", fmt_f64(*c))?;
    }
    Ok(())
}

pub fn read_spectrum_csv<R: BufRead>(r: R) -> Result<FourierSpectrum> {
    let mut coeffs = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if lineno == 0 || line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (mask, coeff) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `bitmask,coefficient`", lineno + 1)))?;
        let mask: usize = mask
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        if mask != coeffs.len() {
            return Err(Error::Parse(format!("line {}: bitmask {mask} out of order", lineno + 1)));
        }
        coeffs.push(
            coeff
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?,
        );
    }
    if !coeffs.len().is_power_of_two() {
        return Err(Error::Dimension(format!("{} coefficients is not a power of two", coeffs.len())));
    }
    FourierSpectrum::new(coeffs.len().trailing_zeros() as usize, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfourier::{make_majority, make_tribes, walsh_transform};

    #[test]
    fn packed_bits_layout() {
        let maj = make_majority(3).unwrap();
        // TRUE at indices with ≥2 set bits: 3, 5, 6, 7
        assert_eq!(maj.to_packed_bits().unwrap(), vec![0b1110_1000]);
        assert_eq!(BooleanFunction::from_packed_bits(3, &[0b1110_1000]).unwrap(), maj);
        let small = BooleanFunction::new(1, vec![-1.0, 1.0]).unwrap();
        assert_eq!(small.to_packed_bits().unwrap(), vec![0b10]);
        assert!(BooleanFunction::from_packed_bits(4, &[0]).is_err());
    }

    #[test]
    fn json_truth_table() {
        let f = make_tribes(1, 2).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, r#"{"n":2,"table":[-1.0,1.0,1.0,1.0]}"#);
        let back: BooleanFunction = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<BooleanFunction>(r#"{"n":2,"table":[1.0]}"#).is_err());
    }

    #[test]
    fn spectrum_csv_round_trip() {
        let sp = walsh_transform(&make_majority(3).unwrap());
        let mut buf = Vec::new();
        write_spectrum_csv(&sp, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("bitmask,coefficient\n0,0.0000000000000000e0\n1,5.0000000000000000e-1\n"));
        assert_eq!(read_spectrum_csv(buf.as_slice()).unwrap(), sp);
    }
}
