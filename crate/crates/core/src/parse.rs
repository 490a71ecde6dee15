//! Textual literals: complex numbers `a+bi`, grids `NxM`, ranges `lo:hi[:n]`.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

use crate::error::{Error, Result};

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::InvalidParameters(format!("bad complex literal '{s}'"));
    if t.is_empty() {
        return Err(bad());
    }
    if !t.ends_with('i') {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    }
    let body = &t[..t.len() - 1];
    // split at the last sign that is not part of an exponent and not leading
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        let c = bytes[k];
        if (c == b'+' || c == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let imag = |x: &str| -> Result<f64> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, imag(&body[k..])?))
        }
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

pub fn format_complex(c: Complex64) -> String {
    if c.im < 0.0 || (c.im == 0.0 && c.im.is_sign_negative()) {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

pub fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidParameters(format!("bad grid '{s}', expected NxM"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let n = a.trim().parse::<usize>().map_err(|_| bad())?;
    let m = b.trim().parse::<usize>().map_err(|_| bad())?;
    if n < 2 || m < 2 {
        return Err(bad());
    }
    Ok((n, m))
}

pub fn parse_range(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidParameters(format!("bad range '{s}', expected lo:hi"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo = a.trim().parse::<f64>().map_err(|_| bad())?;
    let hi = b.trim().parse::<f64>().map_err(|_| bad())?;
    if !(lo < hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

pub fn parse_sweep(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidParameters(format!("bad sweep '{s}', expected lo:hi:n"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo = parts[0].trim().parse::<f64>().map_err(|_| bad())?;
    let hi = parts[1].trim().parse::<f64>().map_err(|_| bad())?;
    let n = parts[2].trim().parse::<usize>().map_err(|_| bad())?;
    if n == 0 || hi < lo {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
}

/// Complex parameter that serializes as `"a+bi"` and also accepts `[re, im]` or a bare number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CParam(pub Complex64);

impl fmt::Display for CParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_complex(self.0))
    }
}

impl Serialize for CParam {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_complex(self.0))
    }
}

impl<'de> Deserialize<'de> for CParam {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Pair([f64; 2]),
            Real(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(t) => parse_complex(&t).map(CParam).map_err(serde::de::Error::custom),
            Raw::Pair([re, im]) => Ok(CParam(Complex64::new(re, im))),
            Raw::Real(re) => Ok(CParam(Complex64::new(re, 0.0))),
        }
    }
}
