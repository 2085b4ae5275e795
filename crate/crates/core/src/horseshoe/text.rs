//! Plain-text `key = value` form of certificates and tangency reports.
//! Every float is written as a hexadecimal literal, so a file read back
//! reproduces the exact bits.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::certify::{CertMode, ConeCheck, CrossingData, HorseshoeCertificate};
use super::interval::{Box2, Interval};
use super::tangency::TangencyReport;
use crate::error::{Error, Result};

/// `x` as a C99 hexadecimal float literal, e.g. `0x1.8p+1` for 3.
pub fn hex_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    let sign = if x.is_sign_negative() { "-" } else { "" };
    if x.is_infinite() {
        return format!("{sign}inf");
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1 << 52) - 1);
    let (lead, e) = match exp {
        0 if mant == 0 => return format!("{sign}0x0p+0"),
        0 => (0, -1022),
        _ => (1, exp - 1023),
    };
    let digits = format!("{mant:013x}");
    let digits = digits.trim_end_matches('0');
    if digits.is_empty() {
        format!("{sign}0x{lead}p{e:+}")
    } else {
        format!("{sign}0x{lead}.{digits}p{e:+}")
    }
}

fn pow2(e: i64) -> f64 {
    if e >= -1022 {
        let e1 = e.min(1023);
        let v = f64::from_bits(((e1 + 1023) as u64) << 52);
        if e > e1 {
            v * pow2(e - e1)
        } else {
            v
        }
    } else if e >= -1074 {
        f64::from_bits(1u64 << (e + 1074))
    } else {
        0.0
    }
}

/// Inverse of [`hex_f64`]; also accepts decimal literals.
pub fn parse_hex_f64(s: &str) -> Result<f64> {
    let bad = || Error::Format(format!("not a hexadecimal float: {s:?}"));
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let sign = if neg { -1.0 } else { 1.0 };
    match body {
        "inf" => return Ok(sign * f64::INFINITY),
        "nan" => return Ok(f64::NAN),
        _ => {}
    }
    let Some(hex) = body.strip_prefix("0x") else {
        return s.parse().map_err(|_| bad());
    };
    let (m, e) = hex.split_once('p').ok_or_else(bad)?;
    let e: i64 = e.parse().map_err(|_| bad())?;
    let (int, frac) = m.split_once('.').unwrap_or((m, ""));
    if int.is_empty() || int.len() + frac.len() > 15 {
        return Err(bad());
    }
    let all = format!("{int}{frac}");
    let n = u64::from_str_radix(&all, 16).map_err(|_| bad())?;
    let scale = e - 4 * frac.len() as i64;
    // split the scaling so no intermediate underflows
    let half = scale / 2;
    Ok(sign * (n as f64) * pow2(half) * pow2(scale - half))
}

struct Doc(String);

impl Doc {
    fn f(&mut self, key: &str, v: f64) {
        writeln!(self.0, "{key} = {}", hex_f64(v)).expect("string write");
    }

    fn s(&mut self, key: &str, v: impl std::fmt::Display) {
        writeln!(self.0, "{key} = {v}").expect("string write");
    }

    fn iv(&mut self, key: &str, v: Interval) {
        self.s(key, format_args!("[{}, {}]", hex_f64(v.lo), hex_f64(v.hi)));
    }

    fn cone(&mut self, key: &str, c: Option<ConeCheck>) {
        match c {
            Some(c) => {
                self.f(&format!("{key}.kappa"), c.kappa);
                self.s(&format!("{key}.steps"), c.steps);
                self.f(&format!("{key}.expansion"), c.expansion);
            }
            None => self.s(key, "none"),
        }
    }
}

pub fn certificate_to_text(c: &HorseshoeCertificate) -> String {
    let mut d = Doc(String::from("# horseshoe certificate\n"));
    d.f("a", c.a);
    d.f("b", c.b);
    d.s(
        "mode",
        match c.mode {
            CertMode::Planar => "planar",
            CertMode::OneDimensional => "one_dimensional",
        },
    );
    d.iv("box.x", c.trapping_box.x);
    d.iv("box.y", c.trapping_box.y);
    d.f("crossing.box_radius", c.crossing.box_radius);
    d.f("crossing.margin", c.crossing.margin);
    for (k, s) in c.crossing.strips.iter().enumerate() {
        d.iv(&format!("crossing.strip{k}"), Interval::new(s[0], s[1]));
    }
    d.cone("unstable", c.unstable);
    d.cone("stable", c.stable);
    d.f("expansion", c.expansion);
    d.s("boxes", c.boxes);
    d.s("verified", c.verified);
    if let Some(f) = &c.failure {
        d.s("failure", f);
    }
    d.0
}

struct Fields(BTreeMap<String, String>);

impl Fields {
    fn parse(text: &str) -> Result<Self> {
        let mut m = BTreeMap::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once(" = ")
                .ok_or_else(|| Error::Format(format!("expected `key = value`, got {line:?}")))?;
            m.insert(k.to_string(), v.to_string());
        }
        Ok(Self(m))
    }

    fn get(&self, key: &str) -> Result<&str> {
        self.0
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Format(format!("missing field {key}")))
    }

    fn f(&self, key: &str) -> Result<f64> {
        parse_hex_f64(self.get(key)?)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .parse()
            .map_err(|_| Error::Format(format!("bad value for {key}")))
    }

    fn iv(&self, key: &str) -> Result<Interval> {
        let v = self.get(key)?;
        let inner = v
            .strip_prefix('[')
            .and_then(|v| v.strip_suffix(']'))
            .ok_or_else(|| Error::Format(format!("{key} is not an interval")))?;
        let (lo, hi) = inner
            .split_once(',')
            .ok_or_else(|| Error::Format(format!("{key} is not an interval")))?;
        let (lo, hi) = (parse_hex_f64(lo)?, parse_hex_f64(hi)?);
        if !(lo <= hi) {
            return Err(Error::Format(format!("{key} is empty")));
        }
        Ok(Interval::new(lo, hi))
    }

    fn cone(&self, key: &str) -> Result<Option<ConeCheck>> {
        if self.0.get(key).map(String::as_str) == Some("none") {
            return Ok(None);
        }
        Ok(Some(ConeCheck {
            kappa: self.f(&format!("{key}.kappa"))?,
            steps: self.parsed(&format!("{key}.steps"))?,
            expansion: self.f(&format!("{key}.expansion"))?,
        }))
    }
}

pub fn certificate_from_text(text: &str) -> Result<HorseshoeCertificate> {
    let f = Fields::parse(text)?;
    let strip = |k: usize| f.iv(&format!("crossing.strip{k}")).map(|i| [i.lo, i.hi]);
    Ok(HorseshoeCertificate {
        a: f.f("a")?,
        b: f.f("b")?,
        mode: match f.get("mode")? {
            "planar" => CertMode::Planar,
            "one_dimensional" => CertMode::OneDimensional,
            m => return Err(Error::Format(format!("unknown mode {m}"))),
        },
        trapping_box: Box2::new(f.iv("box.x")?, f.iv("box.y")?),
        crossing: CrossingData {
            box_radius: f.f("crossing.box_radius")?,
            margin: f.f("crossing.margin")?,
            strips: [strip(0)?, strip(1)?],
        },
        unstable: f.cone("unstable")?,
        stable: f.cone("stable")?,
        expansion: f.f("expansion")?,
        boxes: f.parsed("boxes")?,
        verified: f.parsed("verified")?,
        failure: f.0.get("failure").cloned(),
    })
}

pub fn tangency_to_text(r: &TangencyReport) -> String {
    let mut d = Doc(String::from("# tangency report\n"));
    d.f("a", r.a);
    d.f("b", r.b);
    d.s("p", r.p);
    d.s("q", r.q);
    d.s(
        "p_location",
        format_args!("[{}, {}]", hex_f64(r.p_location[0]), hex_f64(r.p_location[1])),
    );
    d.s(
        "q_location",
        format_args!("[{}, {}]", hex_f64(r.q_location[0]), hex_f64(r.q_location[1])),
    );
    d.s(
        "location",
        format_args!("[{}, {}]", hex_f64(r.location.x.re), hex_f64(r.location.y.re)),
    );
    for (k, c) in r.coefficients.iter().enumerate() {
        d.f(&format!("c{k}"), *c);
    }
    d.f("residual_rms", r.residual_rms);
    d.f("residual_max", r.residual_max);
    d.f("fit_half_width", r.fit_half_width);
    d.s("quadratic_dominant", r.quadratic_dominant());
    for (k, s) in r.samples.iter().enumerate() {
        d.s(
            &format!("sample{k}"),
            format_args!("[{}, {}]", hex_f64(s[0]), hex_f64(s[1])),
        );
    }
    d.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_literals() {
        assert_eq!(hex_f64(3.0), "0x1.8p+1");
        assert_eq!(hex_f64(1.0), "0x1p+0");
        assert_eq!(hex_f64(-0.0), "-0x0p+0");
        assert_eq!(hex_f64(0.1), "0x1.999999999999ap-4");
    }

    #[test]
    fn hex_round_trip_extremes() {
        for x in [0.1, -2.5e-310, f64::MIN_POSITIVE, f64::MAX, 5e-324, 1e300, -7.0] {
            assert_eq!(parse_hex_f64(&hex_f64(x)).unwrap().to_bits(), x.to_bits(), "{x}");
        }
        assert!(parse_hex_f64("0xzz").is_err());
    }
}
