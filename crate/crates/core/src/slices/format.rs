//! HSLC, the raw image format, plus PPM export and JSON summaries.
//!
//! ```text
//! "HSLC"  u32 version  u32 W  u32 H  f64 x0 y0 x1 y1
//! u32 n   n bytes of UTF-8 JSON provenance
//! W·H × (f32 rate, u8 status)        row-major from the top-left cell
//! ```
//!
//! All integers and floats are little-endian.

use serde_json::json;

use super::{CellStatus, Provenance, SliceImage, Window};
use crate::error::{Error, Result};

pub const HSLC_MAGIC: &[u8; 4] = b"HSLC";
pub const HSLC_VERSION: u32 = 1;

pub fn write_hslc(img: &SliceImage) -> Vec<u8> {
    let prov = serde_json::to_vec(&img.provenance).expect("provenance serializes");
    let mut out = Vec::with_capacity(40 + prov.len() + 5 * img.rate.len());
    out.extend_from_slice(HSLC_MAGIC);
    for v in [HSLC_VERSION, img.width, img.height] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let w = img.window;
    for v in [w.x0, w.y0, w.x1, w.y1] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(prov.len() as u32).to_le_bytes());
    out.extend_from_slice(&prov);
    for (r, s) in img.rate.iter().zip(&img.status) {
        out.extend_from_slice(&r.to_le_bytes());
        out.push(*s);
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Format("truncated HSLC data".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn read_hslc(bytes: &[u8]) -> Result<SliceImage> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != HSLC_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = r.u32()?;
    if version != HSLC_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let (width, height) = (r.u32()?, r.u32()?);
    let window = Window::new(r.f64()?, r.f64()?, r.f64()?, r.f64()?).map_err(|e| Error::Format(e.to_string()))?;
    let n = r.u32()? as usize;
    let provenance: Provenance = serde_json::from_slice(r.take(n)?).map_err(|e| Error::Format(e.to_string()))?;
    let cells = (width as usize)
        .checked_mul(height as usize)
        .ok_or_else(|| Error::Format("image too large".into()))?;
    if bytes.len() - r.pos != cells * 5 {
        return Err(Error::Format("cell data length does not match W·H".into()));
    }
    let mut rate = Vec::with_capacity(cells);
    let mut status = Vec::with_capacity(cells);
    for _ in 0..cells {
        let c = r.take(5)?;
        rate.push(f32::from_le_bytes(c[..4].try_into().expect("4 bytes")));
        status.push(c[4]);
    }
    Ok(SliceImage {
        width,
        height,
        window,
        rate,
        status,
        provenance,
    })
}

/// Default palette. Bounded cells are black. Escaping cells cycle through
/// a blue-to-white ramp once per doubling of the rate, so the bands follow
/// level sets of `G⁺` (which doubles under `f`). Cells marked near `K⁺`
/// are dark grey; undecided parameter cells are mid grey.
pub fn palette(img: &SliceImage, k: usize) -> [u8; 3] {
    let parameter = matches!(img.provenance, Provenance::Parameter { .. });
    match (parameter, img.status[k]) {
        (false, s) if s == CellStatus::Bounded as u8 => [0, 0, 0],
        (false, s) if s == CellStatus::NearK as u8 => [40, 40, 40],
        (true, 1) => [0, 0, 0],
        (true, 2) => [128, 128, 128],
        _ => {
            let r = img.rate[k] as f64;
            let t = if r > 0.0 { r.log2().rem_euclid(1.0) } else { 0.0 };
            let ramp = |lo: f64| (lo + (255.0 - lo) * t).round() as u8;
            [ramp(20.0), ramp(60.0), ramp(160.0)]
        }
    }
}

/// Binary portable pixmap (P6) with the default palette.
pub fn write_ppm(img: &SliceImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    for k in 0..img.rate.len() {
        out.extend_from_slice(&palette(img, k));
    }
    out
}

/// JSON summary of an image together with any extra report fields.
pub fn summary_json(img: &SliceImage, extra: serde_json::Value) -> serde_json::Value {
    let mut counts = [0usize; 3];
    for &s in &img.status {
        if let Some(c) = counts.get_mut(s as usize) {
            *c += 1;
        }
    }
    let parameter = matches!(img.provenance, Provenance::Parameter { .. });
    let names = if parameter {
        ["negative", "positive", "undecided"]
    } else {
        ["escaped", "bounded", "near_k"]
    };
    json!({
        "width": img.width,
        "height": img.height,
        "window": img.window,
        "provenance": img.provenance,
        "status_counts": {
            names[0]: counts[0],
            names[1]: counts[1],
            names[2]: counts[2],
        },
        "report": extra,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slices::{ParamRegion, Probe};

    fn tiny() -> SliceImage {
        SliceImage {
            width: 2,
            height: 1,
            window: Window::new(-1.0, -0.5, 1.0, 0.5).unwrap(),
            rate: vec![0.25, 0.0],
            status: vec![0, 1],
            provenance: Provenance::Parameter {
                region: ParamRegion::AB {
                    a0: 0.0,
                    a1: 1.0,
                    b0: 0.1,
                    b1: 0.2,
                },
                probe: Probe::Horseshoe,
                budget: Default::default(),
            },
        }
    }

    #[test]
    fn hslc_round_trip() {
        let img = tiny();
        let bytes = write_hslc(&img);
        assert_eq!(&bytes[..4], b"HSLC");
        assert_eq!(read_hslc(&bytes).unwrap(), img);
    }

    #[test]
    fn hslc_rejects_damage() {
        let bytes = write_hslc(&tiny());
        assert!(read_hslc(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(read_hslc(&bad).is_err());
    }

    #[test]
    fn ppm_header_and_black_positive() {
        let ppm = write_ppm(&tiny());
        assert!(ppm.starts_with(b"P6\n2 1\n255\n"));
        assert_eq!(&ppm[ppm.len() - 3..], &[0, 0, 0]);
    }
}
