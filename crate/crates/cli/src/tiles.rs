//! Image requests shared by the command line and the tile service, so the
//! same parameters give the same bytes on both paths.

use henonlab::saddles::{fixed_point_records, linearize, DEFAULT_SERIES_ORDER};
use henonlab::slices::{
    default_linearization, palette, render_parameter_plane, render_slice, write_hslc, write_ppm, ParamRegion, Probe,
    ProbeBudget, RenderConfig, SliceImage, Window,
};
use henonlab::{Error, HenonParams, Result, C64};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DynRequest {
    pub a: C64,
    pub b: C64,
    /// Index into the fixed points; `None` picks the default saddle.
    pub saddle: Option<usize>,
    pub window: Window,
    pub width: u32,
    pub height: u32,
    pub depth: u32,
    pub thicken: f64,
}

pub fn dyn_image(req: &DynRequest) -> Result<SliceImage> {
    let params = HenonParams::new(req.a, req.b)?;
    let lin = match req.saddle {
        None => default_linearization(&params)?,
        Some(k) => {
            let fixed = fixed_point_records(&params);
            let rec = fixed.get(k).ok_or_else(|| Error::InvalidParameter {
                field: "saddle",
                reason: format!("only {} fixed points", fixed.len()),
            })?;
            if !rec.is_saddle() {
                return Err(Error::InvalidParameter {
                    field: "saddle",
                    reason: format!("fixed point {k} is not a saddle"),
                });
            }
            linearize(&params, rec, DEFAULT_SERIES_ORDER)?
        }
    };
    let cfg = RenderConfig {
        depth: req.depth,
        thicken: req.thicken,
    };
    render_slice(&lin, req.window, req.width, req.height, &cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParamRequest {
    pub region: ParamRegion,
    pub probe: Probe,
    pub width: u32,
    pub height: u32,
    pub budget: ProbeBudget,
}

pub fn param_image(req: &ParamRequest) -> Result<SliceImage> {
    render_parameter_plane(req.region, req.probe, req.width, req.height, &req.budget)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Encoding {
    Hslc,
    Png,
    Ppm,
}

impl Encoding {
    /// From a file extension; HSLC unless it says otherwise.
    pub fn from_path(p: &std::path::Path) -> Self {
        match p.extension().and_then(|e| e.to_str()) {
            Some("png") => Encoding::Png,
            Some("ppm") => Encoding::Ppm,
            _ => Encoding::Hslc,
        }
    }

    pub fn content_type(self) -> &'static str {
        match self {
            Encoding::Hslc => "application/x-hslc",
            Encoding::Png => "image/png",
            Encoding::Ppm => "image/x-portable-pixmap",
        }
    }
}

pub fn encode(img: &SliceImage, enc: Encoding) -> Vec<u8> {
    match enc {
        Encoding::Hslc => write_hslc(img),
        Encoding::Ppm => write_ppm(img),
        Encoding::Png => write_png(img),
    }
}

/// PNG with the default palette.
pub fn write_png(img: &SliceImage) -> Vec<u8> {
    let mut rgb = Vec::with_capacity(3 * img.rate.len());
    for k in 0..img.rate.len() {
        rgb.extend_from_slice(&palette(img, k));
    }
    let mut out = Vec::new();
    let mut enc = png::Encoder::new(&mut out, img.width, img.height);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let mut w = enc.write_header().expect("in-memory PNG header");
    w.write_image_data(&rgb).expect("in-memory PNG data");
    w.finish().expect("in-memory PNG trailer");
    out
}
