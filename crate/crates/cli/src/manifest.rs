use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::args::Cli;

#[derive(Debug, Serialize)]
pub struct Versions {
    pub henonlab: &'static str,
    pub henonlab_cli: &'static str,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            henonlab: henonlab::VERSION,
            henonlab_cli: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// Everything needed to rerun a command: the resolved configuration with
/// all defaults filled in, the versions that ran it, and how long it took.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub argv: Vec<String>,
    pub config: &'a Cli,
    pub artifact: PathBuf,
    pub partial: bool,
    pub exit_status: i32,
    pub threads: usize,
    pub versions: Versions,
    pub wall_seconds: f64,
}

/// `<artifact>.manifest.json`.
pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut s = artifact.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}
