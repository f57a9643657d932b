//! Run configuration schema: geometry (inline or file reference), release,
//! run parameters and table sizes. All defaults are made explicit in the
//! provenance block that run outputs carry.

use kmc3d::error::{Error, Result};
use kmc3d::geometry::{Geometry, GeometryJson};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeometryRef {
    File { file: PathBuf },
    Inline(GeometryJson),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged, rename_all = "snake_case")]
pub enum SourceSpec {
    /// Fixed release point.
    Point { point: [f64; 3] },
    /// Uniform release on the (hemi)sphere of this radius.
    Shell { shell_radius: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableSpec {
    #[serde(default = "default_grid")]
    pub mu: usize,
    #[serde(default = "default_grid")]
    pub nu: usize,
}

impl Default for TableSpec {
    fn default() -> Self {
        TableSpec { mu: 400, nu: 400 }
    }
}

fn default_grid() -> usize {
    400
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub bins: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub geometry: GeometryRef,
    pub source: SourceSpec,
    #[serde(default = "default_diffusivity")]
    pub diffusivity: f64,
    #[serde(default = "default_particles")]
    pub particles: u64,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 means the rayon default.
    #[serde(default)]
    pub workers: usize,
    /// Overrides the geometry's launch/landing ratio when set.
    #[serde(default)]
    pub reinsertion_ratio: Option<f64>,
    #[serde(default)]
    pub tables: TableSpec,
    /// Histogram bins; derived from the data when absent.
    #[serde(default)]
    pub histogram: Option<HistogramSpec>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

fn default_diffusivity() -> f64 {
    1.0
}
fn default_particles() -> u64 {
    100_000
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.diffusivity > 0.0) {
            return Err(Error::config("diffusivity must be positive".to_string()));
        }
        if self.particles == 0 {
            return Err(Error::config("particle count must be positive".to_string()));
        }
        if let Some(r) = self.reinsertion_ratio {
            if !(r > 1.0) {
                return Err(Error::config("reinsertion ratio must exceed 1".to_string()));
            }
        }
        if self.tables.mu < 16 || self.tables.nu < 16 {
            return Err(Error::config("table grids must be at least 16".to_string()));
        }
        if let SourceSpec::Shell { shell_radius } = self.source {
            if !(shell_radius > 0.0) {
                return Err(Error::config("release radius must be positive".to_string()));
            }
        }
        Ok(())
    }

    /// Load and build the geometry, applying any ratio override.
    pub fn build_geometry(&self, config_dir: &Path) -> Result<Geometry> {
        let mut gj = match &self.geometry {
            GeometryRef::Inline(g) => g.clone(),
            GeometryRef::File { file } => {
                let path = if file.is_relative() {
                    config_dir.join(file)
                } else {
                    file.clone()
                };
                let text = std::fs::read_to_string(&path)?;
                serde_json::from_str(&text)?
            }
        };
        if let Some(r) = self.reinsertion_ratio {
            match &mut gj {
                GeometryJson::Planar {
                    reinsertion_ratio, ..
                }
                | GeometryJson::Mesh {
                    reinsertion_ratio, ..
                } => *reinsertion_ratio = r,
            }
        }
        gj.build()
    }

    /// The effective launch/landing ratio after overrides.
    pub fn effective_ratio(&self, geometry: &Geometry) -> f64 {
        match geometry {
            Geometry::Planar(s) => s.reinsertion_ratio,
            Geometry::Mesh(m) => m.reinsertion_ratio,
        }
    }

    /// Canonical JSON of the fully resolved configuration (defaults filled).
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
