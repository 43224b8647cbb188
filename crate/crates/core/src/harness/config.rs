//! Run configuration.
//!
//! The config file is flat `key = value` text (a TOML subset). Every key is
//! optional in the file itself; [`RunConfig::resolve`] checks that the
//! combination makes sense for a run.
//!
//! ```text
//! # geometry: rhs_bits, or delta_x and delta_k
//! rhs_bits = 8.284
//! n_bar = 256
//! fill_x = 0.92
//! efficiency = 1.0
//!
//! # data source: exactly one of
//! #   eta_x + eta_k                      (supplied agreements)
//! #   position_path + momentum_path      (joint files)
//! #   sigma_plus + sigma_minus + ...     (simulation)
//! eta_x = 0.694
//! eta_k = 0.751
//! mu_x = 0.997
//! mu_k = 0.952
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::DetectorGeometry;
use crate::error::{Error, Result};
use crate::spdc_sim::BiphotonModel;

pub const DEFAULT_THRESHOLD: f64 = 0.1;
pub const DEFAULT_SIGMA_MULTIPLIER: f64 = 5.0;
pub const DEFAULT_TOTAL_COUNTS: u64 = 1_000_000;
pub const DEFAULT_CONTOUR_RESOLUTION: usize = 101;

/// The config file as written: one optional field per key.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    // geometry
    pub rhs_bits: Option<f64>,
    pub delta_x: Option<f64>,
    pub delta_k: Option<f64>,
    pub n_bar: Option<usize>,
    pub fill_x: Option<f64>,
    pub fill_k: Option<f64>,
    pub efficiency: Option<f64>,
    pub dims: Option<u32>,

    // supplied statistics
    pub eta_x: Option<f64>,
    pub eta_k: Option<f64>,
    pub n_coinc_x: Option<u64>,
    pub n_coinc_k: Option<u64>,

    // joint files
    pub position_path: Option<PathBuf>,
    pub momentum_path: Option<PathBuf>,

    // simulation
    pub sigma_plus: Option<f64>,
    pub sigma_minus: Option<f64>,
    pub grid_extent: Option<f64>,
    pub momentum_extent: Option<f64>,
    pub pixels_per_axis: Option<usize>,
    pub window_pixels: Option<usize>,
    pub total_counts: Option<u64>,

    // domain overrides
    pub mu_x: Option<f64>,
    pub mu_k: Option<f64>,

    // analysis
    pub ordering: Option<OrderingPolicy>,
    pub threshold: Option<f64>,
    pub sigma_multiplier: Option<f64>,
    pub contour_resolution: Option<usize>,
    pub hedge_mode: Option<HedgeAxis>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        // relative data paths are relative to the config file
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.position_path,
            &mut cfg.momentum_path,
            &mut cfg.output_dir,
        ] {
            if let Some(rel) = p.as_ref().filter(|p| p.is_relative()) {
                *p = Some(base.join(rel));
            }
        }
        Ok(cfg)
    }

    pub fn to_text(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Applies every `Some` field of `overrides` on top of `self`.
    pub fn merged(mut self, overrides: &ConfigFile) -> Self {
        macro_rules! take {
            ($($field:ident),* $(,)?) => {
                $(if overrides.$field.is_some() { self.$field = overrides.$field.clone(); })*
            };
        }
        take!(
            rhs_bits,
            delta_x,
            delta_k,
            n_bar,
            fill_x,
            fill_k,
            efficiency,
            dims,
            eta_x,
            eta_k,
            n_coinc_x,
            n_coinc_k,
            position_path,
            momentum_path,
            sigma_plus,
            sigma_minus,
            grid_extent,
            momentum_extent,
            pixels_per_axis,
            window_pixels,
            total_counts,
            mu_x,
            mu_k,
            ordering,
            threshold,
            sigma_multiplier,
            contour_resolution,
            hedge_mode,
            output_dir,
            seed,
        );
        self
    }
}

/// How agreement probabilities are extracted from joint matrices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingPolicy {
    /// Optimal relabeling on each axis.
    #[default]
    Best,
    /// Identity for position, reversal for momentum.
    Natural,
    /// Identity on both axes.
    Identity,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HedgeAxis {
    #[default]
    Common,
    Position,
    Momentum,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Source {
    Supplied {
        eta_x: f64,
        eta_k: f64,
        n_coinc_x: Option<u64>,
        n_coinc_k: Option<u64>,
    },
    Files {
        position: PathBuf,
        momentum: PathBuf,
    },
    Model {
        model: BiphotonModel,
        total_counts: u64,
    },
}

/// Geometry keys as given; the bin widths may still come from data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeometrySpec {
    pub rhs_bits: Option<f64>,
    pub delta_x: Option<f64>,
    pub delta_k: Option<f64>,
    pub n_bar: Option<usize>,
    pub fill_x: f64,
    pub fill_k: f64,
    pub efficiency: f64,
    pub dims: u32,
}

impl GeometrySpec {
    /// Builds the geometry, taking unspecified bin widths and window size
    /// from the data.
    pub fn resolve(
        &self,
        data_widths: Option<(f64, f64)>,
        data_n_bar: Option<usize>,
    ) -> Result<DetectorGeometry> {
        let n_bar = match (self.n_bar, data_n_bar) {
            (Some(c), Some(d)) if c != d => {
                return Err(Error::Config(format!(
                    "n_bar = {c} but the data windows have {d} pixels"
                )))
            }
            (Some(n), _) | (None, Some(n)) => n,
            (None, None) => return Err(Error::Config("n_bar is required".into())),
        };
        let base = match (self.rhs_bits, self.delta_x, self.delta_k, data_widths) {
            (Some(rhs), None, None, _) => {
                DetectorGeometry::from_rhs_bits(rhs / f64::from(self.dims.max(1)), n_bar)?
            }
            (Some(_), _, _, _) => {
                return Err(Error::Config(
                    "give rhs_bits or delta_x/delta_k, not both".into(),
                ))
            }
            (None, Some(dx), Some(dk), _) => DetectorGeometry::new(dx, dk, n_bar)?,
            (None, None, None, Some((dx, dk))) => DetectorGeometry::new(dx, dk, n_bar)?,
            _ => {
                return Err(Error::Config(
                    "geometry needs rhs_bits or both delta_x and delta_k".into(),
                ))
            }
        };
        base.with_dims(self.dims)?
            .with_fill_factors(self.fill_x, self.fill_k)?
            .with_efficiency(self.efficiency)
    }
}

/// A validated run description.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub geometry: GeometrySpec,
    pub source: Source,
    /// Centered detector window in pixels per axis; defaults to `n_bar`,
    /// then to the whole grid.
    pub window_pixels: Option<usize>,
    pub mu_x: Option<f64>,
    pub mu_k: Option<f64>,
    pub ordering: OrderingPolicy,
    pub threshold: f64,
    pub sigma_multiplier: f64,
    pub contour_resolution: usize,
    pub hedge_axis: HedgeAxis,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
    /// The flat file this configuration was resolved from.
    #[serde(skip)]
    pub file: ConfigFile,
}

impl RunConfig {
    pub fn resolve(file: ConfigFile) -> Result<Self> {
        let f = &file;
        let supplied = f.eta_x.is_some() || f.eta_k.is_some();
        let files = f.position_path.is_some() || f.momentum_path.is_some();
        let model = f.sigma_plus.is_some() || f.sigma_minus.is_some();
        let chosen = [supplied, files, model].iter().filter(|b| **b).count();
        if chosen != 1 {
            return Err(Error::Config(
                "set exactly one data source: eta_x/eta_k, position_path/momentum_path, or sigma_plus/sigma_minus"
                    .into(),
            ));
        }
        let need = |name: &str| Error::Config(format!("missing key `{name}`"));

        let source = if supplied {
            Source::Supplied {
                eta_x: f.eta_x.ok_or_else(|| need("eta_x"))?,
                eta_k: f.eta_k.ok_or_else(|| need("eta_k"))?,
                n_coinc_x: f.n_coinc_x,
                n_coinc_k: f.n_coinc_k,
            }
        } else if files {
            Source::Files {
                position: f
                    .position_path
                    .clone()
                    .ok_or_else(|| need("position_path"))?,
                momentum: f
                    .momentum_path
                    .clone()
                    .ok_or_else(|| need("momentum_path"))?,
            }
        } else {
            let sigma_plus = f.sigma_plus.ok_or_else(|| need("sigma_plus"))?;
            let sigma_minus = f.sigma_minus.ok_or_else(|| need("sigma_minus"))?;
            let pixels = f
                .pixels_per_axis
                .unwrap_or(BiphotonModel::default().pixels_per_axis);
            let mut model =
                BiphotonModel::with_ratio(sigma_plus, sigma_plus / sigma_minus, pixels, 10.0)?;
            model.sigma_minus = sigma_minus;
            if let Some(extent) = f.grid_extent {
                model.grid_extent = extent;
            }
            model.momentum_extent = f.momentum_extent;
            model.validate()?;
            Source::Model {
                model,
                total_counts: f.total_counts.unwrap_or(DEFAULT_TOTAL_COUNTS),
            }
        };

        let threshold = f.threshold.unwrap_or(DEFAULT_THRESHOLD);
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::Config(format!(
                "threshold {threshold} outside [0, 1]"
            )));
        }
        let sigma_multiplier = f.sigma_multiplier.unwrap_or(DEFAULT_SIGMA_MULTIPLIER);
        if sigma_multiplier.is_nan() || sigma_multiplier < 0.0 {
            return Err(Error::Config(format!(
                "sigma_multiplier {sigma_multiplier} must be >= 0"
            )));
        }
        let contour_resolution = f.contour_resolution.unwrap_or(DEFAULT_CONTOUR_RESOLUTION);
        if contour_resolution < 2 {
            return Err(Error::Config("contour_resolution must be >= 2".into()));
        }

        Ok(Self {
            geometry: GeometrySpec {
                rhs_bits: f.rhs_bits,
                delta_x: f.delta_x,
                delta_k: f.delta_k,
                n_bar: f.n_bar,
                fill_x: f.fill_x.unwrap_or(1.0),
                fill_k: f.fill_k.unwrap_or(1.0),
                efficiency: f.efficiency.unwrap_or(1.0),
                dims: f.dims.unwrap_or(1),
            },
            source,
            window_pixels: f.window_pixels.or(f.n_bar),
            mu_x: f.mu_x,
            mu_k: f.mu_k,
            ordering: f.ordering.unwrap_or_default(),
            threshold,
            sigma_multiplier,
            contour_resolution,
            hedge_axis: f.hedge_mode.unwrap_or_default(),
            output_dir: f.output_dir.clone(),
            seed: f.seed.unwrap_or(0),
            file,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::resolve(ConfigFile::load(path)?)
    }
}
