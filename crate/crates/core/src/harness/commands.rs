//! The command pipeline: load or simulate data, extract statistics, certify.
//!
//! Every command takes a resolved [`RunConfig`]. When the config names an
//! output directory the command also writes its record there as JSON.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::bounds::{
    discrete_steering_check, secret_key_rate, steering_certificate, steering_rhs, BoundReport,
    CorrelationStats, DetectorGeometry, KeyRate, Verdict,
};
use crate::entropy::{conditional_entropy, JointDistribution, ProbabilityVector};
use crate::error::{Error, Result};
use crate::spdc_sim::{
    joint_momentum_distribution, joint_position_distribution, sample_counts, threshold_renormalize,
    truncate_to_window, BiphotonModel, SimulatedJoint,
};
use crate::stats::{
    agreement_best_ordering, agreement_identity, agreement_reversed, contour_grid,
    domain_probability_from_fit, fold_losses, hedge_min_domain, ContourGrid, GaussianFit,
    HedgeMode, OrderingKind, HEDGE_RESOLUTION,
};

use super::config::{ConfigFile, HedgeAxis, OrderingPolicy, RunConfig, Source};
use super::io::{save_contour, JointFile};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// File names used inside an output directory.
pub const POSITION_FILE: &str = "position.joint";
pub const MOMENTUM_FILE: &str = "momentum.joint";
pub const CONFIG_FILE: &str = "run.toml";
pub const CONTOUR_FILE: &str = "contour.tsv";

/// Seed of the momentum draw, derived from the run seed so both axes use
/// independent streams.
pub fn momentum_seed(seed: u64) -> u64 {
    seed ^ 0x6d6f_6d65_6e74_756d
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn write_json<T: Serialize>(value: &T, dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value)?)?;
    Ok(path)
}

/// What the pipeline learned from one joint matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxisSummary {
    pub label: String,
    pub grid_pixels: usize,
    pub window_pixels: usize,
    pub bin_width: f64,
    pub total_counts: Option<u64>,
    pub window_counts: Option<u64>,
    /// Counts surviving the threshold; these set the error bars.
    pub kept_counts: Option<u64>,
    pub eta_identity: f64,
    pub eta_reversed: f64,
    pub eta_best: f64,
    pub best_ordering: OrderingKind,
    /// The agreement fed to the bound, chosen by the ordering policy.
    pub eta_used: f64,
    /// Domain probability, from the fits unless supplied.
    pub mu: f64,
    pub mu_supplied: bool,
    pub fit_a: Option<GaussianFit>,
    pub fit_b: Option<GaussianFit>,
    /// Exact domain probability, known for simulated data.
    pub mu_true: Option<f64>,
    pub conditional_entropy: f64,
}

struct AxisInput {
    label: &'static str,
    file: JointFile,
    /// Simulated joint before sampling, for the true domain probability.
    model: Option<SimulatedJoint>,
    natural: OrderingKind,
    mu_override: Option<f64>,
}

/// The centered `w x w` block, renormalized. With counts the block's total
/// is its exact count.
fn centered_window(file: &JointFile, w: usize) -> Result<JointDistribution> {
    let j = &file.joint;
    let n = j.rows();
    if !j.is_square() {
        return Err(Error::Shape(format!(
            "joint matrix must be square, got {}x{}",
            j.rows(),
            j.cols()
        )));
    }
    if w < 2 || w > n || !(n - w).is_multiple_of(2) {
        return Err(Error::Window { window: w, grid: n });
    }
    let off = (n - w) / 2;
    let block = |i: usize| off + i;
    let out = match &file.counts {
        Some(counts) => {
            let mut c = Vec::with_capacity(w * w);
            for i in 0..w {
                c.extend_from_slice(&counts[block(i) * n + off..block(i) * n + off + w]);
            }
            let total: u64 = c.iter().sum();
            JointDistribution::from_counts(w, w, &c)?.with_total_counts(Some(total))
        }
        None => {
            let mut d = Vec::with_capacity(w * w);
            for i in 0..w {
                d.extend_from_slice(&j.row(block(i))[off..off + w]);
            }
            JointDistribution::from_weights(w, w, d)?
        }
    };
    out.with_bin_widths(j.bin_width_a(), j.bin_width_b())
}

/// Union bound on the joint domain probability from the two one-sided fits.
fn fitted_domain(full: &JointDistribution, w: usize) -> Result<(f64, GaussianFit, GaussianFit)> {
    let (mu_a, fit_a) =
        domain_probability_from_fit(&ProbabilityVector::from_counts(&full.marginal_a())?, w)?;
    let (mu_b, fit_b) =
        domain_probability_from_fit(&ProbabilityVector::from_counts(&full.marginal_b())?, w)?;
    let mu = (mu_a + mu_b - 1.0).clamp(0.0, 1.0);
    Ok((mu, fit_a, fit_b))
}

fn analyze_axis(
    input: &AxisInput,
    window: usize,
    threshold: f64,
    policy: OrderingPolicy,
) -> Result<(AxisSummary, JointDistribution)> {
    let windowed = centered_window(&input.file, window).map_err(|e| e.at_stage("window"))?;
    let kept = threshold_renormalize(&windowed, threshold).map_err(|e| e.at_stage("threshold"))?;

    let agreement = || -> Result<_> {
        let (best, ordering) = agreement_best_ordering(&kept)?;
        Ok((
            agreement_identity(&kept)?,
            agreement_reversed(&kept)?,
            best,
            ordering.kind,
        ))
    };
    let (eta_identity, eta_reversed, eta_best, best_ordering) =
        agreement().map_err(|e| e.at_stage("agreement"))?;
    let eta_used = match (policy, input.natural) {
        (OrderingPolicy::Best, _) => eta_best,
        (OrderingPolicy::Natural, OrderingKind::Reversed) => eta_reversed,
        _ => eta_identity,
    };

    let (mu, fit_a, fit_b) = match input.mu_override {
        Some(mu) => (mu, None, None),
        None => {
            let (mu, a, b) =
                fitted_domain(&input.file.joint, window).map_err(|e| e.at_stage("domain fit"))?;
            (mu, Some(a), Some(b))
        }
    };
    let mu_true = match &input.model {
        Some(sim) => Some(
            truncate_to_window(sim, window)
                .map_err(|e| e.at_stage("window"))?
                .1,
        ),
        None => None,
    };

    let summary = AxisSummary {
        label: input.label.to_string(),
        grid_pixels: input.file.joint.rows(),
        window_pixels: window,
        bin_width: input.file.joint.bin_width_a(),
        total_counts: input.file.joint.total_counts(),
        window_counts: windowed.total_counts(),
        kept_counts: kept.total_counts(),
        eta_identity,
        eta_reversed,
        eta_best,
        best_ordering,
        eta_used,
        mu,
        mu_supplied: input.mu_override.is_some(),
        fit_a,
        fit_b,
        mu_true,
        conditional_entropy: conditional_entropy(&kept)?,
    };
    Ok((summary, kept))
}

/// Simulated position and momentum count files for a model.
pub fn simulate_files(
    model: &BiphotonModel,
    total_counts: u64,
    seed: u64,
) -> Result<((JointFile, SimulatedJoint), (JointFile, SimulatedJoint))> {
    let one = |sim: SimulatedJoint, seed: u64, a: &str, b: &str| -> Result<_> {
        let counts = sample_counts(&sim.joint, total_counts, seed)?;
        let widths = (sim.joint.bin_width_a(), sim.joint.bin_width_b());
        Ok((JointFile::from_counts(&counts, widths, a, b)?, sim))
    };
    let run = || -> Result<_> {
        let px = one(joint_position_distribution(model)?, seed, "x_A", "x_B")?;
        let pk = one(
            joint_momentum_distribution(model)?,
            momentum_seed(seed),
            "k_A",
            "k_B",
        )?;
        Ok((px, pk))
    };
    run().map_err(|e| e.at_stage("simulate"))
}

struct Analysis {
    geometry: DetectorGeometry,
    measured: CorrelationStats,
    axes: Option<(AxisSummary, AxisSummary)>,
    joints: Option<(JointDistribution, JointDistribution)>,
}

fn analyze(cfg: &RunConfig) -> Result<Analysis> {
    let (position, momentum) = match &cfg.source {
        Source::Supplied {
            eta_x,
            eta_k,
            n_coinc_x,
            n_coinc_k,
        } => {
            let geometry = cfg
                .geometry
                .resolve(None, cfg.window_pixels)
                .map_err(|e| e.at_stage("geometry"))?;
            let mut measured = CorrelationStats::new(
                *eta_x,
                *eta_k,
                cfg.mu_x.unwrap_or(1.0),
                cfg.mu_k.unwrap_or(1.0),
            )
            .map_err(|e| e.at_stage("statistics"))?;
            if let (Some(nx), Some(nk)) = (n_coinc_x, n_coinc_k) {
                measured = measured
                    .with_counts(*nx, *nk)
                    .map_err(|e| e.at_stage("statistics"))?;
            }
            return Ok(Analysis {
                geometry,
                measured,
                axes: None,
                joints: None,
            });
        }
        Source::Files { position, momentum } => {
            let load = |p: &Path| JointFile::load(p).map_err(|e| e.at_stage("load"));
            ((load(position)?, None), (load(momentum)?, None))
        }
        Source::Model {
            model,
            total_counts,
        } => {
            let ((fx, sx), (fk, sk)) = simulate_files(model, *total_counts, cfg.seed)?;
            ((fx, Some(sx)), (fk, Some(sk)))
        }
    };

    let window = cfg.window_pixels.unwrap_or(position.0.joint.rows());
    let inputs = [
        AxisInput {
            label: "position",
            file: position.0,
            model: position.1,
            natural: OrderingKind::Identity,
            mu_override: cfg.mu_x,
        },
        AxisInput {
            label: "momentum",
            file: momentum.0,
            model: momentum.1,
            natural: OrderingKind::Reversed,
            mu_override: cfg.mu_k,
        },
    ];
    let (sx, jx) = analyze_axis(&inputs[0], window, cfg.threshold, cfg.ordering)?;
    let (sk, jk) = analyze_axis(&inputs[1], window, cfg.threshold, cfg.ordering)?;

    let geometry = cfg
        .geometry
        .resolve(Some((sx.bin_width, sk.bin_width)), Some(window))
        .map_err(|e| e.at_stage("geometry"))?;
    let stats = || -> Result<_> {
        let s = CorrelationStats::new(sx.eta_used, sk.eta_used, sx.mu, sk.mu)?;
        match (sx.kept_counts, sk.kept_counts) {
            (Some(nx), Some(nk)) if nx > 0 && nk > 0 => s.with_counts(nx, nk),
            _ => Ok(s),
        }
    };
    let measured = stats().map_err(|e| e.at_stage("statistics"))?;
    Ok(Analysis {
        geometry,
        measured,
        axes: Some((sx, sk)),
        joints: Some((jx, jk)),
    })
}

fn effective(a: &Analysis) -> Result<CorrelationStats> {
    fold_losses(&a.measured, &a.geometry).map_err(|e| e.at_stage("losses"))
}

/// Output of [`cmd_analyze`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisRecord {
    pub tool_version: String,
    pub created_unix: u64,
    pub config: ConfigFile,
    pub geometry: DetectorGeometry,
    pub position: Option<AxisSummary>,
    pub momentum: Option<AxisSummary>,
    pub measured: CorrelationStats,
    pub effective: CorrelationStats,
}

/// Agreement and domain probabilities without a verdict.
pub fn cmd_analyze(cfg: &RunConfig) -> Result<AnalysisRecord> {
    let a = analyze(cfg)?;
    let eff = effective(&a)?;
    let (position, momentum) = a.axes.map_or((None, None), |(x, k)| (Some(x), Some(k)));
    let record = AnalysisRecord {
        tool_version: TOOL_VERSION.to_string(),
        created_unix: now_unix(),
        config: cfg.file.clone(),
        geometry: a.geometry,
        position,
        momentum,
        measured: a.measured,
        effective: eff,
    };
    if let Some(dir) = &cfg.output_dir {
        write_json(&record, dir, "analyze.json")?;
    }
    Ok(record)
}

/// Output of [`cmd_certify`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub tool_version: String,
    pub created_unix: u64,
    pub config: ConfigFile,
    pub geometry: DetectorGeometry,
    pub position: Option<AxisSummary>,
    pub momentum: Option<AxisSummary>,
    /// Agreement and domain probabilities as measured.
    pub measured: CorrelationStats,
    /// Domain probabilities with fill factors and efficiency folded in.
    pub effective: CorrelationStats,
    pub certificate: BoundReport,
    pub significance: Option<f64>,
    /// Exact conditional entropies of the windowed data against the same
    /// floor, when joint matrices are available.
    pub discrete_check: Option<BoundReport>,
    pub key_rate: KeyRate,
    pub verdict: Verdict,
}

impl RunRecord {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Full pipeline: statistics, domain estimate, loss folding, certificate and
/// key rate.
pub fn cmd_certify(cfg: &RunConfig) -> Result<RunRecord> {
    let a = analyze(cfg)?;
    let eff = effective(&a)?;
    let certificate =
        steering_certificate(&eff, &a.geometry).map_err(|e| e.at_stage("certificate"))?;
    let key_rate = secret_key_rate(&eff, &a.geometry).map_err(|e| e.at_stage("key rate"))?;
    let discrete_check = match &a.joints {
        Some((jx, jk)) => Some(
            discrete_steering_check(jx, jk, &a.geometry).map_err(|e| e.at_stage("certificate"))?,
        ),
        None => None,
    };
    let (position, momentum) = a.axes.map_or((None, None), |(x, k)| (Some(x), Some(k)));
    let record = RunRecord {
        tool_version: TOOL_VERSION.to_string(),
        created_unix: now_unix(),
        config: cfg.file.clone(),
        geometry: a.geometry,
        position,
        momentum,
        measured: a.measured,
        effective: eff,
        certificate,
        significance: certificate.significance(),
        discrete_check,
        key_rate,
        verdict: certificate.verdict(),
    };
    if let Some(dir) = &cfg.output_dir {
        write_json(&record, dir, "certify.json")?;
    }
    Ok(record)
}

/// Output of [`cmd_simulate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationRecord {
    pub tool_version: String,
    pub created_unix: u64,
    pub model: BiphotonModel,
    pub total_counts: u64,
    pub position_seed: u64,
    pub momentum_seed: u64,
    pub position_path: PathBuf,
    pub momentum_path: PathBuf,
    /// A config that certifies the written files.
    pub config_path: PathBuf,
    pub delta_x: f64,
    pub delta_k: f64,
    pub grid_mass_x: f64,
    pub grid_mass_k: f64,
    pub mu_true_x: Option<f64>,
    pub mu_true_k: Option<f64>,
}

/// Samples the model's position and momentum coincidences and writes both
/// count files, plus a config pointing at them, to the output directory.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<SimulationRecord> {
    let Source::Model {
        model,
        total_counts,
    } = &cfg.source
    else {
        return Err(Error::Config(
            "simulate needs model keys (sigma_plus, sigma_minus)".into(),
        ));
    };
    let dir = cfg
        .output_dir
        .as_ref()
        .ok_or_else(|| Error::Config("simulate needs output_dir".into()))?;
    let ((fx, sx), (fk, sk)) = simulate_files(model, *total_counts, cfg.seed)?;
    fs::create_dir_all(dir)?;
    let position_path = dir.join(POSITION_FILE);
    let momentum_path = dir.join(MOMENTUM_FILE);
    fx.save(&position_path)?;
    fk.save(&momentum_path)?;

    let mut follow = cfg.file.clone();
    for key in [
        &mut follow.sigma_plus,
        &mut follow.sigma_minus,
        &mut follow.grid_extent,
        &mut follow.momentum_extent,
    ] {
        *key = None;
    }
    follow.pixels_per_axis = None;
    follow.total_counts = None;
    follow.output_dir = None;
    follow.position_path = Some(POSITION_FILE.into());
    follow.momentum_path = Some(MOMENTUM_FILE.into());
    let config_path = dir.join(CONFIG_FILE);
    fs::write(&config_path, follow.to_text()?)?;

    let mu_true = |sim: &SimulatedJoint| {
        cfg.window_pixels
            .map(|w| truncate_to_window(sim, w).map(|t| t.1))
            .transpose()
    };
    let record = SimulationRecord {
        tool_version: TOOL_VERSION.to_string(),
        created_unix: now_unix(),
        model: *model,
        total_counts: *total_counts,
        position_seed: cfg.seed,
        momentum_seed: momentum_seed(cfg.seed),
        position_path,
        momentum_path,
        config_path,
        delta_x: fx.joint.bin_width_a(),
        delta_k: fk.joint.bin_width_a(),
        grid_mass_x: sx.grid_mass,
        grid_mass_k: sk.grid_mass,
        mu_true_x: mu_true(&sx)?,
        mu_true_k: mu_true(&sk)?,
    };
    write_json(&record, dir, "simulate.json")?;
    Ok(record)
}

/// Output of [`cmd_hedge`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HedgeRecord {
    pub tool_version: String,
    pub created_unix: u64,
    pub config: ConfigFile,
    pub mode: HedgeMode,
    pub eta_x_bar: f64,
    pub eta_k_bar: f64,
    pub n_bar: usize,
    pub rhs: f64,
    /// Smallest certifying domain probability on the scan grid.
    pub mu_min: f64,
    pub resolution: f64,
}

/// Smallest domain probability at which the measured agreements still
/// certify. Single-axis modes hold the other axis at its effective value.
pub fn cmd_hedge(cfg: &RunConfig) -> Result<HedgeRecord> {
    let a = analyze(cfg)?;
    let eff = effective(&a)?;
    let mode = match cfg.hedge_axis {
        HedgeAxis::Common => HedgeMode::Common,
        HedgeAxis::Position => HedgeMode::Position { mu_k: eff.mu_k },
        HedgeAxis::Momentum => HedgeMode::Momentum { mu_x: eff.mu_x },
    };
    let rhs = steering_rhs(&a.geometry).bits;
    let mu_min = hedge_min_domain(eff.eta_x_bar, eff.eta_k_bar, a.geometry.n_bar, rhs, mode)
        .map_err(|e| e.at_stage("hedge"))?;
    let record = HedgeRecord {
        tool_version: TOOL_VERSION.to_string(),
        created_unix: now_unix(),
        config: cfg.file.clone(),
        mode,
        eta_x_bar: eff.eta_x_bar,
        eta_k_bar: eff.eta_k_bar,
        n_bar: a.geometry.n_bar,
        rhs,
        mu_min,
        resolution: HEDGE_RESOLUTION,
    };
    if let Some(dir) = &cfg.output_dir {
        write_json(&record, dir, "hedge.json")?;
    }
    Ok(record)
}

/// Output of [`cmd_contour`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContourRecord {
    pub tool_version: String,
    pub created_unix: u64,
    pub config: ConfigFile,
    pub mu_x: f64,
    pub mu_k: f64,
    pub rhs: f64,
    pub resolution: usize,
    pub sigma_multiplier: f64,
    pub eta_x_bar: f64,
    pub eta_k_bar: f64,
    /// Interpolated violation at the measured agreements, if inside the grid.
    pub violation_at_measured: Option<f64>,
    pub zero_crossings: usize,
    pub plus_sigma_crossings: usize,
    pub minus_sigma_crossings: usize,
    pub path: Option<PathBuf>,
    #[serde(skip)]
    pub grid: ContourGrid,
}

/// Violation map over the applicable agreements at the effective domain
/// probabilities, written as a TSV table when an output directory is set.
pub fn cmd_contour(cfg: &RunConfig) -> Result<ContourRecord> {
    let a = analyze(cfg)?;
    let eff = effective(&a)?;
    let counts = eff.n_coinc_x.zip(eff.n_coinc_k);
    let grid = contour_grid(
        &a.geometry,
        eff.mu_x,
        eff.mu_k,
        cfg.contour_resolution,
        counts,
    )
    .map_err(|e| e.at_stage("contour"))?;
    let path = match &cfg.output_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let p = dir.join(CONTOUR_FILE);
            save_contour(&grid, &p)?;
            Some(p)
        }
        None => None,
    };
    let k = cfg.sigma_multiplier;
    let record = ContourRecord {
        tool_version: TOOL_VERSION.to_string(),
        created_unix: now_unix(),
        config: cfg.file.clone(),
        mu_x: eff.mu_x,
        mu_k: eff.mu_k,
        rhs: grid.rhs,
        resolution: cfg.contour_resolution,
        sigma_multiplier: k,
        eta_x_bar: eff.eta_x_bar,
        eta_k_bar: eff.eta_k_bar,
        violation_at_measured: grid.violation_at(eff.eta_x_bar, eff.eta_k_bar),
        zero_crossings: grid.level_crossings(0.0, 0.0).len(),
        plus_sigma_crossings: grid.level_crossings(0.0, k).len(),
        minus_sigma_crossings: grid.level_crossings(0.0, -k).len(),
        path,
        grid,
    };
    if let Some(dir) = &cfg.output_dir {
        write_json(&record, dir, "contour.json")?;
    }
    Ok(record)
}

/// Output of [`cmd_keyrate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KeyRateRecord {
    pub tool_version: String,
    pub created_unix: u64,
    pub config: ConfigFile,
    pub effective: CorrelationStats,
    pub rhs: f64,
    pub key_rate: KeyRate,
    pub verdict: Verdict,
}

pub fn cmd_keyrate(cfg: &RunConfig) -> Result<KeyRateRecord> {
    let a = analyze(cfg)?;
    let eff = effective(&a)?;
    let key_rate = secret_key_rate(&eff, &a.geometry).map_err(|e| e.at_stage("key rate"))?;
    let record = KeyRateRecord {
        tool_version: TOOL_VERSION.to_string(),
        created_unix: now_unix(),
        config: cfg.file.clone(),
        effective: eff,
        rhs: steering_rhs(&a.geometry).bits,
        key_rate,
        verdict: key_rate.verdict(),
    };
    if let Some(dir) = &cfg.output_dir {
        write_json(&record, dir, "keyrate.json")?;
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn reference(extra: &str) -> RunConfig {
        let text = format!("rhs_bits = 8.284\nn_bar = 256\neta_x = 0.694\neta_k = 0.751\n{extra}");
        RunConfig::resolve(ConfigFile::parse(&text).unwrap()).unwrap()
    }

    #[test]
    fn reference_point_certifies() {
        let r = cmd_certify(&reference("")).unwrap();
        assert_eq!(r.verdict, Verdict::Certified);
        assert_abs_diff_eq!(r.certificate.violation, 2.148942472090595, epsilon = 1e-12);
        assert!(r.position.is_none());
    }

    #[test]
    fn hedged_reference_point() {
        let r = cmd_certify(&reference("mu_x = 0.997\nmu_k = 0.952\nfill_x = 0.92\n")).unwrap();
        assert_eq!(r.verdict, Verdict::Certified);
        assert_abs_diff_eq!(r.effective.mu_x, 0.997 * 0.92, epsilon = 1e-15);
        assert_abs_diff_eq!(r.certificate.violation, 0.5512210803327351, epsilon = 1e-12);
    }

    #[test]
    fn efficiency_makes_it_inapplicable() {
        let r = cmd_certify(&reference("efficiency = 0.62\n")).unwrap();
        assert_eq!(r.verdict, Verdict::Inapplicable);
        assert_eq!(r.verdict.exit_code(), 2);
    }

    #[test]
    fn hedge_common_mode() {
        let h = cmd_hedge(&reference("")).unwrap();
        assert_abs_diff_eq!(h.mu_min, 0.9101, epsilon = 1e-12);
    }

    #[test]
    fn keyrate_identity() {
        let cfg = reference("mu_x = 0.997\nmu_k = 0.952\n");
        let k = cmd_keyrate(&cfg).unwrap();
        let bx = crate::bounds::modified_fano_bound(0.694, 0.997, 256)
            .unwrap()
            .bits;
        let bk = crate::bounds::modified_fano_bound(0.751, 0.952, 256)
            .unwrap()
            .bits;
        assert_abs_diff_eq!(k.key_rate.bits, 8.284 - bx - bk, epsilon = 1e-12);
        assert_eq!(k.verdict, k.key_rate.verdict());
    }

    fn small_model(ratio: f64, extra: &str) -> RunConfig {
        let window = if extra.contains("window_pixels") {
            ""
        } else {
            "window_pixels = 20\n"
        };
        let text = format!(
            "sigma_plus = 1.0\nsigma_minus = {}\npixels_per_axis = 24\ntotal_counts = 200000\nseed = 11\n{window}{extra}",
            1.0 / ratio
        );
        RunConfig::resolve(ConfigFile::parse(&text).unwrap()).unwrap()
    }

    #[test]
    fn correlated_model_certifies_and_product_does_not() {
        let r = cmd_certify(&small_model(50.0, "")).unwrap();
        assert_eq!(r.verdict, Verdict::Certified, "{r:#?}");
        let x = r.position.as_ref().unwrap();
        assert_eq!(x.best_ordering, OrderingKind::Identity);
        assert_eq!(
            r.momentum.as_ref().unwrap().best_ordering,
            OrderingKind::Reversed
        );
        assert!(x.mu > 0.99 && x.mu <= 1.0);
        assert!(r.certificate.sigma.is_some());

        let p = cmd_certify(&small_model(1.0, "")).unwrap();
        assert_ne!(p.verdict, Verdict::Certified);
    }

    #[test]
    fn reproducible() {
        let cfg = small_model(20.0, "");
        let mut a = cmd_certify(&cfg).unwrap();
        let mut b = cmd_certify(&cfg).unwrap();
        a.created_unix = 0;
        b.created_unix = 0;
        assert_eq!(a, b);
    }

    #[test]
    fn stage_labels() {
        let cfg = small_model(50.0, "window_pixels = 21\n");
        match cmd_certify(&cfg) {
            Err(Error::Stage { stage, .. }) => assert_eq!(stage, "window"),
            other => panic!("expected a window stage error, got {other:?}"),
        }
        let cfg = RunConfig::resolve(
            ConfigFile::parse(
                "position_path = \"/nonexistent/a\"\nmomentum_path = \"/nonexistent/b\"\n",
            )
            .unwrap(),
        )
        .unwrap();
        assert!(matches!(
            cmd_certify(&cfg),
            Err(Error::Stage { stage: "load", .. })
        ));
    }

    #[test]
    fn analyze_matches_certify_statistics() {
        let cfg = small_model(50.0, "fill_x = 0.9\n");
        let a = cmd_analyze(&cfg).unwrap();
        let c = cmd_certify(&cfg).unwrap();
        assert_eq!(a.effective, c.effective);
        assert_eq!(a.position, c.position);
        assert_abs_diff_eq!(a.effective.mu_x, 0.9 * a.measured.mu_x, epsilon = 1e-15);
    }

    #[test]
    fn simulate_requires_model_and_dir() {
        assert!(cmd_simulate(&reference("")).is_err());
        assert!(cmd_simulate(&small_model(50.0, "")).is_err());
    }
}
