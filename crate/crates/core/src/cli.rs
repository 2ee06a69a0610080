//! Command-line surface: argument definitions, file formats and the command
//! implementations behind the `soliton-forge` binary.
//!
//! Spectrum files are JSON:
//!
//! ```text
//! { "eigenvalues": [0.5, 1.0],
//!   "amplitudes": [{"abs": 3.0, "phase": 0.0}, {"abs": 6.0, "phase": 1.0}] }
//! ```
//!
//! with `amplitudes` replaced by `"symmetric_with_phases": [phi...]` or
//! `"etas_and_phases": {"etas": [1.0, ...], "phases": [...]}` for the other
//! two parametrizations. Eigenvalues are the imaginary parts `sigma_k`.
//!
//! Pulse files are CSV with header `t,re_q,im_q`. Sweep tables use `;` between
//! columns and `,` inside list-valued columns. All floats are written as
//! `{:.11e}`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::json;

use crate::darboux::{numerical_energy, synthesize};
use crate::error::{Error, Result};
use crate::evolution::{evolve_spectrum, propagate_nlse, PropagationConfig, DEFAULT_MAX_STEP};
use crate::metrics::measure;
use crate::nft::{continuous_spectrum, default_sigma_max, discrete_spectrum};
use crate::optimizer::{
    logspace, optimal_pulse_gallery, optimize_eta, phase_extremes, sized_grid, EtaSearch, PhaseSearch, SweepRecord,
};
use crate::pulse::{SampledPulse, TimeGrid};
use crate::spectrum::{DiscreteSpectrum, SpectralEntry};
use crate::symmetric::{symmetric_amplitudes, EigenvalueSet, EtaVector};

pub const WORKERS_ENV: &str = "SOLITON_FORGE_WORKERS";
pub const PULSE_HEADER: &str = "t,re_q,im_q";
pub const SWEEP_HEADER: &str = "sigma_ratios;etas;epsilon;t_max;b_max;tb_per_eig;tb_ratio;error";
pub const GALLERY_HEADER: &str = "phase_index,t,abs_q";

/// Threshold used to size default grids: tails below it are dropped.
const GRID_EPSILON: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "soliton-forge", version, about = "Multi-soliton synthesis, analysis and time-bandwidth optimization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a pulse from a spectrum file and write it as CSV.
    Synth(SynthArgs),
    /// Forward NFT and energy-fraction measurement of a pulse or spectrum.
    Analyze(AnalyzeArgs),
    /// Propagate a multi-soliton along the fiber.
    Propagate(PropagateArgs),
    /// Run an eta or eigenvalue-ratio sweep into a resumable CSV table.
    Sweep(SweepArgs),
    /// Write |q(t)| traces of one configuration for several phase combinations.
    Gallery(GalleryArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct GridArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub t_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub spectrum: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, required_unless_present = "spectrum", conflicts_with = "spectrum")]
    pub pulse: Option<PathBuf>,
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    #[arg(long)]
    pub sigma_max: Option<f64>,
    #[arg(long, default_value_t = 64)]
    pub n_seed: usize,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Spectral,
    Ssfm,
    Both,
}

#[derive(Debug, Args)]
pub struct PropagateArgs {
    #[arg(long)]
    pub spectrum: PathBuf,
    #[arg(long)]
    pub z: f64,
    #[arg(long, value_enum, default_value = "both")]
    pub method: Method,
    #[arg(long, default_value_t = DEFAULT_MAX_STEP)]
    pub max_step: f64,
    /// Write the propagated pulse (split-step result unless method is spectral).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMode {
    Eta,
    Ratio,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(value_enum)]
    pub mode: SweepMode,
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; the SOLITON_FORGE_WORKERS environment variable takes precedence.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GalleryArgs {
    #[arg(long)]
    pub spectrum: PathBuf,
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 4)]
    pub phase_samples: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Amplitude {
    pub abs: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtasAndPhases {
    pub etas: Vec<f64>,
    pub phases: Vec<f64>,
}

/// Parsed spectrum file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    pub eigenvalues: Vec<f64>,
    pub amplitudes: Option<Vec<Amplitude>>,
    pub symmetric_with_phases: Option<Vec<f64>>,
    pub etas_and_phases: Option<EtasAndPhases>,
}

impl SpectrumSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SpectrumSpec = parse_json(text)?;
        let forms = [spec.amplitudes.is_some(), spec.symmetric_with_phases.is_some(), spec.etas_and_phases.is_some()];
        if forms.iter().filter(|f| **f).count() != 1 {
            return Err(Error::InvalidInput(
                "exactly one of amplitudes, symmetric_with_phases, etas_and_phases is required".into(),
            ));
        }
        Ok(spec)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&read_text(path)?).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Eigenvalues (ascending), magnitudes relative to the symmetric ones, and phases.
    pub fn relative(&self) -> Result<(EigenvalueSet, Vec<f64>, Vec<f64>)> {
        let n = self.eigenvalues.len();
        let (rel, phases): (Vec<f64>, Vec<f64>) = if let Some(p) = &self.symmetric_with_phases {
            (vec![1.0; p.len()], p.clone())
        } else if let Some(ep) = &self.etas_and_phases {
            if ep.etas.len() != ep.phases.len() {
                return Err(Error::InvalidInput("etas and phases differ in length".into()));
            }
            (ep.etas.clone(), ep.phases.clone())
        } else {
            let amps = self.amplitudes.as_ref().expect("validated");
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| self.eigenvalues[i].total_cmp(&self.eigenvalues[j]));
            let sorted: Vec<f64> = order.iter().map(|&i| self.eigenvalues[i]).collect();
            let sym = symmetric_amplitudes(&EigenvalueSet::new(sorted)?)?;
            let mut rel = vec![0.0; n];
            for (rank, &i) in order.iter().enumerate() {
                rel[i] = amps.get(i).map_or(0.0, |a| a.abs) / sym[rank];
            }
            (rel, amps.iter().map(|a| a.phase).collect())
        };
        if rel.len() != n {
            return Err(Error::InvalidInput(format!("{n} eigenvalues but {} amplitudes", rel.len())));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&i, &j| self.eigenvalues[i].total_cmp(&self.eigenvalues[j]));
        let omega = EigenvalueSet::new(idx.iter().map(|&i| self.eigenvalues[i]).collect())?;
        Ok((omega, idx.iter().map(|&i| rel[i]).collect(), idx.iter().map(|&i| phases[i]).collect()))
    }

    pub fn to_spectrum(&self) -> Result<DiscreteSpectrum> {
        if let Some(amps) = &self.amplitudes {
            if amps.len() != self.eigenvalues.len() {
                return Err(Error::InvalidInput(format!(
                    "{} eigenvalues but {} amplitudes",
                    self.eigenvalues.len(),
                    amps.len()
                )));
            }
            let entries = self
                .eigenvalues
                .iter()
                .zip(amps)
                .map(|(&s, a)| SpectralEntry::new(s, Complex64::from_polar(a.abs, a.phase)))
                .collect();
            return DiscreteSpectrum::new(entries);
        }
        let (omega, rel, phases) = self.relative()?;
        let sym = symmetric_amplitudes(&omega)?;
        let entries = omega
            .sigmas()
            .iter()
            .zip(sym.iter().zip(&rel))
            .zip(&phases)
            .map(|((&s, (&m, &r)), &p)| SpectralEntry::new(s, Complex64::from_polar(m * r, p)))
            .collect();
        DiscreteSpectrum::new(entries)
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
}

/// Scientific notation with 12 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.11e}")
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(",")
}

/// Default grid for a spectrum: tails below `1e-10` of the energy are
/// covered and the Nyquist frequency is 8 B_sep at that threshold.
pub fn default_grid(spectrum: &DiscreteSpectrum) -> Result<TimeGrid> {
    if spectrum.is_empty() {
        return TimeGrid::centered(10.0, 0.01);
    }
    let omega = EigenvalueSet::new(spectrum.sigmas())?;
    let sym = symmetric_amplitudes(&omega)?;
    let rel: Vec<f64> = spectrum.entries().iter().zip(&sym).map(|(e, s)| e.qd.norm() / s).collect();
    sized_grid(&omega, &rel, GRID_EPSILON, 8.0)
}

fn resolve_grid(args: &GridArgs, fallback: impl FnOnce() -> Result<TimeGrid>) -> Result<TimeGrid> {
    if args.t_min.is_none() && args.t_max.is_none() && args.dt.is_none() {
        return fallback();
    }
    let base = fallback()?;
    TimeGrid::spanning(
        args.t_min.unwrap_or(base.t_start()),
        args.t_max.unwrap_or(base.t_end()),
        args.dt.unwrap_or(base.dt()),
    )
}

pub fn write_pulse_csv(path: &Path, pulse: &SampledPulse) -> Result<()> {
    let mut out = String::with_capacity(64 * pulse.samples().len());
    out.push_str(PULSE_HEADER);
    out.push('\n');
    for (t, q) in pulse.grid().times().zip(pulse.samples()) {
        let _ = writeln!(out, "{},{},{}", fmt_f64(t), fmt_f64(q.re), fmt_f64(q.im));
    }
    write_text(path, &out)
}

/// Reads a pulse CSV; the time column must be uniformly spaced.
pub fn read_pulse_csv(path: &Path) -> Result<SampledPulse> {
    let text = read_text(path)?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(PULSE_HEADER) {
        return Err(Error::Parse(format!("{}: expected header {PULSE_HEADER}", path.display())));
    }
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = || Error::Parse(format!("{}: line {}: expected three numbers", path.display(), i + 2));
        let fields: Vec<f64> =
            line.split(',').map(|f| f.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        if fields.len() != 3 {
            return Err(bad());
        }
        times.push(fields[0]);
        samples.push(Complex64::new(fields[1], fields[2]));
    }
    if times.len() < 2 {
        return Err(Error::InvalidInput(format!("{}: fewer than two samples", path.display())));
    }
    let n = times.len();
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    if let Some(i) = (0..n).find(|&i| (times[i] - (times[0] + i as f64 * dt)).abs() > 1e-6 * dt) {
        return Err(Error::InvalidInput(format!("{}: time column is not uniform at row {}", path.display(), i + 1)));
    }
    SampledPulse::new(TimeGrid::new(times[0], dt, n)?, samples)
}

/// `max |q(t) - q(-t)| / max |q|` over the part of the grid whose mirror
/// image is also covered.
pub fn mirror_residual(pulse: &SampledPulse) -> f64 {
    let g = pulse.grid();
    if (g.t_start() + g.t_end()).abs() < 1e-9 * g.dt() {
        return pulse.symmetry_residual();
    }
    let peak = pulse.peak();
    if peak == 0.0 {
        return 0.0;
    }
    let reach = g.t_end().min(-g.t_start());
    g.times()
        .zip(pulse.samples())
        .filter(|(t, _)| t.abs() <= reach)
        .map(|(t, q)| (q - pulse.interpolate(-t)).norm())
        .fold(0.0, f64::max)
        / peak
}

pub fn cmd_synth(args: &SynthArgs) -> Result<String> {
    let spectrum = SpectrumSpec::read(&args.spectrum)?.to_spectrum()?;
    let grid = resolve_grid(&args.grid, || default_grid(&spectrum))?;
    let pulse = synthesize(&spectrum, &grid)?;
    write_pulse_csv(&args.out, &pulse)?;
    Ok(json!({
        "samples": pulse.samples().len(),
        "t_min": grid.t_start(),
        "t_max": grid.t_end(),
        "dt": grid.dt(),
        "peak": pulse.peak(),
        "energy": numerical_energy(&pulse),
        "expected_energy": spectrum.energy(),
        "symmetry_residual": mirror_residual(&pulse),
    })
    .to_string())
}

fn spectrum_json(spectrum: &DiscreteSpectrum) -> serde_json::Value {
    spectrum
        .entries()
        .iter()
        .map(|e| json!({"sigma": e.sigma, "qd_re": e.qd.re, "qd_im": e.qd.im, "abs": e.qd.norm(), "phase": e.qd.arg()}))
        .collect()
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<String> {
    let pulse = match (&args.pulse, &args.spectrum) {
        (Some(p), _) => read_pulse_csv(p)?,
        (None, Some(s)) => {
            let spectrum = SpectrumSpec::read(s)?.to_spectrum()?;
            let grid = resolve_grid(&args.grid, || default_grid(&spectrum))?;
            synthesize(&spectrum, &grid)?
        }
        (None, None) => return Err(Error::InvalidInput("either --pulse or --spectrum is required".into())),
    };
    let sigma_max = args.sigma_max.unwrap_or_else(|| default_sigma_max(&pulse));
    let spectrum = discrete_spectrum(&pulse, sigma_max, args.n_seed)?;
    let energy = numerical_energy(&pulse);
    let mut report = json!({
        "eigenvalues": spectrum.sigmas(),
        "spectrum": spectrum_json(&spectrum),
        "energy": energy,
        "discrete_energy": spectrum.energy(),
    });
    // Reflection coefficient on a real-frequency grid; near zero for pure multi-solitons.
    let reach = default_sigma_max(&pulse);
    let xi: Vec<f64> = (0..=40).map(|i| -reach + 2.0 * reach * i as f64 / 40.0).collect();
    let qc = continuous_spectrum(&pulse, &xi)?;
    report["continuous_residual"] = json!(qc.iter().map(|q| q.norm()).fold(0.0, f64::max));
    if energy > 0.0 {
        let m = measure(&pulse, args.epsilon, energy)?;
        report["epsilon"] = json!(args.epsilon);
        report["t_w"] = json!(m.t_w);
        report["b_w"] = json!(m.b_w);
        report["tb"] = json!(m.time_bandwidth());
    }
    Ok(report.to_string())
}

pub fn cmd_propagate(args: &PropagateArgs) -> Result<String> {
    let spectrum = SpectrumSpec::read(&args.spectrum)?.to_spectrum()?;
    let evolved = evolve_spectrum(&spectrum, args.z);
    let mut report = json!({"z": args.z});
    let factors: Vec<_> = spectrum
        .entries()
        .iter()
        .zip(evolved.entries())
        .map(|(a, b)| {
            let f = b.qd / a.qd;
            json!({"sigma": a.sigma, "factor_re": f.re, "factor_im": f.im})
        })
        .collect();
    report["spectrum"] = spectrum_json(&evolved);
    report["rotation"] = json!(factors);
    if args.method == Method::Spectral && args.out.is_none() {
        return Ok(report.to_string());
    }

    let grid = resolve_grid(&args.grid, || default_grid(&spectrum))?;
    let spectral = if args.method != Method::Ssfm { Some(synthesize(&evolved, &grid)?) } else { None };
    let ssfm = if args.method != Method::Spectral {
        let config = PropagationConfig::with_max_step(args.z, args.max_step)?;
        report["steps"] = json!(config.n_steps);
        Some(propagate_nlse(&synthesize(&spectrum, &grid)?, &config)?)
    } else {
        None
    };
    if let (Some(a), Some(b)) = (&spectral, &ssfm) {
        let d = a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        report["max_discrepancy"] = json!(d);
    }
    if let Some(out) = &args.out {
        write_pulse_csv(out, ssfm.as_ref().or(spectral.as_ref()).expect("one method ran"))?;
    }
    Ok(report.to_string())
}

fn default_coarse_n() -> usize {
    PhaseSearch::default().coarse_n
}

fn default_refine_rounds() -> usize {
    PhaseSearch::default().refine_rounds
}

/// Logarithmic axis `{min, max, points}`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogAxis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

/// Parameter file of `sweep eta`.
///
/// `etas` lists full vectors (starting with 1); `eta_logspace` adds the
/// product grid of that axis over every free magnitude.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaSweepParams {
    pub eigenvalues: Vec<f64>,
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub etas: Vec<Vec<f64>>,
    pub eta_logspace: Option<LogAxis>,
    #[serde(default = "default_coarse_n")]
    pub coarse_n: usize,
    #[serde(default = "default_refine_rounds")]
    pub refine_rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EtaSearchParams {
    pub points_per_decade: usize,
    pub eta_min: f64,
    pub refine_rounds: usize,
    pub refine_points: usize,
}

impl Default for EtaSearchParams {
    fn default() -> Self {
        let d = EtaSearch::default();
        EtaSearchParams {
            points_per_decade: d.points_per_decade,
            eta_min: d.eta_min,
            refine_rounds: d.refine_rounds,
            refine_points: d.refine_points,
        }
    }
}

/// Parameter file of `sweep ratio`.
///
/// `ratios` lists `[sigma_2/sigma_1, ...]` vectors; `ratio_axes` adds the
/// strictly ascending points of the product of the given axes.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioSweepParams {
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub ratios: Vec<Vec<f64>>,
    pub ratio_axes: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub eta_search: EtaSearchParams,
    #[serde(default = "default_coarse_n")]
    pub coarse_n: usize,
    #[serde(default = "default_refine_rounds")]
    pub refine_rounds: usize,
}

fn product(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect()
    })
}

#[derive(Debug, Clone)]
enum Job {
    Eta { omega: EigenvalueSet, etas: EtaVector, epsilon: f64, search: PhaseSearch },
    Ratio { ratios: Vec<f64>, epsilon: f64, search: EtaSearch },
}

impl Job {
    /// Input tuple identifying the job in an existing table: the sigma_ratios,
    /// etas (eta mode only) and epsilon columns.
    fn key(&self) -> (String, String, String) {
        match self {
            Job::Eta { omega, etas, epsilon, .. } => {
                (fmt_list(&omega.ratios()), fmt_list(etas.etas()), fmt_f64(*epsilon))
            }
            Job::Ratio { ratios, epsilon, .. } => {
                let mut r = vec![1.0];
                r.extend_from_slice(ratios);
                (fmt_list(&r), String::new(), fmt_f64(*epsilon))
            }
        }
    }

    fn run(&self) -> Result<SweepRecord> {
        match self {
            Job::Eta { omega, etas, epsilon, search } => {
                let r = phase_extremes(omega, etas, *epsilon, search)?;
                SweepRecord::new(omega, etas, *epsilon, r.t_max, r.b_max)
            }
            Job::Ratio { ratios, epsilon, search } => {
                let omega = EigenvalueSet::from_ratios(0.5, ratios)?;
                Ok(optimize_eta(&omega, *epsilon, search)?.1)
            }
        }
    }

    fn line(&self, outcome: &Result<SweepRecord>) -> String {
        match outcome {
            Ok(r) => format!(
                "{};{};{};{};{};{};{};",
                fmt_list(&r.sigma_ratios),
                fmt_list(&r.etas),
                fmt_f64(r.epsilon),
                fmt_f64(r.t_max),
                fmt_f64(r.b_max),
                fmt_f64(r.tb_per_eig),
                fmt_f64(r.tb_ratio_vs_1soliton)
            ),
            Err(e) => {
                let (ratios, etas, eps) = self.key();
                let msg = e.to_string().replace([';', '\n', '\r'], " ");
                format!("{ratios};{etas};{eps};;;;;{msg}")
            }
        }
    }
}

fn check_epsilons(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(Error::InvalidInput("epsilons is empty".into()));
    }
    if let Some(e) = eps.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1), got {e}")));
    }
    Ok(())
}

fn check_phase_search(coarse_n: usize, refine_rounds: usize) -> Result<PhaseSearch> {
    if coarse_n < 2 {
        return Err(Error::InvalidInput(format!("coarse_n must be at least 2, got {coarse_n}")));
    }
    Ok(PhaseSearch { coarse_n, refine_rounds })
}

fn eta_jobs(p: &EtaSweepParams) -> Result<Vec<Job>> {
    check_epsilons(&p.epsilons)?;
    let search = check_phase_search(p.coarse_n, p.refine_rounds)?;
    let mut sigmas = p.eigenvalues.clone();
    sigmas.sort_by(f64::total_cmp);
    let omega = EigenvalueSet::new(sigmas)?;
    let mut vectors: Vec<EtaVector> = p.etas.iter().map(|e| EtaVector::new(e.clone())).collect::<Result<_>>()?;
    if let Some(ax) = &p.eta_logspace {
        if ax.points == 0 || !(ax.min > 0.0 && ax.max >= ax.min) {
            return Err(Error::InvalidInput(format!("bad eta_logspace {ax:?}")));
        }
        let axis = logspace(ax.min, ax.max, ax.points);
        for free in product(&vec![axis; omega.len() - 1]) {
            vectors.push(EtaVector::from_free(&free)?);
        }
    }
    if vectors.is_empty() {
        return Err(Error::InvalidInput("the eta grid is empty".into()));
    }
    if let Some(v) = vectors.iter().find(|v| v.len() != omega.len()) {
        return Err(Error::InvalidInput(format!("{} eigenvalues but etas {:?}", omega.len(), v.etas())));
    }
    Ok(p.epsilons
        .iter()
        .flat_map(|&epsilon| {
            let omega = omega.clone();
            vectors.iter().map(move |etas| Job::Eta { omega: omega.clone(), etas: etas.clone(), epsilon, search })
        })
        .collect())
}

fn ratio_jobs(p: &RatioSweepParams) -> Result<Vec<Job>> {
    check_epsilons(&p.epsilons)?;
    let phases = check_phase_search(p.coarse_n, p.refine_rounds)?;
    let e = &p.eta_search;
    let search = EtaSearch {
        points_per_decade: e.points_per_decade,
        eta_min: e.eta_min,
        refine_rounds: e.refine_rounds,
        refine_points: e.refine_points,
        phases,
    };
    if search.points_per_decade == 0 || search.refine_points < 2 || !(search.eta_min > 0.0 && search.eta_min < 1.0) {
        return Err(Error::InvalidInput(format!("invalid eta_search {e:?}")));
    }
    let mut grid = p.ratios.clone();
    if let Some(axes) = &p.ratio_axes {
        grid.extend(product(axes).into_iter().filter(|r| r.windows(2).all(|w| w[1] > w[0])));
    }
    if grid.is_empty() {
        return Err(Error::InvalidInput("the ratio grid is empty".into()));
    }
    for r in &grid {
        if r.is_empty() || r.iter().any(|x| !(*x > 1.0)) || r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(format!("ratios must be ascending and exceed 1: {r:?}")));
        }
    }
    Ok(p.epsilons
        .iter()
        .flat_map(|&epsilon| grid.iter().map(move |r| Job::Ratio { ratios: r.clone(), epsilon, search }))
        .collect())
}

/// Completed rows of an existing table, keyed by input tuple.
fn load_completed(path: &Path, mode: SweepMode) -> Result<HashMap<(String, String, String), String>> {
    let mut done = HashMap::new();
    if !path.exists() {
        return Ok(done);
    }
    let text = read_text(path)?;
    let mut lines = text.lines();
    match lines.next() {
        None => return Ok(done),
        Some(h) if h == SWEEP_HEADER => {}
        Some(_) => {
            return Err(Error::InvalidInput(format!("{} exists and is not a sweep table", path.display())));
        }
    }
    for line in lines {
        let f: Vec<&str> = line.split(';').collect();
        // A torn last line from an interrupted run has fewer fields.
        if f.len() != 8 || !f[7].is_empty() || f[6].is_empty() {
            continue;
        }
        let etas = if mode == SweepMode::Eta { f[1].to_string() } else { String::new() };
        done.insert((f[0].to_string(), etas, f[2].to_string()), line.to_string());
    }
    Ok(done)
}

/// Worker count: the environment variable wins over the flag.
pub fn resolve_workers(flag: Option<usize>) -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) if !v.trim().is_empty() => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidInput(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
        _ => match flag {
            Some(0) => Err(Error::InvalidInput("--workers must be positive".into())),
            other => Ok(other),
        },
    }
}

/// Runs `f` on a pool of `workers` threads, or the global pool for `None`.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidInput(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Sweep summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepSummary {
    pub computed: usize,
    pub reused: usize,
    pub failed: usize,
}

/// Runs a sweep into `out`, reusing completed rows of an existing table.
///
/// New rows are appended as they finish, so an interrupted run keeps its
/// progress; the table is rewritten in input order at the end.
pub fn run_sweep(mode: SweepMode, params: &str, out: &Path, workers: Option<usize>) -> Result<SweepSummary> {
    let jobs = match mode {
        SweepMode::Eta => eta_jobs(&parse_json(params)?)?,
        SweepMode::Ratio => ratio_jobs(&parse_json(params)?)?,
    };
    let done = load_completed(out, mode)?;
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", out.display()));
    let finish = |lines: &[&String]| -> Result<()> {
        let mut text = String::from(SWEEP_HEADER);
        text.push('\n');
        for l in lines {
            text.push_str(l);
            text.push('\n');
        }
        let tmp = out.with_extension("tmp");
        write_text(&tmp, &text)?;
        fs::rename(&tmp, out).map_err(io)
    };
    // Drop torn or failed rows before appending.
    finish(&jobs.iter().filter_map(|j| done.get(&j.key())).collect::<Vec<_>>())?;
    let mut file = fs::OpenOptions::new().append(true).open(out).map_err(io)?;
    let mut lines = Vec::with_capacity(jobs.len());
    let mut summary = SweepSummary { computed: 0, reused: 0, failed: 0 };
    let mut first_error = None;
    for job in &jobs {
        if let Some(line) = done.get(&job.key()) {
            summary.reused += 1;
            lines.push(line.clone());
            continue;
        }
        let outcome = with_workers(workers, || job.run())?;
        let line = job.line(&outcome);
        match outcome {
            Ok(_) => summary.computed += 1,
            Err(e) => {
                summary.failed += 1;
                first_error.get_or_insert(e);
            }
        }
        writeln!(file, "{line}").and_then(|_| file.flush()).map_err(io)?;
        lines.push(line);
    }
    drop(file);
    finish(&lines.iter().collect::<Vec<_>>())?;
    match first_error {
        Some(e) if summary.computed + summary.reused == 0 => Err(e),
        _ => Ok(summary),
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<String> {
    let params = read_text(&args.params)?;
    let workers = resolve_workers(args.workers)?;
    let s = run_sweep(args.mode, &params, &args.out, workers).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", args.params.display())),
        other => other,
    })?;
    Ok(json!({"computed": s.computed, "reused": s.reused, "failed": s.failed}).to_string())
}

pub fn cmd_gallery(args: &GalleryArgs) -> Result<String> {
    let spec = SpectrumSpec::read(&args.spectrum)?;
    let (omega, rel, _) = spec.relative()?;
    if (rel[0] - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "the smallest eigenvalue must have eta = 1 (got {}); shift the pulse in time instead",
            rel[0]
        )));
    }
    let mut rel = rel;
    rel[0] = 1.0;
    let etas = EtaVector::new(rel)?;
    let pulses = optimal_pulse_gallery(&omega, &etas, args.epsilon, args.phase_samples)?;
    let mut out = String::from(GALLERY_HEADER);
    out.push('\n');
    for (i, p) in pulses.iter().enumerate() {
        for (t, q) in p.grid().times().zip(p.samples()) {
            let _ = writeln!(out, "{i},{},{}", fmt_f64(t), fmt_f64(q.norm()));
        }
    }
    write_text(&args.out, &out)?;
    let energies: Vec<f64> = pulses.iter().map(numerical_energy).collect();
    Ok(json!({"traces": pulses.len(), "samples": pulses[0].samples().len(), "energies": energies}).to_string())
}

pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Propagate(a) => cmd_propagate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Gallery(a) => cmd_gallery(a),
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(report) => {
            println!("{report}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
