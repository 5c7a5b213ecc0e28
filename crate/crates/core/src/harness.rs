//! Experiment driver behind the `oscifd` command line tool.
//!
//! Every command takes an [`ExperimentConfig`] and returns a [`Report`]
//! holding the process exit code, a human-readable summary and, for the
//! table commands, a CSV body.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Deserialize;

use crate::diagnostics::{fit_order, max_error, max_error_fn, ConservationSeries};
use crate::error::{Error, Result};
use crate::grid::{sample_initial_data, Grid};
use crate::mesh::Discretization;
use crate::modulation::{defect_cn, defect_leapfrog, dominant_term, Envelope};
use crate::planner::{evaluate_direct, evaluate_plan, PlanRequest, PlanResult, DEFAULT_M_WINDOW};
use crate::schemes::{
    run, BootstrapMethod, CnConfig, CnForm, Predictor, RunConfig, RunOutcome, SchemeKind,
};
use crate::setup::{EnvelopeProfile, PhysicalSetup};
use crate::spectral::run_reference;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_REJECTED: u8 = 2;
pub const EXIT_BLOWUP: u8 = 3;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub physics: PhysicsConfig,
    pub discretization: DiscretizationConfig,
    #[serde(default)]
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub reference: ReferenceConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub epsilon: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub domain: [f64; 2],
    pub final_time: f64,
    pub envelope: EnvelopeConfig,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvelopeConfig {
    Constant {
        #[serde(default = "one")]
        amplitude: f64,
    },
    Gaussian {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        sigma: f64,
        #[serde(default)]
        center: f64,
    },
    /// Equispaced samples over the domain, starting at its left end.
    Tabulated {
        re: Vec<f64>,
        #[serde(default)]
        im: Vec<f64>,
    },
}

impl EnvelopeConfig {
    pub fn profile(&self) -> Result<EnvelopeProfile> {
        Ok(match self {
            EnvelopeConfig::Constant { amplitude } => EnvelopeProfile::constant(*amplitude),
            EnvelopeConfig::Gaussian {
                amplitude,
                sigma,
                center,
            } => EnvelopeProfile::gaussian(*amplitude, *sigma, *center),
            EnvelopeConfig::Tabulated { re, im } => {
                if !im.is_empty() && im.len() != re.len() {
                    return Err(Error::InvalidInput(
                        "tabulated envelope: re and im differ in length".into(),
                    ));
                }
                let samples: Vec<Complex64> = re
                    .iter()
                    .enumerate()
                    .map(|(j, r)| Complex64::new(*r, im.get(j).copied().unwrap_or(0.0)))
                    .collect();
                EnvelopeProfile::tabulated(&samples)?
            }
        })
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    pub direct: Option<DirectConfig>,
    pub planner: Option<PlannerConfig>,
}

/// Given `tau` and `h`; `tau` may instead follow `tau_factor * h^tau_power`
/// so that sweeps over `h` keep a fixed relation.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectConfig {
    pub h: Option<f64>,
    pub tau: Option<f64>,
    pub tau_factor: Option<f64>,
    #[serde(default = "one")]
    pub tau_power: f64,
}

impl DirectConfig {
    fn tau_for(&self, h: f64) -> Result<f64> {
        match (self.tau, self.tau_factor) {
            (Some(t), None) => Ok(t),
            (None, Some(f)) => Ok(f * h.powf(self.tau_power)),
            _ => Err(Error::InvalidInput(
                "direct discretization needs exactly one of tau and tau_factor".into(),
            )),
        }
    }
}

fn default_branch() -> i64 {
    1
}

fn default_theta() -> f64 {
    0.9
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerConfig {
    pub rho: f64,
    #[serde(default = "default_branch")]
    pub alpha_branch: i64,
    #[serde(default = "default_branch")]
    pub beta_branch: i64,
    #[serde(default = "default_theta")]
    pub theta_max: f64,
    pub target_m: Option<usize>,
    pub m_window: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeSelection {
    Leapfrog,
    CrankNicolson,
    Both,
}

impl SchemeSelection {
    pub fn schemes(&self) -> Vec<SchemeKind> {
        match self {
            SchemeSelection::Leapfrog => vec![SchemeKind::Leapfrog],
            SchemeSelection::CrankNicolson => vec![SchemeKind::CrankNicolson],
            SchemeSelection::Both => vec![SchemeKind::Leapfrog, SchemeKind::CrankNicolson],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeConfig {
    pub kind: SchemeSelection,
    pub fixed_point_tol: f64,
    pub max_iterations: usize,
    pub predictor: Predictor,
    pub bootstrap: BootstrapMethod,
    pub cn_form: CnForm,
    pub blowup_factor: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        let run = RunConfig::default();
        Self {
            kind: SchemeSelection::CrankNicolson,
            fixed_point_tol: run.cn.fixed_point_tol,
            max_iterations: run.cn.max_iterations,
            predictor: run.cn.predictor,
            bootstrap: run.bootstrap,
            cn_form: run.cn_form,
            blowup_factor: run.blowup_factor,
        }
    }
}

impl SchemeConfig {
    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            cn: CnConfig {
                fixed_point_tol: self.fixed_point_tol,
                max_iterations: self.max_iterations,
                predictor: self.predictor,
            },
            bootstrap: self.bootstrap,
            cn_form: self.cn_form,
            blowup_factor: self.blowup_factor,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReferenceConfig {
    pub enabled: bool,
    /// Reference grid size as a multiple of the scheme grid size.
    pub m_ref_multiplier: usize,
    pub tau_ref: f64,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            m_ref_multiplier: 16,
            tau_ref: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    /// Every `stride`-th time level is written by `conserve`.
    pub stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            path: None,
            stride: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.discretization.direct, &self.discretization.planner) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => return Err(Error::InvalidInput(
                "exactly one of [discretization.direct] and [discretization.planner] is required"
                    .into(),
            )),
        }
        if self.output.stride == 0 {
            return Err(Error::InvalidInput("output stride must be positive".into()));
        }
        if self.reference.enabled
            && (self.reference.m_ref_multiplier == 0 || !(self.reference.tau_ref > 0.0))
        {
            return Err(Error::InvalidInput(
                "reference needs a positive multiplier and tau_ref".into(),
            ));
        }
        self.scheme.run_config().cn.validate()?;
        self.setup()?;
        Ok(())
    }

    pub fn setup(&self) -> Result<PhysicalSetup> {
        let p = &self.physics;
        PhysicalSetup::new(
            p.epsilon,
            p.kappa,
            p.lambda,
            (p.domain[0], p.domain[1]),
            p.final_time,
            p.envelope.profile()?,
        )
    }

    pub fn is_planner(&self) -> bool {
        self.discretization.planner.is_some()
    }

    /// Plans the mesh for one scheme; `h` overrides the configured mesh
    /// width (planner mode: `target_m = round(L / h)`).
    pub fn plan_for(&self, scheme: SchemeKind, h: Option<f64>) -> Result<PlanResult> {
        let setup = self.setup()?;
        if let Some(p) = &self.discretization.planner {
            let mut req = PlanRequest::new(setup.clone(), p.rho, p.alpha_branch, scheme);
            req.beta_branch = p.beta_branch;
            req.theta_max = p.theta_max;
            req.m_window = p.m_window.unwrap_or(DEFAULT_M_WINDOW);
            req.target_m = match h {
                Some(h) => Some((setup.length() / h).round().max(2.0) as usize),
                None => p.target_m,
            };
            evaluate_plan(&req)
        } else {
            let d = self.discretization.direct.as_ref().expect("validated");
            let h = h.or(d.h).ok_or_else(|| {
                Error::InvalidInput("direct discretization needs h (config or --h-list)".into())
            })?;
            evaluate_direct(&setup, d.tau_for(h)?, h, scheme, 1.0)
        }
    }

    /// Largest acceptable leapfrog stability bound for this configuration.
    fn theta_max(&self) -> f64 {
        self.discretization
            .planner
            .as_ref()
            .map_or(1.0, |p| p.theta_max)
    }
}

/// Result of one command.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub exit_code: u8,
    pub summary: String,
    pub csv: Option<String>,
}

pub fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn describe_plan(out: &mut String, scheme: SchemeKind, p: &PlanResult, setup: &PhysicalSetup) {
    use std::fmt::Write;
    let d = &p.disc;
    let f = &d.filters;
    let _ = writeln!(out, "scheme          {}", scheme.name());
    let _ = writeln!(
        out,
        "mode            {}",
        if p.planned { "planner" } else { "direct" }
    );
    let _ = writeln!(out, "alpha           {:.16e}", d.alpha.value());
    let _ = writeln!(out, "beta            {:.16e}", d.beta);
    let _ = writeln!(out, "tau             {:.16e}", d.tau);
    let _ = writeln!(out, "h               {:.16e}", d.h());
    let _ = writeln!(out, "M               {}", d.m());
    let _ = writeln!(out, "N               {}", d.n);
    let _ = writeln!(out, "final_time      {:.16e}", d.final_time());
    let _ = writeln!(out, "sinc(alpha)     {:.16e}", f.sinc_alpha);
    let _ = writeln!(out, "tanc(alpha)     {:.16e}", f.tanc_alpha);
    let _ = writeln!(out, "phi(beta)       {:.16e}", f.phi_beta);
    let _ = writeln!(out, "psi(beta)       {:.16e}", f.psi_beta);
    let _ = writeln!(out, "rho_alpha       {:.16e}", d.rho_alpha(setup));
    let _ = writeln!(out, "rho_beta        {:.16e}", d.rho_beta(setup));
    if p.planned {
        let _ = writeln!(out, "rho_eff         {:.16e}", d.rho_eff);
        let _ = writeln!(out, "residual_alpha  {:.3e}", p.residual_alpha);
        let _ = writeln!(out, "residual_beta   {:.3e}", p.residual_beta);
    }
    let _ = writeln!(out, "mu_max          {:.16e}", p.stability.mu_max);
    let _ = writeln!(out, "bound_value     {:.16e}", p.stability.bound_value);
    let _ = writeln!(out, "accepted        {}", p.accepted);
}

pub fn cmd_plan(cfg: &ExperimentConfig) -> Result<Report> {
    let setup = cfg.setup()?;
    let mut summary = String::new();
    let mut exit_code = EXIT_OK;
    for scheme in cfg.scheme.kind.schemes() {
        let p = cfg.plan_for(scheme, None)?;
        describe_plan(&mut summary, scheme, &p, &setup);
        summary.push('\n');
        let stable = scheme != SchemeKind::Leapfrog || p.stability.bound_value <= cfg.theta_max();
        if cfg.is_planner() && !p.accepted || !stable {
            exit_code = EXIT_REJECTED;
        }
    }
    Ok(Report {
        exit_code,
        summary,
        csv: None,
    })
}

/// Runs one scheme on a planned mesh.
fn run_case(
    cfg: &ExperimentConfig,
    setup: &PhysicalSetup,
    scheme: SchemeKind,
    disc: &Discretization,
    observer: impl FnMut(usize, &crate::grid::GridFunction),
) -> Result<RunOutcome> {
    let u0 = sample_initial_data(setup, disc.grid);
    run(scheme, u0, setup, disc, &cfg.scheme.run_config(), observer)
}

fn rejection_message(p: &PlanResult, theta_max: f64) -> String {
    format!(
        "stability bound {:.6} exceeds theta_max {theta_max}; decrease tau/h",
        p.stability.bound_value
    )
}

pub fn cmd_run(cfg: &ExperimentConfig) -> Result<Report> {
    use std::fmt::Write;
    let setup = cfg.setup()?;
    let env = Envelope::new(&setup);
    let mut rows = Vec::new();
    let mut summary = String::new();
    let mut exit_code = EXIT_OK;
    for scheme in cfg.scheme.kind.schemes() {
        let p = cfg.plan_for(scheme, None)?;
        if scheme == SchemeKind::Leapfrog && p.stability.bound_value > cfg.theta_max() {
            if cfg.is_planner() {
                let _ = writeln!(
                    summary,
                    "{}: {}",
                    scheme.name(),
                    rejection_message(&p, cfg.theta_max())
                );
                exit_code = exit_code.max(EXIT_REJECTED);
                continue;
            }
            log::warn!(
                "leapfrog stability bound {:.4} exceeds 1",
                p.stability.bound_value
            );
        }
        let d = &p.disc;
        match run_case(cfg, &setup, scheme, d, |_, _| {})? {
            RunOutcome::Completed(u) => {
                let err = max_error_fn(&u, |x| dominant_term(&env, setup.epsilon, u.time, x));
                let _ = writeln!(
                    summary,
                    "{}: completed {} steps to t = {:.6}, max error vs dominant term {:.6e}",
                    scheme.name(),
                    d.n,
                    u.time,
                    err
                );
                for (x, v) in u.grid.nodes().zip(&u.values) {
                    rows.push(vec![
                        scheme.name().to_string(),
                        fmt_f(u.time),
                        fmt_f(x),
                        fmt_f(v.re),
                        fmt_f(v.im),
                        fmt_f(v.norm()),
                    ]);
                }
            }
            RunOutcome::BlowUp { step, last } => {
                let _ = writeln!(
                    summary,
                    "{}: blow-up detected at step {step} (t = {:.6}), last finite max norm {:.3e}",
                    scheme.name(),
                    step as f64 * d.tau,
                    last.max_norm()
                );
                exit_code = EXIT_BLOWUP;
            }
        }
    }
    Ok(Report {
        exit_code,
        summary,
        csv: Some(csv_string(&["scheme", "t", "x", "re", "im", "abs"], &rows)?),
    })
}

struct ConvergeRow {
    scheme: SchemeKind,
    h: f64,
    tau: f64,
    m: usize,
    n: usize,
    err_reference: Option<f64>,
    err_dominant: Option<f64>,
    error: String,
}

fn converge_row(
    cfg: &ExperimentConfig,
    setup: &PhysicalSetup,
    scheme: SchemeKind,
    h: Option<f64>,
) -> ConvergeRow {
    let mut row = ConvergeRow {
        scheme,
        h: h.unwrap_or(f64::NAN),
        tau: f64::NAN,
        m: 0,
        n: 0,
        err_reference: None,
        err_dominant: None,
        error: String::new(),
    };
    let p = match cfg.plan_for(scheme, h) {
        Ok(p) => p,
        Err(e) => {
            row.error = e.to_string();
            return row;
        }
    };
    let d = &p.disc;
    row.h = d.h();
    row.tau = d.tau;
    row.m = d.m();
    row.n = d.n;
    if scheme == SchemeKind::Leapfrog && cfg.is_planner() && !p.accepted {
        row.error = rejection_message(&p, cfg.theta_max());
        return row;
    }
    let u = match run_case(cfg, setup, scheme, d, |_, _| {}) {
        Ok(RunOutcome::Completed(u)) => u,
        Ok(RunOutcome::BlowUp { step, .. }) => {
            row.error = format!("blow-up at step {step}");
            return row;
        }
        Err(e) => {
            row.error = e.to_string();
            return row;
        }
    };
    let env = Envelope::new(setup);
    row.err_dominant = Some(max_error_fn(&u, |x| {
        dominant_term(&env, setup.epsilon, u.time, x)
    }));
    if cfg.reference.enabled {
        let fine = Grid::for_setup(setup, d.m() * cfg.reference.m_ref_multiplier);
        let reference = sample_initial_data(setup, fine);
        match run_reference(&reference, setup, cfg.reference.tau_ref, u.time)
            .and_then(|r| max_error(&u, &r))
        {
            Ok(e) => row.err_reference = Some(e),
            Err(e) => row.error = e.to_string(),
        }
    }
    row
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

pub fn cmd_converge(cfg: &ExperimentConfig, h_list: &[f64]) -> Result<Report> {
    let setup = cfg.setup()?;
    let hs: Vec<Option<f64>> = if h_list.is_empty() {
        vec![None]
    } else {
        h_list.iter().copied().map(Some).collect()
    };
    let jobs: Vec<(SchemeKind, Option<f64>)> = cfg
        .scheme
        .kind
        .schemes()
        .into_iter()
        .flat_map(|s| hs.iter().map(move |h| (s, *h)))
        .collect();
    let results: Vec<ConvergeRow> = jobs
        .par_iter()
        .map(|(s, h)| converge_row(cfg, &setup, *s, *h))
        .collect();
    let mut rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            vec![
                r.scheme.name().to_string(),
                fmt_f(r.h),
                fmt_f(r.tau),
                r.m.to_string(),
                r.n.to_string(),
                opt(r.err_reference),
                opt(r.err_dominant),
                r.error.clone(),
            ]
        })
        .collect();
    let mut summary = String::new();
    for scheme in cfg.scheme.kind.schemes() {
        let mine: Vec<&ConvergeRow> = results.iter().filter(|r| r.scheme == scheme).collect();
        let fit = |pick: fn(&ConvergeRow) -> Option<f64>| -> Option<f64> {
            let pts: Vec<(f64, f64)> = mine
                .iter()
                .filter_map(|r| pick(r).map(|e| (r.h, e)))
                .collect();
            if pts.len() < 3 {
                return None;
            }
            let (h, e): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            fit_order(&h, &e).ok()
        };
        let o_ref = fit(|r| r.err_reference);
        let o_dom = fit(|r| r.err_dominant);
        if hs.len() >= 3 {
            rows.push(vec![
                scheme.name().to_string(),
                "order".to_string(),
                String::new(),
                String::new(),
                String::new(),
                opt(o_ref),
                opt(o_dom),
                String::new(),
            ]);
            summary.push_str(&format!(
                "{}: fitted order vs reference {}, vs dominant term {}\n",
                scheme.name(),
                o_ref.map_or("n/a".into(), |o| format!("{o:.3}")),
                o_dom.map_or("n/a".into(), |o| format!("{o:.3}")),
            ));
        }
    }
    let csv = csv_string(
        &[
            "scheme",
            "h",
            "tau",
            "M",
            "N",
            "err_vs_reference",
            "err_vs_dominant_term",
            "error",
        ],
        &rows,
    )?;
    let exit_code = if results.iter().any(|r| r.error.starts_with("blow-up")) {
        EXIT_BLOWUP
    } else {
        EXIT_OK
    };
    Ok(Report {
        exit_code,
        summary,
        csv: Some(csv),
    })
}

pub fn cmd_conserve(cfg: &ExperimentConfig) -> Result<Report> {
    use std::fmt::Write;
    let setup = cfg.setup()?;
    let stride = cfg.output.stride;
    let mut rows = Vec::new();
    let mut summary = String::new();
    let mut exit_code = EXIT_OK;
    for scheme in cfg.scheme.kind.schemes() {
        let p = cfg.plan_for(scheme, None)?;
        if scheme == SchemeKind::Leapfrog && cfg.is_planner() && !p.accepted {
            let _ = writeln!(
                summary,
                "{}: {}",
                scheme.name(),
                rejection_message(&p, cfg.theta_max())
            );
            exit_code = exit_code.max(EXIT_REJECTED);
            continue;
        }
        let d = &p.disc;
        // the one-step form conserves the energy built with the halved step
        let one_step = scheme == SchemeKind::CrankNicolson && cfg.scheme.cn_form == CnForm::OneStep;
        let energy_disc = if one_step {
            d.halved_step(&setup)?
        } else {
            d.clone()
        };
        let mut series = ConservationSeries::new(!one_step);
        let outcome = run_case(cfg, &setup, scheme, d, |step, u| {
            let (dm, de) = series.record(u, &setup, &energy_disc);
            if step % stride == 0 || step == d.n {
                rows.push(vec![
                    scheme.name().to_string(),
                    fmt_f(u.time),
                    fmt_f(series.mass[step]),
                    fmt_f(series.energy[step]),
                    fmt_f(dm),
                    fmt_f(de),
                    "ok".to_string(),
                ]);
            }
        })?;
        if let RunOutcome::BlowUp { step, .. } = outcome {
            rows.push(vec![
                scheme.name().to_string(),
                fmt_f(step as f64 * d.tau),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                "blowup".to_string(),
            ]);
            let _ = writeln!(
                summary,
                "{}: blow-up at t = {:.6}",
                scheme.name(),
                step as f64 * d.tau
            );
            exit_code = EXIT_BLOWUP;
        }
        let _ = writeln!(
            summary,
            "{}: max relative mass drift {:.3e}, energy drift {:.3e} (same-parity levels); \
             across all levels {:.3e} / {:.3e}",
            scheme.name(),
            series.rel_mass_drift,
            series.rel_energy_drift,
            series.cross_mass_drift,
            series.cross_energy_drift
        );
    }
    Ok(Report {
        exit_code,
        summary,
        csv: Some(csv_string(
            &[
                "scheme",
                "t",
                "mass",
                "energy",
                "rel_mass_drift",
                "rel_energy_drift",
                "status",
            ],
            &rows,
        )?),
    })
}

pub fn cmd_defect(cfg: &ExperimentConfig, h_list: &[f64]) -> Result<Report> {
    let setup = cfg.setup()?;
    let env = Envelope::new(&setup);
    let t = 0.5 * setup.final_time;
    let jobs: Vec<(SchemeKind, f64)> = cfg
        .scheme
        .kind
        .schemes()
        .into_iter()
        .flat_map(|s| h_list.iter().map(move |h| (s, *h)))
        .collect();
    let rows: Vec<Vec<String>> = jobs
        .par_iter()
        .map(|(scheme, h)| match cfg.plan_for(*scheme, Some(*h)) {
            Ok(p) => {
                let sample = match scheme {
                    SchemeKind::Leapfrog => defect_leapfrog(&env, &setup, &p.disc, t),
                    SchemeKind::CrankNicolson => defect_cn(&env, &setup, &p.disc, t),
                };
                vec![
                    scheme.name().to_string(),
                    fmt_f(p.disc.tau),
                    fmt_f(p.disc.h()),
                    fmt_f(sample.max_norm),
                    fmt_f(sample.wiener_norm),
                    sample.consistent.to_string(),
                    String::new(),
                ]
            }
            Err(e) => vec![
                scheme.name().to_string(),
                String::new(),
                fmt_f(*h),
                String::new(),
                String::new(),
                String::new(),
                e.to_string(),
            ],
        })
        .collect();
    Ok(Report {
        exit_code: EXIT_OK,
        summary: format!("defect at t = {t} for {} meshes\n", h_list.len()),
        csv: Some(csv_string(
            &[
                "scheme",
                "tau",
                "h",
                "defect_max",
                "defect_wiener",
                "consistent",
                "error",
            ],
            &rows,
        )?),
    })
}

/// Parses `a,b,c` into mesh widths.
pub fn parse_h_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|h| *h > 0.0)
                .ok_or_else(|| Error::InvalidInput(format!("bad mesh width '{s}'")))
        })
        .collect()
}
