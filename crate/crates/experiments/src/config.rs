//! Experiment configuration.
//!
//! A run is described by one flat TOML table. Every key is optional; missing
//! keys take the defaults of the experiment kind (see [`ExperimentConfig::defaults`]).
//! Unknown keys and ill-typed values are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use sparsegrad::solvers::SolverParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Onebar,
    Twobar,
    Superres,
    Mri,
    Ct,
    Sensitivity,
    Ablation,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Onebar => "onebar",
            Kind::Twobar => "twobar",
            Kind::Superres => "superres",
            Kind::Mri => "mri",
            Kind::Ct => "ct",
            Kind::Sensitivity => "sensitivity",
            Kind::Ablation => "ablation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    L1l2,
    Tv,
    Lp,
    L1ml2,
    Zf,
    Sart,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::L1l2 => "l1l2",
            Method::Tv => "tv",
            Method::Lp => "lp",
            Method::L1ml2 => "l1ml2",
            Method::Zf => "zf",
            Method::Sart => "sart",
        }
    }

    pub fn is_baseline(self) -> bool {
        matches!(self, Method::Zf | Method::Sart)
    }
}

/// Measurement model used by the sensitivity and ablation studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Application {
    Mri,
    Ct,
}

/// Which ablation to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Study {
    Box,
    Jmax,
    Both,
}

/// Keys whose default is unset and so absent from the serialized defaults.
const OPTIONAL_KEYS: [&str; 3] = ["gamma", "init_scale", "method_params"];

/// Per-method replacements for the shared solver parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_max: Option<usize>,
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub methods: Vec<Method>,
    pub seed: u64,

    /// Signal length of the 1D experiments.
    pub n: usize,
    /// Cutoff frequency of the 1D low-pass measurements.
    pub f_c: usize,
    /// Bar offsets of the one-bar sweep.
    pub s_values: Vec<usize>,
    /// Bar width of the two-bar sweep.
    pub s: usize,
    /// Background levels of the two-bar sweep.
    pub t_values: Vec<f64>,
    /// Random initializations per instance for `l1l2`; the lowest error is kept.
    pub restarts: usize,
    /// Standard deviation of a Gaussian `l1l2` start. Unset draws uniformly
    /// from the box.
    pub init_scale: Option<f64>,

    /// Side length of the 2D phantom.
    pub size: usize,
    /// Fraction of Fourier coefficients kept by the super-resolution mask.
    pub mask_ratio: f64,
    /// Radial line counts of the MRI study.
    pub lines: Vec<usize>,
    /// Scan ranges in degrees of the CT study.
    pub theta_max: Vec<f64>,
    pub angles: usize,
    pub detectors: usize,
    pub sart_iterations: usize,
    /// Weight of the `l2` term for `l1ml2`.
    pub alpha: f64,

    pub application: Application,
    /// `rho = 2^i`, `beta = 2^j` for `i`, `j` in this list.
    pub exponents: Vec<i32>,
    pub lambdas: Vec<f64>,
    pub k_max_values: Vec<usize>,
    pub study: Study,
    pub j_max_values: Vec<usize>,
    /// Line count (MRI) or scan range (CT) of the sensitivity and ablation problems.
    pub ablation_lines: usize,
    pub ablation_theta: f64,

    pub rho: f64,
    pub gamma: Option<f64>,
    pub beta: f64,
    pub lambda: f64,
    pub k_max: usize,
    pub j_max: usize,
    pub eps_rel: f64,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// `[p, q]` box, or empty for none.
    pub bounds: Vec<f64>,
    /// Methods run without the box even when `bounds` is set.
    pub unbounded_methods: Vec<Method>,
    /// Per-method parameter tables, e.g. `[method_params.tv]`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub method_params: BTreeMap<Method, MethodParams>,
}

impl ExperimentConfig {
    pub fn defaults(kind: Kind) -> Self {
        let base = SolverParams::default();
        let mut c = Self {
            kind,
            methods: vec![Method::Tv, Method::L1l2],
            seed: 0,
            n: 100,
            f_c: 2,
            s_values: (1..=49).collect(),
            s: 12,
            t_values: (1..20).map(|i| 1.0 + 0.05 * i as f64).map(|t| (t * 100.0).round() / 100.0).collect(),
            restarts: 10,
            init_scale: None,
            size: 256,
            mask_ratio: 0.1,
            lines: vec![20, 25, 30],
            theta_max: vec![30.0, 45.0, 60.0],
            angles: 31,
            detectors: 362,
            sart_iterations: 100,
            alpha: 0.5,
            application: Application::Mri,
            exponents: (-4..=4).collect(),
            lambdas: vec![10.0, 100.0, 1000.0],
            k_max_values: vec![500, 1000],
            study: Study::Both,
            j_max_values: vec![1, 3, 5, 10],
            ablation_lines: 6,
            ablation_theta: 45.0,
            rho: base.rho,
            gamma: None,
            beta: base.beta,
            lambda: base.lambda,
            k_max: base.k_max,
            j_max: base.j_max,
            eps_rel: base.eps_rel,
            cg_tol: base.cg_tol,
            cg_max_iter: base.cg_max_iter,
            bounds: vec![0.0, 1.0],
            unbounded_methods: vec![],
            method_params: BTreeMap::new(),
        };
        match kind {
            Kind::Onebar => {
                c.rho = 8.0;
                c.eps_rel = 1e-9;
                c.k_max = 3000;
                c.unbounded_methods = vec![Method::Tv];
            }
            Kind::Twobar => {
                c.f_c = 4;
                c.rho = 8.0;
                c.beta = 0.1;
                c.j_max = 20;
                c.k_max = 450;
                c.init_scale = Some(0.03);
                c.eps_rel = 1e-9;
                c.bounds = vec![0.0, 2.0];
                c.unbounded_methods = vec![Method::Tv];
            }
            Kind::Superres => {
                c.size = 64;
                c.methods = vec![Method::Tv, Method::Lp, Method::L1ml2, Method::L1l2];
            }
            Kind::Mri => {
                c.methods = vec![Method::Zf, Method::Tv, Method::L1l2];
            }
            Kind::Ct => {
                let ct = SolverParams::ct();
                c.methods = vec![Method::Sart, Method::Tv, Method::Lp, Method::L1l2];
                c.rho = ct.rho;
                c.gamma = Some(ct.gamma);
                c.beta = ct.beta;
                c.lambda = ct.lambda;
                c.j_max = ct.j_max;
                c.k_max = ct.k_max;
                c.cg_tol = ct.cg_tol;
                c.cg_max_iter = ct.cg_max_iter;
                c.method_params = BTreeMap::from([
                    (Method::Tv, MethodParams { rho: Some(1.0), gamma: Some(4.0), ..Default::default() }),
                    (Method::Lp, MethodParams { rho: Some(16.0), gamma: Some(64.0), k_max: Some(200), ..Default::default() }),
                ]);
            }
            Kind::Sensitivity => {
                c.size = 64;
                c.methods = vec![Method::L1l2];
            }
            Kind::Ablation => {
                c.methods = vec![Method::L1l2];
                c.k_max = 300;
                c.eps_rel = 0.0;
            }
        }
        c
    }

    /// Defaults of `kind`, overlaid with `table` (file contents and overrides).
    pub fn resolve(kind: Kind, table: toml::Table) -> Result<Self> {
        if let Some(k) = table.get("kind") {
            ensure!(k.as_str() == Some(kind.name()), "config kind {k} does not match subcommand {}", kind.name());
        }
        let mut merged = toml::Table::try_from(Self::defaults(kind)).context("serializing defaults")?;
        for (k, v) in table {
            if !merged.contains_key(&k) && !OPTIONAL_KEYS.contains(&k.as_str()) {
                bail!("unknown config key `{k}`");
            }
            match (merged.get_mut(&k), v) {
                (Some(toml::Value::Table(into)), toml::Value::Table(from)) => merge_tables(into, from),
                (_, v) => {
                    merged.insert(k, v);
                }
            }
        }
        let cfg: Self = merged.try_into().context("invalid config value")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(kind: Kind, path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                text.parse::<toml::Table>().with_context(|| format!("parsing {}", p.display()))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            let parsed = parse_override(o)?;
            table.extend(parsed);
        }
        Self::resolve(kind, table)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(!self.methods.is_empty(), "methods must not be empty");
        for &m in self.methods.iter().chain(self.method_params.keys()) {
            self.solver_params(m).validate().with_context(|| format!("solver parameters of {}", m.name()))?;
        }
        ensure!(self.bounds.is_empty() || self.bounds.len() == 2, "bounds must be [] or [p, q]");
        ensure!(self.alpha >= 0.0 && self.alpha <= 1.0, "alpha must lie in [0, 1]");
        let needs = |m: Method| self.methods.contains(&m);
        match self.kind {
            Kind::Onebar | Kind::Twobar => {
                ensure!(self.n >= 4, "n must be at least 4");
                ensure!(2 * self.f_c + 1 < self.n, "f_c too large for n");
                ensure!(self.restarts >= 1, "restarts must be positive");
                ensure!(self.init_scale.is_none_or(|x| x > 0.0 && x.is_finite()), "init_scale must be positive");
                ensure!(!needs(Method::Sart), "sart needs a tomography problem");
                if self.kind == Kind::Onebar {
                    ensure!(!self.s_values.is_empty(), "s_values must not be empty");
                    ensure!(self.s_values.iter().all(|&s| s >= 1 && 2 * s <= self.n), "s_values must lie in [1, n/2]");
                } else {
                    ensure!(!self.t_values.is_empty(), "t_values must not be empty");
                    ensure!(self.s >= 1 && 4 * self.s <= self.n, "s must lie in [1, n/4]");
                    ensure!(self.t_values.iter().all(|t| t.is_finite()), "t_values must be finite");
                }
            }
            Kind::Superres | Kind::Mri | Kind::Sensitivity | Kind::Ablation | Kind::Ct => {
                ensure!(self.size >= 16, "size must be at least 16");
            }
        }
        match self.kind {
            Kind::Superres => {
                ensure!(self.mask_ratio > 0.0 && self.mask_ratio < 1.0, "mask_ratio must lie in (0, 1)");
                ensure!(!needs(Method::Sart), "sart needs a tomography problem");
            }
            Kind::Mri => {
                ensure!(!self.lines.is_empty() && self.lines.iter().all(|&l| l >= 1), "lines must be positive");
                ensure!(!needs(Method::Sart), "sart needs a tomography problem");
            }
            Kind::Ct => {
                ensure!(!self.theta_max.is_empty(), "theta_max must not be empty");
                ensure!(self.theta_max.iter().all(|&t| t > 0.0 && t < 180.0), "theta_max must lie in (0, 180)");
                ensure!(self.angles >= 1 && self.detectors >= 1, "angles and detectors must be positive");
                ensure!(!needs(Method::Zf), "zf needs a Fourier problem");
            }
            Kind::Sensitivity => {
                ensure!(!self.exponents.is_empty() && !self.lambdas.is_empty(), "empty sensitivity grid");
                ensure!(!self.k_max_values.is_empty(), "k_max_values must not be empty");
                ensure!(self.lambdas.iter().all(|&l| l > 0.0), "lambdas must be positive");
                ensure!(self.methods.iter().all(|m| !m.is_baseline()), "sensitivity runs regularized methods only");
            }
            Kind::Ablation => {
                ensure!(!self.j_max_values.is_empty() && self.j_max_values.iter().all(|&j| j >= 1), "j_max_values must be positive");
                ensure!(self.methods.iter().all(|m| !m.is_baseline()), "ablation runs regularized methods only");
            }
            _ => {}
        }
        if matches!(self.kind, Kind::Sensitivity | Kind::Ablation) {
            ensure!(self.ablation_lines >= 1, "ablation_lines must be positive");
            ensure!(self.ablation_theta > 0.0 && self.ablation_theta < 180.0, "ablation_theta must lie in (0, 180)");
        }
        Ok(())
    }

    /// Solver parameters for `method`.
    pub fn solver_params(&self, method: Method) -> SolverParams {
        let bounds = match self.bounds[..] {
            [p, q] if !self.unbounded_methods.contains(&method) => Some((p, q)),
            _ => None,
        };
        let m = self.method_params.get(&method).cloned().unwrap_or_default();
        let rho = m.rho.unwrap_or(self.rho);
        SolverParams {
            rho,
            gamma: m.gamma.or(self.gamma).unwrap_or(rho),
            beta: m.beta.unwrap_or(self.beta),
            lambda: m.lambda.unwrap_or(self.lambda),
            bounds,
            k_max: m.k_max.unwrap_or(self.k_max),
            j_max: m.j_max.unwrap_or(self.j_max),
            eps_rel: self.eps_rel,
            cg_tol: self.cg_tol,
            cg_max_iter: self.cg_max_iter,
            rng_seed: self.seed,
            ..SolverParams::default()
        }
    }
}

fn merge_tables(into: &mut toml::Table, from: toml::Table) {
    for (k, v) in from {
        match (into.get_mut(&k), v) {
            (Some(toml::Value::Table(a)), toml::Value::Table(b)) => merge_tables(a, b),
            (_, v) => {
                into.insert(k, v);
            }
        }
    }
}

/// Parses `key=value`, with `value` in TOML syntax. Bare words are taken as strings.
pub fn parse_override(s: &str) -> Result<toml::Table> {
    let Some((k, v)) = s.split_once('=') else {
        bail!("override `{s}` is not of the form key=value");
    };
    let (k, v) = (k.trim(), v.trim());
    ensure!(!k.is_empty(), "empty key in override `{s}`");
    let line = format!("{k} = {v}");
    match line.parse::<toml::Table>() {
        Ok(t) => Ok(t),
        Err(_) => Ok(format!("{k} = {}", toml::Value::String(v.to_string())).parse::<toml::Table>()?),
    }
}
