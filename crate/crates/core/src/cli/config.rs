//! Run configuration: one JSON document per run, validated as a whole.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::assimilate::{mu_heuristic, Eta0Mode, ReferenceInit, TwinConfig};
use crate::diagnostic::{SolverSettings, WindStress};
use crate::error::{Error, FieldIssue, Result};
use crate::field::{DomainSpec, PhysParams, ScalarField2D, ScalarField3D};
use crate::observe::InterpolantSpec;
use crate::stepper::{ForcingSpec, StepperSettings};

/// Nudging strength: a number, or `"auto"` for the default heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MuSetting {
    Value(f64),
    Keyword(MuKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MuKeyword {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    #[serde(rename = "A_h")]
    pub a_h: f64,
    #[serde(rename = "A_v")]
    pub a_v: f64,
    #[serde(rename = "K_h")]
    pub k_h: f64,
    #[serde(rename = "K_v")]
    pub k_v: f64,
    pub alpha: f64,
    pub f0: f64,
    pub beta: f64,
    pub mu: MuSetting,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        let p = PhysParams::default();
        Self {
            a_h: p.a_h,
            a_v: p.a_v,
            k_h: p.k_h,
            k_v: p.k_v,
            alpha: p.alpha,
            f0: p.f0,
            beta: p.beta,
            mu: MuSetting::Keyword(MuKeyword::Auto),
        }
    }
}

/// Analytic forcing on the box:
/// `T* = a_T cos(πx/Lx) cos(πy/Ly)`, `Q = q_mean + a_Q cos(πx/Lx) cos(πy/Ly)`,
/// `τ = (-a_τ sin(πx/Lx) sin(2πy/Ly), 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForcingConfig {
    pub tstar_amplitude: f64,
    pub q_mean: f64,
    pub q_amplitude: f64,
    pub tau_amplitude: f64,
}

impl Default for ForcingConfig {
    fn default() -> Self {
        Self {
            tstar_amplitude: 0.1,
            q_mean: 0.0,
            q_amplitude: 0.005,
            tau_amplitude: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwinSection {
    pub spin_up_time: f64,
    pub assimilation_time: f64,
    pub eta0: Eta0Mode,
    pub sample_every: usize,
    pub obs_stride: usize,
}

impl Default for TwinSection {
    fn default() -> Self {
        Self {
            spin_up_time: 5.0,
            assimilation_time: 10.0,
            eta0: Eta0Mode::Zero,
            sample_every: 10,
            obs_stride: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub t_end: f64,
    pub sample_every: usize,
    /// Steps between temperature snapshots; `0` writes the final one only.
    pub snapshot_every: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            t_end: 5.0,
            sample_every: 10,
            snapshot_every: 0,
        }
    }
}

/// Theory constants and measurement sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TheorySection {
    /// Generic constant `C` of the bounds.
    #[serde(rename = "C")]
    pub c: f64,
    pub r: f64,
    /// `C` used in the rate proxy fed to the Grönwall check.
    #[serde(rename = "C_proxy")]
    pub c_proxy: f64,
    pub gronwall_tau: f64,
    pub gronwall_gamma: f64,
    pub c0_samples: usize,
    pub rho_samples: usize,
}

impl Default for TheorySection {
    fn default() -> Self {
        Self {
            c: 1.0,
            r: 1.0,
            c_proxy: 10.0,
            gronwall_tau: 1.0,
            gronwall_gamma: 1.0,
            c0_samples: 100,
            rho_samples: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    /// Grid refinement factors at which `c₀` is tabulated.
    pub refinements: Vec<usize>,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            refinements: vec![1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "run".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub domain: DomainSpec,
    pub params: ParamsConfig,
    pub forcing: ForcingConfig,
    pub stepper: StepperSettings,
    pub solver: SolverSettings,
    pub interpolant: InterpolantSpec,
    pub reference: ReferenceInit,
    pub twin: TwinSection,
    pub simulate: SimulateSection,
    pub theory: TheorySection,
    pub spectrum: SpectrumSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            domain: DomainSpec::default(),
            params: ParamsConfig::default(),
            forcing: ForcingConfig::default(),
            stepper: StepperSettings {
                dt: 0.004,
                ..StepperSettings::default()
            },
            solver: SolverSettings::default(),
            interpolant: InterpolantSpec::default(),
            reference: ReferenceInit::default(),
            twin: TwinSection::default(),
            simulate: SimulateSection::default(),
            theory: TheorySection::default(),
            spectrum: SpectrumSection::default(),
            output: OutputSection::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(vec![FieldIssue::new(
                "config",
                format!("cannot read {}: {e}", path.display()),
            )])
        })?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::Config(vec![FieldIssue::new("config", e.to_string())]))?;
        Self::from_value(value)
    }

    /// Deserializes and validates a JSON tree.
    pub fn from_value(value: Value) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_value(value)
            .map_err(|e| Error::Config(vec![FieldIssue::new("config", e.to_string())]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// Checks every nested invariant and reports all failures together.
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        self.domain.validate("domain", &mut issues);
        let mut p = self.phys_params(0.0);
        if let MuSetting::Value(mu) = self.params.mu {
            p.mu = mu;
        }
        p.validate("params", &mut issues);
        for (name, v) in [
            ("tstar_amplitude", self.forcing.tstar_amplitude),
            ("q_mean", self.forcing.q_mean),
            ("q_amplitude", self.forcing.q_amplitude),
            ("tau_amplitude", self.forcing.tau_amplitude),
        ] {
            if !v.is_finite() {
                issues.push(FieldIssue::new(format!("forcing.{name}"), "must be finite"));
            }
        }
        self.stepper.validate("stepper.", &mut issues);
        self.solver.validate("solver.", &mut issues);
        self.interpolant.validate(&self.domain, "interpolant.", &mut issues);
        let twin = &self.twin;
        for (name, v) in [
            ("twin.spin_up_time", twin.spin_up_time),
            ("twin.assimilation_time", twin.assimilation_time),
            ("simulate.t_end", self.simulate.t_end),
        ] {
            if !(v.is_finite() && v > 0.0) {
                issues.push(FieldIssue::new(name, format!("must be finite and > 0 (got {v})")));
            }
        }
        for (name, v) in [
            ("twin.sample_every", twin.sample_every),
            ("twin.obs_stride", twin.obs_stride),
            ("simulate.sample_every", self.simulate.sample_every),
            ("theory.c0_samples", self.theory.c0_samples),
            ("theory.rho_samples", self.theory.rho_samples),
        ] {
            if v == 0 {
                issues.push(FieldIssue::new(name, "must be >= 1"));
            }
        }
        if let Eta0Mode::Perturbed { epsilon } = twin.eta0 {
            if !epsilon.is_finite() {
                issues.push(FieldIssue::new("twin.eta0.epsilon", "must be finite"));
            }
        }
        if !(self.reference.amplitude.is_finite() && self.reference.amplitude >= 0.0) {
            issues.push(FieldIssue::new("reference.amplitude", "must be finite and >= 0"));
        }
        for (name, v) in [
            ("theory.C", self.theory.c),
            ("theory.r", self.theory.r),
            ("theory.gronwall_tau", self.theory.gronwall_tau),
        ] {
            if !(v.is_finite() && v > 0.0) {
                issues.push(FieldIssue::new(name, "must be finite and > 0"));
            }
        }
        for (name, v) in [
            ("theory.C_proxy", self.theory.c_proxy),
            ("theory.gronwall_gamma", self.theory.gronwall_gamma),
        ] {
            if !v.is_finite() {
                issues.push(FieldIssue::new(name, "must be finite"));
            }
        }
        if self.spectrum.refinements.is_empty() || self.spectrum.refinements.contains(&0) {
            issues.push(FieldIssue::new(
                "spectrum.refinements",
                "must be a nonempty list of factors >= 1",
            ));
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues))
        }
    }

    fn phys_params(&self, mu: f64) -> PhysParams {
        let c = &self.params;
        PhysParams {
            a_h: c.a_h,
            a_v: c.a_v,
            k_h: c.k_h,
            k_v: c.k_v,
            alpha: c.alpha,
            f0: c.f0,
            beta: c.beta,
            depth: self.domain.h,
            mu,
        }
    }

    pub fn forcing(&self) -> Result<ForcingSpec> {
        let d = self.domain;
        let f = self.forcing;
        let shape = move |x: f64, y: f64| (PI * x / d.lx).cos() * (PI * y / d.ly).cos();
        let tstar = ScalarField2D::from_fn(d, |x, y| f.tstar_amplitude * shape(x, y));
        let q = ScalarField3D::from_fn(d, |x, y, _| f.q_mean + f.q_amplitude * shape(x, y));
        let tau = WindStress {
            tau1: ScalarField2D::from_fn(d, |x, y| {
                -f.tau_amplitude * (PI * x / d.lx).sin() * (2.0 * PI * y / d.ly).sin()
            }),
            tau2: ScalarField2D::zeros(d),
        };
        ForcingSpec::new(q, tstar, tau, &self.phys_params(0.0))
    }

    /// Physical parameters with `μ` resolved, and whether it came from the
    /// heuristic.
    pub fn resolved_params(&self, forcing: &ForcingSpec) -> Result<(PhysParams, bool)> {
        match self.params.mu {
            MuSetting::Value(mu) => Ok((self.phys_params(mu), false)),
            MuSetting::Keyword(MuKeyword::Auto) => {
                let base = self.phys_params(0.0);
                Ok((self.phys_params(mu_heuristic(&base, forcing)?), true))
            }
        }
    }

    pub fn twin_config(&self, params: PhysParams, forcing: ForcingSpec) -> TwinConfig {
        TwinConfig {
            domain: self.domain,
            params,
            forcing,
            stepper: self.stepper,
            solver: self.solver,
            interpolant: self.interpolant,
            reference: self.reference,
            spin_up_time: self.twin.spin_up_time,
            assimilation_time: self.twin.assimilation_time,
            eta0: self.twin.eta0,
            seed: self.seed,
            sample_every: self.twin.sample_every,
            obs_stride: self.twin.obs_stride,
        }
    }
}

/// Sets `key` (dotted path) in a JSON tree, creating objects on the way.
pub fn set_path(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node.as_object_mut().ok_or_else(|| {
            Error::Config(vec![FieldIssue::new(key, "path crosses a non-object value")])
        })?;
        if i + 1 == parts.len() {
            obj.insert((*part).to_string(), value);
            return Ok(());
        }
        node = obj
            .entry((*part).to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Err(Error::Config(vec![FieldIssue::new("--sweep", "empty key")]))
}

/// Parses `KEY=v1,v2,...`; each value is read as JSON when possible and as a
/// string otherwise.
pub fn parse_sweep(spec: &str) -> Result<(String, Vec<Value>)> {
    let (key, values) = spec.split_once('=').ok_or_else(|| {
        Error::Config(vec![FieldIssue::new("--sweep", "expected KEY=v1,v2,...")])
    })?;
    if key.is_empty() {
        return Err(Error::Config(vec![FieldIssue::new("--sweep", "empty key")]));
    }
    let values: Vec<Value> = values
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| serde_json::from_str(s).unwrap_or_else(|_| Value::String(s.to_string())))
        .collect();
    if values.is_empty() {
        return Err(Error::Config(vec![FieldIssue::new("--sweep", "no values given")]));
    }
    Ok((key.to_string(), values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_json() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(RunConfig::from_json_str(&text).unwrap(), cfg);
    }

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(RunConfig::from_json_str("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn negative_viscosity_is_named() {
        let err = RunConfig::from_json_str(r#"{"params": {"K_v": -1.0}}"#).unwrap_err();
        match err {
            Error::Config(issues) => assert!(issues.iter().any(|i| i.path == "params.K_v")),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn issues_are_aggregated() {
        let err = RunConfig::from_json_str(
            r#"{"params": {"K_v": -1.0, "A_h": 0.0}, "twin": {"spin_up_time": -2}}"#,
        )
        .unwrap_err();
        let Error::Config(issues) = err else { panic!() };
        let paths: Vec<_> = issues.iter().map(|i| i.path.as_str()).collect();
        for p in ["params.K_v", "params.A_h", "twin.spin_up_time"] {
            assert!(paths.contains(&p), "{paths:?}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json_str(r#"{"params": {"Kv": 1.0}}"#).is_err());
    }

    #[test]
    fn mu_accepts_number_or_auto() {
        let cfg = RunConfig::from_json_str(r#"{"params": {"mu": 3.5}}"#).unwrap();
        assert_eq!(cfg.params.mu, MuSetting::Value(3.5));
        let cfg = RunConfig::from_json_str(r#"{"params": {"mu": "auto"}}"#).unwrap();
        assert_eq!(cfg.params.mu, MuSetting::Keyword(MuKeyword::Auto));
        assert!(RunConfig::from_json_str(r#"{"params": {"mu": "big"}}"#).is_err());
    }

    #[test]
    fn sweep_parsing_and_paths() {
        let (key, values) = parse_sweep("interpolant.h=0.25,0.5").unwrap();
        assert_eq!(key, "interpolant.h");
        assert_eq!(values, vec![Value::from(0.25), Value::from(0.5)]);
        let mut v = RunConfig::default().to_value();
        set_path(&mut v, &key, values[1].clone()).unwrap();
        assert_eq!(RunConfig::from_value(v).unwrap().interpolant.h, 0.5);
        assert!(parse_sweep("nokey").is_err());
    }
}
