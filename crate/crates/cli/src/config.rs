//! Run configuration: one JSON document per run, strict schema, physics
//! only in the file (flags select output plumbing, never parameters).

use cyclemix::{Error, SystemParams, C64};
use serde::{Deserialize, Serialize};

use crate::Failure;

/// A complex amplitude: either a bare number (real) or `{"re": .., "im": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ComplexSpec {
    Real(f64),
    Parts(ComplexParts),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexParts {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl ComplexSpec {
    pub fn to_c64(self) -> C64 {
        match self {
            ComplexSpec::Real(re) => C64::new(re, 0.0),
            ComplexSpec::Parts(p) => C64::new(p.re, p.im),
        }
    }
}

impl Default for ComplexSpec {
    fn default() -> Self {
        ComplexSpec::Real(0.0)
    }
}

fn d_one() -> f64 {
    1.0
}
fn d_gamma12() -> f64 {
    0.01
}
fn d_gamma23() -> f64 {
    0.005
}
fn d_ratio33() -> f64 {
    3.3
}
fn d_probe() -> ComplexSpec {
    ComplexSpec::Real(1e-3)
}
fn d_ladder() -> Vec<f64> {
    vec![1e-3, 1e-4, 1e-5]
}

/// System parameters. Rates in units of γ13, detuning included; a minimal
/// config needs only the control amplitudes and detuning, everything else
/// defaults to the weak-probe reference point.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SystemBlock {
    #[serde(default = "d_gamma12")]
    pub gamma12: f64,
    #[serde(default = "d_one")]
    pub gamma13: f64,
    #[serde(default = "d_gamma23")]
    pub gamma23: f64,
    #[serde(default)]
    pub gamma_phi2: f64,
    #[serde(default)]
    pub gamma_phi3: f64,
    #[serde(default)]
    pub omega_c: ComplexSpec,
    #[serde(default)]
    pub omega_d: ComplexSpec,
    #[serde(default)]
    pub delta_p: f64,
    #[serde(default = "d_one")]
    pub kappa12: f64,
    #[serde(default = "d_ratio33")]
    pub kappa13: f64,
    #[serde(default = "d_one")]
    pub mu_ratio: f64,
    #[serde(default = "d_ratio33")]
    pub freq_ratio: f64,
    #[serde(default = "d_probe")]
    pub probe_rabi0: ComplexSpec,
}

impl SystemBlock {
    pub fn to_params(&self) -> SystemParams {
        SystemParams {
            gamma12: self.gamma12,
            gamma13: self.gamma13,
            gamma23: self.gamma23,
            gamma_phi2: self.gamma_phi2,
            gamma_phi3: self.gamma_phi3,
            omega_c: self.omega_c.to_c64(),
            omega_d: self.omega_d.to_c64(),
            delta_p: self.delta_p,
            kappa12: self.kappa12,
            kappa13: self.kappa13,
            mu_ratio: self.mu_ratio,
            freq_ratio: self.freq_ratio,
            probe_rabi0: self.probe_rabi0.to_c64(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateBlock {
    /// Propagation window; defaults to a span covering the first few
    /// conversion oscillations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_max: Option<f64>,
    /// Integrator step; always capped at the stability limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Keep every n-th sample; defaults to whatever keeps the trace under
    /// 100k rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateBlock {
    /// Probe amplitudes for the convergence ladder, strongest first.
    #[serde(default = "d_ladder")]
    pub probe_ladder: Vec<f64>,
    /// Optional seeds for the generated fields at the cell entrance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_t: Option<ComplexSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_f: Option<ComplexSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    /// One of `omega_c`, `omega_d`, `delta_p`.
    pub parameter: String,
    /// Explicit grid, mutually exclusive with start/stop/count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propagate: Option<PropagateBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validate: Option<ValidateBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputBlock>,
}

pub const SWEEPABLE: [&str; 3] = ["omega_c", "omega_d", "delta_p"];

impl RunConfig {
    /// Names of the workflow blocks present in the document.
    pub fn workflows(&self) -> Vec<&'static str> {
        let mut found = Vec::new();
        if self.propagate.is_some() {
            found.push("propagate");
        }
        if self.spectrum.is_some() {
            found.push("spectrum");
        }
        if self.validate.is_some() {
            found.push("validate");
        }
        if self.sweep.is_some() {
            found.push("sweep");
        }
        found
    }

    fn check(&self) -> Result<(), Failure> {
        if let Err(Error::InvalidParameter { name, value, reason }) =
            self.system.to_params().validate()
        {
            return Err(Failure::config(format!(
                "system.{name} = {value}: {reason}"
            )));
        }

        let found = self.workflows();
        if found.len() != 1 {
            return Err(Failure::config(if found.is_empty() {
                "exactly one workflow block (propagate | spectrum | validate | sweep) is required, none present".into()
            } else {
                format!(
                    "exactly one workflow block is required, found: {}",
                    found.join(", ")
                )
            }));
        }

        if let Some(p) = &self.propagate {
            check_positive("propagate.z_max", p.z_max)?;
            check_positive("propagate.step", p.step)?;
            if p.stride == Some(0) {
                return Err(Failure::config("propagate.stride must be at least 1"));
            }
        }
        if let Some(s) = &self.spectrum {
            if let Some(n) = s.points {
                if n < 2 {
                    return Err(Failure::config("spectrum.points must be at least 2"));
                }
            }
            let lo = s.delta_min.unwrap_or(-6.0);
            let hi = s.delta_max.unwrap_or(6.0);
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Failure::config(format!(
                    "spectrum.delta_min..delta_max must be a finite ascending range, got {lo}..{hi}"
                )));
            }
        }
        if let Some(v) = &self.validate {
            if v.probe_ladder.is_empty() {
                return Err(Failure::config("validate.probe_ladder must not be empty"));
            }
            for (k, &amp) in v.probe_ladder.iter().enumerate() {
                if !(amp.is_finite() && amp > 0.0) {
                    return Err(Failure::config(format!(
                        "validate.probe_ladder[{k}] must be a positive amplitude, got {amp}"
                    )));
                }
            }
        }
        if let Some(w) = &self.sweep {
            if !SWEEPABLE.contains(&w.parameter.as_str()) {
                return Err(Failure::config(format!(
                    "sweep.parameter must be one of {}, got `{}`",
                    SWEEPABLE.join(" | "),
                    w.parameter
                )));
            }
            let gridded = w.start.is_some() || w.stop.is_some() || w.count.is_some();
            match (&w.values, gridded) {
                (Some(_), true) => {
                    return Err(Failure::config(
                        "sweep.values and sweep.start/stop/count are mutually exclusive",
                    ))
                }
                (None, false) => {
                    return Err(Failure::config(
                        "sweep needs either sweep.values or sweep.start/stop/count",
                    ))
                }
                (Some(vals), false) => {
                    if vals.is_empty() {
                        return Err(Failure::config("sweep.values must not be empty"));
                    }
                    if vals.iter().any(|v| !v.is_finite()) {
                        return Err(Failure::config("sweep.values must all be finite"));
                    }
                }
                (None, true) => {
                    let (start, stop, count) = match (w.start, w.stop, w.count) {
                        (Some(a), Some(b), Some(n)) => (a, b, n),
                        _ => {
                            return Err(Failure::config(
                                "sweep.start, sweep.stop and sweep.count must be given together",
                            ))
                        }
                    };
                    if count < 2 {
                        return Err(Failure::config("sweep.count must be at least 2"));
                    }
                    if !(start.is_finite() && stop.is_finite() && start != stop) {
                        return Err(Failure::config(format!(
                            "sweep.start..stop must be a finite non-degenerate range, got {start}..{stop}"
                        )));
                    }
                }
            }
            check_positive("sweep.z_max", w.z_max)?;
            check_positive("sweep.step", w.step)?;
        }
        if let Some(o) = &self.output {
            if o.path.is_empty() {
                return Err(Failure::config("output.path must not be empty"));
            }
        }
        Ok(())
    }
}

fn check_positive(field: &str, value: Option<f64>) -> Result<(), Failure> {
    match value {
        Some(v) if !(v.is_finite() && v > 0.0) => Err(Failure::config(format!(
            "{field} must be positive and finite, got {v}"
        ))),
        _ => Ok(()),
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, Failure> {
    let cfg: RunConfig =
        serde_json::from_str(text).map_err(|e| Failure::config(format!("bad config: {e}")))?;
    cfg.check()?;
    Ok(cfg)
}
