//! One function per subcommand. Every workflow reduces to a numeric table
//! plus a summary object for the sidecar; emission is someone else's job.

use cyclemix::analysis::DEFAULT_PROMINENCE;
use cyclemix::{
    absorption_spectrum, build_coupling_matrix, default_z_max, effective_step, find_extrema,
    integrate_rk4_strided, interleaving_check, peak_efficiencies, synchrony_check,
    transparency_window, validate_perturbation, DriveSet, Error, FieldVector, PropagationTrace,
    Propagator, SystemParams, C64,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::emit::Table;
use crate::Failure;

#[derive(Debug, Clone, Copy)]
pub enum Kind {
    Propagate,
    Spectrum,
    Validate,
    Sweep,
}

pub struct RunOutput {
    pub table: Table,
    pub summary: Value,
    pub workflow: &'static str,
    pub line: String,
}

fn numeric(e: Error) -> Failure {
    Failure::numeric(e.to_string())
}

fn missing_block(cfg: &RunConfig, wanted: &str) -> Failure {
    Failure::config(format!(
        "the {wanted} subcommand needs a `{wanted}` block; config has `{}`",
        cfg.workflows().join(", ")
    ))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let gap = (hi - lo) / (n - 1) as f64;
    (0..n).map(|k| lo + k as f64 * gap).collect()
}

pub fn run(cfg: &RunConfig, kind: Kind) -> Result<RunOutput, Failure> {
    match kind {
        Kind::Propagate => propagate(cfg),
        Kind::Spectrum => spectrum(cfg),
        Kind::Validate => validate(cfg),
        Kind::Sweep => sweep(cfg),
    }
}

/// Oscillation signatures at the emitted grid, best-effort: too few
/// samples to classify is not a failed run.
fn signatures(trace: &PropagationTrace) -> Value {
    if trace.samples.len() < 3 {
        return Value::Null;
    }
    let (Ok(along_t), Ok(along_f)) = (
        find_extrema(&trace.eta_t(), DEFAULT_PROMINENCE),
        find_extrema(&trace.eta_f(), DEFAULT_PROMINENCE),
    ) else {
        return Value::Null;
    };
    let Ok(sync) = synchrony_check(trace, None) else {
        return Value::Null;
    };
    let inter = interleaving_check(&along_t, &along_f);
    json!({"interleaved": inter.interleaved, "synchronized": sync.synchronized})
}

fn propagate(cfg: &RunConfig) -> Result<RunOutput, Failure> {
    let block = cfg.propagate.as_ref().ok_or_else(|| missing_block(cfg, "propagate"))?;
    let params = cfg.system.to_params();
    let cm = build_coupling_matrix(&params).map_err(numeric)?;
    let z_max = block.z_max.unwrap_or_else(|| default_z_max(&cm));
    let step = effective_step(&cm, block.step.unwrap_or(f64::MAX));
    let planned = (z_max / step).ceil().max(1.0) as usize;
    let stride = block.stride.unwrap_or_else(|| planned.div_ceil(100_000).max(1));
    let trace = integrate_rk4_strided(&cm, &FieldVector::launch(&params), z_max, step, stride)
        .map_err(numeric)?;

    let columns = [
        "Z", "re_omega_p", "im_omega_p", "re_omega_t", "im_omega_t", "re_omega_f", "im_omega_f",
        "eta_t", "eta_f", "eta_total", "transmission",
    ];
    let rows = trace
        .samples
        .iter()
        .map(|s| {
            vec![
                s.z,
                s.fields.omega_p.re,
                s.fields.omega_p.im,
                s.fields.omega_t.re,
                s.fields.omega_t.im,
                s.fields.omega_f.re,
                s.fields.omega_f.im,
                s.eta.eta_t,
                s.eta.eta_f,
                s.eta.eta_total,
                s.eta.transmission,
            ]
        })
        .collect();

    let peaks = peak_efficiencies(&trace).map_err(numeric)?;
    let summary = json!({
        "z_max": z_max,
        "step_used": trace.step_used,
        "stride": stride,
        "samples": trace.samples.len(),
        "peaks": {
            "eta_t": {"z": peaks.eta_t.z, "value": peaks.eta_t.value},
            "eta_f": {"z": peaks.eta_f.z, "value": peaks.eta_f.value},
            "eta_total": {"z": peaks.eta_total.z, "value": peaks.eta_total.value},
        },
        "signatures": signatures(&trace),
    });
    let line = format!(
        "propagate: {} samples to Z = {:.4}, peak eta_total = {:.4} at Z = {:.3}",
        trace.samples.len(),
        z_max,
        peaks.eta_total.value,
        peaks.eta_total.z
    );
    Ok(RunOutput {
        table: Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        },
        summary,
        workflow: "propagate",
        line,
    })
}

fn spectrum(cfg: &RunConfig) -> Result<RunOutput, Failure> {
    let block = cfg.spectrum.as_ref().ok_or_else(|| missing_block(cfg, "spectrum"))?;
    let params = cfg.system.to_params();
    let grid = linspace(
        block.delta_min.unwrap_or(-6.0),
        block.delta_max.unwrap_or(6.0),
        block.points.unwrap_or(1201),
    );
    let spec = absorption_spectrum(&params, &grid).map_err(numeric)?;

    let (mut alpha_max, mut at) = (f64::NEG_INFINITY, f64::NAN);
    for &(d, a) in &spec.points {
        if a > alpha_max {
            alpha_max = a;
            at = d;
        }
    }
    let window = match transparency_window(&spec) {
        Ok(w) => json!({
            "center": w.center, "width": w.width,
            "floor": w.floor, "peak_alpha": w.peak_alpha,
        }),
        Err(Error::Analysis(_)) => Value::Null,
        Err(e) => return Err(numeric(e)),
    };
    let mut line = format!(
        "spectrum: {} points, alpha max {:.4} at delta_p = {:+.3}",
        spec.points.len(),
        alpha_max,
        at
    );
    if let Some(w) = window.as_object() {
        line.push_str(&format!(
            ", window floor {:.4} width {:.3}",
            w["floor"].as_f64().unwrap_or(f64::NAN),
            w["width"].as_f64().unwrap_or(f64::NAN)
        ));
    }
    let summary = json!({
        "points": spec.points.len(),
        "alpha_max": alpha_max,
        "at_delta": at,
        "window": window,
    });
    Ok(RunOutput {
        table: Table {
            columns: vec!["delta_p".into(), "alpha".into()],
            rows: spec.points.iter().map(|&(d, a)| vec![d, a]).collect(),
        },
        summary,
        workflow: "spectrum",
        line,
    })
}

fn validate(cfg: &RunConfig) -> Result<RunOutput, Failure> {
    let block = cfg.validate.as_ref().ok_or_else(|| missing_block(cfg, "validate"))?;
    let seed_t = block.omega_t.map(|c| c.to_c64()).unwrap_or(C64::new(0.0, 0.0));
    let seed_f = block.omega_f.map(|c| c.to_c64()).unwrap_or(C64::new(0.0, 0.0));

    let mut rows = Vec::with_capacity(block.probe_ladder.len());
    for &probe in &block.probe_ladder {
        let params = SystemParams {
            probe_rabi0: C64::new(probe, 0.0),
            ..cfg.system.to_params()
        };
        let fields = FieldVector::new(C64::new(probe, 0.0), seed_t, seed_f);
        let report = validate_perturbation(&params, &DriveSet::from_fields(&params, &fields))
            .map_err(numeric)?;
        rows.push(vec![
            probe,
            report.rho21_exact.re,
            report.rho21_exact.im,
            report.rho21_predicted.re,
            report.rho21_predicted.im,
            report.rho21_rel_error,
            report.rho31_exact.re,
            report.rho31_exact.im,
            report.rho31_predicted.re,
            report.rho31_predicted.im,
            report.rho31_rel_error,
        ]);
    }

    // agreement should improve whenever the probe weakens
    let shrinking = rows.windows(2).all(|w| {
        let (p1, p2) = (w[0][0], w[1][0]);
        if p1 == p2 {
            true
        } else if p2 < p1 {
            w[1][5] < w[0][5] && w[1][10] < w[0][10]
        } else {
            w[1][5] > w[0][5] && w[1][10] > w[0][10]
        }
    });
    let summary = json!({
        "ladder": block.probe_ladder,
        "shrinking": shrinking,
        "rho21_rel_errors": rows.iter().map(|r| r[5]).collect::<Vec<_>>(),
        "rho31_rel_errors": rows.iter().map(|r| r[10]).collect::<Vec<_>>(),
    });
    let line = format!(
        "validate: {} amplitudes, rho21 rel error {:.2e} -> {:.2e} ({})",
        rows.len(),
        rows.first().map(|r| r[5]).unwrap_or(f64::NAN),
        rows.last().map(|r| r[5]).unwrap_or(f64::NAN),
        if shrinking { "shrinking" } else { "NOT shrinking" }
    );
    let columns = [
        "omega_p",
        "re_rho21", "im_rho21", "re_rho21_pred", "im_rho21_pred", "rel_error_rho21",
        "re_rho31", "im_rho31", "re_rho31_pred", "im_rho31_pred", "rel_error_rho31",
    ];
    Ok(RunOutput {
        table: Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        },
        summary,
        workflow: "validate",
        line,
    })
}

fn sweep(cfg: &RunConfig) -> Result<RunOutput, Failure> {
    let block = cfg.sweep.as_ref().ok_or_else(|| missing_block(cfg, "sweep"))?;
    let values = match &block.values {
        Some(v) => v.clone(),
        None => linspace(
            block.start.expect("checked at parse"),
            block.stop.expect("checked at parse"),
            block.count.expect("checked at parse"),
        ),
    };
    let base = cfg.system.to_params();

    let rows: Result<Vec<Vec<f64>>, Failure> = values
        .par_iter()
        .map(|&v| {
            let mut params = base.clone();
            match block.parameter.as_str() {
                "omega_c" => params.omega_c = C64::new(v, 0.0),
                "omega_d" => params.omega_d = C64::new(v, 0.0),
                _ => params.delta_p = v,
            }
            let cm = build_coupling_matrix(&params).map_err(numeric)?;
            let z_max = block.z_max.unwrap_or_else(|| default_z_max(&cm));
            let step = block.step.unwrap_or(z_max / 1000.0);
            let trace = Propagator::new(&cm)
                .trace(&FieldVector::launch(&params), z_max, step)
                .map_err(numeric)?;
            let peaks = peak_efficiencies(&trace).map_err(numeric)?;
            Ok(vec![
                v,
                peaks.eta_t.value,
                peaks.eta_f.value,
                peaks.eta_total.value,
            ])
        })
        .collect();
    let rows = rows?;

    let summary = json!({
        "parameter": block.parameter,
        "points": rows.len(),
        "z_max": block.z_max,
        "step": block.step,
    });
    let line = format!("sweep: {} over {} values", block.parameter, rows.len());
    Ok(RunOutput {
        table: Table {
            columns: vec![
                block.parameter.clone(),
                "eta_t_max".into(),
                "eta_f_max".into(),
                "eta_total_max".into(),
            ],
            rows,
        },
        summary,
        workflow: "sweep",
        line,
    })
}
