//! Feature extraction: absorption spectra, extrema of conversion-efficiency
//! traces, the regime signatures (alternating vs. synchronous oscillation),
//! and the induced transparency window.
//!
//! All detectors work on sampled series and are therefore resolution-aware:
//! every report carries the grid step it was computed at, and position
//! comparisons are made in units of that step. Conclusions are only as fine
//! as the sampling — see [`interleaving_check`].

use crate::error::{Error, Result};
use crate::model::{probe_absorption, SystemParams};
use crate::propagation::PropagationTrace;

/// Default hysteresis amplitude for extrema detection: features smaller
/// than this (in the y-units of the series) are treated as noise.
pub const DEFAULT_PROMINENCE: f64 = 1e-4;

/// Default detuning grid for spectra: 1201 points covering Δp ∈ [−6, 6].
pub fn default_delta_grid() -> Vec<f64> {
    (0..1201).map(|k| -6.0 + k as f64 * (12.0 / 1200.0)).collect()
}

/// Probe absorption α(Δp) sampled over a detuning grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionSpectrum {
    /// (Δp, α) pairs in grid order.
    pub points: Vec<(f64, f64)>,
}

impl AbsorptionSpectrum {
    pub fn series(&self) -> &[(f64, f64)] {
        &self.points
    }
}

/// Evaluates α over `delta_grid` (strictly increasing, finite). The grid
/// detunings override `params.delta_p` point by point.
pub fn absorption_spectrum(
    params: &SystemParams,
    delta_grid: &[f64],
) -> Result<AbsorptionSpectrum> {
    if delta_grid.is_empty() {
        return Err(Error::EmptyInput("delta_grid"));
    }
    for pair in delta_grid.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(Error::InvalidParameter {
                name: "delta_grid",
                value: pair[1],
                reason: "must be strictly increasing",
            });
        }
    }
    let mut points = Vec::with_capacity(delta_grid.len());
    for &d in delta_grid {
        points.push((d, probe_absorption(params, d)?));
    }
    Ok(AbsorptionSpectrum { points })
}

/// One detected extremum of a sampled series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub x: f64,
    pub y: f64,
    /// Index into the series the extremum was found in.
    pub index: usize,
}

/// Extrema of one series plus the grid resolution they were detected at.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremaReport {
    pub maxima: Vec<Extremum>,
    pub minima: Vec<Extremum>,
    /// Median sample spacing; the natural position uncertainty of every
    /// entry above.
    pub grid_step: f64,
}

/// Turning-point detection with hysteresis: an extremum registers only
/// once the series has moved away from it by more than `threshold` on both
/// sides, so ripple below `threshold` is ignored. Endpoints never qualify.
/// Ties report the first sample of a plateau.
pub fn find_extrema(series: &[(f64, f64)], threshold: f64) -> Result<ExtremaReport> {
    if series.len() < 3 {
        return Err(Error::EmptyInput("series needs at least three points"));
    }
    if !threshold.is_finite() || threshold < 0.0 {
        return Err(Error::InvalidParameter {
            name: "threshold",
            value: threshold,
            reason: "must be finite and ≥ 0",
        });
    }
    for pair in series.windows(2) {
        if !(pair[1].0 > pair[0].0) {
            return Err(Error::InvalidParameter {
                name: "series",
                value: pair[1].0,
                reason: "x must be strictly increasing",
            });
        }
    }
    if series.iter().any(|&(_, y)| !y.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "series",
            value: f64::NAN,
            reason: "y must be finite",
        });
    }

    let y = |i: usize| series[i].1;
    let push = |out: &mut Vec<Extremum>, i: usize| {
        out.push(Extremum {
            x: series[i].0,
            y: series[i].1,
            index: i,
        });
    };

    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    // direction: 0 undetermined, +1 rising, −1 falling
    let mut direction = 0i8;
    let mut hi = 0usize;
    let mut lo = 0usize;
    let mut ext = 0usize;
    for i in 1..series.len() {
        match direction {
            0 => {
                if y(i) > y(hi) {
                    hi = i;
                }
                if y(i) < y(lo) {
                    lo = i;
                }
                if y(i) - y(lo) > threshold {
                    direction = 1;
                    ext = if y(hi) > y(i) { hi } else { i };
                } else if y(hi) - y(i) > threshold {
                    direction = -1;
                    ext = if y(lo) < y(i) { lo } else { i };
                }
            }
            1 => {
                if y(i) > y(ext) {
                    ext = i;
                } else if y(ext) - y(i) > threshold {
                    if ext != 0 {
                        push(&mut maxima, ext);
                    }
                    direction = -1;
                    ext = i;
                }
            }
            _ => {
                if y(i) < y(ext) {
                    ext = i;
                } else if y(i) - y(ext) > threshold {
                    if ext != 0 {
                        push(&mut minima, ext);
                    }
                    direction = 1;
                    ext = i;
                }
            }
        }
    }

    let mut gaps: Vec<f64> = series.windows(2).map(|p| p[1].0 - p[0].0).collect();
    gaps.sort_by(f64::total_cmp);
    let grid_step = gaps[gaps.len() / 2];

    Ok(ExtremaReport {
        maxima,
        minima,
        grid_step,
    })
}

/// Outcome of the alternating-oscillation test.
#[derive(Debug, Clone, PartialEq)]
pub struct InterleavingReport {
    pub interleaved: bool,
    /// Position tolerance used: one grid step (the coarser of the two).
    pub tolerance_z: f64,
    /// One entry per violated condition; empty iff `interleaved`.
    pub diagnostics: Vec<String>,
}

/// Tests the weak-control signature: the two conversion efficiencies
/// oscillate in anti-phase, so (a) consecutive maxima of either series
/// bracket exactly one maximum of the other, and (b) every maximum of one
/// series sits on a *minimum* of the other to within one grid step.
/// Condition (b) is only applied inside the span of the other series'
/// maxima, which keeps launch transients out of the comparison.
///
/// The verdict is resolution-limited: tolerances scale with the grid step,
/// so a trace sampled too finely can fail (b) by resolving the small
/// physical asymmetry between the two oscillations. Sample at the scale of
/// the oscillation period (tens of points per period, not thousands).
pub fn interleaving_check(
    report_t: &ExtremaReport,
    report_f: &ExtremaReport,
) -> InterleavingReport {
    let tolerance_z = report_t.grid_step.max(report_f.grid_step) * (1.0 + 1e-9);
    let mut diagnostics = Vec::new();

    if report_t.maxima.len() < 2 || report_f.maxima.len() < 2 {
        return InterleavingReport {
            interleaved: false,
            tolerance_z,
            diagnostics: vec!["fewer than two maxima in a series".into()],
        };
    }

    let count_between = |maxima: &[Extremum], z0: f64, z1: f64| {
        maxima.iter().filter(|m| m.x > z0 && m.x < z1).count()
    };
    for pair in report_t.maxima.windows(2) {
        let k = count_between(&report_f.maxima, pair[0].x, pair[1].x);
        if k != 1 {
            diagnostics.push(format!(
                "{k} eta_f maxima in eta_t interval ({:.4}, {:.4})",
                pair[0].x, pair[1].x
            ));
        }
    }
    for pair in report_f.maxima.windows(2) {
        let k = count_between(&report_t.maxima, pair[0].x, pair[1].x);
        if k != 1 {
            diagnostics.push(format!(
                "{k} eta_t maxima in eta_f interval ({:.4}, {:.4})",
                pair[0].x, pair[1].x
            ));
        }
    }

    let nearest = |z: f64, list: &[Extremum]| {
        list.iter()
            .map(|m| (z - m.x).abs())
            .fold(f64::INFINITY, f64::min)
    };
    let t_span = (report_t.maxima[0].x, report_t.maxima.last().unwrap().x);
    let f_span = (report_f.maxima[0].x, report_f.maxima.last().unwrap().x);
    for m in &report_t.maxima {
        if m.x >= f_span.0 && m.x <= f_span.1 {
            let off = nearest(m.x, &report_f.minima);
            if off > tolerance_z {
                diagnostics.push(format!(
                    "eta_t max at Z = {:.4} has no eta_f minimum within one step (offset {off:.4})",
                    m.x
                ));
            }
        }
    }
    for m in &report_f.maxima {
        if m.x >= t_span.0 && m.x <= t_span.1 {
            let off = nearest(m.x, &report_t.minima);
            if off > tolerance_z {
                diagnostics.push(format!(
                    "eta_f max at Z = {:.4} has no eta_t minimum within one step (offset {off:.4})",
                    m.x
                ));
            }
        }
    }

    InterleavingReport {
        interleaved: diagnostics.is_empty(),
        tolerance_z,
        diagnostics,
    }
}

/// Outcome of the synchronous-oscillation test.
#[derive(Debug, Clone, PartialEq)]
pub struct SynchronyReport {
    pub synchronized: bool,
    /// Tolerance actually used (resolved from the default if none given).
    pub tolerance_z: f64,
    /// Largest offset between an eta_t maximum and its nearest eta_f maximum.
    pub max_offset: f64,
    pub diagnostics: Vec<String>,
}

/// Tests the strong-control signature: every maximum of η_t coincides with
/// a maximum of η_f to within `tolerance_z` (default: 5% of the position of
/// the first η_t maximum). Extrema are detected at [`DEFAULT_PROMINENCE`].
pub fn synchrony_check(
    trace: &PropagationTrace,
    tolerance_z: Option<f64>,
) -> Result<SynchronyReport> {
    if let Some(t) = tolerance_z {
        if !t.is_finite() || t <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "tolerance_z",
                value: t,
                reason: "must be finite and > 0",
            });
        }
    }
    let report_t = find_extrema(&trace.eta_t(), DEFAULT_PROMINENCE)?;
    let report_f = find_extrema(&trace.eta_f(), DEFAULT_PROMINENCE)?;

    if report_t.maxima.is_empty() || report_f.maxima.is_empty() {
        return Ok(SynchronyReport {
            synchronized: false,
            tolerance_z: tolerance_z.unwrap_or(0.0),
            max_offset: f64::INFINITY,
            diagnostics: vec!["a series has no detected maxima".into()],
        });
    }

    let tol = tolerance_z.unwrap_or(0.05 * report_t.maxima[0].x);
    let mut diagnostics = Vec::new();
    let mut max_offset: f64 = 0.0;
    for m in &report_t.maxima {
        let off = report_f
            .maxima
            .iter()
            .map(|f| (m.x - f.x).abs())
            .fold(f64::INFINITY, f64::min);
        max_offset = max_offset.max(off);
        if off > tol {
            diagnostics.push(format!(
                "eta_t max at Z = {:.4}: nearest eta_f max offset {off:.4} > {tol:.4}",
                m.x
            ));
        }
    }

    Ok(SynchronyReport {
        synchronized: diagnostics.is_empty(),
        tolerance_z: tol,
        max_offset,
        diagnostics,
    })
}

/// Highest value of one efficiency along a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub z: f64,
    pub value: f64,
}

/// Global maxima of the three efficiency series over a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakEfficiencies {
    pub eta_t: Peak,
    pub eta_f: Peak,
    pub eta_total: Peak,
}

/// Scans a trace for the best conversion points (first sample wins ties).
pub fn peak_efficiencies(trace: &PropagationTrace) -> Result<PeakEfficiencies> {
    if trace.samples.is_empty() {
        return Err(Error::EmptyInput("trace has no samples"));
    }
    let pick = |f: &dyn Fn(&crate::propagation::TraceSample) -> f64| {
        let mut best = Peak {
            z: trace.samples[0].z,
            value: f(&trace.samples[0]),
        };
        for s in &trace.samples {
            if f(s) > best.value {
                best = Peak { z: s.z, value: f(s) };
            }
        }
        best
    };
    Ok(PeakEfficiencies {
        eta_t: pick(&|s| s.eta.eta_t),
        eta_f: pick(&|s| s.eta.eta_f),
        eta_total: pick(&|s| s.eta.eta_total),
    })
}

/// An induced transparency window in an absorption spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransparencyWindow {
    /// Detuning of the transmission floor.
    pub center: f64,
    /// Full width at half depth: distance between the points where α
    /// crosses floor + (lower flank − floor)/2, linearly interpolated.
    pub width: f64,
    /// Minimum absorption inside the window.
    pub floor: f64,
    /// Height of the taller flanking absorption peak.
    pub peak_alpha: f64,
}

/// Locates the transparency window of a spectrum: the deepest minimum that
/// is flanked by an absorption maximum on each side. A spectrum without
/// such a doublet (single-peaked weak-control spectra) is reported as
/// having no window.
pub fn transparency_window(spectrum: &AbsorptionSpectrum) -> Result<TransparencyWindow> {
    let series = spectrum.series();
    let report = find_extrema(series, DEFAULT_PROMINENCE)?;

    let mut window: Option<(Extremum, Extremum, Extremum)> = None;
    for m in &report.minima {
        let left = report
            .maxima
            .iter()
            .filter(|x| x.index < m.index)
            .last()
            .copied();
        let right = report
            .maxima
            .iter()
            .find(|x| x.index > m.index)
            .copied();
        if let (Some(l), Some(r)) = (left, right) {
            if window.as_ref().map_or(true, |(_, best, _)| m.y < best.y) {
                window = Some((l, *m, r));
            }
        }
    }
    let (left, floor, right) = window.ok_or_else(|| {
        Error::Analysis(
            "no transparency window: spectrum has no minimum flanked by two peaks".into(),
        )
    })?;

    let half = floor.y + 0.5 * (left.y.min(right.y) - floor.y);
    let mut i = floor.index;
    while series[i].1 < half {
        i -= 1; // guaranteed to terminate: series[left.index].1 ≥ half
    }
    let (x0, y0) = series[i];
    let (x1, y1) = series[i + 1];
    let x_left = x0 + (x1 - x0) * (y0 - half) / (y0 - y1);

    let mut i = floor.index;
    while series[i].1 < half {
        i += 1;
    }
    let (x0, y0) = series[i - 1];
    let (x1, y1) = series[i];
    let x_right = x0 + (x1 - x0) * (half - y0) / (y1 - y0);

    Ok(TransparencyWindow {
        center: floor.x,
        width: x_right - x_left,
        floor: floor.y,
        peak_alpha: left.y.max(right.y),
    })
}
