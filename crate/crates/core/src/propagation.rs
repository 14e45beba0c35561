//! Coupled-mode propagation of the probe, TWM, and FWM fields.
//!
//! Under the undepleted-pump approximation and adiabatic elimination of the
//! atomic coherences, the three slowly-varying amplitudes obey a linear
//! constant-coefficient system
//!
//! ```text
//! d/dZ (Ωp, Ωt, Ωf)ᵀ = M · (Ωp, Ωt, Ωf)ᵀ
//! ```
//!
//! solved here two independent ways: classical fixed-step RK4
//! ([`integrate_rk4`]) and the exact matrix exponential
//! ([`propagate_closed_form`], [`Propagator`]). The two routes share nothing
//! past `M` itself, so they cross-check each other in the tests.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::linalg::{self, Eig3, EIG_COND_LIMIT};
use crate::model::{self, check_lambda, derive_rates, FieldVector, SystemParams};
use crate::C64;

/// RK4 keeps its full fourth-order behaviour comfortably while
/// ‖M‖∞·h stays at or below this fraction.
pub const STABILITY_FRACTION: f64 = 0.05;

/// Hard cap on recorded samples (memory guard, not a physics limit).
const MAX_SAMPLES: usize = 50_000_000;

/// The coupling matrix `M` plus the parameters it was built from. Carrying
/// the params along lets every downstream step (efficiencies, traces)
/// run off a single value.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    pub m: Matrix3<C64>,
    pub params: SystemParams,
}

impl CouplingMatrix {
    /// ‖M‖∞ — an upper bound on the spectral radius, used for step control.
    pub fn spectral_bound(&self) -> f64 {
        linalg::inf_norm(&self.m)
    }

    /// Right-hand side of the propagation system at one point.
    pub fn derivative(&self, fields: &FieldVector) -> FieldVector {
        FieldVector::from_vector(&(self.m * fields.as_vector()))
    }

    /// Eigenvalues of `M` (unordered). All real parts are ≤ 0 for physical
    /// parameters — the medium only redistributes and absorbs.
    pub fn eigenvalues(&self) -> [C64; 3] {
        linalg::eig3_values(&self.m)
    }
}

/// Builds `M` from the steady-state coherences:
///
/// ```text
///      ⎡ −κ12·Γ31/(2λ)      −iκ12·Ωc*/(4λ)     κ12·Ωd·Ωc*/(8Γ21λ) ⎤
/// M =  ⎢ −iκ13·Ωc/(4λ)      −κ13·Γ21/(2λ)      −iκ13·Ωd/(4λ)      ⎥
///      ⎣ κ12·Ωc·Ωd*/(8Γ21λ) −iκ12·Ωd*/(4λ)     −κ12·Γ31/(2λ)      ⎦
/// ```
///
/// The Γ21 in the corner denominators only matters when Ωd ≠ 0 (those
/// entries vanish with Ωd); Γ21 = 0 with a live driving field is singular.
pub fn build_coupling_matrix(params: &SystemParams) -> Result<CouplingMatrix> {
    let rates = derive_rates(params)?;
    check_lambda(&rates)?;

    let i = C64::new(0.0, 1.0);
    let two_lambda = 2.0 * rates.lambda;
    let four_lambda = 4.0 * rates.lambda;
    let k12 = C64::new(params.kappa12, 0.0);
    let k13 = C64::new(params.kappa13, 0.0);
    let oc = params.omega_c;
    let od = params.omega_d;

    let corner = |num: C64| -> Result<C64> {
        if num.norm() == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        if rates.gamma21.norm() < model::SINGULAR_EPS {
            return Err(Error::Singular {
                context: "Γ21 = 0 with Ωd ≠ 0: parametric corner terms diverge".into(),
            });
        }
        Ok(k12 * num / (8.0 * rates.gamma21 * rates.lambda))
    };

    let m_pp = -k12 * rates.gamma31 / two_lambda;
    let m_pt = -i * k12 * oc.conj() / four_lambda;
    let m_pf = corner(od * oc.conj())?;
    let m_tp = -i * k13 * oc / four_lambda;
    let m_tt = -k13 * rates.gamma21 / two_lambda;
    let m_tf = -i * k13 * od / four_lambda;
    let m_fp = corner(oc * od.conj())?;
    let m_ft = -i * k12 * od.conj() / four_lambda;
    let m_ff = m_pp;

    Ok(CouplingMatrix {
        m: Matrix3::new(m_pp, m_pt, m_pf, m_tp, m_tt, m_tf, m_fp, m_ft, m_ff),
        params: params.clone(),
    })
}

/// Conversion efficiencies and probe transmission relative to the launch
/// amplitude Ωp0. The TWM efficiency is photon-number based, hence the
/// dipole-ratio weight and the division by the frequency ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efficiencies {
    /// η_t = (μ_ratio·|Ωt|/|Ωp0|)² / freq_ratio
    pub eta_t: f64,
    /// η_f = |Ωf/Ωp0|²
    pub eta_f: f64,
    /// η_t + η_f
    pub eta_total: f64,
    /// |Ωp/Ωp0|²
    pub transmission: f64,
}

/// Efficiencies of a field configuration against `params.probe_rabi0`.
pub fn efficiencies(params: &SystemParams, fields: &FieldVector) -> Result<Efficiencies> {
    let p0 = params.probe_rabi0.norm();
    if p0 == 0.0 || !p0.is_finite() {
        return Err(Error::InvalidParameter {
            name: "probe_rabi0",
            value: p0,
            reason: "must be finite and nonzero",
        });
    }
    if !(params.freq_ratio.is_finite() && params.freq_ratio > 0.0) {
        return Err(Error::InvalidParameter {
            name: "freq_ratio",
            value: params.freq_ratio,
            reason: "must be finite and > 0",
        });
    }
    let t_amp = params.mu_ratio * fields.omega_t.norm() / p0;
    let eta_t = t_amp * t_amp / params.freq_ratio;
    let f_amp = fields.omega_f.norm() / p0;
    let eta_f = f_amp * f_amp;
    let p_amp = fields.omega_p.norm() / p0;
    Ok(Efficiencies {
        eta_t,
        eta_f,
        eta_total: eta_t + eta_f,
        transmission: p_amp * p_amp,
    })
}

/// One recorded point of a propagation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub z: f64,
    pub fields: FieldVector,
    pub eta: Efficiencies,
}

/// A propagation run: samples ordered by Z, plus the actual grid step used
/// after stability capping and rounding to land exactly on `z_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationTrace {
    pub samples: Vec<TraceSample>,
    pub step_used: f64,
}

impl PropagationTrace {
    pub fn eta_t(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.z, s.eta.eta_t)).collect()
    }

    pub fn eta_f(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.z, s.eta.eta_f)).collect()
    }

    pub fn eta_total(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.z, s.eta.eta_total)).collect()
    }

    pub fn transmission(&self) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .map(|s| (s.z, s.eta.transmission))
            .collect()
    }

    pub fn last(&self) -> &TraceSample {
        self.samples.last().expect("traces are never empty")
    }
}

/// Requested step capped at `STABILITY_FRACTION / ‖M‖∞`. A zero matrix
/// (no absorption, no coupling) leaves the request untouched.
pub fn effective_step(matrix: &CouplingMatrix, requested: f64) -> f64 {
    let bound = matrix.spectral_bound();
    if bound > 0.0 {
        requested.min(STABILITY_FRACTION / bound)
    } else {
        requested
    }
}

/// A default propagation window: three half-periods of the slowest field
/// oscillation, 3π/max|Im λᵢ|, which comfortably brackets the first few
/// conversion maxima in both regimes. Falls back to a few absorption
/// lengths when the dynamics are purely decaying.
pub fn default_z_max(matrix: &CouplingMatrix) -> f64 {
    let bound = matrix.spectral_bound();
    let max_im = matrix
        .eigenvalues()
        .iter()
        .map(|l| l.im.abs())
        .fold(0.0, f64::max);
    if max_im > 1e-12 * bound.max(1.0) {
        3.0 * std::f64::consts::PI / max_im
    } else if bound > 0.0 {
        6.0 / bound
    } else {
        1.0
    }
}

fn grid(z_max: f64, step: f64, matrix: &CouplingMatrix) -> Result<(usize, f64)> {
    if !z_max.is_finite() || z_max <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "z_max",
            value: z_max,
            reason: "must be finite and > 0",
        });
    }
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "step",
            value: step,
            reason: "must be finite and > 0",
        });
    }
    let capped = effective_step(matrix, step);
    let n = (z_max / capped).ceil() as usize;
    let n = n.max(1);
    Ok((n, z_max / n as f64))
}

fn rk4_step(m: &Matrix3<C64>, v: &Vector3<C64>, h: f64) -> Vector3<C64> {
    let hc = C64::new(h, 0.0);
    let half = C64::new(0.5 * h, 0.0);
    let two = C64::new(2.0, 0.0);
    let k1 = m * v;
    let k2 = m * (v + k1 * half);
    let k3 = m * (v + k2 * half);
    let k4 = m * (v + k3 * hc);
    v + (k1 + (k2 + k3) * two + k4) * C64::new(h / 6.0, 0.0)
}

/// Fixed-step classical RK4 from Z = 0 to `z_max`, recording every step.
/// The step is capped by [`effective_step`] and then rounded down so an
/// integer number of steps lands exactly on `z_max`; the step actually
/// taken is reported in the trace.
pub fn integrate_rk4(
    matrix: &CouplingMatrix,
    initial: &FieldVector,
    z_max: f64,
    step: f64,
) -> Result<PropagationTrace> {
    integrate_rk4_strided(matrix, initial, z_max, step, 1)
}

/// [`integrate_rk4`] recording only every `stride`-th step (the launch
/// point and the final point are always kept). Integration accuracy is
/// unaffected — only the sampling density changes.
pub fn integrate_rk4_strided(
    matrix: &CouplingMatrix,
    initial: &FieldVector,
    z_max: f64,
    step: f64,
    stride: usize,
) -> Result<PropagationTrace> {
    if stride == 0 {
        return Err(Error::InvalidParameter {
            name: "stride",
            value: 0.0,
            reason: "must be ≥ 1",
        });
    }
    if !initial.is_finite() {
        return Err(Error::InvalidParameter {
            name: "initial",
            value: f64::NAN,
            reason: "launch fields must be finite",
        });
    }
    let (n, h) = grid(z_max, step, matrix)?;
    if n / stride + 2 > MAX_SAMPLES {
        return Err(Error::InvalidParameter {
            name: "step",
            value: step,
            reason: "grid too fine: would record more than 5e7 samples",
        });
    }

    let params = &matrix.params;
    let mut samples = Vec::with_capacity(n / stride + 2);
    let mut v = initial.as_vector();
    let record =
        |samples: &mut Vec<TraceSample>, z: f64, v: &Vector3<C64>| -> Result<()> {
            let fields = FieldVector::from_vector(v);
            samples.push(TraceSample {
                z,
                eta: efficiencies(params, &fields)?,
                fields,
            });
            Ok(())
        };

    record(&mut samples, 0.0, &v)?;
    for k in 1..=n {
        v = rk4_step(&matrix.m, &v, h);
        let z = k as f64 * h;
        if !v.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::NonFinite {
                z,
                step: h,
                spectral_bound: matrix.spectral_bound(),
            });
        }
        if k % stride == 0 || k == n {
            record(&mut samples, z, &v)?;
        }
    }
    Ok(PropagationTrace {
        samples,
        step_used: h,
    })
}

/// Exact solution at a single distance: fields(z) = exp(M·z)·fields(0).
pub fn propagate_closed_form(
    matrix: &CouplingMatrix,
    initial: &FieldVector,
    z: f64,
) -> Result<FieldVector> {
    Propagator::new(matrix).propagate(initial, z)
}

/// Reusable closed-form solver. Diagonalizes `M` once; each evaluation is
/// then three complex exponentials. Ill-conditioned or defective `M` falls
/// back to scaling-and-squaring per evaluation — exact in a different way,
/// never silently degraded.
pub struct Propagator {
    matrix: CouplingMatrix,
    eig: Option<Eig3>,
}

impl Propagator {
    pub fn new(matrix: &CouplingMatrix) -> Self {
        let eig = linalg::eig3(&matrix.m).filter(|e| e.cond <= EIG_COND_LIMIT);
        Self {
            matrix: matrix.clone(),
            eig,
        }
    }

    /// Whether evaluations run through the cached eigenbasis (as opposed
    /// to the series fallback).
    pub fn is_diagonalized(&self) -> bool {
        self.eig.is_some()
    }

    fn evolve(&self, v0: &Vector3<C64>, z: f64) -> Vector3<C64> {
        match &self.eig {
            Some(e) => {
                let w = e.inv_vectors * v0;
                let w = Vector3::new(
                    (e.values[0] * z).exp() * w[0],
                    (e.values[1] * z).exp() * w[1],
                    (e.values[2] * z).exp() * w[2],
                );
                e.vectors * w
            }
            None => linalg::expm(&self.matrix.m, z) * v0,
        }
    }

    pub fn propagate(&self, initial: &FieldVector, z: f64) -> Result<FieldVector> {
        if !z.is_finite() || z < 0.0 {
            return Err(Error::InvalidParameter {
                name: "z",
                value: z,
                reason: "must be finite and ≥ 0",
            });
        }
        if !initial.is_finite() {
            return Err(Error::InvalidParameter {
                name: "initial",
                value: f64::NAN,
                reason: "launch fields must be finite",
            });
        }
        let out = FieldVector::from_vector(&self.evolve(&initial.as_vector(), z));
        if !out.is_finite() {
            return Err(Error::NonFinite {
                z,
                step: z,
                spectral_bound: self.matrix.spectral_bound(),
            });
        }
        Ok(out)
    }

    /// Uniformly sampled closed-form trace. Every sample is evaluated
    /// directly at its own Z — no error accumulation along the grid.
    pub fn trace(
        &self,
        initial: &FieldVector,
        z_max: f64,
        step: f64,
    ) -> Result<PropagationTrace> {
        if !initial.is_finite() {
            return Err(Error::InvalidParameter {
                name: "initial",
                value: f64::NAN,
                reason: "launch fields must be finite",
            });
        }
        if !step.is_finite() || step <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "step",
                value: step,
                reason: "must be finite and > 0",
            });
        }
        if !z_max.is_finite() || z_max <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "z_max",
                value: z_max,
                reason: "must be finite and > 0",
            });
        }
        let n = ((z_max / step).ceil() as usize).max(1);
        if n + 1 > MAX_SAMPLES {
            return Err(Error::InvalidParameter {
                name: "step",
                value: step,
                reason: "grid too fine: would record more than 5e7 samples",
            });
        }
        let h = z_max / n as f64;
        let v0 = initial.as_vector();
        let mut samples = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let z = k as f64 * h;
            let v = self.evolve(&v0, z);
            let fields = FieldVector::from_vector(&v);
            if !fields.is_finite() {
                return Err(Error::NonFinite {
                    z,
                    step: h,
                    spectral_bound: self.matrix.spectral_bound(),
                });
            }
            samples.push(TraceSample {
                z,
                eta: efficiencies(&self.matrix.params, &fields)?,
                fields,
            });
        }
        Ok(PropagationTrace {
            samples,
            step_used: h,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn weak() -> SystemParams {
        SystemParams {
            omega_c: C64::new(0.1, 0.0),
            omega_d: C64::new(0.1, 0.0),
            ..SystemParams::default()
        }
    }

    fn strong() -> SystemParams {
        SystemParams {
            omega_c: C64::new(8.0, 0.0),
            omega_d: C64::new(0.65, 0.0),
            delta_p: 0.16,
            ..SystemParams::default()
        }
    }

    #[test]
    fn weak_matrix_entries() {
        let cm = build_coupling_matrix(&weak()).unwrap();
        let m = &cm.m;
        assert_relative_eq!(m[(0, 0)].re, -50.124688279301745, max_relative = 1e-13);
        assert_abs_diff_eq!(m[(0, 0)].im, 0.0, epsilon = 1e-15);
        assert_eq!(m[(0, 0)], m[(2, 2)]);
        assert_relative_eq!(m[(0, 1)].im, -4.987531172069825, max_relative = 1e-13);
        assert_abs_diff_eq!(m[(0, 1)].re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(m[(0, 2)].re, 49.87531172069825, max_relative = 1e-13);
        assert_relative_eq!(m[(1, 0)].im, -16.458852867830424, max_relative = 1e-13);
        assert_relative_eq!(m[(1, 1)].re, -1.6458852867830425, max_relative = 1e-13);
        assert_eq!(m[(1, 0)], m[(1, 2)]); // Ωc = Ωd makes the t-row symmetric
        assert_eq!(m[(0, 2)], m[(2, 0)]);
        assert_eq!(m[(0, 1)], m[(2, 1)]);
    }

    #[test]
    fn no_drive_decouples_fwm() {
        let p = SystemParams {
            omega_c: C64::new(0.1, 0.0),
            ..SystemParams::default()
        };
        let cm = build_coupling_matrix(&p).unwrap();
        for idx in [(0, 2), (2, 0), (1, 2), (2, 1)] {
            assert_eq!(cm.m[idx], C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn corner_terms_need_gamma21() {
        let p = SystemParams {
            gamma12: 0.0,
            ..weak()
        };
        assert!(matches!(
            build_coupling_matrix(&p),
            Err(Error::Singular { .. })
        ));
        // but without the driving field the same rates are fine
        let p = SystemParams {
            gamma12: 0.0,
            omega_d: C64::new(0.0, 0.0),
            ..weak()
        };
        assert!(build_coupling_matrix(&p).is_ok());
    }

    #[test]
    fn eigenvalues_weak_regime() {
        let cm = build_coupling_matrix(&weak()).unwrap();
        let mut eigs = cm.eigenvalues();
        eigs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        assert_abs_diff_eq!(eigs[0].re, -100.0, epsilon = 1e-6);
        assert_abs_diff_eq!(eigs[0].im, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(eigs[1].re, -0.947631, epsilon = 1e-6);
        assert_abs_diff_eq!(eigs[1].im.abs(), 12.794160, epsilon = 1e-6);
        assert_abs_diff_eq!(eigs[2].re, -0.947631, epsilon = 1e-6);
        assert!(eigs.iter().all(|l| l.re < 0.0));
    }

    #[test]
    fn eigenvalues_strong_regime() {
        let cm = build_coupling_matrix(&strong()).unwrap();
        let mut eigs = cm.eigenvalues();
        eigs.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert_abs_diff_eq!(eigs[0].re, -0.008080, epsilon = 1e-6);
        assert_abs_diff_eq!(eigs[0].im, -0.357913, epsilon = 1e-6);
        assert_abs_diff_eq!(eigs[1].re, -0.006987, epsilon = 1e-6);
        assert_abs_diff_eq!(eigs[1].im, 0.007228, epsilon = 1e-6);
        assert_abs_diff_eq!(eigs[2].re, -0.017035, epsilon = 1e-6);
        assert_abs_diff_eq!(eigs[2].im, 0.324310, epsilon = 1e-6);
        assert!(eigs.iter().all(|l| l.re < 0.0));
    }

    #[test]
    fn default_window_covers_first_oscillations() {
        let weak_cm = build_coupling_matrix(&weak()).unwrap();
        assert_relative_eq!(default_z_max(&weak_cm), 0.736637, max_relative = 1e-4);
        let strong_cm = build_coupling_matrix(&strong()).unwrap();
        assert_relative_eq!(default_z_max(&strong_cm), 26.3326, max_relative = 1e-4);
    }

    #[test]
    fn closed_form_weak_pin() {
        // frozen from an independent matrix-exponential implementation
        let cm = build_coupling_matrix(&weak()).unwrap();
        let out = propagate_closed_form(&cm, &FieldVector::launch(&weak()), 1.0).unwrap();
        assert_relative_eq!(out.omega_p.re, 1.91211042621239162e-4, max_relative = 1e-9);
        assert_abs_diff_eq!(out.omega_p.im, 0.0, epsilon = 1e-18);
        assert_relative_eq!(out.omega_t.im, -1.12617964924995940e-4, max_relative = 1e-9);
        assert_abs_diff_eq!(out.omega_t.re, 0.0, epsilon = 1e-18);
        assert_relative_eq!(out.omega_f.re, 1.91211042621239162e-4, max_relative = 1e-9);
    }

    #[test]
    fn closed_form_strong_pin() {
        let cm = build_coupling_matrix(&strong()).unwrap();
        let out = propagate_closed_form(&cm, &FieldVector::launch(&strong()), 10.0).unwrap();
        assert_relative_eq!(out.omega_p.re, -8.35118064601140446e-4, max_relative = 1e-9);
        assert_relative_eq!(out.omega_p.im, 1.46291971093872062e-4, max_relative = 1e-9);
        assert_relative_eq!(out.omega_t.re, -5.03839776272943128e-5, max_relative = 1e-9);
        assert_relative_eq!(out.omega_t.im, 2.33494416881268598e-4, max_relative = 1e-9);
        assert_relative_eq!(out.omega_f.re, 2.82190536302809467e-5, max_relative = 1e-9);
        assert_relative_eq!(out.omega_f.im, 2.03406241182761856e-4, max_relative = 1e-9);
    }

    #[test]
    fn rk4_matches_closed_form_at_tight_step() {
        let p = weak();
        let cm = build_coupling_matrix(&p).unwrap();
        let launch = FieldVector::launch(&p);
        let step = 0.01 / cm.spectral_bound();
        let trace = integrate_rk4(&cm, &launch, 1.0, step).unwrap();
        let end = trace.last();
        let exact = propagate_closed_form(&cm, &launch, 1.0).unwrap();
        let err = (end.fields.as_vector() - exact.as_vector()).norm();
        let scale = p.probe_rabi0.norm();
        assert!(err / scale < 1e-9, "relative error {:.3e}", err / scale);
    }

    #[test]
    fn rk4_step_capping_and_rounding() {
        let p = weak();
        let cm = build_coupling_matrix(&p).unwrap();
        let bound = cm.spectral_bound();
        // a wildly coarse request is capped at the stability fraction
        let trace = integrate_rk4(&cm, &FieldVector::launch(&p), 1.0, 0.5).unwrap();
        assert!(trace.step_used <= STABILITY_FRACTION / bound + 1e-15);
        // and the grid still lands exactly on z_max
        assert_abs_diff_eq!(trace.last().z, 1.0);
        let n = trace.samples.len() - 1;
        assert_abs_diff_eq!(trace.step_used, 1.0 / n as f64);
    }

    #[test]
    fn strided_trace_keeps_endpoints() {
        let p = weak();
        let cm = build_coupling_matrix(&p).unwrap();
        let launch = FieldVector::launch(&p);
        let full = integrate_rk4(&cm, &launch, 0.5, 1e-3).unwrap();
        let strided = integrate_rk4_strided(&cm, &launch, 0.5, 1e-3, 7).unwrap();
        assert_eq!(strided.samples[0].z, 0.0);
        assert_abs_diff_eq!(strided.last().z, 0.5);
        assert_eq!(strided.last().fields, full.last().fields);
        assert!(strided.samples.len() < full.samples.len());
    }

    #[test]
    fn launch_efficiencies() {
        let p = weak();
        let eta = efficiencies(&p, &FieldVector::launch(&p)).unwrap();
        assert_abs_diff_eq!(eta.transmission, 1.0);
        assert_abs_diff_eq!(eta.eta_t, 0.0);
        assert_abs_diff_eq!(eta.eta_f, 0.0);
        assert_abs_diff_eq!(eta.eta_total, 0.0);
    }

    #[test]
    fn efficiency_weights() {
        // |Ωt| = |Ωp0| scores 1/freq_ratio photons; doubling μ quadruples it
        let p = weak();
        let f = FieldVector::new(C64::new(0.0, 0.0), p.probe_rabi0, C64::new(0.0, 0.0));
        let eta = efficiencies(&p, &f).unwrap();
        assert_relative_eq!(eta.eta_t, 1.0 / p.freq_ratio, max_relative = 1e-14);
        let p2 = SystemParams {
            mu_ratio: 2.0,
            ..p.clone()
        };
        let eta2 = efficiencies(&p2, &f).unwrap();
        assert_relative_eq!(eta2.eta_t, 4.0 / p.freq_ratio, max_relative = 1e-14);
        assert_abs_diff_eq!(eta.eta_f, 0.0);
    }

    #[test]
    fn propagator_trace_matches_single_shots() {
        let p = strong();
        let cm = build_coupling_matrix(&p).unwrap();
        let launch = FieldVector::launch(&p);
        let prop = Propagator::new(&cm);
        assert!(prop.is_diagonalized());
        let trace = prop.trace(&launch, 10.0, 2.5).unwrap();
        assert_eq!(trace.samples.len(), 5);
        let mid = &trace.samples[2];
        assert_abs_diff_eq!(mid.z, 5.0);
        let direct = prop.propagate(&launch, 5.0).unwrap();
        assert_eq!(mid.fields, direct);
    }

    #[test]
    fn closed_form_rejects_negative_distance() {
        let p = weak();
        let cm = build_coupling_matrix(&p).unwrap();
        assert!(matches!(
            propagate_closed_form(&cm, &FieldVector::launch(&p), -1.0),
            Err(Error::InvalidParameter { name: "z", .. })
        ));
    }

    #[test]
    fn energy_never_amplified() {
        // all eigenvalues sit in the left half-plane: total photon score at
        // the end of a long run stays below launch
        for p in [weak(), strong()] {
            let cm = build_coupling_matrix(&p).unwrap();
            let launch = FieldVector::launch(&p);
            let out = propagate_closed_form(&cm, &launch, 200.0).unwrap();
            let eta = efficiencies(&p, &out).unwrap();
            assert!(eta.transmission + eta.eta_total < 1.0 + 1e-9);
        }
    }
}
