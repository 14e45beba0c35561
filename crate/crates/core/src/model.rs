//! System parameters, derived decoherence rates, perturbative steady-state
//! coherences, and the probe absorption coefficient.
//!
//! Level convention: |1⟩ is the ground state; the probe (and the generated
//! FWM field) couple |1⟩↔|2⟩, the control and driving fields couple
//! |2⟩↔|3⟩, and the generated TWM field closes the loop on |1⟩↔|3⟩. The
//! decoherence combinations
//!
//! ```text
//! τ21 = (γ12 + γφ2)/2          Γ21 = τ21 + iΔp
//! τ31 = (γ13 + γ23 + γφ3)/2    Γ31 = τ31 + iΔp
//! τ32 = τ21 + τ31              λ   = Γ21·Γ31 + |Ωc|²/4
//! ```
//!
//! appear as the denominators of every steady-state expression below.

use crate::error::{Error, Result};
use crate::C64;

/// Threshold below which |λ| or |Γ21| is treated as an exact singularity.
/// These vanish only on measure-zero parameter sets; anything this small
/// would overflow the downstream divisions anyway.
pub(crate) const SINGULAR_EPS: f64 = 1e-150;

/// Physical parameters of one run. All rates and Rabi frequencies are in
/// units of γ13; `kappa12` sets the Z scale. Immutable value type: every
/// operation takes it by reference and derives what it needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Relaxation rate |2⟩ → |1⟩.
    pub gamma12: f64,
    /// Relaxation rate |3⟩ → |1⟩ (the rate unit; defaults to 1).
    pub gamma13: f64,
    /// Relaxation rate |3⟩ → |2⟩.
    pub gamma23: f64,
    /// Pure dephasing of |2⟩.
    pub gamma_phi2: f64,
    /// Pure dephasing of |3⟩.
    pub gamma_phi3: f64,
    /// Control Rabi frequency Ωc on |2⟩↔|3⟩ (complex; the reference
    /// operating points use real positive values).
    pub omega_c: C64,
    /// Driving Rabi frequency Ωd on |2⟩↔|3⟩ (complex).
    pub omega_d: C64,
    /// Probe detuning Δp = ω21 − ωp.
    pub delta_p: f64,
    /// Propagation constant of the |1⟩↔|2⟩ transition (the Z unit; defaults to 1).
    pub kappa12: f64,
    /// Propagation constant of the |1⟩↔|3⟩ transition.
    pub kappa13: f64,
    /// Dipole-moment ratio μ12/μ13.
    pub mu_ratio: f64,
    /// Frequency ratio ωt/ωp of the TWM signal to the probe.
    pub freq_ratio: f64,
    /// Probe Rabi frequency Ωp0 at Z = 0; efficiencies are ratios against it.
    pub probe_rabi0: C64,
}

impl Default for SystemParams {
    /// Weak-dissipation defaults used throughout the reference runs:
    /// γ12 = 0.01, γ23 = 0.005, no pure dephasing, κ13 = 3.3κ12,
    /// μ12 = μ13, ωt = 3.3ωp, Ωp0 = 10⁻³. Drives default to zero.
    fn default() -> Self {
        Self {
            gamma12: 0.01,
            gamma13: 1.0,
            gamma23: 0.005,
            gamma_phi2: 0.0,
            gamma_phi3: 0.0,
            omega_c: C64::new(0.0, 0.0),
            omega_d: C64::new(0.0, 0.0),
            delta_p: 0.0,
            kappa12: 1.0,
            kappa13: 3.3,
            mu_ratio: 1.0,
            freq_ratio: 3.3,
            probe_rabi0: C64::new(1e-3, 0.0),
        }
    }
}

impl SystemParams {
    /// Checks every invariant, reporting the first violated field by name.
    pub fn validate(&self) -> Result<()> {
        fn nonneg(name: &'static str, value: f64) -> Result<()> {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and ≥ 0",
                });
            }
            Ok(())
        }
        fn positive(name: &'static str, value: f64) -> Result<()> {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and > 0",
                });
            }
            Ok(())
        }

        nonneg("gamma12", self.gamma12)?;
        positive("gamma13", self.gamma13)?;
        nonneg("gamma23", self.gamma23)?;
        nonneg("gamma_phi2", self.gamma_phi2)?;
        nonneg("gamma_phi3", self.gamma_phi3)?;
        positive("kappa12", self.kappa12)?;
        positive("kappa13", self.kappa13)?;
        positive("mu_ratio", self.mu_ratio)?;
        positive("freq_ratio", self.freq_ratio)?;
        if !self.delta_p.is_finite() {
            return Err(Error::InvalidParameter {
                name: "delta_p",
                value: self.delta_p,
                reason: "must be finite",
            });
        }
        for (name, v) in [("omega_c", self.omega_c), ("omega_d", self.omega_d)] {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: f64::NAN,
                    reason: "must be finite",
                });
            }
        }
        let p0 = self.probe_rabi0;
        if !p0.re.is_finite() || !p0.im.is_finite() || p0.norm() == 0.0 {
            return Err(Error::InvalidParameter {
                name: "probe_rabi0",
                value: p0.norm(),
                reason: "must be finite and nonzero",
            });
        }
        Ok(())
    }
}

/// Decoherence combinations derived from [`SystemParams`]; see the module
/// docs for the definitions. `lambda` is the shared denominator whose zeros
/// are the (measure-zero) singular points of the theory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates {
    pub tau21: f64,
    pub tau31: f64,
    pub tau32: f64,
    /// Γ21 = τ21 + iΔp.
    pub gamma21: C64,
    /// Γ31 = τ31 + iΔp.
    pub gamma31: C64,
    /// λ = Γ21·Γ31 + |Ωc|²/4.
    pub lambda: C64,
}

/// Complex Rabi amplitudes of the three propagating fields at one position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldVector {
    pub omega_p: C64,
    pub omega_t: C64,
    pub omega_f: C64,
}

impl FieldVector {
    pub fn new(omega_p: C64, omega_t: C64, omega_f: C64) -> Self {
        Self {
            omega_p,
            omega_t,
            omega_f,
        }
    }

    pub fn zero() -> Self {
        Self::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0))
    }

    /// Launch condition: probe at its initial amplitude, no generated fields.
    pub fn launch(params: &SystemParams) -> Self {
        Self::new(params.probe_rabi0, C64::new(0.0, 0.0), C64::new(0.0, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        [self.omega_p, self.omega_t, self.omega_f]
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub(crate) fn as_vector(&self) -> nalgebra::Vector3<C64> {
        nalgebra::Vector3::new(self.omega_p, self.omega_t, self.omega_f)
    }

    pub(crate) fn from_vector(v: &nalgebra::Vector3<C64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

/// The five perturbative steady-state coherences, labeled by transition and
/// expansion order (`rho21_3` is the third-order |2⟩↔|1⟩ coherence).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceSet {
    pub rho31_1: C64,
    pub rho21_1: C64,
    pub rho31_2: C64,
    pub rho21_2: C64,
    pub rho21_3: C64,
}

/// Rates with Γ21, Γ31, λ evaluated at an explicit detuning (used by the
/// spectrum scan, which sweeps Δp without touching the rest of the params).
fn rates_at(params: &SystemParams, delta_p: f64) -> DerivedRates {
    let tau21 = 0.5 * (params.gamma12 + params.gamma_phi2);
    let tau31 = 0.5 * (params.gamma13 + params.gamma23 + params.gamma_phi3);
    let tau32 = tau21 + tau31;
    let gamma21 = C64::new(tau21, delta_p);
    let gamma31 = C64::new(tau31, delta_p);
    let lambda = gamma21 * gamma31 + params.omega_c.norm_sqr() * 0.25;
    DerivedRates {
        tau21,
        tau31,
        tau32,
        gamma21,
        gamma31,
        lambda,
    }
}

/// Derives all decoherence combinations at the params' own detuning.
/// Deterministic and pure; rejects invalid inputs (negative rates, …).
pub fn derive_rates(params: &SystemParams) -> Result<DerivedRates> {
    params.validate()?;
    Ok(rates_at(params, params.delta_p))
}

pub(crate) fn check_lambda(rates: &DerivedRates) -> Result<()> {
    if rates.lambda.norm() < SINGULAR_EPS {
        return Err(Error::Singular {
            context: format!(
                "λ = Γ21Γ31 + |Ωc|²/4 vanished (Γ21 = {}, Γ31 = {})",
                rates.gamma21, rates.gamma31
            ),
        });
    }
    Ok(())
}

/// First-order coherences.
///
/// ρ31⁽¹⁾ = iΩtΓ21/(2λ),  ρ21⁽¹⁾ = i(Ωf+Ωp)Γ31/(2λ).
pub fn coherence_first_order(rates: &DerivedRates, fields: &FieldVector) -> Result<(C64, C64)> {
    check_lambda(rates)?;
    let i = C64::new(0.0, 1.0);
    let two_lambda = 2.0 * rates.lambda;
    let rho31_1 = i * fields.omega_t * rates.gamma21 / two_lambda;
    let rho21_1 = i * (fields.omega_f + fields.omega_p) * rates.gamma31 / two_lambda;
    Ok((rho31_1, rho21_1))
}

/// Second-order coherences.
///
/// ρ31⁽²⁾ = −(ΩpΩc + ΩfΩd)/(4λ),  ρ21⁽²⁾ = −Ωt(Ωc* + Ωd*)/(4λ).
pub fn coherence_second_order(
    rates: &DerivedRates,
    params: &SystemParams,
    fields: &FieldVector,
) -> Result<(C64, C64)> {
    check_lambda(rates)?;
    let four_lambda = 4.0 * rates.lambda;
    let rho31_2 = -(fields.omega_p * params.omega_c + fields.omega_f * params.omega_d) / four_lambda;
    let rho21_2 = -fields.omega_t * (params.omega_c.conj() + params.omega_d.conj()) / four_lambda;
    Ok((rho31_2, rho21_2))
}

/// Third-order coherence.
///
/// ρ21⁽³⁾ = −i(ΩpΩcΩd* + ΩfΩdΩc*)/(8λΓ21). Γ21 = 0 (possible only for
/// γ12 = γφ2 = 0 at Δp = 0) is rejected as singular.
pub fn coherence_third_order(
    rates: &DerivedRates,
    params: &SystemParams,
    fields: &FieldVector,
) -> Result<C64> {
    check_lambda(rates)?;
    if rates.gamma21.norm() < SINGULAR_EPS {
        return Err(Error::Singular {
            context: "Γ21 = 0 (γ12 = γφ2 = 0 at Δp = 0)".into(),
        });
    }
    let i = C64::new(0.0, 1.0);
    let num = fields.omega_p * params.omega_c * params.omega_d.conj()
        + fields.omega_f * params.omega_d * params.omega_c.conj();
    Ok(-i * num / (8.0 * rates.lambda * rates.gamma21))
}

/// All five coherences in one struct; the orders are as printed above.
pub fn coherences(
    rates: &DerivedRates,
    params: &SystemParams,
    fields: &FieldVector,
) -> Result<CoherenceSet> {
    let (rho31_1, rho21_1) = coherence_first_order(rates, fields)?;
    let (rho31_2, rho21_2) = coherence_second_order(rates, params, fields)?;
    let rho21_3 = coherence_third_order(rates, params, fields)?;
    Ok(CoherenceSet {
        rho31_1,
        rho21_1,
        rho31_2,
        rho21_2,
        rho21_3,
    })
}

/// Linear absorption coefficient of the probe at detuning `delta_p`:
/// α(Δp) = κ12·Re(Γ31/(2λ)), the exponential attenuation rate of Ωp per
/// unit Z from the linear term of the probe propagation equation. Real and
/// finite wherever λ ≠ 0; in units of κ12 when κ12 = 1.
pub fn probe_absorption(params: &SystemParams, delta_p: f64) -> Result<f64> {
    params.validate()?;
    if !delta_p.is_finite() {
        return Err(Error::InvalidParameter {
            name: "delta_p",
            value: delta_p,
            reason: "must be finite",
        });
    }
    let rates = rates_at(params, delta_p);
    check_lambda(&rates).map_err(|_| Error::Singular {
        context: format!("λ vanished at Δp = {delta_p}"),
    })?;
    Ok(params.kappa12 * (rates.gamma31 / (2.0 * rates.lambda)).re)
}
