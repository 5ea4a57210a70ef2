//! Internal dissipation and second-law auditing.
//!
//! The internal dissipation is `T_Rd:H − (∂A/∂Ξ):K`; for each model it has a
//! closed form, computed by [`dissipation`] (Lagrangian) and
//! [`dissipation_euler`] (Eulerian). [`dissipation_definition`] evaluates
//! the defining combination directly so the two can be compared.

use serde::Serialize;

use crate::constitutive::{
    flow_rule, flow_rule_polynomial, free_energy_grad_xi, viscous_stress, MaterialParams, ModelKind,
};
use crate::error::{Error, Result};
use crate::integrate::Trajectory;
use crate::mat3::{is_psd, psd_tolerance, sym_eigen, Mat3, SymMat3};

/// Relative threshold for declaring a dissipation value negative.
pub const NEGATIVITY_TOL: f64 = 1e-8;

fn stretching(f: &Mat3, f_rate: &Mat3) -> SymMat3 {
    (*f_rate * f.inverse().unwrap_or(Mat3::ZERO)).sym()
}

fn cauchy_green(f: &Mat3) -> SymMat3 {
    (f.transpose() * *f).sym()
}

/// Multiplier of the `ξ:d` term: 1 for Zaremba-Jaumann, 2 for Oldroyd A.
fn spin_coupling(model: ModelKind) -> f64 {
    match model {
        ModelKind::ZarembaJaumann => 1.0,
        ModelKind::OldroydA => 2.0,
        _ => 0.0,
    }
}

/// Lagrangian internal dissipation, closed form.
pub fn dissipation(
    model: ModelKind,
    f: &Mat3,
    f_rate: &Mat3,
    xi: &SymMat3,
    p: &MaterialParams,
) -> f64 {
    let d = stretching(f, f_rate);
    let viscous = 2.0 * p.eta_s * d.dot(&d);
    let c = cauchy_green(f);
    match model {
        ModelKind::NonlinearOldroydB { k } => {
            let cx = c.to_mat3() * xi.to_mat3();
            let coeff = p.mu.powi(k as i32 + 1) / (2.0 * p.lambda1 * p.mu_k(k));
            viscous + coeff * cx.powi(k + 1).trace()
        }
        _ => {
            // C′ = 2FᵀdF.
            let c_rate = d.congruence(&f.transpose()) * 2.0;
            let n = spin_coupling(model);
            viscous + 0.5 * p.mu * xi.dot(&(c * (1.0 / p.lambda1) + c_rate * n))
        }
    }
}

/// `T_Rd:H − (∂A/∂Ξ):K`, evaluated from the stress and flow-rule maps.
pub fn dissipation_definition(
    model: ModelKind,
    f: &Mat3,
    f_rate: &Mat3,
    xi: &SymMat3,
    p: &MaterialParams,
) -> f64 {
    let k = flow_rule(model, f, f_rate, xi, p);
    viscous_stress(f, f_rate, p).dot(f_rate) - free_energy_grad_xi(f, p).dot(&k)
}

/// Eulerian internal dissipation in terms of `h` and `ξ = σ_p`.
pub fn dissipation_euler(model: ModelKind, h: &Mat3, sigma: &SymMat3, p: &MaterialParams) -> f64 {
    let d = h.sym();
    let viscous = 2.0 * p.eta_s * d.dot(&d);
    match model {
        ModelKind::NonlinearOldroydB { k } => {
            viscous + sigma.to_mat3().powi(k + 1).trace() / (2.0 * p.lambda1 * p.mu_k(k))
        }
        _ => viscous + sigma.trace() / (2.0 * p.lambda1) + spin_coupling(model) * sigma.dot(&d),
    }
}

/// Dissipation of the polynomial family `ξ P(ξ)`, `P(X) = Σⱼ cⱼ Xʲ`:
/// `2η_s‖d‖² + Σⱼ cⱼ μ^{j+1} tr((CΞ)^{j+1}) / (2λ₁)`.
pub fn dissipation_polynomial(
    coeffs: &[f64],
    f: &Mat3,
    f_rate: &Mat3,
    xi: &SymMat3,
    p: &MaterialParams,
) -> f64 {
    let d = stretching(f, f_rate);
    let cx = cauchy_green(f).to_mat3() * xi.to_mat3();
    let mut power = cx;
    let mut mu_pow = p.mu;
    let mut sum = 0.0;
    for &cj in coeffs {
        sum += cj * mu_pow * power.trace();
        power = power * cx;
        mu_pow *= p.mu;
    }
    2.0 * p.eta_s * d.dot(&d) + sum / (2.0 * p.lambda1)
}

/// Definition-form counterpart of [`dissipation_polynomial`].
pub fn dissipation_polynomial_definition(
    coeffs: &[f64],
    f: &Mat3,
    f_rate: &Mat3,
    xi: &SymMat3,
    p: &MaterialParams,
) -> f64 {
    let k = flow_rule_polynomial(coeffs, f, f_rate, xi, p);
    viscous_stress(f, f_rate, p).dot(f_rate) - free_energy_grad_xi(f, p).dot(&k)
}

/// Magnitude of the individual terms of [`dissipation`]; cancellation
/// errors in the dissipation are proportional to it.
pub fn dissipation_scale(
    model: ModelKind,
    f: &Mat3,
    f_rate: &Mat3,
    xi: &SymMat3,
    p: &MaterialParams,
) -> f64 {
    let d = stretching(f, f_rate);
    let c = cauchy_green(f);
    let viscous = 2.0 * p.eta_s * d.dot(&d);
    let elastic = match model {
        ModelKind::NonlinearOldroydB { k } => {
            let coeff = p.mu.powi(k as i32 + 1) / (2.0 * p.lambda1 * p.mu_k(k));
            coeff * (c.norm() * xi.norm()).powi(k as i32 + 1)
        }
        _ => {
            let c_rate = d.congruence(&f.transpose()) * 2.0;
            0.5 * p.mu * xi.norm() * (c.norm() / p.lambda1 + spin_coupling(model) * c_rate.norm())
        }
    };
    1.0 + viscous + elastic
}

/// Eulerian counterpart of [`dissipation_scale`].
pub fn dissipation_scale_euler(
    model: ModelKind,
    h: &Mat3,
    sigma: &SymMat3,
    p: &MaterialParams,
) -> f64 {
    let d = h.sym();
    let viscous = 2.0 * p.eta_s * d.dot(&d);
    let elastic = match model {
        ModelKind::NonlinearOldroydB { k } => {
            (3f64.sqrt() * sigma.norm()).powi(k as i32 + 1) / (2.0 * p.lambda1 * p.mu_k(k))
        }
        _ => {
            3f64.sqrt() * sigma.norm() / (2.0 * p.lambda1)
                + spin_coupling(model) * sigma.norm() * d.norm()
        }
    };
    1.0 + viscous + elastic
}

/// Whether `xi0` lies in the condition set defined by the constitutive laws,
/// with the default scale-aware tolerance.
pub fn c0_membership(model: ModelKind, xi0: &SymMat3) -> bool {
    c0_membership_with_tol(model, xi0, psd_tolerance(xi0))
}

/// PSD closure for Oldroyd B and even `k`; everything for odd `k`; only
/// zero (`‖Ξ₀‖ ≤ tol`) for Zaremba-Jaumann and Oldroyd A.
pub fn c0_membership_with_tol(model: ModelKind, xi0: &SymMat3, tol: f64) -> bool {
    match model {
        ModelKind::OldroydB => is_psd(xi0, tol),
        ModelKind::NonlinearOldroydB { k } if k % 2 == 0 => is_psd(xi0, tol),
        ModelKind::NonlinearOldroydB { .. } => true,
        ModelKind::ZarembaJaumann | ModelKind::OldroydA => xi0.norm() <= tol,
    }
}

/// An admissible state with strictly negative dissipation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    /// `F`, with `det F = 1`.
    pub f: Mat3,
    /// `H` in the tangent space at `F` (`cof F : H = 0`).
    pub f_rate: Mat3,
    pub value: f64,
}

/// Geometric sweep `2⁰ … 2⁴⁰` used by the witness searches.
fn sweep() -> impl Iterator<Item = f64> {
    (0..=40).map(|e| 2f64.powi(e))
}

/// Orthonormal eigenbasis of `s` as a proper rotation `Q` with `Q s Qᵀ`
/// diagonal; the eigenvalue of largest magnitude comes first.
fn eigen_rotation(s: &SymMat3) -> ([f64; 3], Mat3) {
    let (vals, vecs) = sym_eigen(s);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| vals[b].abs().total_cmp(&vals[a].abs()));
    let mut q = Mat3::from_fn(|i, j| vecs[(j, order[i])]);
    if q.det() < 0.0 {
        for j in 0..3 {
            q[(2, j)] = -q[(2, j)];
        }
    }
    ([vals[order[0]], vals[order[1]], vals[order[2]]], q)
}

/// Searches for `(F, H)` with negative dissipation of `model` at `Ξ = xi0`.
///
/// * Zaremba-Jaumann / Oldroyd A: any nonzero `Ξ₀` (see
///   [`zj_negative_dissipation_witness`]).
/// * Oldroyd B and even `k`: `Ξ₀` with a negative eigenvalue; uses `H = 0`
///   and `F = C^{1/2}` with `C` stretched by `s²` along the negative
///   eigendirection and contracted by `1/s` across it.
/// * Odd `k`: never, the dissipation is nonnegative.
pub fn negative_dissipation_witness(
    model: ModelKind,
    xi0: &SymMat3,
    p: &MaterialParams,
) -> Result<Witness> {
    p.validate()?;
    if !xi0.is_finite() {
        return Err(Error::field("xi0", "must be finite"));
    }
    match model {
        ModelKind::ZarembaJaumann | ModelKind::OldroydA => spin_witness(model, xi0, p),
        ModelKind::NonlinearOldroydB { k } if k % 2 == 1 => Err(Error::NoWitness(format!(
            "k = {k} is odd: the dissipation is nonnegative for every state"
        ))),
        _ => stretch_witness(model, xi0, p),
    }
}

/// Zaremba-Jaumann witness for nonzero `Ξ₀`.
///
/// With `Ξ₀ = QᵀΔQ`, `F = UQ`, `U = diag(√u, 1/√u, 1)`, `S = FΞ₀Fᵀ` and
/// `D = dev S`, prescribing `Sym(HF⁻¹) = kμD` makes the dissipation the
/// quadratic `μ²(2η_s‖D‖²k² + ‖D‖²k + tr S/(2μλ₁))`; `u` is swept until its
/// minimum (at `k = −1/(4η_s)`) is negative.
pub fn zj_negative_dissipation_witness(xi0: &SymMat3, p: &MaterialParams) -> Result<Witness> {
    negative_dissipation_witness(ModelKind::ZarembaJaumann, xi0, p)
}

fn spin_witness(model: ModelKind, xi0: &SymMat3, p: &MaterialParams) -> Result<Witness> {
    if xi0.norm() == 0.0 {
        return Err(Error::NoWitness(
            "Ξ₀ = 0 belongs to the condition set of this model".into(),
        ));
    }
    let c = spin_coupling(model);
    let (_, q) = eigen_rotation(xi0);
    for u in sweep() {
        let f = Mat3::diag(u.sqrt(), 1.0 / u.sqrt(), 1.0) * q;
        let s = xi0.congruence(&f);
        let dev = s.deviator();
        let dd = dev.dot(&dev);
        let tr = s.trace();
        // Dissipation as a function of k: μ²(2η_s‖D‖²k² + c‖D‖²k) + μ tr S/(2λ₁).
        let k = if tr < 0.0 {
            0.0
        } else if dd == 0.0 {
            continue;
        } else if p.eta_s > 0.0 {
            -c / (4.0 * p.eta_s)
        } else {
            -(tr / (2.0 * p.lambda1) + 1.0) / (c * p.mu * dd)
        };
        let h = dev.to_mat3() * (k * p.mu) * f;
        let value = dissipation(model, &f, &h, xi0, p);
        if value < 0.0 {
            return Ok(Witness {
                f,
                f_rate: h,
                value,
            });
        }
    }
    Err(Error::NoWitness(
        "stretch sweep exhausted without a negative value".into(),
    ))
}

fn stretch_witness(model: ModelKind, xi0: &SymMat3, p: &MaterialParams) -> Result<Witness> {
    let (vals, vecs) = sym_eigen(xi0);
    if vals[0] >= 0.0 {
        return Err(Error::NoWitness(
            "Ξ₀ is positive semi-definite, hence in the condition set".into(),
        ));
    }
    // vals ascending: index 0 is the negative direction.
    for s in sweep() {
        let scale = [s, 1.0 / s.sqrt(), 1.0 / s.sqrt()];
        let f = Mat3::from_fn(|i, j| (0..3).map(|m| vecs[(i, m)] * scale[m] * vecs[(j, m)]).sum());
        let value = dissipation(model, &f, &Mat3::ZERO, xi0, p);
        if value < 0.0 {
            return Ok(Witness {
                f,
                f_rate: Mat3::ZERO,
                value,
            });
        }
    }
    Err(Error::NoWitness(
        "stretch sweep exhausted without a negative value".into(),
    ))
}

/// Per-sample audit values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThermoSample {
    pub t: f64,
    pub dissipation_lagrangian: f64,
    pub dissipation_eulerian: f64,
    /// Magnitude scale of the dissipation terms.
    pub scale: f64,
    pub tr_xi: f64,
    pub tr_xi_over_2lambda1: f64,
    /// `ξ:d`.
    pub xi_contract_d: f64,
    pub min_eig_sigma_p: f64,
    pub psd_flag: bool,
    /// Smallest eigenvalue of `Ξ + η* C⁻¹`.
    pub lower_bound_margin: f64,
    pub negative: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThermoReport {
    pub samples: Vec<ThermoSample>,
    pub first_negative_dissipation_time: Option<f64>,
    pub psd_exit_time: Option<f64>,
    pub min_dissipation: Option<f64>,
    pub min_eig_sigma_p: Option<f64>,
    /// Largest `|D_lagrangian − D_eulerian| / scale` over the samples.
    pub max_description_gap: f64,
}

/// Running sign tracker: a value is negative when below
/// `−1e-8 · max(1 + running max |value|, scale)`.
#[derive(Clone, Debug, Default)]
pub struct NegativityTracker {
    running_max: f64,
}

impl NegativityTracker {
    pub fn observe(&mut self, value: f64, scale: f64) -> bool {
        self.running_max = self.running_max.max(value.abs());
        value < -NEGATIVITY_TOL * (1.0 + self.running_max).max(scale)
    }
}

pub fn audit(traj: &Trajectory) -> ThermoReport {
    let p = &traj.params;
    let model = traj.model;
    let es = p.eta_star();
    let mut tracker = NegativityTracker::default();
    let mut samples = Vec::with_capacity(traj.samples.len());
    for s in &traj.samples {
        let k = &s.kin;
        let d_lag = dissipation(model, &k.f, &k.f_rate, &s.internal, p);
        let d_eul = dissipation_euler(model, &k.vel_grad, &s.xi, p);
        let scale = dissipation_scale(model, &k.f, &k.f_rate, &s.internal, p)
            .max(dissipation_scale_euler(model, &k.vel_grad, &s.xi, p));
        let min_eig = s.sigma_p.min_eig();
        let margin = (s.internal + k.cauchy_green_inv * es).min_eig();
        samples.push(ThermoSample {
            t: k.t,
            dissipation_lagrangian: d_lag,
            dissipation_eulerian: d_eul,
            scale,
            tr_xi: s.xi.trace(),
            tr_xi_over_2lambda1: s.xi.trace() / (2.0 * p.lambda1),
            xi_contract_d: s.xi.dot(&k.stretching),
            min_eig_sigma_p: min_eig,
            psd_flag: min_eig >= -psd_tolerance(&s.sigma_p),
            lower_bound_margin: margin,
            negative: tracker.observe(d_lag, scale),
        });
    }
    summarize(samples)
}

fn summarize(samples: Vec<ThermoSample>) -> ThermoReport {
    let first_negative_dissipation_time = samples.iter().find(|s| s.negative).map(|s| s.t);
    let psd_exit_time = samples.iter().find(|s| !s.psd_flag).map(|s| s.t);
    let min_of = |g: fn(&ThermoSample) -> f64| samples.iter().map(g).reduce(f64::min);
    let min_dissipation = min_of(|s| s.dissipation_lagrangian);
    let min_eig_sigma_p = min_of(|s| s.min_eig_sigma_p);
    let max_description_gap = samples
        .iter()
        .map(|s| (s.dissipation_lagrangian - s.dissipation_eulerian).abs() / s.scale)
        .fold(0.0, f64::max);
    ThermoReport {
        samples,
        first_negative_dissipation_time,
        psd_exit_time,
        min_dissipation,
        min_eig_sigma_p,
        max_description_gap,
    }
}
