//! Free energy, stresses and flow rules.
//!
//! The Lagrangian description evolves the dimensionless internal variable
//! `Ξ` through `Ξ̇ = K(F, H, Ξ)`; the Eulerian one evolves the polymer
//! stress `ξ = σ_p = μ F Ξ Fᵀ`. Both are provided for every model so that
//! their agreement can be tested rather than assumed.
//!
//! Functions taking `F` assume `det F = 1`; nothing here re-checks it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::Trajectory;
use crate::mat3::{Mat3, SymMat3};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    /// Relaxation time `λ₁ > 0`.
    pub lambda1: f64,
    /// Solvent viscosity `η_s ≥ 0`.
    pub eta_s: f64,
    /// Polymer viscosity `η_p ≥ 0`.
    pub eta_p: f64,
    /// Shear modulus `μ > 0`.
    pub mu: f64,
    /// Constant of the nonlinear family, a pressure to the power `k`.
    /// Unset means `μᵏ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_k: Option<f64>,
}

impl Default for MaterialParams {
    /// `λ₁ = 10`, `η_s = 0.1`, `η_p = 1.9`, `μ = 1`.
    fn default() -> Self {
        MaterialParams {
            lambda1: 10.0,
            eta_s: 0.1,
            eta_p: 1.9,
            mu: 1.0,
            mu_k: None,
        }
    }
}

impl MaterialParams {
    pub fn new(lambda1: f64, eta_s: f64, eta_p: f64, mu: f64) -> Result<Self> {
        let p = MaterialParams {
            lambda1,
            eta_s,
            eta_p,
            mu,
            mu_k: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_mu_k(mut self, mu_k: f64) -> Result<Self> {
        self.mu_k = Some(mu_k);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::field(
                    format!("params.{name}"),
                    "must be finite and > 0",
                ))
            }
        };
        let nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::field(
                    format!("params.{name}"),
                    "must be finite and >= 0",
                ))
            }
        };
        positive("lambda1", self.lambda1)?;
        nonneg("eta_s", self.eta_s)?;
        nonneg("eta_p", self.eta_p)?;
        positive("mu", self.mu)?;
        if let Some(mk) = self.mu_k {
            positive("mu_k", mk)?;
        }
        Ok(())
    }

    /// Total viscosity `η = η_s + η_p`.
    pub fn eta(&self) -> f64 {
        self.eta_s + self.eta_p
    }

    /// Retardation time `λ₂ = λ₁ η_s / η`, undefined when `η = 0`.
    pub fn lambda2(&self) -> Option<f64> {
        let eta = self.eta();
        (eta > 0.0).then(|| self.lambda1 * self.eta_s / eta)
    }

    /// `η* = η_p / (μ λ₁)`.
    pub fn eta_star(&self) -> f64 {
        self.eta_p / (self.mu * self.lambda1)
    }

    pub fn mu_k(&self, k: u32) -> f64 {
        self.mu_k.unwrap_or_else(|| self.mu.powi(k as i32))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelKind {
    OldroydB,
    /// Relaxation term `−(μᵏ/(λ₁μ_k)) Ξ(CΞ)ᵏ`; `k ≥ 1`.
    NonlinearOldroydB {
        k: u32,
    },
    ZarembaJaumann,
    OldroydA,
}

impl ModelKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelKind::NonlinearOldroydB { k: 0 } => {
                Err(Error::field("model.k", "must be >= 1 (k = 0 is oldroyd_b)"))
            }
            _ => Ok(()),
        }
    }

    /// Objective rate appearing in the model's Eulerian stress law.
    pub fn objective_rate(&self) -> ObjectiveRate {
        match self {
            ModelKind::OldroydB | ModelKind::NonlinearOldroydB { .. } => {
                ObjectiveRate::UpperConvected
            }
            ModelKind::ZarembaJaumann => ObjectiveRate::Jaumann,
            ModelKind::OldroydA => ObjectiveRate::LowerConvected,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ModelKind::OldroydB => "oldroyd_b".into(),
            ModelKind::NonlinearOldroydB { k } => format!("nonlinear_oldroyd_b(k={k})"),
            ModelKind::ZarembaJaumann => "zaremba_jaumann".into(),
            ModelKind::OldroydA => "oldroyd_a".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveRate {
    /// Corotational: `σ̇ + σw − wσ`.
    Jaumann,
    /// `σ̇ + hᵀσ + σh`.
    LowerConvected,
    /// `σ̇ − hσ − σhᵀ`.
    UpperConvected,
}

/// `A = (μ/2) Ξ:C`.
pub fn free_energy(f: &Mat3, xi: &SymMat3, p: &MaterialParams) -> f64 {
    0.5 * p.mu * xi.dot(&cauchy_green(f))
}

/// Gradient of the free energy in `F`, projected onto the tangent space of
/// SL(3): `μ(FΞ − (tr Ξ / tr C⁻¹) cof F)`.
pub fn free_energy_grad_f(f: &Mat3, xi: &SymMat3, p: &MaterialParams) -> Mat3 {
    let f_inv = inverse(f);
    let cof = f_inv.transpose();
    let tr_c_inv = frob_sq(&f_inv);
    (*f * xi.to_mat3() - cof * (xi.trace() / tr_c_inv)) * p.mu
}

/// `(μ/2) C`.
pub fn free_energy_grad_xi(f: &Mat3, p: &MaterialParams) -> SymMat3 {
    cauchy_green(f) * (0.5 * p.mu)
}

/// Lagrangian Newtonian stress `2η_s Sym(HF⁻¹) F⁻ᵀ`.
pub fn viscous_stress(f: &Mat3, f_rate: &Mat3, p: &MaterialParams) -> Mat3 {
    let f_inv = inverse(f);
    let d = (*f_rate * f_inv).sym().to_mat3();
    d * f_inv.transpose() * (2.0 * p.eta_s)
}

/// `σ_p = μ F Ξ Fᵀ`.
pub fn polymer_stress(f: &Mat3, xi: &SymMat3, p: &MaterialParams) -> SymMat3 {
    xi.congruence(f) * p.mu
}

/// Inverse of [`polymer_stress`]: `Ξ = F⁻¹ ξ F⁻ᵀ / μ`.
pub fn internal_from_stress(f: &Mat3, sigma: &SymMat3, p: &MaterialParams) -> SymMat3 {
    sigma.congruence(&inverse(f)) * (1.0 / p.mu)
}

/// Lagrangian flow rule `Ξ̇ = K(F, H, Ξ)`.
pub fn flow_rule(
    model: ModelKind,
    f: &Mat3,
    f_rate: &Mat3,
    xi: &SymMat3,
    p: &MaterialParams,
) -> SymMat3 {
    let f_inv = inverse(f);
    let d = (*f_rate * f_inv).sym().to_mat3();
    let drive = (d.sym().congruence(&f_inv)) * (2.0 * p.eta_p / (p.mu * p.lambda1));
    let relax = *xi * (-1.0 / p.lambda1);
    match model {
        ModelKind::OldroydB => relax + drive,
        ModelKind::NonlinearOldroydB { k } => {
            let c = cauchy_green(f).to_mat3();
            let x = xi.to_mat3();
            let term = (x * (c * x).powi(k)).sym();
            term * (-p.mu.powi(k as i32) / (p.lambda1 * p.mu_k(k))) + drive
        }
        ModelKind::ZarembaJaumann | ModelKind::OldroydA => {
            // −F⁻¹dF Ξ − Ξ Fᵀd F⁻ᵀ, once for the corotational rate, twice for
            // the lower-convected one.
            let a = f_inv * d * *f * xi.to_mat3();
            let corr = a + a.transpose();
            let n = if model == ModelKind::OldroydA {
                2.0
            } else {
                1.0
            };
            (relax + drive) - corr.sym() * n
        }
    }
}

/// Eulerian flow rule `ξ̇ = k(h, ξ)` for `ξ = σ_p`.
pub fn flow_rule_euler(model: ModelKind, h: &Mat3, xi: &SymMat3, p: &MaterialParams) -> SymMat3 {
    let d = h.sym();
    let x = xi.to_mat3();
    let drive = d * (2.0 * p.eta_p / p.lambda1);
    let relax = *xi * (-1.0 / p.lambda1);
    match model {
        ModelKind::OldroydB => upper_transport(h, &x) + relax + drive,
        ModelKind::NonlinearOldroydB { k } => {
            let power = x.powi(k + 1).sym();
            upper_transport(h, &x) + power * (-1.0 / (p.lambda1 * p.mu_k(k))) + drive
        }
        ModelKind::ZarembaJaumann => {
            let w = h.skew();
            (w * x - x * w).sym() + relax + drive
        }
        ModelKind::OldroydA => {
            let a = h.transpose() * x;
            -(a + a.transpose()).sym() + relax + drive
        }
    }
}

fn upper_transport(h: &Mat3, x: &Mat3) -> SymMat3 {
    let a = *h * *x;
    (a + a.transpose()).sym()
}

/// Lagrangian flow rule with polynomial relaxation `ξ P(ξ)`,
/// `P(X) = Σⱼ cⱼ Xʲ`: `Ξ̇ = −(1/λ₁) Σⱼ cⱼ μʲ Ξ(CΞ)ʲ + drive`.
/// `coeffs = [1]` is Oldroyd B; `[0, …, 0, 1/μ_k]` is the monomial family.
pub fn flow_rule_polynomial(
    coeffs: &[f64],
    f: &Mat3,
    f_rate: &Mat3,
    xi: &SymMat3,
    p: &MaterialParams,
) -> SymMat3 {
    let f_inv = inverse(f);
    let d = (*f_rate * f_inv).sym();
    let drive = d.congruence(&f_inv) * (2.0 * p.eta_p / (p.mu * p.lambda1));
    let c = cauchy_green(f).to_mat3();
    let x = xi.to_mat3();
    let cx = c * x;
    let mut power = Mat3::IDENTITY;
    let mut sum = Mat3::ZERO;
    let mut mu_j = 1.0;
    for &cj in coeffs {
        sum += x * power * (cj * mu_j);
        power = power * cx;
        mu_j *= p.mu;
    }
    sum.sym() * (-1.0 / p.lambda1) + drive
}

/// Eulerian counterpart of [`flow_rule_polynomial`]:
/// `ξ̇ = hξ + ξhᵀ − (1/λ₁) ξ P(ξ) + 2η_p d/λ₁`.
pub fn flow_rule_euler_polynomial(
    coeffs: &[f64],
    h: &Mat3,
    xi: &SymMat3,
    p: &MaterialParams,
) -> SymMat3 {
    let x = xi.to_mat3();
    let mut power = x;
    let mut sum = Mat3::ZERO;
    for &cj in coeffs {
        sum += power * cj;
        power = power * x;
    }
    upper_transport(h, &x) + sum.sym() * (-1.0 / p.lambda1) + h.sym() * (2.0 * p.eta_p / p.lambda1)
}

pub fn objective_derivative(
    kind: ObjectiveRate,
    sigma_dot: &SymMat3,
    sigma: &SymMat3,
    h: &Mat3,
) -> SymMat3 {
    let s = sigma.to_mat3();
    match kind {
        ObjectiveRate::Jaumann => {
            let w = h.skew();
            *sigma_dot + (s * w - w * s).sym()
        }
        ObjectiveRate::LowerConvected => {
            let a = h.transpose() * s;
            *sigma_dot + (a + a.transpose()).sym()
        }
        ObjectiveRate::UpperConvected => *sigma_dot - upper_transport(h, &s),
    }
}

/// Time derivative of the polymer stress at sample `i` by finite
/// differences: centered in the interior, one-sided second order at the two
/// ends of the grid.
pub fn polymer_stress_rate(traj: &Trajectory, i: usize) -> Result<SymMat3> {
    let s = &traj.samples;
    let n = s.len();
    if n < 3 || i >= n {
        return Err(Error::GridIndex { index: i, len: n });
    }
    let dt = traj.dt;
    let y = |j: usize| s[j].sigma_p;
    Ok(if i == 0 {
        (y(0) * -3.0 + y(1) * 4.0 - y(2)) * (0.5 / dt)
    } else if i == n - 1 {
        (y(n - 1) * 3.0 - y(n - 2) * 4.0 + y(n - 3)) * (0.5 / dt)
    } else {
        (y(i + 1) - y(i - 1)) * (0.5 / dt)
    })
}

/// Residual of the Eulerian stress law of `model` at interior sample `i`:
/// `‖σ_p + λ₁ rate(σ_p) − 2η_p d‖` for the linear models, and
/// `‖λ₁ ∇σ_p + σ_p^{k+1}/μ_k − 2η_p d‖` for the nonlinear family, with the
/// stress rate taken by centered differences (so `O(dt²)` on a trajectory of
/// that model).
pub fn constitutive_residual(
    model: ModelKind,
    traj: &Trajectory,
    i: usize,
    p: &MaterialParams,
) -> Result<f64> {
    residual_with_rate(model, model.objective_rate(), traj, i, p)
}

/// [`constitutive_residual`] with the objective rate chosen explicitly.
pub fn residual_with_rate(
    model: ModelKind,
    rate: ObjectiveRate,
    traj: &Trajectory,
    i: usize,
    p: &MaterialParams,
) -> Result<f64> {
    let n = traj.samples.len();
    if i == 0 || i + 1 >= n {
        return Err(Error::GridIndex { index: i, len: n });
    }
    let sample = &traj.samples[i];
    let sigma = sample.sigma_p;
    let h = sample.kin.vel_grad;
    let sdot = polymer_stress_rate(traj, i)?;
    let objective = objective_derivative(rate, &sdot, &sigma, &h);
    let relax = match model {
        ModelKind::NonlinearOldroydB { k } => sigma.to_mat3().powi(k + 1).sym() * (1.0 / p.mu_k(k)),
        _ => sigma,
    };
    let r = relax + objective * p.lambda1 - sample.kin.stretching * (2.0 * p.eta_p);
    Ok(r.norm())
}

fn inverse(f: &Mat3) -> Mat3 {
    f.inverse().unwrap_or(Mat3::ZERO)
}

fn cauchy_green(f: &Mat3) -> SymMat3 {
    (f.transpose() * *f).sym()
}

fn frob_sq(a: &Mat3) -> f64 {
    a.dot(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat3::cofactor;
    use crate::random::SplitMix;

    fn params() -> MaterialParams {
        MaterialParams::new(2.0, 0.3, 0.7, 1.5).unwrap()
    }

    #[test]
    fn params_validation_names_field() {
        let err = MaterialParams::new(0.0, 0.1, 0.1, 1.0).unwrap_err();
        assert!(err.to_string().contains("params.lambda1"));
        assert!(MaterialParams::new(1.0, -0.1, 0.1, 1.0).is_err());
        assert!(MaterialParams::new(1.0, 0.1, 0.1, 1.0)
            .unwrap()
            .with_mu_k(0.0)
            .is_err());
        assert!(ModelKind::NonlinearOldroydB { k: 0 }.validate().is_err());
    }

    #[test]
    fn retardation_time_does_not_exceed_relaxation_time() {
        let p = MaterialParams::default();
        assert!((p.lambda2().unwrap() - 0.5).abs() < 1e-15);
        assert!(p.lambda2().unwrap() <= p.lambda1);
        assert!((p.eta_star() - 0.19).abs() < 1e-15);
        assert_eq!(p.mu_k(3), 1.0);
    }

    #[test]
    fn free_energy_examples() {
        let mut p = params();
        p.mu = 2.0;
        assert_eq!(free_energy(&Mat3::IDENTITY, &SymMat3::IDENTITY, &p), 3.0);
        assert_eq!(free_energy(&Mat3::IDENTITY, &SymMat3::ZERO, &p), 0.0);
        p.mu = 1.0;
        let e = std::f64::consts::E;
        let v = free_energy(&Mat3::diag(e, 1.0 / e, 1.0), &SymMat3::IDENTITY, &p);
        assert!((v - (e * e + 1.0 / (e * e) + 1.0) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn grad_f_examples_and_tangency() {
        let mut p = params();
        let mut rng = SplitMix::new(5);
        let xi = rng.sym().deviator();
        let g = free_energy_grad_f(&Mat3::IDENTITY, &xi, &p);
        assert!((g - xi.to_mat3() * p.mu).max_abs() < 1e-15);
        p.mu = 3.0;
        assert_eq!(
            free_energy_grad_f(&Mat3::IDENTITY, &SymMat3::IDENTITY, &p),
            Mat3::ZERO
        );
        for _ in 0..20 {
            let f = rng.unimodular(0.8);
            let g = free_energy_grad_f(&f, &rng.sym(), &p);
            assert!(cofactor(&f).dot(&g).abs() < 1e-10 * (1.0 + g.norm()));
        }
    }

    #[test]
    fn grad_f_matches_directional_difference_on_sl3() {
        let p = params();
        let mut rng = SplitMix::new(8);
        for _ in 0..20 {
            let f = rng.unimodular(0.5);
            let xi = rng.sym();
            let dir = rng.traceless();
            // Curve exp(εA)F stays in SL(3); its velocity at 0 is AF.
            let e = 1e-5;
            let fp = crate::mat3::mat_exp(&(dir * e), 1e-15) * f;
            let fm = crate::mat3::mat_exp(&(dir * -e), 1e-15) * f;
            let fd = (free_energy(&fp, &xi, &p) - free_energy(&fm, &xi, &p)) / (2.0 * e);
            let g = free_energy_grad_f(&f, &xi, &p);
            assert!(
                (fd - g.dot(&(dir * f))).abs() < 1e-5,
                "{fd} vs {}",
                g.dot(&(dir * f))
            );
        }
    }

    #[test]
    fn grad_xi_examples() {
        let mut p = params();
        p.mu = 2.0;
        assert_eq!(free_energy_grad_xi(&Mat3::IDENTITY, &p), SymMat3::IDENTITY);
        assert_eq!(
            free_energy_grad_xi(&Mat3::diag(2.0, 1.0, 0.5), &p),
            SymMat3::diag(4.0, 1.0, 0.25)
        );
        let mut rng = SplitMix::new(9);
        let f = rng.unimodular(0.6);
        let xi = rng.sym();
        let g = free_energy_grad_xi(&f, &p);
        for (i, j) in [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)] {
            let mut e = SymMat3::ZERO;
            let idx = match (i, j) {
                (0, 0) => 0,
                (1, 1) => 1,
                (2, 2) => 2,
                (0, 1) => 3,
                (0, 2) => 4,
                _ => 5,
            };
            e.0[idx] = 1e-6;
            let fd = (free_energy(&f, &(xi + e), &p) - free_energy(&f, &(xi - e), &p)) / 2e-6;
            // Perturbing an off-diagonal slot moves two matrix entries.
            let want = if i == j {
                g.get(i, j)
            } else {
                2.0 * g.get(i, j)
            };
            assert!((fd - want).abs() < 1e-6);
        }
    }

    #[test]
    fn viscous_stress_examples() {
        let p = params();
        let d = SymMat3::new(0.3, -0.1, -0.2, 0.4, 0.0, -0.5);
        let t = viscous_stress(&Mat3::IDENTITY, &d.to_mat3(), &p);
        assert!((t - d.to_mat3() * (2.0 * p.eta_s)).max_abs() < 1e-15);
        let mut rng = SplitMix::new(3);
        let f = rng.unimodular(0.7);
        assert_eq!(viscous_stress(&f, &Mat3::ZERO, &p), Mat3::ZERO);
        let h = rng.traceless() * f;
        let lhs = viscous_stress(&f, &h, &p) * f.transpose();
        let rhs = (h * f.inverse().unwrap()).sym().to_mat3() * (2.0 * p.eta_s);
        assert!((lhs - rhs).max_abs() < 1e-10);
    }

    #[test]
    fn polymer_stress_examples() {
        let p = params();
        let xi = SymMat3::new(1.0, 2.0, 3.0, 0.5, -0.5, 0.25);
        assert_eq!(polymer_stress(&Mat3::IDENTITY, &xi, &p), xi * p.mu);
        assert_eq!(
            polymer_stress(&Mat3::diag(2.0, 0.5, 1.0), &SymMat3::ZERO, &p),
            SymMat3::ZERO
        );
        let t: f64 = 0.4;
        let s = polymer_stress(
            &Mat3::diag(t.exp(), (-t).exp(), 1.0),
            &SymMat3::diag(1.0, -2.0, 3.0),
            &p,
        );
        let want = SymMat3::diag((2.0 * t).exp(), -2.0 * (-2.0 * t).exp(), 3.0) * p.mu;
        assert!((s - want).norm() < 1e-14);
    }

    #[test]
    fn flow_rule_examples() {
        let p = params();
        let xi = SymMat3::new(1.0, -2.0, 0.5, 0.1, 0.2, 0.3);
        let k = flow_rule(ModelKind::OldroydB, &Mat3::IDENTITY, &Mat3::ZERO, &xi, &p);
        assert!((k - xi * (-1.0 / p.lambda1)).norm() < 1e-15);

        let d = SymMat3::new(0.2, -0.5, 0.3, 0.1, -0.4, 0.05);
        let k = flow_rule(
            ModelKind::OldroydB,
            &Mat3::IDENTITY,
            &d.to_mat3(),
            &SymMat3::ZERO,
            &p,
        );
        assert!((k - d * (2.0 * p.eta_p / (p.mu * p.lambda1))).norm() < 1e-15);

        let unit = MaterialParams::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let k = flow_rule(
            ModelKind::NonlinearOldroydB { k: 1 },
            &Mat3::IDENTITY,
            &Mat3::ZERO,
            &xi,
            &unit,
        );
        let want = -(xi.to_mat3() * xi.to_mat3()).sym();
        assert!((k - want).norm() < 1e-14);
    }

    #[test]
    fn flow_rule_is_symmetric_and_nonlinear_k0_matches_linear() {
        let p = params();
        let mut rng = SplitMix::new(12);
        for _ in 0..10 {
            let f = rng.unimodular(0.5);
            let h = rng.traceless() * f;
            let xi = rng.sym();
            let ob = flow_rule(ModelKind::OldroydB, &f, &h, &xi, &p);
            let poly = flow_rule_polynomial(&[1.0], &f, &h, &xi, &p);
            assert!((ob - poly).norm() < 1e-12 * (1.0 + ob.norm()));
            for k in 1..4 {
                let mut coeffs = vec![0.0; k as usize + 1];
                coeffs[k as usize] = 1.0 / p.mu_k(k);
                let nl = flow_rule(ModelKind::NonlinearOldroydB { k }, &f, &h, &xi, &p);
                let poly = flow_rule_polynomial(&coeffs, &f, &h, &xi, &p);
                assert!((nl - poly).norm() < 1e-12 * (1.0 + nl.norm()));
            }
        }
    }

    #[test]
    fn flow_rule_euler_examples() {
        let p = params();
        let xi = SymMat3::new(1.0, -2.0, 0.5, 0.1, 0.2, 0.3);
        let k = flow_rule_euler(ModelKind::OldroydB, &Mat3::ZERO, &xi, &p);
        assert!((k - xi * (-1.0 / p.lambda1)).norm() < 1e-15);

        let w = Mat3::cross_matrix([0.3, -0.2, 0.9]);
        let k = flow_rule_euler(ModelKind::ZarembaJaumann, &w, &xi, &p);
        let x = xi.to_mat3();
        let want = (w * x - x * w).sym() - xi * (1.0 / p.lambda1);
        assert!((k - want).norm() < 1e-14);

        let h = SplitMix::new(2).traceless();
        for model in all_models() {
            let k = flow_rule_euler(model, &h, &SymMat3::ZERO, &p);
            assert!((k - h.sym() * (2.0 * p.eta_p / p.lambda1)).norm() < 1e-15);
        }
    }

    fn all_models() -> [ModelKind; 5] {
        [
            ModelKind::OldroydB,
            ModelKind::NonlinearOldroydB { k: 1 },
            ModelKind::NonlinearOldroydB { k: 2 },
            ModelKind::ZarembaJaumann,
            ModelKind::OldroydA,
        ]
    }

    #[test]
    fn lagrangian_and_eulerian_rules_agree_pointwise() {
        // d/dt(μFΞFᵀ) = hξ + ξhᵀ + μF K Fᵀ must equal the Eulerian rule.
        let p = params();
        let mut rng = SplitMix::new(77);
        for model in all_models() {
            for _ in 0..10 {
                let f = rng.unimodular(0.6);
                let h_rate = rng.traceless() * f;
                let xi_l = rng.sym();
                let sigma = polymer_stress(&f, &xi_l, &p);
                let h = h_rate * f.inverse().unwrap();
                let lag = flow_rule(model, &f, &h_rate, &xi_l, &p).congruence(&f) * p.mu
                    + upper_transport(&h, &sigma.to_mat3());
                let eul = flow_rule_euler(model, &h, &sigma, &p);
                assert!((lag - eul).norm() < 1e-10 * (1.0 + eul.norm()), "{model:?}");
            }
        }
    }

    #[test]
    fn polynomial_rules_agree_pointwise() {
        let p = params();
        let mut rng = SplitMix::new(78);
        let coeffs = [1.0, 0.3, -0.05];
        for _ in 0..10 {
            let f = rng.unimodular(0.6);
            let h_rate = rng.traceless() * f;
            let xi_l = rng.sym();
            let sigma = polymer_stress(&f, &xi_l, &p);
            let h = h_rate * f.inverse().unwrap();
            let lag = flow_rule_polynomial(&coeffs, &f, &h_rate, &xi_l, &p).congruence(&f) * p.mu
                + upper_transport(&h, &sigma.to_mat3());
            let eul = flow_rule_euler_polynomial(&coeffs, &h, &sigma, &p);
            assert!((lag - eul).norm() < 1e-10 * (1.0 + eul.norm()));
        }
    }

    #[test]
    fn objective_derivative_examples() {
        let mut rng = SplitMix::new(4);
        let sdot = rng.sym();
        let s = rng.sym();
        let h = rng.traceless();
        for kind in [
            ObjectiveRate::Jaumann,
            ObjectiveRate::LowerConvected,
            ObjectiveRate::UpperConvected,
        ] {
            assert_eq!(objective_derivative(kind, &sdot, &s, &Mat3::ZERO), sdot);
        }
        let up = objective_derivative(
            ObjectiveRate::UpperConvected,
            &SymMat3::ZERO,
            &SymMat3::IDENTITY,
            &h,
        );
        assert!((up + h.sym() * 2.0).norm() < 1e-15);
        for _ in 0..20 {
            let (sdot, s, h) = (rng.sym(), rng.sym(), rng.mat3());
            let zj = objective_derivative(ObjectiveRate::Jaumann, &sdot, &s, &h);
            let a = objective_derivative(ObjectiveRate::LowerConvected, &sdot, &s, &h);
            let b = objective_derivative(ObjectiveRate::UpperConvected, &sdot, &s, &h);
            assert!((zj - (a + b) * 0.5).norm() < 1e-12);
        }
    }
}
