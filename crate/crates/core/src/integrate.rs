//! Time integration of the internal-variable equations.
//!
//! Fixed-step classical RK4 in either description, plus the closed-form
//! solutions available for Oldroyd B (variation of constants, and the
//! explicit planar-extension solution) and for the homogeneous quadratic
//! Riccati case of the nonlinear family.

use serde::Serialize;

use crate::constitutive::{
    flow_rule, flow_rule_euler, internal_from_stress, polymer_stress, MaterialParams, ModelKind,
};
use crate::error::{Error, Result};
use crate::kinematics::{sample, KinematicSample, MotionProtocol, ProtocolKind};
use crate::mat3::{Mat3, SymMat3};

/// `‖Ξ‖` (or `‖ξ‖`) above which a run is declared blown up.
pub const BLOWUP_NORM: f64 = 1e12;
/// Condition number of `I + (∫C) Z₀` treated as loss of invertibility.
pub const RICCATI_COND_LIMIT: f64 = 1e14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Complete,
    BlownUpAt(f64),
}

/// Which variable was integrated; the other is derived from it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Description {
    Lagrangian,
    Eulerian,
    ClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySample {
    pub kin: KinematicSample,
    /// Internal variable `Ξ`.
    pub internal: SymMat3,
    /// `σ_p = μ F Ξ Fᵀ`.
    pub sigma_p: SymMat3,
    /// Eulerian variable `ξ`.
    pub xi: SymMat3,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub model: ModelKind,
    pub params: MaterialParams,
    pub protocol: MotionProtocol,
    pub description: Description,
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<TrajectorySample>,
    pub status: Status,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        grid_time(self.t0, self.dt, i)
    }

    pub fn blowup_time(&self) -> Option<f64> {
        match self.status {
            Status::BlownUpAt(t) => Some(t),
            Status::Complete => None,
        }
    }
}

fn grid_time(t0: f64, dt: f64, i: usize) -> f64 {
    t0 + i as f64 * dt
}

/// Number of steps covering `[t0, t_end]`; `dt` must divide the interval.
pub fn grid_steps(t0: f64, t_end: f64, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::field("dt", "must be finite and > 0"));
    }
    if !(t_end.is_finite() && t_end > t0) {
        return Err(Error::field("t_end", "must be finite and greater than t0"));
    }
    let span = t_end - t0;
    let n = (span / dt).round();
    if n < 1.0 || (n * dt - span).abs() > 1e-9 * span.max(1.0) {
        return Err(Error::field(
            "dt",
            "must divide t_end - t0 into whole steps",
        ));
    }
    Ok(n as usize)
}

fn build_sample(
    p: &MaterialParams,
    kin: KinematicSample,
    internal: SymMat3,
    xi: Option<SymMat3>,
) -> TrajectorySample {
    let sigma_p = polymer_stress(&kin.f, &internal, p);
    TrajectorySample {
        kin,
        internal,
        sigma_p,
        xi: xi.unwrap_or(sigma_p),
    }
}

fn blown_up(s: &SymMat3) -> bool {
    !s.is_finite() || s.norm() > BLOWUP_NORM
}

/// Classical RK4 on `Ξ̇ = K(F, H, Ξ)` starting from `Ξ(t₀) = xi0`.
pub fn integrate_lagrangian(
    model: ModelKind,
    p: &MaterialParams,
    protocol: &MotionProtocol,
    xi0: SymMat3,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    model.validate()?;
    p.validate()?;
    let rhs = |t: f64, x: &SymMat3| {
        let (f, h, _) = protocol.motion(t);
        flow_rule(model, &f, &h, x, p)
    };
    run_rk4(
        model,
        p,
        protocol,
        Description::Lagrangian,
        xi0,
        t_end,
        dt,
        rhs,
        |kin, x| build_sample(p, kin, *x, None),
    )
}

/// Classical RK4 on `ξ̇ = k(h, ξ)` starting from `ξ(t₀) = sigma0`.
pub fn integrate_eulerian(
    model: ModelKind,
    p: &MaterialParams,
    protocol: &MotionProtocol,
    sigma0: SymMat3,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    model.validate()?;
    p.validate()?;
    let rhs = |t: f64, x: &SymMat3| {
        let (f, h, _) = protocol.motion(t);
        let l = h * f.inverse().unwrap_or(Mat3::ZERO);
        flow_rule_euler(model, &l, x, p)
    };
    run_rk4(
        model,
        p,
        protocol,
        Description::Eulerian,
        sigma0,
        t_end,
        dt,
        rhs,
        |kin, x| {
            let internal = internal_from_stress(&kin.f, x, p);
            build_sample(p, kin, internal, Some(*x))
        },
    )
}

#[allow(clippy::too_many_arguments)]
fn run_rk4(
    model: ModelKind,
    p: &MaterialParams,
    protocol: &MotionProtocol,
    description: Description,
    y0: SymMat3,
    t_end: f64,
    dt: f64,
    rhs: impl Fn(f64, &SymMat3) -> SymMat3,
    record: impl Fn(KinematicSample, &SymMat3) -> TrajectorySample,
) -> Result<Trajectory> {
    let t0 = protocol.t0();
    let n = grid_steps(t0, t_end, dt)?;
    if !y0.is_finite() {
        return Err(Error::field("initial", "must be finite"));
    }
    let mut samples = Vec::with_capacity(n + 1);
    samples.push(record(sample(protocol, t0)?, &y0));
    let mut y = y0;
    let mut status = Status::Complete;
    for i in 0..n {
        let t = grid_time(t0, dt, i);
        let k1 = rhs(t, &y);
        let k2 = rhs(t + 0.5 * dt, &(y + k1 * (0.5 * dt)));
        let k3 = rhs(t + 0.5 * dt, &(y + k2 * (0.5 * dt)));
        let k4 = rhs(t + dt, &(y + k3 * dt));
        // SymMat3 stores one copy of each off-diagonal entry, so the update
        // is symmetric by construction.
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        let t_next = grid_time(t0, dt, i + 1);
        if blown_up(&y) {
            status = Status::BlownUpAt(t_next);
            break;
        }
        samples.push(record(sample(protocol, t_next)?, &y));
    }
    Ok(Trajectory {
        model,
        params: *p,
        protocol: protocol.clone(),
        description,
        t0,
        dt,
        samples,
        status,
    })
}

/// Oldroyd B by variation of constants, integrated by parts:
///
/// `Ξ(t) = e^{−τ/λ₁}(Ξ₀ + η* C⁻¹(t₀)) − η* C⁻¹(t) + (η*/λ₁) I(t)`,
/// `I(t) = ∫_{t₀}^{t} e^{(s−t)/λ₁} C⁻¹(s) ds`,
///
/// with `I` accumulated interval by interval by Simpson's rule.
pub fn duhamel_oldroyd_b(
    model: ModelKind,
    p: &MaterialParams,
    protocol: &MotionProtocol,
    xi0: SymMat3,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    if model != ModelKind::OldroydB {
        return Err(Error::Precondition(format!(
            "the variation-of-constants solution is specific to oldroyd_b, got {}",
            model.label()
        )));
    }
    p.validate()?;
    let t0 = protocol.t0();
    let n = grid_steps(t0, t_end, dt)?;
    let lam = p.lambda1;
    let es = p.eta_star();
    let c_inv = |t: f64| {
        let f = protocol.motion(t).0;
        let fi = f.inverse().unwrap_or(Mat3::ZERO);
        (fi * fi.transpose()).sym()
    };
    let first = sample(protocol, t0)?;
    let c_inv0 = first.cauchy_green_inv;
    let mut samples = Vec::with_capacity(n + 1);
    samples.push(build_sample(p, first, xi0, None));
    let decay = (-dt / lam).exp();
    let half_decay = (-0.5 * dt / lam).exp();
    let mut integral = SymMat3::ZERO;
    let mut prev_c_inv = c_inv0;
    for i in 0..n {
        let t = grid_time(t0, dt, i);
        let t_next = grid_time(t0, dt, i + 1);
        let kin = sample(protocol, t_next)?;
        let mid = c_inv(t + 0.5 * dt);
        integral = integral * decay
            + (prev_c_inv * decay + mid * (4.0 * half_decay) + kin.cauchy_green_inv) * (dt / 6.0);
        let tau = t_next - t0;
        let xi = (xi0 + c_inv0 * es) * (-tau / lam).exp() - kin.cauchy_green_inv * es
            + integral * (es / lam);
        prev_c_inv = kin.cauchy_green_inv;
        samples.push(build_sample(p, kin, xi, None));
    }
    Ok(Trajectory {
        model,
        params: *p,
        protocol: protocol.clone(),
        description: Description::ClosedForm,
        t0,
        dt,
        samples,
        status: Status::Complete,
    })
}

/// Exact Oldroyd B solution under unit-rate planar extension with `λ₁ = 1`:
/// `Ξ(t) = e^{−t}Ξ₀ + (2η_p/μ) diag(e^{−t} − e^{−2t}, (e^{−t} − e^{2t})/3, 0)`.
pub fn analytic_planar_extension(xi0: &SymMat3, eta_p: f64, mu: f64, t: f64) -> SymMat3 {
    let (e1, e2, e_2) = ((-t).exp(), (-2.0 * t).exp(), (2.0 * t).exp());
    *xi0 * e1 + SymMat3::diag(e1 - e2, (e1 - e_2) / 3.0, 0.0) * (2.0 * eta_p / mu)
}

/// `Ξ(t):C(t)` along [`analytic_planar_extension`]:
/// `e^{−t} Ξ₀:C(t) + (2η_p/μ)(e^t + e^{−3t}/3 − 4/3)`.
pub fn analytic_planar_extension_contraction(xi0: &SymMat3, eta_p: f64, mu: f64, t: f64) -> f64 {
    let c = SymMat3::diag((2.0 * t).exp(), (-2.0 * t).exp(), 1.0);
    (-t).exp() * xi0.dot(&c) + 2.0 * eta_p / mu * (t.exp() + (-3.0 * t).exp() / 3.0 - 4.0 / 3.0)
}

/// Closed-form solution of `Z′ + Z C Z = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RiccatiSolution {
    pub t0: f64,
    pub dt: f64,
    /// `Z` at `t₀ + i·dt`, up to (excluding) the blow-up bracket.
    pub z: Vec<SymMat3>,
    /// `(last regular grid time, first singular grid time)`.
    pub blowup: Option<(f64, f64)>,
}

impl RiccatiSolution {
    pub fn time(&self, i: usize) -> f64 {
        grid_time(self.t0, self.dt, i)
    }

    /// Upper end of the blow-up bracket.
    pub fn blowup_time(&self) -> Option<f64> {
        self.blowup.map(|b| b.1)
    }
}

/// `Z(t) = Z₀ (I + (∫C) Z₀)⁻¹` with `∫C` accumulated by Simpson's rule per
/// interval. Singularity of `Y = I + (∫C) Z₀` (sign change of `det Y`, or
/// condition number above [`RICCATI_COND_LIMIT`]) ends the solution and is
/// reported as a blow-up bracket of width `dt`.
pub fn riccati_homogeneous(
    protocol: &MotionProtocol,
    z0: SymMat3,
    t_end: f64,
    dt: f64,
) -> Result<RiccatiSolution> {
    let t0 = protocol.t0();
    let n = grid_steps(t0, t_end, dt)?;
    if !z0.is_finite() {
        return Err(Error::field("initial", "must be finite"));
    }
    let c = |t: f64| {
        let f = protocol.motion(t).0;
        f.transpose() * f
    };
    let z0m = z0.to_mat3();
    let mut z = vec![z0];
    let mut blowup = None;
    let mut integral = Mat3::ZERO;
    let mut prev_c = c(t0);
    let mut prev_det = 1.0f64;
    for i in 0..n {
        let t = grid_time(t0, dt, i);
        let t_next = grid_time(t0, dt, i + 1);
        let next_c = c(t_next);
        integral += (prev_c + c(t + 0.5 * dt) * 4.0 + next_c) * (dt / 6.0);
        prev_c = next_c;
        let y = Mat3::IDENTITY + integral * z0m;
        let det = y.det();
        let inv = y.inverse();
        let cond = inv.map_or(f64::INFINITY, |yi| y.norm() * yi.norm());
        if det.signum() != prev_det.signum()
            || det == 0.0
            || cond.is_nan()
            || cond > RICCATI_COND_LIMIT
        {
            blowup = Some((t, t_next));
            break;
        }
        prev_det = det;
        z.push((z0m * inv.expect("finite condition number")).sym());
    }
    Ok(RiccatiSolution { t0, dt, z, blowup })
}

/// Quadratic nonlinear model (`k = 1`) through the Riccati closed form:
/// `Z = μ/(λ₁μ₁) Ξ` solves `Z′ + ZCZ = G` with `G` proportional to
/// `η_p (C⁻¹)′`, so the closed form needs `η_p = 0` or a constant `F`.
pub fn riccati_trajectory(
    model: ModelKind,
    p: &MaterialParams,
    protocol: &MotionProtocol,
    xi0: SymMat3,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    if model != (ModelKind::NonlinearOldroydB { k: 1 }) {
        return Err(Error::Precondition(format!(
            "the Riccati solution applies to nonlinear_oldroyd_b with k = 1, got {}",
            model.label()
        )));
    }
    p.validate()?;
    let constant = matches!(protocol.kind(), ProtocolKind::ConstantF { .. });
    if p.eta_p != 0.0 && !constant {
        return Err(Error::Precondition(
            "the Riccati solution needs eta_p = 0 or a constant deformation".into(),
        ));
    }
    let to_z = p.mu / (p.lambda1 * p.mu_k(1));
    let sol = riccati_homogeneous(protocol, xi0 * to_z, t_end, dt)?;
    let samples = sol
        .z
        .iter()
        .enumerate()
        .map(|(i, z)| {
            Ok(build_sample(
                p,
                sample(protocol, sol.time(i))?,
                *z * (1.0 / to_z),
                None,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        model,
        params: *p,
        protocol: protocol.clone(),
        description: Description::ClosedForm,
        t0: sol.t0,
        dt,
        samples,
        status: sol
            .blowup_time()
            .map_or(Status::Complete, Status::BlownUpAt),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::SplitMix;

    fn relax_params() -> MaterialParams {
        MaterialParams::new(2.0, 0.1, 0.6, 1.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert_eq!(grid_steps(0.0, 1.0, 0.1).unwrap(), 10);
        assert!(grid_steps(0.0, 1.0, 0.3).is_err());
        assert!(grid_steps(0.0, 1.0, 0.0).is_err());
        assert!(grid_steps(1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn pure_relaxation_lagrangian_and_eulerian() {
        let p = relax_params();
        let xi0 = SymMat3::new(1.0, -0.5, 2.0, 0.3, 0.1, -0.2);
        let still = MotionProtocol::constant(Mat3::IDENTITY).unwrap();
        let lag = integrate_lagrangian(ModelKind::OldroydB, &p, &still, xi0, 5.0, 0.01).unwrap();
        let eul = integrate_eulerian(ModelKind::OldroydB, &p, &still, xi0, 5.0, 0.01).unwrap();
        for (i, (a, b)) in lag.samples.iter().zip(&eul.samples).enumerate() {
            let want = xi0 * (-lag.time(i) / p.lambda1).exp();
            assert!((a.internal - want).norm() < 1e-8);
            assert!((b.xi - want).norm() < 1e-8);
        }
    }

    #[test]
    fn duhamel_constant_identity_is_pure_relaxation() {
        let p = relax_params();
        let xi0 = SymMat3::new(1.0, -0.5, 2.0, 0.3, 0.1, -0.2);
        let still = MotionProtocol::constant(Mat3::IDENTITY).unwrap();
        let d = duhamel_oldroyd_b(ModelKind::OldroydB, &p, &still, xi0, 5.0, 0.01).unwrap();
        for (i, s) in d.samples.iter().enumerate() {
            let want = xi0 * (-d.time(i) / p.lambda1).exp();
            assert!((s.internal - want).norm() < 1e-12);
        }
        assert!(duhamel_oldroyd_b(ModelKind::OldroydA, &p, &still, xi0, 5.0, 0.01).is_err());
    }

    #[test]
    fn duhamel_matches_planar_extension_closed_form() {
        let p = MaterialParams::new(1.0, 0.0, 1.0, 1.0).unwrap();
        let pe = MotionProtocol::planar_extension(1.0);
        let d = duhamel_oldroyd_b(ModelKind::OldroydB, &p, &pe, SymMat3::ZERO, 2.0, 1e-3).unwrap();
        for (i, s) in d.samples.iter().enumerate().step_by(100) {
            let t = d.time(i);
            let want = analytic_planar_extension(&SymMat3::ZERO, 1.0, 1.0, t);
            assert!(
                (s.internal - want).norm() < 1e-9 * (1.0 + want.norm()),
                "t={t}"
            );
        }
    }

    #[test]
    fn analytic_planar_extension_examples() {
        let xi0 = SymMat3::new(0.4, 0.2, 0.1, 0.05, 0.0, 0.0);
        assert_eq!(analytic_planar_extension(&xi0, 1.0, 1.0, 0.0), xi0);
        let e = std::f64::consts::E;
        let x = analytic_planar_extension(&SymMat3::ZERO, 1.0, 1.0, 1.0);
        let want = SymMat3::diag(
            2.0 * (1.0 / e - 1.0 / (e * e)),
            2.0 * (1.0 / e - e * e) / 3.0,
            0.0,
        );
        assert!((x - want).norm() < 1e-14);
        assert!(x.get(1, 1) < 0.0);
        let c0 = analytic_planar_extension_contraction(&SymMat3::ZERO, 1.0, 1.0, 0.0);
        assert!(c0.abs() < 1e-15);
        for t in [0.3, 1.0, 2.5] {
            let xi = analytic_planar_extension(&xi0, 0.7, 1.3, t);
            let c = SymMat3::diag((2.0 * t).exp(), (-2.0 * t).exp(), 1.0);
            let direct = xi.dot(&c);
            let formula = analytic_planar_extension_contraction(&xi0, 0.7, 1.3, t);
            assert!((direct - formula).abs() < 1e-12 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn rk4_matches_planar_extension_closed_form() {
        let p = MaterialParams::new(1.0, 0.2, 1.0, 1.0).unwrap();
        let pe = MotionProtocol::planar_extension(1.0);
        let xi0 = SplitMix::new(3).psd();
        let traj = integrate_lagrangian(ModelKind::OldroydB, &p, &pe, xi0, 3.0, 1e-3).unwrap();
        for (i, s) in traj.samples.iter().enumerate() {
            let want = analytic_planar_extension(&xi0, 1.0, 1.0, traj.time(i));
            assert!((s.internal - want).norm() <= 1e-6 * want.norm().max(1.0));
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let p = MaterialParams::new(1.0, 0.2, 1.0, 1.0).unwrap();
        let pe = MotionProtocol::planar_extension(1.0);
        let xi0 = SymMat3::IDENTITY;
        let err = |dt: f64| {
            let traj = integrate_lagrangian(ModelKind::OldroydB, &p, &pe, xi0, 2.0, dt).unwrap();
            traj.samples
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    (s.internal - analytic_planar_extension(&xi0, 1.0, 1.0, traj.time(i))).norm()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(0.04) / err(0.02);
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn zaremba_jaumann_preserves_zero_trace() {
        let p = MaterialParams::default();
        let m = SplitMix::new(10).traceless();
        let osc = MotionProtocol::oscillatory(m, 0.75).unwrap();
        let xi0 = SplitMix::new(11).sym().deviator();
        let traj =
            integrate_eulerian(ModelKind::ZarembaJaumann, &p, &osc, xi0, 10.0, 1e-2).unwrap();
        for s in &traj.samples {
            assert!(s.xi.trace().abs() < 1e-8);
        }
    }

    #[test]
    fn riccati_examples() {
        let still = MotionProtocol::constant(Mat3::IDENTITY).unwrap();
        let zero = riccati_homogeneous(&still, SymMat3::ZERO, 2.0, 0.01).unwrap();
        assert!(zero.z.iter().all(|z| *z == SymMat3::ZERO));
        assert!(zero.blowup.is_none());

        let z0 = SplitMix::new(4).psd();
        let sol = riccati_homogeneous(&still, z0, 20.0, 0.01).unwrap();
        assert!(sol.blowup.is_none());
        for (i, z) in sol.z.iter().enumerate().step_by(37) {
            let t = sol.time(i);
            let y = Mat3::IDENTITY + z0.to_mat3() * t;
            let want = (z0.to_mat3() * y.inverse().unwrap()).sym();
            assert!((*z - want).norm() < 1e-12 * (1.0 + want.norm()));
        }

        let dt = 1e-3;
        let neg = riccati_homogeneous(&still, SymMat3::diag(-1.0, 0.0, 0.0), 3.0, dt).unwrap();
        let tb = neg.blowup_time().expect("blow-up");
        assert!((tb - 1.0).abs() <= dt, "{tb}");
    }
}
