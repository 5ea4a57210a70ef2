//! Prescribed homogeneous incompressible motions.
//!
//! A [`MotionProtocol`] gives the deformation gradient `F(t)`, its rate
//! `H(t) = Ḟ` and acceleration `Γ(t) = F̈` in closed form, and [`sample`]
//! derives the Eulerian and Cauchy-Green fields from them.

use crate::error::{Error, Result};
use crate::mat3::{cofactor, frobenius, mat_exp, Mat3, SymMat3};

const EXP_TOL: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq)]
pub enum ProtocolKind {
    /// `F = diag(e^{aτ}, e^{-aτ}, 1)`, `τ = t − t₀`.
    PlanarExtension {
        rate: f64,
    },
    /// `F = I + γ̇ τ e₁⊗e₂`.
    SimpleShear {
        rate: f64,
    },
    /// Eulerian velocity gradient `h(t) = cos(ωt) m` with `F(t₀) = I`.
    OscillatoryEuler {
        m: Mat3,
        omega: f64,
    },
    ConstantF {
        f: Mat3,
    },
    /// `F*(t) = exp(((t − t₁)₊)² m) F(t)`, the acceleration-steering extension
    /// of `base` after `t₁`.
    Extended {
        base: Box<MotionProtocol>,
        t1: f64,
        m: Mat3,
    },
    /// Superposed rigid rotation `F*(t) = Q(t) F(t)` about a fixed axis at
    /// constant angular speed.
    Rotated {
        base: Box<MotionProtocol>,
        axis: [f64; 3],
        speed: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MotionProtocol {
    kind: ProtocolKind,
    t0: f64,
}

/// Kinematic fields at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KinematicSample {
    pub t: f64,
    /// Deformation gradient `F`.
    pub f: Mat3,
    /// `H = ∂F/∂t`.
    pub f_rate: Mat3,
    /// Acceleration gradient `Γ = ∂²F/∂t²`.
    pub f_accel: Mat3,
    /// Velocity gradient `h = H F⁻¹`.
    pub vel_grad: Mat3,
    /// `d = Sym(h)`.
    pub stretching: SymMat3,
    /// `w = Skew(h)`.
    pub spin: Mat3,
    /// `C = FᵀF`.
    pub cauchy_green: SymMat3,
    pub cauchy_green_rate: SymMat3,
    pub cauchy_green_inv: SymMat3,
    pub cauchy_green_inv_rate: SymMat3,
}

impl MotionProtocol {
    pub fn planar_extension(rate: f64) -> Self {
        Self::bare(ProtocolKind::PlanarExtension { rate })
    }

    pub fn simple_shear(rate: f64) -> Self {
        Self::bare(ProtocolKind::SimpleShear { rate })
    }

    /// `m` must be traceless to within `1e-12`; the residual trace is then
    /// removed so that `tr m = 0` holds exactly in what is stored.
    pub fn oscillatory(m: Mat3, omega: f64) -> Result<Self> {
        if !m.is_finite() || m.trace().abs() > 1e-12 * (1.0 + m.norm()) {
            return Err(Error::field("protocol.m", "must be finite and traceless"));
        }
        if !(omega >= 0.0 && omega.is_finite()) {
            return Err(Error::field("protocol.omega", "must be finite and >= 0"));
        }
        let m = m - Mat3::IDENTITY * (m.trace() / 3.0);
        Ok(Self::bare(ProtocolKind::OscillatoryEuler { m, omega }))
    }

    pub fn constant(f: Mat3) -> Result<Self> {
        if !f.is_finite() || (f.det() - 1.0).abs() > 1e-8 {
            return Err(Error::field("protocol.f", "must have det F = 1"));
        }
        Ok(Self::bare(ProtocolKind::ConstantF { f }))
    }

    fn bare(kind: ProtocolKind) -> Self {
        MotionProtocol { kind, t0: 0.0 }
    }

    /// Same motion, started at `t0` instead of zero.
    pub fn starting_at(mut self, t0: f64) -> Self {
        match &mut self.kind {
            ProtocolKind::Extended { base, .. } | ProtocolKind::Rotated { base, .. } => {
                let b = std::mem::replace(base.as_mut(), Self::planar_extension(0.0));
                **base = b.starting_at(t0);
            }
            _ => {}
        }
        self.t0 = t0;
        self
    }

    /// Continues this motion unchanged up to `t1` and then superposes
    /// `exp(((t − t₁)₊)² m)`. `m` must be traceless to within `1e-8`.
    pub fn extend(self, t1: f64, m: Mat3) -> Result<Self> {
        if m.trace().abs() > 1e-8 {
            return Err(Error::Precondition(format!(
                "extension matrix must be traceless, tr = {:e}",
                m.trace()
            )));
        }
        if t1 < self.t0 {
            return Err(Error::Precondition("extension time precedes t0".into()));
        }
        let m = m - Mat3::IDENTITY * (m.trace() / 3.0);
        let t0 = self.t0;
        Ok(MotionProtocol {
            kind: ProtocolKind::Extended {
                base: Box::new(self),
                t1,
                m,
            },
            t0,
        })
    }

    pub fn kind(&self) -> &ProtocolKind {
        &self.kind
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// Rotation superposed by [`frame_change`] at time `t` (identity for
    /// every other kind).
    pub fn frame_rotation(&self, t: f64) -> Mat3 {
        match &self.kind {
            ProtocolKind::Rotated { axis, speed, .. } => mat_exp(
                &(Mat3::cross_matrix(*axis) * (speed * (t - self.t0))),
                EXP_TOL,
            ),
            _ => Mat3::IDENTITY,
        }
    }

    /// `(F, H, Γ)` at time `t`.
    pub fn motion(&self, t: f64) -> (Mat3, Mat3, Mat3) {
        let tau = t - self.t0;
        match &self.kind {
            ProtocolKind::PlanarExtension { rate: a } => {
                let (ep, em) = ((a * tau).exp(), (-a * tau).exp());
                (
                    Mat3::diag(ep, em, 1.0),
                    Mat3::diag(a * ep, -a * em, 0.0),
                    Mat3::diag(a * a * ep, a * a * em, 0.0),
                )
            }
            ProtocolKind::SimpleShear { rate } => {
                let mut f = Mat3::IDENTITY;
                f[(0, 1)] = rate * tau;
                let mut h = Mat3::ZERO;
                h[(0, 1)] = *rate;
                (f, h, Mat3::ZERO)
            }
            ProtocolKind::OscillatoryEuler { m, omega } => {
                // All h(t) are multiples of m, so F = exp(φ(t) m) with φ' = cos(ωt).
                let phi = if *omega > 0.0 {
                    ((omega * t).sin() - (omega * self.t0).sin()) / omega
                } else {
                    tau
                };
                let f = mat_exp(&(*m * phi), EXP_TOL);
                let (c, s) = ((omega * t).cos(), (omega * t).sin());
                let h = *m * c;
                let f_rate = h * f;
                let f_accel = (*m * (-omega * s) + *m * *m * (c * c)) * f;
                (f, f_rate, f_accel)
            }
            ProtocolKind::ConstantF { f } => (*f, Mat3::ZERO, Mat3::ZERO),
            ProtocolKind::Extended { base, t1, m } => {
                let (f, h, g) = base.motion(t);
                let s = (t - t1).max(0.0);
                if s == 0.0 {
                    return (f, h, g);
                }
                let e = mat_exp(&(*m * (s * s)), EXP_TOL);
                let mef = *m * e * f;
                let meh = *m * e * h;
                let f_star = e * f;
                let h_star = mef * (2.0 * s) + e * h;
                let g_star =
                    (Mat3::IDENTITY + *m * (2.0 * s * s)) * mef * 2.0 + meh * (4.0 * s) + e * g;
                (f_star, h_star, g_star)
            }
            ProtocolKind::Rotated { base, axis, speed } => {
                let (f, h, g) = base.motion(t);
                let w = Mat3::cross_matrix(*axis) * *speed;
                let q = mat_exp(&(w * tau), EXP_TOL);
                let qf = q * f;
                let qh = q * h;
                (qf, w * qf + qh, w * w * qf + w * qh * 2.0 + q * g)
            }
        }
    }
}

/// Kinematic fields of protocol `p` at time `t ≥ t₀`.
pub fn sample(p: &MotionProtocol, t: f64) -> Result<KinematicSample> {
    if t < p.t0 {
        return Err(Error::Precondition(format!(
            "sample time {t} precedes protocol start {}",
            p.t0
        )));
    }
    let (f, f_rate, f_accel) = p.motion(t);
    let det = f.det();
    if !det.is_finite() || (det - 1.0).abs() > 1e-6 {
        return Err(Error::DeterminantDrift {
            t,
            drift: (det - 1.0).abs(),
        });
    }
    Ok(sample_from(t, f, f_rate, f_accel))
}

/// Derived fields for given `(F, H, Γ)`; `F` is assumed invertible.
pub fn sample_from(t: f64, f: Mat3, f_rate: Mat3, f_accel: Mat3) -> KinematicSample {
    let f_inv = f.inverse().unwrap_or(Mat3::ZERO);
    let vel_grad = f_rate * f_inv;
    let c = f.transpose() * f;
    let c_rate = f_rate.transpose() * f + f.transpose() * f_rate;
    let c_inv = f_inv * f_inv.transpose();
    let c_inv_rate = -(c_inv * c_rate * c_inv);
    KinematicSample {
        t,
        f,
        f_rate,
        f_accel,
        vel_grad,
        stretching: vel_grad.sym(),
        spin: vel_grad.skew(),
        cauchy_green: c.sym(),
        cauchy_green_rate: c_rate.sym(),
        cauchy_green_inv: c_inv.sym(),
        cauchy_green_inv_rate: c_inv_rate.sym(),
    }
}

/// Traceless `M` such that the extension `exp(((t − t₁)₊)² M) φ` has
/// acceleration gradient tending to `gamma_star` as `t → t₁⁺`.
///
/// `M = ½ (Γ* − Γ₁) cof(F₁)ᵀ`. The reachable targets are those with
/// `cof F₁ : Γ* = cof F₁ : Γ₁`; when `Γ₁` is itself tangent to SL(3) at
/// `F₁` (e.g. `H₁ = 0`) this is the tangency condition `cof F₁ : Γ* = 0`.
pub fn extension_matrix(f1: &Mat3, gamma1: &Mat3, gamma_star: &Mat3) -> Result<Mat3> {
    if (f1.det() - 1.0).abs() > 1e-8 {
        return Err(Error::Precondition("F1 must satisfy det F1 = 1".into()));
    }
    let cof = cofactor(f1);
    let jump = *gamma_star - *gamma1;
    let mismatch = frobenius(&cof, &jump);
    if mismatch.abs() > 1e-8 * (1.0 + cof.norm() * jump.norm()) {
        return Err(Error::Precondition(format!(
            "target acceleration is not reachable from F1: cof F1 : (Γ* − Γ1) = {mismatch:e}"
        )));
    }
    Ok(jump * cof.transpose() * 0.5)
}

/// Superposes the rigid rotation `Q(t) = exp((t − t₀) speed [axis]×)`.
/// A zero axis leaves the motion unchanged.
pub fn frame_change(p: &MotionProtocol, axis: [f64; 3], speed: f64) -> MotionProtocol {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let axis = if n > 0.0 {
        [axis[0] / n, axis[1] / n, axis[2] / n]
    } else {
        [0.0; 3]
    };
    MotionProtocol {
        kind: ProtocolKind::Rotated {
            base: Box::new(p.clone()),
            axis,
            speed,
        },
        t0: p.t0,
    }
}
