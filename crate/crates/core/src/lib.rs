//! Simulation and thermodynamic auditing of incompressible viscoelastic
//! fluids described with a symmetric internal variable: Oldroyd B, its
//! nonlinear family, Zaremba-Jaumann and Oldroyd A.

pub mod constitutive;
pub mod error;
pub mod integrate;
pub mod kinematics;
pub mod mat3;
pub mod random;
pub mod scenario;
pub mod thermo;

pub use constitutive::{MaterialParams, ModelKind, ObjectiveRate};
pub use error::{Error, Result};
pub use integrate::{Status, Trajectory};
pub use kinematics::{KinematicSample, MotionProtocol};
pub use mat3::{Mat3, SymMat3};
