//! Shared numerical kernels: adaptive quadrature, ODE integrators and the
//! small amount of dense complex linear algebra the physics modules need.

pub mod linalg;
pub mod ode;
pub mod quad;

pub use num_complex::Complex64;

pub type CMatrix = nalgebra::DMatrix<Complex64>;
pub type CVector = nalgebra::DVector<Complex64>;
