//! Discrete-time LTI stochastic systems: state-space models, the steady-state
//! Kalman filtering problem and rational transfer functions.

mod dare;
mod model;
mod tf;

pub use dare::{solve_dare, KalmanSolution, DARE_BUDGET, DARE_TOL};
pub use model::{spectral_radius, StateSpaceModel};
pub use tf::{ss_to_tf, RationalTransferFunction};
