//! Gradient-based interventions: analytic gradients, the budget projection,
//! ADAM, and the two projected-ascent methods.

mod adam;
mod ascent;
mod gradient;
mod projection;

pub use adam::{adam_step, AdamState};
pub use ascent::{equilibrium_m_estimate, projected_huber, sigmoid_gd, OptimizerConfig};
pub use gradient::{
    equilibrium_jacobian_action, huber_gradient, huber_gradient_at, huber_gradient_with,
    jacobian_action_at, sigmoid_gradient, sigmoid_gradient_at, sigmoid_gradient_with,
    HuberGradient,
};
pub use projection::project_l1_box;
