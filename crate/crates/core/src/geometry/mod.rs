//! Component geometry, topology description functions and their regularization.

mod component;
mod regularize;
mod tdf;

pub use component::{rotation_matrix, Component, Component2D, Component3D};
pub use regularize::{heaviside_reg, heaviside_reg_deriv, ks_aggregate, RegularizationParams};
pub use tdf::{design_fingerprint, eval_tdf_2d, eval_tdf_3d, support_box, NodeOverride, SupportBox, TdfField};
