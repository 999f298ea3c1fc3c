//! Real ternary cubic machinery built around the one-parameter family
//! `F_k(x,y,z) = -x^3 - y^3 - (z-x-y)^3 + 3k xy(z-x-y)` and its Hessian:
//! exact polar quadratic signatures, plane-curve tracing, the Steinian
//! involution, positive index cone decomposition, a probe-point region
//! taxonomy, and a decision engine that certifies 6-manifold invariant
//! triples `(mu, p1, b3)` as admitting no Calabi-Yau structure.
//!
//! Exact rationals carry every sign and inertia decision; floats appear only
//! in curve tracing and root refinement, and every float sign query either
//! clears a configurable epsilon band or reports itself indeterminate.

pub mod cones;
pub mod curve;
pub mod error;
pub mod forms;
pub mod oracle;
pub mod poly;
pub mod scalar;
pub mod steinian;
pub mod wall;

pub use error::Error;
pub use forms::{
    eval_cubic, eval_polar_quadratic, hesse_param_dual, hessian_value, polar_matrix,
    positive_index_member, regime_of, signature, signature_with_eps, Cubic, ParamCubic, Regime,
    Signature, SymMat3, TrilinearForm, Vec3,
};
pub use scalar::{Scalar, SignClass, DEFAULT_EPS};
