//! Symbol classes on the torus: evaluation, sampled seminorms, spectral
//! mollification, nonlinear Sobolev envelopes, and named presets.
//!
//! A [`SymbolSpec`] is a matrix-valued map `(x, xi) -> C^{N x N}` on the
//! periodic box, either given directly or composed through a carrier field
//! (`a(x, xi) = sigma(u(x), xi)`). Regularity metadata (`reg_k`,
//! `reg_theta`, `order`) travels with the symbol so operator bounds can be
//! priced from measured seminorms.

pub mod expr;
pub mod mollify;
pub mod norms;
pub mod presets;
pub mod sobolev;
pub mod spec;

pub use expr::{parse_expr, Expr};
pub use mollify::{filter_field, kernel_profile, kernel_transform, mollification_scale, mollify, KernelProfile, MollifyMode};
pub use norms::{symbol_norm, symbol_norm_holder, multi_indices, NormSampling};
pub use presets::symbol_by_name;
pub use sobolev::{fit_nonlinear_envelope, nonlinear_sobolev_check, NonlinearEnvelope};
pub use spec::{ComposedEval, DirectEval, MatC, PolyTerm, SupportBall, SymbolKind, SymbolSpec};
