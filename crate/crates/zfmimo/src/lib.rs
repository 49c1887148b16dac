//! Uplink performance toolkit for multi-cell massive MIMO with zero-forcing
//! receivers under pilot contamination and channel aging.
//!
//! The library evaluates the per-terminal SINR model
//!
//! ```text
//! gamma_k  ~  alpha^2 p X / (alpha^2 p C X + p Y + 1)
//! ```
//!
//! where `X` is Erlang-distributed desired-signal power, `Y` is a sum of
//! independent exponentials (the aging/estimation error power) and `C` is the
//! deterministic pilot-contamination constant. Every closed-form quantity —
//! ergodic rate, Jensen lower bound, outage probability, low-SNR metrics and
//! large-antenna limits — is paired with an independent numerical oracle
//! (adaptive quadrature and two flavours of Monte-Carlo simulation) so the
//! backends cross-validate each other.
//!
//! Module map:
//! - [`scenario`]: network/fading/aging/power configuration and derived statistics
//! - [`specfun`]: self-contained special-function kernel (J0, Ei, incomplete gamma, Tricomi U)
//! - [`dist`]: the SINR constituent distributions (Erlang X, gamma-mixture Y)
//! - [`analytic`]: closed-form evaluators plus their quadrature oracles
//! - [`montecarlo`]: matrix-level and scalar stochastic simulators
//! - [`validate`]: the acceptance checklist run by `zfmimo validate` and CI

pub mod analytic;
pub mod dist;
pub mod montecarlo;
pub mod mpfloat;
pub mod presets;
pub mod quad;
pub mod scenario;
pub mod specfun;
pub mod stats;
pub mod validate;
