//! Special functions: lnΓ, Hurwitz ζ and its s-derivative, Barnes G, and the
//! Gauss product limit.

mod barnes;
mod bernoulli;
mod gamma;
mod hurwitz;

pub use barnes::{barnes_g, ln_barnes_g};
pub use bernoulli::bernoulli;
pub(crate) use bernoulli::even_bernoulli;
pub use gamma::{gamma, gauss_product_limit, ln_gamma, GaussProductSpec};
pub use hurwitz::{hurwitz_zeta, hurwitz_zeta_sderiv, zeta, zeta_deriv, HurwitzQuery};
pub(crate) use hurwitz::hurwitz_pair;
