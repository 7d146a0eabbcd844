//! p-adic and adelic models of market price dynamics.
//!
//! - [`padic`]: exact rationals, valuations, norms and truncated p-adic numbers.
//! - [`waves`]: fractal digit maps and the saw/step waves they generate.
//! - [`adele`]: additive and multiplicative characters, product test
//!   functions and the Weyl operator on finite p-adic quotients.
//! - [`minority`]: a minority-game market and its spin-glass decomposition.
//! - [`fit`]: least-squares wave fitting and forecasting of price series.
//! - [`io`] and [`cli`]: CSV/JSON/SVG formats and the command line.

pub mod adele;
pub mod cli;
pub mod error;
pub mod fit;
pub mod io;
pub mod minority;
pub mod padic;
pub mod series;
pub mod waves;

pub use error::{Error, Result};
