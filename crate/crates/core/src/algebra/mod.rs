//! Exact scalar and polynomial arithmetic over the rationals.

pub mod bipoly;
pub mod rational;
pub mod roots;
pub mod series;
pub mod unipoly;

pub use bipoly::BiPoly;
pub use rational::BigRational;
pub use roots::{isolate_real_roots, isolate_real_roots_with_width, RealAlgebraic, RealRootInterval};
pub use series::TruncatedSeries;
pub use unipoly::{poly_gcd, UniPoly};
