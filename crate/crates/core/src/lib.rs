//! Surfaces of Bryant type in Minkowski 4-space: construction from
//! meromorphic data, numerical verification, classical limits and
//! classification.
//!
//! Everything numeric is generic over [`Real`]; the aliases below fix the
//! scalar to `f64`, which is the precision the default tolerances assume.

pub mod analytic;
pub mod classify;
pub mod export;
pub mod frame;
pub mod limits;
pub mod lorentz;
pub mod scalar;
pub mod tolerances;
pub mod verify;
pub mod weierstrass;

pub use scalar::{cx, Cx, Real};
pub use tolerances::Tolerances;
pub use weierstrass::Sign;

pub type C64 = Cx<f64>;
pub type Expr = analytic::AnalyticExpr<f64>;
pub type Poly = analytic::PolyC<f64>;
pub type Grid = analytic::DomainGrid<f64>;
pub type Data = weierstrass::WeierstrassData<f64>;
pub type PreparedData = weierstrass::Prepared<f64>;
pub type Frame = frame::FrameField<f64>;
pub type Options = frame::FrameOptions<f64>;
pub type Point = lorentz::HermPoint<f64>;
pub type Vec4 = lorentz::SpacetimeVec<f64>;
pub type Matrix = lorentz::Mat2<f64>;
pub type Rational = classify::RationalData<f64>;
pub type Family = limits::DeformationFamily<f64>;
pub type Fields = verify::report::SurfaceFields<f64>;
