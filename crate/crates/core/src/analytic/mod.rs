//! Meromorphic functions of one complex variable and their integration over
//! sample grids.

pub mod expr;
pub mod grid;
pub mod parse;
pub mod poly;
pub mod primitive;
pub mod quad;

pub use expr::{AnalyticExpr, ExprError, POLE_EPS};
pub use grid::{DomainGrid, Field, GridError, SpanningTree, TreeKind};
pub use parse::{parse_expression, ParseError};
pub use poly::{rational_orders, PolyC, PolyError, RootOrder};
pub use primitive::{
    cell_loop_residual, field_distance, path_primitive, path_primitive_fn, sweep, PrimitiveError,
    PrimitiveField, Residual,
};
pub use quad::gauss_legendre_segment;
