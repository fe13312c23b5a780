//! Numeric primitives shared by the rest of the crate.

pub mod panel;
pub mod quad;
pub mod rng;
pub mod special;
mod reduce;

pub use panel::PanelGrid;
pub use quad::{gl_rule, quad_space, quad_space_split, quad_time_singular, quad_time_singular_gap, QuadConfig};
pub use reduce::{block_reduce, BLOCK};
pub use rng::RngStream;
pub use special::{beta_product_bound, gaussian_kernel, mittag_leffler, MittagLeffler};
