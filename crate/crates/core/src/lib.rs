//! Exact analysis and Monte Carlo simulation of U-bootstrap percolation.
//!
//! * [`family`]: update families, the built-in zoo and the JSON file format.
//! * [`exactgeom`]: exact rational linear algebra, feasibility and cones.
//! * [`stableset`]: stable sets as hemisphere formulas.
//! * [`induced`]: induced families `U[W]`.
//! * [`resistance`]: the resistance `r(U)` and the universality class.
//! * [`simulate`]: the bootstrap dynamics on tori and boxes.
//! * [`estimate`]: Monte Carlo estimates of `p_c` and `L_c`.

pub mod estimate;
pub mod exactgeom;
pub mod family;
pub mod induced;
pub mod resistance;
pub mod simulate;
pub mod stableset;

pub use exactgeom::{QSubspace, QVec};
pub use family::{IntVec, Rule, UpdateFamily};
