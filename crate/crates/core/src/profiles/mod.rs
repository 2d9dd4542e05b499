//! Construction and validation of the scalar profiles behind every plug:
//! the Wilson pairs (f, g) in dimension 3 and n, the bump/ramp data of the
//! deactivation homotopy, and the η ramp of the parametric family.

pub mod eta;
pub mod homotopy;
pub mod shape;
pub mod wilson3;
pub mod wilson_nd;

pub use eta::{eta_value, EtaProfile};
pub use homotopy::{homotopy_scalars, Arc, HomotopyProfile};
pub use wilson3::{make_wilson3_profile, Wilson3Params, Wilson3Profile};
pub use wilson_nd::{make_wilson_nd_profile, WilsonNdParams, WilsonNdProfile};
