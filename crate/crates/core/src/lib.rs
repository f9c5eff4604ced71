//! Exact Seshadri constants of ample classes on abelian surfaces, computed
//! from the integer intersection matrix of the Néron–Severi lattice.

pub mod elliptic;
pub mod engine;
pub mod envelope;
mod ellipsoid;
pub mod error;
pub mod frame;
pub mod lattice;
pub mod linalg;
pub mod pell;
pub mod par;
pub mod plot;
pub mod quad;
pub mod surface;
pub mod survey;

pub use error::{Error, Result};
pub use frame::{HodgeFrame, LatticeBox};
pub use lattice::{IntersectionMatrix, IsometryMap, LatticeClass, Positivity};
pub use quad::{QuadValue, Rational};
pub use par::ExecMode;
pub use surface::Surface;
pub use engine::{Attainment, CurveKind, Engine, SeshadriCurve, SeshadriResult};
