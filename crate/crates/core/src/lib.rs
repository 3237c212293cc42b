//! Rate regions of compound quantum multiple-access channels with one classical and one
//! quantum sender, and desk-scale simulation of the associated code constructions.

pub mod channels;
pub mod codesim;
pub mod entropic;
pub mod error;
pub mod optimizer;
pub mod qmatrix;
pub mod regions;
pub mod suites;

pub use channels::{ChoiMatrix, CompoundSet, CqChannel, KrausChannel};
pub use entropic::CqqState;
pub use error::{Error, Result};
pub use qmatrix::{ComplexMatrix, DensityMatrix, PureState, C64};
pub use regions::{CodingInput, RateRegion, Rect};
