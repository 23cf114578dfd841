//! Wavelet reconstruction spaces on `[0, 1]`.

pub mod dwt;
pub mod filter;
pub mod refinement;
pub mod space;

pub use dwt::{dwt, idwt};
pub use filter::{make_filter, Family, ScalingFilter};
pub use refinement::{cascade_evaluate, scaling_fourier, Pieces};
pub use space::{
    build_space, build_space_with, BasisFunction, BoundaryType, ReconstructionSpace, Region,
    SpaceDescriptor, Term,
};
