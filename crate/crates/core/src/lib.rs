//! Soft g-frames over finite parameter sets.
//!
//! A soft object assigns one value to each label of a finite
//! [`ParameterSet`]: soft reals and complex scalars, soft vectors in `C^n`
//! and soft operators (one matrix per label). A [`SoftGFrame`] is a finite
//! family of soft operators `Λ_j : C^n → C^{d_j}`; this crate computes its
//! frame operator, optimal soft bounds, canonical dual, reconstructions,
//! atomic resolutions and compositions with local frames, and ships a
//! randomized harness ([`verify`]) that checks the underlying identities.
//!
//! ```
//! use soft_gframe::{ParameterSet, SoftGFrame, SoftVector};
//!
//! let params = ParameterSet::new(["lo", "hi"]).unwrap();
//! let frame = SoftGFrame::induced_from_vectors(&[
//!     SoftVector::basis(&params, 2, 0),
//!     SoftVector::basis(&params, 2, 0),
//!     SoftVector::basis(&params, 2, 1),
//! ])
//! .unwrap();
//! let cert = frame.frame_bounds(1e-10);
//! assert_eq!(cert.lower.values(), &[1.0, 1.0]);
//! assert_eq!(cert.upper.values(), &[2.0, 2.0]);
//! ```

pub mod cli;
pub mod compose;
pub mod dual;
pub mod error;
pub mod gframe;
pub mod io;

pub mod operators;
pub mod par;
pub mod soft_core;
pub mod verify;

pub use compose::{compose_frame, ComposedFrame, LocalFrameFamily};
pub use dual::{canonical_dual, DualPair, ReconstructionOrder, ResolutionSide};
pub use error::{Result, SoftError};
pub use gframe::{FrameBoundsCertificate, SoftGFrame, DEFAULT_FRAME_TOL};
pub use operators::{SoftOperator, SpectralBoundsReport};
pub use par::Execution;
pub use soft_core::{DirectSumSoftVector, ParameterSet, SoftComplex, SoftReal, SoftVector, Tolerance};
pub use verify::{run_suite, PropertyReport};
