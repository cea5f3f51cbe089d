//! Affine maps, open cells, transitions, germs and finitely generated
//! affine groups.

mod affine;
mod cell;
mod group;

use thiserror::Error;

use crate::scalarfield::ScalarError;

pub use affine::{compose_germ, is_euclidean_isometry, AffineDisplay, AffineMap, Germ};
pub use cell::{HalfSpace, OpenCell, Transition};
pub use group::{
    isotropy_ball, orbit_equal, word_ball, BallElement, FGAffineGroup, Letter, OrbitVerdict, Word,
    WordDisplay,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AffineError {
    #[error("linear part is not square")]
    NotSquare,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("linear part is singular")]
    Singular,
    #[error("transition domain is empty")]
    EmptyDomain,
    #[error("germ basepoints do not match")]
    BasepointMismatch,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}
