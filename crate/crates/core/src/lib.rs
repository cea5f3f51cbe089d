pub mod affpseudo;
pub mod hector;
pub mod intlinalg;
pub mod localmodel;
pub mod oracle;
pub mod quasifold;
pub mod scalarfield;
pub mod torusfol;
