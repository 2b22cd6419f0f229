//! Verification of and-inverter graphs against polynomial specifications by
//! extracting linear polynomials from degree-reverse-lexicographic Gröbner
//! bases.
//!
//! The pipeline: [`aig`] parses the circuit, [`ordering`] ranks the
//! variables, [`encode`] builds gate polynomials and linearizes the
//! specification, [`verify`] preprocesses the system and reduces the
//! specification with linear polynomials obtained from local [`groebner`]
//! bases.

pub mod aig;
pub mod benchgen;
pub mod encode;
pub mod groebner;
pub mod ordering;
pub mod poly;
pub mod verify;

pub use aig::{parse_aiger, Aig, AigError, AndNode, Literal};
pub use encode::{encode, EncodeError, EncodeOptions, Linearization, PolySystem, SpecInput};
pub use groebner::{buchberger, GbError, GroebnerBasis, Limits};
pub use ordering::{InputNaming, VarOrder};
pub use poly::{Monomial, MonomialOrder, Polynomial, VarId, VarTable};
pub use verify::{verify, Config, Mode, Verdict, VerificationReport};
