//! Exact decision procedures for rationalizable implementation in finite
//! environments: implementability axioms, canonical mechanisms with replayable
//! proof certificates, and a brute-force rationalizability solver.

pub mod axioms;
pub mod certificate;
pub mod corpus;
pub mod env;
pub mod lemma;
pub mod mechanism;
pub mod error;
pub mod lp;
pub mod partition;
pub mod rationalizability;
pub mod report;
pub mod scalar;

pub use num_bigint::BigInt;
pub use num_rational::{BigRational, Ratio};
pub use scalar::Scalar;

/// Default exact scalar.
pub type Rational = BigRational;
/// Machine-word rationals; faster, but overflow panics.
pub type Rational64 = Ratio<i64>;

pub type Environment = env::Environment<Rational>;
pub type Lottery = env::Lottery<Rational>;
pub type AxiomReport = axioms::AxiomReport<Rational>;
