//! Markov bases and exact conditional goodness-of-fit tests for the toric
//! homogeneous Markov chain (THMC) model.
//!
//! A data set of `N` paths of length `T` over `S` states is a [`PathTable`].
//! Its sufficient statistic under THMC is the initial-state counts and the
//! pooled transition counts ([`SuffStat`]). Tables with the same statistic
//! form a fiber, and a Markov basis connects every fiber; [`markov_basis`]
//! provides one for `S = 2` and for `T = 3`.

pub mod basis;
pub mod config;
pub mod data;
pub mod error;
pub mod fiber;
pub mod inference;
pub mod io;
pub mod moves;
pub mod par;
pub mod params;
pub mod path;
pub mod rank;
pub mod table;

pub use basis::{markov_basis, random_move, BasisDescriptor, Family, MoveGenerator, MoveList};
pub use config::{build_configuration, is_valid_move, Configuration};
pub use error::{Error, Result};
pub use inference::{exact_test, Statistic, TestReport};
pub use fiber::{check_connectivity, enumerate_fiber, exact_conditional, l1_move_norm, Fiber};
pub use moves::Move;
pub use params::{simulate_paths, ModelParams};
pub use path::{Shape, StatePath};
pub use table::{PathTable, SuffStat};
