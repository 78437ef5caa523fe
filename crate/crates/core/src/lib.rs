//! Iterated discrete snakes, their encodings as plane trees and labeled
//! contours, the CVS bijection with pointed quadrangulations, and discrete
//! feuilletages built by gluing layers of trees.

pub mod cvs;
pub mod encodings;
pub mod error;
pub mod feuilletage;
pub mod metrics;
pub mod oracles;
pub mod permmaps;
pub mod sampling;
pub mod svg;
pub mod unionfind;

pub use error::{Error, Result};
