//! Review analytics that expose what sits behind each rating bar: who wrote
//! the reviews (reviewer experience), how extreme their emotions were, and
//! which aspects they reported. Also classifies rating histogram shapes,
//! simulates self-selected reporting, and carries the statistics used to
//! evaluate the transparency design in user studies.

pub mod aspects;
pub mod config;
pub mod corpus;
mod percent;
pub mod pipeline;
pub mod profiling;
pub mod sentiment;
pub mod shapes;
pub mod studylab;
pub mod text;
pub mod transparency;

pub use percent::round_percentages;
