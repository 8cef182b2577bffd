//! Periodic railway timetabling.
//!
//! A timetable pattern of period `T` is searched for with a genetic
//! algorithm over integer genotypes (first departure plus running and dwell
//! times per train). Candidate timetables are scored by the weighted number
//! of violated periodic constraints: running time, dwell time, headway,
//! single track and connection.
//!
//! * [`model`]: instances, timetables, constraint derivation and evaluation.
//! * [`codec`]: genotype layout, bounds and decoding.
//! * [`engine`]: the genetic algorithm.
//! * [`oracle`]: exhaustive search and an independent constraint checker.
//! * [`instances`]: JSON instance files and the bundled networks.

pub mod codec;
pub mod engine;
pub mod instances;
pub mod model;
pub mod oracle;
