//! Linear index coding toolkit: instances, alignment-graph feasibility,
//! explicit vector-linear schemes over finite fields, exhaustive decoding
//! simulation, the groupcast-to-unicast reduction, converse bounds and
//! brute-force oracles for small instances.

pub mod galois;
pub mod model;
pub mod scheme;
pub mod alignment;
pub mod symmetric;
pub mod unicast;
pub mod bounds;
pub mod oracle;
