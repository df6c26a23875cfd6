pub mod beamforming;
pub mod channel;
pub mod conic;
pub mod harness;
pub mod rng;
pub mod threshold;
pub mod traffic;
