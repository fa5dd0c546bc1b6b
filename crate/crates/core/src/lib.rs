pub mod design;
pub mod error;
pub mod gp;
pub mod rng;
pub mod seeds;
pub mod acquisition;
pub mod bench;
pub mod imfil;
pub mod objectives;
pub mod orchestrator;
