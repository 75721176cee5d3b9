pub mod bench;
pub mod bode;
pub mod calib;
pub mod reconstruct;
pub mod synth;
pub mod trace;
