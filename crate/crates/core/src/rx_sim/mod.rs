//! Bit-level model of the physical receiver: front-end calculators, the
//! power-to-SNR map, packet reception with a data-locked oscillator, and
//! interferer injection.

pub mod curves;
pub mod frontend;
pub mod interferer;
pub mod packet;

pub use curves::{false_alarm_curve, missed_detection_curve, wake_latency, PacketTally};
pub use frontend::{diode_bandwidth, gamma_eff, input_power_to_snr, noise_figure_sd, DiodeParams, FrontEndParams};
pub use interferer::{interferer_sim, sir_tolerance, Interferer, InterfererKind};
pub use packet::{simulate_packet, OscillatorModel, PacketFormat, PacketOutcome};
