pub mod energy;
pub mod fom;
pub mod roc;
pub mod simulate;
pub mod validate;
