//! ROC/AUC, threshold sweeps, expected-energy optimisation and the
//! sensitivity figure of merit.

pub mod energy;
pub mod fom;
pub mod roc;
pub mod sweep;

/// `count` evenly spaced values from `start` to `stop` inclusive.
///
/// Values are computed as `start + k * step` and rounded to 12 decimals so
/// grids like `0.0, 0.1, ...` hit their nominal points exactly.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|k| round12(start + k as f64 * step))
                .collect()
        }
    }
}

/// Grid from `start` to `stop` with spacing `step`, endpoints included.
pub fn step_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step).round() as usize + 1;
    linspace(start, stop, count)
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}
