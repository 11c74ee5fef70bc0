//! Termination test on five-iteration running averages.

use std::collections::VecDeque;

pub const WINDOW: usize = 5;

/// Last five objective and volume values.
#[derive(Debug, Clone, Default)]
pub struct ConvergenceWindow {
    objective: VecDeque<f64>,
    volume: VecDeque<f64>,
}

impl ConvergenceWindow {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, objective: f64, volume: f64) {
        if self.objective.len() == WINDOW {
            self.objective.pop_front();
            self.volume.pop_front();
        }
        self.objective.push_back(objective);
        self.volume.push_back(volume);
    }

    pub fn is_full(&self) -> bool {
        self.objective.len() == WINDOW
    }

    /// Mean of the stored objectives, once five are available.
    pub fn objective_average(&self) -> Option<f64> {
        self.is_full().then(|| self.objective.iter().sum::<f64>() / WINDOW as f64)
    }

    pub fn volume_average(&self) -> Option<f64> {
        self.is_full().then(|| self.volume.iter().sum::<f64>() / WINDOW as f64)
    }
}

/// True when the latest objective and volume are each within `threshold`
/// (relative) of their five-step averages and the volume is feasible.
pub fn check_convergence(window: &ConvergenceWindow, v_bar: f64, threshold: f64) -> bool {
    let (Some(c_avg), Some(v_avg)) = (window.objective_average(), window.volume_average()) else {
        return false;
    };
    let c = *window.objective.back().unwrap();
    let v = *window.volume.back().unwrap();
    (c - c_avg).abs() / c_avg <= threshold && v <= v_bar && (v - v_avg).abs() / v_avg <= threshold
}
