//! Two-class generative model of annotation arrivals.
//!
//! Each song has `M` annotation slots. Slot `i` sits at coverage
//! `x = i / (M - 1)`, and its author class is drawn with probability
//! proportional to `w_k u_k(x)`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seeds;
use crate::utility::{RankHistogram, UserClass, UtilityError, UtilityParams};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("utility of {class:?} is {value} at coverage {x}; must be positive on [0, 1]")]
    InvalidParameters {
        class: UserClass,
        x: f64,
        value: f64,
    },
    #[error("need at least 2 slots per song and 1 song (got M={m}, S={s})")]
    InvalidShape { m: usize, s: usize },
    #[error("mixing weights must be positive and finite")]
    InvalidMix,
    #[error("no events of class {0:?}")]
    EmptyClass(UserClass),
    #[error(transparent)]
    Histogram(#[from] UtilityError),
}

/// Relative population weights of the two classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mix {
    pub high: f64,
    pub low: f64,
}

impl Default for Mix {
    fn default() -> Self {
        Mix {
            high: 1.0,
            low: 1.0,
        }
    }
}

/// Coverage contributed by each class so far on one song.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoverageState {
    pub rho_high: f64,
    pub rho_low: f64,
}

impl CoverageState {
    pub fn total(&self) -> f64 {
        self.rho_high + self.rho_low
    }

    /// Adds `delta` of coverage for `class`, never pushing the total past 1.
    pub fn advance(&mut self, class: UserClass, delta: f64) {
        let room = (1.0 - self.total()).max(0.0);
        let step = delta.max(0.0).min(room);
        match class {
            UserClass::HighIq => self.rho_high += step,
            UserClass::LowIq => self.rho_low += step,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub song: u32,
    pub slot: u32,
    pub x: f64,
    pub class: UserClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRun {
    pub seed: u64,
    pub m: usize,
    pub s: usize,
    pub mix: Mix,
    /// Ordered by song, then slot.
    pub events: Vec<SimEvent>,
}

impl SimRun {
    pub fn class_count(&self, class: UserClass) -> usize {
        self.events.iter().filter(|e| e.class == class).count()
    }

    /// Coverage state of `song` after its first `slots` events.
    pub fn coverage_after(&self, song: usize, slots: usize) -> CoverageState {
        let delta = 1.0 / (self.m - 1) as f64;
        let mut state = CoverageState::default();
        for e in &self.events[song * self.m..song * self.m + slots.min(self.m)] {
            state.advance(e.class, delta);
        }
        state
    }
}

pub fn slot_coverage(i: usize, m: usize) -> f64 {
    i as f64 / (m - 1) as f64
}

/// Probability that the slot at coverage `x` goes to the high class.
pub fn high_probability(
    params_h: &UtilityParams,
    params_l: &UtilityParams,
    mix: Mix,
    x: f64,
) -> Result<f64, SimError> {
    let uh = positive_utility(params_h, UserClass::HighIq, x)?;
    let ul = positive_utility(params_l, UserClass::LowIq, x)?;
    let (wh, wl) = (mix.high * uh, mix.low * ul);
    Ok(wh / (wh + wl))
}

fn positive_utility(p: &UtilityParams, class: UserClass, x: f64) -> Result<f64, SimError> {
    let value = p.evaluate(x)?;
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(SimError::InvalidParameters { class, x, value })
    }
}

/// Simulates `s` songs with `m` slots each. Songs draw from independent
/// streams keyed by song index, so output does not depend on thread count.
pub fn simulate(
    params_h: &UtilityParams,
    params_l: &UtilityParams,
    m: usize,
    s: usize,
    seed: u64,
    mix: Mix,
) -> Result<SimRun, SimError> {
    if m < 2 || s < 1 {
        return Err(SimError::InvalidShape { m, s });
    }
    if !(mix.high > 0.0 && mix.low > 0.0 && mix.high.is_finite() && mix.low.is_finite()) {
        return Err(SimError::InvalidMix);
    }
    let p_high: Vec<f64> = (0..m)
        .map(|i| high_probability(params_h, params_l, mix, slot_coverage(i, m)))
        .collect::<Result<_, _>>()?;

    let per_song: Vec<Vec<SimEvent>> = (0..s)
        .into_par_iter()
        .map(|song| {
            let mut rng = seeds::stream(seed, song as u64);
            p_high
                .iter()
                .enumerate()
                .map(|(i, &p)| {
                    let class = if rng.gen::<f64>() < p {
                        UserClass::HighIq
                    } else {
                        UserClass::LowIq
                    };
                    SimEvent {
                        song: song as u32,
                        slot: i as u32,
                        x: slot_coverage(i, m),
                        class,
                    }
                })
                .collect()
        })
        .collect();

    Ok(SimRun {
        seed,
        m,
        s,
        mix,
        events: per_song.into_iter().flatten().collect(),
    })
}

/// Density histogram of slot coverage over the events of one class.
pub fn class_conditional_density(
    run: &SimRun,
    class: UserClass,
    bins: usize,
) -> Result<RankHistogram, SimError> {
    let xs: Vec<f64> = run
        .events
        .iter()
        .filter(|e| e.class == class)
        .map(|e| e.x)
        .collect();
    if xs.is_empty() {
        return Err(SimError::EmptyClass(class));
    }
    Ok(RankHistogram::from_values(&xs, bins)?)
}
