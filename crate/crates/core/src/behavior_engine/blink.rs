//! Spontaneous and speech-onset eye blinks.
//!
//! Blinks come in groups: a single blink, or with probability `p_double` a
//! double blink whose second blink follows `double_gap` later. The interval
//! from the last blink of a group to the next group is drawn from a normal
//! distribution truncated below at `min_interval`. The parent normal is
//! calibrated so that the emitted stream, double blinks included, has the
//! requested mean rate and inter-blink-interval SD.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal as StdNormal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlinkParams {
    pub rate_per_min: f64,
    /// Target standard deviation of inter-blink intervals, s.
    pub ibi_sd: f64,
    pub min_interval: f64,
    pub p_double: f64,
    pub double_gap: f64,
}

impl Default for BlinkParams {
    fn default() -> Self {
        Self {
            rate_per_min: 23.3,
            ibi_sd: 2.0,
            min_interval: 0.1,
            p_double: 0.1,
            double_gap: 0.25,
        }
    }
}

/// Mean and SD of the normal distribution that, truncated below at `a`,
/// has mean `m` and SD `s`.
pub fn untruncate(m: f64, s: f64, a: f64) -> (f64, f64) {
    let z = StdNormal::standard();
    let (mut mu, mut sigma) = (m, s);
    for _ in 0..500 {
        let alpha = (a - mu) / sigma;
        let tail = 1.0 - z.cdf(alpha);
        if tail < 1e-12 {
            break;
        }
        let lambda = z.pdf(alpha) / tail;
        let var_factor = 1.0 + alpha * lambda - lambda * lambda;
        let next_sigma = s / var_factor.sqrt();
        let next_mu = m - next_sigma * lambda;
        let done = (next_mu - mu).abs() < 1e-13 && (next_sigma - sigma).abs() < 1e-13;
        mu = next_mu;
        sigma = next_sigma;
        if done {
            break;
        }
    }
    (mu, sigma)
}

/// Parent normal `(mu, sigma)` of the group interval for `p`.
pub fn calibrate(p: &BlinkParams) -> (f64, f64) {
    let g = p.p_double;
    let m = 60.0 / p.rate_per_min;
    let gap = p.double_gap;
    // Per group: 1 + g blinks, one long interval X and (on average) g short gaps.
    let mean_x = (1.0 + g) * m - g * gap;
    let second_x = (1.0 + g) * (p.ibi_sd * p.ibi_sd + m * m) - g * gap * gap;
    let sd_x = (second_x - mean_x * mean_x).max(1e-12).sqrt();
    untruncate(mean_x, sd_x, p.min_interval)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlinkCause {
    Spontaneous,
    Double,
    Speech,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Blink {
    /// Time in microseconds.
    pub t_us: u64,
    pub cause: BlinkCause,
}

#[derive(Debug, Clone)]
pub struct BlinkSchedule {
    params: BlinkParams,
    parent: Normal<f64>,
    rng: ChaCha8Rng,
    next_us: u64,
    pending_double: Option<u64>,
}

fn to_us(s: f64) -> u64 {
    (s * 1e6).round() as u64
}

impl BlinkSchedule {
    pub fn new(params: BlinkParams, rng: ChaCha8Rng) -> Self {
        let (mu, sigma) = calibrate(&params);
        let mut s = Self {
            parent: Normal::new(mu, sigma).expect("calibrated parameters are finite"),
            params,
            rng,
            next_us: 0,
            pending_double: None,
        };
        s.next_us = s.draw_interval();
        s
    }

    pub fn from_seed(params: BlinkParams, seed: u64) -> Self {
        Self::new(params, ChaCha8Rng::seed_from_u64(seed))
    }

    fn draw_interval(&mut self) -> u64 {
        let min = self.params.min_interval;
        loop {
            let x = self.parent.sample(&mut self.rng);
            if x >= min {
                return to_us(x);
            }
        }
    }

    /// Earliest time a blink is due, microseconds.
    pub fn next_due(&self) -> u64 {
        self.pending_double.map_or(self.next_us, |d| d.min(self.next_us))
    }

    /// Emits every blink due at `now_us`. A speech onset forces a blink at
    /// `now_us` and restarts the interval from it.
    pub fn tick(&mut self, now_us: u64, speech_onset: bool) -> Vec<Blink> {
        let mut out = Vec::new();
        if speech_onset {
            out.push(Blink {
                t_us: now_us,
                cause: BlinkCause::Speech,
            });
            self.pending_double = None;
            self.next_us = now_us + self.draw_interval();
            return out;
        }
        loop {
            if let Some(d) = self.pending_double.filter(|&d| d <= now_us && d <= self.next_us) {
                out.push(Blink {
                    t_us: d,
                    cause: BlinkCause::Double,
                });
                self.pending_double = None;
                self.next_us = d + self.draw_interval();
                continue;
            }
            if self.pending_double.is_none() && self.next_us <= now_us {
                let t = self.next_us;
                out.push(Blink {
                    t_us: t,
                    cause: BlinkCause::Spontaneous,
                });
                if rand::Rng::random::<f64>(&mut self.rng) < self.params.p_double {
                    let d = t + to_us(self.params.double_gap);
                    self.pending_double = Some(d);
                    self.next_us = u64::MAX;
                } else {
                    self.next_us = t + self.draw_interval();
                }
                continue;
            }
            break;
        }
        out
    }

    /// All spontaneous blinks in `[0, until_us]`.
    pub fn run_until(&mut self, until_us: u64) -> Vec<Blink> {
        let mut out = Vec::new();
        while self.next_due() <= until_us {
            let due = self.next_due();
            out.extend(self.tick(due, false));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(blinks: &[Blink], span_s: f64) -> (f64, f64, f64) {
        let ibis: Vec<f64> = blinks.windows(2).map(|w| (w[1].t_us - w[0].t_us) as f64 / 1e6).collect();
        let n = ibis.len() as f64;
        let mean = ibis.iter().sum::<f64>() / n;
        let var = ibis.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (blinks.len() as f64 / span_s * 60.0, mean, var.sqrt())
    }

    #[test]
    fn untruncate_round_trips() {
        let (mu, sigma) = untruncate(2.8, 1.95, 0.1);
        let z = StdNormal::standard();
        let alpha = (0.1 - mu) / sigma;
        let lambda = z.pdf(alpha) / (1.0 - z.cdf(alpha));
        assert!((mu + sigma * lambda - 2.8).abs() < 1e-9);
        let sd = sigma * (1.0 + alpha * lambda - lambda * lambda).sqrt();
        assert!((sd - 1.95).abs() < 1e-9);
    }

    #[test]
    fn ten_thousand_intervals_hit_the_rate() {
        let mut s = BlinkSchedule::from_seed(BlinkParams::default(), 11);
        let mut blinks = Vec::new();
        while blinks.len() < 10_001 {
            let due = s.next_due();
            blinks.extend(s.tick(due, false));
        }
        let span = blinks.last().unwrap().t_us as f64 / 1e6;
        let (rate, _, sd) = stats(&blinks, span);
        assert!((rate - 23.3).abs() < 1.5, "rate {rate}");
        assert!((sd - 2.0).abs() < 0.3, "sd {sd}");
    }

    #[test]
    fn intervals_respect_minimum() {
        let mut s = BlinkSchedule::from_seed(BlinkParams::default(), 5);
        let blinks = s.run_until(600_000_000);
        assert!(blinks.windows(2).all(|w| w[1].t_us - w[0].t_us >= 100_000));
    }

    #[test]
    fn no_doubles_when_probability_zero() {
        let params = BlinkParams {
            p_double: 0.0,
            ..Default::default()
        };
        let mut s = BlinkSchedule::from_seed(params, 5);
        assert!(s.run_until(600_000_000).iter().all(|b| b.cause != BlinkCause::Double));
    }

    #[test]
    fn speech_onset_blinks_now() {
        let mut s = BlinkSchedule::from_seed(BlinkParams::default(), 5);
        let b = s.tick(1_234_000, true);
        assert_eq!(b, vec![Blink { t_us: 1_234_000, cause: BlinkCause::Speech }]);
        assert!(s.next_due() >= 1_334_000);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = BlinkSchedule::from_seed(BlinkParams::default(), 8).run_until(60_000_000);
        let b = BlinkSchedule::from_seed(BlinkParams::default(), 8).run_until(60_000_000);
        assert_eq!(a, b);
    }
}
