//! Encoders from real features to spike trains, decoders back, and the
//! empirical L^p distance between decoded outputs.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::train::{SpikeTrain, Step};

fn unit_interval(x: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(Error::DomainError { value: x, domain: "[0, 1]" })
    }
}

/// One spike per channel at `round(x_i * t_max)`.
pub fn latency_encode(x: &[f64], t_max: Step) -> Result<Vec<SpikeTrain>> {
    x.iter()
        .map(|&xi| Ok(SpikeTrain::single((unit_interval(xi)? * t_max as f64).round() as Step)))
        .collect()
}

/// Periodic spikes at `round(k / x_i)` for `k = 1, 2, ...` up to `horizon`.
/// `x_i` is a spikes-per-step rate; zero gives a silent channel.
pub fn rate_encode(x: &[f64], horizon: Step) -> Result<Vec<SpikeTrain>> {
    x.iter()
        .map(|&xi| {
            let rate = unit_interval(xi)?;
            let mut steps = Vec::new();
            if rate > 0.0 {
                for k in 1u64.. {
                    let s = (k as f64 / rate).round();
                    if s > horizon as f64 {
                        break;
                    }
                    steps.push(s as Step);
                }
            }
            SpikeTrain::new(steps)
        })
        .collect()
}

/// First spike time in seconds (`step * dt`), `+inf` for a silent channel.
pub fn latency_decode(trains: &[SpikeTrain], dt: f64) -> Vec<f64> {
    trains.iter().map(|t| t.first().map_or(f64::INFINITY, |s| s as f64 * dt)).collect()
}

pub fn count_decode(trains: &[SpikeTrain]) -> Vec<u64> {
    trains.iter().map(|t| t.len() as u64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Encoder {
    Latency,
    Rate,
}

impl Encoder {
    /// `window` is `t_max` for latency coding and the horizon for rate coding.
    pub fn encode(self, x: &[f64], window: Step) -> Result<Vec<SpikeTrain>> {
        match self {
            Encoder::Latency => latency_encode(x, window),
            Encoder::Rate => rate_encode(x, window),
        }
    }
}

impl FromStr for Encoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "latency" => Ok(Encoder::Latency),
            "rate" => Ok(Encoder::Rate),
            other => Err(Error::Parse(format!("unknown encoder {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decoder {
    /// First spike time in seconds.
    Latency,
    /// Number of spikes.
    Count,
    /// First spike step, after discarding all later spikes.
    FirstSpike,
}

impl Decoder {
    pub fn decode(self, trains: &[SpikeTrain], dt: f64) -> Vec<f64> {
        match self {
            Decoder::Latency => latency_decode(trains, dt),
            Decoder::Count => count_decode(trains).into_iter().map(|c| c as f64).collect(),
            Decoder::FirstSpike => latency_decode(trains, 1.0),
        }
    }
}

impl FromStr for Decoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "latency" => Ok(Decoder::Latency),
            "count" => Ok(Decoder::Count),
            "first-spike" => Ok(Decoder::FirstSpike),
            other => Err(Error::Parse(format!("unknown decoder {other:?}"))),
        }
    }
}

fn abs_diff(a: f64, b: f64) -> f64 {
    // equal infinities (both silent) count as no error
    if a == b {
        0.0
    } else {
        (a - b).abs()
    }
}

/// Empirical L^p distance over a sample set. For finite `p` this is
/// `(mean_s sum_i |a_si - b_si|^p)^(1/p)`; for `p = inf` the largest
/// coordinate difference.
pub fn lp_error(a: &[Vec<f64>], b: &[Vec<f64>], p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::DomainError { value: p, domain: "p in (0, inf]" });
    }
    if a.is_empty() {
        return Err(Error::ShapeMismatch("empty sample set".into()));
    }
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!("{} samples vs {}", a.len(), b.len())));
    }
    if let Some((s, (x, y))) = a.iter().zip(b).enumerate().find(|(_, (x, y))| x.len() != y.len()) {
        return Err(Error::ShapeMismatch(format!("sample {s}: {} vs {} coordinates", x.len(), y.len())));
    }
    let diffs = a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(&u, &v)| abs_diff(u, v)));
    if p.is_infinite() {
        return Ok(diffs.flatten().fold(0.0, f64::max));
    }
    let total: f64 = diffs.map(|d| d.map(|e| e.powf(p)).sum::<f64>()).sum();
    Ok((total / a.len() as f64).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(steps: &[Step]) -> SpikeTrain {
        SpikeTrain::new(steps.to_vec()).unwrap()
    }

    #[test]
    fn latency_encoding() {
        assert_eq!(latency_encode(&[0.0, 0.5, 1.0], 10).unwrap(), vec![t(&[0]), t(&[5]), t(&[10])]);
        assert_eq!(latency_encode(&[], 10).unwrap(), vec![]);
        assert_eq!(latency_encode(&[0.33], 100).unwrap(), vec![t(&[33])]);
        assert!(matches!(latency_encode(&[1.2], 10), Err(Error::DomainError { .. })));
        assert!(latency_encode(&[-0.1], 10).is_err());
    }

    #[test]
    fn rate_encoding() {
        assert_eq!(rate_encode(&[0.5], 8).unwrap(), vec![t(&[2, 4, 6, 8])]);
        assert_eq!(rate_encode(&[0.0], 50).unwrap(), vec![t(&[])]);
        assert_eq!(rate_encode(&[1.0], 3).unwrap(), vec![t(&[1, 2, 3])]);
        assert_eq!(rate_encode(&[0.3], 10).unwrap(), vec![t(&[3, 7, 10])]);
        assert!(rate_encode(&[f64::NAN], 3).is_err());
    }

    #[test]
    fn decoders() {
        let trains = [t(&[3, 5]), t(&[])];
        assert_eq!(latency_decode(&trains, 1.0), vec![3.0, f64::INFINITY]);
        assert_eq!(count_decode(&trains), vec![2, 0]);
        assert_eq!(latency_decode(&[t(&[]), t(&[])], 0.5), vec![f64::INFINITY; 2]);
        assert_eq!(count_decode(&[t(&[]), t(&[])]), vec![0, 0]);
        assert_eq!(latency_decode(&[t(&[0])], 1.0), vec![0.0]);
        assert_eq!(latency_decode(&[t(&[4])], 0.25), vec![1.0]);
        assert_eq!(Decoder::FirstSpike.decode(&trains, 0.25), vec![3.0, f64::INFINITY]);
        assert_eq!(Decoder::Count.decode(&trains, 0.25), vec![2.0, 0.0]);
    }

    #[test]
    fn latency_round_trip_on_grid() {
        for s in 0..=20u32 {
            let x = s as f64 / 20.0;
            let enc = latency_encode(&[x], 20).unwrap();
            assert_eq!(latency_decode(&enc, 1.0), vec![s as f64]);
        }
    }

    #[test]
    fn lp_examples() {
        let a = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        for p in [0.5, 1.0, 2.0, f64::INFINITY] {
            assert_eq!(lp_error(&a, &a, p).unwrap(), 0.0);
        }
        let x = vec![vec![3.0], vec![4.0]];
        let zero = vec![vec![0.0], vec![0.0]];
        assert!((lp_error(&x, &zero, 2.0).unwrap() - 3.5355339059327378).abs() < 1e-12);
        assert_eq!(lp_error(&x, &zero, f64::INFINITY).unwrap(), 4.0);
        assert_eq!(lp_error(&x, &zero, 1.0).unwrap(), 3.5);
    }

    #[test]
    fn lp_infinity_sentinel() {
        let inf = f64::INFINITY;
        assert_eq!(lp_error(&[vec![inf]], &[vec![inf]], 2.0).unwrap(), 0.0);
        assert_eq!(lp_error(&[vec![inf]], &[vec![1.0]], 2.0).unwrap(), inf);
        assert_eq!(lp_error(&[vec![1.0]], &[vec![inf]], inf).unwrap(), inf);
    }

    #[test]
    fn lp_errors() {
        assert!(matches!(lp_error(&[vec![1.0]], &[vec![1.0, 2.0]], 1.0), Err(Error::ShapeMismatch(_))));
        assert!(matches!(lp_error(&[], &[], 1.0), Err(Error::ShapeMismatch(_))));
        assert!(matches!(lp_error(&[vec![1.0]], &[vec![1.0]], 0.0), Err(Error::DomainError { .. })));
    }
}
