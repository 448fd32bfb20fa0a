//! Spike trains: finite, non-decreasing sequences of integer time steps.
//!
//! Physical time is `step * dt`; everything inside the crate works on steps so
//! that comparisons between networks are exact.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Simulation step index.
pub type Step = u32;

/// A sorted (ties allowed) sequence of spike steps. May be empty.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Step>", into = "Vec<Step>")]
pub struct SpikeTrain(Vec<Step>);

impl SpikeTrain {
    pub fn empty() -> Self {
        SpikeTrain(Vec::new())
    }

    pub fn new(steps: Vec<Step>) -> Result<Self> {
        if let Some(index) = steps.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::UnsortedTrain { index: index + 1 });
        }
        Ok(SpikeTrain(steps))
    }

    pub fn single(step: Step) -> Self {
        SpikeTrain(vec![step])
    }

    /// Builds a train from steps pushed in order by the simulator.
    pub(crate) fn from_sorted(steps: Vec<Step>) -> Self {
        debug_assert!(steps.windows(2).all(|w| w[0] <= w[1]));
        SpikeTrain(steps)
    }

    pub fn steps(&self) -> &[Step] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Step> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Step> {
        self.0.last().copied()
    }

    pub fn check_horizon(&self, horizon: Step) -> Result<()> {
        match self.last() {
            Some(step) if step > horizon => Err(Error::OutOfHorizon { step, horizon }),
            _ => Ok(()),
        }
    }

    /// Keeps only spikes strictly before `cutoff`.
    pub fn truncated_before(&self, cutoff: Step) -> SpikeTrain {
        let end = self.0.partition_point(|&s| s < cutoff);
        SpikeTrain(self.0[..end].to_vec())
    }

    /// `self ⊕ other`; fails instead of re-sorting.
    pub fn append(&self, other: &SpikeTrain) -> Result<SpikeTrain> {
        append_trains(self, other)
    }
}

impl TryFrom<Vec<Step>> for SpikeTrain {
    type Error = Error;

    fn try_from(steps: Vec<Step>) -> Result<Self> {
        SpikeTrain::new(steps)
    }
}

impl From<SpikeTrain> for Vec<Step> {
    fn from(t: SpikeTrain) -> Self {
        t.0
    }
}

impl fmt::Display for SpikeTrain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str(")")
    }
}

/// Concatenates two trains. The last spike of `a` must not come after the
/// first spike of `b`.
pub fn append_trains(a: &SpikeTrain, b: &SpikeTrain) -> Result<SpikeTrain> {
    if let (Some(left_last), Some(right_first)) = (a.last(), b.first()) {
        if left_last > right_first {
            return Err(Error::OrderViolation { left_last, right_first });
        }
    }
    let mut steps = Vec::with_capacity(a.len() + b.len());
    steps.extend_from_slice(&a.0);
    steps.extend_from_slice(&b.0);
    Ok(SpikeTrain(steps))
}

/// Earliest spike over all trains, `None` when every train is silent.
pub fn min_spike_time<'a, I>(trains: I) -> Option<Step>
where
    I: IntoIterator<Item = &'a SpikeTrain>,
{
    trains.into_iter().filter_map(SpikeTrain::first).min()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(steps: &[Step]) -> SpikeTrain {
        SpikeTrain::new(steps.to_vec()).unwrap()
    }

    #[test]
    fn append_examples() {
        assert_eq!(append_trains(&t(&[2, 5]), &t(&[7])).unwrap(), t(&[2, 5, 7]));
        assert_eq!(append_trains(&t(&[2, 5]), &t(&[])).unwrap(), t(&[2, 5]));
        assert_eq!(append_trains(&t(&[]), &t(&[4])).unwrap(), t(&[4]));
        assert_eq!(
            append_trains(&t(&[5]), &t(&[2])),
            Err(Error::OrderViolation { left_last: 5, right_first: 2 })
        );
        // ties are fine
        assert_eq!(append_trains(&t(&[3]), &t(&[3])).unwrap(), t(&[3, 3]));
    }

    #[test]
    fn min_spike_time_examples() {
        assert_eq!(min_spike_time(&[t(&[3, 5]), t(&[2])]), Some(2));
        assert_eq!(min_spike_time(&[t(&[]), t(&[])]), None);
        assert_eq!(min_spike_time(&[t(&[0])]), Some(0));
    }

    #[test]
    fn rejects_unsorted() {
        assert_eq!(SpikeTrain::new(vec![1, 3, 2]), Err(Error::UnsortedTrain { index: 2 }));
        assert!(serde_json::from_str::<SpikeTrain>("[4,1]").is_err());
        assert_eq!(serde_json::from_str::<SpikeTrain>("[1,1,4]").unwrap(), t(&[1, 1, 4]));
    }

    #[test]
    fn horizon_and_truncation() {
        assert!(t(&[0, 10]).check_horizon(10).is_ok());
        assert!(t(&[11]).check_horizon(10).is_err());
        assert_eq!(t(&[1, 4, 4, 9]).truncated_before(4), t(&[1]));
        assert_eq!(t(&[1, 4, 4, 9]).truncated_before(5), t(&[1, 4, 4]));
        assert_eq!(t(&[1, 4]).to_string(), "(1,4)");
    }

    fn sorted_train() -> impl Strategy<Value = SpikeTrain> {
        prop::collection::vec(0u32..50, 0..6).prop_map(|mut v| {
            v.sort_unstable();
            SpikeTrain::new(v).unwrap()
        })
    }

    proptest! {
        #[test]
        fn append_identity_and_associativity(a in sorted_train(), b in sorted_train(), c in sorted_train()) {
            let e = SpikeTrain::empty();
            prop_assert_eq!(append_trains(&a, &e).unwrap(), a.clone());
            prop_assert_eq!(append_trains(&e, &a).unwrap(), a.clone());
            // shift b and c so the three are compatible
            let off_b = a.last().unwrap_or(0);
            let b = SpikeTrain::new(b.steps().iter().map(|s| s + off_b).collect()).unwrap();
            let off_c = b.last().or(a.last()).unwrap_or(0);
            let c = SpikeTrain::new(c.steps().iter().map(|s| s + off_c).collect()).unwrap();
            let left = append_trains(&append_trains(&a, &b).unwrap(), &c).unwrap();
            let right = append_trains(&a, &append_trains(&b, &c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }
    }
}
