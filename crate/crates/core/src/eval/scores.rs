//! Matching scores `sc1 = Ns/N` and `sc2 = Ns/(N - Nu)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchScore<T> {
    /// Total matchings.
    pub n: u64,
    /// Successful matchings.
    pub ns: u64,
    /// Matchings whose entity could not be linked.
    pub nu: u64,
    pub sc1: T,
    pub sc2: T,
}

impl<T: Scalar> MatchScore<T> {
    pub fn from_counts(n: u64, ns: u64, nu: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("matching results"));
        }
        if nu > n || ns > n - nu {
            return Err(Error::InvalidArgument(format!(
                "counts violate Ns <= N - Nu <= N: N={n} Ns={ns} Nu={nu}"
            )));
        }
        let sc1 = T::from_count(ns) / T::from_count(n);
        let linked = n - nu;
        let sc2 = if linked == 0 {
            T::zero()
        } else {
            T::from_count(ns) / T::from_count(linked)
        };
        Ok(MatchScore { n, ns, nu, sc1, sc2 })
    }
}

/// Scores `(matched, linked)` outcomes. A success must be both.
pub fn matching_scores<T: Scalar>(results: &[(bool, bool)]) -> Result<MatchScore<T>> {
    let n = results.len() as u64;
    let ns = results.iter().filter(|(m, l)| *m && *l).count() as u64;
    let nu = results.iter().filter(|(_, l)| !*l).count() as u64;
    MatchScore::from_counts(n, ns, nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    #[test]
    fn arithmetic() {
        let s: MatchScore<f64> = MatchScore::from_counts(10, 5, 2).unwrap();
        assert_eq!((s.sc1, s.sc2), (0.5, 0.625));
        let e: MatchScore<Rational64> = MatchScore::from_counts(10, 5, 2).unwrap();
        assert_eq!(e.sc2, Rational64::new(5, 8));
    }

    #[test]
    fn unlinked_free_gives_equal_scores() {
        let s: MatchScore<Rational64> = MatchScore::from_counts(7, 3, 0).unwrap();
        assert_eq!(s.sc1, s.sc2);
    }

    #[test]
    fn all_failures_and_empty() {
        let s: MatchScore<f64> = matching_scores(&[(false, true), (true, false)]).unwrap();
        assert_eq!((s.ns, s.nu, s.sc1, s.sc2), (0, 1, 0.0, 0.0));
        assert!(matching_scores::<f64>(&[]).is_err());
        assert!(MatchScore::<f64>::from_counts(3, 3, 1).is_err());
    }
}
