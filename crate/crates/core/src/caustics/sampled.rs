use serde::{Deserialize, Serialize};

use super::CausticsError;
use crate::Vec2;

/// A parameter value that produced no point, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub k: f64,
    pub reason: String,
}

/// Curve samples in parameter order. Parameters where evaluation failed are kept
/// out of `samples` and listed in `singularities` instead.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SampledCurve {
    pub samples: Vec<(f64, Vec2)>,
    pub singularities: Vec<Singularity>,
}

impl SampledCurve {
    pub fn from_results<I>(ks: &[f64], results: I) -> Self
    where
        I: IntoIterator<Item = Result<Vec2, CausticsError>>,
    {
        let mut out = SampledCurve::default();
        for (&k, r) in ks.iter().zip(results) {
            match r {
                Ok(p) if p.is_finite() => out.samples.push((k, p)),
                Ok(_) => out.singularities.push(Singularity { k, reason: "non-finite".into() }),
                Err(e) => out.singularities.push(Singularity { k, reason: e.to_string() }),
            }
        }
        out
    }

    pub fn points(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.samples.iter().map(|s| s.1)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

/// `n` values `tan(u)` with `u` evenly spaced between `atan(lo)` and `atan(hi)`:
/// dense near the origin, still reaching far out along the mirror.
pub fn tan_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut ks: Vec<f64> = linspace(lo.atan(), hi.atan(), n).into_iter().map(f64::tan).collect();
    if let Some(first) = ks.first_mut() {
        *first = lo;
    }
    if let Some(last) = ks.last_mut() {
        *last = hi;
    }
    ks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(linspace(2.0, 3.0, 1), vec![2.0]);
        let t = tan_grid(-1e6, 1e6, 101);
        assert_eq!((t[0], t[100]), (-1e6, 1e6));
        assert!(t[50].abs() < 1e-12);
        assert!(t.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn failures_become_singularities() {
        let ks = [0.0, 1.0, 2.0];
        let c = SampledCurve::from_results(
            &ks,
            vec![
                Ok(Vec2::new(0.0, 0.0)),
                Err(CausticsError::NonFinite { k: 1.0 }),
                Ok(Vec2::new(f64::INFINITY, 0.0)),
            ],
        );
        assert_eq!(c.len(), 1);
        assert_eq!(c.singularities.iter().map(|s| s.k).collect::<Vec<_>>(), vec![1.0, 2.0]);
    }
}
