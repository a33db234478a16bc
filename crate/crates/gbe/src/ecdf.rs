//! Empirical distribution functions and Kolmogorov-Smirnov distances.

use gbe_core::cdf::CdfRequest;
use gbe_core::painleve::{tw_cdf, HMSolution};
use gbe_core::{Beta, Cutoff, PrecisionContext};
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Usage("empirical CDF needs at least one sample".into()));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::Usage("samples contain NaN".into()));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of samples `≤ x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.len() as f64
    }

    /// `sup |F_n − F|`, attained at a sample point from one side or the other.
    pub fn ks_distance<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let n = self.len() as f64;
        self.sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                ((i + 1) as f64 / n - f).max(f - i as f64 / n)
            })
            .fold(0.0, f64::max)
    }

    /// Two-sample statistic `sup |F_n − G_m|`.
    pub fn ks_two_sample(&self, other: &EmpiricalCdf) -> f64 {
        self.sorted
            .iter()
            .chain(other.sorted.iter())
            .map(|&x| (self.eval(x) - other.eval(x)).abs())
            .fold(0.0, f64::max)
    }
}

/// Asymptotic KS critical value `c(α)/√n` (`c = 1.63` at the 1% level).
pub fn ks_critical(count: usize, level_constant: f64) -> f64 {
    level_constant / (count as f64).sqrt()
}

/// A CDF tabulated on a uniform grid and linearly interpolated; 0 below the
/// grid and 1 above it.
#[derive(Clone, Debug)]
pub struct TabulatedCdf {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl TabulatedCdf {
    pub fn eval(&self, x: f64) -> f64 {
        let pos = (x - self.start) / self.step;
        if pos <= 0.0 {
            return if pos == 0.0 { self.values[0] } else { 0.0 };
        }
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return if i + 1 == self.values.len() && pos == i as f64 { self.values[i] } else { 1.0 };
        }
        let t = pos - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    /// `F_{β,N}` on `[lo, hi]` from the exact finite-N formulas.
    pub fn finite_n(beta: Beta, n: usize, lo: f64, hi: f64, step: f64, ctx: &PrecisionContext) -> Result<Self> {
        let count = ((hi - lo) / step).ceil() as usize + 1;
        let values: Result<Vec<f64>> = (0..count)
            .into_par_iter()
            .map(|i| {
                let y = Cutoff::Finite(ctx.real(lo + i as f64 * step));
                Ok(CdfRequest::new(beta, n, y).evaluate(ctx)?.to_f64())
            })
            .collect();
        Ok(TabulatedCdf { start: lo, step, values: values? })
    }
}

/// `TW_β(s)`, clamped to 0 or 1 outside the range covered by `sol`.
pub fn tw_clamped(beta: Beta, s: f64, sol: &HMSolution) -> f64 {
    let (lo, hi) = (sol.x_min() + 1.0, sol.x_max() - 1.0);
    if s < lo {
        0.0
    } else if s > hi {
        1.0
    } else {
        tw_cdf(beta, s, sol).expect("inside the tabulated range")
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn step_conventions() {
        let e = EmpiricalCdf::new(&[0.0]).unwrap();
        assert_eq!(e.eval(-1e-300), 0.0);
        assert_eq!(e.eval(0.0), 1.0);
        let heaviside = |x: f64| if x >= 0.0 { 1.0 } else { 0.0 };
        let d = e.ks_distance(heaviside);
        assert!((0.0..=1.0).contains(&d));
        assert!(EmpiricalCdf::new(&[]).is_err());
    }

    #[test]
    fn glivenko_cantelli_smoke() {
        // deterministic uniform quantiles drawn through the inverse CDF of U(0,1)
        for n in [10usize, 100, 1000, 10000] {
            let s: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
            let d = EmpiricalCdf::new(&s).unwrap().ks_distance(|x| x.clamp(0.0, 1.0));
            assert!((d - 0.5 / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((normal_cdf(-2.5) - 0.006_209_665_325_776_132).abs() < 1e-15);
    }

    #[test]
    fn tabulated_interpolates_and_clamps() {
        let t = TabulatedCdf { start: 0.0, step: 0.5, values: vec![0.1, 0.5, 0.9] };
        assert_eq!(t.eval(-0.1), 0.0);
        assert_eq!(t.eval(0.0), 0.1);
        assert!((t.eval(0.25) - 0.3).abs() < 1e-15);
        assert_eq!(t.eval(1.0), 0.9);
        assert_eq!(t.eval(1.01), 1.0);
    }

    proptest! {
        #[test]
        fn ecdf_is_monotone_and_bounded(mut xs in proptest::collection::vec(-1e3f64..1e3, 1..60), probe in -2e3f64..2e3) {
            let e = EmpiricalCdf::new(&xs).unwrap();
            xs.sort_by(f64::total_cmp);
            prop_assert!(e.samples() == &xs[..]);
            let v = e.eval(probe);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(e.eval(probe + 1.0) >= v);
            prop_assert_eq!(e.eval(xs[xs.len() - 1]), 1.0);
            prop_assert_eq!(e.ks_two_sample(&e), 0.0);
        }
    }
}
