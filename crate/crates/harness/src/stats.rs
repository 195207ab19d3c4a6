use statrs::distribution::{Binomial, DiscreteCDF};

/// One-sided sign test: probability of at least `wins` successes among
/// `wins + losses` fair coin flips. Ties are dropped by the caller.
pub fn sign_test(wins: u64, losses: u64) -> f64 {
    let n = wins + losses;
    if n == 0 || wins == 0 {
        return 1.0;
    }
    let b = Binomial::new(0.5, n).expect("valid binomial");
    b.sf(wins - 1)
}

/// Paired sign test that `a[i] < b[i]` tends to hold.
pub fn sign_test_less(a: &[f64], b: &[f64]) -> f64 {
    let wins = a.iter().zip(b).filter(|(x, y)| x < y).count() as u64;
    let losses = a.iter().zip(b).filter(|(x, y)| x > y).count() as u64;
    sign_test(wins, losses)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Increasing,
    Decreasing,
    NoTrend,
}

impl Trend {
    pub fn of(values: &[f64]) -> Trend {
        if values.len() >= 2 && values.windows(2).all(|w| w[1] > w[0]) {
            Trend::Increasing
        } else if values.len() >= 2 && values.windows(2).all(|w| w[1] < w[0]) {
            Trend::Decreasing
        } else {
            Trend::NoTrend
        }
    }

    /// +1, -1 or 0 for CSV output.
    pub fn code(self) -> f64 {
        match self {
            Trend::Increasing => 1.0,
            Trend::Decreasing => -1.0,
            Trend::NoTrend => 0.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Trend::Increasing => "increasing",
            Trend::Decreasing => "decreasing",
            Trend::NoTrend => "no trend",
        }
    }
}
