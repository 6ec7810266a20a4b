//! Small numeric helpers shared by the analytical modules.

/// Compensated (Neumaier) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        acc.extend(iter);
        acc
    }
}

/// Compensated sum of an iterator.
pub fn csum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// `n choose k` as a float. Exact for every count this crate produces.
pub fn binomial_coefficient(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0_f64;
    for i in 0..k {
        c = c * f64::from(n - i) / f64::from(i + 1);
    }
    c.round()
}

/// `C(n, k) p^k (1-p)^(n-k)`, with `0^0 = 1`.
pub fn binomial_pmf(n: u32, k: u32, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    binomial_coefficient(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

/// Full Binomial(n, p) mass vector of length `n + 1`.
pub fn binomial_distribution(n: u32, p: f64) -> Vec<f64> {
    (0..=n).map(|k| binomial_pmf(n, k, p)).collect()
}

/// Discrete convolution of two mass vectors.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_match_pascal() {
        for n in 0..40u32 {
            for k in 1..n {
                let lhs = binomial_coefficient(n, k);
                let rhs = binomial_coefficient(n - 1, k - 1) + binomial_coefficient(n - 1, k);
                assert_eq!(lhs, rhs, "n={n} k={k}");
            }
        }
        assert_eq!(binomial_coefficient(30, 15), 155_117_520.0);
        assert_eq!(binomial_coefficient(3, 5), 0.0);
    }

    #[test]
    fn pmf_edges() {
        assert_eq!(binomial_pmf(0, 0, 0.3), 1.0);
        assert_eq!(binomial_pmf(4, 0, 0.0), 1.0);
        assert_eq!(binomial_pmf(4, 4, 1.0), 1.0);
        assert_eq!(binomial_pmf(4, 2, 1.0), 0.0);
        let total: f64 = binomial_distribution(17, 0.37).iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn convolution_of_bernoullis_is_binomial() {
        let b = [0.6, 0.4];
        let twice = convolve(&b, &b);
        let direct = binomial_distribution(2, 0.4);
        for (x, y) in twice.iter().zip(&direct) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut xs = vec![1.0];
        xs.extend(std::iter::repeat_n(1e-16, 10_000));
        let exact = 1.0 + 1e-12;
        assert!((csum(xs.iter().copied()) - exact).abs() < 1e-15);
    }
}
