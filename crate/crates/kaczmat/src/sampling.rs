//! Seeded index selection shared by all solvers: weighted draws with
//! probability proportional to squared slice norms, and the cyclic
//! `(k mod len)` rule.
//!
//! The generator is a small counter-based 64-bit mixer implemented here
//! so that draw sequences are bit-reproducible across platforms and the
//! library carries no randomness dependency.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum SamplingError {
    EmptyWeights,
    NonPositiveWeight { index: usize, value: f64 },
}

impl fmt::Display for SamplingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplingError::EmptyWeights => write!(f, "weight list is empty"),
            SamplingError::NonPositiveWeight { index, value } => {
                write!(f, "weight {value} at index {index} is not positive")
            }
        }
    }
}

impl std::error::Error for SamplingError {}

/// Deterministic 64-bit generator (splitmix-style counter mixer).
/// Identical seeds yield identical draw sequences everywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngState {
    state: u64,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller.
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// Discrete distribution over `0..len` with `p_i` proportional to the
/// construction weights. Draws use inverse-CDF lookup by binary search
/// over the cumulative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSampler {
    cumulative: Vec<f64>,
    total: f64,
}

impl WeightedSampler {
    pub fn new(weights: &[f64]) -> Result<Self, SamplingError> {
        if weights.is_empty() {
            return Err(SamplingError::EmptyWeights);
        }
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for (index, &w) in weights.iter().enumerate() {
            if !(w > 0.0) || !w.is_finite() {
                return Err(SamplingError::NonPositiveWeight { index, value: w });
            }
            acc += w;
            cumulative.push(acc);
        }
        Ok(Self {
            cumulative,
            total: acc,
        })
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.total
    }

    /// Probability assigned to `index`.
    pub fn probability(&self, index: usize) -> f64 {
        let prev = if index == 0 {
            0.0
        } else {
            self.cumulative[index - 1]
        };
        (self.cumulative[index] - prev) / self.total
    }

    /// Inverse-CDF lookup: smallest index whose cumulative weight
    /// exceeds `point`. `point` is expected in `[0, total)`.
    pub fn locate(&self, point: f64) -> usize {
        let idx = self.cumulative.partition_point(|&c| c <= point);
        idx.min(self.cumulative.len() - 1)
    }

    pub fn draw(&self, rng: &mut RngState) -> usize {
        self.locate(rng.uniform() * self.total)
    }
}

/// Deterministic cyclic selection: emits `k mod modulus` and advances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicState {
    modulus: usize,
    k: u64,
}

impl CyclicState {
    pub fn new(modulus: usize) -> Self {
        assert!(modulus >= 1, "cyclic modulus must be at least 1");
        Self { modulus, k: 0 }
    }

    pub fn next_index(&mut self) -> usize {
        let i = (self.k % self.modulus as u64) as usize;
        self.k += 1;
        i
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_probabilities() {
        let s = WeightedSampler::new(&[1.0, 3.0]).unwrap();
        assert!((s.probability(0) - 0.25).abs() < 1e-15);
        assert!((s.probability(1) - 0.75).abs() < 1e-15);

        // rows of [[1,2],[2,2]] have squared norms [5, 8]
        let s = WeightedSampler::new(&[5.0, 8.0]).unwrap();
        assert!((s.probability(0) - 5.0 / 13.0).abs() < 1e-15);
        assert!((s.probability(1) - 8.0 / 13.0).abs() < 1e-15);

        let s = WeightedSampler::new(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        for i in 0..4 {
            assert!((s.probability(i) - 0.25).abs() < 1e-15);
        }
        let total: f64 = (0..4).map(|i| s.probability(i)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampler_rejects_bad_weights() {
        assert!(matches!(
            WeightedSampler::new(&[]),
            Err(SamplingError::EmptyWeights)
        ));
        assert!(matches!(
            WeightedSampler::new(&[1.0, 0.0]),
            Err(SamplingError::NonPositiveWeight { index: 1, .. })
        ));
        assert!(WeightedSampler::new(&[1.0, -2.0]).is_err());
        assert!(WeightedSampler::new(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn draw_frequency_converges() {
        // Monte Carlo against exact p with a 3-sigma binomial bound:
        // sigma = sqrt(0.75 * 0.25 / 1e5) ~= 0.00137
        let s = WeightedSampler::new(&[1.0, 3.0]).unwrap();
        let mut rng = RngState::new(12345);
        let n = 100_000;
        let mut hits = 0usize;
        for _ in 0..n {
            if s.draw(&mut rng) == 1 {
                hits += 1;
            }
        }
        let freq = hits as f64 / n as f64;
        assert!(
            (freq - 0.75).abs() < 0.01,
            "frequency {freq} too far from 0.75"
        );
    }

    #[test]
    fn singleton_always_zero() {
        let s = WeightedSampler::new(&[1.0]).unwrap();
        let mut rng = RngState::new(9);
        for _ in 0..100 {
            assert_eq!(s.draw(&mut rng), 0);
        }
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let s = WeightedSampler::new(&[1.0, 3.0]).unwrap();
        let mut a = RngState::new(42);
        let mut b = RngState::new(42);
        let da: Vec<usize> = (0..100).map(|_| s.draw(&mut a)).collect();
        let db: Vec<usize> = (0..100).map(|_| s.draw(&mut b)).collect();
        assert_eq!(da, db);
    }

    #[test]
    fn binary_search_matches_linear_scan() {
        // oracle equivalence: both lookups must agree for the same variate
        let weights = [0.5, 2.0, 0.25, 1.0, 3.25, 0.125];
        let s = WeightedSampler::new(&weights).unwrap();
        let linear = |point: f64| -> usize {
            let mut acc = 0.0;
            for (i, &w) in weights.iter().enumerate() {
                acc += w;
                if point < acc {
                    return i;
                }
            }
            weights.len() - 1
        };
        let mut rng = RngState::new(7);
        for _ in 0..10_000 {
            let point = rng.uniform() * s.total_weight();
            assert_eq!(s.locate(point), linear(point));
        }
        // boundary points: exactly at a cumulative weight belongs to the next bin
        assert_eq!(s.locate(0.5), 1);
        assert_eq!(s.locate(0.0), 0);
    }

    #[test]
    fn chi_square_goodness_of_fit() {
        // Wilson-Hilferty approximation of the chi-square critical value
        // at significance 1e-3 (z = 3.090232).
        let crit = |df: f64| {
            let z = 3.090_232;
            let t = 1.0 - 2.0 / (9.0 * df) + z * (2.0 / (9.0 * df)).sqrt();
            df * t * t * t
        };
        for (seed, size) in [(1u64, 2usize), (2, 7), (3, 64)] {
            let mut wrng = RngState::new(seed);
            let weights: Vec<f64> = (0..size).map(|_| 0.1 + wrng.uniform()).collect();
            let s = WeightedSampler::new(&weights).unwrap();
            let n = 100_000usize;
            let mut counts = vec![0usize; size];
            let mut rng = RngState::new(seed + 100);
            for _ in 0..n {
                counts[s.draw(&mut rng)] += 1;
            }
            let stat: f64 = (0..size)
                .map(|i| {
                    let expected = s.probability(i) * n as f64;
                    let diff = counts[i] as f64 - expected;
                    diff * diff / expected
                })
                .sum();
            let df = (size - 1).max(1) as f64;
            assert!(
                stat < crit(df),
                "chi-square {stat} exceeds critical {} for size {size}",
                crit(df)
            );
        }
    }

    #[test]
    fn cyclic_rule() {
        let mut c = CyclicState::new(3);
        // first pass visits 0, 1, 2 then wraps back to 0
        assert_eq!(c.next_index(), 0);
        assert_eq!(c.next_index(), 1);
        assert_eq!(c.next_index(), 2);
        assert_eq!(c.next_index(), 0);

        let mut one = CyclicState::new(1);
        for _ in 0..5 {
            assert_eq!(one.next_index(), 0);
        }
    }

    #[test]
    fn cyclic_visits_every_index_once_per_period() {
        let modulus = 7;
        let mut c = CyclicState::new(modulus);
        for _ in 0..3 {
            let mut seen = vec![false; modulus];
            for _ in 0..modulus {
                let i = c.next_index();
                assert!(!seen[i]);
                seen[i] = true;
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = RngState::new(2024);
        let n = 100_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let g = rng.standard_normal();
            sum += g;
            sumsq += g * g;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((0.97..=1.03).contains(&var), "variance {var}");
    }
}
