//! Pinned pseudo-random generator.
//!
//! Everything stochastic in this crate (synthetic data, fold shuffles) runs
//! on SplitMix64 so that any port of the toolkit can reproduce folds and
//! datasets number for number. The algorithm: the 64-bit state advances by
//! the constant `0x9E3779B97F4A7C15` per draw and the new state is passed
//! through the murmur-style finalizer
//!
//! ```text
//! z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//! z ^= z >> 27; z *= 0x94D049BB133111EB;
//! z ^= z >> 31;
//! ```
//!
//! Derived quantities are pinned too: uniform doubles are the top 53 bits
//! scaled by 2^-53, bounded integers use the modulo reduction, normals use
//! the Box-Muller transform, and shuffles are backward Fisher-Yates. Golden
//! vectors live in the tests below.

/// SplitMix64 generator with a pinned output sequence.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Deterministic child generator for `(seed, stream)`. Streams with the
    /// same seed but different ids are decorrelated by one mixing round.
    pub fn stream(seed: u64, stream: u64) -> Self {
        let mut g = SplitMix64::new(seed.wrapping_add(stream.wrapping_mul(0x9E3779B97F4A7C15)));
        let s = g.next_u64();
        SplitMix64::new(s)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform double in `[0, 1)`: top 53 bits over 2^53.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)` by modulo reduction (bias is negligible
    /// at the sizes used here and the reduction is trivially portable).
    pub fn next_below(&mut self, n: usize) -> usize {
        assert!(n > 0, "next_below requires n > 0");
        (self.next_u64() % n as u64) as usize
    }

    /// Standard normal via Box-Muller; draws two uniforms per pair and
    /// discards the sine branch so the stream stays a pure function of the
    /// draw count.
    pub fn next_normal(&mut self) -> f64 {
        // u1 in (0, 1] so the log is finite.
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Backward Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i + 1);
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference outputs of the SplitMix64 finalizer, computed with an
    // independent implementation.
    #[test]
    fn golden_vectors() {
        let mut g = SplitMix64::new(0);
        assert_eq!(g.next_u64(), 0xE220A8397B1DCDAF);
        assert_eq!(g.next_u64(), 0x6E789E6AA1B965F4);
        assert_eq!(g.next_u64(), 0x06C45D188009454F);
        assert_eq!(g.next_u64(), 0xF88BB8A8724C81EC);

        let mut g = SplitMix64::new(42);
        assert_eq!(g.next_u64(), 0xBDD732262FEB6E95);
        assert_eq!(g.next_u64(), 0x28EFE333B266F103);

        let mut g = SplitMix64::new(0x0123456789ABCDEF);
        assert_eq!(g.next_u64(), 0x157A3807A48FAA9D);
    }

    #[test]
    fn golden_uniforms() {
        let mut g = SplitMix64::new(7);
        let want = [
            0.3898297483912715,
            0.01678829452815611,
            0.9007606806068834,
            0.5829302930280781,
        ];
        for w in want {
            assert_eq!(g.next_f64(), w);
        }
    }

    #[test]
    fn uniform_range_and_determinism() {
        let mut a = SplitMix64::new(123);
        let mut b = SplitMix64::new(123);
        for _ in 0..1000 {
            let x = a.next_f64();
            assert!((0.0..1.0).contains(&x));
            assert_eq!(x, b.next_f64());
        }
    }

    #[test]
    fn normals_are_finite_and_roughly_centered() {
        let mut g = SplitMix64::new(9);
        let n = 20_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let z = g.next_normal();
            assert!(z.is_finite());
            sum += z;
            sumsq += z * z;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.03, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn streams_differ_and_are_stable() {
        let mut s0 = SplitMix64::stream(5, 0);
        let mut s1 = SplitMix64::stream(5, 1);
        assert_ne!(s0.next_u64(), s1.next_u64());
        let mut again = SplitMix64::stream(5, 0);
        let mut s0b = SplitMix64::stream(5, 0);
        assert_eq!(again.next_u64(), s0b.next_u64());
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut g = SplitMix64::new(77);
        let mut v: Vec<usize> = (0..50).collect();
        g.shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_ne!(v, (0..50).collect::<Vec<_>>());
    }
}
