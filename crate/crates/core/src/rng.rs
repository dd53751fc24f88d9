//! Seeded random numbers with a pinned, portable algorithm.
//!
//! Random initial conditions must reproduce bit-for-bit across runs and
//! across implementations in other languages, so the generator is pinned
//! to SplitMix64 (Steele, Lea, Flood 2014) rather than to whatever a rand
//! crate version happens to ship. The full algorithm: the 64-bit state
//! advances by the increment `0x9E3779B97F4A7C15` per draw, and the output
//! stage is
//!
//! ```text
//! z  = state
//! z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
//! z ^= z >> 27;  z *= 0x94D049BB133111EB
//! z ^= z >> 31
//! ```
//!
//! Uniform doubles in `[0, 1)` take the top 53 bits of the output scaled
//! by 2^-53.

/// SplitMix64 stream seeded with a 64-bit value.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
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

    /// Uniform draw in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[-amplitude, amplitude]`.
    pub fn next_symmetric(&mut self, amplitude: f64) -> f64 {
        amplitude * (2.0 * self.next_f64() - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_sequence() {
        // First outputs for seed 0, cross-checked against the published
        // reference implementation.
        let mut rng = SplitMix64::new(0);
        assert_eq!(rng.next_u64(), 0xe220_a839_7b1d_cdaf);
        assert_eq!(rng.next_u64(), 0x6e78_9e6a_a1b9_65f4);
        assert_eq!(rng.next_u64(), 0x06c4_5d18_8009_454f);

        let mut rng = SplitMix64::new(1234567);
        assert_eq!(rng.next_u64(), 0x599e_d017_fb08_fc85);
        assert_eq!(rng.next_u64(), 0x2c73_f084_5854_0fa5);
    }

    #[test]
    fn same_seed_same_stream() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn doubles_in_unit_interval() {
        let mut rng = SplitMix64::new(7);
        for _ in 0..1000 {
            let x = rng.next_f64();
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn symmetric_within_amplitude() {
        let mut rng = SplitMix64::new(99);
        for _ in 0..1000 {
            let x = rng.next_symmetric(0.05);
            assert!(x.abs() <= 0.05);
        }
    }
}
