//! SplitMix64 mixing for reproducible pseudo-random function values.
//!
//! Test functions must evaluate identically across runs, platforms, and
//! worker counts, so values are derived statelessly: each prime ideal's
//! value is a hash of (seed, norm, kind), not a draw from a shared stream.

/// The SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Combines a seed with a prime ideal's identity into one word.
pub fn mix_key(seed: u64, norm: u64, kind_code: u8) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(norm)) ^ kind_code as u64)
}

/// Uniform f64 in [0, 1) from one word.
pub fn unit_f64(word: u64) -> f64 {
    (word >> 11) as f64 / (1u64 << 53) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        assert_eq!(splitmix64(0), 0xe220a8397b1dcdaf);
        assert_eq!(splitmix64(1), 0x910a2dec89025cc1);
        assert_eq!(splitmix64(2), 0x975835de1c9756ce);
    }

    #[test]
    fn unit_range() {
        for i in 0..1000 {
            let u = unit_f64(splitmix64(i));
            assert!((0.0..1.0).contains(&u));
        }
    }
}
