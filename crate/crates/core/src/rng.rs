//! Named, splittable random streams.
//!
//! Every chain, replicate and generator draws from its own ChaCha8 stream.
//! A stream is identified by the master seed plus a path of child indices,
//! so any single replicate can be regenerated without replaying the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The concrete generator used throughout the crate.
pub type StreamRng = ChaCha8Rng;

/// Identifies one random stream: a master seed and a derived stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seeder {
    pub master: u64,
    pub stream: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seeder {
    pub fn new(master: u64) -> Self {
        Self { master, stream: 0 }
    }

    /// Derive the `index`-th child stream. Children of distinct parents or
    /// distinct indices land on distinct streams with overwhelming probability.
    pub fn child(&self, index: u64) -> Self {
        Self {
            master: self.master,
            stream: splitmix(self.stream ^ splitmix(index.wrapping_add(1))),
        }
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible() {
        let s = Seeder::new(42).child(3).child(1);
        let a: Vec<u64> = (0..8).map({
            let mut r = s.rng();
            move |_| r.random()
        }).collect();
        let mut r = Seeder::new(42).child(3).child(1).rng();
        let b: Vec<u64> = (0..8).map(|_| r.random()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn sibling_streams_differ() {
        let root = Seeder::new(7);
        let x: u64 = root.child(0).rng().random();
        let y: u64 = root.child(1).rng().random();
        let z: u64 = root.child(0).child(0).rng().random();
        assert_ne!(x, y);
        assert_ne!(x, z);
    }
}
