use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tag for limit-simulation replicates.
pub const SIMULATION_DOMAIN: u64 = 0x5349_4d55;
/// Domain tag for synthetic data sets.
pub const DATA_DOMAIN: u64 = 0x4441_5441;

/// Counter-based random streams: replicate `i` always sees the ChaCha stream
/// `i` under a key derived from `(seed, domain)`, independent of scheduling.
#[derive(Debug, Clone)]
pub struct ReplicateStreams {
    key: [u8; 32],
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl ReplicateStreams {
    pub fn new(seed: u64, domain: u64) -> Self {
        let mut state = seed ^ domain.rotate_left(32);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        Self { key }
    }

    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);
        rng
    }
}
