//! Per-purpose random streams derived from one experiment seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Purpose {
    Init,
    Exploration,
    Smoothing,
    StartPose,
    ObstaclePhase,
}

impl Purpose {
    fn stream_id(self) -> u64 {
        match self {
            Purpose::Init => 1,
            Purpose::Exploration => 2,
            Purpose::Smoothing => 3,
            Purpose::StartPose => 4,
            Purpose::ObstaclePhase => 5,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for `(seed, purpose, index)`. `index` separates
/// trials or episodes that need their own stream.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let key = splitmix64(seed ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(purpose.stream_id());
    rng
}
