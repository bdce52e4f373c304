use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream of one trajectory: the ChaCha8 keystream keyed by the
/// master seed, with the trajectory index as the stream number. Streams of
/// different indices are disjoint and each is reproducible on its own.
pub fn derive_stream(master_seed: u64, trajectory: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trajectory);
    rng
}
