use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::volume::Dims;

/// Uniformly draws the origin of a `patch`-sized window inside `dims` that
/// `admissible` accepts, by rejection with at most `max_attempts` draws.
pub fn sample_patch(
    dims: Dims,
    patch: Dims,
    admissible: impl Fn([usize; 3]) -> bool,
    seed: u64,
    max_attempts: usize,
) -> Result<[usize; 3]> {
    if patch.iter().zip(&dims).any(|(p, d)| *p == 0 || p > d) {
        return Err(Error::InvalidArgument(format!("patch {patch:?} does not fit in {dims:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..max_attempts {
        let origin = [0, 1, 2].map(|a| rng.random_range(0..=dims[a] - patch[a]));
        if admissible(origin) {
            return Ok(origin);
        }
    }
    Err(Error::NoAdmissiblePatch(max_attempts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn respects_predicate_and_seed() {
        let pred = |o: [usize; 3]| o[0] >= 100;
        let a = sample_patch([256, 256, 256], [128; 3], pred, 5, 1000).unwrap();
        assert!(a[0] >= 100 && a.iter().all(|&c| c <= 128));
        assert_eq!(a, sample_patch([256, 256, 256], [128; 3], pred, 5, 1000).unwrap());
        assert!(matches!(
            sample_patch([4, 4, 4], [2; 3], |_| false, 1, 10),
            Err(Error::NoAdmissiblePatch(10))
        ));
    }
}
