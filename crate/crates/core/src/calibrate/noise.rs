use rand::Rng;

use crate::matrix::AttributeMatrix;
use crate::rng;

const NOISE_STREAM: u64 = 0x4E_01_5E;

/// `m` attributes with i.i.d. uniform ±1 entries over `n_images` images.
/// Returns `None` for `m = 0` (the empty noise set) or `n_images = 0`.
pub fn gen_noise(n_images: usize, m: usize, seed: u64) -> Option<AttributeMatrix> {
    if m == 0 || n_images == 0 {
        return None;
    }
    let mut rng = rng::stream(seed, &[NOISE_STREAM]);
    let data = (0..n_images * m)
        .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
        .collect();
    Some(AttributeMatrix::from_column_major_unchecked(n_images, m, data))
}
