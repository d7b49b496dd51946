/// Least-squares nondecreasing fit by pool-adjacent-violators (equal weights).
pub fn isotonic_fit(y: &[f64]) -> Vec<f64> {
    // Blocks of (sum, count), merged while the last two are out of order.
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(y.len());
    for &v in y {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (s1, c1) = blocks[blocks.len() - 1];
            let (s0, c0) = blocks[blocks.len() - 2];
            if s0 / c0 as f64 <= s1 / c1 as f64 {
                break;
            }
            blocks.pop();
            *blocks.last_mut().unwrap() = (s0 + s1, c0 + c1);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(s, c)| std::iter::repeat_n(s / c as f64, c))
        .collect()
}

/// Isotonic fit with the first value held fixed: `out[0] = y[0]` and the
/// remainder is the isotonic fit of `y[1..]` bounded below by `y[0]`.
pub fn anchored_isotonic_fit(y: &[f64]) -> Vec<f64> {
    let Some((&first, rest)) = y.split_first() else {
        return Vec::new();
    };
    let mut out = Vec::with_capacity(y.len());
    out.push(first);
    out.extend(isotonic_fit(rest).into_iter().map(|v| v.max(first)));
    out
}
