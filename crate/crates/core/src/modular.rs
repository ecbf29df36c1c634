//! Level-one modular form dimensions and the expected genus-one table.

use std::collections::BTreeMap;

/// `(dim S_k, dim Eis_k)` for the full modular group.
pub fn modular_dims(k: i64) -> (u64, u64) {
    if k < 4 || k % 2 != 0 {
        return (0, 0);
    }
    let m = (k / 12) as u64 + if k % 12 == 2 { 0 } else { 1 };
    (m - 1, 1)
}

/// Expected genus-one cohomology for parameter `d` on degrees `lo..=hi`:
/// `2 dim S_{n+1} + dim Eis_{n+1}` in degree `2(n+d) - 1` for `n >= 3`, plus
/// one class in degree `2 + 2d`.
pub fn calc1_expectation(d: i64, lo: i64, hi: i64) -> BTreeMap<i64, u64> {
    let mut out: BTreeMap<i64, u64> = (lo..=hi).map(|k| (k, 0)).collect();
    if let Some(v) = out.get_mut(&(2 + 2 * d)) {
        *v += 1;
    }
    // 2(n+d)-1 grows with n, so stop once past the window
    let mut n = 3;
    while 2 * (n + d) - 1 <= hi {
        let deg = 2 * (n + d) - 1;
        if let Some(v) = out.get_mut(&deg) {
            let (s, e) = modular_dims(n + 1);
            *v += 2 * s + e;
        }
        n += 1;
    }
    out
}
