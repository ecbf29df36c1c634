/// Sign of a permutation given as an image array.
pub fn sign<T: Copy + Into<usize>>(perm: &[T]) -> i8 {
    let mut seen = vec![false; perm.len()];
    let mut parity = 0usize;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i].into();
            len += 1;
        }
        parity += len - 1;
    }
    if parity.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Inverse of a permutation given as an image array.
pub fn inverse<T: Copy + Into<usize> + TryFrom<usize>>(perm: &[T]) -> Vec<T>
where
    <T as TryFrom<usize>>::Error: std::fmt::Debug,
{
    let mut inv: Vec<T> = perm.to_vec();
    for (i, &x) in perm.iter().enumerate() {
        inv[x.into()] = T::try_from(i).unwrap();
    }
    inv
}

/// True when `perm` is a bijection of `0..perm.len()`.
pub fn is_permutation<T: Copy + Into<usize>>(perm: &[T]) -> bool {
    let mut seen = vec![false; perm.len()];
    for &x in perm {
        let x: usize = x.into();
        if x >= perm.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signs() {
        assert_eq!(sign::<usize>(&[]), 1);
        assert_eq!(sign(&[0usize, 1, 2]), 1);
        assert_eq!(sign(&[1usize, 0, 2]), -1);
        assert_eq!(sign(&[1usize, 2, 0]), 1);
        assert_eq!(sign(&[1u8, 2, 3, 0]), -1);
        assert_eq!(inverse(&[2u8, 0, 1]), vec![1, 2, 0]);
    }
}
