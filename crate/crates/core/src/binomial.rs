use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Exact `C(n, k)`; zero when `k < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> BigUint {
    if k < 0 || n < 0 || k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    let mut acc = BigUint::one();
    for j in 0..k {
        // acc = C(n, j) before, C(n, j+1) after; each division is exact
        acc *= n - j;
        acc /= j + 1;
    }
    acc
}

/// Row `C(m, 0..=top)`, zeros past `m`.
pub fn binomial_row(m: u64, top: u64) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(top as usize + 1);
    let mut c = BigUint::one();
    for j in 0..=top {
        if j > m {
            row.push(BigUint::zero());
            continue;
        }
        row.push(c.clone());
        c *= m - j;
        c /= j + 1;
    }
    row
}

/// Sperner's bound `C(n, ⌊n/2⌋)`.
pub fn central_binomial(n: u64) -> BigUint {
    binomial(n as i64, (n / 2) as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_values() {
        assert_eq!(binomial(5, 0), BigUint::one());
        assert_eq!(binomial(0, 0), BigUint::one());
        assert_eq!(binomial(5, 6), BigUint::zero());
        assert_eq!(binomial(5, -1), BigUint::zero());
        assert_eq!(binomial(40, 20), BigUint::from(137_846_528_820u64));
        assert_eq!(central_binomial(3), BigUint::from(3u32));
    }

    #[test]
    fn pascal_rule_and_rows() {
        for n in 1..60i64 {
            for k in 0..=n + 1 {
                assert_eq!(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k));
            }
            let row = binomial_row(n as u64, n as u64 + 2);
            for (k, c) in row.iter().enumerate() {
                assert_eq!(*c, binomial(n, k as i64));
            }
        }
    }
}
