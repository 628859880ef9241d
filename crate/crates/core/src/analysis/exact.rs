use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// `C(n, k)` in exact integer arithmetic; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Probability that a uniform `k`-subset of `n` nodes contains a fixed set
/// of `s` nodes: `C(n - s, k - s) / C(n, k)`.
pub fn containment_probability(n: u64, k: u64, s: u64) -> BigRational {
    if s > k || k > n {
        return BigRational::zero();
    }
    ratio(binomial(n - s, k - s), binomial(n, k))
}

pub fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("probabilities are finite")
}
