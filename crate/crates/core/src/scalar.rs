//! Exact coefficient arithmetic.
//!
//! Every coefficient in the kernel is a [`Scalar`], currently an arbitrary
//! precision rational. All other modules only use the ring/field operations
//! and the helpers in this module, so switching to Gaussian rationals (or any
//! other exact field of characteristic zero) only touches this file.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Coefficient field of the kernel.
pub type Scalar = BigRational;

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

/// `num / den` in lowest terms. Panics if `den == 0`.
pub fn ratio(num: i64, den: i64) -> Scalar {
    Scalar::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Scalar {
    Scalar::zero()
}

pub fn one() -> Scalar {
    Scalar::one()
}

/// `(-1)^k` as a scalar.
pub fn sign(k: u64) -> Scalar {
    if k.is_multiple_of(2) {
        one()
    } else {
        -one()
    }
}

pub fn factorial(n: u32) -> Scalar {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    Scalar::from_integer(acc)
}

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u32, k: u32) -> Scalar {
    if k > n {
        return zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    Scalar::from_integer(acc)
}

/// Falling factorial `n (n-1) ... (n-k+1)`.
pub fn falling(n: u32, k: u32) -> Scalar {
    if k > n {
        return zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
    }
    Scalar::from_integer(acc)
}

/// Canonical surface form: `3`, `-3/2`.
pub fn format_scalar(q: &Scalar) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn is_integer(q: &Scalar) -> bool {
    q.denom().is_one()
}

pub fn abs(q: &Scalar) -> Scalar {
    q.abs()
}
