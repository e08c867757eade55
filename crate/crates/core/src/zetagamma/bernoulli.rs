//! Exact Bernoulli numbers from tangent numbers, cached per process.

use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

static TABLE: RwLock<Option<Arc<Vec<BigRational>>>> = RwLock::new(None);

/// Tangent numbers T_1..T_n (1, 2, 16, 272, ...).
fn tangent_numbers(n: usize) -> Vec<BigInt> {
    let mut t = vec![BigInt::zero(); n + 1];
    if n == 0 {
        return t;
    }
    t[1] = BigInt::one();
    for k in 2..=n {
        t[k] = &t[k - 1] * (k - 1);
    }
    for k in 2..=n {
        for j in k..=n {
            t[j] = &t[j - 1] * (j - k) + &t[j] * (j - k + 2);
        }
    }
    t
}

fn compute(m: usize) -> Vec<BigRational> {
    let t = tangent_numbers(m);
    let mut out = Vec::with_capacity(m + 1);
    out.push(BigRational::one());
    for k in 1..=m {
        let four_k = BigInt::one() << (2 * k);
        let num = BigInt::from(2 * k) * &t[k];
        let den = &four_k * (&four_k - 1u32);
        let b = BigRational::new(num, den);
        out.push(if k % 2 == 0 { -b } else { b });
    }
    out
}

/// `B_0, B_2, ..., B_{2m}` (index k holds `B_{2k}`).
pub fn even_bernoulli(m: usize) -> Arc<Vec<BigRational>> {
    if let Some(t) = TABLE.read().expect("bernoulli cache poisoned").as_ref() {
        if t.len() > m {
            return t.clone();
        }
    }
    let mut guard = TABLE.write().expect("bernoulli cache poisoned");
    if let Some(t) = guard.as_ref() {
        if t.len() > m {
            return t.clone();
        }
    }
    let size = (m + 1).next_power_of_two().max(64);
    let t = Arc::new(compute(size));
    *guard = Some(t.clone());
    t
}

/// `B_n` with the convention `B_1 = -1/2`.
pub fn bernoulli(n: usize) -> BigRational {
    match n {
        0 => BigRational::one(),
        1 => BigRational::new((-1).into(), 2.into()),
        n if n % 2 == 1 => BigRational::zero(),
        n => even_bernoulli(n / 2)[n / 2].clone(),
    }
}
