//! Falling-factorial arithmetic and coloring probabilities.
//!
//! Everything downstream reduces to ratios of falling powers
//! `a^(r) = a·(a-1)···(a-r+1)`. Ratios are evaluated as products of
//! per-factor quotients, never as quotients of two huge products, so they
//! stay in range even when `r` runs into the tens of thousands.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// Exact falling power `a^(r) = a·(a-1)···(a-r+1)`.
///
/// Empty product for `r = 0`; zero whenever `r > a`.
pub fn falling_power(a: u64, r: u64) -> BigUint {
    if r > a {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for k in 0..r {
        acc *= a - k;
    }
    acc
}

/// Exact binomial coefficient as a big integer.
pub fn binomial(t: u64, h: u64) -> BigUint {
    if h > t {
        return BigUint::zero();
    }
    let h = h.min(t - h);
    // t^(h) / h! divides exactly.
    falling_power(t, h) / falling_power(h, h)
}

/// Ratio of falling powers `a^(r) / c^(r)` for `a <= c`, as a product of
/// per-factor quotients `(a-k)/(c-k)`. Each factor lies in [0, 1], so the
/// result never overflows regardless of `r`. Returns 0 when `r > a`.
///
/// Panics if `a > c`: such ratios exceed 1 and are never needed here.
///
/// ```
/// use homophily::combinatorics::falling_ratio;
///
/// // 3*2 / (7*6): both endpoints of a pair land in a class of 3 among 7.
/// assert!((falling_ratio(3, 7, 2) - 1.0 / 7.0).abs() < 1e-15);
/// // Asking for more nodes than the class holds is impossible, not tiny.
/// assert_eq!(falling_ratio(3, 7, 4), 0.0);
/// ```
pub fn falling_ratio(a: u64, c: u64, r: u64) -> f64 {
    assert!(a <= c, "falling_ratio requires a <= c (got a={a}, c={c})");
    if r > a {
        return 0.0;
    }
    let mut acc = 1.0;
    for k in 0..r {
        acc *= (a - k) as f64 / (c - k) as f64;
    }
    debug_assert!((0.0..=1.0).contains(&acc));
    acc
}

/// Converts an exact nonnegative rational `num/den <= 1` to the nearest
/// representable f64, by scaling the quotient to a 64-bit window first.
/// Exact big-integer division keeps the relative error at the rounding level
/// even when both operands are thousands of bits wide.
pub(crate) fn ratio_le_one_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    assert!(!den.is_zero(), "denominator must be nonzero");
    if num.is_zero() {
        return 0.0;
    }
    debug_assert!(num <= den);
    let shift = (den.bits() + 64).saturating_sub(num.bits());
    let scaled = (num << shift) / den;
    let scaled = scaled
        .to_u128()
        .expect("scaled quotient fits in 128 bits by construction");
    if shift <= 1074 {
        (scaled as f64) * (2f64).powi(-(shift as i32))
    } else {
        // Below the subnormal range; the nearest f64 is zero.
        0.0
    }
}

/// Probability that a size-`t` set contains exactly `h` nodes of a class of
/// size `k`, when `n` nodes are colored uniformly with fixed class sizes:
/// `C(t,h) · k^(h) · (n-k)^(t-h) / n^(t)`.
///
/// Evaluated exactly in big integers and rounded once at the end.
pub fn hypergeom_pmf(n: u64, k: u64, t: u64, h: u64) -> f64 {
    assert!(h <= t && t <= n, "need h <= t <= n (got n={n}, t={t}, h={h})");
    assert!(k <= n, "class size k={k} exceeds n={n}");
    if h > k || t - h > n - k {
        return 0.0;
    }
    let num = binomial(t, h) * falling_power(k, h) * falling_power(n - k, t - h);
    let den = falling_power(n, t);
    ratio_le_one_to_f64(&num, &den)
}

/// Natural log of the multinomial coefficient `n! / (c_1!···c_s!)`: the
/// number of distinct colorings with the given class sizes.
///
/// Panics if the parts do not sum to `n`.
pub fn log_multinomial(n: u64, parts: &[u64]) -> f64 {
    let total: u64 = parts.iter().sum();
    assert!(total == n, "class sizes sum to {total}, expected n={n}");
    let lg = |x: u64| statrs::function::gamma::ln_gamma(x as f64 + 1.0);
    lg(n) - parts.iter().map(|&c| lg(c)).sum::<f64>()
}

/// Probability that, under a uniform coloring with a class of size `k`
/// among `n` nodes, `a` specified nodes all land in the class while `b`
/// other specified nodes all stay out:
/// `k^(a)/n^(a) · (n-k)^(b)/(n-a)^(b)`.
///
/// Factored into falling ratios; every factor is a probability, so the
/// value never leaves [0, 1].
pub fn fill_avoid_prob(n: u64, k: u64, a: u64, b: u64) -> f64 {
    assert!(k <= n, "class size k={k} exceeds n={n}");
    assert!(a + b <= n, "constraint sets exceed n");
    if a > k || b > n - k {
        return 0.0;
    }
    // Place the class members one at a time: first the a forced hits, then
    // b forced misses among the n-a remaining positions.
    falling_ratio(k, n, a) * falling_ratio(n - k, n - a, b)
}

/// Probability that `a` specified nodes all take color `i` and `a2` other
/// specified nodes all take color `j != i`:
/// `c_i^(a) · c_j^(a2) / n^(a + a2)`.
pub fn two_class_fill_prob(n: u64, c_i: u64, c_j: u64, a: u64, a2: u64) -> f64 {
    assert!(c_i + c_j <= n, "class sizes exceed n");
    // Covers a + a2 > n too: that forces a > c_i or a2 > c_j here.
    if a > c_i || a2 > c_j {
        return 0.0;
    }
    // Sequential placement: color-i hits first, then color-j hits among the
    // remaining slots. c_j^(a2)/(n-a)^(a2) is a valid ratio since
    // c_j <= n - c_i <= n - a.
    falling_ratio(c_i, n, a) * falling_ratio(c_j, n - a, a2)
}

/// Closed form for the joint two-color fill/avoid event on disjoint node
/// sets: `a` nodes take color `i`, `b` others avoid `i`, `a2` take color
/// `j != i`, `b2` others avoid `j`, with `overlap` counting the avoid-`j`
/// nodes that are also fill-`i` nodes:
///
/// `[c_i^(a)·(n-c_i)^(b)/n^(a+b)] · [c_j^(a2)·(n-c_i-c_j)^(b2-overlap)/(n-c_i)^(a2+b2-overlap)]`
///
/// The second factor prices the avoid-`j` constraint as if exactly
/// `overlap` of those nodes wear color `i`, so the product equals the
/// event probability exactly when no other avoid-`j` node can receive
/// color `i`: either each of them doubles as a fill-`i` node, or
/// `a = c_i` exhausts the class. Every event the moment formulas need is
/// of that shape (the two wrappers above are the common special cases);
/// outside it the value is only the first-order approximation.
#[allow(clippy::too_many_arguments)]
pub fn joint_color_prob(
    n: u64,
    c_i: u64,
    c_j: u64,
    a: u64,
    b: u64,
    a2: u64,
    b2: u64,
    overlap: u64,
) -> f64 {
    assert!(c_i + c_j <= n, "class sizes exceed n");
    assert!(
        overlap <= b2 && overlap <= a,
        "overlap {overlap} exceeds min(b2={b2}, a={a})"
    );
    if a > c_i || b > n - c_i || a2 > c_j || b2 - overlap > n - c_i - c_j {
        return 0.0;
    }
    // After the guards every ratio argument satisfies its a <= c
    // precondition: a <= c_i, a2 <= c_j, c_j <= n - c_i.
    let color_i = falling_ratio(c_i, n, a) * falling_ratio(n - c_i, n - a, b);
    let color_j = falling_ratio(c_j, n - c_i, a2)
        * falling_ratio(n - c_i - c_j, n - c_i - a2, b2 - overlap);
    color_i * color_j
}
