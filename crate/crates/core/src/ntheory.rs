//! Divisor matrix, its cancellation weights, and square-free counting.
//!
//! The weight vector `alpha` solving `M alpha = e_0` for the divisor matrix
//! `M_ij = [j | i]` is the Möbius function. It is computed two ways: by
//! forward substitution over the matrix (the reference route) and by a
//! smallest-prime-factor sieve (the closed form). All arithmetic is integer.

use std::f64::consts::PI;

use serde::Serialize;

/// Square-free density `6 / pi^2`.
pub fn square_free_density() -> f64 {
    6.0 / (PI * PI)
}

/// Lower-triangular 0/1 matrix with `M[i][j] = 1` iff `j` divides `i` (1-based).
/// Entries are computed on demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivisorMatrix {
    order: usize,
}

impl DivisorMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Entry at 1-based `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> u8 {
        assert!((1..=self.order).contains(&i) && (1..=self.order).contains(&j), "index out of range");
        u8::from(i % j == 0)
    }

    /// Rows as 0/1 vectors. Only sensible for small orders.
    pub fn rows(&self) -> Vec<Vec<u8>> {
        (1..=self.order).map(|i| (1..=self.order).map(|j| self.get(i, j)).collect()).collect()
    }

    /// `M x`, streamed column by column over the nonzero entries.
    pub fn mul_vec(&self, x: &[i64]) -> Vec<i64> {
        assert_eq!(x.len(), self.order, "vector length must equal matrix order");
        let mut y = vec![0i64; self.order];
        for j in 1..=self.order {
            let xj = x[j - 1];
            if xj == 0 {
                continue;
            }
            for i in (j..=self.order).step_by(j) {
                y[i - 1] += xj;
            }
        }
        y
    }

    /// Whether `M x = e_0` holds exactly.
    pub fn solves_unit(&self, x: &[i64]) -> bool {
        self.mul_vec(x).iter().enumerate().all(|(i, &v)| v == i64::from(i == 0))
    }
}

pub fn divisor_matrix(order: usize) -> DivisorMatrix {
    assert!(order >= 1, "divisor matrix order must be at least 1");
    DivisorMatrix { order }
}

/// Weight factors `alpha_1..alpha_N`, each in `{-1, 0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct AlphaVector(Vec<i8>);

impl AlphaVector {
    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// 1-based access.
    pub fn get(&self, n: usize) -> i8 {
        self.0[n - 1]
    }

    pub fn as_i64(&self) -> Vec<i64> {
        self.0.iter().map(|&a| i64::from(a)).collect()
    }

    /// 1-based indices with a nonzero weight, i.e. the square-free numbers.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &a)| a != 0).map(|(i, _)| i + 1)
    }

    pub fn nonzeros(&self) -> usize {
        self.0.iter().filter(|&&a| a != 0).count()
    }
}

/// Solves `M alpha = e_0` by forward substitution over the divisor matrix.
/// Each solved `alpha_j` is pushed down its column into the right-hand side.
pub fn solve_alpha_substitution(order: usize) -> AlphaVector {
    assert!(order >= 1);
    let mut rhs = vec![0i64; order];
    rhs[0] = 1;
    let mut alpha = Vec::with_capacity(order);
    for j in 1..=order {
        // unit diagonal
        let aj = rhs[j - 1];
        alpha.push(i8::try_from(aj).expect("weight factor fits in i8"));
        for i in (2 * j..=order).step_by(j) {
            rhs[i - 1] -= aj;
        }
    }
    AlphaVector(alpha)
}

/// Smallest prime factor of every integer up to `limit` (`spf[0] = spf[1] = 0`).
fn smallest_prime_factors(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=limit {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let p_i = spf[i];
        for &p in &primes {
            let m = p as usize * i;
            if p > p_i || m > limit {
                break;
            }
            spf[m] = p;
        }
    }
    spf
}

/// Closed form: `alpha_n = 0` if a prime divides `n` twice, otherwise
/// `(-1)^(number of distinct prime factors)`.
pub fn mobius_alpha(order: usize) -> AlphaVector {
    assert!(order >= 1);
    let spf = smallest_prime_factors(order);
    let mut mu = vec![0i8; order + 1];
    mu[1] = 1;
    for n in 2..=order {
        let p = spf[n] as usize;
        let rest = n / p;
        mu[n] = if rest % p == 0 { 0 } else { -mu[rest] };
    }
    mu.remove(0);
    AlphaVector(mu)
}

/// `eta(n)` for every `n` in `0..=limit`.
pub fn eta_table(limit: usize) -> Vec<u64> {
    let mut table = vec![0u64; limit + 1];
    if limit == 0 {
        return table;
    }
    let alpha = mobius_alpha(limit);
    for n in 1..=limit {
        table[n] = table[n - 1] + u64::from(alpha.get(n) != 0);
    }
    table
}

/// Count of square-free integers in `[1, n]`.
pub fn eta(n: usize) -> u64 {
    eta_table(n)[n]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: u64,
    pub eta: u64,
    /// `n - eta`; the trivial bound holds when nonnegative.
    pub trivial_slack: i64,
    pub trivial_holds: bool,
    /// `(6/pi^2) n + sqrt(n) - eta`.
    pub loose_slack: f64,
    pub loose_holds: bool,
    /// `(6/pi^2) n + sqrt(n)/2 - eta`, only evaluated for `n >= 8`.
    pub tight_slack: Option<f64>,
    pub tight_holds: Option<bool>,
}

impl BoundReport {
    pub fn all_hold(&self) -> bool {
        self.trivial_holds && self.loose_holds && self.tight_holds.unwrap_or(true)
    }
}

/// Evaluates the three square-free counting bounds for a known `eta(n)`.
pub fn eta_bounds_for(n: u64, eta: u64) -> BoundReport {
    let nf = n as f64;
    let base = square_free_density() * nf;
    let loose = base + nf.sqrt() - eta as f64;
    let tight = (n >= 8).then(|| base + 0.5 * nf.sqrt() - eta as f64);
    BoundReport {
        n,
        eta,
        trivial_slack: n as i64 - eta as i64,
        trivial_holds: eta <= n,
        loose_slack: loose,
        loose_holds: loose > 0.0,
        tight_slack: tight,
        tight_holds: tight.map(|s| s > 0.0),
    }
}

pub fn check_eta_bounds(n: usize) -> BoundReport {
    assert!(n >= 1);
    eta_bounds_for(n as u64, eta(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Counts square-free numbers by trial division; shares no code with the sieve.
    fn square_free_by_trial(n: u64) -> bool {
        let mut d = 2;
        while d * d <= n {
            if n % (d * d) == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn order_six_matrix() {
        let m = divisor_matrix(6);
        let expected: Vec<Vec<u8>> = ["100000", "110000", "101000", "110100", "100010", "111001"]
            .iter()
            .map(|r| r.bytes().map(|b| b - b'0').collect())
            .collect();
        assert_eq!(m.rows(), expected);
    }

    #[test]
    fn small_matrices() {
        assert_eq!(divisor_matrix(1).rows(), vec![vec![1]]);
        assert_eq!(divisor_matrix(4).rows()[3], vec![1, 1, 0, 1]);
        let big = divisor_matrix(4097);
        assert_eq!(big.get(4097, 17), 1);
        assert_eq!(big.get(4097, 3), 0);
    }

    #[test]
    fn substitution_examples() {
        assert_eq!(solve_alpha_substitution(1).values(), &[1]);
        assert_eq!(solve_alpha_substitution(6).values(), &[1, -1, -1, 0, -1, 1]);
        assert_eq!(solve_alpha_substitution(10).values(), &[1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
    }

    #[test]
    fn closed_form_examples() {
        let a = mobius_alpha(30);
        assert_eq!(&a.values()[..6], &[1, -1, -1, 0, -1, 1]);
        assert_eq!(a.get(4), 0);
        assert_eq!(a.get(30), -1);
        assert_eq!(a, solve_alpha_substitution(30));
    }

    #[test]
    fn eta_examples() {
        assert_eq!(eta(0), 0);
        assert_eq!(eta(1), 1);
        assert_eq!(eta(6), 5);
        assert_eq!(eta(8), 6);
        assert_eq!(eta(100), 61);
        let trial = (1..=100).filter(|&n| square_free_by_trial(n)).count() as u64;
        assert_eq!(trial, 61);
    }

    #[test]
    fn bound_examples() {
        let one = check_eta_bounds(1);
        assert!(one.all_hold());
        assert_eq!(one.tight_holds, None);
        let eight = check_eta_bounds(8);
        assert_eq!(eight.eta, 6);
        assert!(eight.tight_holds.unwrap());
        assert!((eight.tight_slack.unwrap() - (square_free_density() * 8.0 + 0.5 * 8f64.sqrt() - 6.0)).abs() < 1e-12);
        let big = check_eta_bounds(100_000);
        assert!(big.all_hold());
        let ratio = big.eta as f64 / 1e5;
        assert!((0.60..=0.62).contains(&ratio));
    }

    proptest! {
        #[test]
        fn routes_agree_and_solve(n in 1usize..600) {
            let alpha = mobius_alpha(n);
            prop_assert_eq!(&alpha, &solve_alpha_substitution(n));
            prop_assert!(divisor_matrix(n).solves_unit(&alpha.as_i64()));
            prop_assert_eq!(alpha.nonzeros() as u64, eta(n));
        }

        #[test]
        fn support_is_square_free(n in 1u64..5000) {
            let alpha = mobius_alpha(n as usize);
            prop_assert_eq!(alpha.get(n as usize) != 0, square_free_by_trial(n));
        }
    }
}
