//! Prime fields F_q: primitive roots, discrete logarithms, multiplicative and
//! additive characters, Gauss sums and their angles.
//!
//! All character arithmetic is pinned to the smallest primitive root g of q.
//! The character of index j is χ_j(g^m) = e(jm/(q-1)), so indices add under
//! multiplication of characters and χ_{-j} is the conjugate of χ_j. Root-of-
//! unity values are read from tables built once per context.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex;

use crate::{Error, Result, C64};

/// Default cap on q: the discrete-log table is O(q) memory.
pub const DEFAULT_TABLE_BOUND: u64 = 2_000_000;

/// A prime q together with its smallest primitive root, the full
/// discrete-log table and precomputed root-of-unity tables.
///
/// Immutable after construction; wrap in [`Arc`] and share freely.
#[derive(Debug)]
pub struct FieldContext {
    q: u64,
    g: u64,
    /// dlog[x] = m with g^m = x, for x in 1..q. Entry 0 is a sentinel.
    dlog: Vec<u32>,
    /// pow_g[m] = g^m mod q for m in 0..q-1.
    pow_g: Vec<u64>,
    /// e(j/q) for j in 0..q.
    e_q: Vec<C64>,
    /// e(j/(q-1)) for j in 0..q-1.
    e_ord: Vec<C64>,
}

impl FieldContext {
    /// Builds the context for a prime q >= 3 under the default table bound.
    pub fn new(q: u64) -> Result<Arc<Self>> {
        Self::with_bound(q, DEFAULT_TABLE_BOUND)
    }

    /// Builds the context with an explicit table bound.
    pub fn with_bound(q: u64, bound: u64) -> Result<Arc<Self>> {
        if q > bound {
            return Err(Error::TooLarge { q, bound });
        }
        if q < 3 || !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        let g = smallest_primitive_root(q);
        let ord = q - 1;
        let mut dlog = vec![u32::MAX; q as usize];
        let mut pow_g = vec![0u64; ord as usize];
        let mut x = 1u64;
        for m in 0..ord {
            pow_g[m as usize] = x;
            dlog[x as usize] = m as u32;
            x = x * g % q;
        }
        debug_assert_eq!(x, 1, "g must have order q-1");
        let e_q = roots_of_unity(q);
        let e_ord = roots_of_unity(ord);
        Ok(Arc::new(FieldContext {
            q,
            g,
            dlog,
            pow_g,
            e_q,
            e_ord,
        }))
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Order of the unit group, q - 1.
    pub fn ord(&self) -> u64 {
        self.q - 1
    }

    /// The smallest primitive root mod q.
    pub fn generator(&self) -> u64 {
        self.g
    }

    /// Discrete log of a unit x: the m with g^m = x.
    pub fn dlog(&self, x: u64) -> u64 {
        debug_assert!(x >= 1 && x < self.q, "dlog of non-unit {x}");
        self.dlog[x as usize] as u64
    }

    /// g^m mod q for m in 0..q-1.
    pub fn pow_g(&self, m: u64) -> u64 {
        self.pow_g[(m % self.ord()) as usize]
    }

    /// The additive character e_q(x) = e(x/q); x need not be reduced.
    pub fn add_char(&self, x: u64) -> C64 {
        self.e_q[(x % self.q) as usize]
    }

    /// e(j/(q-1)); j need not be reduced.
    pub fn unit_root_ord(&self, j: u64) -> C64 {
        self.e_ord[(j % self.ord()) as usize]
    }

    /// χ_j(x), with χ_j(0) = 0 for every j (including the trivial index).
    pub fn char_value(&self, j: u64, x: u64) -> C64 {
        let x = x % self.q;
        if x == 0 {
            return Complex::new(0.0, 0.0);
        }
        self.unit_root_ord((j % self.ord()) * self.dlog(x))
    }

    /// Modular inverse of a unit.
    pub fn inv(&self, x: u64) -> u64 {
        debug_assert!(x % self.q != 0);
        self.pow_g(self.ord() - self.dlog(x % self.q))
    }

    /// base^e mod q for signed base and exponent (negative e via inverse).
    pub fn pow_signed(&self, base: i64, e: i64) -> u64 {
        let b = base.rem_euclid(self.q as i64) as u64;
        debug_assert!(b != 0, "pow_signed of a non-unit");
        let p = mod_pow(b, e.unsigned_abs() % self.ord(), self.q);
        if e < 0 {
            self.inv(p)
        } else {
            p
        }
    }

    /// The character of index j mod (q-1).
    pub fn character(self: &Arc<Self>, j: u64) -> DirichletCharacter {
        DirichletCharacter {
            ctx: Arc::clone(self),
            j: j % self.ord(),
        }
    }

    /// True when `other` denotes the same field (same q, same root).
    pub fn same_field(&self, other: &FieldContext) -> bool {
        self.q == other.q && self.g == other.g
    }
}

/// A Dirichlet character mod q, denoted by its index j mod (q-1).
#[derive(Clone)]
pub struct DirichletCharacter {
    ctx: Arc<FieldContext>,
    j: u64,
}

impl DirichletCharacter {
    pub fn ctx(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    pub fn index(&self) -> u64 {
        self.j
    }

    pub fn is_trivial(&self) -> bool {
        self.j == 0
    }

    /// χ(x); zero at x ≡ 0.
    pub fn eval(&self, x: u64) -> C64 {
        self.ctx.char_value(self.j, x)
    }

    /// Parity bit t(χ) = (1 - χ(-1))/2: 0 for even, 1 for odd characters.
    pub fn parity(&self) -> u8 {
        (self.j % 2) as u8
    }

    /// The conjugate character χ_{-j}.
    pub fn conj(&self) -> DirichletCharacter {
        let ord = self.ctx.ord();
        DirichletCharacter {
            ctx: Arc::clone(&self.ctx),
            j: (ord - self.j) % ord,
        }
    }

    /// Normalized Gauss sum ε(χ) = q^{-1/2} Σ_c χ(c) e(c/q).
    pub fn gauss_sum(&self) -> C64 {
        let q = self.ctx.q();
        let mut s = Complex::new(0.0, 0.0);
        for c in 1..q {
            s += self.eval(c) * self.ctx.add_char(c);
        }
        s / (q as f64).sqrt()
    }

    /// The angle θ(χ) in (-π, π] with ε(χ) = e^{iθ(χ)}.
    ///
    /// Undefined for the trivial character; a Gauss sum off the unit circle
    /// beyond `1e-6` signals a numeric fault and is rejected.
    pub fn angle(&self) -> Result<f64> {
        if self.is_trivial() {
            return Err(Error::TrivialCharacter);
        }
        angle_of_unit(self.gauss_sum())
    }
}

/// Principal argument in (-π, π] of a number expected on the unit circle.
pub(crate) fn angle_of_unit(eps: C64) -> Result<f64> {
    let modulus = eps.norm();
    if (modulus - 1.0).abs() > 1e-6 {
        return Err(Error::NonUnitGaussSum { modulus });
    }
    let mut theta = eps.im.atan2(eps.re);
    if theta <= -PI {
        theta = PI;
    }
    Ok(theta)
}

fn roots_of_unity(n: u64) -> Vec<C64> {
    (0..n)
        .map(|j| {
            let t = 2.0 * PI * (j as f64) / (n as f64);
            Complex::new(t.cos(), t.sin())
        })
        .collect()
}

/// base^e mod m (m < 2^32 so products fit in u64).
pub fn mod_pow(mut base: u64, mut e: u64, m: u64) -> u64 {
    base %= m;
    let mut acc = 1u64 % m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for u64 (valid for all 64-bit inputs).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow_wide(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = mul_mod_wide(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod_wide(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn mod_pow_wide(mut base: u64, mut e: u64, m: u64) -> u64 {
    base %= m;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod_wide(acc, base, m);
        }
        base = mul_mod_wide(base, base, m);
        e >>= 1;
    }
    acc
}

/// Smallest primitive root of an odd prime q.
pub fn smallest_primitive_root(q: u64) -> u64 {
    let ord = q - 1;
    let factors = prime_factors(ord);
    'cand: for g in 2..q {
        for &p in &factors {
            if mod_pow(g, ord / p, q) == 1 {
                continue 'cand;
            }
        }
        return g;
    }
    unreachable!("every prime has a primitive root")
}

/// Distinct prime factors by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// All positive divisors of n, sorted.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn context_smallest_roots() {
        // Brute-force order check over candidates pins the smallest root.
        for (q, expect) in [(7u64, 3u64), (13, 2), (5, 2), (3, 2)] {
            let ctx = FieldContext::new(q).unwrap();
            assert_eq!(ctx.generator(), expect, "q={q}");
            let brute = (2..q)
                .find(|&g| (1..q - 1).all(|m| mod_pow(g, m, q) != 1))
                .unwrap();
            assert_eq!(ctx.generator(), brute);
        }
    }

    #[test]
    fn composite_rejected() {
        assert!(matches!(FieldContext::new(4), Err(Error::NotPrime(4))));
        assert!(matches!(FieldContext::new(1), Err(Error::NotPrime(1))));
    }

    #[test]
    fn bound_enforced() {
        assert!(matches!(
            FieldContext::with_bound(101, 50),
            Err(Error::TooLarge { q: 101, bound: 50 })
        ));
    }

    #[test]
    fn dlog_multiplicative_exhaustive() {
        for q in [3u64, 5, 7, 11, 13, 31, 101] {
            let ctx = FieldContext::new(q).unwrap();
            for x in 1..q {
                for y in 1..q {
                    let lhs = ctx.dlog(x * y % q);
                    let rhs = (ctx.dlog(x) + ctx.dlog(y)) % ctx.ord();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn char_eval_examples() {
        let ctx = FieldContext::new(5).unwrap();
        assert_eq!(ctx.generator(), 2);
        let chi0 = ctx.character(0);
        for x in 1..5 {
            assert!((chi0.eval(x) - C64::new(1.0, 0.0)).norm() < 1e-15);
        }
        assert_eq!(chi0.eval(0), C64::new(0.0, 0.0));
        // Order-2 character: χ_2(4) = e(2·dlog(4)/4) = e(1) = 1; 4 is a QR mod 5.
        let chi2 = ctx.character(2);
        assert_eq!(ctx.dlog(4), 2);
        assert!((chi2.eval(4) - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn character_orthogonality_small_q() {
        for q in [5u64, 7, 13] {
            let ctx = FieldContext::new(q).unwrap();
            for j in 1..q - 1 {
                let s: C64 = (1..q).map(|x| ctx.char_value(j, x)).sum();
                assert!(s.norm() < 1e-10, "q={q} j={j}");
            }
            for x in 1..q {
                let s: C64 = (0..q - 1).map(|j| ctx.char_value(j, x)).sum();
                let expect = if x == 1 { (q - 1) as f64 } else { 0.0 };
                assert!((s - C64::new(expect, 0.0)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn gauss_sum_examples() {
        // Trivial character: geometric sum over nonzero residues.
        let ctx = FieldContext::new(7).unwrap();
        let e0 = ctx.character(0).gauss_sum();
        assert!((e0 - C64::new(-1.0 / 7f64.sqrt(), 0.0)).norm() < 1e-12);

        // Legendre character mod 5 (index 2): classical value √5/√5 = 1.
        let ctx5 = FieldContext::new(5).unwrap();
        let leg = ctx5.character(2).gauss_sum();
        assert!((leg - C64::new(1.0, 0.0)).norm() < 1e-12);

        // q = 3: ε = (e(1/3) - e(2/3))/√3 = i.
        let ctx3 = FieldContext::new(3).unwrap();
        let e1 = ctx3.character(1).gauss_sum();
        assert!((e1 - C64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn angle_examples() {
        let ctx3 = FieldContext::new(3).unwrap();
        assert!((ctx3.character(1).angle().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let ctx5 = FieldContext::new(5).unwrap();
        assert!(ctx5.character(2).angle().unwrap().abs() < 1e-12);
        assert!(matches!(
            ctx5.character(0).angle(),
            Err(Error::TrivialCharacter)
        ));
    }

    #[test]
    fn gauss_sums_unit_modulus_all_q_to_499() {
        let mut q = 3u64;
        while q <= 499 {
            if is_prime(q) {
                let ctx = FieldContext::new(q).unwrap();
                let eps = crate::tracefn::gauss_sums(&ctx);
                for (j, e) in eps.iter().enumerate().skip(1) {
                    assert!(
                        (e.norm() - 1.0).abs() < 1e-10,
                        "q={q} j={j} |eps|={}",
                        e.norm()
                    );
                }
            }
            q += 2;
        }
    }

    #[test]
    fn gauss_conjugation_symmetry() {
        // conj(ε(χ)) = χ(-1) ε(χ̄), exhaustively for small q.
        for q in [5u64, 7, 13, 31] {
            let ctx = FieldContext::new(q).unwrap();
            for j in 0..q - 1 {
                let chi = ctx.character(j);
                let lhs = chi.gauss_sum().conj();
                let rhs = chi.eval(q - 1) * chi.conj().gauss_sum();
                assert!((lhs - rhs).norm() < 1e-10, "q={q} j={j}");
            }
        }
    }

    #[test]
    fn non_unit_gauss_sum_rejected() {
        // The angle guard signals a numeric fault for off-circle inputs.
        assert!(matches!(
            angle_of_unit(C64::new(2.0, 0.0)),
            Err(Error::NonUnitGaussSum { .. })
        ));
        assert!((angle_of_unit(C64::new(0.0, -1.0)).unwrap() + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        // -π maps to the principal value π.
        assert!((angle_of_unit(C64::new(-1.0, -1e-18)).unwrap() - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn pow_signed_and_inv() {
        let ctx = FieldContext::new(13).unwrap();
        for x in 1..13u64 {
            assert_eq!(x * ctx.inv(x) % 13, 1);
        }
        assert_eq!(ctx.pow_signed(-3, -3), ctx.inv(mod_pow(10, 3, 13)));
        assert_eq!(ctx.pow_signed(2, 2), 4);
    }
}
