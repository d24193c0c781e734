//! Bilinear and type-I correlation sums of trace functions, the polynomial
//! vanishing oracle behind their estimates, and empirical decay profiling
//! across a ladder of primes.

use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ffield::{is_prime, mod_pow, FieldContext};
use crate::lmoments::special::divisor_count_sieve;
use crate::sheafclass::{classify, smallest_admissible_prime, Gallant};
use crate::tracefn::{additive_char_table, k_ab_table, kloosterman_table, TraceTable};
use crate::{Error, Result, C64};

/// Configuration of a bilinear sum: exponents, twist, dyadic scales, the
/// coefficient sequence on (M, 2M], the n-range, and the kernel table.
#[derive(Debug, Clone)]
pub struct BilinearConfig {
    pub a: i64,
    pub b: i64,
    pub xi: u64,
    pub m_scale: f64,
    pub n_scale: f64,
    /// (m, α_m) with support in (M, 2M].
    pub coeffs: Vec<(u64, C64)>,
    /// The set 𝒩 of consecutive integers.
    pub range: Vec<u64>,
    pub kernel: TraceTable,
}

impl BilinearConfig {
    pub fn new(
        a: i64,
        b: i64,
        xi: u64,
        m_scale: f64,
        n_scale: f64,
        coeffs: Vec<(u64, C64)>,
        range: Vec<u64>,
        kernel: TraceTable,
    ) -> Result<Self> {
        if coeffs
            .iter()
            .any(|&(m, _)| (m as f64) <= m_scale || (m as f64) > 2.0 * m_scale)
        {
            return Err(Error::BadShape(
                "coefficients must be supported on (M, 2M]".into(),
            ));
        }
        if let (Some(first), Some(last)) = (range.first(), range.last()) {
            if last - first + 1 != range.len() as u64 {
                return Err(Error::BadShape(
                    "n-range must be consecutive integers".into(),
                ));
            }
        }
        Ok(BilinearConfig {
            a,
            b,
            xi,
            m_scale,
            n_scale,
            coeffs,
            range,
            kernel,
        })
    }

    fn ctx(&self) -> &Arc<FieldContext> {
        self.kernel.ctx()
    }
}

/// A type-I sum value together with its normalization by ‖α‖₂ M^{1/2} N.
#[derive(Debug, Clone, Copy)]
pub struct Type1Sum {
    pub value: C64,
    pub normalized: C64,
}

/// S^I = Σ_m α_m Σ_{n ∈ 𝒩} K(ξ̄ m^{-a} n^{-b}), terms with q | mn skipped.
pub fn type1_sum(cfg: &BilinearConfig) -> Result<Type1Sum> {
    let ctx = cfg.ctx();
    let q = ctx.q();
    let xi_inv = ctx.inv(cfg.xi % q);
    let mut value = Complex::new(0.0, 0.0);
    for &(m, alpha) in &cfg.coeffs {
        if m % q == 0 {
            continue;
        }
        let base = xi_inv * ctx.pow_signed(m as i64, -cfg.a) % q;
        let mut inner = Complex::new(0.0, 0.0);
        for &n in &cfg.range {
            if n % q == 0 {
                continue;
            }
            inner += cfg
                .kernel
                .value(base * ctx.pow_signed(n as i64, -cfg.b) % q);
        }
        value += alpha * inner;
    }
    let alpha_l2: f64 = cfg
        .coeffs
        .iter()
        .map(|&(_, a)| a.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let denom = alpha_l2 * cfg.m_scale.sqrt() * cfg.range.len() as f64;
    let normalized = if denom > 0.0 {
        value / denom
    } else {
        Complex::new(0.0, 0.0)
    };
    Ok(Type1Sum { value, normalized })
}

/// The smooth compactly supported cutoff on (1/2, 2), peaking at 1.
pub fn bump_u(x: f64) -> f64 {
    if x <= 0.5 || x >= 2.0 {
        return 0.0;
    }
    let s = (x - 0.5) * (2.0 - x);
    (16.0 / 9.0 - 1.0 / s).exp()
}

/// S = Σ_{m,n coprime to q} K(ξ̄ m^{-a} n^{-b}) U(m/M) U(n/N) V(mn/q) with
/// caller-supplied cutoffs (pass sharp indicators to recover the raw sum).
pub fn smooth_bilinear(
    cfg: &BilinearConfig,
    u_cut: &dyn Fn(f64) -> f64,
    v_cut: &dyn Fn(f64) -> f64,
) -> Result<C64> {
    let ctx = cfg.ctx();
    let q = ctx.q();
    let xi_inv = ctx.inv(cfg.xi % q);
    let m_lo = (cfg.m_scale / 2.0).floor() as u64;
    let m_hi = (cfg.m_scale * 2.0).ceil() as u64 + 1;
    let n_lo = (cfg.n_scale / 2.0).floor() as u64;
    let n_hi = (cfg.n_scale * 2.0).ceil() as u64 + 1;
    let mut acc = Complex::new(0.0, 0.0);
    for m in m_lo.max(1)..=m_hi {
        let um = u_cut(m as f64 / cfg.m_scale);
        if um == 0.0 || m % q == 0 {
            continue;
        }
        let base = xi_inv * ctx.pow_signed(m as i64, -cfg.a) % q;
        for n in n_lo.max(1)..=n_hi {
            let un = u_cut(n as f64 / cfg.n_scale);
            if un == 0.0 || n % q == 0 {
                continue;
            }
            let v = v_cut((m * n) as f64 / q as f64);
            if v == 0.0 {
                continue;
            }
            acc += cfg
                .kernel
                .value(base * ctx.pow_signed(n as i64, -cfg.b) % q)
                * um
                * un
                * v;
        }
    }
    Ok(acc)
}

/// One instance of the vanishing-test data: P_v(T) = Σ_{i≤l} (T+v_i)^b -
/// (T+v_{l+i})^b over F_q.
#[derive(Debug, Clone)]
pub struct PierceInstance {
    pub l: u32,
    pub b: i64,
    pub v: Vec<i64>,
    pub q: u64,
}

impl PierceInstance {
    pub fn new(l: u32, b: i64, v: Vec<i64>, q: u64) -> Result<Self> {
        if l < 2 {
            return Err(Error::BadShape("l must be at least 2".into()));
        }
        if !(b < 0 || b >= l as i64) {
            return Err(Error::BadShape("b must satisfy b < 0 or b >= l".into()));
        }
        if v.len() != 2 * l as usize {
            return Err(Error::BadShape(format!(
                "v must have length 2l = {}",
                2 * l
            )));
        }
        if !is_prime(q) || q <= b.unsigned_abs().max(2 * l as u64) {
            return Err(Error::BadShape(
                "q must be a prime exceeding |b| and 2l".into(),
            ));
        }
        Ok(PierceInstance { l, b, v, q })
    }

    fn v_reduced(&self) -> Vec<u64> {
        self.v
            .iter()
            .map(|&x| x.rem_euclid(self.q as i64) as u64)
            .collect()
    }
}

/// x^b mod q for signed b (0 maps to the sentinel u64::MAX when b < 0).
fn pow_table(q: u64, b: i64) -> Vec<u64> {
    let e = b.unsigned_abs() % (q - 1);
    (0..q)
        .map(|x| {
            if x == 0 {
                return if b < 0 { u64::MAX } else { 0 };
            }
            let p = mod_pow(x, e, q);
            if b < 0 {
                mod_pow(p, q - 2, q)
            } else {
                p
            }
        })
        .collect()
}

/// Vanishing and multiset-matching outcome for one vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PierceOutcome {
    /// P_v ≡ 0 on its domain in F_q (poles excluded for b < 0).
    pub vanishes: bool,
    /// The two halves of v agree as multisets mod q.
    pub matching: bool,
}

fn pierce_eval(q: u64, l: u32, powb: &[u64], v: &[u64]) -> PierceOutcome {
    let l = l as usize;
    let mut vanishes = true;
    'outer: for r in 0..q {
        let mut acc = 0u64;
        for i in 0..l {
            let up = powb[((r + v[i]) % q) as usize];
            let down = powb[((r + v[l + i]) % q) as usize];
            if up == u64::MAX || down == u64::MAX {
                // Pole convention: r with any r + v_i ≡ 0 is excluded.
                continue 'outer;
            }
            acc = (acc + up + q - down) % q;
        }
        if acc != 0 {
            vanishes = false;
            break;
        }
    }
    let mut first: Vec<u64> = v[..l].to_vec();
    let mut second: Vec<u64> = v[l..].to_vec();
    first.sort_unstable();
    second.sort_unstable();
    PierceOutcome {
        vanishes,
        matching: first == second,
    }
}

/// Evaluates the vanishing test and the multiset-matching criterion.
pub fn pierce_vanishes(inst: &PierceInstance) -> PierceOutcome {
    let powb = pow_table(inst.q, inst.b);
    pierce_eval(inst.q, inst.l, &powb, &inst.v_reduced())
}

/// Σ(v; e_q): computes both the direct double sum over (r, s) ∈ F_q × F_q^×
/// of e_q(s P_v(r)) and the root-count form q·#{r : P_v(r) = 0} - #{r},
/// r running over the pole-free domain; returns the value after asserting
/// the two agree.
pub fn sigma_v(inst: &PierceInstance) -> Result<C64> {
    let q = inst.q;
    let powb = pow_table(q, inst.b);
    let v = inst.v_reduced();
    let l = inst.l as usize;
    let roots_of_unity: Vec<C64> = (0..q)
        .map(|j| {
            let t = 2.0 * std::f64::consts::PI * j as f64 / q as f64;
            Complex::new(t.cos(), t.sin())
        })
        .collect();
    let mut direct = Complex::new(0.0, 0.0);
    let mut admissible = 0u64;
    let mut roots = 0u64;
    'outer: for r in 0..q {
        let mut acc = 0u64;
        for i in 0..l {
            let up = powb[((r + v[i]) % q) as usize];
            let down = powb[((r + v[l + i]) % q) as usize];
            if up == u64::MAX || down == u64::MAX {
                continue 'outer;
            }
            acc = (acc + up + q - down) % q;
        }
        admissible += 1;
        if acc == 0 {
            roots += 1;
        }
        for s in 1..q {
            direct += roots_of_unity[(s * acc % q) as usize];
        }
    }
    let formula = (q * roots) as f64 - admissible as f64;
    let gap = (direct - Complex::new(formula, 0.0)).norm();
    if gap > 1e-6 * q as f64 {
        return Err(Error::MismatchedIdentity(gap));
    }
    Ok(direct)
}

/// Root and domain counts for P_v over F_q (poles excluded for b < 0).
pub fn pierce_root_count(inst: &PierceInstance) -> (u64, u64) {
    let q = inst.q;
    let powb = pow_table(q, inst.b);
    let v = inst.v_reduced();
    let l = inst.l as usize;
    let mut roots = 0u64;
    let mut admissible = 0u64;
    'outer: for r in 0..q {
        let mut acc = 0u64;
        for i in 0..l {
            let up = powb[((r + v[i]) % q) as usize];
            let down = powb[((r + v[l + i]) % q) as usize];
            if up == u64::MAX || down == u64::MAX {
                continue 'outer;
            }
            acc = (acc + up + q - down) % q;
        }
        admissible += 1;
        if acc == 0 {
            roots += 1;
        }
    }
    (roots, admissible)
}

/// Exhaustive sweep outcome over all v in [0, q)^{2l}.
#[derive(Debug, Clone, Copy)]
pub struct PierceSweep {
    pub vectors: u64,
    pub vanishing: u64,
    /// Whether "vanishes identically" and "halves match as multisets"
    /// agreed on every vector.
    pub equivalence_holds: bool,
}

/// Checks vanishes ⟺ matching over every vector in [0, q)^{2l}.
pub fn pierce_exhaustive(q: u64, l: u32, b: i64) -> Result<PierceSweep> {
    PierceInstance::new(l, b, vec![0; 2 * l as usize], q)?;
    let powb = pow_table(q, b);
    let dim = 2 * l as usize;
    let total = q.pow(dim as u32);
    let per_first: u64 = total / q;
    let outcomes: Vec<(u64, bool)> = (0..q)
        .into_par_iter()
        .map(|first| {
            let mut v = vec![0u64; dim];
            v[0] = first;
            let mut vanishing = 0u64;
            let mut ok = true;
            for code in 0..per_first {
                let mut rem = code;
                for slot in v.iter_mut().skip(1) {
                    *slot = rem % q;
                    rem /= q;
                }
                let out = pierce_eval(q, l, &powb, &v);
                if out.vanishes {
                    vanishing += 1;
                }
                if out.vanishes != out.matching {
                    ok = false;
                }
            }
            (vanishing, ok)
        })
        .collect();
    Ok(PierceSweep {
        vectors: total,
        vanishing: outcomes.iter().map(|o| o.0).sum(),
        equivalence_holds: outcomes.iter().all(|o| o.1),
    })
}

/// Kernel families accepted by the decay profiler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// K = e_q.
    AdditiveChar,
    /// K = Kl_k.
    Kloosterman(u32),
    /// K = K_k^{a,b}.
    Mixed { a: i64, b: i64, k: u32 },
}

impl KernelKind {
    fn label(&self) -> String {
        match self {
            KernelKind::AdditiveChar => "e_q".into(),
            KernelKind::Kloosterman(k) => format!("Kl_{k}"),
            KernelKind::Mixed { a, b, k } => format!("K_{k}^{{{a},{b}}}"),
        }
    }

    fn table(&self, ctx: &Arc<FieldContext>) -> Result<TraceTable> {
        match self {
            KernelKind::AdditiveChar => Ok(additive_char_table(ctx)),
            KernelKind::Kloosterman(k) => Ok(kloosterman_table(ctx, *k)),
            KernelKind::Mixed { a, b, k } => k_ab_table(ctx, *a, *b, *k),
        }
    }
}

/// One measured prime in a decay profile.
#[derive(Debug, Clone, Copy)]
pub struct DecayRow {
    pub q: u64,
    pub m_scale: u64,
    pub n_scale: u64,
    pub median_normalized: f64,
}

/// Fitted vs predicted decay of normalized type-I sums across primes.
/// The prediction is the best exponent offered by the type-I bounds at the
/// measured scales; it is reported side by side with the fit, never
/// asserted.
#[derive(Debug, Clone)]
pub struct DecayReport {
    pub kernel: String,
    pub seed: u64,
    pub rows: Vec<DecayRow>,
    pub fitted_exponent: f64,
    pub predicted_exponent: f64,
    pub l_used: u32,
}

impl DecayReport {
    /// CSV rows (q, M, N, normalized |S|, fitted exponent, predicted
    /// exponent); the header records the kernel and the coefficient seed.
    pub fn to_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# kernel={},seed={},l={}",
            self.kernel, self.seed, self.l_used
        )?;
        writeln!(w, "q,m,n,normalized,fitted_exponent,predicted_exponent")?;
        for row in &self.rows {
            writeln!(
                w,
                "{},{},{},{:.16e},{:.16e},{:.16e}",
                row.q,
                row.m_scale,
                row.n_scale,
                row.median_normalized,
                self.fitted_exponent,
                self.predicted_exponent
            )?;
        }
        Ok(())
    }
}

/// Gate: the kernel must be gallant per the classifier, or be the additive
/// character under the hypotheses b ≤ -3 or b ≥ 1.
fn kernel_admissible(kind: &KernelKind, b: i64) -> Result<()> {
    let eq_hypotheses = b <= -3 || b >= 1;
    match kind {
        KernelKind::AdditiveChar => {
            if eq_hypotheses {
                Ok(())
            } else {
                Err(Error::NotGallantKernel)
            }
        }
        KernelKind::Kloosterman(k) => {
            if *k >= 2 {
                // Kl_k carries the data of (1, 1, k-2).
                let q = smallest_admissible_prime(1, 1, k - 2)?;
                let ctx = FieldContext::new(q)?;
                let verdict = classify(&ctx, 1, 1, k - 2)?;
                if verdict.gallant != Gallant::No {
                    return Ok(());
                }
            }
            if eq_hypotheses {
                Ok(())
            } else {
                Err(Error::NotGallantKernel)
            }
        }
        KernelKind::Mixed { a, b: kb, k } => {
            let q = smallest_admissible_prime(*a, *kb, *k)?;
            let ctx = FieldContext::new(q)?;
            let verdict = classify(&ctx, *a, *kb, *k)?;
            if verdict.gallant != Gallant::No {
                Ok(())
            } else {
                Err(Error::NotGallantKernel)
            }
        }
    }
}

fn predicted_exponent(kind: &KernelKind, b: i64, log_q_m: f64, log_q_n: f64) -> (f64, u32) {
    // Normalized bound exponents at M = q^{log_q_m}, N = q^{log_q_n}:
    // gallant: (1 + 3/(2l) - log_q(MN²)) / (2l); additive character:
    // (1 + 1/l - log_q(MN²)) / (2l), with l capped by -b when -b ≥ 3.
    let mn2 = log_q_m + 2.0 * log_q_n;
    let additive = matches!(kind, KernelKind::AdditiveChar);
    let mut best = (f64::INFINITY, 0u32);
    for l in 2..=12u32 {
        if additive {
            if b <= -3 && (l as i64) > -b {
                continue;
            }
        } else if l < 3 {
            continue;
        }
        let lf = l as f64;
        let inner = if additive {
            1.0 + 1.0 / lf - mn2
        } else {
            1.0 + 3.0 / (2.0 * lf) - mn2
        };
        let expo = inner / (2.0 * lf);
        if expo < best.0 {
            best = (expo, l);
        }
    }
    best
}

/// Measures normalized type-I sums at M = N = ⌈√q⌉ with random unit
/// coefficients over a ladder of primes and fits the decay exponent.
pub fn decay_profile(
    kind: &KernelKind,
    a: i64,
    b: i64,
    primes: &[u64],
    draws: usize,
    seed: u64,
) -> Result<DecayReport> {
    kernel_admissible(kind, b)?;
    let mut rows = Vec::with_capacity(primes.len());
    for &q in primes {
        let ctx = FieldContext::new(q)?;
        let kernel = kind.table(&ctx)?;
        let scale = (q as f64).sqrt().ceil() as u64;
        let range: Vec<u64> = (scale + 1..=2 * scale).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ q);
        let mut norms: Vec<f64> = Vec::with_capacity(draws);
        for _ in 0..draws {
            let coeffs: Vec<(u64, C64)> = (scale + 1..=2 * scale)
                .map(|m| {
                    let t = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
                    (m, Complex::new(t.cos(), t.sin()))
                })
                .collect();
            let cfg = BilinearConfig::new(
                a,
                b,
                1,
                scale as f64,
                scale as f64,
                coeffs,
                range.clone(),
                kernel.clone(),
            )?;
            norms.push(type1_sum(&cfg)?.normalized.norm());
        }
        norms.sort_by(|x, y| x.total_cmp(y));
        let median = norms[norms.len() / 2];
        rows.push(DecayRow {
            q,
            m_scale: scale,
            n_scale: scale,
            median_normalized: median,
        });
    }
    let fitted = fit_log_slope(&rows);
    let (predicted, l_used) = predicted_exponent(kind, b, 0.5, 0.5);
    Ok(DecayReport {
        kernel: kind.label(),
        seed,
        rows,
        fitted_exponent: fitted,
        predicted_exponent: predicted,
        l_used,
    })
}

fn fit_log_slope(rows: &[DecayRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.median_normalized > 0.0)
        .map(|r| ((r.q as f64).ln(), r.median_normalized.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// The divisor-weighted one-variable measurement
/// (qN)^{-1/2} Σ_n d(n) U(n/N) e_q(ξ n^{-a}) at N = q, per prime.
/// A measurement only; no bound is asserted for it.
pub fn divisor_weight_profile(a: i64, xi: u64, primes: &[u64]) -> Result<Vec<(u64, f64)>> {
    let mut out = Vec::with_capacity(primes.len());
    for &q in primes {
        let ctx = FieldContext::new(q)?;
        let n_scale = q as f64;
        let hi = (2.0 * n_scale).ceil() as usize;
        let d = divisor_count_sieve(hi);
        let mut acc = Complex::new(0.0, 0.0);
        for n in 1..=hi as u64 {
            if n % q == 0 {
                continue;
            }
            let u = bump_u(n as f64 / n_scale);
            if u == 0.0 {
                continue;
            }
            acc += ctx.add_char(xi % q * ctx.pow_signed(n as i64, -a) % q)
                * (d[n as usize] as f64)
                * u;
        }
        out.push((q, acc.norm() / (q as f64 * n_scale).sqrt()));
    }
    Ok(out)
}
