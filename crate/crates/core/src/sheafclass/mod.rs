//! Classification of the character-set data attached to the trace-function
//! tables: Kummer/Belyi induction tests, twist-selfduality, the candidate
//! identity components of the monodromy group, and the gallant verdict with
//! its exception list and fallback reduction.
//!
//! The candidate groups follow the two classification theorems for
//! hypergeometric character data (single multiset and disjoint pair).
//! Partially determined branches are kept as candidate sets and never
//! collapsed to a guess. The gallant verdict is driven by the exception
//! list (rank one, n = 4, the solvable tuples, degenerate data); everything
//! else with certified candidates is gallant, and a verdict that rests on a
//! bound of the form G⁰ ⊂ SO_n is reported as conditional.

mod multiset;

pub use multiset::CharacterMultiset;

use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::ffield::{divisors, is_prime, FieldContext};
use crate::tracefn::{sheaf_descriptor, SheafDescriptor};
use crate::{Error, Result};

/// A candidate for the identity component of the monodromy group, or a
/// problem class standing in for one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum G0Candidate {
    Sl(u32),
    So(u32),
    Sp(u32),
    /// G⁰ = {1}: finite monodromy possible.
    Trivial,
    /// Rank-1 data; abelian monodromy.
    Rank1,
    /// One of the solvable exception tuples.
    FiniteSolvable,
    /// ρ_7(G_2), n = 7.
    G2,
    /// ρ_8(Spin_7), n = 8.
    Spin7,
    /// Ad(SL_3), n = 8.
    AdSl3,
    /// A not-further-determined proper subgroup allowed by a containment
    /// branch of the classification.
    UndeterminedSubset,
}

impl fmt::Display for G0Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            G0Candidate::Sl(n) => write!(f, "SL_{n}"),
            G0Candidate::So(n) => write!(f, "SO_{n}"),
            G0Candidate::Sp(n) => write!(f, "Sp_{n}"),
            G0Candidate::Trivial => write!(f, "trivial"),
            G0Candidate::Rank1 => write!(f, "rank-1"),
            G0Candidate::FiniteSolvable => write!(f, "finite/solvable"),
            G0Candidate::G2 => write!(f, "G_2"),
            G0Candidate::Spin7 => write!(f, "Spin_7"),
            G0Candidate::AdSl3 => write!(f, "Ad(SL_3)"),
            G0Candidate::UndeterminedSubset => write!(f, "undetermined-subset"),
        }
    }
}

impl G0Candidate {
    /// Whether the group is on the certified-gallant list.
    pub fn certified_gallant(&self) -> bool {
        match self {
            G0Candidate::Sl(n) | G0Candidate::Sp(n) => *n >= 2,
            G0Candidate::So(n) => *n >= 2 && *n != 4,
            G0Candidate::G2 | G0Candidate::Spin7 | G0Candidate::AdSl3 => true,
            _ => false,
        }
    }
}

/// Three-valued gallant verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gallant {
    /// Every candidate group is certified gallant.
    Yes,
    /// An exception applies (rank one, n = 4, solvable tuple, degenerate).
    No,
    /// No exception applies but the candidate set is only pinned up to a
    /// containment (G⁰ ⊂ SO_n / Sp_n) or allows finite monodromy.
    Conditionally,
}

impl fmt::Display for Gallant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gallant::Yes => write!(f, "yes"),
            Gallant::No => write!(f, "no"),
            Gallant::Conditionally => write!(f, "conditionally"),
        }
    }
}

/// Witness for single-set Kummer induction: a character η of order d > 1,
/// d dividing the cardinality, with ηχ = χ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KummerWitness {
    pub d: u64,
    pub eta: u64,
}

/// Single-set Kummer induction test. Returns the smallest witness.
pub fn is_kummer_induced(set: &CharacterMultiset) -> Option<KummerWitness> {
    let ord = set.ctx().ord();
    let r = set.cardinality() as u64;
    if r == 0 {
        return None;
    }
    for d in divisors(r) {
        if d <= 1 || ord % d != 0 {
            continue;
        }
        for eta in exact_order_indices(ord, d) {
            if set.twist(eta) == *set {
                return Some(KummerWitness { d, eta });
            }
        }
    }
    None
}

/// Pair Kummer induction: some d > 1 such that every character of exact
/// order d stabilizes both multisets. Returns the smallest such d.
pub fn is_kummer_induced_pair(chi: &CharacterMultiset, theta: &CharacterMultiset) -> Option<u64> {
    let ord = chi.ctx().ord();
    for d in divisors(ord) {
        if d <= 1 {
            continue;
        }
        let etas = exact_order_indices(ord, d);
        if !etas.is_empty()
            && etas
                .iter()
                .all(|&eta| chi.twist(eta) == *chi && theta.twist(eta) == *theta)
        {
            return Some(d);
        }
    }
    None
}

/// Indices of the characters of exact order d (d must divide ord).
fn exact_order_indices(ord: u64, d: u64) -> Vec<u64> {
    let step = ord / d;
    (1..d)
        .filter(|m| gcd(*m, d) == 1)
        .map(|m| m * step)
        .collect()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Witness for Belyi induction: χ = {c-th roots of α} ⊔ {d-th roots of β},
/// θ = {n-th roots of αβ}, with c + d = n and β non-trivial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BelyiWitness {
    pub c: u32,
    pub d: u32,
    pub alpha: u64,
    pub beta: u64,
}

/// Belyi induction report for both orderings of the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BelyiReport {
    pub forward: Option<BelyiWitness>,
    pub reverse: Option<BelyiWitness>,
}

impl BelyiReport {
    pub fn any(&self) -> bool {
        self.forward.is_some() || self.reverse.is_some()
    }
}

/// Full root set {ζ : ζ^c = α} in index form, demanding exactly c members
/// (empty or partial root sets disqualify a candidate).
fn root_set(ord: u64, c: u64, alpha: u64) -> Option<Vec<u64>> {
    if c == 0 || ord % c != 0 || alpha % c != 0 {
        return None;
    }
    let base = alpha / c;
    let step = ord / c;
    Some((0..c).map(|i| (base + i * step) % ord).collect())
}

fn contains_all(set: &CharacterMultiset, needles: &[u64]) -> Option<CharacterMultiset> {
    let mut rest = set.clone();
    let probe = CharacterMultiset::from_indices(set.ctx(), needles);
    if rest.intersect(&probe) == probe {
        rest = rest.difference(&probe);
        Some(rest)
    } else {
        None
    }
}

fn belyi_one_order(chi: &CharacterMultiset, theta: &CharacterMultiset) -> Option<BelyiWitness> {
    let ord = chi.ctx().ord();
    let n = chi.cardinality() as u64;
    if n == 0 || n != theta.cardinality() as u64 || ord % n != 0 {
        return None;
    }
    for c in 1..n {
        let d = n - c;
        if ord % c != 0 || ord % d != 0 {
            continue;
        }
        let mut alphas: Vec<u64> = chi.items().iter().map(|&(j, _)| c * j % ord).collect();
        alphas.sort_unstable();
        alphas.dedup();
        for alpha in alphas {
            let Some(rs_c) = root_set(ord, c, alpha) else {
                continue;
            };
            let Some(rest) = contains_all(chi, &rs_c) else {
                continue;
            };
            debug_assert_eq!(rest.cardinality() as u64, d);
            let Some(&(y0, _)) = rest.items().first() else {
                continue;
            };
            let beta = d * y0 % ord;
            // β ≠ 1, and the n-th root set of αβ must avoid the trivial
            // character (the inducing construction degenerates when αβ = 1).
            if beta == 0 || (alpha + beta) % ord == 0 {
                continue;
            }
            let Some(rs_d) = root_set(ord, d, beta) else {
                continue;
            };
            if rest != CharacterMultiset::from_indices(chi.ctx(), &rs_d) {
                continue;
            }
            let Some(rs_n) = root_set(ord, n, (alpha + beta) % ord) else {
                continue;
            };
            if *theta == CharacterMultiset::from_indices(chi.ctx(), &rs_n) {
                return Some(BelyiWitness {
                    c: c as u32,
                    d: d as u32,
                    alpha,
                    beta,
                });
            }
        }
    }
    None
}

/// Belyi induction test in both orderings.
pub fn is_belyi_induced(chi: &CharacterMultiset, theta: &CharacterMultiset) -> BelyiReport {
    BelyiReport {
        forward: belyi_one_order(chi, theta),
        reverse: belyi_one_order(theta, chi),
    }
}

/// Symmetric/alternating tag of a twist-selfduality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualityTag {
    Symmetric,
    Alternating,
}

impl fmt::Display for DualityTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DualityTag::Symmetric => write!(f, "symmetric"),
            DualityTag::Alternating => write!(f, "alternating"),
        }
    }
}

/// A dualizing character ξ with χ = ξχ^{-1}, tagged symmetric when n is odd
/// or Λ_χ differs from ξ^{n/2}, alternating otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selfduality {
    pub xi: u64,
    pub tag: DualityTag,
}

/// All dualizing characters of a multiset, smallest index first.
pub fn twist_selfdual(set: &CharacterMultiset) -> Vec<Selfduality> {
    let ord = set.ctx().ord();
    let n = set.cardinality() as u64;
    if n == 0 {
        return Vec::new();
    }
    let inv = set.inverse();
    let lambda = set.lambda();
    (0..ord)
        .filter(|&xi| inv.twist(xi) == *set)
        .map(|xi| {
            let tag = if n % 2 == 1 || lambda != xi * (n / 2) % ord {
                DualityTag::Symmetric
            } else {
                DualityTag::Alternating
            };
            Selfduality { xi, tag }
        })
        .collect()
}

/// The solvable exception tuples with their group labels. The list carries
/// both (3,-4,1) and (-4,3,1): the two sources for the exception disagree on
/// the tuple's orientation, so both rows are honoured.
const SOLVABLE_TUPLES: &[(i64, i64, u32, &str)] = &[
    (1, -2, 1, "S_2"),
    (2, -3, 1, "S_3"),
    (3, -4, 1, "S_4"),
    (-4, 3, 1, "S_4"),
];

/// Outcome of the classification pipeline for one (a, b, k).
#[derive(Debug, Clone)]
pub struct ClassificationVerdict {
    pub a: i64,
    pub b: i64,
    pub k: u32,
    pub q: u64,
    /// Reduced working pair, expanded indices (swapped so χ is non-empty).
    pub chi: Vec<u64>,
    pub theta: Vec<u64>,
    /// True when the working pair is the reversed descriptor pair.
    pub swapped: bool,
    pub r: u32,
    pub t: u32,
    pub n: u32,
    pub degenerate: bool,
    pub kummer: Option<KummerWitness>,
    pub kummer_pair_d: Option<u64>,
    pub belyi: Option<BelyiReport>,
    pub selfdual: Option<Selfduality>,
    /// Common dualizing character of the pair, when both sets share one.
    pub common_dualizer: Option<u64>,
    pub g0_candidates: Vec<G0Candidate>,
    pub gallant: Gallant,
    pub exception_reason: Option<String>,
    pub fallback: Option<Box<ClassificationVerdict>>,
}

impl ClassificationVerdict {
    /// Normalized (max, min) sizes of the reduced pair.
    pub fn rt_normalized(&self) -> (u32, u32) {
        (self.r.max(self.t), self.r.min(self.t))
    }

    /// The group-or-problem label used by the reduction bookkeeping:
    /// the exception class when one applies, else the candidate list.
    pub fn problem_label(&self) -> String {
        if let Some((.., label)) = SOLVABLE_TUPLES
            .iter()
            .find(|&&(a, b, k, _)| (a, b, k) == (self.a, self.b, self.k))
        {
            return (*label).to_string();
        }
        if self.degenerate {
            return "degenerate".to_string();
        }
        if self.n == 1 {
            return "rank 1".to_string();
        }
        if self.n == 4 && self.g0_candidates != [G0Candidate::Sp(4)] {
            return if self.g0_candidates.contains(&G0Candidate::Sp(4)) {
                "SO_4 or Sp_4".to_string()
            } else {
                "SO_4".to_string()
            };
        }
        self.candidates_label()
    }

    /// The candidate list rendered as a label.
    pub fn candidates_label(&self) -> String {
        self.g0_candidates
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(" or ")
    }

    /// JSON record: descriptor indices, flags, witnesses, candidates,
    /// gallant verdict and the fallback chain.
    pub fn to_json(&self) -> Value {
        json!({
            "a": self.a,
            "b": self.b,
            "k": self.k,
            "q": self.q,
            "chi": self.chi,
            "theta": self.theta,
            "swapped": self.swapped,
            "r": self.r,
            "t": self.t,
            "n": self.n,
            "degenerate": self.degenerate,
            "kummer": self.kummer.map(|w| json!({"d": w.d, "eta": w.eta})),
            "kummer_pair_d": self.kummer_pair_d,
            "belyi": self.belyi.map(|b| {
                let wit = |w: Option<BelyiWitness>| {
                    w.map(|w| json!({"c": w.c, "d": w.d, "alpha": w.alpha, "beta": w.beta}))
                };
                json!({"forward": wit(b.forward), "reverse": wit(b.reverse)})
            }),
            "selfdual": self.selfdual.map(|s| json!({"xi": s.xi, "tag": s.tag.to_string()})),
            "common_dualizer": self.common_dualizer,
            "g0_candidates": self.g0_candidates.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "gallant": self.gallant.to_string(),
            "problem": self.problem_label(),
            "exception_reason": self.exception_reason,
            "fallback": self.fallback.as_ref().map(|f| f.to_json()),
        })
    }
}

fn admissibility(ctx: &FieldContext, a: i64, b: i64) -> Result<()> {
    let ord = ctx.ord();
    for e in [a, b] {
        let m = e.unsigned_abs();
        if m == 0 || ord % m != 0 {
            return Err(Error::InadmissiblePrime {
                q: ctx.q(),
                reason: format!("|{e}| does not divide q-1 = {ord}"),
            });
        }
    }
    Ok(())
}

/// Runs the full pipeline: descriptor reduction, induction tests, the
/// classification theorems, the gallant verdict, and (for non-gallant data
/// with a ≠ -1 or k > 1) the fallback reduction to (a, 1, k-1) evaluated at
/// its own smallest admissible prime.
pub fn classify(ctx: &Arc<FieldContext>, a: i64, b: i64, k: u32) -> Result<ClassificationVerdict> {
    admissibility(ctx, a, b)?;
    let desc = sheaf_descriptor(ctx, a, b, k)?;
    let mut verdict = classify_descriptor(ctx, &desc)?;
    attach_fallback(&mut verdict)?;
    Ok(verdict)
}

fn classify_descriptor(
    ctx: &Arc<FieldContext>,
    desc: &SheafDescriptor,
) -> Result<ClassificationVerdict> {
    let (a, b, k) = (desc.a, desc.b, desc.k);
    let q = ctx.q();
    let solvable = SOLVABLE_TUPLES
        .iter()
        .find(|&&(sa, sb, sk, _)| (sa, sb, sk) == (a, b, k));

    if desc.degenerate {
        return Ok(ClassificationVerdict {
            a,
            b,
            k,
            q,
            chi: Vec::new(),
            theta: Vec::new(),
            swapped: false,
            r: 0,
            t: 0,
            n: 0,
            degenerate: true,
            kummer: None,
            kummer_pair_d: None,
            belyi: None,
            selfdual: None,
            common_dualizer: None,
            g0_candidates: vec![G0Candidate::Trivial],
            gallant: Gallant::No,
            exception_reason: Some("degenerate: the character data cancels completely".into()),
            fallback: None,
        });
    }

    // Work with χ non-empty; our multisets are closed under conjugation, so
    // reversing the pair preserves the classification data.
    let (wchi, wtheta, swapped) = if desc.chi.is_empty() {
        (desc.theta.inverse(), desc.chi.clone(), true)
    } else {
        (desc.chi.clone(), desc.theta.clone(), false)
    };
    let r = wchi.cardinality();
    let t = wtheta.cardinality();
    let n = r.max(t);
    if q <= 2 * n as u64 + 1 {
        return Err(Error::InadmissiblePrime {
            q,
            reason: format!("q must exceed 2n+1 = {}", 2 * n + 1),
        });
    }

    let mut kummer = None;
    let mut kummer_pair_d = None;
    if t == 0 {
        kummer = is_kummer_induced(&wchi);
    } else {
        kummer_pair_d = is_kummer_induced_pair(&wchi, &wtheta);
    }
    let belyi = (r == t && t > 0).then(|| is_belyi_induced(&wchi, &wtheta));
    let induced =
        kummer.is_some() || kummer_pair_d.is_some() || belyi.map_or(false, |rep| rep.any());

    let duals_chi = twist_selfdual(&wchi);
    let selfdual = duals_chi.first().copied();
    let mut common_dualizer = None;

    let mut reasons: Vec<String> = Vec::new();
    let g0_candidates: Vec<G0Candidate> = if n == 1 {
        vec![G0Candidate::Rank1]
    } else if induced {
        reasons.push("induction obstruction: classification theorems inapplicable".into());
        vec![G0Candidate::UndeterminedSubset]
    } else if t == 0 {
        // Single multiset: SL_n unless an even-size selfduality refines it.
        if n % 2 == 1 || duals_chi.is_empty() {
            vec![G0Candidate::Sl(n)]
        } else {
            match duals_chi[0].tag {
                DualityTag::Symmetric => vec![G0Candidate::So(n)],
                DualityTag::Alternating => vec![G0Candidate::Sp(n)],
            }
        }
    } else {
        pair_candidates(&wchi, &wtheta, r, t, n, &mut common_dualizer)
    };

    // Exceptions that block the gallant certificate outright.
    let mut gallant = if g0_candidates.iter().all(G0Candidate::certified_gallant) {
        Gallant::Yes
    } else {
        Gallant::Conditionally
    };
    if let Some((.., label)) = solvable {
        gallant = Gallant::No;
        reasons.push(format!(
            "solvable exception {label}; the exception list carries both (3,-4,1) and (-4,3,1) \
             orientations of the S_4 tuple"
        ));
    } else if n == 1 {
        gallant = Gallant::No;
        reasons.push("rank 1".into());
    } else if n == 4 && g0_candidates != [G0Candidate::Sp(4)] {
        // Only a pinned Sp_4 escapes the n = 4 problem class.
        gallant = Gallant::No;
        reasons.push("n = 4: SO_4 cannot be ruled out by the certification route".into());
    }
    if matches!(rt_norm(r, t), (8, 2) | (9, 3)) {
        reasons.push("tensor-product candidates for (8,2)/(9,3) excluded".into());
    }

    let solvable_candidates = solvable.is_some();
    Ok(ClassificationVerdict {
        a,
        b,
        k,
        q,
        chi: wchi.expanded(),
        theta: wtheta.expanded(),
        swapped,
        r,
        t,
        n,
        degenerate: false,
        kummer,
        kummer_pair_d,
        belyi,
        selfdual,
        common_dualizer,
        g0_candidates: if solvable_candidates {
            vec![G0Candidate::FiniteSolvable]
        } else {
            g0_candidates
        },
        gallant,
        exception_reason: if reasons.is_empty() {
            None
        } else {
            Some(reasons.join("; "))
        },
        fallback: None,
    })
}

fn rt_norm(r: u32, t: u32) -> (u32, u32) {
    (r.max(t), r.min(t))
}

fn pair_candidates(
    wchi: &CharacterMultiset,
    wtheta: &CharacterMultiset,
    r: u32,
    t: u32,
    n: u32,
    common_dualizer: &mut Option<u64>,
) -> Vec<G0Candidate> {
    let ord = wchi.ctx().ord();
    if (r as i64 - t as i64) % 2 != 0 {
        return vec![G0Candidate::Sl(n)];
    }
    if r != t {
        let exotic_window = r.abs_diff(t) == 6 && (7..=9).contains(&n);
        let mut exotics = Vec::new();
        if exotic_window {
            match n {
                7 => exotics.push(G0Candidate::G2),
                // The two tensor-product groups for (8,2) and (9,3) are
                // excluded by the exhaustive case tables.
                8 => exotics.extend([G0Candidate::Spin7, G0Candidate::AdSl3]),
                _ => {}
            }
        }
        // Containment refinement when both sets share a dualizing character.
        let duals_chi = twist_selfdual(wchi);
        let duals_theta = twist_selfdual(wtheta);
        let shared = duals_chi
            .iter()
            .find(|sc| duals_theta.iter().any(|st| st.xi == sc.xi))
            .map(|sc| sc.xi);
        if let Some(xi) = shared {
            *common_dualizer = Some(xi);
            let ratio = (wchi.lambda() + ord - wtheta.lambda()) % ord;
            let mut out = if n % 2 == 0 && ratio == 0 {
                vec![G0Candidate::Sp(n)]
            } else {
                vec![G0Candidate::So(n)]
            };
            out.extend(exotics);
            out.push(G0Candidate::UndeterminedSubset);
            return out;
        }
        let mut out = vec![G0Candidate::Sl(n), G0Candidate::So(n)];
        if n % 2 == 0 {
            out.push(G0Candidate::Sp(n));
        }
        out.extend(exotics);
        return out;
    }
    // r = t: the group can collapse to {1}; the Λ-ratio refines the list.
    let ratio = (wchi.lambda() + ord - wtheta.lambda()) % ord;
    if ratio == 0 {
        let mut out = vec![G0Candidate::Sl(n)];
        if n % 2 == 0 {
            out.push(G0Candidate::Sp(n));
        }
        out
    } else if ord % 2 == 0 && ratio == ord / 2 {
        let mut out = vec![G0Candidate::Trivial, G0Candidate::So(n)];
        if n % 2 == 0 {
            out.push(G0Candidate::Sp(n));
        }
        out
    } else {
        let mut out = vec![G0Candidate::Trivial, G0Candidate::Sl(n), G0Candidate::So(n)];
        if n % 2 == 0 {
            out.push(G0Candidate::Sp(n));
        }
        out
    }
}

fn attach_fallback(verdict: &mut ClassificationVerdict) -> Result<()> {
    if verdict.gallant != Gallant::No {
        return Ok(());
    }
    let (a, k) = (verdict.a, verdict.k);
    if k < 1 || (a == -1 && k <= 1) {
        return Ok(());
    }
    let q_fb = smallest_admissible_prime(a, 1, k - 1)?;
    let ctx_fb = FieldContext::new(q_fb)?;
    let desc = sheaf_descriptor(&ctx_fb, a, 1, k - 1)?;
    let mut inner = classify_descriptor(&ctx_fb, &desc)?;
    attach_fallback(&mut inner)?;
    verdict.fallback = Some(Box::new(inner));
    Ok(())
}

/// Smallest prime q with |a|, |b| dividing q-1 and q > 2n+1 for the reduced
/// character data of (a, b, k).
pub fn smallest_admissible_prime(a: i64, b: i64, k: u32) -> Result<u64> {
    if a == 0 || b == 0 {
        return Err(Error::DomainError("exponents must be nonzero".into()));
    }
    let la = a.unsigned_abs();
    let lb = b.unsigned_abs();
    let mut q = 3u64;
    while q < 100_000_000 {
        if is_prime(q) && (q - 1) % la == 0 && (q - 1) % lb == 0 {
            let ctx = FieldContext::new(q)?;
            let desc = sheaf_descriptor(&ctx, a, b, k)?;
            let n = desc.chi.cardinality().max(desc.theta.cardinality());
            if q > 2 * n as u64 + 1 {
                return Ok(q);
            }
        }
        q += 2;
    }
    Err(Error::DomainError("no admissible prime found".into()))
}

/// The next admissible primes after `from` (exclusive), same criteria.
pub fn admissible_primes(a: i64, b: i64, k: u32, count: usize) -> Result<Vec<u64>> {
    let mut out = Vec::with_capacity(count);
    let mut q = smallest_admissible_prime(a, b, k)?;
    out.push(q);
    let la = a.unsigned_abs();
    let lb = b.unsigned_abs();
    while out.len() < count {
        q += 2;
        if is_prime(q) && (q - 1) % la == 0 && (q - 1) % lb == 0 {
            out.push(q);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(q: u64) -> Arc<FieldContext> {
        FieldContext::new(q).unwrap()
    }

    #[test]
    fn kummer_examples() {
        let c = ctx(13);
        // ρ[1]^k is never Kummer induced.
        for k in 2..=6 {
            assert!(is_kummer_induced(&CharacterMultiset::trivial_power(&c, k)).is_none());
        }
        // {1, χ_{1/2}} is stabilized by χ_{1/2} itself (d = 2).
        let set = CharacterMultiset::from_indices(&c, &[0, 6]);
        let w = is_kummer_induced(&set).unwrap();
        assert_eq!((w.d, w.eta), (2, 6));
        // The single-set data of (a, -1, 1) is ρ[a]: Kummer induced for a > 1.
        for a in [3i64, 4, 6] {
            let q = smallest_admissible_prime(a, -1, 1).unwrap();
            let cq = ctx(q);
            let desc = sheaf_descriptor(&cq, a, -1, 1).unwrap();
            assert!(desc.theta.is_empty());
            assert_eq!(desc.chi, CharacterMultiset::rho(&cq, a).unwrap());
            assert!(is_kummer_induced(&desc.chi).is_some(), "a={a}");
        }
    }

    #[test]
    fn belyi_examples() {
        // r ≠ t disqualifies immediately.
        let c = ctx(13);
        let a = CharacterMultiset::from_indices(&c, &[0, 4]);
        let b = CharacterMultiset::from_indices(&c, &[0]);
        assert!(!is_belyi_induced(&a, &b).any());

        // q ≡ 1 mod 4: χ = {1, χ_{1/2}}, θ = {χ_{1/4}, χ_{3/4}} with
        // (c, d, α, β) = (1, 1, 1, χ_{1/2}).
        let chi = CharacterMultiset::from_indices(&c, &[0, 6]);
        let theta = CharacterMultiset::from_indices(&c, &[3, 9]);
        let rep = is_belyi_induced(&chi, &theta);
        let w = rep.forward.unwrap();
        assert_eq!((w.c, w.d, w.alpha, w.beta), (1, 1, 0, 6));

        // The reduced pair of (2, -3, 1) is Belyi induced in neither order.
        let desc = sheaf_descriptor(&c, 2, -3, 1).unwrap();
        assert!(!is_belyi_induced(&desc.chi, &desc.theta).any());
    }

    #[test]
    fn selfduality_examples() {
        let c = ctx(13);
        // ρ[1]^2: dualizer ξ = 1; n = 2 even with Λ = ξ^{n/2} → alternating.
        let duals = twist_selfdual(&CharacterMultiset::trivial_power(&c, 2));
        assert_eq!(duals.len(), 1);
        assert_eq!(duals[0].xi, 0);
        assert_eq!(duals[0].tag, DualityTag::Alternating);

        // ρ[3]: ξ = 1 dualizes (the set is inverse-closed); n odd → symmetric.
        let rho3 = CharacterMultiset::rho(&c, 3).unwrap();
        let duals3 = twist_selfdual(&rho3);
        assert!(duals3
            .iter()
            .any(|s| s.xi == 0 && s.tag == DualityTag::Symmetric));

        // {1, χ_{1/3}}: exhaustive scan finds exactly the dualizer ξ = χ_{1/3}
        // (any two-element multiset {α, β} is dualized by αβ).
        let set = CharacterMultiset::from_indices(&c, &[0, 4]);
        let duals2 = twist_selfdual(&set);
        assert_eq!(duals2.len(), 1);
        assert_eq!(duals2[0].xi, 4);
    }

    #[test]
    fn classify_reduction_rows() {
        // (2,1,1): SO_4, not gallant; falls back to (2,1,0) → SL_3 gallant.
        let q = smallest_admissible_prime(2, 1, 1).unwrap();
        let v = classify(&ctx(q), 2, 1, 1).unwrap();
        assert_eq!(v.problem_label(), "SO_4");
        assert_eq!(v.gallant, Gallant::No);
        let fb = v.fallback.as_ref().unwrap();
        assert_eq!((fb.a, fb.b, fb.k), (2, 1, 0));
        assert_eq!(fb.candidates_label(), "SL_3");
        assert_eq!(fb.gallant, Gallant::Yes);

        // (1,-2,1): solvable S_2; falls back to (1,1,0) → Sp_2.
        let q2 = smallest_admissible_prime(1, -2, 1).unwrap();
        let v2 = classify(&ctx(q2), 1, -2, 1).unwrap();
        assert_eq!(v2.problem_label(), "S_2");
        assert_eq!(v2.g0_candidates, vec![G0Candidate::FiniteSolvable]);
        let fb2 = v2.fallback.as_ref().unwrap();
        assert_eq!(fb2.candidates_label(), "Sp_2");
    }

    #[test]
    fn classify_kloosterman_families() {
        // Kl_{k+2} has the data of (1,1,k): ρ[1]^{k+2}.
        let v = classify(&ctx(13), 1, 1, 3).unwrap();
        assert_eq!(v.n, 5);
        assert_eq!(v.g0_candidates, vec![G0Candidate::Sl(5)]);
        assert_eq!(v.gallant, Gallant::Yes);
        let v2 = classify(&ctx(13), 1, 1, 0).unwrap();
        assert_eq!(v2.g0_candidates, vec![G0Candidate::Sp(2)]);
    }

    #[test]
    fn classify_last_table_row_parity() {
        // (a,1,0): Sp_{a+1} for odd a, SL_{a+1} for even a.
        for a in 2i64..=7 {
            let q = smallest_admissible_prime(a, 1, 0).unwrap();
            let v = classify(&ctx(q), a, 1, 0).unwrap();
            let expect = if a % 2 == 0 {
                G0Candidate::Sl(a as u32 + 1)
            } else {
                G0Candidate::Sp(a as u32 + 1)
            };
            assert_eq!(v.g0_candidates, vec![expect], "a={a}");
            assert_eq!(v.gallant, Gallant::Yes);
        }
    }

    #[test]
    fn inadmissible_prime_rejected() {
        // 3 does not divide 13-1? It does; use |a|=5 instead (5 ∤ 12).
        assert!(matches!(
            classify(&ctx(13), 5, 1, 0),
            Err(Error::InadmissiblePrime { q: 13, .. })
        ));
        // q too small for the rank: (3,3,4) has n = 10, needs q > 21.
        assert!(matches!(
            classify(&ctx(13), 3, 3, 4),
            Err(Error::InadmissiblePrime { .. })
        ));
    }

    #[test]
    fn degenerate_case() {
        let v = classify(&ctx(13), -1, -1, 2).unwrap();
        assert!(v.degenerate);
        assert_eq!(v.gallant, Gallant::No);
        // a = -1, k = 2 > 1 still allows the reduction chain.
        assert!(v.fallback.is_some());
    }

    #[test]
    fn json_roundtrip_shape() {
        let v = classify(&ctx(13), 2, 1, 1).unwrap();
        let j = v.to_json();
        assert_eq!(j["problem"], "SO_4");
        assert_eq!(j["gallant"], "no");
        assert_eq!(j["fallback"]["gallant"], "yes");
    }
}
