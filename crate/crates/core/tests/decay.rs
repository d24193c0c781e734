//! Decay profiling over the prime ladder and the root-count degree bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toroidal::bilinear::*;

#[test]
fn normalized_type1_sums_shrink_for_gallant_kernels() {
    // Median of 20 unit-coefficient draws at M = N = ⌈√q⌉ over three primes;
    // the fitted exponent must be negative for kernels the profiler admits.
    let primes = [503u64, 1009, 2003];
    for (kind, a, b) in [
        (KernelKind::AdditiveChar, 2i64, -3i64),
        (KernelKind::Kloosterman(3), 2, -3),
        (KernelKind::Mixed { a: 2, b: 3, k: 2 }, 1, 2),
    ] {
        let report = decay_profile(&kind, a, b, &primes, 20, 7).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert!(
            report.fitted_exponent < 0.0,
            "{}: fitted {} rows {:?}",
            report.kernel,
            report.fitted_exponent,
            report.rows
        );
        // Monotone-in-trend: the last prime beats the first.
        let first = report.rows.first().unwrap().median_normalized;
        let last = report.rows.last().unwrap().median_normalized;
        assert!(last < first, "{}: {first} -> {last}", report.kernel);
        // The report carries the side-by-side predicted exponent.
        assert!(report.predicted_exponent < 0.0);
        let mut csv = Vec::new();
        report.to_csv(&mut csv).unwrap();
        assert_eq!(
            csv.iter().filter(|&&c| c == b'\n').count(),
            2 + primes.len()
        );
    }
}

#[test]
fn divisor_weight_measurement_runs() {
    let rows = divisor_weight_profile(-2, 1, &[211, 503]).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|&(_, v)| v.is_finite() && v >= 0.0));
}

#[test]
fn root_counts_respect_degree_bounds() {
    // Non-vanishing P_v has at most |b|·l roots for b < 0 (after clearing
    // denominators) and at most b·l for b > 0, exhaustively sampled.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for b in [3i64, -3] {
        for _ in 0..500 {
            let v: Vec<i64> = (0..6).map(|_| rng.gen_range(0..11)).collect();
            let inst = PierceInstance::new(3, b, v.clone(), 11).unwrap();
            let out = pierce_vanishes(&inst);
            if out.vanishes {
                continue;
            }
            let (roots, admissible) = pierce_root_count(&inst);
            let bound = b.unsigned_abs() * 3;
            assert!(roots <= bound, "b={b} v={v:?}: {roots} roots > {bound}");
            assert!(admissible <= 11);
        }
    }
}

#[test]
fn sigma_identity_exhaustive_small_field() {
    // Every vector in [0,7)^4 at l = 2: the direct double sum equals the
    // root-count form exactly (sigma_v errors otherwise).
    for b in [2i64, -2] {
        for code in 0..7u64.pow(4) {
            let mut rem = code;
            let mut v = [0i64; 4];
            for slot in v.iter_mut() {
                *slot = (rem % 7) as i64;
                rem /= 7;
            }
            let inst = PierceInstance::new(2, b, v.to_vec(), 7).unwrap();
            sigma_v(&inst).unwrap();
        }
    }
}

#[test]
fn lvalue_csv_emitter_shape() {
    use toroidal::ffield::FieldContext;
    use toroidal::lmoments::LValueTable;
    let lv = LValueTable::build(&FieldContext::new(13).unwrap()).unwrap();
    let mut buf = Vec::new();
    lv.to_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 2 + 12);
    let row: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(row[0], "0");
    assert_eq!(row[3], "", "trivial character has no angle");
}
