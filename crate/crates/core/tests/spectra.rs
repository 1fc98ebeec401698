use jacspec::generators::{make_free, scalar_family};
use jacspec::sequences::{ProbeConfig, ScalarSequence as S, SeriesState};
use jacspec::spectra::*;
use jacspec::blockmat::Scaled;
use jacspec::jacobi::BlockJacobiMatrix;
use jacspec::{ComplexBlock, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

#[test]
fn free_three_by_three() {
    let s = truncation_spectrum(&make_free(1), 3, 64).unwrap();
    let r2 = 2f64.sqrt();
    for (a, b) in s.eigenvalues.iter().zip([-r2, 0.0, r2]) {
        assert!((a - b).abs() < 1e-12);
    }
    let t = truncation_spectrum(&make_free(1), 4, 64).unwrap();
    assert!(interlaces(&s.eigenvalues, &t.eigenvalues, 1, 1e-9));
}

#[test]
fn quadratic_family_ritz_values_settle() {
    let j = scalar_family("quad", |n| ((n + 1) * (n + 1)) as f64, |n| (n + 1) as f64);
    let ladder = ritz_ladder(&j, &[32, 64, 128], 4096).unwrap();
    let last = ladder.last().unwrap();
    for k in 0..5 {
        assert!(last.ritz_stability[k].unwrap() < 1e-6, "k={k}: {:?}", last.ritz_stability[k]);
    }
    assert!(ritz_ladder(&j, &[], 64).is_err());
}

#[test]
fn free_schrodinger_values() {
    let one = free_schrodinger_spectrum(&S::constant(1.0), 1, 1, 0).unwrap();
    assert!((one[0] - 2.4674011002723395).abs() < 1e-12);
    let half = free_schrodinger_spectrum(&S::constant(0.5), 2, 1, 3).unwrap();
    let full = free_schrodinger_spectrum(&S::constant(1.0), 2, 1, 3).unwrap();
    assert_eq!(half.len(), 8);
    for (h, f) in half.iter().zip(&full) {
        assert!((h - 4.0 * f).abs() < 1e-12 * h);
    }
    let g = free_schrodinger_spectrum(&S::geometric(0.5), 1, 20, 0).unwrap();
    assert!(g.windows(2).all(|w| w[0] <= w[1]));
    assert!(g[g.len() - 1] > 1e12);
}

#[test]
fn free_dirac_values() {
    let v = free_dirac_spectrum(&S::constant(1.0), 1.0, 1, 1, 0).unwrap();
    let want = (PI * PI / 4.0 + 0.25).sqrt();
    assert!((v[1] - want).abs() < 1e-12 && (v[0] + want).abs() < 1e-12);
    assert!((want - 1.6484541547378075).abs() < 1e-14);
    let c = 1.7;
    let v = free_dirac_spectrum(&S::power(-1.0), c, 3, 10, 6).unwrap();
    assert_eq!(v.len(), 2 * 10 * 7 * 3);
    let mut neg: Vec<f64> = v.iter().map(|x| -x).collect();
    neg.sort_by(f64::total_cmp);
    assert_eq!(neg, v);
    assert!(v.iter().all(|x| x.abs() >= c * c / 2.0));
}

#[test]
fn schatten_one_sixth() {
    let s = free_schrodinger_schatten(&S::geometric(0.5), 1, 1.0, &ProbeConfig::default()).unwrap();
    assert_eq!(s.verdict.state, SeriesState::ConvergedNumerically);
    assert!((s.partial_sum - 1.0 / 6.0).abs() < 1e-9, "{}", s.partial_sum);
}

#[test]
fn schatten_classification() {
    let cfg = ProbeConfig::default();
    let cases = [
        (S::geometric(0.5), 1.0, true),
        (S::power(-1.0), 1.0, true),
        (S::power(-2.0), 1.0, true),
        (S::power(-0.5), 1.0, false),
        (S::power(-0.4), 1.0, false),
        (S::power(-1.0), 0.5, false),
        (S::geometric(0.5), 0.5, false),
    ];
    for (d, q, conv) in cases {
        let s = free_schrodinger_schatten(&d, 1, q, &cfg).unwrap();
        let want = if conv { SeriesState::ConvergedNumerically } else { SeriesState::DivergingNumerically };
        assert_eq!(s.verdict.state, want, "{d:?} q={q}");
    }
    let s = free_schrodinger_schatten(&S::geometric(0.5), 1, f64::INFINITY, &cfg).unwrap();
    assert!((s.partial_sum - 1.0 / (PI * PI)).abs() < 1e-12, "{}", s.partial_sum);
    assert_eq!(s.verdict.state, SeriesState::ConvergedNumerically);
}

#[test]
fn schatten_direct_values() {
    let cfg = ProbeConfig::default();
    let s = schatten_partial((1..).map(|n: u64| (n as f64).powi(2)), 1.0, &cfg);
    assert!((s.partial_sum - PI * PI / 6.0).abs() < 1e-5);
    let s = schatten_partial([4.0, 2.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0], f64::INFINITY, &cfg);
    assert_eq!(s.partial_sum, 0.5);
}

#[test]
fn csv_rows() {
    let s = ritz_ladder(&make_free(2), &[3, 6], 64).unwrap();
    let mut out = Vec::new();
    write_csv(&s, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().next(), Some("N,index,eigenvalue,drift"));
    assert_eq!(text.lines().count(), 1 + 6 + 12);
}

fn random_family(seed: u64, p: usize) -> BlockJacobiMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 16;
    let diag: Vec<ComplexBlock> = (0..n)
        .map(|_| ComplexBlock::from_fn(p, |_, _| C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).symmetrized())
        .collect();
    let off: Vec<ComplexBlock> = (0..n)
        .map(|_| {
            ComplexBlock::from_fn(p, |i, k| {
                C64::new(if i == k { 1.5 } else { 0.0 } + rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4))
            })
        })
        .collect();
    let (diag, off) = (Arc::new(diag), Arc::new(off));
    BlockJacobiMatrix::from_fns(
        p,
        "random",
        move |k| Ok(Scaled::from_block(diag[k % n].clone())),
        move |k| Ok(Scaled::from_block(off[k % n].clone())),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn truncations_interlace(seed in any::<u64>(), p in 1usize..4, n in 1usize..24) {
        let j = random_family(seed, p);
        let a = truncation_spectrum(&j, n, 4096).unwrap();
        let b = truncation_spectrum(&j, n + 1, 4096).unwrap();
        prop_assert_eq!(a.eigenvalues.len(), n * p);
        prop_assert!(interlaces(&a.eigenvalues, &b.eigenvalues, p, 1e-9));
    }

    #[test]
    fn free_spectra_sorted_with_multiplicity(p in 1usize..4, n in 1usize..12, k in 0usize..6, c in 0.1f64..3.0) {
        let s = free_schrodinger_spectrum(&S::power(-1.0), p, n, k).unwrap();
        prop_assert_eq!(s.len(), p * n * (k + 1));
        prop_assert!(s.windows(2).all(|w| w[0] <= w[1]) && s.iter().all(|x| x.is_finite()));
        prop_assert!(s.chunks(p).all(|ch| ch.iter().all(|x| *x == ch[0])));
        let d = free_dirac_spectrum(&S::geometric(0.5), c, p, n, k).unwrap();
        prop_assert_eq!(d.len(), 2 * p * n * (k + 1));
        prop_assert!(d.windows(2).all(|w| w[0] <= w[1]) && d.iter().all(|x| x.is_finite()));
    }
}
