//! Randomized invariants across the crate.

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use segre_core::arith::{default_primes, Integers, PrimeField, Rationals, Ring};
use segre_core::eval::{
    compositions, eval_at_sum, eval_pattern, eval_symmetrized, random_points_fp, random_points_int,
};
use segre_core::flatten::{bipartitions, flattening_rank, gss_sigma2_test, minor_span_dimension, Sigma2Certificate};
use segre_core::forms::{build_form, catalog, slot_graph};
use segre_core::poly::binomial;
use segre_core::schur::{
    count_nonvanishing, cubic_ideal_dimension, decompose_symmetric_power, gl_dimension, prolongation, QuadricSystem,
};
use segre_core::secant::{scan_ideal, terracini_dimension, ScanOptions, SecantSpec};
use segre_core::symgroup::{
    character, cycle_types, enumerate_partitions, factorial, invariant_multiplicity, irrep_dimension, CycleType,
    Partition,
};
use segre_core::tensor::{RankOnePoint, Tensor};

fn fp() -> PrimeField {
    PrimeField::new(default_primes(1)[0]).unwrap()
}

fn qi(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn form(name: &str) -> segre_core::forms::MinorProductForm {
    catalog(name).unwrap().0.remove(0)
}

// ---------------------------------------------------------------------------
// symmetric group

#[test]
fn squares_of_irrep_dimensions_sum_to_the_group_order() {
    for d in 1..=8 {
        let s: u64 = enumerate_partitions(d)
            .unwrap()
            .iter()
            .map(|p| irrep_dimension(p).pow(2))
            .sum();
        assert_eq!(s, factorial(d as u64));
        let classes: u64 = cycle_types(d).unwrap().iter().map(|c| c.class_size).sum();
        assert_eq!(classes, factorial(d as u64));
    }
}

#[test]
fn character_at_identity_is_the_dimension() {
    for d in 1..=10u32 {
        for p in enumerate_partitions(d as usize).unwrap() {
            assert_eq!(
                character(&p, &CycleType::identity(d)).unwrap(),
                irrep_dimension(&p) as i64
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn invariant_multiplicity_is_symmetric(d in 2usize..7, picks in prop::collection::vec(any::<prop::sample::Index>(), 3), rot in 0usize..3) {
        let ps = enumerate_partitions(d).unwrap();
        let chosen: Vec<Partition> = picks.iter().map(|i| ps[i.index(ps.len())].clone()).collect();
        let mut rotated = chosen.clone();
        rotated.rotate_left(rot);
        let mut swapped = chosen.clone();
        swapped.swap(0, 1);
        let m = invariant_multiplicity(&chosen).unwrap();
        prop_assert_eq!(m, invariant_multiplicity(&rotated).unwrap());
        prop_assert_eq!(m, invariant_multiplicity(&swapped).unwrap());
    }

    #[test]
    fn irreps_are_self_dual(d in 1usize..9, pick in any::<prop::sample::Index>()) {
        let ps = enumerate_partitions(d).unwrap();
        let p = ps[pick.index(ps.len())].clone();
        prop_assert_eq!(invariant_multiplicity(&[p.clone(), p]).unwrap(), 1);
    }
}

// ---------------------------------------------------------------------------
// decompositions

fn check_dimension_identity(d: usize, dims: &[usize]) {
    let n: usize = dims.iter().product();
    let total: u128 = decompose_symmetric_power(d, dims)
        .unwrap()
        .iter()
        .map(|l| l.multiplicity_in_sd as u128 * l.copy_dimension(dims))
        .sum();
    assert_eq!(
        total,
        binomial((n + d - 1) as u64, d as u64),
        "d = {d}, dims = {dims:?}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symmetric_power_dimensions_add_up(d in 1usize..=5, dims in prop::collection::vec(1usize..=4, 3)) {
        check_dimension_identity(d, &dims);
    }

    #[test]
    fn symmetric_power_dimensions_add_up_for_four_factors(d in 1usize..=4, dims in prop::collection::vec(1usize..=3, 4)) {
        check_dimension_identity(d, &dims);
    }

    #[test]
    fn cubic_count_is_symmetric(a in 1usize..7, b in 1usize..7, c in 1usize..7) {
        let x = cubic_ideal_dimension(&[a, b, c]);
        prop_assert_eq!(x, cubic_ideal_dimension(&[b, c, a]));
        prop_assert_eq!(x, cubic_ideal_dimension(&[b, a, c]));
    }

    #[test]
    fn gl_dimension_vanishes_exactly_beyond_the_length(d in 1usize..8, pick in any::<prop::sample::Index>(), n in 1usize..8) {
        let ps = enumerate_partitions(d).unwrap();
        let p = &ps[pick.index(ps.len())];
        prop_assert_eq!(gl_dimension(p, n) == 0, p.len() > n);
        prop_assert_eq!(gl_dimension(&Partition::column(n as u32), n), 1);
    }
}

#[test]
fn prolonged_segre_quadrics_vanish_on_the_secant_variety() {
    let f = fp();
    for dims in [vec![2usize, 2, 3], vec![2, 3, 3]] {
        let system = QuadricSystem::segre(&dims);
        let cubics = prolongation(&f, &system, 1, |q| f.from_rational(q).unwrap()).unwrap();
        assert_eq!(cubics.len() as u128, cubic_ideal_dimension(&dims));
        let n: usize = dims.iter().product();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let failures = count_nonvanishing(&f, &cubics, n, 3, 100, || {
            Tensor::sum_of(&f, &dims, &random_points_fp(&f, &dims, 2, &mut rng)).data
        });
        assert_eq!(failures, 0);
    }
}

// ---------------------------------------------------------------------------
// forms and evaluation

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn symmetrizations_have_the_label_weight(seed in any::<u64>(), which in 0usize..3) {
        let name = ["ex-211-211-211", "deg6-222", "ex-321-321-3111"][which];
        let f = fp();
        let fm = form(name);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let args = random_points_fp(&f, fm.dims(), fm.degree(), &mut rng);
        let scales: Vec<Vec<_>> = fm.dims().iter().map(|&n| (0..n).map(|_| f.random(&mut rng)).collect()).collect();
        let scaled: Vec<RankOnePoint<_>> = args
            .iter()
            .map(|p| RankOnePoint::new(p.vectors.iter().zip(&scales).map(|(v, t)| v.iter().zip(t).map(|(x, s)| f.mul(x, s)).collect()).collect()))
            .collect();
        let mut factor = f.one();
        for (pi, t) in fm.partitions().iter().zip(&scales) {
            for (j, &part) in pi.parts().iter().enumerate() {
                for _ in 0..part {
                    factor = f.mul(&factor, &t[j]);
                }
            }
        }
        let base = eval_symmetrized(&f, &fm, &args).unwrap();
        prop_assert_eq!(eval_symmetrized(&f, &fm, &scaled).unwrap(), f.mul(&factor, &base));
    }

    #[test]
    fn value_at_sum_is_the_sum_of_pattern_components(seed in any::<u64>(), which in 0usize..4, r in 1usize..=4) {
        let name = ["ex-211-211-211", "deg6-222", "ex-321-321-3111", "deg8-3311-2222-2222"][which];
        let f = fp();
        let fm = form(name);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = random_points_fp(&f, fm.dims(), r, &mut rng);
        let total = compositions(fm.degree(), r)
            .iter()
            .fold(f.zero(), |acc, m| f.add(&acc, &eval_pattern(&f, &fm, &pts, m).unwrap()));
        prop_assert_eq!(eval_at_sum(&f, &fm, &pts).unwrap(), total);
    }

    #[test]
    fn prime_runs_reduce_integer_runs(seed in any::<u64>()) {
        let f = fp();
        let fm = form("ex-211-211-211");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = random_points_int(fm.dims(), 4, 9, &mut rng);
        let big: Vec<RankOnePoint<BigInt>> = pts.iter().map(|p| p.map(|&x| BigInt::from(x))).collect();
        let red: Vec<RankOnePoint<_>> = pts.iter().map(|p| p.map(|&x| f.from_i64(x))).collect();
        let exact = eval_symmetrized(&Integers, &fm, &big).unwrap();
        prop_assert_eq!(f.from_bigint(&exact), eval_symmetrized(&f, &fm, &red).unwrap());
    }
}

#[test]
fn triangle_free_octics_vanish_when_a_point_repeats_three_times() {
    let f = fp();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for name in ["deg8-5111-2222-2222", "deg8-3311-2222-2222"] {
        let fm = form(name);
        assert!(slot_graph(&fm).triangle_free());
        let pts = random_points_fp(&f, fm.dims(), 5, &mut rng);
        for m in compositions(8, 5)
            .into_iter()
            .filter(|m| m.iter().any(|&x| x >= 3))
            .take(40)
        {
            assert_eq!(eval_pattern(&f, &fm, &pts, &m).unwrap(), f.zero(), "{name} {m:?}");
        }
    }
}

#[test]
fn evaluation_does_not_depend_on_thread_count() {
    let f = fp();
    let fm = form("deg6-222");
    let pts = random_points_fp(&f, fm.dims(), 4, &mut ChaCha8Rng::seed_from_u64(3));
    let args = random_points_fp(&f, fm.dims(), 6, &mut ChaCha8Rng::seed_from_u64(4));
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let sum = eval_at_sum(&f, &fm, &pts).unwrap();
            let sym = eval_symmetrized(&f, &fm, &args).unwrap();
            (f.to_u64(sum), f.to_u64(sym))
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn build_form_is_deterministic() {
    let parts: Vec<Partition> = ["321", "321", "3111"].iter().map(|s| s.parse().unwrap()).collect();
    let taus = vec![vec![0, 1, 2, 3, 4, 5], vec![2, 3, 4, 0, 1, 5], vec![1, 2, 3, 4, 0, 5]];
    let a = build_form(&parts, &taus, &[3, 3, 4]).unwrap();
    let b = build_form(&parts, &taus, &[3, 3, 4]).unwrap();
    assert_eq!(a, b);
}

// ---------------------------------------------------------------------------
// secant varieties

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn terracini_is_monotone_and_bounded(dims in prop::collection::vec(2usize..=4, 3), seed in any::<u64>()) {
        let ambient: usize = dims.iter().product();
        let tangent: usize = dims.iter().map(|n| n - 1).sum::<usize>() + 1;
        let mut last = 0;
        for r in 1..=6 {
            let t = terracini_dimension(&SecantSpec::new(dims.clone(), r, seed).unwrap()).unwrap();
            prop_assert!(t >= last);
            prop_assert!(t <= (r * tangent).min(ambient));
            last = t;
        }
    }
}

#[test]
fn scan_reports_respect_their_invariants() {
    for (d, dims, r) in [(3, vec![2usize, 2, 3], 2), (4, vec![3, 3, 3], 3), (4, vec![2, 3, 4], 3)] {
        let spec = SecantSpec::new(dims, r, 17).unwrap();
        let report = scan_ideal(d, &spec, &ScanOptions::default()).unwrap();
        assert!(report.complete);
        for e in &report.entries {
            assert!(e.multiplicity_in_ideal <= e.multiplicity_in_sd);
            if e.multiplicity_in_ideal > 0 {
                let ev = e.evidence.as_ref().expect("nonzero verdicts carry evidence");
                assert!(ev.primes.len() >= 2);
                assert!(ev.point_sets >= 3);
                assert!(ev.fresh_point_sets >= 3);
                assert_eq!(ev.coefficients.len() as u64, e.multiplicity_in_ideal);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// flattenings and σ₂

fn random_point(rng: &mut ChaCha8Rng, dims: &[usize]) -> RankOnePoint<BigRational> {
    RankOnePoint::new(
        dims.iter()
            .map(|&n| (0..n).map(|_| qi(rng.gen_range(-3..=3))).collect())
            .collect(),
    )
}

fn random_dims(rng: &mut ChaCha8Rng, k: usize) -> Vec<usize> {
    (0..k).map(|_| rng.gen_range(2..=4)).collect()
}

/// A random element of σ₂: rank ≤ 2 or a tangent vector.
fn sigma2_member(seed: u64) -> Tensor<BigRational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(3..=4);
    let dims = random_dims(&mut rng, k);
    let q = Rationals;
    match rng.gen_range(0..3) {
        0 => Tensor::rank_one(&q, &random_point(&mut rng, &dims)),
        1 => {
            let pts = [random_point(&mut rng, &dims), random_point(&mut rng, &dims)];
            Tensor::sum_of(&q, &dims, &pts)
        }
        _ => {
            let base = random_point(&mut rng, &dims);
            let pert = random_point(&mut rng, &dims);
            let mut t = Tensor::zeros(&q, &dims);
            for i in 0..k {
                let mut p = base.clone();
                p.vectors[i] = pert.vectors[i].clone();
                t.add_assign(&q, &Tensor::rank_one(&q, &p));
            }
            t
        }
    }
}

fn sigma_r_member(seed: u64, r: usize) -> Tensor<BigRational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(3..=4);
    let dims = random_dims(&mut rng, k);
    let pts: Vec<_> = (0..r).map(|_| random_point(&mut rng, &dims)).collect();
    Tensor::sum_of(&Rationals, &dims, &pts)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sigma2_members_are_certified(seed in any::<u64>()) {
        let t = sigma2_member(seed);
        let cert = gss_sigma2_test(&t).unwrap();
        prop_assert!(cert.in_sigma2(), "{:?}", cert);
        prop_assert!(cert.verify(&t));
        if let Some(back) = cert.reconstruct() {
            prop_assert_eq!(back, t);
        }
    }

    #[test]
    fn flattening_ranks_are_bounded_by_r(seed in any::<u64>(), r in 1usize..=4) {
        let t = sigma_r_member(seed, r);
        for rows in bipartitions(t.order()) {
            prop_assert!(flattening_rank(&t, &rows).unwrap() <= r);
        }
    }

    #[test]
    fn witnesses_are_nonzero_minors(seed in any::<u64>()) {
        let t = sigma_r_member(seed, 3);
        let cert = gss_sigma2_test(&t).unwrap();
        prop_assert!(cert.verify(&t));
        if let Sigma2Certificate::Witness { minor, .. } = &cert {
            prop_assert!(!Rationals.is_zero(minor));
        }
    }
}

#[test]
fn cubic_span_of_minors_matches_the_module_count() {
    for dims in [
        vec![2usize, 2, 2],
        vec![2, 2, 3],
        vec![2, 2, 4],
        vec![2, 3, 3],
        vec![2, 3, 4],
        vec![3, 3, 3],
        vec![2, 2, 2, 2],
        vec![2, 2, 2, 3],
    ] {
        assert_eq!(
            minor_span_dimension(&dims, 2).unwrap() as u128,
            cubic_ideal_dimension(&dims),
            "{dims:?}"
        );
    }
}
