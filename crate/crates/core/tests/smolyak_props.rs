//! Randomized structural properties of the sparse construction: combination
//! coefficients against a brute-force expansion of the difference products,
//! exactness of sparse quadrature on the union of constituent exact sets,
//! absence of internal aliasing, and the external-aliasing screening rules.

use smolyak_ps::basis::PolynomialFamily;
use smolyak_ps::evalcache::EvalCache;
use smolyak_ps::model::{BasisProduct, FnModel};
use smolyak_ps::multiindex::{
    is_admissible, is_admissible_with, random_admissible_set, smolyak_coefficients, MultiIndex,
    MultiIndexSet,
};
use smolyak_ps::quadrature::QuadratureFamily;
use smolyak_ps::smolyak::{
    direct_aliasing_pairs, direct_quadrature, smolyak_aliasing_pairs, smolyak_pseudospectral,
    smolyak_quadrature, DirectRule, SmolyakSpec,
};
use smolyak_ps::multiindex::total_order_set;
use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mi(v: &[u32]) -> MultiIndex {
    MultiIndex::new(v.to_vec())
}

/// Independent oracle: expand each member's difference product
/// `prod_i (L_{k_i} - L_{k_i - 1})` into signed full-tensor terms and collect
/// the weight of every level index (terms touching level 0 vanish).
fn brute_force_coefficients(set: &MultiIndexSet) -> BTreeMap<MultiIndex, i64> {
    let d = set.dim();
    let mut acc: BTreeMap<MultiIndex, i64> = BTreeMap::new();
    for k in set.iter() {
        for mask in 0u64..(1u64 << d) {
            let mut level = k.entries().to_vec();
            let mut dead = false;
            for (i, e) in level.iter_mut().enumerate() {
                if (mask >> i) & 1 == 1 {
                    if *e == 1 {
                        dead = true;
                        break;
                    }
                    *e -= 1;
                }
            }
            if dead {
                continue;
            }
            let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
            *acc.entry(MultiIndex::new(level)).or_insert(0) += sign;
        }
    }
    acc.retain(|_, c| *c != 0);
    acc
}

#[test]
fn coefficients_match_brute_force_expansion() {
    let mut checked = 0;
    for seed in 0..200u64 {
        let d = 2 + (seed % 3) as usize; // 2..=4
        let set = random_admissible_set(d, 5 + (seed % 36) as usize, 9, seed);
        assert!(is_admissible(&set));
        let fast = smolyak_coefficients(&set).unwrap();
        let slow = brute_force_coefficients(&set);
        assert_eq!(fast, slow, "seed {seed}");
        let total: i64 = fast.values().sum();
        assert_eq!(total, 1, "seed {seed}: coefficients sum to {total}");
        checked += 1;
    }
    assert_eq!(checked, 200);
}

#[test]
fn growth_only_touches_the_backward_cube() {
    for seed in 300..340u64 {
        let d = 2 + (seed % 2) as usize;
        let set = random_admissible_set(d, 12, 6, seed);
        let before = smolyak_coefficients(&set).unwrap();

        // find an admissible extension
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
        let candidates: Vec<MultiIndex> = set
            .iter()
            .flat_map(|k| k.forward_neighbors())
            .filter(|f| !set.contains(f) && is_admissible_with(f, &set))
            .collect();
        if candidates.is_empty() {
            continue;
        }
        let new = candidates[rng.gen_range(0..candidates.len())].clone();
        let mut grown = set.clone();
        grown.insert(new.clone()).unwrap();
        let after = smolyak_coefficients(&grown).unwrap();

        let in_cube = |k: &MultiIndex| {
            k.entries()
                .iter()
                .zip(new.entries())
                .all(|(&a, &b)| a <= b && a + 1 >= b)
        };
        let keys: std::collections::BTreeSet<&MultiIndex> =
            before.keys().chain(after.keys()).collect();
        for k in keys {
            let b = before.get(k).copied().unwrap_or(0);
            let a = after.get(k).copied().unwrap_or(0);
            if b != a {
                assert!(in_cube(k), "seed {seed}: {k} changed outside the cube of {new}");
            }
        }
    }
}

/// Sparse quadrature is exact on the union of the constituent tensor rules'
/// exact sets (monomials sampled from that union).
#[test]
fn sparse_quadrature_exact_on_union() {
    let families: [Vec<QuadratureFamily>; 3] = [
        vec![QuadratureFamily::gauss_linear(PolynomialFamily::LegendreUniform); 3],
        vec![QuadratureFamily::gauss_exponential(PolynomialFamily::LegendreUniform); 2],
        vec![
            QuadratureFamily::gauss_patterson(),
            QuadratureFamily::clenshaw_curtis(),
        ],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut sets_checked = 0;
    for trial in 0..50u64 {
        let fams = &families[(trial % 3) as usize];
        let d = fams.len();
        let set = random_admissible_set(d, 4 + (trial % 12) as usize, 4, 7000 + trial);
        let spec = SmolyakSpec::new(fams.clone(), set.clone()).unwrap();

        for _ in 0..6 {
            let cache = EvalCache::new(); // one model per cache
            // random constituent, random monomial inside its exact box
            let pick = rng.gen_range(0..set.len());
            let k = set.iter().nth(pick).unwrap();
            let degrees: Vec<u32> = fams
                .iter()
                .zip(k.entries())
                .map(|(f, &m)| rng.gen_range(0..=f.exactness(m).unwrap()))
                .collect();
            let moment: f64 = degrees.iter().map(|&r| 1.0 / (r as f64 + 1.0) * ((r % 2 == 0) as u32 as f64)).product();
            let exps: Vec<i32> = degrees.iter().map(|&r| r as i32).collect();
            let model = FnModel::new(d, move |x: &[f64]| {
                x.iter().zip(&exps).map(|(xi, &e)| xi.powi(e)).product()
            });
            let q = smolyak_quadrature(&model, &spec, &cache).unwrap();
            assert!(
                (q - moment).abs() < 1e-11,
                "trial {trial} degrees {degrees:?}: {q} vs {moment}"
            );
        }
        sets_checked += 1;
    }
    assert_eq!(sets_checked, 50);
}

/// No internal aliasing: every basis term of the sparse range comes back as
/// a unit vector.
#[test]
fn random_sets_have_no_internal_aliasing() {
    for trial in 0..12u64 {
        let d = 2 + (trial % 2) as usize;
        let fams =
            vec![QuadratureFamily::gauss_exponential(PolynomialFamily::LegendreUniform); d];
        let set = random_admissible_set(d, 8, 4, 900 + trial);
        let spec = SmolyakSpec::new(fams.clone(), set).unwrap();
        let range = spec.range();
        for j in range.iter() {
            let model = BasisProduct::new(spec.base_families(), j.clone()).unwrap();
            let cache = EvalCache::new();
            let e = smolyak_pseudospectral(&model, &spec, &cache).unwrap();
            for (jj, &c) in e.terms() {
                let want = if jj == j { 1.0 } else { 0.0 };
                assert!(
                    (c - want).abs() <= 1e-10,
                    "trial {trial} input {j}: coefficient {jj} = {c}"
                );
            }
        }
    }
}

fn example_spec() -> SmolyakSpec {
    SmolyakSpec::new(
        vec![QuadratureFamily::gauss_exponential(PolynomialFamily::LegendreUniform); 2],
        total_order_set(2, 4),
    )
    .unwrap()
}

/// External aliasing obeys both screening conditions when the input is a
/// single out-of-range product polynomial.
#[test]
fn external_aliasing_screening_conditions() {
    let spec = example_spec();
    let jp = mi(&[6, 6]); // input term, outside the range staircase
    assert!(!spec.range().contains(&jp));
    let model = BasisProduct::new(spec.base_families(), jp.clone()).unwrap();
    let cache = EvalCache::new();
    let e = smolyak_pseudospectral(&model, &spec, &cache).unwrap();

    let mut protected_b = 0;
    for (j, &c) in e.terms() {
        // condition (a): some dimension of the input is below j
        let a_protects = jp
            .entries()
            .iter()
            .zip(j.entries())
            .any(|(&jpi, &ji)| jpi < ji);
        // condition (b): one constituent both ranges over j and integrates
        // j + jp exactly
        let b_protects = spec.level_set().iter().any(|k| {
            let fams = spec.families();
            (0..2).all(|i| {
                let a = fams[i].exactness(k.get(i)).unwrap();
                j.get(i) <= a / 2 && j.get(i) + jp.get(i) <= a
            })
        });
        if a_protects || b_protects {
            assert!(
                c.abs() <= 1e-10,
                "protected coefficient {j} = {c} (a={a_protects}, b={b_protects})"
            );
        }
        if b_protects && !a_protects {
            protected_b += 1;
        }
    }
    assert!(protected_b > 0, "expected some (b)-only protected terms");
}

/// The worked external-aliasing comparison: the sparse result corrupts
/// strictly fewer coefficients than direct quadrature on the same basis.
#[test]
fn sparse_corrupts_fewer_terms_than_direct() {
    let spec = example_spec();
    let jp = mi(&[6, 6]);
    let model = BasisProduct::new(spec.base_families(), jp).unwrap();
    let basis = spec.range();

    let cache = EvalCache::new();
    let sparse = smolyak_pseudospectral(&model, &spec, &cache).unwrap();
    let direct = direct_quadrature(&model, &basis, &DirectRule::Smolyak(&spec), &cache).unwrap();

    let count = |e: &smolyak_ps::PolynomialExpansion| {
        e.terms().filter(|(_, c)| c.abs() > 1e-8).count()
    };
    let ns = count(&sparse);
    let nd = count(&direct);
    assert!(ns < nd, "sparse {ns} vs direct {nd}");

    // condition (a) on the sparse side: no corruption where some j_i > 6
    for (j, &c) in sparse.terms() {
        if j.entries().iter().any(|&ji| ji > 6) {
            assert!(c.abs() <= 1e-10, "{j} = {c}");
        }
    }
}

/// On a matched basis/rule pair the sparse aliasing report is a subset of
/// the direct one.
#[test]
fn sparse_report_is_subset_of_direct_on_random_sets() {
    for trial in 0..20u64 {
        let d = 2 + (trial % 2) as usize;
        let fams =
            vec![QuadratureFamily::gauss_exponential(PolynomialFamily::LegendreUniform); d];
        let set = random_admissible_set(d, 6 + (trial % 8) as usize, 4, 4400 + trial);
        let spec = SmolyakSpec::new(fams, set).unwrap();
        let basis = spec.range();
        let direct: std::collections::HashSet<_> =
            direct_aliasing_pairs(&basis, &DirectRule::Smolyak(&spec))
                .into_iter()
                .collect();
        for pair in smolyak_aliasing_pairs(&basis, &spec) {
            assert!(direct.contains(&pair), "trial {trial}: {pair:?}");
        }
    }
}
