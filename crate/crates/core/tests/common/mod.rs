//! Shared fixtures, corpora and brute-force oracles for the integration
//! and acceptance suites.

#![allow(dead_code)]

use std::collections::BTreeMap;

use ultramet::funcspace::{materialize_product, DEFAULT_PRODUCT_BOUND};
use ultramet::gen::{gen_cantor, gen_random};
use ultramet::{rat, DegreeFunction, Rational, Space};

pub fn one_point() -> Space<Rational> {
    Space::from_entries(&["a"], &[]).unwrap()
}

pub fn two_point() -> Space<Rational> {
    Space::from_entries(&["a", "b"], &[("a", "b", rat(1, 1))]).unwrap()
}

/// Three points: one pair at 1/2, the third at distance 1 from both.
pub fn t3() -> Space<Rational> {
    Space::from_entries(
        &["a", "b", "c"],
        &[("a", "b", rat(1, 2)), ("a", "c", rat(1, 1)), ("b", "c", rat(1, 1))],
    )
    .unwrap()
}

/// Four points: pairs at 1/2 and 1/3, all cross distances 1.
pub fn t3_prime() -> Space<Rational> {
    Space::from_entries(
        &["a", "b", "c", "e"],
        &[
            ("a", "b", rat(1, 2)),
            ("c", "e", rat(1, 3)),
            ("a", "c", rat(1, 1)),
            ("a", "e", rat(1, 1)),
            ("b", "c", rat(1, 1)),
            ("b", "e", rat(1, 1)),
        ],
    )
    .unwrap()
}

/// The 2-bit Cantor truncation.
pub fn c4() -> Space<Rational> {
    gen_cantor(2).unwrap()
}

/// A strictly nested chain dendrogram on four points.
pub fn chain4() -> Space<Rational> {
    Space::from_entries(
        &["a", "b", "c", "d"],
        &[
            ("a", "b", rat(1, 4)),
            ("a", "c", rat(1, 2)),
            ("b", "c", rat(1, 2)),
            ("a", "d", rat(1, 1)),
            ("b", "d", rat(1, 1)),
            ("c", "d", rat(1, 1)),
        ],
    )
    .unwrap()
}

pub fn product(pairs: &[(Rational, usize)]) -> Space<Rational> {
    let df = DegreeFunction::new(pairs.iter().cloned()).unwrap();
    materialize_product(&df, DEFAULT_PRODUCT_BOUND).unwrap()
}

/// All points mutually at distance 1.
pub fn star(n: usize) -> Space<Rational> {
    product(&[(rat(1, 1), n)])
}

/// Fixtures with at most five points, for the exhaustive-map criteria.
pub fn fixtures_small() -> Vec<Space<Rational>> {
    vec![
        one_point(),
        two_point(),
        t3(),
        t3_prime(),
        c4(),
        chain4(),
        star(3),
        star(5),
        gen_random(5, 7, &master_pool()).unwrap(),
        gen_random(5, 19, &master_pool()).unwrap(),
    ]
}

/// The full named-fixture list.
pub fn fixtures_all() -> Vec<Space<Rational>> {
    let mut out = fixtures_small();
    out.extend([
        gen_cantor(1).unwrap(),
        gen_cantor(3).unwrap(),
        product(&[(rat(1, 2), 2), (rat(1, 1), 2)]),
        product(&[(rat(1, 2), 2), (rat(1, 1), 3)]),
        product(&[(rat(1, 2), 3), (rat(1, 1), 2)]),
        star(4),
        gen_random(8, 3, &master_pool()).unwrap(),
        gen_random(10, 4, &master_pool()).unwrap(),
    ]);
    out
}

/// Fixtures satisfying property h, all with at most twelve points.
pub fn fixtures_h() -> Vec<Space<Rational>> {
    vec![
        one_point(),
        gen_cantor(1).unwrap(),
        gen_cantor(2).unwrap(),
        gen_cantor(3).unwrap(),
        star(2),
        star(3),
        star(4),
        star(12),
        product(&[(rat(1, 2), 2), (rat(1, 1), 2)]),
        product(&[(rat(1, 2), 2), (rat(1, 1), 3)]),
        product(&[(rat(1, 2), 3), (rat(1, 1), 4)]),
        product(&[(rat(1, 3), 2), (rat(1, 2), 2), (rat(1, 1), 3)]),
        product(&[(rat(1, 3), 2), (rat(1, 2), 2), (rat(1, 1), 2)]),
    ]
}

/// Twelve strictly increasing pool values; enough for any tree on up to
/// thirteen points.
pub fn master_pool() -> Vec<Rational> {
    (1..=12).rev().map(|k| rat(1, k)).collect()
}

/// A deterministic corpus of random dendrogram spaces with sizes cycling
/// through `min_n..=max_n`.
pub fn random_corpus(count: usize, min_n: usize, max_n: usize, seed0: u64) -> Vec<Space<Rational>> {
    let pool = master_pool();
    (0..count)
        .map(|i| {
            let n = min_n + i % (max_n - min_n + 1);
            gen_random(n, seed0 + i as u64, &pool).unwrap()
        })
        .collect()
}

/// All permutations of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(remaining: &mut Vec<usize>, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining.is_empty() {
            out.push(current.clone());
            return;
        }
        for i in 0..remaining.len() {
            let v = remaining.remove(i);
            current.push(v);
            rec(remaining, current, out);
            current.pop();
            remaining.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut (0..n).collect(), &mut Vec::new(), &mut out);
    out
}

/// Brute-force isometry test: tries every bijection.
pub fn oracle_isometric(a: &Space<Rational>, b: &Space<Rational>) -> bool {
    if a.len() != b.len() {
        return false;
    }
    permutations(a.len()).into_iter().any(|p| {
        (0..a.len()).all(|i| (0..i).all(|j| a.dist(i, j) == b.dist(p[i], p[j])))
    })
}

/// Brute-force subspace-embedding test: tries every injection.
pub fn oracle_embeddable(a: &Space<Rational>, b: &Space<Rational>) -> bool {
    fn rec(a: &Space<Rational>, b: &Space<Rational>, map: &mut Vec<usize>) -> bool {
        let i = map.len();
        if i == a.len() {
            return true;
        }
        for y in 0..b.len() {
            if map.contains(&y) {
                continue;
            }
            if (0..i).all(|j| a.dist(j, i) == b.dist(map[j], y)) {
                map.push(y);
                if rec(a, b, map) {
                    return true;
                }
                map.pop();
            }
        }
        false
    }
    a.len() <= b.len() && rec(a, b, &mut Vec::new())
}

/// Whether some permutation in the list extends the partial map.
pub fn extendable_in(autos: &[Vec<usize>], map: &BTreeMap<usize, usize>) -> bool {
    autos.iter().any(|p| map.iter().all(|(&x, &y)| p[x] == y))
}
