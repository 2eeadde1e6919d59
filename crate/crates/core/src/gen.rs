//! Deterministic space generators.
//!
//! The Cantor truncation puts all n-bit strings at distance 1/(k+1) where k
//! is the first differing position. The random generator draws a recursive
//! partition tree (every ultrametric space is such a dendrogram) and reads
//! distances off it, so its output never needs rejection sampling and is
//! always valid; the tree-node values are taken from a user-supplied pool,
//! strictly decreasing with depth.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Rational, Space, Value};

/// All n-bit strings with distance 1/(first differing index + 1).
pub fn gen_cantor(depth: usize) -> Result<Space<Rational>, Error> {
    if !(1..=12).contains(&depth) {
        return Err(Error::DepthOutOfRange(depth));
    }
    let n = 1usize << depth;
    let names: Vec<String> =
        (0..n).map(|i| (0..depth).map(|b| if i >> (depth - 1 - b) & 1 == 1 { '1' } else { '0' }).collect()).collect();
    Ok(Space::from_dist_fn(names, |i, j| {
        let mu = (0..depth).find(|b| (i ^ j) >> (depth - 1 - b) & 1 == 1).unwrap();
        Rational::new(1, (mu + 1) as i64)
    }))
}

enum PartitionTree {
    Leaf(usize),
    Node(Vec<PartitionTree>),
}

fn random_partition(points: &mut [usize], rng: &mut ChaCha8Rng) -> PartitionTree {
    if points.len() == 1 {
        return PartitionTree::Leaf(points[0]);
    }
    let b = points.len();
    let k = rng.gen_range(2..=b);
    points.shuffle(rng);
    // k-1 distinct cut positions in 1..b give k nonempty blocks.
    let mut cuts: Vec<usize> =
        rand::seq::index::sample(rng, b - 1, k - 1).into_iter().map(|c| c + 1).collect();
    cuts.sort_unstable();
    cuts.insert(0, 0);
    cuts.push(b);
    let children = cuts
        .windows(2)
        .map(|w| {
            let mut block: Vec<usize> = points[w[0]..w[1]].to_vec();
            block.sort_unstable();
            random_partition(&mut block, rng)
        })
        .collect();
    PartitionTree::Node(children)
}

fn tree_depth(tree: &PartitionTree) -> usize {
    match tree {
        PartitionTree::Leaf(_) => 0,
        PartitionTree::Node(children) => {
            1 + children.iter().map(tree_depth).max().expect("at least two children")
        }
    }
}

fn read_distances<V: Value>(
    tree: &PartitionTree,
    pool: &[V],
    depth: usize,
    dist: &mut Vec<Vec<Option<V>>>,
) -> Vec<usize> {
    match tree {
        PartitionTree::Leaf(p) => vec![*p],
        PartitionTree::Node(children) => {
            let value = pool[pool.len() - 1 - depth].clone();
            let blocks: Vec<Vec<usize>> =
                children.iter().map(|c| read_distances(c, pool, depth + 1, dist)).collect();
            for (i, left) in blocks.iter().enumerate() {
                for right in &blocks[i + 1..] {
                    for &x in left {
                        for &y in right {
                            dist[x.min(y)][x.max(y)] = Some(value.clone());
                        }
                    }
                }
            }
            blocks.into_iter().flatten().collect()
        }
    }
}

/// A random dendrogram on `n` points, deterministic in the seed. Values
/// down any root-to-leaf path strictly decrease through the pool; the pool
/// must be strictly increasing and long enough for the drawn tree.
pub fn gen_random<V: Value>(n: usize, seed: u64, pool: &[V]) -> Result<Space<V>, Error> {
    if pool.is_empty() || pool.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadPool);
    }
    if n == 0 {
        return Err(Error::NoPoints);
    }
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    if n == 1 {
        return Ok(Space::from_dist_fn(names, |_, _| unreachable!()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    let tree = random_partition(&mut indices, &mut rng);
    let need = tree_depth(&tree);
    if need > pool.len() {
        return Err(Error::PoolTooShallow { depth: need, pool: pool.len() });
    }
    let mut dist: Vec<Vec<Option<V>>> = vec![vec![None; n]; n];
    read_distances(&tree, pool, 0, &mut dist);
    let space = Space::from_dist_fn(names, |i, j| {
        dist[i.min(j)][i.max(j)].clone().expect("dendrogram covers every pair")
    });
    debug_assert!(space.validate().is_ok());
    Ok(space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isometry::is_homogeneous;
    use crate::nerve::build_nerve;
    use crate::rat;

    #[test]
    fn cantor_two_matches_hand_table() {
        let c = gen_cantor(2).unwrap();
        assert_eq!(c.points(), ["00", "01", "10", "11"]);
        assert_eq!(c.dist(0, 1), rat(1, 2));
        assert_eq!(c.dist(0, 2), rat(1, 1));
        assert_eq!(c.dist(2, 3), rat(1, 2));
        c.validate().unwrap();
    }

    #[test]
    fn cantor_one_is_a_pair() {
        let c = gen_cantor(1).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.dist(0, 1), rat(1, 1));
    }

    #[test]
    fn cantor_three_structure() {
        let c = gen_cantor(3).unwrap();
        assert_eq!(c.len(), 8);
        let spectrum: Vec<_> = c.spectrum().into_iter().collect();
        assert_eq!(spectrum, vec![rat(0, 1), rat(1, 3), rat(1, 2), rat(1, 1)]);
        // Every nontrivial nerve ball has exactly two sons.
        let tree = build_nerve(&c);
        assert!(tree.nodes().iter().filter(|n| !n.is_trivial()).all(|n| n.children().len() == 2));
        assert!(is_homogeneous(&c));
    }

    #[test]
    fn cantor_depth_bounds() {
        assert!(matches!(gen_cantor(0), Err(Error::DepthOutOfRange(0))));
        assert!(matches!(gen_cantor(13), Err(Error::DepthOutOfRange(13))));
    }

    #[test]
    fn random_spaces_are_valid_and_deterministic() {
        // A pool of n-1 values covers the deepest possible tree.
        let pool: Vec<_> = (1..=6).rev().map(|k| rat(1, k)).collect();
        for seed in 0..20 {
            for n in 1..=7 {
                let s = gen_random(n, seed, &pool).unwrap();
                assert_eq!(s.len(), n);
                s.validate().unwrap();
                assert_eq!(s, gen_random(n, seed, &pool).unwrap());
            }
        }
    }

    #[test]
    fn frozen_three_point_fixture() {
        // Recorded once from (n = 3, seed = 1, pool = {1/2, 1}).
        let s = gen_random(3, 1, &[rat(1, 2), rat(1, 1)]).unwrap();
        assert_eq!(s.points(), ["p0", "p1", "p2"]);
        assert_eq!(s.dist(0, 1), rat(1, 2));
        assert_eq!(s.dist(0, 2), rat(1, 1));
        assert_eq!(s.dist(1, 2), rat(1, 1));
    }

    #[test]
    fn cantor_spaces_are_homogeneous() {
        for depth in 1..=8 {
            assert!(is_homogeneous(&gen_cantor(depth).unwrap()), "depth {depth}");
        }
        // Deeper truncations: the coordinate-flip witness carrying the
        // all-zero string onto an arbitrary point, distance-checked on a
        // spread of triples.
        for depth in [10usize, 12] {
            let c = gen_cantor(depth).unwrap();
            let n = c.len();
            let flip = |x: usize, by: usize| x ^ by;
            for by in [1usize, 5, n / 3, n / 2, n - 1] {
                for step in [1usize, 7, 57] {
                    let mut x = 0usize;
                    let mut y = step;
                    while y < n {
                        assert_eq!(c.dist(x, y), c.dist(flip(x, by), flip(y, by)));
                        x = (x + step) % n;
                        y += step * 2 + 1;
                    }
                }
            }
        }
    }

    #[test]
    fn random_space_input_errors() {
        assert!(matches!(gen_random::<Rational>(3, 0, &[]), Err(Error::BadPool)));
        assert!(matches!(
            gen_random(3, 0, &[rat(1, 1), rat(1, 2)]),
            Err(Error::BadPool)
        ));
        assert!(matches!(gen_random(0, 0, &[rat(1, 1)]), Err(Error::NoPoints)));
    }

    #[test]
    fn shallow_pools_are_reported() {
        // With one pool value some seed quickly draws a two-level tree.
        let shallow = (0..100).find_map(|seed| {
            match gen_random(6, seed, &[rat(1, 1)]) {
                Err(Error::PoolTooShallow { .. }) => Some(()),
                _ => None,
            }
        });
        assert!(shallow.is_some());
    }
}
