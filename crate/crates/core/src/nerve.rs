//! The nerve of an ultrametric space: the set of closed balls `B(a, r)` with
//! `r` in the spectrum of `a`, ordered by reverse inclusion. On a finite
//! space this order is a tree whose leaves are the singletons; the diameter
//! is a strictly decreasing labelling from the root (the whole space) down.
//!
//! The sons of a nontrivial ball `B` are the open balls of radius `diam(B)`
//! inside `B`; they partition `B` and, in a finite space, coincide with the
//! children of `B` in the nerve. Everything downstream (canonical codes,
//! orbit computation, the embedding) leans on that coincidence.

use std::collections::{BTreeMap, BTreeSet};


use crate::space::{Ball, Openness, SpectrumSet};
use crate::{Error, Space, Value};

/// One node of the nerve: a closed ball attaining its diameter.
#[derive(Debug, Clone)]
pub struct NerveNode<V> {
    members: BTreeSet<usize>,
    diameter: V,
    parent: Option<usize>,
    children: Vec<usize>,
}

impl<V: Value> NerveNode<V> {
    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn diameter(&self) -> &V {
        &self.diameter
    }

    pub fn parent(&self) -> Option<usize> {
        self.parent
    }

    /// Children in the tree, sorted by lexicographically least member.
    pub fn children(&self) -> &[usize] {
        &self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.members.len() == 1
    }

    /// The node as a closed ball.
    pub fn ball(&self) -> Ball<V> {
        Ball::new(self.members.clone(), self.diameter.clone(), Openness::Closed)
    }
}

/// The nerve as a rooted labelled tree.
///
/// Nodes are deduplicated by member set and sorted by (diameter descending,
/// lexicographically least member), so node 0 is always the root.
#[derive(Debug, Clone)]
pub struct NerveTree<V> {
    nodes: Vec<NerveNode<V>>,
}

impl<V: Value> NerveTree<V> {
    pub fn nodes(&self) -> &[NerveNode<V>] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a nerve always contains the root
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn node(&self, i: usize) -> &NerveNode<V> {
        &self.nodes[i]
    }

    /// Index of the node with the given member set, if it is a nerve ball.
    pub fn find(&self, members: &BTreeSet<usize>) -> Option<usize> {
        self.nodes.iter().position(|n| &n.members == members)
    }

    /// Index of the leaf for a point.
    pub fn leaf_of(&self, point: usize) -> usize {
        self.nodes
            .iter()
            .position(|n| n.members.len() == 1 && n.members.contains(&point))
            .expect("every point has a singleton leaf")
    }

    /// Node indices along the path root -> leaf of `point`.
    pub fn path_to(&self, point: usize) -> Vec<usize> {
        let mut path = vec![self.leaf_of(point)];
        while let Some(p) = self.nodes[*path.last().unwrap()].parent {
            path.push(p);
        }
        path.reverse();
        path
    }
}

/// Builds the nerve of a space.
pub fn build_nerve<V: Value>(space: &Space<V>) -> NerveTree<V> {
    let n = space.len();
    let mut seen: BTreeMap<BTreeSet<usize>, V> = BTreeMap::new();
    for a in 0..n {
        for r in space.spectrum_at(a) {
            let members = space.ball_set(a, &r, Openness::Closed);
            // The diameter of a closed ball with spectrum radius equals the radius.
            debug_assert_eq!(space.diameter_of(&members).unwrap(), r);
            seen.entry(members).or_insert(r);
        }
    }
    let mut order: Vec<(BTreeSet<usize>, V)> = seen.into_iter().collect();
    order.sort_by(|(ma, da), (mb, db)| {
        db.cmp(da)
            .then_with(|| space.point_id(space.lex_least(ma)).cmp(space.point_id(space.lex_least(mb))))
    });
    let mut nodes: Vec<NerveNode<V>> = order
        .into_iter()
        .map(|(members, diameter)| NerveNode { members, diameter, parent: None, children: Vec::new() })
        .collect();

    // Parent of a node: the inclusion-minimal node strictly containing it.
    // Balls containing a fixed point are totally ordered, and the node
    // order is diameter-descending, so each point's chain of balls lists
    // every node directly below its parent.
    let mut chains: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (idx, node) in nodes.iter().enumerate() {
        for &p in &node.members {
            chains[p].push(idx);
        }
    }
    for chain in &chains {
        for w in chain.windows(2) {
            let (above, below) = (w[0], w[1]);
            debug_assert!(nodes[above].diameter > nodes[below].diameter);
            debug_assert!(nodes[below].members.is_subset(&nodes[above].members));
            match nodes[below].parent {
                Some(existing) => debug_assert_eq!(existing, above),
                None => {
                    nodes[below].parent = Some(above);
                    nodes[above].children.push(below);
                }
            }
        }
    }
    let lex_keys: Vec<String> =
        nodes.iter().map(|nd| space.point_id(space.lex_least(&nd.members)).to_string()).collect();
    for node in &mut nodes {
        node.children.sort_by(|&a, &b| lex_keys[a].cmp(&lex_keys[b]));
        debug_assert!(node.children.len() != 1);
    }
    debug_assert_eq!(nodes[0].members.len(), n);
    debug_assert!(nodes.iter().all(|nd| nd.is_leaf() == nd.is_trivial()));
    NerveTree { nodes }
}

/// The sons of a nontrivial ball: the open balls of radius `diam(B)` inside
/// it. They partition the ball and there are at least two of them.
pub fn sons<V: Value>(space: &Space<V>, ball: &Ball<V>) -> Result<Vec<Ball<V>>, Error> {
    let r = ball.diameter();
    if *r == V::zero() {
        return Err(Error::TrivialBall);
    }
    let mut remaining: BTreeSet<usize> = ball.members().clone();
    let mut parts: Vec<Ball<V>> = Vec::new();
    while let Some(&x) = remaining.iter().next() {
        let son: BTreeSet<usize> =
            space.ball_set(x, r, Openness::Open).intersection(ball.members()).copied().collect();
        debug_assert!(son.contains(&x));
        for m in &son {
            remaining.remove(m);
        }
        parts.push(space.ball_from_set(son, Openness::Open));
    }
    parts.sort_by(|a, b| {
        space.point_id(space.lex_least(a.members())).cmp(space.point_id(space.lex_least(b.members())))
    });
    debug_assert!(parts.len() >= 2);
    Ok(parts)
}

/// The degree data of a space: son counts per nontrivial nerve ball and
/// their maximum per radius.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence<V> {
    per_ball: BTreeMap<BTreeSet<usize>, usize>,
    per_radius: BTreeMap<V, usize>,
}

impl<V: Value> DegreeSequence<V> {
    /// Son count of a nontrivial nerve ball, keyed by member set.
    pub fn per_ball(&self) -> &BTreeMap<BTreeSet<usize>, usize> {
        &self.per_ball
    }

    /// Maximum son count over the nerve balls of each nonzero radius.
    pub fn per_radius(&self) -> &BTreeMap<V, usize> {
        &self.per_radius
    }
}

/// Computes the degree sequence. The maximum is used in place of the
/// supremum since every space here is finite.
pub fn degree_sequence<V: Value>(space: &Space<V>) -> DegreeSequence<V> {
    let tree = build_nerve(space);
    degree_sequence_of(&tree)
}

pub(crate) fn degree_sequence_of<V: Value>(tree: &NerveTree<V>) -> DegreeSequence<V> {
    let mut per_ball = BTreeMap::new();
    let mut per_radius: BTreeMap<V, usize> = BTreeMap::new();
    for node in tree.nodes() {
        if node.is_trivial() {
            continue;
        }
        let count = node.children().len();
        debug_assert!(count >= 2);
        per_ball.insert(node.members().clone(), count);
        let entry = per_radius.entry(node.diameter().clone()).or_insert(0);
        *entry = (*entry).max(count);
    }
    DegreeSequence { per_ball, per_radius }
}

/// The past of a subset: the diameters of the nerve balls containing it.
pub fn past<V: Value>(space: &Space<V>, subset: &BTreeSet<usize>) -> Result<SpectrumSet<V>, Error> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let tree = build_nerve(space);
    Ok(past_in(&tree, subset))
}

pub(crate) fn past_in<V: Value>(tree: &NerveTree<V>, subset: &BTreeSet<usize>) -> SpectrumSet<V> {
    tree.nodes()
        .iter()
        .filter(|n| subset.is_subset(&n.members))
        .map(|n| n.diameter.clone())
        .collect()
}

/// Whether two balls of one space are similar: same kind, and some point of
/// one has the same spectrum as some point of the other.
///
/// The equivalent criterion — same past, and the multispectra of the two
/// restrictions intersect — is evaluated as well, and the two verdicts are
/// asserted to agree.
pub fn similar<V: Value>(space: &Space<V>, b0: &Ball<V>, b1: &Ball<V>) -> bool {
    let tree = build_nerve(space);
    similar_in(space, &tree, b0, b1)
}

pub(crate) fn similar_in<V: Value>(
    space: &Space<V>,
    tree: &NerveTree<V>,
    b0: &Ball<V>,
    b1: &Ball<V>,
) -> bool {
    let by_definition = b0.kind() == b1.kind() && {
        let spectra1: BTreeSet<SpectrumSet<V>> =
            b1.members().iter().map(|&x| space.spectrum_at(x)).collect();
        b0.members().iter().any(|&x| spectra1.contains(&space.spectrum_at(x)))
    };

    let by_lemma = past_in(tree, b0.members()) == past_in(tree, b1.members()) && {
        let ms0 = restricted_multispectrum(space, b0.members());
        let ms1 = restricted_multispectrum(space, b1.members());
        ms0.intersection(&ms1).next().is_some()
    };

    assert_eq!(
        by_definition, by_lemma,
        "similarity criteria disagree on {} / {}",
        space.format_set(b0.members()),
        space.format_set(b1.members())
    );
    by_definition
}

/// The multispectrum of the subspace induced on a subset.
pub fn restricted_multispectrum<V: Value>(
    space: &Space<V>,
    subset: &BTreeSet<usize>,
) -> BTreeSet<SpectrumSet<V>> {
    let (sub, _) = space.restrict(subset).expect("nonempty subset");
    sub.multispectrum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, Rational};

    fn t3() -> Space<Rational> {
        Space::from_entries(
            &["a", "b", "c"],
            &[("a", "b", rat(1, 2)), ("a", "c", rat(1, 1)), ("b", "c", rat(1, 1))],
        )
        .unwrap()
    }

    // 2-bit Cantor truncation: d(x, y) = 1/(first differing index + 1).
    fn c4() -> Space<Rational> {
        Space::from_entries(
            &["00", "01", "10", "11"],
            &[
                ("00", "01", rat(1, 2)),
                ("00", "10", rat(1, 1)),
                ("00", "11", rat(1, 1)),
                ("01", "10", rat(1, 1)),
                ("01", "11", rat(1, 1)),
                ("10", "11", rat(1, 2)),
            ],
        )
        .unwrap()
    }

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    #[test]
    fn nerve_of_t3() {
        let s = t3();
        let tree = build_nerve(&s);
        assert_eq!(tree.len(), 5);
        assert_eq!(tree.node(tree.root()).members(), &set(&[0, 1, 2]));
        assert_eq!(*tree.node(tree.root()).diameter(), rat(1, 1));
        let ab = tree.find(&set(&[0, 1])).unwrap();
        assert_eq!(*tree.node(ab).diameter(), rat(1, 2));
        assert_eq!(tree.node(ab).parent(), Some(tree.root()));
        let leaves: Vec<_> = tree.nodes().iter().filter(|n| n.is_leaf()).collect();
        assert_eq!(leaves.len(), 3);
        assert!(leaves.iter().all(|n| *n.diameter() == rat(0, 1)));
    }

    #[test]
    fn spectra_of_c4() {
        let s = c4();
        let spec: Vec<Rational> = s.spectrum().into_iter().collect();
        assert_eq!(spec, vec![rat(0, 1), rat(1, 2), rat(1, 1)]);
        assert_eq!(s.multispectrum().len(), 1); // all points look alike
    }

    #[test]
    fn nerve_of_c4() {
        let s = c4();
        let tree = build_nerve(&s);
        assert_eq!(tree.len(), 7);
        let mid: Vec<_> =
            tree.nodes().iter().filter(|n| *n.diameter() == rat(1, 2)).collect();
        assert_eq!(mid.len(), 2);
        assert!(mid.iter().all(|n| n.members().len() == 2));
        assert_eq!(tree.node(tree.root()).children().len(), 2);
    }

    #[test]
    fn nerve_of_one_point() {
        let s: Space<Rational> = Space::from_entries(&["a"], &[]).unwrap();
        let tree = build_nerve(&s);
        assert_eq!(tree.len(), 1);
        assert!(tree.node(0).is_leaf());
        assert_eq!(*tree.node(0).diameter(), rat(0, 1));
    }

    #[test]
    fn sons_of_t3_and_c4() {
        let s = t3();
        let root = s.ball(0, &rat(1, 1), Openness::Closed).unwrap();
        let parts = sons(&s, &root).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].members(), &set(&[0, 1]));
        assert_eq!(parts[1].members(), &set(&[2]));

        let ab = s.ball(0, &rat(1, 2), Openness::Closed).unwrap();
        let parts = sons(&s, &ab).unwrap();
        assert_eq!(parts.len(), 2);
        assert!(parts.iter().all(|p| p.members().len() == 1));

        let c = c4();
        let root = c.ball(0, &rat(1, 1), Openness::Closed).unwrap();
        let parts = sons(&c, &root).unwrap();
        assert_eq!(parts.len(), 2);
        assert!(parts.iter().all(|p| p.members().len() == 2));

        let leaf = s.ball(2, &rat(0, 1), Openness::Closed).unwrap();
        assert!(matches!(sons(&s, &leaf), Err(Error::TrivialBall)));
    }

    #[test]
    fn degree_sequences() {
        let s = t3();
        let deg = degree_sequence(&s);
        let expected: BTreeMap<Rational, usize> =
            [(rat(1, 2), 2), (rat(1, 1), 2)].into_iter().collect();
        assert_eq!(deg.per_radius(), &expected);
        assert_eq!(degree_sequence(&c4()).per_radius(), &expected);
    }

    #[test]
    fn past_examples() {
        let s = t3();
        let p: Vec<Rational> = past(&s, &set(&[0])).unwrap().into_iter().collect();
        assert_eq!(p, vec![rat(0, 1), rat(1, 2), rat(1, 1)]);
        let p: Vec<Rational> = past(&s, &set(&[2])).unwrap().into_iter().collect();
        assert_eq!(p, vec![rat(0, 1), rat(1, 1)]);
        let p: Vec<Rational> = past(&s, &set(&[0, 2])).unwrap().into_iter().collect();
        assert_eq!(p, vec![rat(1, 1)]);
        assert!(matches!(past(&s, &BTreeSet::new()), Err(Error::EmptySubset)));
    }

    #[test]
    fn similarity_in_t3() {
        let s = t3();
        let a = s.ball(0, &rat(0, 1), Openness::Closed).unwrap();
        let b = s.ball(1, &rat(0, 1), Openness::Closed).unwrap();
        let c = s.ball(2, &rat(0, 1), Openness::Closed).unwrap();
        assert!(similar(&s, &a, &b)); // equal spectra {0, 1/2, 1}
        assert!(!similar(&s, &a, &c)); // spectra differ
        assert!(similar(&s, &a, &a));
        let root = s.ball(0, &rat(1, 1), Openness::Closed).unwrap();
        assert!(similar(&s, &root, &root));
    }
}
