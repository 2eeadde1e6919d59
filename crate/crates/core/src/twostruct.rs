//! Symmetric labelled 2-structures, modules, and the decomposition tree.
//!
//! A module is a subset whose elements are indistinguishable from outside:
//! every external element sees one label on the whole subset. Strong
//! modules are comparable to every module they meet; robust modules are the
//! least strong modules containing some pair. For a 2-structure read off an
//! ultrametric space (labels = distances) the strong modules are exactly
//! the balls, the robust modules the closed balls attaining their diameter,
//! and the tree of robust modules with its pair labelling is the nerve.
//!
//! The brute-force enumerators here (all subsets) are the oracles the ball
//! formulas are checked against; they are gated by size bounds.

use std::collections::{BTreeMap, BTreeSet};

use crate::space::Openness;
use crate::{Error, Space, Value};

/// Default bound for subset enumeration.
pub const DEFAULT_MODULE_BOUND: usize = 12;
/// Default bound for the hereditary-decomposability check, which walks all
/// subsets of all subsets.
pub const DEFAULT_HEREDITARY_BOUND: usize = 8;

/// A symmetric edge-labelled structure: one label per unordered pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoStructure<V> {
    elements: Vec<String>,
    labels: Vec<V>, // condensed upper triangle
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl<V: Value> TwoStructure<V> {
    /// Builds a structure from explicit pair labels, each unordered pair
    /// exactly once.
    pub fn new<S: AsRef<str>>(elements: &[S], entries: &[(S, S, V)]) -> Result<Self, Error> {
        if elements.is_empty() {
            return Err(Error::NoPoints);
        }
        let elements: Vec<String> = elements.iter().map(|e| e.as_ref().to_string()).collect();
        let mut index = BTreeMap::new();
        for (i, e) in elements.iter().enumerate() {
            if index.insert(e.clone(), i).is_some() {
                return Err(Error::DuplicatePoint(e.clone()));
            }
        }
        let n = elements.len();
        let mut labels: Vec<Option<V>> = vec![None; n * (n - 1) / 2];
        for (a, b, v) in entries {
            let (a, b) = (a.as_ref(), b.as_ref());
            let ia = *index.get(a).ok_or_else(|| Error::UnknownElement(a.to_string()))?;
            let ib = *index.get(b).ok_or_else(|| Error::UnknownElement(b.to_string()))?;
            if ia == ib {
                return Err(Error::SelfPair(a.to_string()));
            }
            let slot = &mut labels[pair_index(n, ia.min(ib), ia.max(ib))];
            if slot.is_some() {
                return Err(Error::DuplicatePair(a.to_string(), b.to_string()));
            }
            *slot = Some(v.clone());
        }
        for i in 0..n {
            for j in i + 1..n {
                if labels[pair_index(n, i, j)].is_none() {
                    return Err(Error::MissingPair(elements[i].clone(), elements[j].clone()));
                }
            }
        }
        Ok(TwoStructure { elements, labels: labels.into_iter().map(Option::unwrap).collect() })
    }

    /// An ultrametric space as a 2-structure: the labels are the distances.
    pub fn from_space(space: &Space<V>) -> Self {
        let n = space.len();
        let mut labels = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                labels.push(space.dist(i, j));
            }
        }
        TwoStructure { elements: space.points().to_vec(), labels }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn element_id(&self, i: usize) -> &str {
        &self.elements[i]
    }

    pub fn element_index(&self, id: &str) -> Result<usize, Error> {
        self.elements
            .iter()
            .position(|e| e == id)
            .ok_or_else(|| Error::UnknownElement(id.to_string()))
    }

    /// The label of a pair of distinct elements.
    pub fn label(&self, i: usize, j: usize) -> V {
        assert!(i != j);
        let n = self.len();
        self.labels[pair_index(n, i.min(j), i.max(j))].clone()
    }

    /// Whether a subset is a module: every outside element sees a single
    /// label on it. The empty set, singletons and the whole set always are.
    pub fn is_module(&self, subset: &BTreeSet<usize>) -> bool {
        let members: Vec<usize> = subset.iter().copied().collect();
        debug_assert!(members.iter().all(|&i| i < self.len()));
        if members.len() < 2 {
            return true;
        }
        let first = members[0];
        (0..self.len())
            .filter(|x| !subset.contains(x))
            .all(|x| members[1..].iter().all(|&y| self.label(x, first) == self.label(x, y)))
    }

    /// All modules, by checking every subset. Includes the empty set.
    /// Subset enumeration is never attempted past 24 elements, whatever
    /// the requested bound.
    pub fn enumerate_modules(&self, bound: usize) -> Result<Vec<BTreeSet<usize>>, Error> {
        let n = self.len();
        let bound = bound.min(24);
        if n > bound {
            return Err(Error::TooLarge { size: n, bound });
        }
        let mut out = Vec::new();
        for mask in 0u64..(1 << n) {
            let subset: BTreeSet<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            if self.is_module(&subset) {
                out.push(subset);
            }
        }
        Ok(out)
    }

    /// Nonempty strong modules, by filtering the brute-force module list:
    /// a module is strong if it is comparable to every module it meets.
    pub fn strong_modules_brute(&self, bound: usize) -> Result<Vec<BTreeSet<usize>>, Error> {
        let modules = self.enumerate_modules(bound)?;
        Ok(modules
            .iter()
            .filter(|m| !m.is_empty())
            .filter(|m| {
                modules.iter().all(|other| {
                    m.intersection(other).next().is_none()
                        || m.is_subset(other)
                        || other.is_subset(m)
                })
            })
            .cloned()
            .collect())
    }

    /// Robust modules, brute force: the least strong module containing each
    /// pair of distinct elements. Least here is by intersection, since
    /// strong modules are closed under it.
    pub fn robust_modules_brute(&self, bound: usize) -> Result<Vec<BTreeSet<usize>>, Error> {
        let strong = self.strong_modules_brute(bound)?;
        let n = self.len();
        let mut out: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        for x in 0..n {
            for y in x + 1..n {
                out.insert(least_strong_containing(&strong, x, y));
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Whether every induced substructure on at least three elements has a
    /// nontrivial module. The double subset walk is never attempted past
    /// 16 elements, whatever the requested bound.
    pub fn is_hereditary_decomposable(&self, bound: usize) -> Result<bool, Error> {
        let n = self.len();
        let bound = bound.min(16);
        if n > bound {
            return Err(Error::TooLarge { size: n, bound });
        }
        for mask in 0u64..(1 << n) {
            let subset: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            let k = subset.len();
            if k < 3 {
                continue;
            }
            let mut found = false;
            'inner: for inner in 1u64..(1 << k) {
                let module: Vec<usize> =
                    (0..k).filter(|&i| inner & (1 << i) != 0).map(|i| subset[i]).collect();
                if module.len() < 2 || module.len() == k {
                    continue;
                }
                let module_set: BTreeSet<usize> = module.iter().copied().collect();
                for &x in &subset {
                    if module_set.contains(&x) {
                        continue;
                    }
                    for &y in &module[1..] {
                        if self.label(x, module[0]) != self.label(x, y) {
                            continue 'inner;
                        }
                    }
                }
                found = true;
                break;
            }
            if !found {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn least_strong_containing(
    strong: &[BTreeSet<usize>],
    x: usize,
    y: usize,
) -> BTreeSet<usize> {
    let mut least: Option<&BTreeSet<usize>> = None;
    for m in strong {
        if m.contains(&x) && m.contains(&y) && least.is_none_or(|l| m.len() < l.len()) {
            least = Some(m);
        }
    }
    least.expect("the whole set is a strong module containing every pair").clone()
}

/// The least module of a space containing a subset: the union of the open
/// balls of radius `diam(A)` centered in `A` (with `A` itself adjoined,
/// which only matters for singletons).
pub fn least_module<V: Value>(
    space: &Space<V>,
    subset: &BTreeSet<usize>,
) -> Result<BTreeSet<usize>, Error> {
    let diameter = space.diameter_of(subset)?;
    let mut out = subset.clone();
    for &a in subset {
        out.extend(space.ball_set(a, &diameter, Openness::Open));
    }
    Ok(out)
}

/// The strong modules of a space: all balls (open and closed, every center
/// and spectrum radius) together with the whole set.
pub fn strong_modules<V: Value>(space: &Space<V>) -> Vec<BTreeSet<usize>> {
    let mut out: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    out.insert((0..space.len()).collect());
    for a in 0..space.len() {
        for r in space.spectrum() {
            out.insert(space.ball_set(a, &r, Openness::Closed));
            let open = space.ball_set(a, &r, Openness::Open);
            if !open.is_empty() {
                out.insert(open);
            }
        }
    }
    out.into_iter().collect()
}

/// The robust modules of a space: the closed balls attaining their
/// diameter, i.e. the balls `B(a, d(a, b))` over pairs of distinct points.
/// The radii `d(a, b)` are exactly the nonzero spectrum values at `a`.
pub fn robust_modules<V: Value>(space: &Space<V>) -> Vec<BTreeSet<usize>> {
    let mut out: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    for a in 0..space.len() {
        for r in space.spectrum_at(a) {
            if r > V::zero() {
                out.insert(space.ball_set(a, &r, Openness::Closed));
            }
        }
    }
    out.into_iter().collect()
}

/// One node of a decomposition tree.
#[derive(Debug, Clone)]
pub struct DecompNode<V> {
    members: BTreeSet<usize>,
    label: Option<V>,
    parent: Option<usize>,
    children: Vec<usize>,
}

impl<V: Value> DecompNode<V> {
    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    /// The pair label of a nonsingleton node; singleton leaves carry none.
    pub fn label(&self) -> Option<&V> {
        self.label.as_ref()
    }

    pub fn parent(&self) -> Option<usize> {
        self.parent
    }

    pub fn children(&self) -> &[usize] {
        &self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// The tree of robust modules, with singleton leaves adjoined, labelled by
/// the pair value at each nonsingleton node.
#[derive(Debug, Clone)]
pub struct DecompositionTree<V> {
    nodes: Vec<DecompNode<V>>,
}

impl<V: Value> DecompositionTree<V> {
    pub fn nodes(&self) -> &[DecompNode<V>] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn node(&self, i: usize) -> &DecompNode<V> {
        &self.nodes[i]
    }

    fn assemble(
        element_ids: &[String],
        node_sets: Vec<(BTreeSet<usize>, Option<V>)>,
    ) -> Result<Self, Error> {
        let mut order = node_sets;
        let lex = |set: &BTreeSet<usize>| {
            set.iter().map(|&i| element_ids[i].as_str()).min().expect("nonempty node")
        };
        order.sort_by(|(ma, _), (mb, _)| {
            mb.len().cmp(&ma.len()).then_with(|| lex(ma).cmp(lex(mb)))
        });
        let mut nodes: Vec<DecompNode<V>> = order
            .into_iter()
            .map(|(members, label)| DecompNode { members, label, parent: None, children: Vec::new() })
            .collect();
        for i in 1..nodes.len() {
            let mut best: Option<usize> = None;
            for j in 0..nodes.len() {
                if i == j || nodes[j].members.len() <= nodes[i].members.len() {
                    continue;
                }
                if nodes[i].members.is_subset(&nodes[j].members)
                    && best.is_none_or(|b| nodes[j].members.len() < nodes[b].members.len())
                {
                    best = Some(j);
                }
            }
            // In a laminar family every non-root set has a parent.
            let parent = best.ok_or(Error::NotDecomposable)?;
            nodes[i].parent = Some(parent);
            nodes[parent].children.push(i);
        }
        // Laminarity check: siblings must be disjoint.
        for node in &nodes {
            for (a, &x) in node.children.iter().enumerate() {
                for &y in &node.children[a + 1..] {
                    let (mx, my) = (&nodes[x].members, &nodes[y].members);
                    if mx.intersection(my).next().is_some() {
                        return Err(Error::NotDecomposable);
                    }
                }
            }
        }
        let keys: Vec<String> = nodes.iter().map(|n| lex(&n.members).to_string()).collect();
        for node in &mut nodes {
            node.children.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
        }
        Ok(DecompositionTree { nodes })
    }
}

/// The decomposition tree of a space, through the ball formulas: nodes are
/// the robust modules plus singleton leaves, labelled by their diameters.
pub fn decomposition_tree_of_space<V: Value>(space: &Space<V>) -> DecompositionTree<V> {
    let mut sets: Vec<(BTreeSet<usize>, Option<V>)> = robust_modules(space)
        .into_iter()
        .map(|m| {
            let label = space.diameter_of(&m).expect("robust modules are nonempty");
            (m, Some(label))
        })
        .collect();
    for p in 0..space.len() {
        let singleton: BTreeSet<usize> = [p].into_iter().collect();
        if !sets.iter().any(|(m, _)| *m == singleton) {
            sets.push((singleton, None));
        }
    }
    DecompositionTree::assemble(space.points(), sets).expect("balls form a laminar family")
}

/// The decomposition tree of a symmetric hereditary decomposable
/// 2-structure, computed from the brute-force strong modules. Fails with
/// `NotDecomposable` when the pair labelling is inconsistent (the input was
/// not hereditary decomposable) and with `TooLarge` beyond the bound.
pub fn decomposition_tree<V: Value>(
    ts: &TwoStructure<V>,
    bound: usize,
) -> Result<DecompositionTree<V>, Error> {
    let strong = ts.strong_modules_brute(bound)?;
    let n = ts.len();
    let mut labels: BTreeMap<BTreeSet<usize>, V> = BTreeMap::new();
    for x in 0..n {
        for y in x + 1..n {
            let module = least_strong_containing(&strong, x, y);
            let label = ts.label(x, y);
            match labels.get(&module) {
                Some(existing) if *existing != label => return Err(Error::NotDecomposable),
                _ => {
                    labels.insert(module, label);
                }
            }
        }
    }
    let mut sets: Vec<(BTreeSet<usize>, Option<V>)> =
        labels.into_iter().map(|(m, l)| (m, Some(l))).collect();
    for p in 0..n {
        let singleton: BTreeSet<usize> = [p].into_iter().collect();
        if !sets.iter().any(|(m, _)| *m == singleton) {
            sets.push((singleton, None));
        }
    }
    DecompositionTree::assemble(ts.elements(), sets)
}

/// Whether a decomposition tree equals a nerve as a labelled tree, with the
/// singleton-leaf convention: node sets coincide, parents coincide, every
/// nonsingleton label equals the nerve diameter, and leaves are exactly the
/// singletons on both sides.
pub fn matches_nerve<V: Value>(
    tree: &DecompositionTree<V>,
    nerve: &crate::nerve::NerveTree<V>,
) -> bool {
    if tree.len() != nerve.len() {
        return false;
    }
    type Summary<'a, V> = BTreeMap<&'a BTreeSet<usize>, (Option<&'a BTreeSet<usize>>, Option<&'a V>)>;
    let dt: Summary<'_, V> = tree
        .nodes()
        .iter()
        .map(|n| {
            (n.members(), (n.parent().map(|p| tree.node(p).members()), n.label()))
        })
        .collect();
    let nv: Summary<'_, V> = nerve
        .nodes()
        .iter()
        .map(|n| {
            let label = if n.is_trivial() { None } else { Some(n.diameter()) };
            (n.members(), (n.parent().map(|p| nerve.node(p).members()), label))
        })
        .collect();
    dt == nv
}
