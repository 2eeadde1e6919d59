//! Finite ultrametric spaces: validated construction, balls, spectra,
//! diameters and restrictions.
//!
//! Points are identified by strings; the order in which they are given is
//! canonical and fixes every enumeration made downstream (tie-breaking in
//! the extension algorithm, the embedding recursion, CLI output). Distances
//! are stored exactly, in a condensed upper-triangle matrix.

use std::collections::{BTreeMap, BTreeSet};


use crate::{Error, Value};

/// A sorted set of distance values; spectra always contain 0.
pub type SpectrumSet<V> = BTreeSet<V>;

/// Whether a ball was produced as an open or a closed ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Openness {
    Open,
    Closed,
}

/// A ball given by its explicit member set.
///
/// Many (center, radius) pairs denote the same ball, so equality is
/// member-set equality; the `openness` tag only records how the ball was
/// produced. The kind of a ball is the pair (diameter, attained); in a
/// finite space every nonempty set attains its diameter, so `attained` is
/// always true and is kept so the vocabulary degenerates predictably.
#[derive(Debug, Clone)]
pub struct Ball<V> {
    members: BTreeSet<usize>,
    diameter: V,
    attained: bool,
    openness: Openness,
}

impl<V: Value> Ball<V> {
    pub(crate) fn new(members: BTreeSet<usize>, diameter: V, openness: Openness) -> Self {
        debug_assert!(!members.is_empty());
        Ball { members, diameter, attained: true, openness }
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn diameter(&self) -> &V {
        &self.diameter
    }

    pub fn attained(&self) -> bool {
        self.attained
    }

    pub fn openness(&self) -> Openness {
        self.openness
    }

    /// The kind of the ball: its diameter together with the attainment flag.
    pub fn kind(&self) -> (&V, bool) {
        (&self.diameter, self.attained)
    }

    pub fn is_trivial(&self) -> bool {
        self.members.len() == 1
    }
}

impl<V: PartialEq> PartialEq for Ball<V> {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members
    }
}

impl<V: Eq> Eq for Ball<V> {}

/// A finite ultrametric space with exact distance values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Space<V> {
    points: Vec<String>,
    /// Condensed upper triangle: entry for i < j at `pair_index(n, i, j)`.
    dist: Vec<V>,
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl<V: Value> Space<V> {
    /// Validates a distance table and builds the space.
    ///
    /// Every unordered pair of distinct points must appear exactly once,
    /// every distance must be positive, and the strong triangle inequality
    /// must hold on all triples.
    pub fn from_entries<S: AsRef<str>>(
        points: &[S],
        entries: &[(S, S, V)],
    ) -> Result<Self, Error> {
        if points.is_empty() {
            return Err(Error::NoPoints);
        }
        let points: Vec<String> = points.iter().map(|p| p.as_ref().to_string()).collect();
        let mut index = BTreeMap::new();
        for (i, p) in points.iter().enumerate() {
            if index.insert(p.clone(), i).is_some() {
                return Err(Error::DuplicatePoint(p.clone()));
            }
        }
        let n = points.len();
        let mut dist: Vec<Option<V>> = vec![None; n * (n - 1) / 2];
        for (a, b, v) in entries {
            let (a, b) = (a.as_ref(), b.as_ref());
            let ia = *index.get(a).ok_or_else(|| Error::UnknownPoint(a.to_string()))?;
            let ib = *index.get(b).ok_or_else(|| Error::UnknownPoint(b.to_string()))?;
            if ia == ib {
                return Err(Error::SelfPair(a.to_string()));
            }
            if *v <= V::zero() {
                return Err(Error::NonPositiveDistance(
                    a.to_string(),
                    b.to_string(),
                    v.to_string(),
                ));
            }
            let slot = &mut dist[pair_index(n, ia.min(ib), ia.max(ib))];
            if slot.is_some() {
                return Err(Error::DuplicatePair(a.to_string(), b.to_string()));
            }
            *slot = Some(v.clone());
        }
        for i in 0..n {
            for j in i + 1..n {
                if dist[pair_index(n, i, j)].is_none() {
                    return Err(Error::MissingPair(points[i].clone(), points[j].clone()));
                }
            }
        }
        let space = Space {
            points,
            dist: dist.into_iter().map(Option::unwrap).collect(),
        };
        space.check_strong_triangle()?;
        Ok(space)
    }

    /// Builds a space from a distance function, without running validation.
    ///
    /// Callers guarantee the result is ultrametric (dendrogram readouts,
    /// function-space products, restrictions of valid spaces).
    pub(crate) fn from_dist_fn(points: Vec<String>, f: impl Fn(usize, usize) -> V) -> Self {
        let n = points.len();
        debug_assert!(n > 0);
        let mut dist = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                dist.push(f(i, j));
            }
        }
        Space { points, dist }
    }

    /// Strong-triangle check in O(n^2): the matrix is ultrametric iff every
    /// distance equals the maximum edge weight on the path through a
    /// minimax (minimum) spanning tree, the single-linkage certificate. A
    /// mismatch is always `d(x,y) > path max` (the direct edge is itself a
    /// path), and walking the tree path extracts a violating triple.
    fn check_strong_triangle(&self) -> Result<(), Error> {
        let n = self.len();
        if n < 3 {
            return Ok(());
        }
        // Prim, deterministic tie-breaking by point order.
        let mut in_tree = vec![false; n];
        in_tree[0] = true;
        let mut near: Vec<usize> = vec![0; n];
        let mut near_d: Vec<V> = (0..n).map(|i| self.dist(0, i)).collect();
        let mut adjacent: Vec<Vec<usize>> = vec![Vec::new(); n];
        for _ in 1..n {
            let u = (0..n)
                .filter(|&i| !in_tree[i])
                .min_by(|&a, &b| near_d[a].cmp(&near_d[b]).then(a.cmp(&b)))
                .unwrap();
            in_tree[u] = true;
            adjacent[u].push(near[u]);
            adjacent[near[u]].push(u);
            for v in 0..n {
                if !in_tree[v] {
                    let d = self.dist(u, v);
                    if d < near_d[v] {
                        near_d[v] = d;
                        near[v] = u;
                    }
                }
            }
        }
        // Path maxima from every root, compared against the direct distance.
        for x in 0..n {
            let mut maxima: Vec<Option<V>> = vec![None; n];
            let mut toward: Vec<usize> = vec![usize::MAX; n];
            maxima[x] = Some(V::zero());
            let mut stack = vec![x];
            while let Some(u) = stack.pop() {
                for &v in &adjacent[u] {
                    if maxima[v].is_none() {
                        let m = maxima[u].clone().unwrap().max(self.dist(u, v));
                        maxima[v] = Some(m);
                        toward[v] = u;
                        stack.push(v);
                    }
                }
            }
            for (y, m) in maxima.iter().enumerate() {
                if y == x {
                    continue;
                }
                let m = m.as_ref().unwrap();
                if self.dist(x, y) > *m {
                    return Err(self.extract_violation(x, y, &toward));
                }
                debug_assert!(self.dist(x, y) == *m);
            }
        }
        Ok(())
    }

    /// Walks the tree path of a mismatching pair down to a violating
    /// triple: the first path vertex strictly closer to `y` than the
    /// current endpoint witnesses the strict maximum.
    fn extract_violation(&self, x: usize, y: usize, toward: &[usize]) -> Error {
        let mut path = vec![y];
        while *path.last().unwrap() != x {
            path.push(toward[*path.last().unwrap()]);
        }
        path.reverse(); // x .. y
        let mut u = path[0];
        for &z in &path[1..path.len() - 1] {
            if self.dist(z, y) < self.dist(u, y) {
                let (p, q) = if u < y { (u, y) } else { (y, u) };
                let longest = self.dist(u, y);
                let other = self.dist(p, z).max(self.dist(z, q));
                debug_assert!(longest > other);
                return Error::TriangleViolation(
                    self.points[p].clone(),
                    self.points[q].clone(),
                    self.points[z].clone(),
                    longest.to_string(),
                    other.to_string(),
                );
            }
            u = z;
        }
        unreachable!("a path-max mismatch always yields a violating triple");
    }

    /// Direct cubic scan over all triples; the test oracle for
    /// `check_strong_triangle`. Returns the first violating triple as
    /// (strict-max endpoints in point order, witness).
    #[doc(hidden)]
    pub fn strong_triangle_violation_naive(&self) -> Option<(usize, usize, usize)> {
        let n = self.len();
        for i in 0..n {
            for j in i + 1..n {
                let dij = self.dist(i, j);
                for k in j + 1..n {
                    let dik = self.dist(i, k);
                    let djk = self.dist(j, k);
                    // Ultrametric iff the maximum of the three sides occurs twice.
                    let (a, b, c) = (&dij, &dik, &djk);
                    let max = a.max(b).max(c);
                    let times = [a, b, c].iter().filter(|v| **v == max).count();
                    if times < 2 {
                        return Some(if a == max {
                            (i, j, k)
                        } else if b == max {
                            (i, k, j)
                        } else {
                            (j, k, i)
                        });
                    }
                }
            }
        }
        None
    }

    /// Re-checks the space invariants: positive off-diagonal distances and
    /// the strong triangle inequality on every triple.
    pub fn validate(&self) -> Result<(), Error> {
        let n = self.len();
        for i in 0..n {
            for j in i + 1..n {
                let d = self.dist(i, j);
                if d <= V::zero() {
                    return Err(Error::NonPositiveDistance(
                        self.points[i].clone(),
                        self.points[j].clone(),
                        d.to_string(),
                    ));
                }
            }
        }
        self.check_strong_triangle()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a space always has at least one point
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn point_id(&self, i: usize) -> &str {
        &self.points[i]
    }

    /// Index of a point identifier, or `UnknownPoint`.
    pub fn point_index(&self, id: &str) -> Result<usize, Error> {
        self.points
            .iter()
            .position(|p| p == id)
            .ok_or_else(|| Error::UnknownPoint(id.to_string()))
    }

    /// The distance between two points (zero on the diagonal).
    pub fn dist(&self, i: usize, j: usize) -> V {
        if i == j {
            return V::zero();
        }
        let n = self.len();
        self.dist[pair_index(n, i.min(j), i.max(j))].clone()
    }

    /// The spectrum of a point: all distances from it, always containing 0.
    pub fn spectrum_at(&self, i: usize) -> SpectrumSet<V> {
        let mut set: SpectrumSet<V> = (0..self.len()).map(|j| self.dist(i, j)).collect();
        set.insert(V::zero());
        set
    }

    /// The spectrum of the space: the union of all point spectra.
    pub fn spectrum(&self) -> SpectrumSet<V> {
        let mut set = SpectrumSet::new();
        set.insert(V::zero());
        set.extend(self.dist.iter().cloned());
        set
    }

    /// The multispectrum: the set of distinct point spectra.
    pub fn multispectrum(&self) -> BTreeSet<SpectrumSet<V>> {
        (0..self.len()).map(|i| self.spectrum_at(i)).collect()
    }

    /// Member set of the ball of the given center, radius and openness.
    /// May be empty (open ball of radius 0).
    pub fn ball_set(&self, center: usize, radius: &V, openness: Openness) -> BTreeSet<usize> {
        (0..self.len())
            .filter(|&j| {
                let d = self.dist(center, j);
                match openness {
                    Openness::Open => d < *radius,
                    Openness::Closed => d <= *radius,
                }
            })
            .collect()
    }

    /// The ball of the given center and radius, with its diameter computed.
    pub fn ball(&self, center: usize, radius: &V, openness: Openness) -> Result<Ball<V>, Error> {
        let members = self.ball_set(center, radius, openness);
        if members.is_empty() {
            return Err(Error::EmptyBall);
        }
        let diameter = self.diameter_of(&members)?;
        Ok(Ball::new(members, diameter, openness))
    }

    pub(crate) fn ball_from_set(&self, members: BTreeSet<usize>, openness: Openness) -> Ball<V> {
        let diameter = self.diameter_of(&members).expect("nonempty member set");
        Ball::new(members, diameter, openness)
    }

    /// The diameter of a subset: the maximum pairwise distance.
    pub fn diameter_of(&self, subset: &BTreeSet<usize>) -> Result<V, Error> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        let mut max = V::zero();
        let members: Vec<usize> = subset.iter().copied().collect();
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                let d = self.dist(i, j);
                if d > max {
                    max = d;
                }
            }
        }
        Ok(max)
    }

    /// The diameter of the whole space.
    pub fn diameter(&self) -> V {
        self.dist.iter().cloned().max().unwrap_or_else(V::zero)
    }

    /// The subspace induced on a subset, keeping relative point order.
    /// Returns the restricted space and the map new index -> old index.
    pub fn restrict(&self, subset: &BTreeSet<usize>) -> Result<(Space<V>, Vec<usize>), Error> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        let old: Vec<usize> = subset.iter().copied().collect();
        debug_assert!(*old.last().unwrap() < self.len());
        let points = old.iter().map(|&i| self.points[i].clone()).collect();
        let old_for_f = old.clone();
        let space = Space::from_dist_fn(points, |i, j| self.dist(old_for_f[i], old_for_f[j]));
        Ok((space, old))
    }

    /// The member of a set whose identifier is lexicographically least.
    pub(crate) fn lex_least(&self, set: &BTreeSet<usize>) -> usize {
        *set.iter()
            .min_by_key(|&&i| &self.points[i])
            .expect("nonempty set")
    }

    /// Formats a member set as `{a, b, c}` in point order.
    pub fn format_set(&self, set: &BTreeSet<usize>) -> String {
        let ids: Vec<&str> = set.iter().map(|&i| self.point_id(i)).collect();
        format!("{{{}}}", ids.join(", "))
    }
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

    #[test]
    fn t3_is_valid() {
        let s = t3();
        assert_eq!(s.len(), 3);
        assert_eq!(s.dist(0, 1), rat(1, 2));
        assert_eq!(s.dist(1, 0), rat(1, 2));
        assert_eq!(s.dist(2, 2), rat(0, 1));
    }

    #[test]
    fn one_point_space_is_valid() {
        let s: Space<Rational> = Space::from_entries(&["a"], &[]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.diameter(), rat(0, 1));
    }

    #[test]
    fn triangle_violation_names_the_triple() {
        let err = Space::from_entries(
            &["a", "b", "c"],
            &[("a", "b", rat(1, 2)), ("a", "c", rat(1, 1)), ("b", "c", rat(1, 3))],
        )
        .unwrap_err();
        match err {
            Error::TriangleViolation(x, y, z, _, _) => {
                assert_eq!((x.as_str(), y.as_str(), z.as_str()), ("a", "c", "b"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn input_errors_are_detected() {
        let dup = Space::from_entries(
            &["a", "b"],
            &[("a", "b", rat(1, 1)), ("b", "a", rat(1, 1))],
        );
        assert!(matches!(dup, Err(Error::DuplicatePair(_, _))));

        let missing = Space::<Rational>::from_entries(&["a", "b"], &[]);
        assert!(matches!(missing, Err(Error::MissingPair(_, _))));

        let neg = Space::from_entries(&["a", "b"], &[("a", "b", rat(-1, 2))]);
        assert!(matches!(neg, Err(Error::NonPositiveDistance(_, _, _))));

        let unknown = Space::from_entries(&["a", "b"], &[("a", "x", rat(1, 1))]);
        assert!(matches!(unknown, Err(Error::UnknownPoint(_))));

        let selfpair = Space::from_entries(&["a", "b"], &[("a", "a", rat(1, 1))]);
        assert!(matches!(selfpair, Err(Error::SelfPair(_))));

        let duppoint = Space::<Rational>::from_entries(&["a", "a"], &[]);
        assert!(matches!(duppoint, Err(Error::DuplicatePoint(_))));
    }

    #[test]
    fn spectra_of_t3() {
        let s = t3();
        let spec_a: Vec<Rational> = s.spectrum_at(0).into_iter().collect();
        assert_eq!(spec_a, vec![rat(0, 1), rat(1, 2), rat(1, 1)]);
        let spec_c: Vec<Rational> = s.spectrum_at(2).into_iter().collect();
        assert_eq!(spec_c, vec![rat(0, 1), rat(1, 1)]);
        assert_eq!(s.spectrum().len(), 3);
        assert_eq!(s.multispectrum().len(), 2);
    }

    #[test]
    fn one_point_spectrum_is_zero() {
        let s: Space<Rational> = Space::from_entries(&["a"], &[]).unwrap();
        let spec: Vec<Rational> = s.spectrum_at(0).into_iter().collect();
        assert_eq!(spec, vec![rat(0, 1)]);
    }

    #[test]
    fn balls_of_t3() {
        let s = t3();
        let closed = s.ball(0, &rat(1, 1), Openness::Closed).unwrap();
        assert_eq!(closed.members().len(), 3);
        assert_eq!(*closed.diameter(), rat(1, 1));
        assert!(closed.attained());

        let open = s.ball(0, &rat(1, 1), Openness::Open).unwrap();
        let members: Vec<usize> = open.members().iter().copied().collect();
        assert_eq!(members, vec![0, 1]);
        assert_eq!(*open.diameter(), rat(1, 2));

        let point = s.ball(0, &rat(0, 1), Openness::Closed).unwrap();
        assert_eq!(point.members().len(), 1);
        assert_eq!(*point.diameter(), rat(0, 1));

        assert!(matches!(s.ball(0, &rat(0, 1), Openness::Open), Err(Error::EmptyBall)));
    }

    #[test]
    fn ball_equality_is_member_set_equality() {
        let s = t3();
        let open = s.ball(0, &rat(1, 1), Openness::Open).unwrap();
        let closed = s.ball(1, &rat(1, 2), Openness::Closed).unwrap();
        assert_eq!(open, closed); // both are {a, b}
    }

    #[test]
    fn diameters_of_subsets() {
        let s = t3();
        let ab: BTreeSet<usize> = [0, 1].into_iter().collect();
        let ac: BTreeSet<usize> = [0, 2].into_iter().collect();
        let a: BTreeSet<usize> = [0].into_iter().collect();
        assert_eq!(s.diameter_of(&ab).unwrap(), rat(1, 2));
        assert_eq!(s.diameter_of(&ac).unwrap(), rat(1, 1));
        assert_eq!(s.diameter_of(&a).unwrap(), rat(0, 1));
        assert!(matches!(s.diameter_of(&BTreeSet::new()), Err(Error::EmptySubset)));
    }

    #[test]
    fn restriction_keeps_order_and_distances() {
        let s = t3();
        let sub: BTreeSet<usize> = [0, 2].into_iter().collect();
        let (r, old) = s.restrict(&sub).unwrap();
        assert_eq!(r.points(), ["a", "c"]);
        assert_eq!(old, vec![0, 2]);
        assert_eq!(r.dist(0, 1), rat(1, 1));
    }
}
