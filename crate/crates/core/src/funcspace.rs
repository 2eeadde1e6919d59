//! Function spaces with finitely supported points, and the canonical
//! embedding of a finite ultrametric space into one.
//!
//! Fix a finite set of positive radii and a degree `s(r) >= 2` for each
//! radius. The points of the function space are the finitely supported maps
//! `f` with `f(r) < s(r)`; the distance between distinct points is the
//! largest radius where they disagree. Over finitely many radii this is the
//! full product, which is an ultrametric space with spectrum the radius set
//! and degree sequence `s`, and it is homogeneous: the coordinatewise
//! permutation families below act transitively.

use std::collections::{BTreeMap, BTreeSet};


use crate::isometry::check_property_h;
use crate::nerve::{build_nerve, degree_sequence_of};
use crate::space::SpectrumSet;
use crate::{Error, Space, Value};

/// Default cap on the number of points a materialized product may have.
pub const DEFAULT_PRODUCT_BOUND: usize = 4096;

/// A finite set of positive radii with a degree `s(r) >= 2` at each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeFunction<V> {
    s: BTreeMap<V, usize>,
}

impl<V: Value> DegreeFunction<V> {
    pub fn new(pairs: impl IntoIterator<Item = (V, usize)>) -> Result<Self, Error> {
        let mut s = BTreeMap::new();
        for (r, k) in pairs {
            if r <= V::zero() {
                return Err(Error::BadDegreeFunction(format!("radius {r} is not positive")));
            }
            if k < 2 {
                return Err(Error::BadDegreeFunction(format!("degree {k} at {r} is below 2")));
            }
            if s.insert(r.clone(), k).is_some() {
                return Err(Error::BadDegreeFunction(format!("radius {r} given twice")));
            }
        }
        Ok(DegreeFunction { s })
    }

    /// The degree function of a space: its per-radius maximal son counts.
    pub fn of_space(space: &Space<V>) -> Self {
        let tree = build_nerve(space);
        let per_radius = degree_sequence_of(&tree).per_radius().clone();
        // Son counts are always at least 2, so this cannot fail.
        DegreeFunction::new(per_radius).expect("degree sequence is a valid degree function")
    }

    /// Radii in increasing order.
    pub fn radii(&self) -> impl DoubleEndedIterator<Item = &V> {
        self.s.keys()
    }

    pub fn degree(&self, r: &V) -> Option<usize> {
        self.s.get(r).copied()
    }

    pub fn map(&self) -> &BTreeMap<V, usize> {
        &self.s
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Number of points of the full product, `None` on overflow.
    pub fn product_size(&self) -> Option<usize> {
        self.s.values().try_fold(1usize, |acc, &k| acc.checked_mul(k))
    }

    /// Checks that a point belongs to this degree function's product.
    pub fn check_point(&self, f: &FinSupportPoint<V>) -> Result<(), Error> {
        for (r, &v) in &f.values {
            match self.s.get(r) {
                Some(&k) if (v as usize) < k => {}
                _ => return Err(Error::MismatchedDegreeFunction),
            }
        }
        Ok(())
    }
}

/// A finitely supported point: radius -> value, zero values omitted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FinSupportPoint<V> {
    values: BTreeMap<V, u32>,
}

impl<V: Value> FinSupportPoint<V> {
    /// The zero point (empty support).
    pub fn zero() -> Self {
        FinSupportPoint { values: BTreeMap::new() }
    }

    pub fn new(values: impl IntoIterator<Item = (V, u32)>) -> Self {
        FinSupportPoint { values: values.into_iter().filter(|(_, v)| *v != 0).collect() }
    }

    pub fn value_at(&self, r: &V) -> u32 {
        self.values.get(r).copied().unwrap_or(0)
    }

    /// The support: radii with nonzero value, i.e. the disagreement set
    /// with the zero point.
    pub fn support(&self) -> impl Iterator<Item = &V> {
        self.values.keys()
    }

    pub fn map(&self) -> &BTreeMap<V, u32> {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }
}

/// The disagreement set of two points of one product.
pub fn delta<V: Value>(
    df: &DegreeFunction<V>,
    f: &FinSupportPoint<V>,
    g: &FinSupportPoint<V>,
) -> Result<SpectrumSet<V>, Error> {
    df.check_point(f)?;
    df.check_point(g)?;
    let keys: BTreeSet<&V> = f.values.keys().chain(g.values.keys()).collect();
    Ok(keys.into_iter().filter(|r| f.value_at(r) != g.value_at(r)).cloned().collect())
}

/// Distance in the function space: 0 for equal points, otherwise the
/// maximum of the disagreement set.
pub fn fs_distance<V: Value>(
    df: &DegreeFunction<V>,
    f: &FinSupportPoint<V>,
    g: &FinSupportPoint<V>,
) -> Result<V, Error> {
    let d = delta(df, f, g)?;
    Ok(d.into_iter().next_back().unwrap_or_else(V::zero))
}

/// A family of coordinate permutations, identity where omitted. Applying
/// one pointwise is a self-isometry of the product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaFamily<V> {
    perms: BTreeMap<V, Vec<u32>>,
}

impl<V: Value> SigmaFamily<V> {
    pub fn identity() -> Self {
        SigmaFamily { perms: BTreeMap::new() }
    }

    pub fn new(
        df: &DegreeFunction<V>,
        perms: impl IntoIterator<Item = (V, Vec<u32>)>,
    ) -> Result<Self, Error> {
        let mut out = BTreeMap::new();
        for (r, perm) in perms {
            let k = df.degree(&r).ok_or(Error::MismatchedDegreeFunction)?;
            let mut seen = vec![false; k];
            let valid = perm.len() == k
                && perm.iter().all(|&v| {
                    if (v as usize) < k && !seen[v as usize] {
                        seen[v as usize] = true;
                        true
                    } else {
                        false
                    }
                });
            if !valid {
                return Err(Error::PermutationOutOfRange(r.to_string(), k));
            }
            out.insert(r, perm);
        }
        Ok(SigmaFamily { perms: out })
    }

    pub fn perms(&self) -> &BTreeMap<V, Vec<u32>> {
        &self.perms
    }
}

/// Applies a permutation family pointwise: `g(r) = sigma_r(f(r))` at every
/// radius, with zero values re-normalized away.
pub fn sigma_apply<V: Value>(
    df: &DegreeFunction<V>,
    sigma: &SigmaFamily<V>,
    f: &FinSupportPoint<V>,
) -> Result<FinSupportPoint<V>, Error> {
    df.check_point(f)?;
    let mut values = f.values.clone();
    for (r, perm) in &sigma.perms {
        let old = f.value_at(r);
        let new = perm[old as usize];
        if new == 0 {
            values.remove(r);
        } else {
            values.insert(r.clone(), new);
        }
    }
    Ok(FinSupportPoint { values })
}

/// The involution family of transpositions exchanging `f(r)` and `g(r)` at
/// every radius where they differ; it carries `f` onto `g`.
pub fn transitivity_witness<V: Value>(
    df: &DegreeFunction<V>,
    f: &FinSupportPoint<V>,
    g: &FinSupportPoint<V>,
) -> Result<SigmaFamily<V>, Error> {
    df.check_point(f)?;
    df.check_point(g)?;
    let mut perms = BTreeMap::new();
    for (r, &k) in df.map() {
        let (a, b) = (f.value_at(r), g.value_at(r));
        if a == b {
            continue;
        }
        let mut perm: Vec<u32> = (0..k as u32).collect();
        perm.swap(a as usize, b as usize);
        perms.insert(r.clone(), perm);
    }
    let sigma = SigmaFamily { perms };
    debug_assert_eq!(sigma_apply(df, &sigma, f)?, *g);
    Ok(sigma)
}

/// All points of the full product, in counting order with the largest
/// radius as the most significant digit.
pub fn product_points<V: Value>(df: &DegreeFunction<V>) -> Vec<FinSupportPoint<V>> {
    let radii_desc: Vec<&V> = df.radii().rev().collect();
    let size = df.product_size().expect("caller bounds the product size");
    let mut out = Vec::with_capacity(size);
    for mut idx in 0..size {
        let mut values = BTreeMap::new();
        for &r in radii_desc.iter().rev() {
            let k = df.degree(r).unwrap();
            let digit = (idx % k) as u32;
            idx /= k;
            if digit != 0 {
                values.insert(r.clone(), digit);
            }
        }
        out.push(FinSupportPoint { values });
    }
    out
}

/// Materializes the full product as a space. Point names list the values
/// per radius, largest radius first, joined by dots.
pub fn materialize_product<V: Value>(
    df: &DegreeFunction<V>,
    bound: usize,
) -> Result<Space<V>, Error> {
    let size = match df.product_size() {
        Some(size) if size <= bound => size,
        _ => return Err(Error::ProductTooLarge { size: df.product_size().unwrap_or(usize::MAX), bound }),
    };
    debug_assert!(size >= 1);
    let points = product_points(df);
    let radii_desc: Vec<&V> = df.radii().rev().collect();
    let names: Vec<String> = points
        .iter()
        .map(|f| {
            if radii_desc.is_empty() {
                "0".to_string()
            } else {
                radii_desc
                    .iter()
                    .map(|r| f.value_at(r).to_string())
                    .collect::<Vec<_>>()
                    .join(".")
            }
        })
        .collect();
    let space = Space::from_dist_fn(names, |i, j| {
        let d = delta(df, &points[i], &points[j]).unwrap();
        d.into_iter().next_back().expect("distinct product points differ somewhere")
    });
    Ok(space)
}

/// The two stages of the canonical embedding of a space into the function
/// space over its own spectrum and degree sequence.
///
/// `phi` is the raw recursion over the point order: zero below the critical
/// radius, copied from an earlier point above it, and the least unused
/// value at it. `psi` relabels `phi` through an order isomorphism on every
/// nerve ball, so that each ball of diameter `r` uses exactly the values
/// `0..sons(B)` at `r`. On finite spaces the relabelling is the identity,
/// but both stages are kept and checked separately.
#[derive(Debug, Clone)]
pub struct Embedding<V> {
    degrees: DegreeFunction<V>,
    phi: Vec<FinSupportPoint<V>>,
    psi: Vec<FinSupportPoint<V>>,
}

impl<V: Value> Embedding<V> {
    pub fn degrees(&self) -> &DegreeFunction<V> {
        &self.degrees
    }

    pub fn phi(&self) -> &[FinSupportPoint<V>] {
        &self.phi
    }

    pub fn psi(&self) -> &[FinSupportPoint<V>] {
        &self.psi
    }
}

/// Embeds a space isometrically into the function space over its spectrum
/// and degree sequence, by recursion over the stored point order.
pub fn embed_space<V: Value>(space: &Space<V>) -> Embedding<V> {
    let n = space.len();
    let tree = build_nerve(space);
    let degrees = DegreeFunction::of_space(space);
    let v_star: Vec<V> = space.spectrum().into_iter().filter(|r| *r > V::zero()).collect();

    // First stage: the recursion. Every distance in a finite space is
    // attained, so the unattained branch of the critical case is absent.
    let mut phi: Vec<BTreeMap<V, u32>> = Vec::with_capacity(n);
    phi.push(BTreeMap::new());
    for alpha in 1..n {
        let r_alpha = (0..alpha).map(|b| space.dist(alpha, b)).min().unwrap();
        let mut f = BTreeMap::new();
        for r in &v_star {
            if *r < r_alpha {
                continue;
            }
            let value = if *r > r_alpha {
                // Copy from any earlier point strictly inside B(a_alpha, r);
                // the choice does not matter.
                let beta = (0..alpha).find(|&b| space.dist(alpha, b) < *r).unwrap();
                debug_assert!((0..alpha)
                    .filter(|&b| space.dist(alpha, b) < *r)
                    .all(|b| phi[b].get(r) == phi[beta].get(r)));
                phi[beta].get(r).copied().unwrap_or(0)
            } else {
                // r == r_alpha: least value unused in the closed ball so far.
                let used: BTreeSet<u32> = (0..alpha)
                    .filter(|&b| space.dist(alpha, b) <= r_alpha)
                    .map(|b| phi[b].get(r).copied().unwrap_or(0))
                    .collect();
                (0..).find(|v| !used.contains(v)).unwrap()
            };
            if value != 0 {
                f.insert(r.clone(), value);
            }
        }
        phi.push(f);
    }

    // Second stage: relabel within each nerve ball through the order
    // isomorphism onto an initial segment, zero elsewhere.
    let mut psi: Vec<BTreeMap<V, u32>> = vec![BTreeMap::new(); n];
    for node in tree.nodes() {
        if node.is_trivial() {
            continue;
        }
        let r = node.diameter();
        let mut used: Vec<u32> =
            node.members().iter().map(|&y| phi[y].get(r).copied().unwrap_or(0)).collect();
        used.sort_unstable();
        used.dedup();
        debug_assert_eq!(used.len(), node.children().len());
        debug_assert_eq!(used.first(), Some(&0));
        for &y in node.members() {
            let raw = phi[y].get(r).copied().unwrap_or(0);
            let relabelled = used.binary_search(&raw).unwrap() as u32;
            if relabelled != 0 {
                psi[y].insert(r.clone(), relabelled);
            }
        }
    }

    let wrap = |maps: Vec<BTreeMap<V, u32>>| {
        maps.into_iter().map(|values| FinSupportPoint { values }).collect()
    };
    Embedding { degrees, phi: wrap(phi), psi: wrap(psi) }
}

/// Finite-scale characterization check: the space satisfies property h
/// exactly when the canonical embedding is a bijection onto the full
/// product over its spectrum and degree sequence. Both directions are
/// evaluated and compared; when the sizes allow a bijection it is
/// exhibited by comparing point sets.
pub fn verify_feinberg<V: Value>(space: &Space<V>, bound: usize) -> Result<bool, Error> {
    let (h1, h2) = check_property_h(space);
    let h = h1 && h2;
    let embedding = embed_space(space);
    let size = embedding.degrees().product_size();
    let bijective = match size {
        Some(size) if size == space.len() => {
            if size > bound {
                return Err(Error::ProductTooLarge { size, bound });
            }
            let image: BTreeSet<&FinSupportPoint<V>> = embedding.psi().iter().collect();
            // The embedding is injective, so equal cardinality plus
            // inclusion in the product means set equality.
            let full = product_points(embedding.degrees());
            assert_eq!(image.len(), space.len());
            full.iter().collect::<BTreeSet<_>>() == image
        }
        // The image always lies inside the product, so differing sizes
        // rule out surjectivity without materializing anything.
        _ => false,
    };
    Ok(h == bijective)
}
