//! Finitely generated rational polyhedral cones.
//!
//! Rays are stored as primitive integer vectors, so two generators that are
//! positive multiples of each other compare equal. Every query answers with a
//! certificate that [`crate::lp::verify_farkas`] can re-check.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{QMat, QVec};
use crate::lp::{farkas_solve, Farkas};
use crate::rational::{gcd_big, lcm_big, Rat};

/// A ray through the origin, represented by its primitive integer vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Ray(QVec);

impl Ray {
    pub fn vec(&self) -> &QVec {
        &self.0
    }

    pub fn into_vec(self) -> QVec {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

impl fmt::Display for Ray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for Ray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// The unique primitive integer vector positively proportional to `v`.
pub fn canonicalize_ray(v: &QVec) -> Result<Ray> {
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    let den = v
        .iter()
        .fold(BigInt::one(), |acc, x| lcm_big(&acc, x.denom()));
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| x.numer() * (&den / x.denom()))
        .collect();
    let content = ints
        .iter()
        .filter(|x| !x.is_zero())
        .fold(BigInt::zero(), |acc, x| gcd_big(&acc, &x.abs()));
    Ok(Ray(QVec::from(
        ints.into_iter()
            .map(|x| Rat::from(x / &content))
            .collect::<Vec<_>>(),
    )))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pointedness {
    /// `⟨w, g⟩ > 0` for every generator `g`.
    Pointed(QVec),
    /// A generator whose negative also lies in the cone.
    Line(Ray),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    /// Nonnegative coefficients, one per generator, reproducing the vector.
    Inside(QVec),
    /// `n` with `⟨n, g⟩ ≥ 0` on every generator and `⟨n, v⟩ < 0`.
    Outside(QVec),
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside(_))
    }
}

/// A codimension-two face, with the indices (into [`Cone::facets`]) of the
/// facets containing it and the generators lying on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codim2Face {
    pub facets: Vec<usize>,
    pub generators: Vec<Ray>,
}

#[derive(Debug)]
pub struct Cone {
    ambient_dim: usize,
    generators: Vec<Ray>,
    facets: OnceLock<Vec<Ray>>,
}

impl Clone for Cone {
    fn clone(&self) -> Self {
        let facets = OnceLock::new();
        if let Some(f) = self.facets.get() {
            let _ = facets.set(f.clone());
        }
        Cone {
            ambient_dim: self.ambient_dim,
            generators: self.generators.clone(),
            facets,
        }
    }
}

impl PartialEq for Cone {
    fn eq(&self, other: &Self) -> bool {
        self.ambient_dim == other.ambient_dim && self.generators == other.generators
    }
}

impl Eq for Cone {}

impl Cone {
    /// Canonicalizes each generator; input order is kept.
    pub fn new(ambient_dim: usize, generators: &[QVec]) -> Result<Self> {
        let mut rays = Vec::with_capacity(generators.len());
        for g in generators {
            if g.dim() != ambient_dim {
                return Err(Error::DimensionMismatch(format!(
                    "generator {g} in a cone of ambient dimension {ambient_dim}"
                )));
            }
            rays.push(canonicalize_ray(g)?);
        }
        Ok(Cone::from_rays(ambient_dim, rays))
    }

    pub fn from_rays(ambient_dim: usize, generators: Vec<Ray>) -> Self {
        debug_assert!(generators.iter().all(|r| r.dim() == ambient_dim));
        Cone {
            ambient_dim,
            generators,
            facets: OnceLock::new(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn generators(&self) -> &[Ray] {
        &self.generators
    }

    fn generator_matrix(&self) -> QMat {
        let cols: Vec<QVec> = self.generators.iter().map(|r| r.0.clone()).collect();
        QMat::from_cols(self.ambient_dim, &cols).expect("generators share the ambient dimension")
    }

    /// Dimension of the linear span of the generators.
    pub fn dim(&self) -> usize {
        self.generator_matrix().rank()
    }

    pub fn is_pointed(&self) -> Pointedness {
        // Feasibility of G λ = 0, Σλ = 1, λ ≥ 0 exhibits a line; a Farkas
        // certificate (w, t) has ⟨w, g⟩ ≥ -t > 0 for every generator.
        let d = self.ambient_dim;
        let n = self.generators.len();
        let mut a = QMat::zeros(d + 1, n);
        for (j, g) in self.generators.iter().enumerate() {
            for i in 0..d {
                a.set(i, j, g.0[i].clone());
            }
            a.set(d, j, Rat::one());
        }
        let mut b = vec![Rat::zero(); d + 1];
        b[d] = Rat::one();
        match farkas_solve(&a, &QVec::from(b)) {
            Farkas::Feasible(lambda) => {
                let k = lambda
                    .iter()
                    .position(Rat::is_positive)
                    .expect("coefficients sum to one");
                Pointedness::Line(self.generators[k].clone())
            }
            Farkas::Infeasible(y) => {
                let w = y.entries()[..d].to_vec();
                Pointedness::Pointed(QVec::from(w))
            }
        }
    }

    pub fn membership(&self, v: &QVec) -> Result<Membership> {
        if v.dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "vector {v} tested against a cone in dimension {}",
                self.ambient_dim
            )));
        }
        Ok(match farkas_solve(&self.generator_matrix(), v) {
            Farkas::Feasible(l) => Membership::Inside(l),
            Farkas::Infeasible(n) => Membership::Outside(n),
        })
    }

    pub fn contains(&self, v: &QVec) -> Result<bool> {
        Ok(self.membership(v)?.is_inside())
    }

    fn require_pointed(&self) -> Result<()> {
        match self.is_pointed() {
            Pointedness::Pointed(_) => Ok(()),
            Pointedness::Line(r) => Err(Error::NotPointed(r.to_string())),
        }
    }

    /// Generators that are not in the cone of the others, deduplicated and
    /// sorted lexicographically.
    pub fn extreme_rays(&self) -> Result<Vec<Ray>> {
        self.require_pointed()?;
        let uniq = dedup(&self.generators);
        let mut out = Vec::new();
        for (k, r) in uniq.iter().enumerate() {
            let others: Vec<Ray> = uniq
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, g)| g.clone())
                .collect();
            if !Cone::from_rays(self.ambient_dim, others).contains(&r.0)? {
                out.push(r.clone());
            }
        }
        out.sort();
        Ok(out)
    }

    /// The dual cone `{w : ⟨w, g⟩ ≥ 0}` by double description, constraints
    /// inserted in generator order. A dual with lineality (the cone is not
    /// full-dimensional) is returned with both directions of each lineality
    /// basis vector among its generators.
    pub fn dual(&self) -> Cone {
        let d = self.ambient_dim;
        let mut lin: Vec<QVec> = (0..d).map(|i| QVec::unit(d, i)).collect();
        let mut rays: Vec<QVec> = Vec::new();
        let mut seen: Vec<&QVec> = Vec::new();

        for g in &self.generators {
            let a = &g.0;
            let dot = |v: &QVec| a.dot(v).expect("same dimension");
            if let Some(k) = lin.iter().position(|l| !dot(l).is_zero()) {
                let mut l = lin.remove(k);
                let mut al = dot(&l);
                if al.is_negative() {
                    l = l.neg();
                    al = -al;
                }
                let project = |v: &QVec| {
                    let c = &dot(v) / &al;
                    v.sub(&l.scale(&c)).expect("same dimension")
                };
                lin = lin.iter().map(project).collect();
                rays = rays.iter().map(project).collect();
                rays.push(l);
            } else {
                let vals: Vec<Rat> = rays.iter().map(dot).collect();
                let zero_sets: Vec<BTreeSet<usize>> = rays
                    .iter()
                    .map(|r| {
                        seen.iter()
                            .enumerate()
                            .filter(|(_, c)| c.dot(r).expect("same dimension").is_zero())
                            .map(|(i, _)| i)
                            .collect()
                    })
                    .collect();
                let mut next: Vec<QVec> = rays
                    .iter()
                    .zip(&vals)
                    .filter(|(_, v)| !v.is_negative())
                    .map(|(r, _)| r.clone())
                    .collect();
                for p in 0..rays.len() {
                    if !vals[p].is_positive() {
                        continue;
                    }
                    for q in 0..rays.len() {
                        if !vals[q].is_negative() {
                            continue;
                        }
                        let common: BTreeSet<usize> =
                            zero_sets[p].intersection(&zero_sets[q]).copied().collect();
                        let adjacent = (0..rays.len())
                            .filter(|&r| r != p && r != q)
                            .all(|r| !common.is_subset(&zero_sets[r]));
                        if adjacent {
                            let v = rays[q]
                                .scale(&vals[p])
                                .sub(&rays[p].scale(&vals[q]))
                                .expect("same dimension");
                            next.push(v);
                        }
                    }
                }
                rays = next;
            }
            rays = rays
                .iter()
                .map(|r| canonicalize_ray(r).expect("double description rays are nonzero").0)
                .collect();
            seen.push(a);
        }

        let mut gens: BTreeSet<Ray> = rays
            .iter()
            .map(|r| canonicalize_ray(r).expect("nonzero"))
            .collect();
        for l in &lin {
            gens.insert(canonicalize_ray(l).expect("basis vectors are nonzero"));
            gens.insert(canonicalize_ray(&l.neg()).expect("basis vectors are nonzero"));
        }
        Cone::from_rays(d, gens.into_iter().collect())
    }

    fn require_full_pointed(&self) -> Result<()> {
        let dim = self.dim();
        if dim < self.ambient_dim {
            return Err(Error::LowerDimensional {
                dim,
                ambient: self.ambient_dim,
            });
        }
        self.require_pointed()
    }

    /// Inner facet normals, i.e. the extreme rays of the dual, sorted.
    pub fn facets(&self) -> Result<&[Ray]> {
        if let Some(f) = self.facets.get() {
            return Ok(f);
        }
        self.require_full_pointed()?;
        let computed = self.dual().generators;
        // A concurrent caller may have published first; both values agree.
        Ok(self.facets.get_or_init(|| computed))
    }

    /// Codimension-two faces, each listed once with every facet containing
    /// it. For a genuine polyhedral cone that is always exactly two facets.
    pub fn codim2_faces(&self) -> Result<Vec<Codim2Face>> {
        let facets = self.facets()?.to_vec();
        let d = self.ambient_dim;
        if d < 2 {
            return Ok(Vec::new());
        }
        let gens = dedup(&self.generators);
        let on = |n: &Ray, g: &Ray| n.0.dot(&g.0).expect("same dimension").is_zero();
        let mut faces: Vec<Codim2Face> = Vec::new();
        let mut found: BTreeSet<Vec<Ray>> = BTreeSet::new();
        for i in 0..facets.len() {
            for j in i + 1..facets.len() {
                let mut common: Vec<Ray> = gens
                    .iter()
                    .filter(|g| on(&facets[i], g) && on(&facets[j], g))
                    .cloned()
                    .collect();
                common.sort();
                let cols: Vec<QVec> = common.iter().map(|r| r.0.clone()).collect();
                let rank = QMat::from_cols(d, &cols).expect("same dimension").rank();
                if rank != d - 2 || !found.insert(common.clone()) {
                    continue;
                }
                let containing = (0..facets.len())
                    .filter(|&k| common.iter().all(|g| on(&facets[k], g)))
                    .collect();
                faces.push(Codim2Face {
                    facets: containing,
                    generators: common,
                });
            }
        }
        Ok(faces)
    }

    /// True when each cone contains every generator of the other.
    pub fn same_as(&self, other: &Cone) -> Result<bool> {
        for g in &self.generators {
            if !other.contains(&g.0)? {
                return Ok(false);
            }
        }
        for g in &other.generators {
            if !self.contains(&g.0)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn dedup(rays: &[Ray]) -> Vec<Ray> {
    let mut seen = BTreeSet::new();
    rays.iter()
        .filter(|r| seen.insert((*r).clone()))
        .cloned()
        .collect()
}

/// The cone generated by `M g` over the generators `g`, zero images dropped.
/// Pointed images are reduced to their sorted extreme rays; an image that
/// contains a line keeps its deduplicated sorted generators.
pub fn image_cone(c: &Cone, m: &QMat) -> Result<Cone> {
    if m.cols() != c.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} map applied to a cone in dimension {}",
            m.rows(),
            m.cols(),
            c.ambient_dim()
        )));
    }
    let mut images = Vec::new();
    for g in c.generators() {
        let v = m.mul_vec(g.vec())?;
        if !v.is_zero() {
            images.push(canonicalize_ray(&v)?);
        }
    }
    let raw = Cone::from_rays(m.rows(), images);
    match raw.extreme_rays() {
        Ok(rays) => Ok(Cone::from_rays(m.rows(), rays)),
        Err(Error::NotPointed(_)) => {
            let mut rays = dedup(raw.generators());
            rays.sort();
            Ok(Cone::from_rays(m.rows(), rays))
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[i64]) -> QVec {
        QVec::from_i64s(v)
    }

    fn cone(d: usize, gens: &[&[i64]]) -> Cone {
        let g: Vec<QVec> = gens.iter().map(|v| q(v)).collect();
        Cone::new(d, &g).unwrap()
    }

    fn rays(gens: &[&[i64]]) -> Vec<Ray> {
        gens.iter().map(|v| canonicalize_ray(&q(v)).unwrap()).collect()
    }

    #[test]
    fn canonical_rays() {
        let half: Rat = "1/2".parse().unwrap();
        let v = QVec::from(vec![half.clone(), half.clone(), -half]);
        assert_eq!(canonicalize_ray(&v).unwrap().vec(), &q(&[1, 1, -1]));
        assert_eq!(
            canonicalize_ray(&q(&[2, 2, 2, -2, 4])).unwrap().vec(),
            &q(&[1, 1, 1, -1, 2])
        );
        assert_eq!(canonicalize_ray(&q(&[0, 0, 3])).unwrap().vec(), &q(&[0, 0, 1]));
        assert!(matches!(canonicalize_ray(&q(&[0, 0])), Err(Error::ZeroVector)));
    }

    #[test]
    fn pointedness() {
        match cone(2, &[&[1, 0], &[0, 1]]).is_pointed() {
            Pointedness::Pointed(w) => {
                assert!(w.dot(&q(&[1, 0])).unwrap().is_positive());
                assert!(w.dot(&q(&[0, 1])).unwrap().is_positive());
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            cone(2, &[&[1, 0], &[-1, 0]]).is_pointed(),
            Pointedness::Line(_)
        ));
        assert!(matches!(cone(2, &[]).is_pointed(), Pointedness::Pointed(_)));
    }

    #[test]
    fn quadrant_membership() {
        let c = cone(2, &[&[1, 0], &[0, 1]]);
        assert_eq!(c.membership(&q(&[2, 3])).unwrap(), Membership::Inside(q(&[2, 3])));
        match c.membership(&q(&[-1, 0])).unwrap() {
            Membership::Outside(n) => {
                assert!(n.dot(&q(&[-1, 0])).unwrap().is_negative());
                assert!(!n.dot(&q(&[1, 0])).unwrap().is_negative());
                assert!(!n.dot(&q(&[0, 1])).unwrap().is_negative());
            }
            other => panic!("{other:?}"),
        }
        assert!(c.membership(&q(&[1, 2, 3])).is_err());
    }

    #[test]
    fn extreme_ray_examples() {
        let c = cone(2, &[&[1, 0], &[1, 1], &[1, 2]]);
        assert_eq!(c.extreme_rays().unwrap(), rays(&[&[1, 0], &[1, 2]]));
        let c = cone(2, &[&[1, 0], &[2, 0], &[0, 1]]);
        assert_eq!(c.extreme_rays().unwrap(), rays(&[&[0, 1], &[1, 0]]));
        let c = cone(2, &[&[1, 0], &[-1, 0]]);
        assert!(matches!(c.extreme_rays(), Err(Error::NotPointed(_))));
    }

    #[test]
    fn duals() {
        let quad = cone(2, &[&[1, 0], &[0, 1]]);
        assert_eq!(quad.dual().generators(), rays(&[&[0, 1], &[1, 0]]).as_slice());
        let c = cone(2, &[&[1, 0], &[1, 1]]);
        let d = c.dual();
        assert!(d.same_as(&cone(2, &[&[0, 1], &[1, -1]])).unwrap());
        assert_eq!(d.generators(), rays(&[&[0, 1], &[1, -1]]).as_slice());
        // whole space
        assert_eq!(cone(2, &[]).dual().generators().len(), 4);
    }

    #[test]
    fn dual_of_a_line_has_lineality() {
        let c = cone(3, &[&[1, 0, 0], &[0, 1, 0]]);
        let d = c.dual();
        assert!(d.contains(&q(&[0, 0, 1])).unwrap());
        assert!(d.contains(&q(&[0, 0, -1])).unwrap());
        assert!(!d.contains(&q(&[-1, 0, 0])).unwrap());
        assert!(matches!(
            c.facets(),
            Err(Error::LowerDimensional { dim: 2, ambient: 3 })
        ));
    }

    #[test]
    fn square_pyramid_facets_and_ridges() {
        let c = cone(3, &[&[1, 0, 1], &[0, 1, 1], &[-1, 0, 1], &[0, -1, 1]]);
        assert_eq!(c.facets().unwrap().len(), 4);
        let faces = c.codim2_faces().unwrap();
        assert_eq!(faces.len(), 4);
        assert!(faces.iter().all(|f| f.facets.len() == 2 && f.generators.len() == 1));
    }

    #[test]
    fn quadrant_ridge_is_origin() {
        let c = cone(2, &[&[1, 0], &[0, 1]]);
        assert_eq!(c.facets().unwrap(), rays(&[&[0, 1], &[1, 0]]).as_slice());
        let faces = c.codim2_faces().unwrap();
        assert_eq!(faces, vec![Codim2Face { facets: vec![0, 1], generators: vec![] }]);
    }

    #[test]
    fn images() {
        let c = cone(2, &[&[1, 0], &[0, 1]]);
        let p = QMat::from_i64_rows(&[&[1, 0]]);
        let img = image_cone(&c, &p).unwrap();
        assert_eq!(img.generators(), rays(&[&[1]]).as_slice());
        let img = image_cone(&c, &QMat::zeros(3, 2)).unwrap();
        assert_eq!(img.ambient_dim(), 3);
        assert!(img.generators().is_empty());
        assert!(image_cone(&c, &QMat::zeros(1, 3)).is_err());
    }

    #[test]
    fn memoized_facets_are_shared_across_threads() {
        let c = cone(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, -1]]);
        let results: Vec<Vec<Ray>> = std::thread::scope(|s| {
            let hs: Vec<_> = (0..4).map(|_| s.spawn(|| c.facets().unwrap().to_vec())).collect();
            hs.into_iter().map(|h| h.join().unwrap()).collect()
        });
        assert!(results.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(results[0].len(), 4);
    }
}
