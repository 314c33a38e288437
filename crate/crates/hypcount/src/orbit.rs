//! Orbit enumeration for PSL_2(Z) and Hilbert modular groups, and the three
//! counting quantities: boxes cnt(U,V;z), hypercubes N(z;T), and strips
//! N_E(z;T) of the vector-valued distance.
//!
//! The engine works row by row. A bottom row (c, d0) with c = 0 forces d0 to
//! be a unit and yields the translation-type family (d0^{-1}, t d0; 0, d0).
//! For c != 0 the admissible (c, d0) are coprime pairs in an explicit
//! embedding box; Bezout gives one solution (a0, b0) of a d0 - b c = 1 and
//! the full fiber is a = a0 + t c, b = b0 + t d0 with t in O_F ranging over
//! a box of per-embedding intervals. Each candidate is finally accepted by
//! the exact-enough test u((gamma z)_j, z_j) <= V_j in double precision.

use std::collections::HashSet;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{
    bezout, enumerate_ring_interval_box, unit_inverse, units_in_box, FieldSpec, RingElement,
};
use crate::geom::{
    cd_admissible, mobius_apply, t_interval, u_from_dist, u_invariant, GroupElement,
    MultiPoint, ADMISSIBILITY_GUARD,
};

/// Per-embedding cap on enumeration interval widths.
const BOUND_CAP: f64 = 1e9;

/// Relative width of the near-boundary audit band.
pub const BOUNDARY_BAND: f64 = 1e-9;

/// A box of u-invariants, half-open per coordinate: U_j <= u_j < V_j.
#[derive(Debug, Clone)]
pub struct BoxSpec {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl BoxSpec {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> BoxSpec {
        assert_eq!(u.len(), v.len());
        assert!(u.iter().zip(&v).all(|(a, b)| a < b), "need U_j < V_j");
        BoxSpec { u, v }
    }
}

/// A strip of the vector-valued distance: dist_j in [A_j, B_j) for j in E,
/// dist_j <= T for the complementary places Q.
#[derive(Debug, Clone)]
pub struct StripSpec {
    /// Indices in E (0-based), strictly increasing.
    pub e: Vec<usize>,
    /// Distance intervals [A_j, B_j) parallel to `e`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Height bound applied on Q.
    pub t: f64,
}

impl StripSpec {
    pub fn validate(&self, d: usize) -> Result<()> {
        let ok = !self.e.is_empty()
            && self.e.len() < d
            && self.e.iter().all(|&j| j < d)
            && self.e.windows(2).all(|w| w[0] < w[1])
            && self.a.len() == self.e.len()
            && self.b.len() == self.e.len()
            && self.a.iter().zip(&self.b).all(|(a, b)| *a >= 0.0 && a < b)
            && self.t >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidStrip)
        }
    }
}

/// One counting run.
#[derive(Debug, Clone, PartialEq)]
pub struct CountResult {
    pub count: u64,
    pub candidates: u64,
    pub near_boundary: u64,
    pub wall_s: f64,
}

/// A bottom-row family of the enumeration.
enum Family {
    /// c = 0; the unit d0 (canonical sign) with a = d0^{-1}, b = t d0.
    Translation(RingElement),
    /// c != 0 with positive first embedding.
    Row(RingElement),
}

fn families(z: &MultiPoint, v: &[f64], spec: &FieldSpec) -> Result<Vec<Family>> {
    let d = z.degree();
    // slack so exact-boundary candidates survive generation; the final
    // u <= V filter decides membership
    let s: Vec<f64> = v
        .iter()
        .map(|vj| (vj.sqrt() + (vj + 1.0).sqrt()) * (1.0 + ADMISSIBILITY_GUARD))
        .collect();
    let mut fams = Vec::new();
    // translation families: d0 unit with |sigma_j(d0)| <= S_j
    for u in units_in_box(&s, spec) {
        if u.embed_one(0, spec) > 0.0 {
            fams.push(Family::Translation(u));
        }
    }
    // rows: 0 < sigma_1(c), |sigma_j(c)| <= S_j / y_j
    let c_bounds: Vec<f64> = (0..d).map(|j| s[j] / z.coord(j).y * (1.0 + ADMISSIBILITY_GUARD)).collect();
    if c_bounds.iter().any(|b| !b.is_finite() || *b > BOUND_CAP) {
        return Err(Error::OverflowGuard(c_bounds.iter().cloned().fold(0.0, f64::max), BOUND_CAP));
    }
    let lo: Vec<f64> = c_bounds.iter().map(|b| -b).collect();
    for c in enumerate_ring_interval_box(&lo, &c_bounds, spec) {
        if c.is_zero() || c.embed_one(0, spec) < 0.0 {
            continue;
        }
        fams.push(Family::Row(c));
    }
    Ok(fams)
}

/// Expand one family, feeding every candidate (gamma, u-vector) with
/// u_j <= V_j for all j into the sink. Returns the number of candidates
/// examined.
fn expand_family(
    fam: &Family,
    z: &MultiPoint,
    v: &[f64],
    spec: &FieldSpec,
    sink: &mut dyn FnMut(GroupElement, &[f64]),
) -> Result<u64> {
    let d = z.degree();
    let zc: Vec<Complex64> = (0..d).map(|j| z.coord(j).to_complex()).collect();
    let r: Vec<f64> =
        (0..d).map(|j| 2.0 * v[j].sqrt() * z.coord(j).y * (1.0 + ADMISSIBILITY_GUARD)).collect();

    let pairs: Vec<(RingElement, RingElement, RingElement, RingElement)> = match fam {
        Family::Translation(d0) => {
            let a0 = unit_inverse(d0, spec);
            vec![(RingElement::zero(), d0.clone(), a0, RingElement::zero())]
        }
        Family::Row(c) => {
            // d0 box: |sigma_j(c) z_j + sigma_j(d0)|^2 <= S_j^2
            let mut lo = vec![0.0; d];
            let mut hi = vec![0.0; d];
            let mut feasible = true;
            for j in 0..d {
                let cj = c.embed_one(j, spec);
                let s = v[j].sqrt() + (v[j] + 1.0).sqrt();
                let s2 = s * s * (1.0 + ADMISSIBILITY_GUARD);
                let im = cj * z.coord(j).y;
                if im * im > s2 {
                    feasible = false;
                    break;
                }
                let w = (s2 - im * im).sqrt();
                let center = -cj * z.coord(j).x;
                lo[j] = center - w;
                hi[j] = center + w;
            }
            if !feasible {
                return Ok(0);
            }
            let mut out = Vec::new();
            for d0 in enumerate_ring_interval_box(&lo, &hi, spec) {
                if !cd_admissible(c, &d0, z, v, spec) {
                    continue;
                }
                if let Some((a0, b0)) = bezout(c, &d0, spec)? {
                    out.push((c.clone(), d0, a0, b0));
                }
            }
            out
        }
    };

    let mut candidates = 0u64;
    for (c, d0, a0, b0) in pairs {
        // t-box from |w0_j + t zeta_j| <= R_j per embedding
        let mut lo = vec![0.0; d];
        let mut hi = vec![0.0; d];
        let mut empty = false;
        for j in 0..d {
            let cj = c.embed_one(j, spec);
            let dj = d0.embed_one(j, spec);
            let aj = a0.embed_one(j, spec);
            let bj = b0.embed_one(j, spec);
            let w0 = -cj * zc[j] * zc[j] + (aj - dj) * zc[j] + bj;
            let zeta = cj * zc[j] + dj;
            match t_interval(w0, zeta, r[j])? {
                Some((a, b)) => {
                    if b - a > BOUND_CAP {
                        return Err(Error::OverflowGuard(b - a, BOUND_CAP));
                    }
                    // widen against root rounding; final filter decides
                    let band = BOUNDARY_BAND * (1.0 + a.abs() + b.abs());
                    lo[j] = a - band;
                    hi[j] = b + band;
                }
                None => {
                    empty = true;
                    break;
                }
            }
        }
        if empty {
            continue;
        }
        for t in enumerate_ring_interval_box(&lo, &hi, spec) {
            candidates += 1;
            let a = a0.add(&t.mul(&c, spec));
            let b = b0.add(&t.mul(&d0, spec));
            let g = GroupElement::new(a, b, c.clone(), d0.clone(), spec);
            let gz = mobius_apply(&g, z, spec);
            let uv: Vec<f64> = (0..d).map(|j| u_invariant(gz.coord(j), z.coord(j))).collect();
            if uv.iter().zip(v).all(|(u, vj)| u <= vj) {
                sink(g, &uv);
            }
        }
    }
    Ok(candidates)
}

/// All PSL_2-classes gamma with u((gamma z)_j, z_j) <= V_j for all j, each
/// exactly once, with their u-vectors.
pub fn enumerate_box_orbit(
    z: &MultiPoint,
    v: &[f64],
    spec: &FieldSpec,
) -> Result<Vec<(GroupElement, Vec<f64>)>> {
    let fams = families(z, v, spec)?;
    let mut out = Vec::new();
    for fam in &fams {
        expand_family(fam, z, v, spec, &mut |g, u| out.push((g, u.to_vec())))?;
    }
    Ok(out)
}

/// Per-coordinate counting region in the u-variable.
#[derive(Debug, Clone)]
struct Region {
    u_lo: Vec<f64>,
    v_hi: Vec<f64>,
    /// Whether the upper bound is closed (<=) rather than half-open (<).
    upper_closed: Vec<bool>,
}

impl Region {
    fn accepts(&self, uv: &[f64]) -> bool {
        uv.iter().enumerate().all(|(j, &u)| {
            u >= self.u_lo[j]
                && if self.upper_closed[j] { u <= self.v_hi[j] } else { u < self.v_hi[j] }
        })
    }

    fn near_boundary(&self, uv: &[f64]) -> bool {
        uv.iter().enumerate().any(|(j, &u)| {
            let band = BOUNDARY_BAND * (1.0 + u);
            // u_lo = 0 is not a wall: u >= 0 identically
            (self.u_lo[j] > 0.0 && (u - self.u_lo[j]).abs() <= band)
                || (u - self.v_hi[j]).abs() <= band
        })
    }
}

fn count_region(z: &MultiPoint, region: &Region, spec: &FieldSpec) -> Result<CountResult> {
    let start = Instant::now();
    // enumeration needs the closed superset u_j <= V_j
    let v: Vec<f64> = region.v_hi.clone();
    let fams = families(z, &v, spec)?;
    // one integer triple per family; summation order cannot change the result
    let triples: Vec<Result<(u64, u64, u64)>> = fams
        .par_iter()
        .map(|fam| {
            let mut count = 0u64;
            let mut nearb = 0u64;
            let cands = expand_family(fam, z, &v, spec, &mut |_g, uv| {
                if region.accepts(uv) {
                    count += 1;
                }
                if region.near_boundary(uv) {
                    nearb += 1;
                }
            })?;
            Ok((count, cands, nearb))
        })
        .collect();
    let mut count = 0u64;
    let mut candidates = 0u64;
    let mut near_boundary = 0u64;
    for t in triples {
        let (c, k, n) = t?;
        count += c;
        candidates += k;
        near_boundary += n;
    }
    Ok(CountResult { count, candidates, near_boundary, wall_s: start.elapsed().as_secs_f64() })
}

/// cnt(U,V;z): classes with U_j <= u_j < V_j for all j.
pub fn count_box(z: &MultiPoint, spec_box: &BoxSpec, spec: &FieldSpec) -> Result<CountResult> {
    let d = z.degree();
    assert_eq!(spec_box.u.len(), d);
    let region = Region {
        u_lo: spec_box.u.clone(),
        v_hi: spec_box.v.clone(),
        upper_closed: vec![false; d],
    };
    count_region(z, &region, spec)
}

/// N(z;T): classes with dist((gamma z)_j, z_j) <= T for all j (closed).
pub fn count_hypercube(z: &MultiPoint, t: f64, spec: &FieldSpec) -> Result<CountResult> {
    assert!(t >= 0.0);
    let d = z.degree();
    let v = u_from_dist(t);
    let region = Region {
        u_lo: vec![0.0; d],
        v_hi: vec![v.max(0.0); d],
        upper_closed: vec![true; d],
    };
    count_region(z, &region, spec)
}

/// N_E(z;T): dist_j in [A_j, B_j) on E, dist_j <= T on Q.
pub fn count_strip(z: &MultiPoint, strip: &StripSpec, spec: &FieldSpec) -> Result<CountResult> {
    let d = z.degree();
    strip.validate(d)?;
    let mut u_lo = vec![0.0; d];
    let mut v_hi = vec![u_from_dist(strip.t); d];
    let mut upper_closed = vec![true; d];
    for (k, &j) in strip.e.iter().enumerate() {
        u_lo[j] = u_from_dist(strip.a[k]);
        v_hi[j] = u_from_dist(strip.b[k]);
        upper_closed[j] = false;
    }
    count_region(z, &Region { u_lo, v_hi, upper_closed }, spec)
}

/// Exhaustive ground truth: scans all matrices over O_F with coefficient
/// magnitudes <= entry_bound, keeps determinant 1, canonicalizes modulo the
/// sign, and filters by u_j <= V_j. Complete whenever the entry bounds
/// implied by V are <= entry_bound. Independent of the fast engine: no
/// Bezout, no admissibility pruning, no t-intervals.
pub fn naive_oracle(
    z: &MultiPoint,
    v: &[f64],
    entry_bound: i64,
    spec: &FieldSpec,
) -> Result<Vec<(GroupElement, Vec<f64>)>> {
    assert!(entry_bound <= 12, "cost guard: entry_bound <= 12");
    let d = z.degree();
    let mut seen: HashSet<GroupElement> = HashSet::new();
    let mut out = Vec::new();
    let mut candidates = 0u64;

    let coeffs: Vec<RingElement> = {
        let r = -entry_bound..=entry_bound;
        let mut v = Vec::new();
        for p in r.clone() {
            if spec.degree() == 1 {
                v.push(RingElement::from_i64(p, 0));
            } else {
                for q in r.clone() {
                    v.push(RingElement::from_i64(p, q));
                }
            }
        }
        v
    };
    let in_range = |x: &RingElement| -> bool {
        let bound = num_bigint::BigInt::from(entry_bound);
        x.p.clone().abs() <= bound && x.q.clone().abs() <= bound
    };
    use num_traits::Signed;

    let push = |g: GroupElement, out: &mut Vec<(GroupElement, Vec<f64>)>, seen: &mut HashSet<GroupElement>| {
        let gz = mobius_apply(&g, z, spec);
        let uv: Vec<f64> = (0..d).map(|j| u_invariant(gz.coord(j), z.coord(j))).collect();
        if uv.iter().zip(v).all(|(u, vj)| u <= vj) && seen.insert(g.clone()) {
            out.push((g, uv));
        }
    };

    for a in &coeffs {
        for c in &coeffs {
            for dd in &coeffs {
                candidates += 1;
                if candidates > 1_000_000_000 {
                    return Err(Error::CostGuard(candidates));
                }
                let ad1 = a.mul(dd, spec).sub(&RingElement::one());
                if c.is_zero() {
                    // need a d = 1: b is free
                    if !ad1.is_zero() {
                        continue;
                    }
                    for b in &coeffs {
                        let g = GroupElement::new(a.clone(), b.clone(), c.clone(), dd.clone(), spec);
                        push(g, &mut out, &mut seen);
                    }
                } else {
                    // b = (a d - 1) / c must be integral and in range
                    let (num, nc) = if spec.degree() == 1 {
                        (ad1.clone(), c.p.clone())
                    } else {
                        (ad1.mul(&c.conj(spec), spec), c.norm(spec))
                    };
                    if (&num.p % &nc) != num_bigint::BigInt::from(0)
                        || (&num.q % &nc) != num_bigint::BigInt::from(0)
                    {
                        continue;
                    }
                    let b = RingElement::new(&num.p / &nc, &num.q / &nc);
                    if !in_range(&b) {
                        continue;
                    }
                    let g = GroupElement::new(a.clone(), b, c.clone(), dd.clone(), spec);
                    push(g, &mut out, &mut seen);
                }
            }
        }
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;

    fn zi() -> MultiPoint {
        MultiPoint::new(vec![Point::new(0.0, 1.0)])
    }

    fn zii() -> MultiPoint {
        MultiPoint::new(vec![Point::new(0.0, 1.0), Point::new(0.0, 1.0)])
    }

    fn sorted(mut v: Vec<(GroupElement, Vec<f64>)>) -> Vec<GroupElement> {
        v.sort_by(|x, y| x.0.cmp(&y.0));
        v.into_iter().map(|(g, _)| g).collect()
    }

    #[test]
    fn d1_small_box_is_stabilizer() {
        let f = FieldSpec::rationals();
        let got = enumerate_box_orbit(&zi(), &[0.2], &f).unwrap();
        assert_eq!(got.len(), 2); // identity and the rotation
        let oracle = naive_oracle(&zi(), &[0.2], 2, &f).unwrap();
        assert_eq!(sorted(got), sorted(oracle));
    }

    #[test]
    fn d1_quarter_shell() {
        let f = FieldSpec::rationals();
        let got = enumerate_box_orbit(&zi(), &[0.25], &f).unwrap();
        let oracle = naive_oracle(&zi(), &[0.25], 3, &f).unwrap();
        assert_eq!(sorted(got.clone()), sorted(oracle));
        assert!(got.len() > 2);
    }

    #[test]
    fn d2_small_box_is_stabilizer() {
        let f = FieldSpec::real_quadratic(5).unwrap();
        let got = enumerate_box_orbit(&zii(), &[0.1, 0.1], &f).unwrap();
        let oracle = naive_oracle(&zii(), &[0.1, 0.1], 2, &f).unwrap();
        assert_eq!(sorted(got), sorted(oracle));
    }

    #[test]
    fn no_duplicates() {
        let f = FieldSpec::rationals();
        let got = enumerate_box_orbit(&zi(), &[2.0], &f).unwrap();
        let set: HashSet<GroupElement> = got.iter().map(|(g, _)| g.clone()).collect();
        assert_eq!(set.len(), got.len());
    }

    #[test]
    fn elliptic_point_stabilizer() {
        let f = FieldSpec::rationals();
        let rho = MultiPoint::new(vec![Point::new(0.5, 3f64.sqrt() / 2.0)]);
        let got = enumerate_box_orbit(&rho, &[0.1], &f).unwrap();
        let oracle = naive_oracle(&rho, &[0.1], 2, &f).unwrap();
        assert_eq!(sorted(got.clone()), sorted(oracle));
        assert_eq!(got.len(), 3); // order-3 stabilizer in PSL_2(Z)
    }

    #[test]
    fn count_box_examples() {
        let f = FieldSpec::rationals();
        let r = count_box(&zi(), &BoxSpec::new(vec![0.0], vec![0.2]), &f).unwrap();
        assert_eq!(r.count, 2);
        assert!(r.count <= r.candidates);

        // empty shell
        let r = count_box(&zi(), &BoxSpec::new(vec![0.11], vec![0.12]), &f).unwrap();
        assert_eq!(r.count, 0);

        // monotone in V
        let mut prev = 0;
        for v in [0.2, 0.5, 1.0, 2.0, 5.0] {
            let r = count_box(&zi(), &BoxSpec::new(vec![0.0], vec![v]), &f).unwrap();
            assert!(r.count >= prev);
            prev = r.count;
        }
    }

    #[test]
    fn hypercube_at_zero_counts_stabilizer() {
        let f = FieldSpec::rationals();
        let r = count_hypercube(&zi(), 0.0, &f).unwrap();
        assert_eq!(r.count, 2);
        let t_quarter = crate::geom::dist_from_u(0.25);
        let r2 = count_hypercube(&zi(), t_quarter, &f).unwrap();
        let oracle = naive_oracle(&zi(), &[0.25], 3, &f).unwrap();
        assert_eq!(r2.count as usize, oracle.len());
        assert!(r2.count > r.count);
    }

    #[test]
    fn shell_additivity() {
        let f = FieldSpec::rationals();
        // W = 0.7 is not a realized u-value at z = i
        let all = count_box(&zi(), &BoxSpec::new(vec![0.0], vec![3.0]), &f).unwrap();
        let low = count_box(&zi(), &BoxSpec::new(vec![0.0], vec![0.7]), &f).unwrap();
        let high = count_box(&zi(), &BoxSpec::new(vec![0.7], vec![3.0]), &f).unwrap();
        assert_eq!(all.count, low.count + high.count);
    }

    #[test]
    fn strip_validation_and_coincidence() {
        let f = FieldSpec::real_quadratic(5).unwrap();
        // Q empty is invalid
        let bad = StripSpec { e: vec![0, 1], a: vec![0.0, 0.0], b: vec![1.0, 1.0], t: 1.0 };
        assert!(matches!(count_strip(&zii(), &bad, &f), Err(Error::InvalidStrip)));

        // strip with [0, B) on E={1}, T = B: nearly a box; compare against a
        // direct region count with matching bounds
        let strip = StripSpec { e: vec![1], a: vec![0.0], b: vec![0.05], t: 0.05 };
        let r = count_strip(&zii(), &strip, &f).unwrap();
        let oracle = naive_oracle(&zii(), &[u_from_dist(0.05), u_from_dist(0.05)], 2, &f).unwrap();
        // strip is half-open in coordinate 1, closed in coordinate 0; at this
        // tiny radius only the stabilizer (u = 0) is present so they agree
        assert_eq!(r.count as usize, oracle.len());
    }

    #[test]
    fn strip_small_matches_oracle() {
        let f = FieldSpec::real_quadratic(5).unwrap();
        let strip = StripSpec { e: vec![1], a: vec![0.0], b: vec![1.0], t: 0.8 };
        let r = count_strip(&zii(), &strip, &f).unwrap();
        let vb = u_from_dist(1.0);
        let vt = u_from_dist(0.8);
        let oracle = naive_oracle(&zii(), &[vt, vb], 3, &f).unwrap();
        let expected = oracle
            .iter()
            .filter(|(_, uv)| uv[0] <= vt && uv[1] < vb)
            .count();
        assert_eq!(r.count as usize, expected);
    }
}
