//! Fundamental-domain reduction and the height functions behind n(T,z) and
//! n(z), which feed the report columns of the experiment harness.
//!
//! The d = 1 reduction is the classic translate/invert loop into the
//! standard fundamental domain of PSL_2(Z). The d = 2 reduction is an
//! approximate cusp-at-infinity reduction (single cusp, class number 1):
//! translate x by the nearest O_F lattice vector, balance the heights with
//! powers of the squared fundamental unit, invert while y_1 y_2 < 1.

use crate::error::{Error, Result};
use crate::field::{unit_inverse, FieldSpec, RingElement};
use crate::geom::{GroupElement, MultiPoint, Point};

/// Heights of a point after (approximate) reduction.
#[derive(Debug, Clone)]
pub struct HeightReport {
    pub reduced: MultiPoint,
    /// Clamped heights: max(1, y_j of the reduced point).
    pub heights: Vec<f64>,
    /// n(z) = prod_j max(1, y_j).
    pub n_of_z: f64,
    /// d = 2 reduction is iterative; false when the iteration cap was hit.
    pub converged: bool,
}

/// n(T, z) = prod_j max(1, height_j / T_j).
pub fn n_at_scale(heights: &[f64], t: &[f64]) -> f64 {
    heights.iter().zip(t).map(|(h, tj)| (h / tj).max(1.0)).product()
}

/// Reduce z into {|x| <= 1/2, |z| >= 1} and return g with g z = reduced.
pub fn reduce_sl2z(z: Point) -> Result<(Point, GroupElement)> {
    let spec = FieldSpec::rationals();
    let mut x = z.x;
    let mut y = z.y;
    // track g = (a b; c d) acting so far
    let (mut a, mut b, mut c, mut d) = (1i64, 0i64, 0i64, 1i64);
    for _ in 0..10_000 {
        let n = x.round();
        if n != 0.0 {
            let ni = n as i64;
            x -= n;
            a -= ni * c;
            b -= ni * d;
        }
        let norm2 = x * x + y * y;
        if norm2 >= 1.0 - 1e-15 {
            let g = GroupElement::new(
                RingElement::from_i64(a, 0),
                RingElement::from_i64(b, 0),
                RingElement::from_i64(c, 0),
                RingElement::from_i64(d, 0),
                &spec,
            );
            return Ok((Point::new(x, y), g));
        }
        // invert: z -> -1/z, matrix (0 -1; 1 0)
        let nx = -x / norm2;
        let ny = y / norm2;
        x = nx;
        y = ny;
        let (na, nb) = (-c, -d);
        let (nc, nd) = (a, b);
        a = na;
        b = nb;
        c = nc;
        d = nd;
    }
    Err(Error::IterationCap)
}

/// Heights and n(z) for a point, per the field's degree.
pub fn height_components(z: &MultiPoint, spec: &FieldSpec) -> Result<HeightReport> {
    match spec.degree() {
        1 => {
            let (red, _) = reduce_sl2z(z.coord(0))?;
            let h = red.y.max(1.0);
            Ok(HeightReport {
                reduced: MultiPoint::new(vec![red]),
                heights: vec![h],
                n_of_z: h,
                converged: true,
            })
        }
        _ => reduce_hilbert_approx(z, spec),
    }
}

fn reduce_hilbert_approx(z: &MultiPoint, spec: &FieldSpec) -> Result<HeightReport> {
    let w = spec.omega_emb();
    let eps = spec.fundamental_unit();
    let e1 = eps.embed_one(0, spec).abs();
    // log-scale of the squared-unit action on y_1/y_2
    let unit_log = 4.0 * e1.ln();
    let mut pts: Vec<(f64, f64)> = z.0.iter().map(|p| (p.x, p.y)).collect();
    let mut converged = false;
    for _ in 0..100 {
        let mut changed = false;
        // translate x by the nearest lattice vector p + q omega
        let q = ((pts[0].0 - pts[1].0) / (w[0] - w[1])).round();
        let p = (pts[0].0 - q * w[0]).round();
        if p != 0.0 || q != 0.0 {
            pts[0].0 -= p + q * w[0];
            pts[1].0 -= p + q * w[1];
            changed = true;
        }
        // balance heights with eps^{2k}: z_j -> sigma_j(eps)^{2k} z_j
        let imbalance = (pts[0].1 / pts[1].1).ln();
        let k = (-imbalance / unit_log).round();
        if k != 0.0 {
            let eps_k = if k > 0.0 { eps.clone() } else { unit_inverse(eps, spec) };
            let reps = k.abs() as usize;
            for _ in 0..reps {
                for j in 0..2 {
                    let s = eps_k.embed_one(j, spec);
                    pts[j].0 *= s * s;
                    pts[j].1 *= s * s;
                }
            }
            changed = true;
        }
        // invert while the y-product is below the cusp threshold
        if pts[0].1 * pts[1].1 < 1.0 - 1e-12 {
            for pj in pts.iter_mut() {
                let n2 = pj.0 * pj.0 + pj.1 * pj.1;
                *pj = (-pj.0 / n2, pj.1 / n2);
            }
            changed = true;
        }
        if !changed {
            converged = true;
            break;
        }
    }
    let reduced = MultiPoint::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect());
    let heights: Vec<f64> = pts.iter().map(|&(_, y)| y.max(1.0)).collect();
    let n_of_z = heights.iter().product();
    Ok(HeightReport { reduced, heights, n_of_z, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::mobius_apply;
    use rand::{Rng, SeedableRng};

    #[test]
    fn reduce_examples() {
        let (r, g) = reduce_sl2z(Point::new(5.0, 1.0)).unwrap();
        assert!((r.x).abs() < 1e-12 && (r.y - 1.0).abs() < 1e-12);
        // g really maps z to the reduced point
        let f = FieldSpec::rationals();
        let img = mobius_apply(&g, &MultiPoint::new(vec![Point::new(5.0, 1.0)]), &f);
        assert!((img.coord(0).x - r.x).abs() < 1e-9 && (img.coord(0).y - r.y).abs() < 1e-9);

        let (r, _) = reduce_sl2z(Point::new(0.0, 0.5)).unwrap();
        assert!((r.y - 2.0).abs() < 1e-12);

        let (r, g) = reduce_sl2z(Point::new(0.25, 1.5)).unwrap();
        assert_eq!(g, GroupElement::identity());
        assert!((r.x - 0.25).abs() < 1e-15 && (r.y - 1.5).abs() < 1e-15);
    }

    #[test]
    fn reduced_point_in_fundamental_domain() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(17);
        for _ in 0..500 {
            let z = Point::new(rng.gen_range(-20.0..20.0), rng.gen_range(0.01..20.0));
            let (r, _) = reduce_sl2z(z).unwrap();
            assert!(r.x.abs() <= 0.5 + 1e-12);
            assert!(r.x * r.x + r.y * r.y >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn heights_d1() {
        let f = FieldSpec::rationals();
        let h = height_components(&MultiPoint::new(vec![Point::new(0.0, 1.0)]), &f).unwrap();
        assert_eq!(h.n_of_z, 1.0);
        let h = height_components(&MultiPoint::new(vec![Point::new(0.0, 10.0)]), &f).unwrap();
        assert!((h.n_of_z - 10.0).abs() < 1e-12);
    }

    #[test]
    fn n_is_gamma_invariant_d1() {
        let f = FieldSpec::rationals();
        let mut rng = rand::rngs::StdRng::seed_from_u64(23);
        for _ in 0..10 {
            let z = Point::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.2..8.0));
            let n0 = height_components(&MultiPoint::new(vec![z]), &f).unwrap().n_of_z;
            // a few explicit group elements
            for (a, b, c, d) in [(1i64, 3i64, 0i64, 1i64), (0, -1, 1, 0), (2, 1, 1, 1), (1, 0, 3, 1)] {
                let g = GroupElement::new(
                    RingElement::from_i64(a, 0),
                    RingElement::from_i64(b, 0),
                    RingElement::from_i64(c, 0),
                    RingElement::from_i64(d, 0),
                    &f,
                );
                let gz = mobius_apply(&g, &MultiPoint::new(vec![z]), &f);
                let n1 = height_components(&gz, &f).unwrap().n_of_z;
                assert!((n0 - n1).abs() <= 1e-6 * (1.0 + n0), "{n0} vs {n1}");
            }
        }
    }

    #[test]
    fn hilbert_unit_balancing() {
        let f = FieldSpec::real_quadratic(5).unwrap();
        // strongly unbalanced heights with y-product 1: the unit scaling
        // should balance them, giving n = 1
        let z = MultiPoint::new(vec![Point::new(0.0, 10.0), Point::new(0.0, 0.1)]);
        let h = height_components(&z, &f).unwrap();
        assert!(h.converged);
        assert!((h.n_of_z - 1.0).abs() < 0.75, "n = {}", h.n_of_z);
        let prod: f64 = h.reduced.0.iter().map(|p| p.y).product();
        assert!((prod - 1.0).abs() < 1e-9);
        let ratio = h.reduced.coord(0).y / h.reduced.coord(1).y;
        assert!(ratio < 7.0 && ratio > 1.0 / 7.0, "ratio = {ratio}");
    }

    #[test]
    fn n_at_scale_clamps() {
        assert_eq!(n_at_scale(&[2.0, 3.0], &[10.0, 10.0]), 1.0);
        assert!((n_at_scale(&[20.0, 3.0], &[10.0, 1.0]) - 6.0).abs() < 1e-12);
    }
}
