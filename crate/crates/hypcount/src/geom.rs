//! Hyperbolic-plane geometry: the Moebius action on H^d, the point-pair
//! invariant u(z, w) = |z-w|^2 / (4 y y'), and the admissibility bounds that
//! drive the enumeration engine.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, RingElement};

/// A point x + iy of the upper half plane, y > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Point {
        assert!(y > 0.0, "point must lie in the upper half plane");
        Point { x, y }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

/// A point of H^d, one coordinate per real embedding of the field.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoint(pub Vec<Point>);

impl MultiPoint {
    pub fn new(points: Vec<Point>) -> MultiPoint {
        MultiPoint(points)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn coord(&self, j: usize) -> Point {
        self.0[j]
    }
}

/// A class in PSL_2(O_F): a 2x2 matrix over the ring with determinant 1,
/// stored as the canonical representative of {g, -g}. The canonical choice
/// is that the first nonzero entry of (c, d, a) has positive first embedding.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    pub a: RingElement,
    pub b: RingElement,
    pub c: RingElement,
    pub d: RingElement,
}

impl GroupElement {
    /// Build from entries with a*d - b*c = 1, canonicalizing the sign.
    pub fn new(
        a: RingElement,
        b: RingElement,
        c: RingElement,
        d: RingElement,
        spec: &FieldSpec,
    ) -> GroupElement {
        debug_assert_eq!(a.mul(&d, spec).sub(&b.mul(&c, spec)), RingElement::one(), "determinant must be 1");
        let lead = if !c.is_zero() {
            &c
        } else if !d.is_zero() {
            &d
        } else {
            &a
        };
        if lead.embed_one(0, spec) < 0.0 {
            GroupElement { a: a.neg(), b: b.neg(), c: c.neg(), d: d.neg() }
        } else {
            GroupElement { a, b, c, d }
        }
    }

    pub fn identity() -> GroupElement {
        GroupElement {
            a: RingElement::one(),
            b: RingElement::zero(),
            c: RingElement::zero(),
            d: RingElement::one(),
        }
    }
}

/// Fractional linear action of g on z, factor by factor through the real
/// embeddings.
pub fn mobius_apply(g: &GroupElement, z: &MultiPoint, spec: &FieldSpec) -> MultiPoint {
    let pts = (0..z.degree())
        .map(|j| {
            let a = g.a.embed_one(j, spec);
            let b = g.b.embed_one(j, spec);
            let c = g.c.embed_one(j, spec);
            let d = g.d.embed_one(j, spec);
            let zj = z.coord(j).to_complex();
            let w = (a * zj + b) / (c * zj + d);
            Point::new(w.re, w.im)
        })
        .collect();
    MultiPoint(pts)
}

/// u(z, w) = |z - w|^2 / (4 y y'), the point-pair invariant.
pub fn u_invariant(z: Point, w: Point) -> f64 {
    let dx = z.x - w.x;
    let dy = z.y - w.y;
    (dx * dx + dy * dy) / (4.0 * z.y * w.y)
}

/// dist = 2 log(sqrt(u) + sqrt(u + 1)).
pub fn dist_from_u(u: f64) -> f64 {
    2.0 * (u.sqrt() + (u + 1.0).sqrt()).ln()
}

/// u = sinh^2(t / 2), inverse of `dist_from_u`.
pub fn u_from_dist(t: f64) -> f64 {
    let s = (t / 2.0).sinh();
    s * s
}

/// Relative guard band for floating admissibility tests. Admissibility only
/// over-approximates; final membership is decided per element by
/// `u_invariant`.
pub const ADMISSIBILITY_GUARD: f64 = 1e-9;

/// True when the bottom row (c, d0) can extend to some gamma with
/// u((gamma z)_j, z_j) <= V_j for all j. The bound is
/// |sigma_j(c) z_j + sigma_j(d0)|^2 <= (sqrt(V_j) + sqrt(V_j + 1))^2,
/// since Im(gamma z)_j / Im z_j = |sigma_j(c) z_j + sigma_j(d0)|^{-2} must be
/// within [e^{-dist}, e^{dist}].
pub fn cd_admissible(
    c: &RingElement,
    d0: &RingElement,
    z: &MultiPoint,
    v: &[f64],
    spec: &FieldSpec,
) -> bool {
    (0..z.degree()).all(|j| {
        let cj = c.embed_one(j, spec);
        let dj = d0.embed_one(j, spec);
        let zj = z.coord(j);
        let re = cj * zj.x + dj;
        let im = cj * zj.y;
        let s = v[j].sqrt() + (v[j] + 1.0).sqrt();
        re * re + im * im <= s * s * (1.0 + ADMISSIBILITY_GUARD)
    })
}

/// The set {t real : |w0 + t zeta| <= R} as a closed interval, or None when
/// empty. Endpoints come from the real quadratic
/// |zeta|^2 t^2 + 2 Re(w0 conj(zeta)) t + |w0|^2 - R^2 <= 0.
pub fn t_interval(w0: Complex64, zeta: Complex64, r: f64) -> Result<Option<(f64, f64)>> {
    let a = zeta.norm_sqr();
    if a < 1e-300 {
        return Err(Error::DegenerateDirection);
    }
    let b = (w0 * zeta.conj()).re;
    let c = w0.norm_sqr() - r * r;
    // a t^2 + 2 b t + c <= 0
    let disc = b * b - a * c;
    if disc < 0.0 {
        return Ok(None);
    }
    let s = disc.sqrt();
    Ok(Some(((-b - s) / a, (-b + s) / a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn f1() -> FieldSpec {
        FieldSpec::rationals()
    }

    fn pt(x: f64, y: f64) -> MultiPoint {
        MultiPoint::new(vec![Point::new(x, y)])
    }

    #[test]
    fn mobius_examples() {
        let f = f1();
        let i = pt(0.0, 1.0);
        let id = GroupElement::identity();
        assert_eq!(mobius_apply(&id, &i, &f), i);

        // rotation (0 -1; 1 0) fixes i
        let s = GroupElement::new(
            RingElement::zero(),
            RingElement::from_i64(-1, 0),
            RingElement::one(),
            RingElement::zero(),
            &f,
        );
        let w = mobius_apply(&s, &i, &f);
        assert!((w.coord(0).x).abs() < 1e-15 && (w.coord(0).y - 1.0).abs() < 1e-15);

        // translation
        let t = GroupElement::new(
            RingElement::one(),
            RingElement::one(),
            RingElement::zero(),
            RingElement::one(),
            &f,
        );
        let w = mobius_apply(&t, &i, &f);
        assert!((w.coord(0).x - 1.0).abs() < 1e-15 && (w.coord(0).y - 1.0).abs() < 1e-15);
    }

    #[test]
    fn u_invariant_examples() {
        let i = Point::new(0.0, 1.0);
        assert_eq!(u_invariant(i, i), 0.0);
        assert!((u_invariant(Point::new(0.0, 2.0), i) - 0.125).abs() < 1e-15);
        assert!((u_invariant(Point::new(1.0, 1.0), i) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn dist_u_round_trip() {
        assert_eq!(dist_from_u(0.0), 0.0);
        for k in 0..=300 {
            let t = k as f64 * 0.1;
            let u = u_from_dist(t);
            assert!((dist_from_u(u) - t).abs() <= 1e-12 * (1.0 + t));
        }
        let v = u_from_dist(dist_from_u(5.0));
        assert!((v - 5.0).abs() < 5.0 * 1e-12);
        let golden = 2.0 * ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((dist_from_u(0.25) - golden).abs() < 1e-12);
    }

    #[test]
    fn u_is_point_pair_invariant() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..1000 {
            // random real det-1 matrix
            let a: f64 = rng.gen_range(-2.0..2.0);
            let b: f64 = rng.gen_range(-2.0..2.0);
            let c: f64 = rng.gen_range(-2.0..2.0);
            // choose d so ad - bc = 1 when possible
            if a.abs() < 1e-3 {
                continue;
            }
            let d = (1.0 + b * c) / a;
            let z = Point::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.1..5.0));
            let w = Point::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.1..5.0));
            let act = |p: Point| {
                let zz = p.to_complex();
                let im = (a * zz + b) / (c * zz + d);
                Point::new(im.re, im.im)
            };
            let u1 = u_invariant(z, w);
            let u2 = u_invariant(act(z), act(w));
            assert!((u1 - u2).abs() <= 1e-9 * (1.0 + u1.abs()), "{u1} vs {u2}");
        }
    }

    #[test]
    fn trace_form_identity_at_i() {
        // 4 u(g i, i) + 2 = a^2 + b^2 + c^2 + d^2 for integer det-1 matrices
        let f = f1();
        let i = pt(0.0, 1.0);
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let mut checked = 0;
        while checked < 1000 {
            let a = rng.gen_range(-9i64..=9);
            let b = rng.gen_range(-9i64..=9);
            let c = rng.gen_range(-9i64..=9);
            // solve d from det if divisible
            if a == 0 {
                continue;
            }
            let num = 1 + b * c;
            if num % a != 0 {
                continue;
            }
            let d = num / a;
            let g = GroupElement::new(
                RingElement::from_i64(a, 0),
                RingElement::from_i64(b, 0),
                RingElement::from_i64(c, 0),
                RingElement::from_i64(d, 0),
                &f,
            );
            let gz = mobius_apply(&g, &i, &f);
            let lhs = 4.0 * u_invariant(gz.coord(0), i.coord(0)) + 2.0;
            let rhs = (a * a + b * b + c * c + d * d) as f64;
            assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs), "{lhs} vs {rhs}");
            checked += 1;
        }
    }

    #[test]
    fn cd_admissible_examples() {
        let f = f1();
        let i = pt(0.0, 1.0);
        assert!(cd_admissible(&RingElement::zero(), &RingElement::one(), &i, &[1.0], &f));
        assert!(!cd_admissible(&RingElement::from_i64(10, 0), &RingElement::zero(), &i, &[1.0], &f));
        assert!(cd_admissible(&RingElement::one(), &RingElement::one(), &i, &[1.0], &f));
    }

    #[test]
    fn t_interval_examples() {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let (lo, hi) = t_interval(z, one, 2.0).unwrap().unwrap();
        assert!((lo + 2.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);

        assert!(t_interval(Complex64::new(0.0, 5.0), one, 2.0).unwrap().is_none());

        let (lo, hi) = t_interval(Complex64::new(3.0, 0.0), one, 4.0).unwrap().unwrap();
        assert!((lo + 7.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);

        assert!(t_interval(one, Complex64::new(0.0, 0.0), 1.0).is_err());
    }
}
