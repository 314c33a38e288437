//! Exact arithmetic in Z and in rings of integers O_F of real quadratic
//! fields Q(sqrt m), m in {2, 3, 5, 13}.
//!
//! Elements are stored as exact coefficient pairs (p, q) with respect to the
//! integral basis {1, omega}, where omega = sqrt(m) for m = 2, 3 (mod 4) and
//! omega = (1 + sqrt(m))/2 for m = 1 (mod 4). All fields in the supported
//! list are norm-Euclidean, which makes the Bezout routine terminate.
//!
//! Accept/reject decisions that affect counts are made exactly: a membership
//! test |sigma_j(x)| <= B is decided by comparing the integer pair behind
//! 2 sigma_j(x) = A + C sqrt(m) against the exact rational value of B.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Which integral basis the field uses for omega.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// omega = sqrt(m), for m = 2, 3 (mod 4); omega^2 = m.
    Sqrt,
    /// omega = (1 + sqrt(m))/2, for m = 1 (mod 4); omega^2 = omega + (m-1)/4.
    HalfSqrt,
}

/// A supported base field: Q (degree 1) or a real quadratic field Q(sqrt m).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    degree: usize,
    m: i64,
    basis: BasisKind,
    /// Fundamental unit, degree 2 only.
    eps: RingElement,
    /// Real embeddings of omega: (sigma_1(omega), sigma_2(omega)).
    omega_emb: [f64; 2],
}

impl FieldSpec {
    /// The rational field: d = 1, ring of integers Z.
    pub fn rationals() -> FieldSpec {
        FieldSpec {
            degree: 1,
            m: 1,
            basis: BasisKind::Sqrt,
            eps: RingElement::from_i64(1, 0),
            omega_emb: [0.0, 0.0],
        }
    }

    /// A real quadratic field Q(sqrt m) for norm-Euclidean m in {2, 3, 5, 13}.
    pub fn real_quadratic(m: i64) -> Result<FieldSpec> {
        let (basis, eps) = match m {
            // eps = 1 + sqrt(2), norm -1
            2 => (BasisKind::Sqrt, RingElement::from_i64(1, 1)),
            // eps = 2 + sqrt(3), norm +1
            3 => (BasisKind::Sqrt, RingElement::from_i64(2, 1)),
            // eps = (1 + sqrt(5))/2, norm -1
            5 => (BasisKind::HalfSqrt, RingElement::from_i64(0, 1)),
            // eps = (3 + sqrt(13))/2 = 1 + omega, norm -1
            13 => (BasisKind::HalfSqrt, RingElement::from_i64(1, 1)),
            _ => return Err(Error::UnsupportedField(m)),
        };
        let s = (m as f64).sqrt();
        let omega_emb = match basis {
            BasisKind::Sqrt => [s, -s],
            BasisKind::HalfSqrt => [(1.0 + s) / 2.0, (1.0 - s) / 2.0],
        };
        Ok(FieldSpec { degree: 2, m, basis, eps, omega_emb })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn basis(&self) -> BasisKind {
        self.basis
    }

    /// Fundamental unit (degree 2; returns 1 for degree 1).
    pub fn fundamental_unit(&self) -> &RingElement {
        &self.eps
    }

    /// Cached double embeddings of omega.
    pub fn omega_emb(&self) -> [f64; 2] {
        self.omega_emb
    }
}

/// An exact element p + q*omega of the ring of integers (q = 0 for Z).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingElement {
    pub p: BigInt,
    pub q: BigInt,
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.is_zero() {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{}+{}w", self.p, self.q)
        }
    }
}

impl RingElement {
    pub fn new(p: BigInt, q: BigInt) -> RingElement {
        RingElement { p, q }
    }

    pub fn from_i64(p: i64, q: i64) -> RingElement {
        RingElement { p: BigInt::from(p), q: BigInt::from(q) }
    }

    pub fn zero() -> RingElement {
        RingElement::from_i64(0, 0)
    }

    pub fn one() -> RingElement {
        RingElement::from_i64(1, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn neg(&self) -> RingElement {
        RingElement { p: -&self.p, q: -&self.q }
    }

    pub fn add(&self, rhs: &RingElement) -> RingElement {
        RingElement { p: &self.p + &rhs.p, q: &self.q + &rhs.q }
    }

    pub fn sub(&self, rhs: &RingElement) -> RingElement {
        RingElement { p: &self.p - &rhs.p, q: &self.q - &rhs.q }
    }

    /// Ring product; the multiplication rule depends on the basis.
    pub fn mul(&self, rhs: &RingElement, spec: &FieldSpec) -> RingElement {
        let pp = &self.p * &rhs.p;
        let pq = &self.p * &rhs.q + &self.q * &rhs.p;
        let qq = &self.q * &rhs.q;
        match spec.basis {
            // omega^2 = m
            BasisKind::Sqrt => RingElement { p: pp + qq * BigInt::from(spec.m), q: pq },
            // omega^2 = omega + (m-1)/4
            BasisKind::HalfSqrt => {
                let c = BigInt::from((spec.m - 1) / 4);
                RingElement { p: pp + &qq * c, q: pq + qq }
            }
        }
    }

    /// Galois conjugate (identity for degree 1 elements, q = 0).
    pub fn conj(&self, spec: &FieldSpec) -> RingElement {
        match spec.basis {
            BasisKind::Sqrt => RingElement { p: self.p.clone(), q: -&self.q },
            // conj(omega) = 1 - omega
            BasisKind::HalfSqrt => RingElement { p: &self.p + &self.q, q: -&self.q },
        }
    }

    /// Field norm sigma_1(x) * sigma_2(x), an exact integer.
    pub fn norm(&self, spec: &FieldSpec) -> BigInt {
        if spec.degree == 1 {
            return self.p.clone();
        }
        let c = self.mul(&self.conj(spec), spec);
        debug_assert!(c.q.is_zero());
        c.p
    }

    /// Integer pair (A, C) with 2 sigma_j(x) = A + C sqrt(m); C carries the
    /// embedding sign (j = 0: +sqrt(m), j = 1: -sqrt(m)).
    pub fn twice_embedding_parts(&self, j: usize, spec: &FieldSpec) -> (BigInt, BigInt) {
        if spec.degree == 1 {
            return (BigInt::from(2) * &self.p, BigInt::zero());
        }
        let (a, c) = match spec.basis {
            BasisKind::Sqrt => (BigInt::from(2) * &self.p, BigInt::from(2) * &self.q),
            BasisKind::HalfSqrt => (BigInt::from(2) * &self.p + &self.q, self.q.clone()),
        };
        if j == 0 {
            (a, c)
        } else {
            (a, -c)
        }
    }

    /// The j-th real embedding as a double.
    pub fn embed_one(&self, j: usize, spec: &FieldSpec) -> f64 {
        let p = self.p.to_f64().unwrap_or(f64::INFINITY);
        let q = self.q.to_f64().unwrap_or(f64::INFINITY);
        p + q * spec.omega_emb[j]
    }

    /// All real embeddings (sigma_1, ..., sigma_d).
    pub fn embed(&self, spec: &FieldSpec) -> Vec<f64> {
        (0..spec.degree).map(|j| self.embed_one(j, spec)).collect()
    }

    /// Exact test lo <= sigma_j(x) <= hi, with the rational values of the
    /// doubles lo, hi taken literally.
    pub fn embedding_in_interval(&self, j: usize, lo: f64, hi: f64, spec: &FieldSpec) -> bool {
        let (a, c) = self.twice_embedding_parts(j, spec);
        let lo2 = BigRational::from_float(2.0 * lo);
        let hi2 = BigRational::from_float(2.0 * hi);
        let (lo2, hi2) = match (lo2, hi2) {
            (Some(l), Some(h)) => (l, h),
            _ => return false, // non-finite bound
        };
        let m = if spec.degree == 1 { BigInt::zero() } else { BigInt::from(spec.m) };
        cmp_quad_surd(&a, &c, &m, &lo2) != Ordering::Less
            && cmp_quad_surd(&a, &c, &m, &hi2) != Ordering::Greater
    }

    /// Exact test |sigma_j(x)| <= bound.
    pub fn embedding_abs_le(&self, j: usize, bound: f64, spec: &FieldSpec) -> bool {
        self.embedding_in_interval(j, -bound, bound, spec)
    }
}

/// Exact comparison of A + C sqrt(m) against a rational t (m >= 0).
fn cmp_quad_surd(a: &BigInt, c: &BigInt, m: &BigInt, t: &BigRational) -> Ordering {
    // A + C sqrt(m) vs t  <=>  C sqrt(m) vs t - A
    let l = t - BigRational::from(a.clone());
    let c_rat = BigRational::from(c.clone());
    let m_rat = BigRational::from(m.clone());
    let lhs_sq = &c_rat * &c_rat * &m_rat;
    let rhs_sq = &l * &l;
    let c_nonneg = !c.is_negative();
    let l_nonneg = !l.is_negative();
    match (c_nonneg, l_nonneg) {
        (true, false) => Ordering::Greater,
        (false, true) => {
            if c.is_zero() && l.is_zero() {
                Ordering::Equal
            } else {
                Ordering::Less
            }
        }
        // both sides nonnegative: compare squares
        (true, true) => lhs_sq.cmp(&rhs_sq),
        // both sides negative: comparison of squares flips
        (false, false) => rhs_sq.cmp(&lhs_sq),
    }
}

/// Nearest-coefficient quotient candidates for norm-Euclidean division.
fn quotient_candidates(num: &RingElement, den_norm: &BigInt) -> Vec<RingElement> {
    let p0 = round_nearest(&num.p, den_norm);
    let q0 = round_nearest(&num.q, den_norm);
    let mut out = Vec::with_capacity(9);
    for dp in -1i64..=1 {
        for dq in -1i64..=1 {
            out.push(RingElement::new(&p0 + BigInt::from(dp), &q0 + BigInt::from(dq)));
        }
    }
    out
}


/// round(n/d) to the nearest integer, ties toward +infinity; exact.
fn round_nearest(n: &BigInt, d: &BigInt) -> BigInt {
    // floor((2n + d) / (2d)) for d > 0; normalize sign first
    let (n, d) = if d.is_negative() { (-n, -d) } else { (n.clone(), d.clone()) };
    let num = BigInt::from(2) * n + &d;
    let den = BigInt::from(2) * &d;
    num.div_floor(&den)
}

/// Norm-Euclidean division: a = q*b + r with |N(r)| < |N(b)|.
fn euclid_divide(a: &RingElement, b: &RingElement, spec: &FieldSpec) -> Result<(RingElement, RingElement)> {
    debug_assert!(!b.is_zero());
    if spec.degree == 1 {
        let q = BigInt::from(round_nearest(&a.p, &b.p));
        let q = RingElement::new(q, BigInt::zero());
        let r = a.sub(&q.mul(b, spec));
        return Ok((q, r));
    }
    let nb = b.norm(spec);
    let nb_abs = nb.abs();
    // exact coordinates of a/b are (a * conj(b)) / N(b)
    let num = a.mul(&b.conj(spec), spec);
    for cand in quotient_candidates(&num, &nb) {
        let r = a.sub(&cand.mul(b, spec));
        if r.norm(spec).abs() < nb_abs {
            return Ok((cand, r));
        }
    }
    Err(Error::DivisionStuck)
}

/// Multiplicative inverse of a unit (|N(u)| = 1).
pub fn unit_inverse(u: &RingElement, spec: &FieldSpec) -> RingElement {
    if spec.degree == 1 {
        // u = +-1 is its own inverse
        return u.clone();
    }
    let n = u.norm(spec);
    let c = u.conj(spec);
    if n == BigInt::one() {
        c
    } else {
        debug_assert!(n == BigInt::from(-1));
        c.neg()
    }
}

/// Extended Euclid in O_F: returns (a, b) with a*d0 - b*c = 1, or None when
/// the ideal (c, d0) is proper.
pub fn bezout(c: &RingElement, d0: &RingElement, spec: &FieldSpec) -> Result<Option<(RingElement, RingElement)>> {
    assert!(!(c.is_zero() && d0.is_zero()), "bezout requires (c, d0) != (0, 0)");
    // Track r = x*c + y*d0 through the remainder sequence.
    let mut r0 = c.clone();
    let mut x0 = RingElement::one();
    let mut y0 = RingElement::zero();
    let mut r1 = d0.clone();
    let mut x1 = RingElement::zero();
    let mut y1 = RingElement::one();
    while !r1.is_zero() {
        let (q, r) = euclid_divide(&r0, &r1, spec)?;
        let x = x0.sub(&q.mul(&x1, spec));
        let y = y0.sub(&q.mul(&y1, spec));
        r0 = r1;
        x0 = x1;
        y0 = y1;
        r1 = r;
        x1 = x;
        y1 = y;
    }
    // r0 = x0*c + y0*d0 is a gcd; the pair is coprime iff r0 is a unit
    let n = r0.norm(spec).abs();
    if n != BigInt::one() {
        return Ok(None);
    }
    let inv = unit_inverse(&r0, spec);
    let x = x0.mul(&inv, spec);
    let y = y0.mul(&inv, spec);
    // x*c + y*d0 = 1  =>  a = y, b = -x gives a*d0 - b*c = 1
    let a = y;
    let b = x.neg();
    debug_assert!({
        let det = a.mul(d0, spec).sub(&b.mul(c, spec));
        det == RingElement::one()
    });
    Ok(Some((a, b)))
}

/// All x in O_F with lo_j <= sigma_j(x) <= hi_j for every embedding, each
/// exactly once. Outer coefficient range comes from the two embedding
/// constraints; the test near interval endpoints is exact.
pub fn enumerate_ring_interval_box(lo: &[f64], hi: &[f64], spec: &FieldSpec) -> Vec<RingElement> {
    let mut out = Vec::new();
    if spec.degree == 1 {
        let (lo, hi) = (lo[0], hi[0]);
        if lo > hi {
            return out;
        }
        let start = lo.floor() as i64 - 1;
        let end = hi.ceil() as i64 + 1;
        for p in start..=end {
            let x = RingElement::from_i64(p, 0);
            if x.embedding_in_interval(0, lo, hi, spec) {
                out.push(x);
            }
        }
        return out;
    }
    let w1 = spec.omega_emb[0];
    let w2 = spec.omega_emb[1];
    // sigma_1 - sigma_2 = q (w1 - w2)
    let dw = w1 - w2;
    let q_lo = ((lo[0] - hi[1]) / dw).floor() as i64 - 1;
    let q_hi = ((hi[0] - lo[1]) / dw).ceil() as i64 + 1;
    for q in q_lo..=q_hi {
        let qf = q as f64;
        let p_lo = (lo[0] - qf * w1).max(lo[1] - qf * w2);
        let p_hi = (hi[0] - qf * w1).min(hi[1] - qf * w2);
        if p_lo > p_hi + 2.0 {
            continue;
        }
        let start = p_lo.floor() as i64 - 1;
        let end = p_hi.ceil() as i64 + 1;
        for p in start..=end {
            let x = RingElement::from_i64(p, q);
            if x.embedding_in_interval(0, lo[0], hi[0], spec)
                && x.embedding_in_interval(1, lo[1], hi[1], spec)
            {
                out.push(x);
            }
        }
    }
    out
}

/// All x in O_F with |sigma_j(x)| <= bounds_j for every embedding.
pub fn enumerate_ring_box(bounds: &[f64], spec: &FieldSpec) -> Vec<RingElement> {
    let lo: Vec<f64> = bounds.iter().map(|b| -b).collect();
    enumerate_ring_interval_box(&lo, bounds, spec)
}

/// All units +/- eps^k with |sigma_j| <= bounds_j for all j.
///
/// |sigma_1(eps^k)| is monotone in k, |sigma_2| anti-monotone, so the
/// admissible k form an interval and stepping outward is exhaustive.
pub fn units_in_box(bounds: &[f64], spec: &FieldSpec) -> Vec<RingElement> {
    let in_box = |u: &RingElement| -> bool {
        (0..spec.degree).all(|j| u.embedding_abs_le(j, bounds[j], spec))
    };
    let mut out = Vec::new();
    if spec.degree == 1 {
        let one = RingElement::one();
        if in_box(&one) {
            out.push(one.clone());
            out.push(one.neg());
        }
        return out;
    }
    let eps = spec.fundamental_unit().clone();
    let eps_inv = unit_inverse(&eps, spec);
    let push_pair = |u: &RingElement, out: &mut Vec<RingElement>| {
        out.push(u.clone());
        out.push(u.neg());
    };
    if in_box(&RingElement::one()) {
        push_pair(&RingElement::one(), &mut out);
    }
    let mut u = eps.clone();
    while in_box(&u) {
        push_pair(&u, &mut out);
        u = u.mul(&eps, spec);
    }
    let mut u = eps_inv.clone();
    while in_box(&u) {
        push_pair(&u, &mut out);
        u = u.mul(&eps_inv, spec);
    }
    out
}
