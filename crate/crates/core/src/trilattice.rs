//! Exact arithmetic on the triangular lattice `Z[ω]`, `ω = e^{iπ/3}`.
//!
//! A point `a + bω` is stored as the integer pair `(a, b)`. Multiplication
//! uses the reduction `ω² = ω − 1`. Every geometric predicate in the crate is
//! evaluated on these integers; floating point only shows up when rendering.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// Lattice point `a + bω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct EPoint {
    pub a: i64,
    pub b: i64,
}

impl From<[i64; 2]> for EPoint {
    fn from(v: [i64; 2]) -> Self {
        EPoint::new(v[0], v[1])
    }
}

impl From<EPoint> for [i64; 2] {
    fn from(p: EPoint) -> Self {
        [p.a, p.b]
    }
}

/// `θ = 1 + ω`, the generator of the index-3 sublattice chain.
pub const THETA: EPoint = EPoint { a: 1, b: 1 };
/// `θ̄ = 2 − ω = θ·u_5`.
pub const THETA_BAR: EPoint = EPoint { a: 2, b: -1 };

impl EPoint {
    pub const ZERO: EPoint = EPoint { a: 0, b: 0 };

    pub const fn new(a: i64, b: i64) -> Self {
        EPoint { a, b }
    }

    /// Squared Euclidean length `a² + ab + b²` (unit side = 1).
    pub fn norm(self) -> i64 {
        self.a * self.a + self.a * self.b + self.b * self.b
    }

    /// Hexagonal max-norm `max(|a|, |b|, |a+b|)`; the lattice hexagon of
    /// radius k around 0 is exactly the set where this is `≤ k`.
    pub fn hex_norm(self) -> i64 {
        self.a.abs().max(self.b.abs()).max((self.a + self.b).abs())
    }

    /// Complex conjugate: `conj(a + bω) = (a + b) − bω`.
    pub fn conj(self) -> Self {
        EPoint::new(self.a + self.b, -self.b)
    }

    /// Exact quotient by θ, if `θ` divides `self`.
    pub fn div_theta(self) -> Option<EPoint> {
        // z·(2 − ω) = (2a + b, b − a), and θ·(2 − ω) = 3.
        let (p, q) = (2 * self.a + self.b, self.b - self.a);
        if p % 3 == 0 && q % 3 == 0 {
            Some(EPoint::new(p / 3, q / 3))
        } else {
            None
        }
    }

    /// `self · θ^k`.
    pub fn mul_theta_pow(self, k: u32) -> EPoint {
        (0..k).fold(self, |z, _| z * THETA)
    }

    /// Largest `k` such that `θ^k | self`; `None` for zero.
    pub fn theta_valuation(self) -> Option<u32> {
        if self == EPoint::ZERO {
            return None;
        }
        let mut z = self;
        let mut k = 0;
        while let Some(q) = z.div_theta() {
            z = q;
            k += 1;
        }
        Some(k)
    }

    /// Cartesian coordinates with unit side length. Only for rendering.
    pub fn to_xy(self) -> (f64, f64) {
        let a = self.a as f64;
        let b = self.b as f64;
        (a + 0.5 * b, b * 3f64.sqrt() / 2.0)
    }

    /// Integer affine image `(2a + b, b)`; preserves orientation and
    /// convexity, used by the hull code.
    pub(crate) fn affine(self) -> (i64, i64) {
        (2 * self.a + self.b, self.b)
    }
}

impl fmt::Display for EPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.a, self.b)
    }
}

impl Add for EPoint {
    type Output = EPoint;
    fn add(self, o: EPoint) -> EPoint {
        EPoint::new(self.a + o.a, self.b + o.b)
    }
}

impl AddAssign for EPoint {
    fn add_assign(&mut self, o: EPoint) {
        *self = *self + o;
    }
}

impl Sub for EPoint {
    type Output = EPoint;
    fn sub(self, o: EPoint) -> EPoint {
        EPoint::new(self.a - o.a, self.b - o.b)
    }
}

impl SubAssign for EPoint {
    fn sub_assign(&mut self, o: EPoint) {
        *self = *self - o;
    }
}

impl Neg for EPoint {
    type Output = EPoint;
    fn neg(self) -> EPoint {
        EPoint::new(-self.a, -self.b)
    }
}

impl Mul for EPoint {
    type Output = EPoint;
    fn mul(self, o: EPoint) -> EPoint {
        // (a + bω)(c + dω) = ac + (ad + bc)ω + bd(ω − 1)
        EPoint::new(
            self.a * o.a - self.b * o.b,
            self.a * o.b + self.b * o.a + self.b * o.b,
        )
    }
}

impl Mul<i64> for EPoint {
    type Output = EPoint;
    fn mul(self, k: i64) -> EPoint {
        EPoint::new(self.a * k, self.b * k)
    }
}

/// One of the six unit directions `u_k = e^{ikπ/3}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "u8", into = "u8")]
pub struct Dir6(u8);

const UNITS: [EPoint; 6] = [
    EPoint::new(1, 0),
    EPoint::new(0, 1),
    EPoint::new(-1, 1),
    EPoint::new(-1, 0),
    EPoint::new(0, -1),
    EPoint::new(1, -1),
];

impl From<u8> for Dir6 {
    fn from(k: u8) -> Self {
        Dir6::new(k as i64)
    }
}

impl From<Dir6> for u8 {
    fn from(d: Dir6) -> u8 {
        d.0
    }
}

impl Dir6 {
    pub const ALL: [Dir6; 6] = [Dir6(0), Dir6(1), Dir6(2), Dir6(3), Dir6(4), Dir6(5)];

    pub fn new(k: i64) -> Self {
        Dir6(k.rem_euclid(6) as u8)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn unit(self) -> EPoint {
        UNITS[self.0 as usize]
    }

    pub fn rotate(self, t: i64) -> Dir6 {
        Dir6::new(self.0 as i64 + t)
    }

    pub fn reverse(self) -> Dir6 {
        self.rotate(3)
    }

    pub fn is_even(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// Direction of a unit vector, if it is one.
    pub fn from_unit(v: EPoint) -> Option<Dir6> {
        UNITS.iter().position(|&u| u == v).map(|k| Dir6(k as u8))
    }

    /// Signed turn `t ∈ (−3, 3]` taking `self` to `other`.
    pub fn turn_to(self, other: Dir6) -> i64 {
        let t = (other.0 as i64 - self.0 as i64).rem_euclid(6);
        if t > 3 {
            t - 6
        } else {
            t
        }
    }
}

/// The two apexes of the unit triangles on either side of the oriented side
/// `x → x + u_d`: `(left, right)`.
pub fn apexes(x: EPoint, d: Dir6) -> (EPoint, EPoint) {
    (x + d.rotate(1).unit(), x + d.rotate(5).unit())
}

/// Canonical nonoriented unit side `{base, base + u_axis}`, `axis ∈ {0,1,2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeKey {
    pub base: EPoint,
    pub axis: u8,
}

impl EdgeKey {
    pub fn from_oriented(x: EPoint, d: Dir6) -> EdgeKey {
        if d.index() < 3 {
            EdgeKey { base: x, axis: d.index() }
        } else {
            EdgeKey { base: x + d.unit(), axis: d.index() - 3 }
        }
    }

    /// Side joining two adjacent points.
    pub fn between(x: EPoint, y: EPoint) -> Option<EdgeKey> {
        Dir6::from_unit(y - x).map(|d| EdgeKey::from_oriented(x, d))
    }

    pub fn endpoints(self) -> (EPoint, EPoint) {
        (self.base, self.base + Dir6::new(self.axis as i64).unit())
    }

    /// Orientation of this side in the given (P)-field.
    pub fn orient(self, field: Field) -> (EPoint, Dir6) {
        let d = Dir6::new(self.axis as i64);
        let even = d.is_even();
        let want_even = field == Field::E1;
        if even == want_even {
            (self.base, d)
        } else {
            (self.base + d.unit(), d.reverse())
        }
    }

    pub fn translate(self, t: EPoint) -> EdgeKey {
        EdgeKey { base: self.base + t, axis: self.axis }
    }
}

/// The two opposite orientation fields satisfying property (P).
/// `E1` orients every side along an even direction index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    E1,
    E2,
}

impl Field {
    pub fn of(d: Dir6) -> Field {
        if d.is_even() {
            Field::E1
        } else {
            Field::E2
        }
    }

    pub fn opposite(self) -> Field {
        match self {
            Field::E1 => Field::E2,
            Field::E2 => Field::E1,
        }
    }
}

impl std::str::FromStr for Field {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "E1" | "e1" => Ok(Field::E1),
            "E2" | "e2" => Ok(Field::E2),
            _ => Err(format!("unknown orientation field `{s}` (expected E1 or E2)")),
        }
    }
}

/// Orient a nonoriented side according to `field`.
pub fn orient_e(e: EdgeKey, field: Field) -> (EPoint, Dir6) {
    e.orient(field)
}

/// Lattice hexagon `H(center, radius)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HexWindow {
    pub center: EPoint,
    pub radius: i64,
}

impl HexWindow {
    pub fn new(center: EPoint, radius: i64) -> Self {
        HexWindow { center, radius: radius.max(0) }
    }

    pub fn contains(&self, z: EPoint) -> bool {
        (z - self.center).hex_norm() <= self.radius
    }

    /// Membership in the open hexagon `H*`.
    pub fn contains_strict(&self, z: EPoint) -> bool {
        (z - self.center).hex_norm() < self.radius
    }

    pub fn contains_edge(&self, e: EdgeKey) -> bool {
        let (p, q) = e.endpoints();
        self.contains(p) && self.contains(q)
    }

    pub fn corners(&self) -> [EPoint; 6] {
        let mut out = [self.center; 6];
        for (j, c) in out.iter_mut().enumerate() {
            *c = self.center + Dir6::new(j as i64).unit() * self.radius;
        }
        out
    }

    pub fn shrink(&self, margin: i64) -> Option<HexWindow> {
        (self.radius >= margin).then(|| HexWindow::new(self.center, self.radius - margin))
    }

    /// Lattice points in the window, rows of increasing `b` then `a`.
    pub fn points(&self) -> impl Iterator<Item = EPoint> + '_ {
        let k = self.radius;
        let c = self.center;
        (-k..=k).flat_map(move |b| {
            let lo = (-k).max(-k - b);
            let hi = k.min(k - b);
            (lo..=hi).map(move |a| c + EPoint::new(a, b))
        })
    }

    /// Sides with both endpoints in the window, each exactly once.
    pub fn edges(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        self.points().flat_map(move |p| {
            (0u8..3).filter_map(move |axis| {
                let e = EdgeKey { base: p, axis };
                self.contains(e.endpoints().1).then_some(e)
            })
        })
    }

    pub fn point_count(&self) -> usize {
        let k = self.radius as usize;
        3 * k * k + 3 * k + 1
    }
}

/// Points of the concentric hexagonal ring `ring` around `center`
/// (`ring = 0` is the center itself), in a fixed order.
pub fn hex_ring(center: EPoint, ring: i64) -> Vec<EPoint> {
    if ring == 0 {
        return vec![center];
    }
    let mut out: Vec<EPoint> = HexWindow::new(center, ring)
        .points()
        .filter(|&z| (z - center).hex_norm() == ring)
        .collect();
    out.sort();
    out
}

/// Points of `H(center, radius)` in spiral order: rings outward, sorted
/// lexicographically within each ring.
pub fn hex_spiral(center: EPoint, radius: i64) -> impl Iterator<Item = EPoint> {
    (0..=radius).flat_map(move |r| hex_ring(center, r))
}

/// The sublattice `base + θ^level · Z[ω]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SublatticeFrame {
    pub base: EPoint,
    pub level: u32,
}

impl SublatticeFrame {
    pub fn new(base: EPoint, level: u32) -> Self {
        SublatticeFrame { base, level }
    }

    pub fn contains(&self, z: EPoint) -> bool {
        divisible_by_theta_pow(z - self.base, self.level)
    }

    /// Same point set (bases congruent modulo `θ^level`).
    pub fn same_as(&self, other: &SublatticeFrame) -> bool {
        self.level == other.level && self.contains(other.base)
    }

    /// The frame one level down that contains `z`.
    pub fn refine(&self, z: EPoint) -> Option<SublatticeFrame> {
        self.contains(z).then(|| SublatticeFrame::new(z, self.level + 1))
    }
}

/// `θ^k | z`. Pairs of θ factors are stripped through `θ² = 3ω`.
pub fn divisible_by_theta_pow(z: EPoint, k: u32) -> bool {
    let mut z = z;
    let mut k = k;
    while k >= 2 {
        if z.a % 3 != 0 || z.b % 3 != 0 {
            return false;
        }
        // z / (3ω) = (z/3)·u_5
        z = EPoint::new(z.a / 3, z.b / 3) * Dir6::new(5).unit();
        k -= 2;
    }
    if k == 1 {
        z.div_theta().is_some()
    } else {
        true
    }
}

/// `frame_contains` for a frame given as (base, level).
pub fn frame_contains(f: &SublatticeFrame, z: EPoint) -> bool {
    f.contains(z)
}

/// Membership in `W_k = V_{k−1} ∖ V_k` for the chain frame based at `base`.
pub fn w_contains(base: EPoint, k: u32, z: EPoint) -> bool {
    assert!(k >= 1, "W_k is defined for k >= 1");
    divisible_by_theta_pow(z - base, k - 1) && !divisible_by_theta_pow(z - base, k)
}

/// The 12 isometries of the lattice fixing the origin: `(rotation, reflect)`
/// acts as `z ↦ u_rotation · (reflect ? conj(z) : z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PointIsometry {
    pub rotation: u8,
    pub reflect: bool,
}

impl PointIsometry {
    pub fn all() -> impl Iterator<Item = PointIsometry> {
        [false, true]
            .into_iter()
            .flat_map(|reflect| (0u8..6).map(move |rotation| PointIsometry { rotation, reflect }))
    }

    pub fn apply(&self, z: EPoint) -> EPoint {
        let z = if self.reflect { z.conj() } else { z };
        z * Dir6::new(self.rotation as i64).unit()
    }

    pub fn apply_dir(&self, d: Dir6) -> Dir6 {
        let k = if self.reflect { -(d.index() as i64) } else { d.index() as i64 };
        Dir6::new(k + self.rotation as i64)
    }
}
