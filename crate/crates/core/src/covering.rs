//! Finite-window coverings of the plane by folding curves: construction by
//! curve linking, the limit pairing rule, star points, validity checks,
//! per-curve sublattices, and classification from the `(P_n)` sequence.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::foldseq::{eight_pattern_expected, extract_lambda, residues_at, FoldSeq, Lambda, PSeq, Piece};
use crate::render::SvgCurve;
use crate::tcurve::rho;
use crate::trilattice::{
    divisible_by_theta_pow, Dir6, EPoint, EdgeKey, Field, HexWindow, PointIsometry, SublatticeFrame, THETA,
    THETA_BAR,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error("chain point x_{level} is not in V_{prev}(x_{prev})", prev = level - 1)]
    BadChain { level: usize },
    #[error("window of radius {radius} is too small for margin {margin}")]
    WindowTooSmall { radius: i64, margin: i64 },
    #[error("chain gives no star point inside the window")]
    NoStarPoint,
    #[error("curve {id} is too short to determine its sublattices")]
    CurveTooShort { id: usize },
    #[error("inconsistent input: {0}")]
    InconsistentInput(String),
    #[error("segment {0:?} linked twice")]
    LinkConflict(EdgeKey),
    #[error("lambda has {have} entries, {need} needed")]
    LambdaTooShort { need: usize, have: usize },
    #[error("bad patch file: {0}")]
    BadPatch(String),
}

/// A sequence `x_0, x_1, …` with `x_{k+1} ∈ V_k(x_k)`. Levels past the last
/// stored point reuse it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct XChain {
    pub points: Vec<EPoint>,
}

impl XChain {
    pub fn new(points: Vec<EPoint>) -> Self {
        assert!(!points.is_empty(), "chain needs at least x_0");
        XChain { points }
    }

    pub fn constant(x: EPoint, len: usize) -> Self {
        XChain { points: vec![x; len.max(1)] }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, k: usize) -> EPoint {
        *self.points.get(k).unwrap_or_else(|| self.points.last().unwrap())
    }

    pub fn frame(&self, k: usize) -> SublatticeFrame {
        SublatticeFrame::new(self.get(k), k as u32)
    }

    pub fn validate(&self) -> Result<(), CoverError> {
        for k in 1..self.points.len() {
            if !divisible_by_theta_pow(self.points[k] - self.points[k - 1], k as u32 - 1) {
                return Err(CoverError::BadChain { level: k });
            }
        }
        Ok(())
    }

    /// The point of `V_k(x_k)` nearest to `x_0`, ties broken by the
    /// smaller point.
    pub fn anchor(&self, k: usize) -> EPoint {
        nearest_in_frame(self.get(k), k as u32, self.points[0])
    }

    /// Evidence that `∩ V_n(x_n)` is a single point: the anchor stays fixed
    /// over the last half of the stored levels (and at least one level).
    pub fn star_point(&self) -> Option<EPoint> {
        let h = self.points.len() - 1;
        if h == 0 {
            return None;
        }
        let from = h - h / 2;
        let x = self.anchor(h);
        (from.max(1)..=h).all(|k| self.anchor(k) == x).then_some(x)
    }
}

impl fmt::Display for XChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.points.iter().map(|p| p.to_string()).collect();
        f.write_str(&parts.join(";"))
    }
}

impl FromStr for XChain {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let mut points = vec![];
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (a, b) = part.split_once(',').ok_or_else(|| format!("bad point `{part}`"))?;
            let a = a.trim().parse::<i64>().map_err(|e| format!("bad point `{part}`: {e}"))?;
            let b = b.trim().parse::<i64>().map_err(|e| format!("bad point `{part}`: {e}"))?;
            points.push(EPoint::new(a, b));
        }
        if points.is_empty() {
            return Err("empty chain".into());
        }
        Ok(XChain { points })
    }
}

/// Nearest point of `base + θ^k Z[ω]` to `q`.
pub fn nearest_in_frame(base: EPoint, k: u32, q: EPoint) -> EPoint {
    let step = EPoint::new(1, 0).mul_theta_pow(k);
    // (q − base)/θ^k = (q − base)·conj(θ^k)/3^k
    let w = (q - base) * step.conj();
    let n = 3f64.powi(k as i32);
    let (a, b) = (w.a as f64 / n, w.b as f64 / n);
    let mut best: Option<(i64, EPoint)> = None;
    for da in -1..=2 {
        for db in -1..=2 {
            let c = EPoint::new(a.floor() as i64 + da, b.floor() as i64 + db);
            let p = base + c * step;
            let d = (q - p).norm();
            if best.is_none_or(|(bd, bp)| (d, p) < (bd, bp)) {
                best = Some((d, p));
            }
        }
    }
    best.unwrap().1
}

/// `D_k`: displacement of a level-`k` curve starting along `u_0`.
pub fn level_disp(lambda: &Lambda, k: usize) -> EPoint {
    (1..=k).fold(EPoint::new(1, 0), |d, j| d * if lambda.get(j) > 0 { THETA } else { THETA_BAR })
}

/// Hex-norm margin that keeps every level-`n` curve meeting the shrunken
/// window inside the full one: the smallest `m ≥ 2ρ_n/√3`.
pub fn guaranteed_margin(n: u32) -> i64 {
    let r = rho(n);
    // m − 2q ≥ 2p/√3  ⇔  m − 2q ≥ 0 and 3(m − 2q)² ≥ 4p²
    let mut m = 2 * r.q as i64;
    while 3 * (m as i128 - 2 * r.q).pow(2) < 4 * r.p * r.p {
        m += 1;
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegInfo {
    pub dir: Dir6,
    pub curve: usize,
    pub prev: Option<EdgeKey>,
    pub next: Option<EdgeKey>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveInfo {
    pub id: usize,
    pub start: EPoint,
    pub end: EPoint,
    pub first: EdgeKey,
    pub last: EdgeKey,
    pub segments: usize,
    /// Both ends are genuine curve ends strictly inside the window.
    pub complete: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StarMode {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl StarMode {
    pub fn sign(self) -> i64 {
        match self {
            StarMode::Plus => 1,
            StarMode::Minus => -1,
        }
    }
}

impl FromStr for StarMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "+" | "plus" => Ok(StarMode::Plus),
            "-" | "minus" | "−" => Ok(StarMode::Minus),
            _ => Err(format!("unknown star mode `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringPatch {
    pub window: HexWindow,
    /// Region whose sides and pairings are exact.
    pub guaranteed: HexWindow,
    /// Linking level `N`.
    pub level: u32,
    /// Pairings are resolved at every vertex outside `V_resolved`.
    pub resolved_level: u32,
    pub lambda: Lambda,
    pub chain: XChain,
    pub orientation: Field,
    pub segments: HashMap<EdgeKey, SegInfo>,
    pub curves: Vec<CurveInfo>,
    pub star: Option<(EPoint, StarMode)>,
    /// Linking triples skipped because a member was missing or truncated.
    pub flagged_triples: usize,
}

#[derive(Debug, Clone, Copy)]
struct Piece3 {
    first: EdgeKey,
    last: EdgeKey,
    start: EPoint,
    end: EPoint,
    dir: Dir6,
    complete: bool,
}

fn segment_end(e: EdgeKey, d: Dir6) -> (EPoint, EPoint) {
    let (p, q) = e.endpoints();
    if d.index() == e.axis {
        (p, q)
    } else {
        (q, p)
    }
}

/// Build `C_N(Λ_N, x)` restricted to `window` by `N` linking passes.
pub fn build_patch(lambda: &Lambda, chain: &XChain, orientation: Field, window: HexWindow) -> Result<CoveringPatch, CoverError> {
    chain.validate()?;
    let n = lambda.len() as u32;
    let margin = guaranteed_margin(n);
    if window.radius < 3 || window.radius <= margin {
        return Err(CoverError::WindowTooSmall { radius: window.radius, margin });
    }
    let guaranteed = window.shrink(margin).expect("radius exceeds margin");
    let mut segments: HashMap<EdgeKey, SegInfo> = HashMap::new();
    let mut pieces: Vec<Piece3> = vec![];
    for e in window.edges() {
        let (start, dir) = e.orient(orientation);
        segments.insert(e, SegInfo { dir, curve: 0, prev: None, next: None });
        pieces.push(Piece3 { first: e, last: e, start, end: start + dir.unit(), dir, complete: true });
    }
    let mut flagged = 0;
    for k in 0..n as usize {
        let lam = lambda.get(k + 1) as i64;
        let frame = chain.frame(k + 1);
        let index: HashMap<(EPoint, Dir6), usize> =
            pieces.iter().enumerate().filter(|(_, p)| p.complete).map(|(i, p)| ((p.start, p.dir), i)).collect();
        let mut used = vec![false; pieces.len()];
        let mut next_pieces = vec![];
        for i in 0..pieces.len() {
            let a = pieces[i];
            if !a.complete || !frame.contains(a.start) {
                continue;
            }
            let b = index.get(&(a.end, a.dir.rotate(2 * lam))).copied();
            let c = b.and_then(|b| index.get(&(pieces[b].end, pieces[b].dir.rotate(-2 * lam))).copied());
            let (Some(b), Some(c)) = (b, c) else {
                flagged += 1;
                continue;
            };
            for j in [i, b, c] {
                if used[j] {
                    return Err(CoverError::LinkConflict(pieces[j].first));
                }
                used[j] = true;
            }
            link(&mut segments, a.last, pieces[b].first)?;
            link(&mut segments, pieces[b].last, pieces[c].first)?;
            next_pieces.push(Piece3 {
                first: a.first,
                last: pieces[c].last,
                start: a.start,
                end: pieces[c].end,
                dir: a.dir,
                complete: true,
            });
        }
        for (i, p) in pieces.iter().enumerate() {
            if !used[i] {
                next_pieces.push(Piece3 { complete: false, ..*p });
            }
        }
        pieces = next_pieces;
    }
    let mut patch = CoveringPatch {
        window,
        guaranteed,
        level: n,
        resolved_level: n,
        lambda: lambda.clone(),
        chain: chain.clone(),
        orientation,
        segments,
        curves: vec![],
        star: None,
        flagged_triples: flagged,
    };
    patch.rebuild_curves();
    Ok(patch)
}

fn link(segments: &mut HashMap<EdgeKey, SegInfo>, from: EdgeKey, to: EdgeKey) -> Result<(), CoverError> {
    if segments[&from].next.is_some() {
        return Err(CoverError::LinkConflict(from));
    }
    if segments[&to].prev.is_some() {
        return Err(CoverError::LinkConflict(to));
    }
    segments.get_mut(&from).unwrap().next = Some(to);
    segments.get_mut(&to).unwrap().prev = Some(from);
    Ok(())
}

/// Level `k` such that `v ∈ W_{k+1}`, i.e. the largest `k ≤ max` with
/// `v ∈ V_k(x_k)`; `None` when `v ∈ V_max(x_max)`.
pub fn junction_level(chain: &XChain, v: EPoint, max: u32) -> Option<u32> {
    (0..=max).find(|&k| !chain.frame(k as usize + 1).contains(v)).filter(|&k| k < max)
}

/// The outgoing direction paired with an incoming unit segment of
/// direction `d_in` at `v ∈ W_{k+1}`. The incoming level-`k` curve starts
/// at `v − u_{d_in}·D_k`; it is the first third of its level-`(k+1)` curve
/// when that start lies in `V_{k+1}`, the middle third otherwise.
pub fn local_rule(lambda: &Lambda, chain: &XChain, v: EPoint, d_in: Dir6, k: u32) -> Dir6 {
    let lam = lambda.get(k as usize + 1) as i64;
    let start = v - d_in.unit() * level_disp(lambda, k as usize);
    if chain.frame(k as usize + 1).contains(start) {
        d_in.rotate(2 * lam)
    } else {
        d_in.rotate(-2 * lam)
    }
}

impl CoveringPatch {
    pub fn seg(&self, e: EdgeKey) -> Option<&SegInfo> {
        self.segments.get(&e)
    }

    /// Segments entering `v`, as `(direction, side)`.
    pub fn incoming(&self, v: EPoint) -> Vec<(Dir6, EdgeKey)> {
        Dir6::ALL
            .iter()
            .filter_map(|&d| {
                let e = EdgeKey::from_oriented(v - d.unit(), d);
                self.segments.get(&e).filter(|s| s.dir == d).map(|_| (d, e))
            })
            .collect()
    }

    pub fn outgoing(&self, v: EPoint) -> Vec<(Dir6, EdgeKey)> {
        Dir6::ALL
            .iter()
            .filter_map(|&d| {
                let e = EdgeKey::from_oriented(v, d);
                self.segments.get(&e).filter(|s| s.dir == d).map(|_| (d, e))
            })
            .collect()
    }

    /// `(in_dir, out_dir)` for every linked pair of segments through `v`.
    pub fn pairs_at(&self, v: EPoint) -> Vec<(u8, u8)> {
        let mut out: Vec<(u8, u8)> = self
            .incoming(v)
            .into_iter()
            .filter_map(|(d, e)| self.segments[&e].next.map(|n| (d.index(), self.segments[&n].dir.index())))
            .collect();
        out.sort();
        out
    }

    /// Linked pairs at `v` as unordered pairs of rays leaving `v`.
    pub fn ray_pairs_at(&self, v: EPoint) -> Vec<(u8, u8)> {
        let mut out: Vec<(u8, u8)> = self
            .pairs_at(v)
            .into_iter()
            .map(|(i, o)| {
                let ri = Dir6::new(i as i64).reverse().index();
                (ri.min(o), ri.max(o))
            })
            .collect();
        out.sort();
        out
    }

    fn genuine_end(&self, v: EPoint) -> bool {
        self.window.contains_strict(v)
            && self.chain.frame(self.resolved_level as usize).contains(v)
            && self.star.is_none_or(|(x, _)| x != v)
    }

    /// Recompute curve ids from the links. Ids follow the order of the
    /// first segments.
    pub fn rebuild_curves(&mut self) {
        let mut heads: Vec<EdgeKey> = self.segments.iter().filter(|(_, s)| s.prev.is_none()).map(|(&e, _)| e).collect();
        heads.sort();
        let mut seen: HashSet<EdgeKey> = HashSet::with_capacity(self.segments.len());
        let mut curves = vec![];
        let mut walk = |head: EdgeKey, segments: &mut HashMap<EdgeKey, SegInfo>, seen: &mut HashSet<EdgeKey>| {
            let id = curves.len();
            let mut e = head;
            let mut count = 0;
            loop {
                seen.insert(e);
                count += 1;
                let s = segments.get_mut(&e).unwrap();
                s.curve = id;
                match s.next {
                    Some(n) if !seen.contains(&n) => e = n,
                    _ => break,
                }
            }
            let (start, _) = segment_end(head, segments[&head].dir);
            let (_, end) = segment_end(e, segments[&e].dir);
            curves.push(CurveInfo { id, start, end, first: head, last: e, segments: count, complete: false });
        };
        for h in heads {
            walk(h, &mut self.segments, &mut seen);
        }
        // closed loops have no head
        let mut rest: Vec<EdgeKey> = self.segments.keys().filter(|e| !seen.contains(e)).copied().collect();
        rest.sort();
        for e in rest {
            if !seen.contains(&e) {
                walk(e, &mut self.segments, &mut seen);
            }
        }
        for c in curves.iter_mut() {
            let open_start = self.segments[&c.first].prev.is_none();
            let open_end = self.segments[&c.last].next.is_none();
            c.complete = open_start && open_end && self.genuine_end(c.start) && self.genuine_end(c.end);
        }
        self.curves = curves;
    }

    /// Vertices of curve `id`, in order.
    pub fn curve_polyline(&self, id: usize) -> Vec<EPoint> {
        let c = &self.curves[id];
        let mut out = vec![c.start];
        let mut e = Some(c.first);
        let mut n = 0;
        while let Some(k) = e {
            let s = &self.segments[&k];
            out.push(segment_end(k, s.dir).1);
            n += 1;
            if n >= c.segments {
                break;
            }
            e = s.next;
        }
        out
    }

    /// Curves with at least one segment, as polylines for rendering.
    pub fn svg_curves(&self) -> Vec<SvgCurve> {
        (0..self.curves.len()).map(|id| SvgCurve { id, points: self.curve_polyline(id) }).collect()
    }

    /// Resolve every open junction strictly inside the window with the
    /// local rule, using `lambda` and `chain` beyond the linking level.
    pub fn extend_limit(&mut self, lambda: &Lambda, chain: &XChain) -> Result<(), CoverError> {
        chain.validate()?;
        if lambda.prefix(self.lambda.len()) != self.lambda {
            return Err(CoverError::InconsistentInput("lambda does not extend the patch's".into()));
        }
        for k in 0..=self.level as usize {
            if !self.chain.frame(k).same_as(&chain.frame(k)) {
                return Err(CoverError::InconsistentInput(format!("chain frame V_{k} differs")));
            }
        }
        let max = lambda.len() as u32;
        let vertices: Vec<EPoint> = self.window.points().filter(|&v| self.window.contains_strict(v)).collect();
        for v in vertices {
            let Some(k) = junction_level(chain, v, max) else { continue };
            for (d, e) in self.incoming(v) {
                if self.segments[&e].next.is_some() {
                    continue;
                }
                let out = local_rule(lambda, chain, v, d, k);
                let oe = EdgeKey::from_oriented(v, out);
                if self.segments.get(&oe).map(|s| s.dir) == Some(out) {
                    link(&mut self.segments, e, oe)?;
                }
            }
        }
        self.lambda = lambda.clone();
        self.chain = chain.clone();
        self.resolved_level = max;
        self.guaranteed = self.window.shrink(1).unwrap_or(self.window);
        self.rebuild_curves();
        Ok(())
    }

    /// Vertices where a linked pairing differs from the local rule.
    pub fn local_rule_disagreements(&self) -> Vec<EPoint> {
        let mut bad = vec![];
        for v in self.window.points() {
            let Some(k) = junction_level(&self.chain, v, self.resolved_level) else { continue };
            for (d, e) in self.incoming(v) {
                if let Some(n) = self.segments[&e].next {
                    if self.segments[&n].dir != local_rule(&self.lambda, &self.chain, v, d, k) {
                        bad.push(v);
                    }
                }
            }
        }
        bad.sort();
        bad.dedup();
        bad
    }

    /// Reverse one segment (for negative controls).
    pub fn inject_reversal(&mut self, e: EdgeKey) {
        if let Some(s) = self.segments.get_mut(&e) {
            s.dir = s.dir.reverse();
        }
    }

    pub fn dump(&self) -> PatchDump {
        let mut segs: Vec<SegRecord> = self
            .segments
            .iter()
            .map(|(&edge, s)| SegRecord { edge, dir: s.dir.index(), curve: s.curve, prev: s.prev, next: s.next })
            .collect();
        segs.sort_by_key(|s| s.edge);
        PatchDump {
            window: self.window,
            guaranteed: self.guaranteed,
            level: self.level,
            resolved_level: self.resolved_level,
            lambda: self.lambda.to_string(),
            chain: self.chain.points.clone(),
            orientation: self.orientation,
            star: self.star,
            flagged_triples: self.flagged_triples,
            curves: self.curves.clone(),
            segments: segs,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.dump()).expect("patch serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, CoverError> {
        let d: PatchDump = serde_json::from_str(s).map_err(|e| CoverError::BadPatch(e.to_string()))?;
        CoveringPatch::try_from(d)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegRecord {
    pub edge: EdgeKey,
    pub dir: u8,
    pub curve: usize,
    pub prev: Option<EdgeKey>,
    pub next: Option<EdgeKey>,
}

/// On-disk form of a patch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchDump {
    pub window: HexWindow,
    pub guaranteed: HexWindow,
    pub level: u32,
    pub resolved_level: u32,
    pub lambda: String,
    pub chain: Vec<EPoint>,
    pub orientation: Field,
    pub star: Option<(EPoint, StarMode)>,
    pub flagged_triples: usize,
    pub curves: Vec<CurveInfo>,
    pub segments: Vec<SegRecord>,
}

impl TryFrom<PatchDump> for CoveringPatch {
    type Error = CoverError;
    fn try_from(d: PatchDump) -> Result<Self, CoverError> {
        let lambda: Lambda = d.lambda.parse().map_err(|e: crate::foldseq::FoldError| CoverError::BadPatch(e.to_string()))?;
        if d.chain.is_empty() {
            return Err(CoverError::BadPatch("empty chain".into()));
        }
        let segments = d
            .segments
            .into_iter()
            .map(|s| (s.edge, SegInfo { dir: Dir6::new(s.dir as i64), curve: s.curve, prev: s.prev, next: s.next }))
            .collect();
        Ok(CoveringPatch {
            window: d.window,
            guaranteed: d.guaranteed,
            level: d.level,
            resolved_level: d.resolved_level,
            lambda,
            chain: XChain::new(d.chain),
            orientation: d.orientation,
            segments,
            curves: d.curves,
            star: d.star,
            flagged_triples: d.flagged_triples,
        })
    }
}

/// Pair the three incoming with the three outgoing ends at the star point:
/// incoming `d` continues along `d + 2` (`+`) or `d − 2` (`−`).
pub fn star_connect(patch: &CoveringPatch, mode: StarMode) -> Result<CoveringPatch, CoverError> {
    let x = patch.chain.star_point().ok_or(CoverError::NoStarPoint)?;
    if !patch.window.contains_strict(x) {
        return Err(CoverError::NoStarPoint);
    }
    let ins = patch.incoming(x);
    let outs = patch.outgoing(x);
    if ins.len() != 3 || outs.len() != 3 {
        return Err(CoverError::NoStarPoint);
    }
    let mut p = patch.clone();
    for (d, e) in ins {
        let oe = EdgeKey::from_oriented(x, d.rotate(2 * mode.sign()));
        link(&mut p.segments, e, oe)?;
    }
    p.star = Some((x, mode));
    p.rebuild_curves();
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub covering_ok: bool,
    pub property_p: bool,
    /// The (P)-field of the interior directions, if they share parity.
    pub parity: Option<Field>,
    pub interior_edges: usize,
    pub covered_edges: usize,
    pub link_errors: usize,
    pub complete_curves: usize,
    pub truncated_curves: usize,
    pub open_interior_junctions: usize,
    pub flagged_triples: usize,
}

pub fn validate(patch: &CoveringPatch) -> ValidationReport {
    let g = patch.guaranteed;
    let interior: Vec<EdgeKey> = g.edges().collect();
    let covered = interior.iter().filter(|e| patch.segments.contains_key(e)).count();
    let mut link_errors = 0;
    for (&e, s) in &patch.segments {
        if let Some(n) = s.next {
            let ok = patch.segments.get(&n).is_some_and(|t| {
                t.prev == Some(e) && segment_end(e, s.dir).1 == segment_end(n, t.dir).0 && s.dir.turn_to(t.dir).abs() == 2
            });
            if !ok {
                link_errors += 1;
            }
        }
        if let Some(p) = s.prev {
            if patch.segments.get(&p).map(|t| t.next) != Some(Some(e)) {
                link_errors += 1;
            }
        }
    }
    let parities: HashSet<bool> =
        interior.iter().filter_map(|e| patch.segments.get(e)).map(|s| s.dir.is_even()).collect();
    let parity = match (parities.len(), parities.iter().next()) {
        (1, Some(true)) => Some(Field::E1),
        (1, Some(false)) => Some(Field::E2),
        _ => None,
    };
    let open = g
        .points()
        .filter(|&v| g.contains_strict(v) && !patch.genuine_end(v))
        .filter(|&v| patch.incoming(v).iter().any(|(_, e)| patch.segments[e].next.is_none()))
        .count();
    let complete = patch.curves.iter().filter(|c| c.complete).count();
    ValidationReport {
        covering_ok: covered == interior.len() && link_errors == 0,
        property_p: parity.is_some(),
        parity,
        interior_edges: interior.len(),
        covered_edges: covered,
        link_errors,
        complete_curves: complete,
        truncated_curves: patch.curves.len() - complete,
        open_interior_junctions: open,
        flagged_triples: patch.flagged_triples,
    }
}

/// Turn signs of a polyline whose consecutive steps differ by `u_{±2}`.
fn polyline_turns(pts: &[EPoint]) -> Option<Vec<i8>> {
    let steps: Vec<EPoint> = pts.windows(2).map(|w| w[1] - w[0]).collect();
    steps
        .windows(2)
        .map(|s| {
            if s[0] * Dir6::new(2).unit() == s[1] {
                Some(1)
            } else if s[0] * Dir6::new(4).unit() == s[1] {
                Some(-1)
            } else {
                None
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveLattices {
    pub id: usize,
    /// `V_1(C), V_2(C), …` as far as the curve determines them.
    pub frames: Vec<SublatticeFrame>,
    /// Signs found at each derivation level.
    pub lambda: String,
    /// `Λ` prefix from the residue chains of the turn sequence.
    pub extracted: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeReport {
    pub curves: Vec<CurveLattices>,
    pub excluded: usize,
    /// Per level `1..`: all curves reaching it give the same frame.
    pub agree: Vec<bool>,
    /// Per level: that frame is the chain's `V_k(x_k)`.
    pub chain_agree: Vec<bool>,
    pub lambda_agree: bool,
}

/// `V_k(C)` for one curve by repeated derivation: the level-0 residue of
/// the turn sequence marks the group boundaries, which span `V_1(C)`.
pub fn curve_lattices(pts: &[EPoint], k_max: u32) -> (Vec<SublatticeFrame>, Vec<i8>) {
    let mut pts = pts.to_vec();
    let mut frames = vec![];
    let mut signs = vec![];
    let mut lvl = 0;
    while pts.len() >= 5 && lvl < k_max {
        let Some(turns) = polyline_turns(&pts) else { break };
        let r = residues_at(&FoldSeq::new(turns), 0);
        let [(h, eps)] = r.admissible[..] else { break };
        frames.push(SublatticeFrame::new(pts[h as usize], lvl + 1));
        signs.push(eps);
        pts = pts[h as usize..].iter().step_by(3).copied().collect();
        lvl += 1;
    }
    (frames, signs)
}

/// Lattices of every curve lying in the guaranteed region.
pub fn level_lattices(patch: &CoveringPatch, k_max: u32) -> LatticeReport {
    let mut curves = vec![];
    let mut excluded = 0;
    for c in &patch.curves {
        let pts = patch.curve_polyline(c.id);
        if !pts.iter().all(|&p| patch.guaranteed.contains(p)) {
            continue;
        }
        let (frames, signs) = curve_lattices(&pts, k_max);
        if frames.is_empty() {
            excluded += 1;
            continue;
        }
        let turns = polyline_turns(&pts).unwrap_or_default();
        let seq = FoldSeq::new(turns);
        let extracted = extract_lambda(&seq, crate::foldseq::default_k_max(seq.len()).min(k_max.saturating_sub(1)))
            .ok()
            .map(|x| x.lambda);
        curves.push(CurveLattices { id: c.id, frames, lambda: crate::foldseq::format_signs(&signs), extracted });
    }
    let depth = curves.iter().map(|c| c.frames.len()).max().unwrap_or(0);
    let mut agree = vec![];
    let mut chain_agree = vec![];
    for k in 0..depth {
        let fs: Vec<&SublatticeFrame> = curves.iter().filter_map(|c| c.frames.get(k)).collect();
        agree.push(fs.iter().all(|f| f.same_as(fs[0])));
        chain_agree.push(fs.iter().all(|f| f.same_as(&patch.chain.frame(k + 1))));
    }
    let want = patch.lambda.to_string();
    let lambda_agree = curves.iter().all(|c| {
        want.starts_with(&c.lambda) && c.extracted.as_ref().is_none_or(|x| want.starts_with(x.as_str()))
    });
    LatticeReport { curves, excluded, agree, chain_agree, lambda_agree }
}

/// Start, first direction and end of the nested curves `C_0 ⊂ C_1 ⊂ …`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveTrace {
    pub starts: Vec<EPoint>,
    pub dirs: Vec<Dir6>,
    pub ends: Vec<EPoint>,
}

impl CurveTrace {
    fn push(&mut self, lambda: &Lambda, start: EPoint, dir: Dir6) {
        let n = self.starts.len();
        self.starts.push(start);
        self.dirs.push(dir);
        self.ends.push(start + dir.unit() * level_disp(lambda, n));
    }
}

/// The level-`(n+1)` curve containing `C_n` as its `p` third.
fn parent(lambda: &Lambda, n: usize, start: EPoint, dir: Dir6, p: Piece) -> (EPoint, Dir6) {
    let lam = lambda.get(n + 1) as i64;
    let disp = |d: Dir6| d.unit() * level_disp(lambda, n);
    match p {
        Piece::I => (start, dir),
        Piece::M => {
            let da = dir.rotate(-2 * lam);
            (start - disp(da), da)
        }
        Piece::S => {
            let db = dir.rotate(2 * lam);
            let sb = start - disp(db);
            let da = db.rotate(-2 * lam);
            (sb - disp(da), da)
        }
    }
}

/// A chain realizing `(P_n)` for the curve through the seed segment, with
/// `x_n` the start of `C_n`.
pub fn chain_from_pseq(lambda: &Lambda, pseq: &PSeq, seed: EPoint, dir0: Dir6) -> Result<(XChain, CurveTrace), CoverError> {
    if lambda.len() < pseq.0.len() {
        return Err(CoverError::LambdaTooShort { need: pseq.0.len(), have: lambda.len() });
    }
    let mut tr = CurveTrace { starts: vec![], dirs: vec![], ends: vec![] };
    tr.push(lambda, seed, dir0);
    for (n, &p) in pseq.0.iter().enumerate() {
        let (s, d) = parent(lambda, n, tr.starts[n], tr.dirs[n], p);
        tr.push(lambda, s, d);
    }
    Ok((XChain::new(tr.starts.clone()), tr))
}

/// `(P_n)` of the curve through the seed segment in the covering of
/// `chain`, for `n < chain.len() − 1`.
pub fn pseq_from_chain(lambda: &Lambda, chain: &XChain, seed: EPoint, dir0: Dir6) -> Result<(PSeq, CurveTrace), CoverError> {
    chain.validate()?;
    let h = chain.len() - 1;
    if lambda.len() < h {
        return Err(CoverError::LambdaTooShort { need: h, have: lambda.len() });
    }
    let mut tr = CurveTrace { starts: vec![], dirs: vec![], ends: vec![] };
    tr.push(lambda, seed, dir0);
    let mut out = vec![];
    for n in 0..h {
        let f = chain.frame(n + 1);
        let p = if f.contains(tr.starts[n]) {
            Piece::I
        } else if f.contains(tr.ends[n]) {
            Piece::S
        } else {
            Piece::M
        };
        out.push(p);
        let (s, d) = parent(lambda, n, tr.starts[n], tr.dirs[n], p);
        tr.push(lambda, s, d);
    }
    Ok((PSeq(out), tr))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    OneCurveCertified,
    ThreeStar,
    ThreeSeparated,
    /// Finite evidence fits none of the cases; the covering has at least
    /// `lower_bound` curves.
    Unknown { lower_bound: usize },
}

/// What a covering is described by.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evidence {
    Chain(XChain),
    PSeq(PSeq),
}

fn tail_from(horizon: usize) -> usize {
    horizon - horizon / 2
}

/// Case of the covering from `(P_n)` (or from a chain, through the curve of
/// the segment `x_0 → x_0 + u_0`) over `n < horizon`. "Eventually" means
/// over the last `horizon / 2` levels.
pub fn classify(lambda: &Lambda, evidence: &Evidence, horizon: usize) -> Result<CaseTag, CoverError> {
    if horizon < 8 {
        return Err(CoverError::InconsistentInput(format!("horizon {horizon} < 8")));
    }
    if lambda.len() < horizon + 1 {
        return Err(CoverError::LambdaTooShort { need: horizon + 1, have: lambda.len() });
    }
    let p = match evidence {
        Evidence::Chain(c) => {
            if c.len() < horizon + 1 {
                return Err(CoverError::InconsistentInput(format!("chain has {} points, {} needed", c.len(), horizon + 1)));
            }
            let c = XChain::new(c.points[..=horizon].to_vec());
            if c.star_point().is_some() {
                return Ok(CaseTag::ThreeStar);
            }
            pseq_from_chain(lambda, &c, c.points[0], Dir6::new(0))?.0
        }
        Evidence::PSeq(p) => {
            if p.0.len() < horizon {
                return Err(CoverError::InconsistentInput(format!("P-sequence has {} entries, {horizon} needed", p.0.len())));
            }
            PSeq(p.0[..horizon].to_vec())
        }
    };
    let from = tail_from(horizon);
    let tail = &p.0[from..];
    if tail.iter().all(|&x| x == Piece::I) || tail.iter().all(|&x| x == Piece::S) {
        return Ok(CaseTag::ThreeStar);
    }
    if tail.iter().all(|&x| x == Piece::M) {
        let alternating = (from.max(1)..horizon).all(|n| lambda.get(n + 1) == -lambda.get(n));
        return if alternating {
            Ok(CaseTag::ThreeSeparated)
        } else {
            Err(CoverError::InconsistentInput("P is eventually M but lambda does not alternate".into()))
        };
    }
    let eight = (0..horizon).all(|n| eight_pattern_expected(lambda, n).is_none_or(|e| e == p.0[n]));
    if eight {
        return Ok(CaseTag::OneCurveCertified);
    }
    Ok(CaseTag::Unknown { lower_bound: 1 })
}

/// `z ↦ linear(z) + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Isometry {
    pub linear: PointIsometry,
    pub shift: EPoint,
}

impl Isometry {
    /// The point isometry `g` moved to act around `center`.
    pub fn about(g: PointIsometry, center: EPoint) -> Self {
        Isometry { linear: g, shift: center - g.apply(center) }
    }

    /// `z ↦ c2 − z`, the half-turn about `c2 / 2`.
    pub fn half_turn(c2: EPoint) -> Self {
        Isometry { linear: PointIsometry { rotation: 3, reflect: false }, shift: c2 }
    }

    pub fn apply(&self, z: EPoint) -> EPoint {
        self.linear.apply(z) + self.shift
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchReport {
    pub checked: usize,
    pub mismatches: usize,
}

impl MatchReport {
    pub fn ok(&self) -> bool {
        self.checked > 0 && self.mismatches == 0
    }
}

/// Compare pairings (and, if `oriented`, segment directions) of `a` at
/// each of `points` with those of `b` at the image.
pub fn structure_matches(
    a: &CoveringPatch,
    b: &CoveringPatch,
    iso: Isometry,
    points: impl Iterator<Item = EPoint>,
    oriented: bool,
) -> MatchReport {
    let g = iso.linear;
    let mut rep = MatchReport { checked: 0, mismatches: 0 };
    for v in points {
        let w = iso.apply(v);
        rep.checked += 1;
        let ok = if oriented {
            let mut mapped: Vec<(u8, u8)> = a
                .pairs_at(v)
                .into_iter()
                .map(|(i, o)| (g.apply_dir(Dir6::new(i as i64)).index(), g.apply_dir(Dir6::new(o as i64)).index()))
                .collect();
            mapped.sort();
            let outs = |p: &CoveringPatch, z: EPoint| p.outgoing(z).into_iter().map(|(d, _)| d).collect::<Vec<_>>();
            let mut oa: Vec<u8> = outs(a, v).into_iter().map(|d| g.apply_dir(d).index()).collect();
            oa.sort();
            let ob: Vec<u8> = outs(b, w).into_iter().map(|d| d.index()).collect();
            mapped == b.pairs_at(w) && oa == ob
        } else {
            let mut mapped: Vec<(u8, u8)> = a
                .ray_pairs_at(v)
                .into_iter()
                .map(|(x, y)| {
                    let (x, y) = (g.apply_dir(Dir6::new(x as i64)).index(), g.apply_dir(Dir6::new(y as i64)).index());
                    (x.min(y), x.max(y))
                })
                .collect();
            mapped.sort();
            mapped == b.ray_pairs_at(w)
        };
        if !ok {
            rep.mismatches += 1;
        }
    }
    rep
}

/// Vertices `v` with `hex(v − center) < radius` such that `v` and its image
/// are strictly inside both guaranteed regions.
fn check_points(a: &CoveringPatch, b: &CoveringPatch, iso: Isometry, center: EPoint, radius: i64) -> Vec<EPoint> {
    HexWindow::new(center, radius)
        .points()
        .filter(|&v| (v - center).hex_norm() < radius)
        .filter(|&v| a.guaranteed.contains_strict(v) && b.guaranteed.contains_strict(iso.apply(v)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub kind: String,
    /// Star point, or twice the center of the half-turn.
    pub center: Option<EPoint>,
    pub checked_vertices: usize,
    pub invariant: bool,
}

/// Whether the half-turn `z ↦ c2 − z` preserves the nonoriented structure
/// on the part of `H(c2/2, radius)` inside the guaranteed region.
pub fn half_turn_check(patch: &CoveringPatch, c2: EPoint, radius: i64) -> MatchReport {
    let iso = Isometry::half_turn(c2);
    let pts: Vec<EPoint> = HexWindow::new(nearest_half(c2), radius + 1)
        .points()
        .filter(|&v| (v * 2 - c2).hex_norm() < 2 * radius)
        .filter(|&v| patch.guaranteed.contains_strict(v) && patch.guaranteed.contains_strict(iso.apply(v)))
        .collect();
    structure_matches(patch, patch, iso, pts.into_iter(), false)
}

fn nearest_half(c2: EPoint) -> EPoint {
    EPoint::new(c2.a.div_euclid(2), c2.b.div_euclid(2))
}

/// First `c2` (spiral order around `2·around`) whose half-turn preserves
/// the structure on radius `radius`.
pub fn find_half_turn(patch: &CoveringPatch, around: EPoint, search: i64, radius: i64) -> Option<EPoint> {
    crate::trilattice::hex_spiral(around * 2, 2 * search).find(|&c2| half_turn_check(patch, c2, radius).ok())
}

/// Star patches: invariance under the rotations by `±2π/3` about the star
/// point. Other patches: search for a half-turn near the window center.
pub fn symmetry_check(patch: &CoveringPatch, radius: i64) -> SymmetryReport {
    if let Some((x, _)) = patch.star {
        let mut checked = 0;
        let mut ok = true;
        for rot in [2u8, 4] {
            let iso = Isometry::about(PointIsometry { rotation: rot, reflect: false }, x);
            let pts = check_points(patch, patch, iso, x, radius);
            let r = structure_matches(patch, patch, iso, pts.into_iter(), true);
            checked += r.checked;
            ok &= r.ok();
        }
        return SymmetryReport { kind: "rotation".into(), center: Some(x), checked_vertices: checked, invariant: ok };
    }
    let g = patch.guaranteed;
    match find_half_turn(patch, g.center, g.radius / 2, radius) {
        Some(c2) => SymmetryReport {
            kind: "half-turn".into(),
            center: Some(c2),
            checked_vertices: half_turn_check(patch, c2, radius).checked,
            invariant: true,
        },
        None => SymmetryReport { kind: "none".into(), center: None, checked_vertices: 0, invariant: false },
    }
}

/// Point isometries `g` such that `z ↦ g(z − ca) + cb` carries the
/// nonoriented structure of `a` around `ca` onto that of `b`.
pub fn matching_isometries(a: &CoveringPatch, ca: EPoint, b: &CoveringPatch, cb: EPoint, radius: i64) -> Vec<PointIsometry> {
    PointIsometry::all()
        .filter(|&g| {
            let iso = Isometry { linear: g, shift: cb - g.apply(ca) };
            let pts = check_points(a, b, iso, ca, radius);
            structure_matches(a, b, iso, pts.into_iter(), false).ok()
        })
        .collect()
}

/// Curves (by id) with a segment at `v`.
pub fn curves_through(patch: &CoveringPatch, v: EPoint) -> Vec<usize> {
    let ids: BTreeMap<usize, ()> = Dir6::ALL
        .iter()
        .filter_map(|d| patch.segments.get(&EdgeKey::from_oriented(v, *d)).map(|s| (s.curve, ())))
        .collect();
    ids.into_keys().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foldseq::gen_t;
    use crate::tcurve::realize;

    fn lam(s: &str) -> Lambda {
        s.parse().unwrap()
    }

    fn zero_chain(n: usize) -> XChain {
        XChain::constant(EPoint::ZERO, n + 1)
    }

    #[test]
    fn disp_matches_realization() {
        for n in 0..=6 {
            for l in Lambda::all(n) {
                let c = realize(&gen_t(&l), EPoint::ZERO, Dir6::new(0));
                assert_eq!(c.endpoint(), level_disp(&l, n));
            }
        }
    }

    #[test]
    fn margin_values() {
        // 2ρ/√3 for ρ_1..ρ_4 ≈ 1.73, 4, 7.93, 14.7
        assert_eq!(guaranteed_margin(1), 2);
        assert_eq!(guaranteed_margin(2), 5);
        assert_eq!(guaranteed_margin(3), 10);
        for n in 1..12 {
            let m = guaranteed_margin(n) as f64;
            let want = 2.0 * rho(n).to_f64() / 3f64.sqrt();
            assert!(m >= want && m - 1.0 < want);
        }
    }

    #[test]
    fn chain_validation() {
        assert!(XChain::new(vec![EPoint::ZERO, EPoint::new(1, 0), EPoint::new(2, 1)]).validate().is_ok());
        assert_eq!(
            XChain::new(vec![EPoint::ZERO, EPoint::new(1, 0), EPoint::new(2, 0)]).validate(),
            Err(CoverError::BadChain { level: 2 })
        );
        let c: XChain = "0,0; 1,0;2,1".parse().unwrap();
        assert_eq!(c.to_string(), "0,0;1,0;2,1");
    }

    #[test]
    fn nearest_in_frame_brute() {
        for k in 0..5 {
            for q in HexWindow::new(EPoint::new(2, -1), 6).points() {
                let got = nearest_in_frame(EPoint::new(1, 1), k, q);
                let best = HexWindow::new(q, 12)
                    .points()
                    .filter(|&p| divisible_by_theta_pow(p - EPoint::new(1, 1), k))
                    .min_by_key(|&p| ((q - p).norm(), p))
                    .unwrap();
                assert_eq!(got, best);
            }
        }
    }

    #[test]
    fn level_zero_patch() {
        let p = build_patch(&lam(""), &zero_chain(0), Field::E1, HexWindow::new(EPoint::ZERO, 5)).unwrap();
        assert!(p.segments.values().all(|s| s.dir.is_even()));
        assert_eq!(p.curves.len(), p.segments.len());
        let r = validate(&p);
        assert!(r.covering_ok && r.property_p);
    }

    #[test]
    fn level_two_patch_curves_are_realizations() {
        let l = lam("+-");
        let p = build_patch(&l, &zero_chain(2), Field::E1, HexWindow::new(EPoint::ZERO, 12)).unwrap();
        let want = gen_t(&l);
        let mut complete = 0;
        for c in p.curves.iter().filter(|c| c.complete) {
            complete += 1;
            let pts = p.curve_polyline(c.id);
            let d = Dir6::from_unit(pts[1] - pts[0]).unwrap();
            assert_eq!(pts, realize(&want, c.start, d).vertices());
        }
        assert!(complete > 20);
        let frame = SublatticeFrame::new(EPoint::ZERO, 2);
        for v in p.guaranteed.points().filter(|&v| frame.contains(v) && p.guaranteed.contains_strict(v)) {
            let ends = p.curves.iter().filter(|c| c.start == v || c.end == v).count();
            assert_eq!(ends, 6, "at {v}");
        }
        let r = validate(&p);
        assert!(r.covering_ok && r.property_p, "{r:?}");
        assert!(p.local_rule_disagreements().is_empty());
    }

    #[test]
    fn level_one_curves_contain_w_points() {
        let l = lam("+");
        let p = build_patch(&l, &zero_chain(1), Field::E1, HexWindow::new(EPoint::ZERO, 6)).unwrap();
        for c in p.curves.iter().filter(|c| c.complete) {
            let pts = p.curve_polyline(c.id);
            let inner = pts[1..pts.len() - 1].iter().filter(|&&v| crate::trilattice::w_contains(EPoint::ZERO, 1, v)).count();
            assert_eq!(inner, 2);
        }
    }

    #[test]
    fn window_too_small() {
        let e = build_patch(&lam("+-+"), &zero_chain(3), Field::E1, HexWindow::new(EPoint::ZERO, 8));
        assert_eq!(e, Err(CoverError::WindowTooSmall { radius: 8, margin: 10 }));
    }

    #[test]
    fn e2_patch_parity() {
        let p = build_patch(&lam("-+"), &zero_chain(2), Field::E2, HexWindow::new(EPoint::new(1, 2), 10)).unwrap();
        let r = validate(&p);
        assert!(r.covering_ok && r.property_p);
        assert_eq!(r.parity, Some(Field::E2));
    }

    #[test]
    fn fault_injection_breaks_p() {
        let mut p = build_patch(&lam("+-"), &zero_chain(2), Field::E1, HexWindow::new(EPoint::ZERO, 12)).unwrap();
        p.inject_reversal(EdgeKey { base: EPoint::ZERO, axis: 0 });
        let r = validate(&p);
        assert!(!r.property_p);
    }

    #[test]
    fn limit_extension_agrees_with_linking() {
        let l = lam("+--+-++-+--+-+");
        let chain = XChain::new(vec![EPoint::ZERO, EPoint::new(1, 0), EPoint::new(2, 1), EPoint::new(2, 1)]);
        let mut p = build_patch(&l.prefix(3), &chain, Field::E1, HexWindow::new(EPoint::ZERO, 20)).unwrap();
        assert!(p.local_rule_disagreements().is_empty());
        let deep = build_patch(&l.prefix(4), &chain, Field::E1, HexWindow::new(EPoint::ZERO, 30)).unwrap();
        p.extend_limit(&l, &chain).unwrap();
        assert!(p.local_rule_disagreements().is_empty());
        // every pairing of the level-4 patch inside its exact region matches
        for v in deep.guaranteed.points().filter(|&v| p.window.contains_strict(v)) {
            let dp = deep.pairs_at(v);
            let pp = p.pairs_at(v);
            assert!(dp.iter().all(|x| pp.contains(x)), "at {v}: {dp:?} vs {pp:?}");
        }
        let r = validate(&p);
        assert!(r.covering_ok && r.property_p && r.open_interior_junctions <= 1, "{r:?}");
    }

    #[test]
    fn star_examples() {
        let l = lam("+-+");
        let p = build_patch(&l, &zero_chain(3), Field::E1, HexWindow::new(EPoint::ZERO, 14)).unwrap();
        let plus = star_connect(&p, StarMode::Plus).unwrap();
        let minus = star_connect(&p, StarMode::Minus).unwrap();
        assert_eq!(curves_through(&plus, EPoint::ZERO).len(), 3);
        assert_eq!(curves_through(&minus, EPoint::ZERO).len(), 3);
        let differ: Vec<EPoint> = p.window.points().filter(|&v| plus.pairs_at(v) != minus.pairs_at(v)).collect();
        assert_eq!(differ, vec![EPoint::ZERO]);
        let sym = symmetry_check(&plus, 4);
        assert!(sym.invariant && sym.checked_vertices > 0, "{sym:?}");
        let drift = XChain::new(vec![EPoint::ZERO, EPoint::new(1, 0), EPoint::new(2, 1), EPoint::new(2, -2)]);
        let q = build_patch(&l, &drift, Field::E1, HexWindow::new(EPoint::ZERO, 14)).unwrap();
        assert_eq!(star_connect(&q, StarMode::Plus), Err(CoverError::NoStarPoint));
    }

    #[test]
    fn pseq_chain_roundtrip() {
        let l = Lambda::alternating(-1, 12);
        for ps in ["MMMMMMMMMMMM", "ISIMMSSIMIMS", "IIIIIIIIIIII", "SSSSMMMMIIII"] {
            let p: PSeq = ps.parse().unwrap();
            let (chain, tr) = chain_from_pseq(&l, &p, EPoint::new(3, -1), Dir6::new(2)).unwrap();
            assert!(chain.validate().is_ok());
            let (back, tr2) = pseq_from_chain(&l, &chain, EPoint::new(3, -1), Dir6::new(2)).unwrap();
            assert_eq!(back, p);
            assert_eq!(tr, tr2);
        }
    }

    #[test]
    fn classify_examples() {
        let alt = Lambda::alternating(-1, 20);
        let all_m: PSeq = "M".repeat(16).parse().unwrap();
        assert_eq!(classify(&alt, &Evidence::PSeq(all_m.clone()), 16), Ok(CaseTag::ThreeSeparated));
        assert_eq!(classify(&alt, &Evidence::Chain(zero_chain(16)), 16), Ok(CaseTag::ThreeStar));
        let l = lam("+-++--+-+---++-+-+-+");
        let p = crate::foldseq::eight_pattern(&l, 16, Piece::M);
        assert_eq!(classify(&l, &Evidence::PSeq(p), 16), Ok(CaseTag::OneCurveCertified));
        assert!(matches!(classify(&l, &Evidence::PSeq(all_m), 16), Err(CoverError::InconsistentInput(_))));
        let odd: PSeq = "MSMSMSMSMSMSMSMS".parse().unwrap();
        assert_eq!(classify(&l, &Evidence::PSeq(odd), 16), Ok(CaseTag::Unknown { lower_bound: 1 }));
        // star from a chain whose anchor settles although x_n moves
        let s: PSeq = "S".repeat(16).parse().unwrap();
        let (chain, _) = chain_from_pseq(&l, &s, EPoint::ZERO, Dir6::new(0)).unwrap();
        assert_eq!(classify(&l, &Evidence::Chain(chain), 16), Ok(CaseTag::ThreeStar));
    }

    #[test]
    fn separated_patch_half_turn() {
        let l = Lambda::alternating(-1, 24);
        let p: PSeq = "M".repeat(24).parse().unwrap();
        let (chain, tr) = chain_from_pseq(&l, &p, EPoint::ZERO, Dir6::new(0)).unwrap();
        let mut patch = build_patch(&l.prefix(3), &chain, Field::E1, HexWindow::new(EPoint::ZERO, 20)).unwrap();
        patch.extend_limit(&l, &chain).unwrap();
        let c2 = tr.starts[0] + tr.ends[0];
        assert_eq!(tr.starts[5] + tr.ends[5], c2);
        assert!(half_turn_check(&patch, c2, 12).ok());
        assert!(!half_turn_check(&patch, c2 + EPoint::new(1, 0), 12).ok());
    }

    #[test]
    fn lattices_and_reextraction() {
        let l = lam("+--+");
        let chain = XChain::new(vec![EPoint::ZERO, EPoint::new(0, 1), EPoint::new(1, 2), EPoint::new(1, 2), EPoint::new(1, 2)]);
        let p = build_patch(&l, &chain, Field::E1, HexWindow::new(EPoint::ZERO, 34)).unwrap();
        let r = level_lattices(&p, 3);
        assert!(!r.curves.is_empty());
        assert!(r.agree.len() >= 2 && r.agree.iter().all(|&x| x));
        assert!(r.chain_agree.iter().all(|&x| x));
        assert!(r.lambda_agree);
        assert!(r.curves.iter().all(|c| c.extracted.as_deref() == Some("+--")));
    }

    #[test]
    fn dump_roundtrip() {
        let p = build_patch(&lam("+-"), &zero_chain(2), Field::E1, HexWindow::new(EPoint::ZERO, 8)).unwrap();
        let s = p.to_json();
        let q = CoveringPatch::from_json(&s).unwrap();
        assert_eq!(p, q);
        assert_eq!(validate(&p), validate(&q));
        assert_eq!(q.to_json(), s);
    }
}
