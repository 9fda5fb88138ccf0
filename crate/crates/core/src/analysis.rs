//! Local isomorphism between coverings: patch codes on hexagons and the
//! search for a translated copy.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::covering::CoveringPatch;
use crate::trilattice::{hex_spiral, Dir6, EPoint, EdgeKey, HexWindow};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("H({center}, {radius}) is not inside the exact region of the patch")]
    OutOfRegion { center: EPoint, radius: i64 },
    #[error("search region of radius {needed} around {center} is not inside the exact region")]
    RegionTooSmall { center: EPoint, needed: i64 },
}

/// The restriction of a covering to the interior of `H(c, 3^n)`, in
/// coordinates relative to `c`: each side with its direction, and each
/// pair of linked sides meeting at an interior vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatchCode {
    pub sides: Vec<(EdgeKey, u8)>,
    pub pairs: Vec<(EPoint, u8, u8)>,
}

pub fn pow3(n: u32) -> i64 {
    3i64.pow(n)
}

/// Code of `H*(c, 3^n)`: sides with both ends strictly inside the hexagon.
pub fn patch_code(patch: &CoveringPatch, c: EPoint, n: u32) -> Result<PatchCode, AnalysisError> {
    let r = pow3(n);
    let h = HexWindow::new(c, r);
    if !(patch.guaranteed.contains(c) && patch.guaranteed.radius - (c - patch.guaranteed.center).hex_norm() >= r) {
        return Err(AnalysisError::OutOfRegion { center: c, radius: r });
    }
    let inner = |e: EdgeKey| {
        let (p, q) = e.endpoints();
        h.contains_strict(p) && h.contains_strict(q)
    };
    let mut sides = vec![];
    let mut pairs = vec![];
    for v in h.points().filter(|&v| h.contains_strict(v)) {
        for d in Dir6::ALL.iter().take(3) {
            let e = EdgeKey::from_oriented(v, *d);
            if inner(e) {
                if let Some(s) = patch.seg(e) {
                    sides.push((e.translate(EPoint::ZERO - c), s.dir.index()));
                }
            }
        }
        for (d, e) in patch.incoming(v) {
            let Some(nx) = patch.seg(e).and_then(|s| s.next) else { continue };
            if inner(e) && inner(nx) {
                pairs.push((v - c, d.index(), patch.seg(nx).unwrap().dir.index()));
            }
        }
    }
    sides.sort();
    pairs.sort();
    Ok(PatchCode { sides, pairs })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LisoResult {
    pub n: u32,
    pub source: EPoint,
    /// A center in the target whose code equals the source's.
    pub witness: Option<EPoint>,
    pub scanned: usize,
    pub search_radius: i64,
}

/// Look for a copy of `H*(x, 3^n)` of `a` in `b` within hex distance
/// `5·3^n` of `y`.
pub fn liso_search(a: &CoveringPatch, x: EPoint, b: &CoveringPatch, y: EPoint, n: u32) -> Result<LisoResult, AnalysisError> {
    let code = patch_code(a, x, n)?;
    let search = 5 * pow3(n);
    let needed = search + pow3(n);
    let g = b.guaranteed;
    if g.radius - (y - g.center).hex_norm() < needed {
        return Err(AnalysisError::RegionTooSmall { center: y, needed });
    }
    let mut scanned = 0;
    for z in hex_spiral(y, search) {
        scanned += 1;
        if patch_code(b, z, n)? == code {
            return Ok(LisoResult { n, source: x, witness: Some(z), scanned, search_radius: search });
        }
    }
    Ok(LisoResult { n, source: x, witness: None, scanned, search_radius: search })
}

fn random_point(region: HexWindow, shrink: i64, rng: &mut impl rand::Rng) -> Option<EPoint> {
    let r = region.radius - shrink;
    if r < 0 {
        return None;
    }
    loop {
        let p = EPoint::new(rng.gen_range(-r..=r), rng.gen_range(-r..=r));
        if p.hex_norm() <= r {
            return Some(region.center + p);
        }
    }
}

/// Random pairs `(x, y)`: `H(x, 3^n)` inside `a`'s exact region and the
/// search around `y` inside `b`'s.
pub fn sample_pairs(
    a: &CoveringPatch,
    b: &CoveringPatch,
    n: u32,
    count: usize,
    rng: &mut impl rand::Rng,
) -> Vec<(EPoint, EPoint)> {
    let mut out = vec![];
    for _ in 0..count {
        let (Some(x), Some(y)) = (random_point(a.guaranteed, pow3(n), rng), random_point(b.guaranteed, 6 * pow3(n), rng))
        else {
            return vec![];
        };
        out.push((x, y));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LisoReport {
    pub n: u32,
    pub samples: usize,
    pub found: usize,
    pub results: Vec<LisoResult>,
}

impl LisoReport {
    pub fn all_found(&self) -> bool {
        self.samples > 0 && self.found == self.samples
    }

    pub fn none_found(&self) -> bool {
        self.found == 0
    }
}

/// `liso_search` for every pair, in parallel; results keep the pair order.
pub fn liso_report(a: &CoveringPatch, b: &CoveringPatch, n: u32, pairs: &[(EPoint, EPoint)]) -> Result<LisoReport, AnalysisError> {
    use rayon::prelude::*;
    let results: Result<Vec<LisoResult>, AnalysisError> =
        pairs.par_iter().map(|&(x, y)| liso_search(a, x, b, y, n)).collect();
    let results = results?;
    let found = results.iter().filter(|r| r.witness.is_some()).count();
    Ok(LisoReport { n, samples: pairs.len(), found, results })
}

/// Local isomorphism of one patch with itself over random pairs.
pub fn lisop_self(patch: &CoveringPatch, n: u32, samples: usize, rng: &mut impl rand::Rng) -> Result<LisoReport, AnalysisError> {
    let pairs = sample_pairs(patch, patch, n, samples, rng);
    if pairs.is_empty() {
        let g = patch.guaranteed;
        return Err(AnalysisError::RegionTooSmall { center: g.center, needed: 6 * pow3(n) });
    }
    liso_report(patch, patch, n, &pairs)
}
