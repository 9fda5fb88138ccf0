//! Folding turn sequences `T_Λ`, their residue laws and derivation.
//!
//! Signs are stored as `i8` values `±1`. Positions are 1-based: the first
//! turn of a sequence sits at `origin_index` (1 for freshly generated
//! sequences), so residues computed on windows are absolute.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FoldError {
    #[error("invalid sign string: {0}")]
    Parse(String),
    #[error("window is not part of a complete folding curve (level {level} has no admissible residue)")]
    NotFolding { level: u32 },
    #[error("window too short: several residue chains survive at level {level}")]
    AmbiguousWindow { level: u32 },
    #[error("residue {h} is not admissible at level 0")]
    BadResidue { h: i64 },
}

fn parse_sign(c: char) -> Result<i8, FoldError> {
    match c {
        '+' => Ok(1),
        '-' | '−' => Ok(-1),
        _ => Err(FoldError::Parse(format!("unexpected character `{c}`"))),
    }
}

fn parse_signs(s: &str) -> Result<Vec<i8>, FoldError> {
    s.chars().filter(|c| !c.is_whitespace()).map(parse_sign).collect()
}

pub fn format_signs(v: &[i8]) -> String {
    v.iter().map(|&x| if x > 0 { '+' } else { '-' }).collect()
}

/// Fold signs `λ_1, λ_2, …` (index 0 holds `λ_1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Lambda(pub Vec<i8>);

impl Lambda {
    pub fn new(v: Vec<i8>) -> Self {
        debug_assert!(v.iter().all(|&x| x == 1 || x == -1));
        Lambda(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `λ_k`, 1-based.
    pub fn get(&self, k: usize) -> i8 {
        self.0[k - 1]
    }

    pub fn prefix(&self, n: usize) -> Lambda {
        Lambda(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn tail(&self) -> Lambda {
        Lambda(self.0.get(1..).unwrap_or(&[]).to_vec())
    }

    /// Every `Λ` of length `n`, in binary order with `+` first.
    pub fn all(n: usize) -> impl Iterator<Item = Lambda> {
        (0u64..1 << n).map(move |bits| {
            Lambda((0..n).map(|i| if bits >> i & 1 == 0 { 1 } else { -1 }).collect())
        })
    }

    pub fn alternating(first: i8, n: usize) -> Lambda {
        Lambda((0..n).map(|i| if i % 2 == 0 { first } else { -first }).collect())
    }

    pub fn constant(sign: i8, n: usize) -> Lambda {
        Lambda(vec![sign; n])
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_signs(&self.0))
    }
}

impl FromStr for Lambda {
    type Err = FoldError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_signs(s).map(Lambda)
    }
}

/// A window of a turn sequence: `signs[i]` is the turn at absolute position
/// `origin_index + i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FoldSeq {
    pub signs: Vec<i8>,
    pub origin_index: i64,
}

impl FoldSeq {
    pub fn new(signs: Vec<i8>) -> Self {
        FoldSeq { signs, origin_index: 1 }
    }

    pub fn with_origin(signs: Vec<i8>, origin_index: i64) -> Self {
        FoldSeq { signs, origin_index }
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    /// Turn at absolute position `p`, if stored.
    pub fn at(&self, p: i64) -> Option<i8> {
        let i = p - self.origin_index;
        (i >= 0).then(|| self.signs.get(i as usize).copied()).flatten()
    }

    pub fn last_index(&self) -> i64 {
        self.origin_index + self.signs.len() as i64 - 1
    }

    pub fn to_sign_string(&self) -> String {
        format_signs(&self.signs)
    }
}

impl FromStr for FoldSeq {
    type Err = FoldError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_signs(s).map(FoldSeq::new)
    }
}

/// Which third of the next-level curve a curve is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Piece {
    I,
    M,
    S,
}

impl Piece {
    pub fn from_char(c: char) -> Option<Piece> {
        match c {
            'I' | 'i' => Some(Piece::I),
            'M' | 'm' => Some(Piece::M),
            'S' | 's' => Some(Piece::S),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Piece::I => 'I',
            Piece::M => 'M',
            Piece::S => 'S',
        }
    }
}

/// The sequence `(P_n)` with `C_n = C_{n+1}^{P_n}`, index 0 holds `P_0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PSeq(pub Vec<Piece>);

impl fmt::Display for PSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|p| write!(f, "{}", p.as_char()))
    }
}

impl FromStr for PSeq {
    type Err = FoldError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| Piece::from_char(c).ok_or_else(|| FoldError::Parse(format!("bad piece `{c}`"))))
            .collect::<Result<Vec<_>, _>>()
            .map(PSeq)
    }
}

/// JSON wrapper for sequences on disk.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SeqRecord {
    pub lambda: String,
    pub signs: String,
    pub origin_index: i64,
}

impl SeqRecord {
    pub fn new(lambda: &Lambda, seq: &FoldSeq) -> Self {
        SeqRecord {
            lambda: lambda.to_string(),
            signs: seq.to_sign_string(),
            origin_index: seq.origin_index,
        }
    }

    pub fn seq(&self) -> Result<FoldSeq, FoldError> {
        Ok(FoldSeq::with_origin(parse_signs(&self.signs)?, self.origin_index))
    }
}

/// `T_{λ1⋯λn}` via `T_{Λ,λ} = (T_Λ, λ, T_Λ, −λ, T_Λ)`.
pub fn gen_t(lambda: &Lambda) -> FoldSeq {
    let mut t: Vec<i8> = Vec::with_capacity(3usize.pow(lambda.len() as u32));
    for &l in &lambda.0 {
        let prev = t.clone();
        t.push(l);
        t.extend_from_slice(&prev);
        t.push(-l);
        t.extend_from_slice(&prev);
    }
    FoldSeq::new(t)
}

/// Reverse and negate.
pub fn bar(s: &FoldSeq) -> FoldSeq {
    FoldSeq::with_origin(s.signs.iter().rev().map(|&x| -x).collect(), s.origin_index)
}

/// Outcome of the residue scan at one level `k` (modulus `3^{k+1}`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelResidues {
    pub level: u32,
    pub modulus: i64,
    /// `(h, ε)` such that every stored position `≡ h + 3^k` carries `ε`
    /// and every stored position `≡ h + 2·3^k` carries `−ε`, with at least
    /// one stored position on each side.
    pub admissible: Vec<(i64, i8)>,
    /// Residues for which one of the two classes has no stored position.
    pub vacuous: Vec<i64>,
}

impl LevelResidues {
    /// No residue has evidence on both sides.
    pub fn unconstrained(&self) -> bool {
        self.admissible.is_empty() && !self.vacuous.is_empty()
    }

    /// The window cannot belong to a complete folding curve.
    pub fn contradicted(&self) -> bool {
        self.admissible.is_empty() && self.vacuous.is_empty()
    }
}

fn class_sign(window: &FoldSeq, residue: i64, modulus: i64) -> Result<Option<i8>, ()> {
    // first absolute position >= origin congruent to residue
    let first = window.origin_index + (residue - window.origin_index).rem_euclid(modulus);
    let mut sign = None;
    let mut p = first;
    while p <= window.last_index() {
        let s = window.at(p).expect("position in window");
        match sign {
            None => sign = Some(s),
            Some(e) if e != s => return Err(()),
            _ => {}
        }
        p += modulus;
    }
    Ok(sign)
}

/// Scan level `k`.
pub fn residues_at(window: &FoldSeq, k: u32) -> LevelResidues {
    let step = 3i64.pow(k);
    let modulus = 3 * step;
    let mut admissible = vec![];
    let mut vacuous = vec![];
    for h in 0..modulus {
        let a = class_sign(window, h + step, modulus);
        let b = class_sign(window, h + 2 * step, modulus);
        match (a, b) {
            (Ok(Some(x)), Ok(Some(y))) if x == -y => admissible.push((h, x)),
            (Ok(None), Ok(_)) | (Ok(_), Ok(None)) => vacuous.push(h),
            _ => {}
        }
    }
    LevelResidues { level: k, modulus, admissible, vacuous }
}

/// Residue scan for every level `0..=k_max`.
pub fn residue_check(window: &FoldSeq, k_max: u32) -> Vec<LevelResidues> {
    (0..=k_max).map(|k| residues_at(window, k)).collect()
}

/// Largest level `k` with `3^{k+1} ≤ len + 1` (the levels a full-length
/// `T_{Λ_n}` window determines are `0..=n−1`).
pub fn default_k_max(len: usize) -> u32 {
    let mut k = 0;
    while 3usize.pow(k + 2) <= len + 1 {
        k += 1;
    }
    k
}

/// Λ prefix recovered from a window, with the surviving residue chains.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extraction {
    pub lambda: String,
    /// Surviving nested residue chains `h_0, h_1, …` (`h_k` mod `3^{k+1}`).
    pub chains: Vec<Vec<i64>>,
    /// Levels actually determined (may be fewer than requested when the
    /// window stops constraining).
    pub levels: u32,
}

impl Extraction {
    pub fn lambda(&self) -> Lambda {
        self.lambda.parse().expect("valid lambda string")
    }
}

/// Recover `λ_1, …, λ_{k_max+1}` from the nested residue chains of a window.
pub fn extract_lambda(window: &FoldSeq, k_max: u32) -> Result<Extraction, FoldError> {
    // chains of (h_k, ε_k)
    let mut chains: Vec<Vec<(i64, i8)>> = vec![vec![]];
    let mut levels = 0;
    for k in 0..=k_max {
        let lev = residues_at(window, k);
        if lev.contradicted() {
            return Err(FoldError::NotFolding { level: k });
        }
        if lev.unconstrained() {
            break;
        }
        let step = 3i64.pow(k);
        let mut next = vec![];
        for chain in &chains {
            for &(h, e) in &lev.admissible {
                let nested = chain.last().is_none_or(|&(hp, _)| h.rem_euclid(step) == hp);
                if nested {
                    let mut c = chain.clone();
                    c.push((h, e));
                    next.push(c);
                }
            }
        }
        if next.is_empty() {
            return Err(FoldError::NotFolding { level: k });
        }
        let e0 = next[0][k as usize].1;
        if next.iter().any(|c| c[k as usize].1 != e0) {
            return Err(FoldError::AmbiguousWindow { level: k });
        }
        chains = next;
        levels = k + 1;
    }
    let lambda: Vec<i8> = chains[0].iter().map(|&(_, e)| e).collect();
    Ok(Extraction {
        lambda: format_signs(&lambda),
        chains: chains.iter().map(|c| c.iter().map(|&(h, _)| h).collect()).collect(),
        levels,
    })
}

/// Verdict of [`classify_window`]. A finite window can only ever be
/// *consistent with* one of the two alternatives for the infinite sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowCase {
    /// Consistent with `(bar T_Λ, ε, T_Λ)`: the stored position `center`
    /// (carrying `sign`) is an admissible residue at every level up to the
    /// horizon. `candidates` counts all such positions in the window.
    CaseA { center: i64, sign: i8, candidates: usize },
    /// Consistent with an increasing union of `n`-folding curves: nested
    /// residues exist at every level but no stored position is common to all.
    CaseB,
    Undetermined,
}

/// Classify a window as consistent with case (a) or case (b) up to `horizon`.
pub fn classify_window(window: &FoldSeq, horizon: u32) -> Result<WindowCase, FoldError> {
    let levels = residue_check(window, horizon);
    for lev in &levels {
        if lev.contradicted() {
            return Err(FoldError::NotFolding { level: lev.level });
        }
        if lev.unconstrained() {
            return Ok(WindowCase::Undetermined);
        }
    }
    let admissible_at = |c: i64| {
        levels.iter().all(|lev| {
            let r = c.rem_euclid(lev.modulus);
            lev.admissible.iter().any(|&(h, _)| h == r)
        })
    };
    let centers: Vec<i64> = (window.origin_index..=window.last_index()).filter(|&c| admissible_at(c)).collect();
    if !centers.is_empty() {
        // twice the window midpoint, to stay in integers
        let mid2 = window.origin_index + window.last_index();
        let center = *centers.iter().min_by_key(|&&c| ((2 * c - mid2).abs(), c)).expect("nonempty");
        return Ok(WindowCase::CaseA {
            center,
            sign: window.at(center).expect("in window"),
            candidates: centers.len(),
        });
    }
    nested_chains(&levels)?;
    Ok(WindowCase::CaseB)
}

fn nested_chains(levels: &[LevelResidues]) -> Result<Vec<Vec<(i64, i8)>>, FoldError> {
    let mut chains: Vec<Vec<(i64, i8)>> = vec![vec![]];
    for lev in levels {
        let step = lev.modulus / 3;
        let next: Vec<_> = chains
            .iter()
            .flat_map(|chain| {
                lev.admissible.iter().filter(|&&(h, _e)| chain.last().is_none_or(|&(hp, _)| h.rem_euclid(step) == hp)).map(|&(h, e)| {
                        let mut c = chain.clone();
                        c.push((h, e));
                        c
                    })
            })
            .collect();
        if next.is_empty() {
            return Err(FoldError::NotFolding { level: lev.level });
        }
        chains = next;
    }
    Ok(chains)
}

/// Keep the turns at positions `≡ h (mod 3)`; the kept turn at `p` lands at
/// index `(p − h)/3`.
pub fn delta_seq(s: &FoldSeq, h: i64) -> Result<FoldSeq, FoldError> {
    let h = h.rem_euclid(3);
    let lev = residues_at(s, 0);
    let ok = lev.admissible.iter().any(|&(r, _)| r == h)
        || (lev.admissible.is_empty() && lev.vacuous.contains(&h));
    if !ok {
        return Err(FoldError::BadResidue { h });
    }
    let first = s.origin_index + (h - s.origin_index).rem_euclid(3);
    let mut out = vec![];
    let mut p = first;
    while p <= s.last_index() {
        out.push(s.at(p).expect("in window"));
        p += 3;
    }
    Ok(FoldSeq::with_origin(out, (first - h).div_euclid(3)))
}

/// `(P_n)` following the periodic pattern of the single-curve construction:
/// `P_{8n} = I`, `P_{8n+1} = M/S` for `λ_{8n+2} = ±1`, `P_{8n+2} = I`,
/// `P_{8n+3} = S/M` for `λ_{8n+4} = ±1`, and `free` for `P_{8n+4..8n+7}`.
pub fn eight_pattern(lambda: &Lambda, len: usize, free: Piece) -> PSeq {
    PSeq((0..len).map(|n| eight_pattern_expected(lambda, n).unwrap_or(free)).collect())
}

/// The forced value of `P_n` in the periodic single-curve pattern, if any.
pub fn eight_pattern_expected(lambda: &Lambda, n: usize) -> Option<Piece> {
    let lam = |k: usize| lambda.0.get(k - 1).copied();
    match n % 8 {
        0 | 2 => Some(Piece::I),
        1 => lam(n + 1).map(|l| if l > 0 { Piece::M } else { Piece::S }),
        3 => lam(n + 1).map(|l| if l > 0 { Piece::S } else { Piece::M }),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lam(s: &str) -> Lambda {
        s.parse().unwrap()
    }

    fn seq(s: &str) -> FoldSeq {
        s.parse().unwrap()
    }

    /// Independent recursive oracle: the turn at position `p` of `T_{λ1..λn}`.
    fn oracle_turn(lambda: &[i8], p: usize) -> i8 {
        let n = lambda.len();
        let block = 3usize.pow(n as u32 - 1);
        match p / block {
            _ if !p.is_multiple_of(block) => oracle_turn(&lambda[..n - 1], p % block),
            1 => lambda[n - 1],
            2 => -lambda[n - 1],
            _ => unreachable!(),
        }
    }

    #[test]
    fn gen_examples() {
        assert!(gen_t(&Lambda::default()).is_empty());
        assert_eq!(gen_t(&lam("+")).signs, vec![1, -1]);
        assert_eq!(gen_t(&lam("+-")), seq("+--+-++-"));
        for n in 1..=6 {
            for l in Lambda::all(n) {
                let t = gen_t(&l);
                for p in 1..3usize.pow(n as u32) {
                    assert_eq!(t.at(p as i64).unwrap(), oracle_turn(&l.0, p));
                }
            }
        }
    }

    #[test]
    fn bar_examples() {
        assert_eq!(bar(&FoldSeq::new(vec![])).signs, Vec::<i8>::new());
        assert_eq!(bar(&seq("+-")), seq("+-"));
        assert_eq!(bar(&seq("++")), seq("--"));
    }

    #[test]
    fn sequence_laws() {
        for n in 0..=10 {
            let iter: Box<dyn Iterator<Item = Lambda>> = if n <= 6 {
                Box::new(Lambda::all(n))
            } else {
                Box::new([Lambda::constant(1, n), Lambda::alternating(-1, n)].into_iter())
            };
            for l in iter {
                let t = gen_t(&l);
                assert_eq!(t.len(), 3usize.pow(n as u32) - 1);
                assert_eq!(bar(&t), t);
                assert_eq!(t.signs.iter().map(|&x| x as i64).sum::<i64>(), 0);
                if n > 0 {
                    let shorter = gen_t(&l.prefix(n - 1));
                    assert_eq!(&t.signs[..shorter.len()], &shorter.signs[..]);
                    assert_eq!(delta_seq(&t, 0).unwrap(), gen_t(&l.tail()));
                }
            }
        }
    }

    #[test]
    fn residue_examples() {
        let t = gen_t(&lam("+-"));
        let lv = residue_check(&t, 1);
        assert_eq!(lv[0].admissible, vec![(0, 1)]);
        assert_eq!(lv[1].admissible, vec![(0, -1)]);
        let c = FoldSeq::new(vec![1; 20]);
        assert!(residues_at(&c, 0).admissible.is_empty());
        assert!(residues_at(&c, 0).contradicted());
    }

    #[test]
    fn residue_is_absolute() {
        let t = gen_t(&lam("+-+-"));
        // a window starting at absolute position 5
        let w = FoldSeq::with_origin(t.signs[4..60].to_vec(), 5);
        let lv = residues_at(&w, 0);
        assert_eq!(lv.admissible, vec![(0, 1)]);
        assert_eq!(extract_lambda(&w, 2).unwrap().lambda, "+-+");
    }

    #[test]
    fn extract_examples() {
        assert_eq!(extract_lambda(&gen_t(&lam("+-")), 1).unwrap().lambda, "+-");
        assert_eq!(extract_lambda(&gen_t(&lam("--+")), 2).unwrap().lambda, "--+");
        assert_eq!(
            extract_lambda(&FoldSeq::new(vec![1; 10]), 1),
            Err(FoldError::NotFolding { level: 0 })
        );
        for n in 1..=8 {
            for l in Lambda::all(n) {
                let t = gen_t(&l);
                let ex = extract_lambda(&t, default_k_max(t.len())).unwrap();
                assert_eq!(ex.lambda(), l);
                assert_eq!(ex.chains.len(), 1);
            }
        }
    }

    #[test]
    fn classify_examples() {
        let l3 = lam("+-+");
        let t = gen_t(&l3);
        let mut s = bar(&t).signs;
        s.push(1);
        s.extend_from_slice(&t.signs);
        let w = FoldSeq::new(s);
        match classify_window(&w, 2).unwrap() {
            WindowCase::CaseA { center, sign, .. } => assert_eq!((center, sign), (27, 1)),
            other => panic!("{other:?}"),
        }
        let t4 = gen_t(&lam("+-+-"));
        assert_eq!(classify_window(&t4, 3).unwrap(), WindowCase::CaseB);
        assert_eq!(classify_window(&seq("+-"), 3).unwrap(), WindowCase::Undetermined);
        assert!(matches!(
            classify_window(&FoldSeq::new(vec![1; 10]), 1),
            Err(FoldError::NotFolding { .. })
        ));
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_seq(&gen_t(&lam("+-")), 0).unwrap(), seq("-+"));
        assert!(delta_seq(&gen_t(&lam("+")), 0).unwrap().is_empty());
        assert_eq!(delta_seq(&gen_t(&lam("-++")), 0).unwrap(), gen_t(&lam("++")));
        assert_eq!(delta_seq(&gen_t(&lam("-++")), 1), Err(FoldError::BadResidue { h: 1 }));
    }

    #[test]
    fn position_law_exhaustive() {
        for n in 1..=8u32 {
            for l in Lambda::all(n as usize) {
                let t = gen_t(&l);
                for k in 0..n {
                    let step = 3i64.pow(k);
                    let mut p = step;
                    while p < 3i64.pow(n) {
                        assert_eq!(t.at(p).unwrap(), l.get(k as usize + 1));
                        assert_eq!(t.at(p + step).unwrap(), -l.get(k as usize + 1));
                        p += 3 * step;
                    }
                }
            }
        }
    }

    #[test]
    fn eight_pattern_shape() {
        let l = lam("+-+-+-+-+-+-");
        let p = eight_pattern(&l, 10, Piece::M);
        assert_eq!(p.to_string(), "ISIMMMMMIS");
    }

    #[test]
    fn parse_roundtrip() {
        assert_eq!(lam("+−-").0, vec![1, -1, -1]);
        assert!("+x".parse::<Lambda>().is_err());
        let r = SeqRecord::new(&lam("+-"), &gen_t(&lam("+-")));
        let j = serde_json::to_string(&r).unwrap();
        let back: SeqRecord = serde_json::from_str(&j).unwrap();
        assert_eq!(back.seq().unwrap(), gen_t(&lam("+-")));
    }
}
