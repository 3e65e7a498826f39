//! Structural scans past the rewrite window: tail-change positions on
//! fresh residue classes, families of orbit indices whose letters vary
//! under shifts by a convergent denominator, and a census of free versus
//! hit gap windows across convergent levels.

use std::collections::BTreeSet;

use rug::{Integer, Rational};

use crate::approximant::{scan_mismatches, PeriodicApproximant};
use crate::cfrac::{nearest_distance, CfExpansion};
use crate::coding::{circle_distance, orbit_bound_distance, Bound, CodingWord};
use crate::numerics::{BallReal, Prec};
use crate::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// A position past the scanned window where the word's letter differs
/// from the periodized letter, on a residue class carrying no earlier
/// mismatch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailChange {
    /// Position in the word.
    pub position: u64,
    /// The word's letter there.
    pub letter: u8,
    /// The periodized letter it departs from.
    pub periodized: u8,
}

/// The pair of boundary points (index 0 is the origin, index `k` the
/// k-th partition boundary) minimizing the circle distance
/// `||gap * theta - (point_j - point_i)||` for the gap between the first
/// two tail changes.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPairResidual {
    /// Boundary index paired with the earlier change.
    pub first_boundary: usize,
    /// Boundary index paired with the later change.
    pub second_boundary: usize,
    /// Certified upper bound for the minimal residual.
    pub residual: f64,
}

/// Tail changes of one rewrite, with derived gap statistics.
#[derive(Clone, Debug)]
pub struct TailChangeRecord {
    /// Convergent level.
    pub level: usize,
    /// Scan window `w`.
    pub window: u32,
    /// Preperiod `r`.
    pub preperiod: u64,
    /// Period `s`.
    pub period: u64,
    /// Largest position scanned, inclusive.
    pub search_limit: u64,
    /// Fresh-residue changes found, ascending, capped at the requested
    /// count.
    pub changes: Vec<TailChange>,
    /// Gap between the first two change positions.
    pub gap: Option<u64>,
    /// Second change position divided by `q_n * q_{n+1}`.
    pub ratio: Option<f64>,
    /// Natural log of the first change position, reported so the gap can
    /// be inspected against `C * log` for any candidate constant.
    pub log_first: Option<f64>,
    /// Best boundary pair explaining the gap; `None` when a boundary
    /// carries no tag.
    pub residual: Option<BoundaryPairResidual>,
}

/// Scans positions `p` in `[r + w*s, search_limit]` whose residue class
/// mod `s` carries no mismatch yet, recording those where the word
/// departs from the letter at its representative in `[r+1, r+s]`.  Each
/// find retires its residue class, so at most one change per class is
/// reported.
pub fn tail_change_scan(
    letters: &[u8],
    preperiod: u64,
    period: u64,
    window: u32,
    first_mismatches: &[u64],
    search_limit: u64,
    want: usize,
) -> Vec<TailChange> {
    let r = preperiod;
    let s = period;
    let mut known: BTreeSet<u64> = first_mismatches.iter().map(|&f| f % s).collect();
    let mut out = Vec::new();
    let mut p = r + u64::from(window) * s;
    let lim = search_limit.min((letters.len() as u64).saturating_sub(1));
    while p <= lim && out.len() < want {
        if !known.contains(&(p % s)) {
            let pbar = r + 1 + (p - r - 1) % s;
            let actual = letters[p as usize];
            let rewound = letters[pbar as usize];
            if actual != rewound {
                out.push(TailChange {
                    position: p,
                    letter: actual,
                    periodized: rewound,
                });
                known.insert(p % s);
            }
        }
        p += 1;
    }
    out
}

/// Finds the first `want` tail changes of a rewrite, searching up to
/// `search_limit` (defaults to `q_n * q_{n+1}`).  Each change is
/// re-verified against independently recomputed single letters, and the
/// gap between the first two changes is matched to its best boundary
/// pair.
pub fn tail_changes(
    word: &CodingWord,
    expansion: &CfExpansion,
    approx: &PeriodicApproximant,
    search_limit: Option<u64>,
    want: usize,
    prec: Prec,
) -> Result<TailChangeRecord> {
    if want == 0 {
        return Err(Error::domain("tail-change scan needs want >= 1"));
    }
    let r = approx.preperiod;
    let s = approx.period;
    let w = approx.window;
    let q_next = expansion
        .q_at(approx.level as isize + 1)
        .to_u64()
        .ok_or_else(|| Error::construction("next denominator exceeds u64"))?;
    let default_limit = s
        .checked_mul(q_next)
        .ok_or_else(|| Error::construction("default search limit overflows u64"))?;
    let limit = search_limit.unwrap_or(default_limit);
    let start = r + u64::from(w) * s;
    if limit < start {
        return Err(Error::not_found(format!(
            "tail-change search ends at {limit}, before the window end {start}"
        )));
    }
    let letters = word.letters(limit + 1)?;
    let scan = scan_mismatches(&letters, approx.level, r, s, w)?;
    let changes = tail_change_scan(&letters, r, s, w, &scan.firsts, limit, want);
    if changes.is_empty() {
        return Err(Error::not_found(format!(
            "no tail change in [{start}, {limit}]"
        )));
    }
    for ch in &changes {
        let pbar = r + 1 + (ch.position - r - 1) % s;
        if word.letter_at(ch.position)? == word.letter_at(pbar)? {
            return Err(Error::CrossCheck(format!(
                "tail change at {} vanished on letter recomputation",
                ch.position
            )));
        }
    }
    let gap = (changes.len() >= 2).then(|| changes[1].position - changes[0].position);
    let ratio = (changes.len() >= 2)
        .then(|| changes[1].position as f64 / (s as f64 * q_next as f64));
    let log_first = Some((changes[0].position as f64).ln());
    let residual = match gap {
        Some(d) => best_pair_residual(word, d, prec)?,
        None => None,
    };
    Ok(TailChangeRecord {
        level: approx.level,
        window: w,
        preperiod: r,
        period: s,
        search_limit: limit,
        changes,
        gap,
        ratio,
        log_first,
        residual,
    })
}

/// Boundary points as `(a, c)` tags meaning `a*theta + c`, the origin
/// first; `None` when some partition boundary carries no tag.
fn tagged_points(word: &CodingWord) -> Option<Vec<(Rational, Rational)>> {
    let mut points = vec![(Rational::new(), Rational::new())];
    for b in word.partition().bounds() {
        points.push(b.tag()?);
    }
    Some(points)
}

fn best_pair_residual(
    word: &CodingWord,
    gap: u64,
    prec: Prec,
) -> Result<Option<BoundaryPairResidual>> {
    let Some(points) = tagged_points(word) else {
        return Ok(None);
    };
    let oracle = word.oracle();
    let mut best: Option<(usize, usize, BallReal)> = None;
    for (i, (ai, ci)) in points.iter().enumerate() {
        for (j, (aj, cj)) in points.iter().enumerate() {
            let coeff = Rational::from(gap) - Rational::from(aj - ai);
            let offset = Rational::from(cj - ci);
            let d = circle_distance(oracle, &coeff, &offset, prec)?;
            let better = match &best {
                None => true,
                Some((_, _, cur)) => d.hi() < cur.hi(),
            };
            if better {
                best = Some((i, j, d));
            }
        }
    }
    Ok(best.map(|(i, j, d)| BoundaryPairResidual {
        first_boundary: i,
        second_boundary: j,
        residual: d.hi().to_f64(),
    }))
}

/// One member of an orbit family: an index whose letters vary under
/// shifts by the convergent denominator.
#[derive(Clone, Debug)]
pub struct OrbitFamilyMember {
    /// The index `M` in `[1, q_N)`.
    pub position: u64,
    /// Boundary (0 = origin) with the smallest distance upper bound.
    pub nearest_boundary: usize,
    /// Upper bound for that distance.
    pub distance: f64,
    /// Certified: the distance is at most `(w+1) * ||q_N * theta||`.
    pub within_budget: bool,
}

/// Exhaustive scan for indices `M` in `[1, q_N)` whose letters at
/// `M, M + q_N, ..., M + w*q_N` are not all equal, with certified
/// boundary-proximity and cluster-size data.
#[derive(Clone, Debug)]
pub struct OrbitFamilyReport {
    /// Convergent level `N`.
    pub level: usize,
    /// Denominator `q_N`.
    pub q: u64,
    /// Number of shifts `w`.
    pub window: u32,
    /// Members, ascending by position.
    pub members: Vec<OrbitFamilyMember>,
    /// Upper bound for the rotation step `||q_N * theta||`.
    pub step_norm: f64,
    /// Every member sits within `(w+1)` steps of some boundary.
    pub proximity_ok: bool,
    /// Largest number of members landing within half a step of one
    /// boundary after one common shift.
    pub cluster_max: u64,
}

impl OrbitFamilyReport {
    /// Member positions only.
    pub fn positions(&self) -> Vec<u64> {
        self.members.iter().map(|m| m.position).collect()
    }
}

/// Circle distance from the orbit point `frac(m*theta)` to the boundary
/// point with the given index (0 = origin), one escalation pass.
fn boundary_distance(
    word: &CodingWord,
    boundary: usize,
    m: u64,
    prec: Prec,
) -> Result<BallReal> {
    let oracle = word.oracle();
    if boundary == 0 {
        return Ok(nearest_distance(oracle, &Integer::from(m), prec)?.1);
    }
    let bound = &word.partition().bounds()[boundary - 1];
    match bound.tag() {
        Some(_) => orbit_bound_distance(oracle, bound, m, prec),
        None => opaque_distance(oracle, bound, m, prec),
    }
}

/// Distance to an untagged boundary via its value enclosure.
fn opaque_distance(
    oracle: &crate::numerics::theta::ThetaOracle,
    bound: &Bound,
    m: u64,
    prec: Prec,
) -> Result<BallReal> {
    let mut bits = prec.start.max(64);
    loop {
        if let Some(v) = bound.value_ball(oracle, bits)? {
            let theta = oracle.refine(bits)?;
            let x = theta.mul_integer(&Integer::from(m)).sub(&v);
            if let Some((_, dist)) = x.nearest_int_distance() {
                return Ok(dist);
            }
        }
        if bits >= prec.cap {
            return Err(Error::PrecisionExhausted {
                bits,
                context: format!("distance from orbit position {m} to an untagged boundary"),
            });
        }
        bits = bits.saturating_mul(2).min(prec.cap);
    }
}

/// Brute-force orbit-family scan at one level and window.  Requires
/// `(w+1) * q_N` letters; the proximity and cluster verdicts are
/// certified by interval comparisons with precision escalation.
pub fn compute_i_w(
    word: &CodingWord,
    expansion: &CfExpansion,
    level: usize,
    window: u32,
    prec: Prec,
) -> Result<OrbitFamilyReport> {
    let q_int = expansion.q_at(level as isize);
    let q = q_int
        .to_u64()
        .ok_or_else(|| Error::construction("denominator exceeds u64"))?;
    let shifts = u64::from(window);
    let horizon = q
        .checked_mul(shifts + 1)
        .ok_or_else(|| Error::construction("orbit-family horizon overflows u64"))?;
    let letters = word.letters(horizon)?;
    let positions: Vec<u64> = (1..q)
        .filter(|&m| {
            let base = letters[m as usize];
            (1..=shifts).any(|l| letters[(m + l * q) as usize] != base)
        })
        .collect();

    let oracle = word.oracle();
    let n_boundaries = word.partition().len() + 1;
    let mut members = Vec::with_capacity(positions.len());
    let mut proximity_ok = true;
    for &m in &positions {
        let mut bits = prec.start.max(64);
        let member = loop {
            let scaled = Prec::new(bits, prec.cap);
            let step = nearest_distance(oracle, &q_int, scaled)?.1;
            let budget = step.mul_integer(&Integer::from(shifts + 1));
            let cands: Vec<BallReal> = (0..n_boundaries)
                .map(|bi| boundary_distance(word, bi, m, scaled))
                .collect::<Result<_>>()?;
            let (idx, best_hi) = cands
                .iter()
                .enumerate()
                .map(|(i, d)| (i, d.hi()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            if best_hi <= budget.lo() {
                break OrbitFamilyMember {
                    position: m,
                    nearest_boundary: idx,
                    distance: best_hi.to_f64(),
                    within_budget: true,
                };
            }
            if cands.iter().all(|d| d.lo() > budget.hi()) {
                break OrbitFamilyMember {
                    position: m,
                    nearest_boundary: idx,
                    distance: best_hi.to_f64(),
                    within_budget: false,
                };
            }
            if bits >= prec.cap {
                return Err(Error::PrecisionExhausted {
                    bits,
                    context: format!("placing orbit index {m} relative to the boundaries"),
                });
            }
            bits = bits.saturating_mul(2).min(prec.cap);
        };
        proximity_ok &= member.within_budget;
        members.push(member);
    }

    let mut cluster_max = 0u64;
    for l in 0..=shifts {
        for bi in 0..n_boundaries {
            let mut count = 0u64;
            for &m in &positions {
                if within_half_step(word, &q_int, bi, m + l * q, prec)? {
                    count += 1;
                }
            }
            cluster_max = cluster_max.max(count);
        }
    }

    let step_norm = nearest_distance(oracle, &q_int, prec)?.1.hi().to_f64();
    Ok(OrbitFamilyReport {
        level,
        q,
        window,
        members,
        step_norm,
        proximity_ok,
        cluster_max,
    })
}

/// Certified `distance(orbit point, boundary) <= ||q*theta|| / 2`.
fn within_half_step(
    word: &CodingWord,
    q: &Integer,
    boundary: usize,
    m: u64,
    prec: Prec,
) -> Result<bool> {
    let oracle = word.oracle();
    let mut bits = prec.start.max(64);
    loop {
        let scaled = Prec::new(bits, prec.cap);
        let half = nearest_distance(oracle, q, scaled)?
            .1
            .mul_rational(&Rational::from((1u32, 2u32)));
        let d = boundary_distance(word, boundary, m, scaled)?;
        if d.hi() <= half.lo() {
            return Ok(true);
        }
        if d.lo() > half.hi() {
            return Ok(false);
        }
        if bits >= prec.cap {
            return Err(Error::PrecisionExhausted {
                bits,
                context: format!("comparing orbit index {m} against half a rotation step"),
            });
        }
        bits = bits.saturating_mul(2).min(prec.cap);
    }
}

/// One cell of the gap census.
#[derive(Clone, Debug)]
pub struct CensusRow {
    /// Convergent level.
    pub level: usize,
    /// Denominator at that level.
    pub q: u64,
    /// Scan window `w`.
    pub window: u32,
    /// Number of mismatch progressions.
    pub t: u64,
    /// First mismatch per residue class, ascending (the exhaustive
    /// witnesses for the verdict).
    pub firsts: Vec<u64>,
    /// No first hit lands in `[r + eps*w*s, r + w*s]`.
    pub free: bool,
    /// Mismatch set equals the union of the first-hit progressions.
    pub set_equal: bool,
}

/// Census over levels and windows of which tail zones are free of
/// mismatch progressions and which are hit.
#[derive(Clone, Debug)]
pub struct CensusReport {
    /// Zone fraction: the checked zone starts at `r + eps*w*s`.
    pub epsilon: Rational,
    /// `eps = 1` collapses the zone to the single point `r + w*s`,
    /// which no scan position reaches; every row is then vacuously free.
    pub degenerate: bool,
    /// Scanned cells, levels outer and windows inner.
    pub rows: Vec<CensusRow>,
    /// Number of free rows.
    pub free_rows: usize,
    /// Number of hit rows.
    pub hit_rows: usize,
}

impl CensusReport {
    /// At least one scanned zone was free.
    pub fn any_free(&self) -> bool {
        self.free_rows > 0
    }

    /// Every scanned zone was hit, and the census is meaningful.
    pub fn every_hit(&self) -> bool {
        !self.degenerate && !self.rows.is_empty() && self.free_rows == 0
    }
}

/// Runs the mismatch scan for each `(level, window)` cell fitting the
/// letter horizon and classifies the zone `[r + eps*w*s, r + w*s]` as
/// free or hit.  Cells whose scan end `q*(1+w)` reaches the horizon are
/// skipped.  The zone comparison is exact rational arithmetic.
pub fn gap_census(
    word: &CodingWord,
    expansion: &CfExpansion,
    levels: &[usize],
    windows: &[u32],
    epsilon: &Rational,
    horizon: u64,
) -> Result<CensusReport> {
    if *epsilon <= 0u32 || *epsilon > 1u32 {
        return Err(Error::domain(format!(
            "zone fraction must lie in (0, 1], got {epsilon}"
        )));
    }
    let mut cells: Vec<(usize, u64, u32)> = Vec::new();
    for &level in levels {
        let q = expansion
            .q_at(level as isize)
            .to_u64()
            .ok_or_else(|| Error::construction("denominator exceeds u64"))?;
        for &w in windows {
            match q.checked_mul(1 + u64::from(w)) {
                Some(end) if end < horizon => cells.push((level, q, w)),
                _ => {}
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::construction(
            "no census cell fits below the letter horizon",
        ));
    }
    let needed = cells
        .iter()
        .map(|&(_, q, w)| q * (1 + u64::from(w)))
        .max()
        .unwrap();
    let letters = word.letters(needed)?;
    let run = |&(level, q, w): &(usize, u64, u32)| -> Result<CensusRow> {
        let scan = scan_mismatches(&letters, level, q, q, w)?;
        let span = u64::from(w) * q;
        let lo = Rational::from(span) * epsilon + Rational::from(q);
        let hi = q + span;
        let hit = scan
            .firsts
            .iter()
            .any(|&f| f <= hi && f >= lo);
        Ok(CensusRow {
            level,
            q,
            window: w,
            t: scan.t() as u64,
            firsts: scan.firsts,
            free: !hit,
            set_equal: scan.set_equal,
        })
    };
    #[cfg(feature = "parallel")]
    let rows = cells.par_iter().map(run).collect::<Result<Vec<_>>>()?;
    #[cfg(not(feature = "parallel"))]
    let rows = cells.iter().map(run).collect::<Result<Vec<_>>>()?;
    let free_rows = rows.iter().filter(|r| r.free).count();
    let hit_rows = rows.len() - free_rows;
    Ok(CensusReport {
        epsilon: epsilon.clone(),
        degenerate: *epsilon == 1u32,
        rows,
        free_rows,
        hit_rows,
    })
}

/// Sliding statistics over groups of consecutive tail-change positions:
/// for each window of `group_len` changes, the group diameter divided by
/// its last position, and the smallest consecutive-pair gap divided by
/// the same position.
#[derive(Clone, Debug, PartialEq)]
pub struct TailWindowStat {
    /// Index of the first change in the group.
    pub start_index: usize,
    /// `(last - first) / last` over the group.
    pub diameter_ratio: f64,
    /// `min consecutive gap / last` over the group.
    pub min_pair_ratio: f64,
}

/// Computes the sliding group statistics; empty when fewer than
/// `group_len` changes are available or `group_len < 2`.
pub fn tail_window_stats(positions: &[u64], group_len: usize) -> Vec<TailWindowStat> {
    if group_len < 2 || positions.len() < group_len {
        return Vec::new();
    }
    positions
        .windows(group_len)
        .enumerate()
        .map(|(i, grp)| {
            let last = grp[group_len - 1] as f64;
            let diameter = (grp[group_len - 1] - grp[0]) as f64;
            let min_gap = grp
                .windows(2)
                .map(|p| p[1] - p[0])
                .min()
                .unwrap() as f64;
            TailWindowStat {
                start_index: i,
                diameter_ratio: diameter / last,
                min_pair_ratio: min_gap / last,
            }
        })
        .collect()
}
