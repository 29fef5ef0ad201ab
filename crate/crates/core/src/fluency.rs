//! Patch-switch detection and IRT-profile analysis of fluency walks.
//!
//! Under the fluid patch model a switch falls between two consecutive novel
//! words only when they share no category. Items take a positive position
//! counted from patch entry (1, 2, 3, ...) and, when the patch ends in a
//! switch, a negative position counted back from it (-1 is the last word
//! before the switch); boundary items contribute at both. Pooling each
//! item's IRT / walk-mean-IRT ratio by position yields a [`PatchProfile`],
//! and [`matches_human`] applies the threshold clauses that define a match
//! to the human pattern.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus::CategoryMap;
use crate::error::{Error, Result};
use crate::walker::IrtSequence;

/// Positions gated by the "all other positions" clause and reported in
/// profile tables: five from patch entry, three before a switch.
pub const GATED_POSITIONS: [i64; 8] = [1, 2, 3, 4, 5, -1, -2, -3];

/// Threshold clauses for a human-pattern match.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchCriteria {
    /// Minimum IRT ratio at patch entry (position 1).
    pub entry_min: f64,
    /// Stricter entry ratio marking a better match.
    pub entry_strict: f64,
    /// Maximum ratio at position 2 (the post-switch dip).
    pub pos2_max: f64,
    /// Ceiling for every other gated position.
    pub other_max: f64,
    /// Center of the words-produced band.
    pub band_center: f64,
    /// Half-width of the words-produced band.
    pub band_halfwidth: f64,
    /// Minimum pooled items for a position to be judged at all.
    pub min_support: usize,
}

impl Default for MatchCriteria {
    fn default() -> Self {
        MatchCriteria {
            entry_min: 1.1,
            entry_strict: 1.2,
            pos2_max: 0.80,
            other_max: 1.0,
            band_center: 37.0,
            band_halfwidth: 5.0,
            min_support: 10,
        }
    }
}

/// Pooled IRT-to-mean-IRT ratios indexed by signed patch position.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PatchProfile {
    /// Mean of pooled ratio contributions per position.
    pub ratios: BTreeMap<i64, f64>,
    /// Number of pooled items per position.
    pub support: BTreeMap<i64, usize>,
    /// Mean IRT of each contributing walk, in walk order.
    pub mean_irt_per_walk: Vec<f64>,
}

impl PatchProfile {
    pub fn ratio(&self, position: i64) -> Option<f64> {
        self.ratios.get(&position).copied()
    }

    pub fn support_at(&self, position: i64) -> usize {
        self.support.get(&position).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "insufficient")]
    Insufficient,
    #[serde(rename = "no-match")]
    NoMatch,
    #[serde(rename = "match")]
    Match,
    #[serde(rename = "strict-match")]
    StrictMatch,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Insufficient => "insufficient",
            Verdict::NoMatch => "no-match",
            Verdict::Match => "match",
            Verdict::StrictMatch => "strict-match",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Verdict {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "insufficient" => Ok(Verdict::Insufficient),
            "no-match" => Ok(Verdict::NoMatch),
            "match" => Ok(Verdict::Match),
            "strict-match" => Ok(Verdict::StrictMatch),
            other => Err(Error::Validation(format!("unknown verdict `{other}`"))),
        }
    }
}

/// Per-clause outcome backing a [`Verdict`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchReport {
    pub verdict: Verdict,
    pub mean_n: f64,
    pub n_in_band: bool,
    pub entry_ratio: Option<f64>,
    pub entry_ok: bool,
    pub entry_strict_ok: bool,
    pub pos2_ratio: Option<f64>,
    pub pos2_ok: bool,
    pub others_ok: bool,
    /// Gated positions (beyond 1 and 2) whose ratio exceeds the ceiling.
    pub failing_positions: Vec<(i64, f64)>,
}

/// Switch indices under the fluid patch model: `i` (1-based) means the
/// i-th and (i+1)-th words share no category.
pub fn patch_switches(words: &[&str], categories: &CategoryMap) -> Result<Vec<usize>> {
    for w in words {
        if categories.categories(w).is_none() {
            return Err(Error::Uncategorized((*w).to_string()));
        }
    }
    let mut switches = Vec::new();
    for i in 1..words.len() {
        let a = categories.categories(words[i - 1]).expect("checked above");
        let b = categories.categories(words[i]).expect("checked above");
        if a.intersection(b).next().is_none() {
            switches.push(i);
        }
    }
    Ok(switches)
}

/// Signed patch positions for `n_items` items split at `switches`
/// (sorted, 1-based boundaries). Returns (item index, position) pairs; an
/// item inside a patch that precedes a switch carries both its positive
/// and its negative position.
pub fn positions(n_items: usize, switches: &[usize]) -> Vec<(usize, i64)> {
    let mut out = Vec::new();
    if n_items == 0 {
        return out;
    }
    debug_assert!(switches.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(switches.iter().all(|&s| s >= 1 && s < n_items));

    // Patch boundaries: items (1-based) a..=b per patch.
    let mut starts = vec![1usize];
    for &s in switches {
        starts.push(s + 1);
    }
    let mut ends: Vec<usize> = switches.to_vec();
    ends.push(n_items);

    for (patch, (&a, &b)) in starts.iter().zip(&ends).enumerate() {
        let followed_by_switch = patch + 1 < starts.len();
        for item in a..=b {
            out.push((item - 1, (item - a + 1) as i64));
        }
        if followed_by_switch {
            for item in a..=b {
                out.push((item - 1, -((b - item + 1) as i64)));
            }
        }
    }
    out.sort();
    out
}

/// Pools IRT ratios by patch position across walks. Each walk's items are
/// normalized by that walk's own mean IRT; pooling is item-weighted.
/// Walks with no novel words are skipped with a warning.
pub fn profile(traces: &[IrtSequence], categories: &CategoryMap) -> Result<PatchProfile> {
    let mut sums: BTreeMap<i64, f64> = BTreeMap::new();
    let mut support: BTreeMap<i64, usize> = BTreeMap::new();
    let mut means = Vec::new();

    for (walk_idx, seq) in traces.iter().enumerate() {
        let Some(mean) = seq.mean_irt() else {
            log::warn!("walk {walk_idx} produced no novel words; skipping");
            continue;
        };
        let words: Vec<&str> = seq.words().collect();
        let switches = patch_switches(&words, categories)?;
        for (item, pos) in positions(words.len(), &switches) {
            let ratio = seq.items[item].irt as f64 / mean;
            *sums.entry(pos).or_insert(0.0) += ratio;
            *support.entry(pos).or_insert(0) += 1;
        }
        means.push(mean);
    }

    let ratios = sums
        .iter()
        .map(|(&p, &s)| (p, s / support[&p] as f64))
        .collect();
    Ok(PatchProfile {
        ratios,
        support,
        mean_irt_per_walk: means,
    })
}

/// Applies the match clauses: mean words-produced inside the band, entry
/// ratio at least `entry_min` (strict match: `entry_strict`), position-2
/// ratio at most `pos2_max`, and every other gated position with enough
/// support at most `other_max`. Positions 1 and 2 below `min_support`
/// yield [`Verdict::Insufficient`].
pub fn matches_human(
    profile: &PatchProfile,
    n_words: &[usize],
    criteria: &MatchCriteria,
) -> MatchReport {
    let mean_n = if n_words.is_empty() {
        0.0
    } else {
        n_words.iter().sum::<usize>() as f64 / n_words.len() as f64
    };
    let n_in_band = (mean_n - criteria.band_center).abs() <= criteria.band_halfwidth;

    let entry_ratio = profile.ratio(1);
    let pos2_ratio = profile.ratio(2);
    let entry_ok = entry_ratio.is_some_and(|r| r >= criteria.entry_min);
    let entry_strict_ok = entry_ratio.is_some_and(|r| r >= criteria.entry_strict);
    let pos2_ok = pos2_ratio.is_some_and(|r| r <= criteria.pos2_max);

    let mut failing_positions = Vec::new();
    for &pos in GATED_POSITIONS.iter().filter(|&&p| p != 1 && p != 2) {
        if profile.support_at(pos) >= criteria.min_support {
            let ratio = profile.ratio(pos).expect("support implies ratio");
            if ratio > criteria.other_max {
                failing_positions.push((pos, ratio));
            }
        }
    }
    let others_ok = failing_positions.is_empty();

    let sufficient = profile.support_at(1) >= criteria.min_support
        && profile.support_at(2) >= criteria.min_support;
    let verdict = if !sufficient {
        Verdict::Insufficient
    } else if n_in_band && entry_ok && pos2_ok && others_ok {
        if entry_strict_ok {
            Verdict::StrictMatch
        } else {
            Verdict::Match
        }
    } else {
        Verdict::NoMatch
    };

    MatchReport {
        verdict,
        mean_n,
        n_in_band,
        entry_ratio,
        entry_ok,
        entry_strict_ok,
        pos2_ratio,
        pos2_ok,
        others_ok,
        failing_positions,
    }
}

/// `position,ratio,support` rows sorted by position, negatives first.
pub fn write_profile(profile: &PatchProfile) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("position,ratio,support\n");
    for (&pos, &ratio) in &profile.ratios {
        let _ = writeln!(out, "{pos},{ratio:.6},{}", profile.support[&pos]);
    }
    out
}
