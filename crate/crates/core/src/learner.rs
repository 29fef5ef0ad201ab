//! Incremental probabilistic cross-situational learner.
//!
//! Processes utterance–scene pairs one at a time. For each feature `f` in
//! the scene, the current meaning probabilities distribute one unit of
//! alignment mass across the utterance's words:
//!
//! ```text
//! a(w|f) = P(f|w) / sum_{w' in U} P(f|w')
//! ```
//!
//! and the mass accumulates into `assoc(w, f)`. Meaning probabilities are
//! smoothed relative association mass over a bounded feature space:
//!
//! ```text
//! P(f|w) = (assoc(w,f) + lambda) / (sum_f' assoc(w,f') + beta * lambda)
//! ```
//!
//! Training is single-pass and order-sensitive; two corpora with identical
//! pair order produce bit-identical states.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{Scene, Utterance, VectorTable};

pub const DEFAULT_LAMBDA: f64 = 1e-5;

/// Smoothing and feature-space bound for the learner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerConfig {
    /// Additive smoothing mass per feature cell.
    pub lambda: f64,
    /// Fixed upper bound on feature types; `None` tracks 10x the observed
    /// type count (recomputed lazily, floor of 10).
    pub beta: Option<usize>,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            lambda: DEFAULT_LAMBDA,
            beta: None,
        }
    }
}

/// Accumulated alignment state; one instance per training run.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerState {
    config: LearnerConfig,
    assoc: BTreeMap<String, BTreeMap<String, f64>>,
    totals: BTreeMap<String, f64>,
    seen_features: BTreeSet<String>,
    seen_words: BTreeSet<String>,
}

/// Smoothed meaning distribution P(.|w) for one word.
#[derive(Debug, Clone, PartialEq)]
pub struct MeaningDistribution {
    pub word: String,
    /// P(f|w) for every feature the learner has observed.
    pub probs: BTreeMap<String, f64>,
    /// Features that actually co-occurred with the word (assoc > 0).
    pub support: BTreeSet<String>,
    /// Effective size of the smoothed feature space.
    pub beta: usize,
    /// Probability of each unobserved smoothing cell.
    pub unseen_prob: f64,
}

impl MeaningDistribution {
    /// Probability for any feature, observed or not.
    pub fn prob(&self, feature: &str) -> f64 {
        self.probs.get(feature).copied().unwrap_or(self.unseen_prob)
    }

    /// Highest-probability observed feature, ties broken lexicographically.
    pub fn argmax(&self) -> Option<(&str, f64)> {
        self.probs
            .iter()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(a.0)))
            .map(|(f, p)| (f.as_str(), *p))
    }

    /// Total probability over the beta-cell smoothed space; 1 up to rounding.
    pub fn total_mass(&self) -> f64 {
        let observed: f64 = self.probs.values().sum();
        observed + (self.beta - self.probs.len()) as f64 * self.unseen_prob
    }
}

impl Default for LearnerState {
    fn default() -> Self {
        Self::new(LearnerConfig::default())
    }
}

impl LearnerState {
    pub fn new(config: LearnerConfig) -> Self {
        assert!(config.lambda > 0.0, "lambda must be positive");
        LearnerState {
            config,
            assoc: BTreeMap::new(),
            totals: BTreeMap::new(),
            seen_features: BTreeSet::new(),
            seen_words: BTreeSet::new(),
        }
    }

    /// Effective feature-space bound; never below the observed type count.
    pub fn beta(&self) -> usize {
        let seen = self.seen_features.len();
        match self.config.beta {
            Some(b) => b.max(seen).max(1),
            None => 10 * seen.max(1),
        }
    }

    pub fn lambda(&self) -> f64 {
        self.config.lambda
    }

    pub fn seen_words(&self) -> &BTreeSet<String> {
        &self.seen_words
    }

    pub fn seen_features(&self) -> &BTreeSet<String> {
        &self.seen_features
    }

    pub fn assoc(&self, word: &str, feature: &str) -> f64 {
        self.assoc
            .get(word)
            .and_then(|m| m.get(feature))
            .copied()
            .unwrap_or(0.0)
    }

    fn total(&self, word: &str) -> f64 {
        self.totals.get(word).copied().unwrap_or(0.0)
    }

    /// P(f|w) under the current state.
    pub fn prob(&self, word: &str, feature: &str) -> f64 {
        let lambda = self.config.lambda;
        (self.assoc(word, feature) + lambda) / (self.total(word) + self.beta() as f64 * lambda)
    }

    /// Processes one utterance–scene pair. Alignments are computed from the
    /// state as it stood before this call, then committed together.
    pub fn update(&mut self, utterance: &Utterance, scene: &Scene) {
        let mut adds: Vec<(&str, &str, f64)> = Vec::new();
        for feature in scene.features() {
            let denom: f64 = utterance
                .words()
                .iter()
                .map(|w| self.prob(w, feature))
                .sum();
            for word in utterance.words() {
                adds.push((word, feature, self.prob(word, feature) / denom));
            }
        }
        let adds: Vec<(String, String, f64)> = adds
            .into_iter()
            .map(|(w, f, a)| (w.to_string(), f.to_string(), a))
            .collect();
        for (word, feature, mass) in adds {
            *self
                .assoc
                .entry(word.clone())
                .or_default()
                .entry(feature)
                .or_insert(0.0) += mass;
            *self.totals.entry(word).or_insert(0.0) += mass;
        }
        self.seen_words
            .extend(utterance.words().iter().cloned());
        self.seen_features
            .extend(scene.features().iter().cloned());
    }

    /// The smoothed meaning distribution for `word`; a never-seen word gets
    /// the uniform prior 1/beta on every cell.
    pub fn meaning(&self, word: &str) -> MeaningDistribution {
        let beta = self.beta();
        let lambda = self.config.lambda;
        let denom = self.total(word) + beta as f64 * lambda;
        let empty = BTreeMap::new();
        let word_assoc = self.assoc.get(word).unwrap_or(&empty);
        let probs: BTreeMap<String, f64> = self
            .seen_features
            .iter()
            .map(|f| {
                let mass = word_assoc.get(f).copied().unwrap_or(0.0);
                (f.clone(), (mass + lambda) / denom)
            })
            .collect();
        let support: BTreeSet<String> = word_assoc
            .iter()
            .filter(|(_, m)| **m > 0.0)
            .map(|(f, _)| f.clone())
            .collect();
        MeaningDistribution {
            word: word.to_string(),
            probs,
            support,
            beta,
            unseen_prob: lambda / denom,
        }
    }

    /// P(.|w) rows for every seen word over the sorted observed features.
    pub fn vector_table(&self) -> VectorTable {
        let features: Vec<String> = self.seen_features.iter().cloned().collect();
        let rows: Vec<(String, Vec<f64>)> = self
            .seen_words
            .iter()
            .map(|w| {
                let m = self.meaning(w);
                let vec: Vec<f64> = features.iter().map(|f| m.prob(f)).collect();
                (w.clone(), vec)
            })
            .collect();
        VectorTable::new(features, rows).expect("smoothed probabilities are positive")
    }
}

/// Folds `update` over the corpus in order.
pub fn train(corpus: &[(Utterance, Scene)], config: LearnerConfig) -> LearnerState {
    let mut state = LearnerState::new(config);
    for (utterance, scene) in corpus {
        state.update(utterance, scene);
    }
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic_corpus, write_vectors};

    fn utt(words: &[&str]) -> Utterance {
        Utterance::new(words.iter()).unwrap()
    }

    fn scene(features: &[&str]) -> Scene {
        Scene::new(features.iter()).unwrap()
    }

    #[test]
    fn single_pair_closed_form() {
        let mut state = LearnerState::default();
        state.update(&utt(&["a"]), &scene(&["X"]));
        assert_eq!(state.assoc("a", "X"), 1.0); // forced alignment
        let lambda = DEFAULT_LAMBDA;
        let expect = (1.0 + lambda) / (1.0 + 10.0 * lambda); // beta = 10
        assert!((state.prob("a", "X") - expect).abs() < 1e-15);
        let m = state.meaning("a");
        assert_eq!(m.argmax().unwrap().0, "X");
    }

    #[test]
    fn two_word_symmetry() {
        let mut state = LearnerState::default();
        state.update(&utt(&["a", "b"]), &scene(&["X"]));
        assert_eq!(state.assoc("a", "X"), 0.5);
        assert_eq!(state.assoc("b", "X"), 0.5);
    }

    #[test]
    fn never_seen_word_gets_uniform_prior() {
        let state = LearnerState::default();
        let m = state.meaning("ghost");
        assert_eq!(m.beta, 10);
        assert!((m.prob("anything") - 0.1).abs() < 1e-15);
        assert!(m.support.is_empty());

        let mut state = LearnerState::default();
        state.update(&utt(&["a"]), &scene(&["X", "Y"]));
        let m = state.meaning("ghost");
        assert_eq!(m.beta, 20);
        assert!((m.prob("X") - 1.0 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn meaning_is_proper_distribution() {
        let mut state = LearnerState::default();
        state.update(&utt(&["a", "b"]), &scene(&["X", "Y", "Z"]));
        state.update(&utt(&["b", "c"]), &scene(&["Y", "W"]));
        for w in ["a", "b", "c", "ghost"] {
            let m = state.meaning(w);
            assert!(
                (m.total_mass() - 1.0).abs() < 1e-9,
                "mass for {w}: {}",
                m.total_mass()
            );
            for p in m.probs.values() {
                assert!(*p > 0.0 && *p <= 1.0);
            }
        }
    }

    // Contextual-feature ordering fixture. River occurs alone with
    // BODY-OF-WATER before the joint exposures, so crocodile's alignment
    // mass concentrates on REPTILE while BODY-OF-WATER stays above any
    // never-co-occurring feature. Expected values frozen from an
    // independent run of the recurrence.
    #[test]
    fn contextual_feature_ordering() {
        let mut state = LearnerState::default();
        for _ in 0..20 {
            state.update(&utt(&["river"]), &scene(&["BODY-OF-WATER"]));
        }
        for _ in 0..20 {
            state.update(
                &utt(&["crocodile", "river"]),
                &scene(&["REPTILE", "BODY-OF-WATER"]),
            );
        }
        let p_reptile = state.prob("crocodile", "REPTILE");
        let p_water = state.prob("crocodile", "BODY-OF-WATER");
        let p_never = state.prob("crocodile", "MOON");
        assert!((p_reptile - 0.939952908670).abs() < 1e-9, "{p_reptile}");
        assert!((p_water - 0.060038631750).abs() < 1e-9, "{p_water}");
        assert!((p_never - 0.000000469977).abs() < 1e-12, "{p_never}");
        assert!(p_reptile > p_water && p_water > p_never);
    }

    // With the joint pairs first and river-only pairs after, nothing ever
    // distinguishes the two features from crocodile's side: later pairs
    // that omit crocodile cannot change its associations.
    #[test]
    fn trailing_solo_pairs_leave_equality() {
        let mut state = LearnerState::default();
        for _ in 0..20 {
            state.update(
                &utt(&["crocodile", "river"]),
                &scene(&["REPTILE", "BODY-OF-WATER"]),
            );
        }
        for _ in 0..20 {
            state.update(&utt(&["river"]), &scene(&["BODY-OF-WATER"]));
        }
        assert_eq!(
            state.prob("crocodile", "REPTILE"),
            state.prob("crocodile", "BODY-OF-WATER")
        );
    }

    #[test]
    fn update_conserves_alignment_mass() {
        let mut state = LearnerState::default();
        state.update(&utt(&["a", "b"]), &scene(&["X", "Y"]));
        state.update(&utt(&["b", "c", "d"]), &scene(&["X"]));

        let before: f64 = ["a", "b", "c", "d"].iter().map(|w| state.total(w)).sum();
        let u = utt(&["a", "c"]);
        let s = scene(&["X", "Y", "Z"]);
        state.update(&u, &s);
        let after: f64 = ["a", "b", "c", "d"].iter().map(|w| state.total(w)).sum();
        // One unit of mass per scene feature, split across the utterance.
        assert!((after - before - s.features().len() as f64).abs() < 1e-12);
    }

    #[test]
    fn train_folds_in_order() {
        let c1 = vec![(utt(&["a", "b"]), scene(&["X"]))];
        let c2 = vec![(utt(&["b"]), scene(&["X", "Y"])), (utt(&["a"]), scene(&["Y"]))];
        let whole: Vec<_> = c1.iter().chain(c2.iter()).cloned().collect();
        let full = train(&whole, LearnerConfig::default());

        let mut staged = train(&c1, LearnerConfig::default());
        for (u, s) in &c2 {
            staged.update(u, s);
        }
        assert_eq!(full, staged);

        let empty = train(&[], LearnerConfig::default());
        assert_eq!(empty, LearnerState::default());
    }

    #[test]
    fn deterministic_serialization() {
        let (corpus, _, _) = generate_synthetic_corpus(2, 3, 100, 3, 11).unwrap();
        let a = write_vectors(&train(&corpus, LearnerConfig::default()).vector_table());
        let b = write_vectors(&train(&corpus, LearnerConfig::default()).vector_table());
        assert_eq!(a, b);
    }

    // Naive reference implementation: no caching, probabilities recomputed
    // from scratch maps. Guards the incremental bookkeeping.
    #[test]
    fn matches_naive_reference() {
        use std::collections::HashMap;

        fn ref_prob(
            assoc: &HashMap<(String, String), f64>,
            seen: &BTreeSet<String>,
            lambda: f64,
            w: &str,
            f: &str,
        ) -> f64 {
            let beta = 10 * seen.len().max(1);
            let total: f64 = seen
                .iter()
                .map(|g| assoc.get(&(w.to_string(), g.clone())).copied().unwrap_or(0.0))
                .sum();
            (assoc.get(&(w.to_string(), f.to_string())).copied().unwrap_or(0.0) + lambda)
                / (total + beta as f64 * lambda)
        }

        let corpus = vec![
            (utt(&["a", "b"]), scene(&["X", "Y"])),
            (utt(&["b", "c"]), scene(&["Y", "Z"])),
            (utt(&["a"]), scene(&["X"])),
            (utt(&["c", "a", "b"]), scene(&["Z", "X", "W"])),
            (utt(&["b"]), scene(&["W"])),
        ];

        let lambda = DEFAULT_LAMBDA;
        let mut assoc: HashMap<(String, String), f64> = HashMap::new();
        let mut seen: BTreeSet<String> = BTreeSet::new();
        for (u, s) in &corpus {
            let mut adds: Vec<((String, String), f64)> = Vec::new();
            for f in s.features() {
                let denom: f64 = u.words().iter().map(|w| ref_prob(&assoc, &seen, lambda, w, f)).sum();
                for w in u.words() {
                    adds.push((
                        (w.clone(), f.clone()),
                        ref_prob(&assoc, &seen, lambda, w, f) / denom,
                    ));
                }
            }
            for (k, v) in adds {
                *assoc.entry(k).or_insert(0.0) += v;
            }
            seen.extend(s.features().iter().cloned());
        }

        let state = train(&corpus, LearnerConfig::default());
        for w in ["a", "b", "c"] {
            for f in ["X", "Y", "Z", "W"] {
                let got = state.prob(w, f);
                let want = ref_prob(&assoc, &seen, lambda, w, f);
                assert!((got - want).abs() < 1e-12, "P({f}|{w}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn synthetic_argmax_hits_gold_features() {
        let (corpus, lexicon, _) = generate_synthetic_corpus(3, 3, 2000, 4, 7).unwrap();
        let state = train(&corpus, LearnerConfig::default());
        let mut hits = 0usize;
        let mut total = 0usize;
        for word in lexicon.words() {
            if !state.seen_words().contains(word) {
                continue;
            }
            total += 1;
            let m = state.meaning(word);
            let (top, _) = m.argmax().unwrap();
            if lexicon.features(word).unwrap().contains(top) {
                hits += 1;
            }
        }
        assert!(total > 0);
        let frac = hits as f64 / total as f64;
        assert!(frac >= 0.9, "argmax accuracy {frac:.3} ({hits}/{total})");
    }
}
