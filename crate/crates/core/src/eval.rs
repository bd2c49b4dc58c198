//! Retrieval-style evaluation of induced rankings: precision at k,
//! average precision per gold-standard list, and their combined mean.

use std::collections::HashSet;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::centrality::ScoreVector;
use crate::graph::InstanceGraph;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold standard is empty")]
    EmptyGold,
    #[error("duplicate gold entry: {0}")]
    DuplicateGoldEntry(String),
    #[error("k = {k} out of range for a ranked list of length {len}")]
    KOutOfRange { k: usize, len: usize },
    #[error("cannot average an empty list of precision values")]
    EmptyCmap,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A total order over scored items: descending score, ties broken by
/// ascending IRI. Scores are non-increasing along the list and no IRI
/// appears twice (callers supply one score per item).
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    entries: Vec<(String, f64)>,
}

impl RankedList {
    /// Sorts `(iri, score)` pairs into rank order, keeping only IRIs in
    /// `restrict_to` when given.
    pub fn from_scores<I>(pairs: I, restrict_to: Option<&HashSet<String>>) -> RankedList
    where
        I: IntoIterator<Item = (String, f64)>,
    {
        let mut entries: Vec<(String, f64)> = match restrict_to {
            Some(keep) => pairs
                .into_iter()
                .filter(|(iri, _)| keep.contains(iri))
                .collect(),
            None => pairs.into_iter().collect(),
        };
        entries.sort_unstable_by(|(a_iri, a_sc), (b_iri, b_sc)| {
            b_sc.total_cmp(a_sc).then_with(|| a_iri.cmp(b_iri))
        });
        RankedList { entries }
    }

    /// Ranks a graph-aligned score vector by node IRI.
    pub fn from_graph_scores(
        graph: &InstanceGraph,
        scores: &ScoreVector,
        restrict_to: Option<&HashSet<String>>,
    ) -> RankedList {
        Self::from_scores(
            graph
                .node_ids()
                .map(|v| (graph.iri(v).to_owned(), scores.scores[v.index()])),
            restrict_to,
        )
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iris(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(iri, _)| iri.as_str())
    }
}

/// An ordered list of relevant IRIs, in published rank order, plus the
/// corresponding set. Non-empty and duplicate-free by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldStandard {
    relevant: Vec<String>,
    relevant_set: HashSet<String>,
}

impl GoldStandard {
    pub fn new(relevant: Vec<String>) -> Result<Self, EvalError> {
        if relevant.is_empty() {
            return Err(EvalError::EmptyGold);
        }
        let mut relevant_set = HashSet::with_capacity(relevant.len());
        for iri in &relevant {
            if !relevant_set.insert(iri.clone()) {
                return Err(EvalError::DuplicateGoldEntry(iri.clone()));
            }
        }
        Ok(GoldStandard {
            relevant,
            relevant_set,
        })
    }

    /// One IRI per line, order is the published rank. Blank lines and `#`
    /// comments are ignored.
    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let relevant: Vec<String> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_owned)
            .collect();
        Self::new(relevant)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, EvalError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn contains(&self, iri: &str) -> bool {
        self.relevant_set.contains(iri)
    }

    pub fn len(&self) -> usize {
        self.relevant.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.relevant.iter().map(String::as_str)
    }
}

/// Fraction of the first `k` ranked items that are relevant.
/// `k` must satisfy `1 <= k <= ranked.len()`.
pub fn precision_at_k(
    ranked: &RankedList,
    gold: &GoldStandard,
    k: usize,
) -> Result<f64, EvalError> {
    if k < 1 || k > ranked.len() {
        return Err(EvalError::KOutOfRange {
            k,
            len: ranked.len(),
        });
    }
    let hits = ranked
        .iris()
        .take(k)
        .filter(|iri| gold.contains(iri))
        .count();
    Ok(hits as f64 / k as f64)
}

/// Mean of the precision values at each relevant position, divided by the
/// total number of relevant documents. Relevant documents missing from
/// the ranked list contribute zero.
pub fn average_precision(ranked: &RankedList, gold: &GoldStandard) -> f64 {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (pos, iri) in ranked.iris().enumerate() {
        if gold.contains(iri) {
            hits += 1;
            sum += hits as f64 / (pos + 1) as f64;
        }
    }
    sum / gold.len() as f64
}

/// Arithmetic mean of average-precision values across gold lists.
pub fn cmap(ap_values: &[f64]) -> Result<f64, EvalError> {
    if ap_values.is_empty() {
        return Err(EvalError::EmptyCmap);
    }
    Ok(ap_values.iter().sum::<f64>() / ap_values.len() as f64)
}

/// Sums externally supplied per-IRI vote counts over the top `k` ranked
/// items; items without a vote entry contribute zero and are counted as
/// missing. `k` must satisfy `1 <= k <= ranked.len()`.
pub fn sum_votes(
    ranked: &RankedList,
    votes: &std::collections::HashMap<String, u64>,
    k: usize,
) -> Result<VoteSum, EvalError> {
    if k < 1 || k > ranked.len() {
        return Err(EvalError::KOutOfRange {
            k,
            len: ranked.len(),
        });
    }
    let mut total = 0u64;
    let mut missing = 0usize;
    for iri in ranked.iris().take(k) {
        match votes.get(iri) {
            Some(v) => total += v,
            None => missing += 1,
        }
    }
    Ok(VoteSum { total, missing })
}

/// Outcome of a top-k vote aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VoteSum {
    pub total: u64,
    /// Ranked items in the window without a vote entry.
    pub missing: usize,
}

/// Number of gold items in the ranked list whose score is shared with at
/// least one other item. Average precision is tie-order-sensitive, so a
/// non-zero count flags rankings whose AP depends on the IRI tie-break.
pub fn boundary_tie_count(ranked: &RankedList, gold: &GoldStandard) -> usize {
    let entries = ranked.entries();
    let mut count = 0;
    for (i, (iri, score)) in entries.iter().enumerate() {
        if !gold.contains(iri) {
            continue;
        }
        let tied_prev = i > 0 && entries[i - 1].1 == *score;
        let tied_next = i + 1 < entries.len() && entries[i + 1].1 == *score;
        if tied_prev || tied_next {
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ranked(pairs: &[(&str, f64)]) -> RankedList {
        RankedList::from_scores(pairs.iter().map(|(iri, s)| (iri.to_string(), *s)), None)
    }

    fn gold(iris: &[&str]) -> GoldStandard {
        GoldStandard::new(iris.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn ranking_sorts_by_score_then_iri() {
        let r = ranked(&[("a", 0.5), ("b", 0.9)]);
        assert_eq!(r.iris().collect::<Vec<_>>(), vec!["b", "a"]);

        let tied = ranked(&[("b", 0.5), ("a", 0.5)]);
        assert_eq!(tied.iris().collect::<Vec<_>>(), vec!["a", "b"]);
    }

    #[test]
    fn ranking_filters_before_sorting() {
        let keep: HashSet<String> = ["b", "c"].iter().map(|s| s.to_string()).collect();
        let r = RankedList::from_scores(
            [
                ("a".to_string(), 1.0),
                ("b".to_string(), 0.2),
                ("c".to_string(), 0.3),
            ],
            Some(&keep),
        );
        assert_eq!(r.iris().collect::<Vec<_>>(), vec!["c", "b"]);
    }

    #[test]
    fn precision_at_k_hand_cases() {
        let r = ranked(&[("a", 3.0), ("x", 2.0), ("b", 1.0)]);
        let g = gold(&["a", "b"]);
        assert_eq!(precision_at_k(&r, &g, 1).unwrap(), 1.0);
        assert!((precision_at_k(&r, &g, 3).unwrap() - 2.0 / 3.0).abs() < 1e-15);

        // the gold list against itself is perfect at every cutoff
        let self_ranked = ranked(&[("a", 2.0), ("b", 1.0)]);
        for k in 1..=2 {
            assert_eq!(precision_at_k(&self_ranked, &g, k).unwrap(), 1.0);
        }
    }

    #[test]
    fn precision_at_k_rejects_out_of_range_k() {
        let r = ranked(&[("a", 1.0)]);
        let g = gold(&["a"]);
        assert!(matches!(
            precision_at_k(&r, &g, 0),
            Err(EvalError::KOutOfRange { k: 0, len: 1 })
        ));
        assert!(matches!(
            precision_at_k(&r, &g, 2),
            Err(EvalError::KOutOfRange { k: 2, len: 1 })
        ));
    }

    #[test]
    fn average_precision_hand_cases() {
        let r = ranked(&[("a", 3.0), ("x", 2.0), ("b", 1.0)]);
        let g = gold(&["a", "b"]);
        assert!((average_precision(&r, &g) - 5.0 / 6.0).abs() < 1e-12);

        let perfect = ranked(&[("a", 2.0), ("b", 1.0)]);
        assert_eq!(average_precision(&perfect, &g), 1.0);

        let disjoint = ranked(&[("x", 2.0), ("y", 1.0)]);
        assert_eq!(average_precision(&disjoint, &g), 0.0);
    }

    #[test]
    fn missing_relevant_documents_contribute_zero() {
        // Only one of three gold entries appears in the ranking.
        let r = ranked(&[("a", 1.0)]);
        let g = gold(&["a", "b", "c"]);
        assert!((average_precision(&r, &g) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn cmap_means_and_errors() {
        assert!((cmap(&[0.424, 0.350, 0.6182]).unwrap() - 0.464).abs() < 0.0005);
        assert!((cmap(&[0.264, 0.0, 0.25]).unwrap() - 0.171).abs() < 0.0005);
        assert_eq!(cmap(&[1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(cmap(&[0.7]).unwrap(), 0.7);
        assert!(matches!(cmap(&[]), Err(EvalError::EmptyCmap)));
    }

    #[test]
    fn gold_standard_rejects_empty_and_duplicates() {
        assert!(matches!(GoldStandard::parse(""), Err(EvalError::EmptyGold)));
        assert!(matches!(
            GoldStandard::parse("a\nb\na\n"),
            Err(EvalError::DuplicateGoldEntry(_))
        ));
        let g = GoldStandard::parse("# top list\nhttp://ex/a\n\nhttp://ex/b\n").unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.contains("http://ex/a"));
    }

    #[test]
    fn sum_votes_over_top_k() {
        let r = ranked(&[("a", 3.0), ("b", 2.0), ("c", 1.0)]);
        let votes: std::collections::HashMap<String, u64> =
            [("a".to_string(), 100u64), ("c".to_string(), 7)]
                .into_iter()
                .collect();
        let top2 = sum_votes(&r, &votes, 2).unwrap();
        assert_eq!(
            top2,
            VoteSum {
                total: 100,
                missing: 1
            }
        );
        let top3 = sum_votes(&r, &votes, 3).unwrap();
        assert_eq!(
            top3,
            VoteSum {
                total: 107,
                missing: 1
            }
        );
        assert!(matches!(
            sum_votes(&r, &votes, 4),
            Err(EvalError::KOutOfRange { k: 4, len: 3 })
        ));
    }

    #[test]
    fn boundary_ties_count_gold_items_only() {
        let r = ranked(&[("a", 1.0), ("b", 0.5), ("c", 0.5), ("d", 0.2)]);
        let g = gold(&["a", "b"]);
        // `b` ties with `c`; `a` is untied.
        assert_eq!(boundary_tie_count(&r, &g), 1);
        assert_eq!(boundary_tie_count(&r, &gold(&["a", "d"])), 0);
    }

    fn ap_brute(entries: &[(&str, f64)], g: &GoldStandard) -> f64 {
        // literal transcription of the defining formulas
        let r = ranked(entries);
        let mut total = 0.0;
        for k in 1..=r.len() {
            let at_k: Vec<&str> = r.iris().take(k).collect();
            let relevant_here = g.contains(at_k[k - 1]);
            let p_k = at_k.iter().filter(|i| g.contains(i)).count() as f64 / k as f64;
            if relevant_here {
                total += p_k;
            }
        }
        total / g.len() as f64
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        // P@k computed by integer counting equals the rational value.
        #[test]
        fn precision_matches_fraction_oracle(
            rel in proptest::collection::vec(any::<bool>(), 1..20),
            k_pick in any::<proptest::sample::Index>(),
        ) {
            let entries: Vec<(String, f64)> = rel
                .iter()
                .enumerate()
                .map(|(i, _)| (format!("d{i:02}"), (rel.len() - i) as f64))
                .collect();
            let gold_items: Vec<String> = rel
                .iter()
                .enumerate()
                .filter(|(_, r)| **r)
                .map(|(i, _)| format!("d{i:02}"))
                .collect();
            prop_assume!(!gold_items.is_empty());
            let g = GoldStandard::new(gold_items).unwrap();
            let r = RankedList::from_scores(entries.clone(), None);
            let k = k_pick.index(rel.len()) + 1;
            let hits = entries[..k].iter().filter(|(iri, _)| g.contains(iri)).count();
            let p = precision_at_k(&r, &g, k).unwrap();
            prop_assert!((p - hits as f64 / k as f64).abs() < 1e-15);
        }

        // Prepending a relevant document (above every current score)
        // never decreases AP.
        #[test]
        fn prepending_relevant_never_decreases_ap(
            rel in proptest::collection::vec(any::<bool>(), 1..16),
        ) {
            let mut items: Vec<(String, f64)> = rel
                .iter()
                .enumerate()
                .map(|(i, _)| (format!("d{i:02}"), (rel.len() - i) as f64))
                .collect();
            let mut gold_items: Vec<String> = rel
                .iter()
                .enumerate()
                .filter(|(_, r)| **r)
                .map(|(i, _)| format!("d{i:02}"))
                .collect();
            gold_items.push("new".to_owned());
            let g = GoldStandard::new(gold_items).unwrap();

            let before = average_precision(&RankedList::from_scores(items.clone(), None), &g);
            items.push(("new".to_owned(), rel.len() as f64 + 1.0));
            let after = average_precision(&RankedList::from_scores(items, None), &g);
            prop_assert!(after >= before - 1e-15);
        }

        // AP ignores the order of items ranked below the last relevant one,
        // and the streaming implementation matches the brute-force formula.
        #[test]
        fn ap_matches_brute_force_and_ignores_tail(
            rel in proptest::collection::vec(any::<bool>(), 2..14),
        ) {
            prop_assume!(rel.iter().any(|r| *r));
            let names: Vec<String> = (0..rel.len()).map(|i| format!("d{i:02}")).collect();
            let entries: Vec<(&str, f64)> = names
                .iter()
                .enumerate()
                .map(|(i, n)| (n.as_str(), (rel.len() - i) as f64))
                .collect();
            let g = GoldStandard::new(
                rel.iter()
                    .enumerate()
                    .filter(|(_, r)| **r)
                    .map(|(i, _)| names[i].clone())
                    .collect(),
            )
            .unwrap();
            let streaming = average_precision(&ranked(&entries), &g);
            prop_assert!((streaming - ap_brute(&entries, &g)).abs() < 1e-12);

            // permute the strictly-below-last-relevant tail
            let last_rel = rel.iter().rposition(|r| *r).unwrap();
            let mut permuted = entries.clone();
            permuted[last_rel + 1..].reverse();
            // keep scores attached to positions, names shuffled below the tail
            let reordered: Vec<(&str, f64)> = permuted
                .iter()
                .enumerate()
                .map(|(i, (n, _))| (*n, (rel.len() - i) as f64))
                .collect();
            let ap2 = average_precision(&ranked(&reordered), &g);
            prop_assert!((streaming - ap2).abs() < 1e-12);
        }
    }
}
