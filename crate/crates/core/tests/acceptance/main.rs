//! Acceptance gate for the re-ranking pipeline.
//!
//! Eight end-to-end criteria, one test each. Every test prints a single
//! `acceptance N (<name>): PASS` or `... FAIL [...]` line (visible with
//! `cargo test -- --nocapture`) and fails the build when its criterion does
//! not hold. The reference arithmetic lives in [`oracle`], written separately
//! from the library on purpose.

mod oracle;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use talkgraph_core::io::{
    case_to_json, export_graph, graph_to_adjacency_json, graph_to_dot, import_graph_json,
    load_case, write_case, GraphFormat,
};
use talkgraph_core::metrics::{accuracy_report, Side};
use talkgraph_core::rerank::normalize_conversation;
use talkgraph_core::{
    enumerate_and_select, generate_case, process_case, topology_drift, Case, CandidateScore,
    Combination, Config, Conversation, ConversationDecision, InteractionGraph, SpeakerId,
    SynthSpec, Utterance,
};

fn report(criterion: u32, name: &str, result: Result<String, String>) {
    match result {
        Ok(detail) => println!("acceptance {criterion} ({name}): PASS [{detail}]"),
        Err(why) => {
            println!("acceptance {criterion} ({name}): FAIL [{why}]");
            panic!("acceptance {criterion} ({name}): {why}");
        }
    }
}

fn sid(name: &str) -> SpeakerId {
    SpeakerId::new(name).expect("test speaker id")
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

// ---------------------------------------------------------------------------
// 1. Oracle equivalence: with pruning disabled, `enumerate_and_select` agrees
//    with the brute-force reference on 500 random conversations.
// ---------------------------------------------------------------------------

fn run_oracle_equivalence() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0001);
    let pool: Vec<String> = (0..8).map(|i| format!("P{i}")).collect();
    let lambdas = [0.0, 0.2, 1.0];
    let mut max_rel_err = 0.0f64;

    for i in 0..500 {
        let n_slots = rng.random_range(1..=4);
        let mut utterances = Vec::with_capacity(n_slots);
        let mut slot_raws: Vec<Vec<(String, f64)>> = Vec::with_capacity(n_slots);
        for slot in 0..n_slots {
            let n_cands = rng.random_range(2..=6);
            let mut names: Vec<String> = index::sample(&mut rng, pool.len(), n_cands)
                .iter()
                .map(|p| pool[p].clone())
                .collect();
            names.sort();
            let raws: Vec<(String, f64)> = names
                .into_iter()
                .map(|name| (name, rng.random_range(-5.0..5.0)))
                .collect();
            utterances.push(Utterance {
                utterance_id: format!("u{slot}"),
                candidates: raws
                    .iter()
                    .map(|(name, raw)| CandidateScore::new(sid(name), *raw))
                    .collect(),
                truth: None,
            });
            slot_raws.push(raws);
        }

        // Every fifth conversation runs against an empty graph to cover the
        // E = 0 branch.
        let mut edges = Vec::new();
        let mut ref_graph = oracle::RefGraph::new();
        if i % 5 != 0 {
            for a in 0..pool.len() {
                for b in a + 1..pool.len() {
                    if rng.random_bool(0.3) {
                        let weight = rng.random_range(1..=6);
                        edges.push((sid(&pool[a]), sid(&pool[b]), weight));
                        ref_graph.add_edge(&pool[a], &pool[b], weight);
                    }
                }
            }
        }
        let graph = InteractionGraph::from_weighted_edges(edges)
            .map_err(|e| format!("conversation {i}: {e}"))?;

        let lambda = lambdas[i % lambdas.len()];
        let config = Config {
            lambda,
            top_k: 6,
            rel_threshold: 0.0,
            allow_repeat_speakers: true,
            max_combinations: 2_000_000,
        };
        let conversation = Conversation {
            conversation_id: format!("c{i}"),
            index: 0,
            utterances,
        };
        let normalized =
            normalize_conversation(&conversation).map_err(|e| format!("conversation {i}: {e}"))?;
        let decision = enumerate_and_select(&normalized, &graph.snapshot(), &config)
            .map_err(|e| format!("conversation {i}: {e}"))?;

        let oracle_cands: Vec<Vec<(String, f64)>> = slot_raws
            .iter()
            .map(|raws| {
                let values: Vec<f64> = raws.iter().map(|(_, raw)| *raw).collect();
                raws.iter()
                    .map(|(name, _)| name.clone())
                    .zip(oracle::min_max(&values))
                    .collect()
            })
            .collect();
        let (expected, expected_score) = oracle::best_assignment(&oracle_cands, &ref_graph, lambda);

        let got: Vec<&str> = decision
            .reranked
            .assignment
            .iter()
            .map(SpeakerId::as_str)
            .collect();
        let want: Vec<&str> = expected.iter().map(String::as_str).collect();
        if got != want {
            return Err(format!(
                "conversation {i}: library chose {got:?}, oracle chose {want:?}"
            ));
        }
        let denom = decision
            .reranked
            .score
            .abs()
            .max(expected_score.abs())
            .max(f64::MIN_POSITIVE);
        let rel_err = (decision.reranked.score - expected_score).abs() / denom;
        max_rel_err = max_rel_err.max(rel_err);
        if rel_err > 1e-12 {
            return Err(format!(
                "conversation {i}: score {} vs oracle {expected_score} (rel err {rel_err:.3e})",
                decision.reranked.score
            ));
        }
    }

    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(10) {
        return Err(format!("took {elapsed:.2?}, budget is 10s"));
    }
    Ok(format!(
        "500 conversations, max rel err {max_rel_err:.2e}, {elapsed:.2?}"
    ))
}

#[test]
fn acceptance_1_oracle_equivalence() {
    report(1, "oracle equivalence", run_oracle_equivalence());
}

// ---------------------------------------------------------------------------
// 2. Empty-graph reduction: with no history the re-ranked assignment is the
//    per-slot acoustic argmax, i.e. exactly the baseline.
// ---------------------------------------------------------------------------

fn run_empty_graph_reduction() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0002);
    let n_cases = 120;
    for i in 0..n_cases {
        let n_enrolled = rng.random_range(4..=9);
        let enrolled: Vec<String> = (0..n_enrolled).map(|k| format!("E{k}")).collect();
        let n_slots = rng.random_range(1..=4);
        let utterances = (0..n_slots)
            .map(|slot| Utterance {
                utterance_id: format!("u{slot}"),
                candidates: enrolled
                    .iter()
                    .map(|name| CandidateScore::new(sid(name), rng.random_range(-4.0..4.0)))
                    .collect(),
                truth: None,
            })
            .collect();
        let case = Case::new(
            format!("case-{i}"),
            enrolled.iter().map(|name| sid(name)).collect(),
            vec![Conversation {
                conversation_id: "c0".to_string(),
                index: 0,
                utterances,
            }],
        );
        let outcome =
            process_case(&case, &Config::default()).map_err(|e| format!("case {i}: {e}"))?;
        let decision = &outcome.decisions[0];
        if decision.reranked.assignment != decision.baseline.assignment {
            return Err(format!(
                "case {i}: re-ranked {:?} differs from baseline {:?} on an empty graph",
                decision.reranked.assignment, decision.baseline.assignment
            ));
        }
    }
    Ok(format!(
        "{n_cases} single-conversation cases, re-ranked == baseline in all"
    ))
}

#[test]
fn acceptance_2_empty_graph_reduction() {
    report(2, "empty-graph reduction", run_empty_graph_reduction());
}

// ---------------------------------------------------------------------------
// 3. Centrality normalization: degree centralities sum to 2 (each edge is
//    incident to two endpoints) on any graph with positive total weight.
// ---------------------------------------------------------------------------

fn run_centrality_normalization() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0003);
    let n_graphs = 100;
    let mut max_dev = 0.0f64;
    for i in 0..n_graphs {
        let n = rng.random_range(3..=12);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(0.4) {
                    edges.push((sid(&format!("N{a}")), sid(&format!("N{b}")), rng.random_range(1..=9)));
                }
            }
        }
        if edges.is_empty() {
            edges.push((sid("N0"), sid("N1"), 1));
        }
        let graph =
            InteractionGraph::from_weighted_edges(edges).map_err(|e| format!("graph {i}: {e}"))?;
        let sum: f64 = graph
            .nodes()
            .map(|node| graph.degree_centrality(node))
            .sum();
        let dev = (sum - 2.0).abs();
        max_dev = max_dev.max(dev);
        if dev > 1e-9 {
            return Err(format!("graph {i}: centralities sum to {sum}, not 2"));
        }
    }
    Ok(format!("{n_graphs} graphs, max |sum - 2| = {max_dev:.2e}"))
}

#[test]
fn acceptance_3_centrality_normalization() {
    report(3, "centrality normalization", run_centrality_normalization());
}

// ---------------------------------------------------------------------------
// 4. Scale invariance: an affine transform raw -> a*raw + b (a > 0) per
//    conversation never changes a selected combination.
// ---------------------------------------------------------------------------

fn run_scale_invariance() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0004);
    let n_cases = 100;
    let pool: Vec<String> = (0..6).map(|i| format!("Q{i}")).collect();
    for i in 0..n_cases {
        let n_conversations = rng.random_range(3..=5);
        let mut conversations = Vec::with_capacity(n_conversations);
        for c in 0..n_conversations {
            let n_slots = rng.random_range(2..=4);
            let utterances = (0..n_slots)
                .map(|slot| Utterance {
                    utterance_id: format!("u{slot}"),
                    candidates: pool
                        .iter()
                        .map(|name| CandidateScore::new(sid(name), rng.random_range(-3.0..3.0)))
                        .collect(),
                    truth: None,
                })
                .collect();
            conversations.push(Conversation {
                conversation_id: format!("c{c}"),
                index: 0,
                utterances,
            });
        }
        let case = Case::new(
            format!("case-{i}"),
            pool.iter().map(|name| sid(name)).collect(),
            conversations,
        );

        let transformed_conversations = case
            .conversations
            .iter()
            .map(|conversation| {
                let alpha = rng.random_range(-2.0f64..2.0).exp();
                let beta = rng.random_range(-10.0..10.0);
                Conversation {
                    conversation_id: conversation.conversation_id.clone(),
                    index: 0,
                    utterances: conversation
                        .utterances
                        .iter()
                        .map(|utterance| Utterance {
                            utterance_id: utterance.utterance_id.clone(),
                            candidates: utterance
                                .candidates
                                .iter()
                                .map(|cand| {
                                    CandidateScore::new(
                                        cand.speaker.clone(),
                                        alpha * cand.raw_score + beta,
                                    )
                                })
                                .collect(),
                            truth: utterance.truth.clone(),
                        })
                        .collect(),
                }
            })
            .collect();
        let transformed = Case::new(
            case.case_id.clone(),
            case.enrolled.clone(),
            transformed_conversations,
        );

        let config = Config::default();
        let original =
            process_case(&case, &config).map_err(|e| format!("case {i} (original): {e}"))?;
        let rescaled = process_case(&transformed, &config)
            .map_err(|e| format!("case {i} (rescaled): {e}"))?;
        for (a, b) in original.decisions.iter().zip(&rescaled.decisions) {
            if a.reranked.assignment != b.reranked.assignment
                || a.baseline.assignment != b.baseline.assignment
            {
                return Err(format!(
                    "case {i} {}: selection changed under affine rescaling",
                    a.conversation_id
                ));
            }
        }
    }
    Ok(format!(
        "{n_cases} cases, selections identical under per-conversation a*raw + b"
    ))
}

#[test]
fn acceptance_4_scale_invariance() {
    report(4, "scale invariance", run_scale_invariance());
}

// ---------------------------------------------------------------------------
// 5 & 6. The Monte-Carlo experiment: community-structured synthetic cases at
// an operating point where the baseline lands in the 85-92% band. History
// only helps once enough conversations have accumulated and only when it can
// overrule near-ties rather than clear acoustic wins, hence the long case and
// the tight pruning in the experiment config.
// ---------------------------------------------------------------------------

const EXPERIMENT_SEEDS: std::ops::RangeInclusive<u64> = 1..=100;

fn experiment_spec(seed: u64) -> SynthSpec {
    SynthSpec {
        n_conversations: 150,
        seed,
        ..SynthSpec::default()
    }
}

fn experiment_config() -> Config {
    Config {
        lambda: 1.0,
        top_k: 5,
        rel_threshold: 0.8,
        allow_repeat_speakers: false,
        max_combinations: 100_000,
    }
}

struct ExperimentOutcome {
    baseline_speaker: Vec<f64>,
    reranked_speaker: Vec<f64>,
    baseline_conversation: Vec<f64>,
    reranked_conversation: Vec<f64>,
}

fn run_experiment(drifted: bool) -> Result<ExperimentOutcome, String> {
    let config = experiment_config();
    let mut outcome = ExperimentOutcome {
        baseline_speaker: Vec::new(),
        reranked_speaker: Vec::new(),
        baseline_conversation: Vec::new(),
        reranked_conversation: Vec::new(),
    };
    for seed in EXPERIMENT_SEEDS {
        let mut spec = experiment_spec(seed);
        if drifted {
            // Merge the four groups pairwise halfway through the case.
            spec = topology_drift(&spec, spec.n_conversations / 2, &[0, 0, 1, 1])
                .map_err(|e| format!("seed {seed}: {e}"))?;
        }
        let case = generate_case(&spec).map_err(|e| format!("seed {seed}: {e}"))?;
        let decisions = process_case(&case, &config)
            .map_err(|e| format!("seed {seed}: {e}"))?
            .decisions;
        let baseline = accuracy_report(&decisions, &case, Side::Baseline)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let reranked = accuracy_report(&decisions, &case, Side::Reranked)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        outcome.baseline_speaker.push(baseline.speaker_accuracy);
        outcome.reranked_speaker.push(reranked.speaker_accuracy);
        outcome
            .baseline_conversation
            .push(baseline.conversation_accuracy);
        outcome
            .reranked_conversation
            .push(reranked.conversation_accuracy);
    }
    Ok(outcome)
}

fn paired_sign_test(baseline: &[f64], reranked: &[f64]) -> f64 {
    let wins = baseline
        .iter()
        .zip(reranked)
        .filter(|(b, r)| r > b)
        .count() as u64;
    let losses = baseline
        .iter()
        .zip(reranked)
        .filter(|(b, r)| r < b)
        .count() as u64;
    oracle::sign_test_p(wins, losses)
}

fn run_direction_of_effect() -> Result<String, String> {
    let start = Instant::now();
    let outcome = run_experiment(false)?;
    let elapsed = start.elapsed();

    let base_spk = mean(&outcome.baseline_speaker);
    let rr_spk = mean(&outcome.reranked_speaker);
    let base_conv = mean(&outcome.baseline_conversation);
    let rr_conv = mean(&outcome.reranked_conversation);

    if !(0.85..=0.92).contains(&base_spk) {
        return Err(format!(
            "baseline speaker accuracy {base_spk:.4} is outside the tuned 85-92% band"
        ));
    }
    if rr_spk <= base_spk {
        return Err(format!(
            "mean speaker accuracy did not improve: {base_spk:.4} -> {rr_spk:.4}"
        ));
    }
    if rr_conv <= base_conv {
        return Err(format!(
            "mean conversation accuracy did not improve: {base_conv:.4} -> {rr_conv:.4}"
        ));
    }
    let p_spk = paired_sign_test(&outcome.baseline_speaker, &outcome.reranked_speaker);
    let p_conv = paired_sign_test(
        &outcome.baseline_conversation,
        &outcome.reranked_conversation,
    );
    if p_spk >= 0.05 {
        return Err(format!("speaker-accuracy sign test p = {p_spk:.3e} >= 0.05"));
    }
    if p_conv >= 0.05 {
        return Err(format!(
            "conversation-accuracy sign test p = {p_conv:.3e} >= 0.05"
        ));
    }
    if elapsed >= Duration::from_secs(120) {
        return Err(format!("took {elapsed:.2?}, budget is 120s"));
    }
    Ok(format!(
        "speaker {:.2}% -> {:.2}% (p = {p_spk:.1e}), conversation {:.2}% -> {:.2}% (p = {p_conv:.1e}), 100 seeds in {elapsed:.2?}",
        100.0 * base_spk,
        100.0 * rr_spk,
        100.0 * base_conv,
        100.0 * rr_conv
    ))
}

#[test]
fn acceptance_5_direction_of_effect() {
    report(5, "direction of effect", run_direction_of_effect());
}

fn run_topology_drift_degradation() -> Result<String, String> {
    let control = run_experiment(false)?;
    let drifted = run_experiment(true)?;

    let control_spk_gap = mean(&control.reranked_speaker) - mean(&control.baseline_speaker);
    let drifted_spk_gap = mean(&drifted.reranked_speaker) - mean(&drifted.baseline_speaker);
    let control_conv_gap =
        mean(&control.reranked_conversation) - mean(&control.baseline_conversation);
    let drifted_conv_gap =
        mean(&drifted.reranked_conversation) - mean(&drifted.baseline_conversation);

    if drifted_spk_gap >= control_spk_gap {
        return Err(format!(
            "speaker-accuracy gap did not shrink under drift: control {control_spk_gap:+.4}, drifted {drifted_spk_gap:+.4}"
        ));
    }
    if drifted_conv_gap >= control_conv_gap {
        return Err(format!(
            "conversation-accuracy gap did not shrink under drift: control {control_conv_gap:+.4}, drifted {drifted_conv_gap:+.4}"
        ));
    }
    Ok(format!(
        "speaker gap {:+.2}pp -> {:+.2}pp, conversation gap {:+.2}pp -> {:+.2}pp under a mid-case group merge",
        100.0 * control_spk_gap,
        100.0 * drifted_spk_gap,
        100.0 * control_conv_gap,
        100.0 * drifted_conv_gap
    ))
}

#[test]
fn acceptance_6_topology_drift_degradation() {
    report(6, "topology-drift degradation", run_topology_drift_degradation());
}

// ---------------------------------------------------------------------------
// 7. Metric fixtures: hand-built cases with hand-tallied accuracies, compared
//    exactly.
// ---------------------------------------------------------------------------

fn labeled_utterance(slot: usize, truth: &str) -> Utterance {
    // Candidates are irrelevant to the metrics; give every slot the same
    // plausible slate.
    let slate = [("A", 1.0), ("B", 0.5), ("C", 0.2), ("D", 0.1), ("E", 0.0), ("F", -0.5)];
    Utterance {
        utterance_id: format!("u{slot}"),
        candidates: slate
            .iter()
            .map(|(name, raw)| CandidateScore::new(sid(name), *raw))
            .collect(),
        truth: Some(sid(truth)),
    }
}

fn labeled_conversation(id: &str, truths: &[&str]) -> Conversation {
    Conversation {
        conversation_id: id.to_string(),
        index: 0,
        utterances: truths
            .iter()
            .enumerate()
            .map(|(slot, truth)| labeled_utterance(slot, truth))
            .collect(),
    }
}

fn fixed_decision(id: &str, predicted: &[&str]) -> ConversationDecision {
    let combination = Combination {
        assignment: predicted.iter().map(|name| sid(name)).collect(),
        distinct: predicted.iter().map(|name| sid(name)).collect(),
        score: 0.0,
    };
    ConversationDecision {
        conversation_id: id.to_string(),
        baseline: combination.clone(),
        reranked: combination,
        n_combinations_scored: 0,
        pruned: false,
    }
}

fn run_metric_fixtures() -> Result<String, String> {
    let enrolled: BTreeSet<SpeakerId> = ["A", "B", "C", "D", "E", "F"]
        .iter()
        .map(|name| sid(name))
        .collect();

    // Two conversations, the second with one wrong slot: conversation
    // accuracy 1/2, speaker accuracy 3/4.
    let half_case = Case::new(
        "half",
        enrolled.clone(),
        vec![
            labeled_conversation("c0", &["A", "B"]),
            labeled_conversation("c1", &["A", "C"]),
        ],
    );
    let half_decisions = [
        fixed_decision("c0", &["A", "B"]),
        fixed_decision("c1", &["A", "B"]), // slot 1 wrong: B instead of C
    ];
    let half = accuracy_report(&half_decisions, &half_case, Side::Reranked)
        .map_err(|e| e.to_string())?;
    if half.conversation_accuracy != 0.5 {
        return Err(format!(
            "two-conversation fixture: conversation accuracy {} != 0.5",
            half.conversation_accuracy
        ));
    }
    if half.speaker_accuracy != 0.75 {
        return Err(format!(
            "two-conversation fixture: speaker accuracy {} != 3/4",
            half.speaker_accuracy
        ));
    }

    // Ten slots across three conversations, one wrong: speaker accuracy
    // 9/10, conversation accuracy 2/3.
    let truths: [(&str, Vec<&str>); 3] = [
        ("c0", vec!["A", "B", "C", "D"]),
        ("c1", vec!["A", "C", "E"]),
        ("c2", vec!["B", "D", "F"]),
    ];
    let predictions: [(&str, Vec<&str>); 3] = [
        ("c0", vec!["A", "B", "C", "D"]),
        ("c1", vec!["A", "C", "B"]), // slot 2 wrong: B instead of E
        ("c2", vec!["B", "D", "F"]),
    ];
    let nine_case = Case::new(
        "nine-of-ten",
        enrolled,
        truths
            .iter()
            .map(|(id, slots)| labeled_conversation(id, slots))
            .collect(),
    );
    let nine_decisions: Vec<ConversationDecision> = predictions
        .iter()
        .map(|(id, slots)| fixed_decision(id, slots))
        .collect();

    // Tally the expectation by hand from the literals above, then compare
    // exactly.
    let mut slots = 0usize;
    let mut correct = 0usize;
    let mut conversations_correct = 0usize;
    for ((_, truth), (_, predicted)) in truths.iter().zip(&predictions) {
        let hits = truth
            .iter()
            .zip(predicted)
            .filter(|(t, p)| t == p)
            .count();
        slots += truth.len();
        correct += hits;
        conversations_correct += usize::from(hits == truth.len());
    }
    let expected_speaker = correct as f64 / slots as f64;
    let expected_conversation = conversations_correct as f64 / truths.len() as f64;

    let nine = accuracy_report(&nine_decisions, &nine_case, Side::Reranked)
        .map_err(|e| e.to_string())?;
    if nine.speaker_accuracy != expected_speaker {
        return Err(format!(
            "nine-of-ten fixture: speaker accuracy {} != {expected_speaker}",
            nine.speaker_accuracy
        ));
    }
    if nine.conversation_accuracy != expected_conversation {
        return Err(format!(
            "nine-of-ten fixture: conversation accuracy {} != {expected_conversation}",
            nine.conversation_accuracy
        ));
    }
    Ok(format!(
        "conversation accuracy 0.5 exact; speaker accuracy {correct}/{slots} and conversation accuracy {conversations_correct}/{} exact",
        truths.len()
    ))
}

#[test]
fn acceptance_7_metric_fixtures() {
    report(7, "metric fixtures", run_metric_fixtures());
}

// ---------------------------------------------------------------------------
// 8. Round-trips: manifests and graph exports reload to identical values and
//    re-serialize to identical bytes.
// ---------------------------------------------------------------------------

fn run_round_trips() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;

    // Manifest: a synthetic case exercises long float fractions and labels.
    let spec = SynthSpec {
        n_conversations: 12,
        seed: 7,
        ..SynthSpec::default()
    };
    let case = generate_case(&spec).map_err(|e| e.to_string())?;
    let manifest_path = dir.path().join("case.json");
    write_case(&case, &manifest_path).map_err(|e| e.to_string())?;
    let reloaded = load_case(&manifest_path).map_err(|e| e.to_string())?;
    if reloaded != case {
        return Err("manifest round-trip changed the case".to_string());
    }
    if case_to_json(&case) != case_to_json(&reloaded) {
        return Err("manifest serialization is not byte-stable".to_string());
    }

    // Graph: weighted edges plus an isolated node.
    let mut graph = InteractionGraph::from_weighted_edges(vec![
        (sid("A"), sid("B"), 2),
        (sid("A"), sid("C"), 5),
        (sid("B"), sid("C"), 1),
    ])
    .map_err(|e| e.to_string())?;
    graph.add_node(&sid("D"));
    let graph_path = dir.path().join("graph.json");
    export_graph(&graph, GraphFormat::AdjacencyJson, &graph_path).map_err(|e| e.to_string())?;
    let imported = import_graph_json(&graph_path).map_err(|e| e.to_string())?;
    let nodes = |g: &InteractionGraph| -> Vec<SpeakerId> { g.nodes().cloned().collect() };
    let edges = |g: &InteractionGraph| -> Vec<(SpeakerId, SpeakerId, u64)> {
        g.edges()
            .map(|(a, b, w)| (a.clone(), b.clone(), w))
            .collect()
    };
    if nodes(&imported) != nodes(&graph) || edges(&imported) != edges(&graph) {
        return Err("graph round-trip changed nodes or edges".to_string());
    }
    if graph_to_adjacency_json(&imported) != graph_to_adjacency_json(&graph) {
        return Err("adjacency export is not byte-stable".to_string());
    }
    if graph_to_dot(&imported) != graph_to_dot(&graph) {
        return Err("dot export is not byte-stable".to_string());
    }
    Ok(format!(
        "manifest ({} conversations) and graph ({} nodes, {} edges) round-trip byte-stable",
        case.conversations.len(),
        graph.n_nodes(),
        graph.n_edges()
    ))
}

#[test]
fn acceptance_8_round_trips() {
    report(8, "round-trips", run_round_trips());
}
