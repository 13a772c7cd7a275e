mod common;

use common::fixture;
use interview_sim::agents::{stock, PromptSet};
use interview_sim::analysis::discourse::DiscourseLabel;
use interview_sim::analysis::{classify_discourse, discourse_distribution, pearson, DiscourseRole, Exchange};
use serde::Deserialize;

#[derive(Deserialize)]
struct GoldenQuestion {
    context: Vec<Exchange>,
    question: String,
    role: DiscourseRole,
}

fn jsonl<T: for<'de> Deserialize<'de>>(rel: &str) -> Vec<T> {
    std::fs::read_to_string(fixture(rel))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn heuristic_labeler_matches_fifty_hand_labels() {
    let rows: Vec<GoldenQuestion> = jsonl("analysis/discourse_50.jsonl");
    assert_eq!(rows.len(), 50);
    let judge = stock::build("heuristic-discourse", 0).unwrap();
    let prompts = PromptSet::bundled();
    let misses: Vec<String> = rows
        .iter()
        .filter_map(|r| {
            let got = classify_discourse(&r.question, &r.context, &judge, &prompts).unwrap();
            (got != r.role).then(|| format!("{:?}: want {:?}, got {:?}", r.question, r.role, got))
        })
        .collect();
    assert!(misses.is_empty(), "{}", misses.join("\n"));
    for role in DiscourseRole::ALL {
        assert!(rows.iter().any(|r| r.role == role), "{role:?} not covered");
    }
}

#[test]
fn forty_label_distribution_matches_hand_count() {
    use DiscourseRole::*;
    let labels: Vec<DiscourseLabel> = jsonl("analysis/discourse_40.jsonl");
    assert_eq!(labels.len(), 40);
    let pairs: Vec<(f64, DiscourseRole)> = labels.iter().map(|l| (l.position(), l.role)).collect();
    let dist = discourse_distribution(&pairs, 10).unwrap();

    // Counted by hand from the fixture, bin by bin.
    let counts = [1, 4, 4, 5, 4, 4, 5, 4, 4, 5];
    let quarter = |a, b, c, d| vec![(a, 0.25), (b, 0.25), (c, 0.25), (d, 0.25)];
    let fifths = |a, b, c, heavy| vec![(a, 0.2), (b, 0.2), (c, 0.2), (heavy, 0.4)];
    let expected: Vec<Vec<(DiscourseRole, f64)>> = vec![
        vec![(TopicTransition, 1.0)],
        quarter(FollowUp, Acknowledgement, TopicTransition, Verification),
        quarter(FollowUp, Acknowledgement, TopicTransition, Verification),
        fifths(FollowUp, Acknowledgement, TopicTransition, Verification),
        quarter(FollowUp, Acknowledgement, TopicTransition, Verification),
        quarter(FollowUp, Acknowledgement, TopicTransition, Verification),
        fifths(FollowUp, Acknowledgement, TopicTransition, Broadening),
        quarter(FollowUp, Acknowledgement, TopicTransition, Broadening),
        quarter(FollowUp, Acknowledgement, TopicTransition, Broadening),
        fifths(FollowUp, Acknowledgement, TopicTransition, Broadening),
    ];
    for (k, bin) in dist.bins.iter().enumerate() {
        assert_eq!(bin.count, counts[k], "bin {k}");
        assert_eq!(bin.proportions.len(), expected[k].len(), "bin {k}");
        for (role, share) in &expected[k] {
            let got = bin.proportions.get(role).copied().unwrap_or(-1.0);
            assert!((got - share).abs() < 1e-12, "bin {k} {role:?}: {got} vs {share}");
        }
    }
}

/// Two-sided p for Student's t with 3 degrees of freedom, closed form.
fn p_t3(t: f64) -> f64 {
    let th = (t.abs() / 3f64.sqrt()).atan();
    let cdf = 0.5 + (th + th.sin() * th.cos()) / std::f64::consts::PI;
    2.0 * (1.0 - cdf)
}

#[test]
fn pearson_closed_form_fixtures() {
    // r = 6 / sqrt(60), t = 3 / sqrt(2) on 3 degrees of freedom.
    let c = pearson(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 4.0, 5.0, 4.0, 5.0]).unwrap();
    assert!((c.r - 6.0 / 60f64.sqrt()).abs() < 1e-12);
    assert!((c.p - p_t3(3.0 / 2f64.sqrt())).abs() < 1e-9, "{}", c.p);

    // With 2 degrees of freedom the two-sided p is exactly 1 - |r|.
    let c = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
    assert!((c.r - 0.8).abs() < 1e-12);
    assert!((c.p - 0.2).abs() < 1e-9, "{}", c.p);

    let c = pearson(&[1.0, 2.0, 3.0, 4.0], &[4.0, 3.0, 2.0, 1.0]).unwrap();
    assert!((c.r + 1.0).abs() < 1e-12);
    assert!(c.p < 1e-9);
}
