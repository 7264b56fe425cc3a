//! End-to-end runs through the public API.

use glassbox::classifiers::{BinaryClassifierConfig, ClassifierKind};
use glassbox::corpus::{Corpus, Document, MbtiType, Source, TraitLabel};
use glassbox::experiments::{preset, run, write_outcome, RunOptions, RunOutcome};
use glassbox::features::PipelineConfig;
use glassbox::multilabel::BinaryRelevanceModel;
use glassbox::textprep::{ensure_preprocessed, PrepConfig};

fn corpus(per_type: usize) -> Corpus {
    let mut docs = Vec::new();
    for t in MbtiType::all() {
        for i in 0..per_type {
            let mut words: Vec<String> = TraitLabel::ALL
                .iter()
                .map(|&l| format!("kw{}q", t.letter(l).to_ascii_lowercase()))
                .collect();
            words.extend((0..5).map(|j| format!("zq{}x", (i * 7 + j * 3) % 23)));
            // raw text goes through the full normalizer
            let text = format!("{} :) http://example.com 42 The", words.join(", "));
            docs.push(Document::new(
                format!("{}-{i}", t.code()),
                t,
                text,
                Source::Reddit,
            ));
        }
    }
    Corpus::new(docs).unwrap()
}

fn report_json(outcome: &RunOutcome) -> String {
    serde_json::to_string(&outcome.completed().unwrap().report).unwrap()
}

#[test]
fn worker_count_does_not_change_results() {
    let spec = preset("step6-full", ClassifierKind::Logreg).unwrap();
    let one = run(
        &spec,
        corpus(6),
        &RunOptions {
            workers: Some(1),
            explain_top: None,
        },
    )
    .unwrap();
    let four = run(
        &spec,
        corpus(6),
        &RunOptions {
            workers: Some(4),
            explain_top: None,
        },
    )
    .unwrap();
    assert_eq!(report_json(&one), report_json(&four));
}

#[test]
fn seed_changes_folds_but_not_shape() {
    let mut spec = preset("step2", ClassifierKind::Knn).unwrap();
    spec.classifier.k = 3;
    let a = run(&spec, corpus(5), &RunOptions::default()).unwrap();
    spec.cv.seed = 7;
    let b = run(&spec, corpus(5), &RunOptions::default()).unwrap();
    let (ra, rb) = (
        &a.completed().unwrap().report,
        &b.completed().unwrap().report,
    );
    assert_eq!((ra.seed, rb.seed), (42, 7));
    assert_eq!(ra.folds.len(), rb.folds.len());
}

#[test]
fn results_layout() {
    let dir = tempfile::tempdir().unwrap();
    let spec = preset("step4", ClassifierKind::Mnb).unwrap();
    let outcome = run(&spec, corpus(4), &RunOptions::default()).unwrap();
    let path = write_outcome(&outcome, dir.path()).unwrap();
    assert_eq!(path, dir.path().join("step4-mnb"));
    for f in ["spec.json", "report.json", "report.md", "classwise.json"] {
        assert!(path.join(f).is_file(), "{f}");
    }
    // N/S is dropped, so three explanation files
    let n = std::fs::read_dir(path.join("explain")).unwrap().count();
    assert_eq!(n, 3);
    let md = std::fs::read_to_string(path.join("report.md")).unwrap();
    assert!(md.contains("| Exact Match Ratio |"));
    assert!(!md.contains("N/S"));
}

#[test]
fn failed_run_layout() {
    let dir = tempfile::tempdir().unwrap();
    let spec = preset("step3", ClassifierKind::Logreg).unwrap();
    let outcome = run(&spec, corpus(3), &RunOptions::default()).unwrap();
    assert!(matches!(outcome, RunOutcome::Failed(_)));
    let path = write_outcome(&outcome, dir.path()).unwrap();
    assert!(path.join("failure.json").is_file());
    assert!(!path.join("report.json").exists());
}

#[test]
fn bundle_round_trip_predicts_identically() {
    let dir = tempfile::tempdir().unwrap();
    let train = ensure_preprocessed(corpus(4), &PrepConfig::default());
    let mut pipeline = PipelineConfig::default();
    pipeline.selection.k_best = Some(6);
    for kind in [
        ClassifierKind::Mnb,
        ClassifierKind::Knn,
        ClassifierKind::Logreg,
    ] {
        let model = BinaryRelevanceModel::fit_corpus(
            &train,
            &pipeline,
            &BinaryClassifierConfig::of_kind(kind),
        )
        .unwrap();
        let sub = dir.path().join(kind.to_string());
        model.save(&sub, &train.fingerprint()).unwrap();
        let (loaded, manifest) = BinaryRelevanceModel::load(&sub).unwrap();
        assert_eq!(manifest.corpus_fingerprint, train.fingerprint());
        assert_eq!(
            model.predict_corpus(&train).unwrap(),
            loaded.predict_corpus(&train).unwrap()
        );
    }
}

#[test]
fn leaky_prefit_runs() {
    let mut spec = preset("step6-full", ClassifierKind::Mnb).unwrap();
    spec.compat.leaky_prefit = true;
    let outcome = run(&spec, corpus(4), &RunOptions::default()).unwrap();
    assert!(outcome.completed().unwrap().report.mean.exact_match > 0.5);
}
