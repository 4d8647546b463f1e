use std::fs;
use std::path::Path;

use expertrank::pipeline::{cmd_pipeline, cmd_report, PipelineConfig};
use expertrank::synth::{generate, write_dataset, SyntheticSpec};
use expertrank::topics::ModelKind;

fn config(dir: &Path, kind: ModelKind) -> PipelineConfig {
    let spec = SyntheticSpec {
        documents: 240,
        authors: 90,
        experts_per_field: 6,
        ..SyntheticSpec::default()
    };
    let data = generate(&spec).unwrap();
    let (corpus, experts) = write_dataset(&data, dir).unwrap();
    let mut cfg = PipelineConfig::default();
    cfg.input.corpus = corpus;
    cfg.input.experts = experts;
    cfg.input.fields = data.experts.iter().map(|l| l.field.clone()).collect();
    cfg.model.kind = kind;
    cfg.model.k = vec![3];
    cfg.model.rho = vec![0.02];
    cfg.model.gamma = vec![0.0, 0.3];
    cfg.cascade.reps = 30;
    cfg.cascade.seeds = 20;
    cfg.run.cache_dir = dir.join("cache");
    cfg.run.out_dir = dir.join("out");
    cfg
}

fn cache_files(dir: &Path, stage: &str) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with(&format!("{stage}-")))
        .collect();
    names.sort();
    names
}

#[test]
fn lda_run_reports_bounded_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), ModelKind::Lda);
    let out = cmd_pipeline(&cfg).unwrap();
    assert_eq!(out.report.model, "lda");
    assert_eq!(out.fields.len(), 3);
    for (_, row) in out.report.map_table().unwrap() {
        assert!(row.iter().all(|v| (0.0..=1.0).contains(v)), "{row:?}");
    }
    for f in &out.fields {
        assert!(f.split.train.is_disjoint(&f.split.test));
        assert_eq!(f.rankings.len(), 8);
        assert!(!f.chosen.is_empty());
    }
    let rendered = cmd_report(std::slice::from_ref(&cfg.run.out_dir)).unwrap();
    assert_eq!(
        rendered.markdown,
        fs::read_to_string(cfg.run.out_dir.join("report.md")).unwrap()
    );
}

#[test]
fn cache_reuse_and_invalidation() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), ModelKind::Lsi);
    let cache = cfg.run.cache_dir.clone();
    let first = cmd_pipeline(&cfg).unwrap();
    let stages = ["corpus", "select", "model", "field"];
    let before: Vec<Vec<String>> = stages.iter().map(|s| cache_files(&cache, s)).collect();
    assert_eq!(before[3].len(), 3);

    // Same inputs: nothing new is computed and the result is unchanged.
    let again = cmd_pipeline(&cfg).unwrap();
    assert_eq!(again.report, first.report);
    let after: Vec<Vec<String>> = stages.iter().map(|s| cache_files(&cache, s)).collect();
    assert_eq!(after, before);

    // A cascade parameter only affects the per-field stage.
    cfg.cascade.p = 0.2;
    cmd_pipeline(&cfg).unwrap();
    let changed: Vec<Vec<String>> = stages.iter().map(|s| cache_files(&cache, s)).collect();
    assert_eq!(changed[..3], before[..3]);
    assert_eq!(changed[3].len(), 6);

    // The grid affects selection and everything after it.
    cfg.model.k = vec![4];
    cmd_pipeline(&cfg).unwrap();
    assert_eq!(cache_files(&cache, "corpus"), before[0]);
    assert_eq!(cache_files(&cache, "select").len(), 2);
    assert_eq!(cache_files(&cache, "model").len(), 2);
}

#[test]
fn empty_field_list_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), ModelKind::Lsi);
    cfg.input.fields.clear();
    assert!(cmd_pipeline(&cfg).is_err());
}
