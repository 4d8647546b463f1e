//! Runs the full pipeline on a generated corpus and prints the MAP table.

use expertrank::pipeline::{cmd_pipeline, PipelineConfig};
use expertrank::synth::{generate, write_dataset, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| "synthetic-run".into());
    let data = generate(&SyntheticSpec::default())?;
    let (corpus, experts) = write_dataset(&data, &dir)?;
    let mut cfg = PipelineConfig::default();
    cfg.input.corpus = corpus;
    cfg.input.experts = experts;
    cfg.input.fields = data.experts.iter().map(|l| l.field.clone()).collect();
    cfg.model.k = vec![2, 3, 5, 8];
    cfg.model.rho = vec![0.01, 0.02];
    cfg.model.gamma = vec![0.0, 0.2, 0.4, 0.6];
    cfg.run.cache_dir = dir.join("cache");
    cfg.run.out_dir = dir.join("out");
    let out = cmd_pipeline(&cfg)?;
    print!("{}", out.report.to_markdown()?);
    for f in &out.fields {
        println!(
            "{}: U={} chosen={:?} trace={:?} train_ap20={:?}",
            f.field,
            f.candidates.len(),
            f.chosen,
            f.trace,
            f.train_ap20
        );
    }
    Ok(())
}
