//! Trains the three recognizers on a noisy synthetic corpus and prints their
//! test accuracy.
//!
//! cargo run --release -p scripta-core --example compare_models [noise-seed]

use scripta_core::dataset::{generate_synthetic, NoiseSpec};
use scripta_core::models::{
    train_correlation, train_direct, train_hierarchical, GroupingScheme, ModelConfig,
};
use scripta_core::reporting::evaluate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(7);
    let corpus = generate_synthetic(
        15,
        &NoiseSpec {
            flip_prob: 0.02,
            jitter: 1,
            seed,
        },
    )?;
    let (train_set, test_set) = corpus.split(10, 5)?;
    let cfg = ModelConfig::<f64>::default();

    let (direct, t) = train_direct(train_set.samples(), &cfg)?;
    println!(
        "direct        epochs {:>5}  test accuracy {:.4}",
        t.epochs_run,
        evaluate(&direct, &test_set)?.overall_accuracy
    );

    let (correlation, ts) = train_correlation(train_set.samples(), &cfg)?;
    let epochs = ts.iter().map(|t| t.epochs_run).max().unwrap_or(0);
    println!(
        "correlation   epochs {epochs:>5}  test accuracy {:.4}",
        evaluate(&correlation, &test_set)?.overall_accuracy
    );

    let (hierarchical, ts) =
        train_hierarchical(train_set.samples(), &GroupingScheme::default(), &cfg)?;
    let report = evaluate(&hierarchical, &test_set)?;
    println!(
        "hierarchical  epochs {:>5}  test accuracy {:.4}  group accuracy {:.4}",
        ts.group.epochs_run,
        report.overall_accuracy,
        report.group_accuracy.unwrap_or(0.0)
    );
    Ok(())
}
