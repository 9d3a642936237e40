//! Training semantics of the three recognizers, checked against
//! independently assembled single-network runs.

use scripta_core::dataset::{generate_synthetic, template, Corpus, LabeledSample, NoiseSpec};
use scripta_core::extraction::{flatten, PATTERN_LEN};
use scripta_core::models::{
    argmax, one_hot, one_vs_rest_targets, train_correlation, train_direct, train_hierarchical,
    Detail, GroupingScheme, Label, ModelConfig, ModelError, Recognizer,
};
use scripta_core::network::{train, FeedForwardNet, TrainingConfig};
use scripta_core::seed::{derive_seed, stream};

fn bits(net: &FeedForwardNet<f64>) -> Vec<u64> {
    net.hidden()
        .as_slice()
        .iter()
        .chain(net.output().as_slice())
        .map(|w| w.to_bits())
        .collect()
}

fn small_cfg() -> ModelConfig<f64> {
    ModelConfig {
        hidden: 8,
        training: TrainingConfig {
            max_epochs: 5,
            ..TrainingConfig::default()
        },
    }
}

fn noisy(rows: usize) -> Corpus {
    generate_synthetic(
        rows,
        &NoiseSpec {
            flip_prob: 0.03,
            jitter: 1,
            seed: 11,
        },
    )
    .unwrap()
}

fn inputs(samples: &[LabeledSample]) -> Vec<Vec<f64>> {
    samples.iter().map(|s| flatten(&s.block)).collect()
}

#[test]
fn one_vs_rest_targets_mark_only_the_letter() {
    let corpus = noisy(15);
    let (train_set, _) = corpus.split(10, 5).unwrap();
    for label in Label::all() {
        let t: Vec<f64> = one_vs_rest_targets(train_set.samples(), label);
        assert_eq!(t.len(), 260);
        assert_eq!(t.iter().filter(|&&d| d == 1.0).count(), 10);
        assert!(t.iter().all(|&d| d == 0.0 || d == 1.0));
        for (s, d) in train_set.samples().iter().zip(&t) {
            assert_eq!(*d == 1.0, s.label == label);
        }
    }
}

#[test]
fn correlation_nets_match_standalone_training() {
    let corpus = noisy(2);
    let cfg = small_cfg();
    let (model, traces) = train_correlation(corpus.samples(), &cfg).unwrap();
    let x = inputs(corpus.samples());
    for (k, label) in Label::all().enumerate() {
        let targets: Vec<f64> = one_vs_rest_targets(corpus.samples(), label);
        let data: Vec<(&[f64], [f64; 1])> = x
            .iter()
            .map(Vec::as_slice)
            .zip(targets.iter().map(|&d| [d]))
            .collect();
        let seed = derive_seed(cfg.training.seed, stream::CORRELATION + k as u64);
        let net = FeedForwardNet::random(PATTERN_LEN, cfg.hidden, 1, cfg.training.init_range, seed);
        let (expected, trace) = train(net, &data, &cfg.training.with_seed(seed)).unwrap();
        assert_eq!(bits(model.net(label)), bits(&expected), "letter {label}");
        assert_eq!(traces[k], trace);
    }
    // Every letter starts from its own weights.
    let firsts: Vec<u64> = Label::all()
        .map(|l| model.net(l).hidden().as_slice()[0].to_bits())
        .collect();
    let mut dedup = firsts.clone();
    dedup.sort();
    dedup.dedup();
    assert_eq!(dedup.len(), 26);
}

#[test]
fn correlation_scores_are_the_degrees() {
    let corpus = noisy(2);
    let (model, _) = train_correlation(corpus.samples(), &small_cfg()).unwrap();
    for s in corpus.samples() {
        let r = model.recognize(&s.block);
        let degrees: Vec<f64> = Label::all()
            .map(|l| model.net(l).predict(&flatten(&s.block)).unwrap()[0])
            .collect();
        assert_eq!(r.scores, degrees);
        assert_eq!(
            r.detail,
            Detail::Correlation {
                degrees: degrees.clone()
            }
        );
        assert_eq!(r.predicted.index(), argmax(&degrees));
    }
}

#[test]
fn positives_only_training_degenerates_to_a_constant() {
    // With only target-1 examples the net learns to answer 1 for anything;
    // negatives are what make a one-vs-rest detector discriminate.
    let corpus = noisy(4);
    let a = Label::from_letter('A').unwrap();
    let cfg = TrainingConfig {
        max_epochs: 2000,
        ..TrainingConfig::default()
    };
    let x = inputs(corpus.samples());

    let positives: Vec<(&[f64], [f64; 1])> = x
        .iter()
        .zip(corpus.samples())
        .filter(|(_, s)| s.label == a)
        .map(|(x, _)| (x.as_slice(), [1.0]))
        .collect();
    let net = FeedForwardNet::random(PATTERN_LEN, 20, 1, cfg.init_range, 1);
    let (degenerate, trace) = train(net, &positives, &cfg).unwrap();
    assert!(trace.converged);
    let others: Vec<f64> = Label::all()
        .filter(|&l| l != a)
        .map(|l| degenerate.predict(&flatten(template(l))).unwrap()[0])
        .collect();
    // Every other letter is accepted as an A.
    assert!(others.iter().all(|&y| y > 0.8), "{others:?}");
    assert!(others.iter().sum::<f64>() / others.len() as f64 > 0.9);

    let targets: Vec<f64> = one_vs_rest_targets(corpus.samples(), a);
    let balanced: Vec<(&[f64], [f64; 1])> = x
        .iter()
        .map(Vec::as_slice)
        .zip(targets.iter().map(|&d| [d]))
        .collect();
    let net = FeedForwardNet::random(PATTERN_LEN, 20, 1, cfg.init_range, 1);
    let (detector, _) = train(net, &balanced, &cfg).unwrap();
    assert!(detector.predict(&flatten(template(a))).unwrap()[0] > 0.5);
    for l in Label::all().filter(|&l| l != a) {
        assert!(
            detector.predict(&flatten(template(l))).unwrap()[0] < 0.5,
            "{l}"
        );
    }
}

#[test]
fn hierarchical_is_a_two_stage_argmax() {
    let corpus = noisy(3);
    let grouping = GroupingScheme::default();
    let (model, _) = train_hierarchical(corpus.samples(), &grouping, &small_cfg()).unwrap();
    for s in corpus.samples() {
        let x = flatten(&s.block);
        let group_scores = model.group_net().predict(&x).unwrap();
        // Brute force over the 11 group scores with lowest-index ties.
        let mut g = 0;
        for (i, &v) in group_scores.iter().enumerate() {
            if v > group_scores[g] {
                g = i;
            }
        }
        let position_scores = match &model.position_nets()[g] {
            Some(net) => net.predict(&x).unwrap(),
            None => vec![1.0],
        };
        let p = argmax(&position_scores);
        let r = model.recognize(&s.block);
        assert_eq!(r.predicted, grouping.groups()[g][p]);
        assert_eq!(r.scores, position_scores);
        assert_eq!(
            r.detail,
            Detail::Hierarchical {
                group: g,
                group_scores,
                position: p,
                position_scores: r.scores.clone()
            }
        );
        // A wrong group can never be repaired by the second stage.
        assert_eq!(grouping.locate(r.predicted).0, g);
    }
}

#[test]
fn position_nets_see_only_their_group() {
    let corpus = noisy(2);
    let grouping = GroupingScheme::default();
    let cfg = small_cfg();
    let (model, traces) = train_hierarchical(corpus.samples(), &grouping, &cfg).unwrap();
    let x = inputs(corpus.samples());
    for (g, group) in grouping.groups().iter().enumerate() {
        if group.len() == 1 {
            assert!(model.position_nets()[g].is_none() && traces.positions[g].is_none());
            continue;
        }
        let data: Vec<(&[f64], Vec<f64>)> = x
            .iter()
            .zip(corpus.samples())
            .filter_map(|(x, s)| {
                let (sg, p) = grouping.locate(s.label);
                (sg == g).then(|| (x.as_slice(), one_hot(p, group.len())))
            })
            .collect();
        assert_eq!(data.len(), 2 * group.len());
        let seed = derive_seed(cfg.training.seed, stream::POSITION + g as u64);
        let net = FeedForwardNet::random(
            PATTERN_LEN,
            cfg.hidden,
            group.len(),
            cfg.training.init_range,
            seed,
        );
        let (expected, _) = train(net, &data, &cfg.training.with_seed(seed)).unwrap();
        assert_eq!(
            bits(model.position_nets()[g].as_ref().unwrap()),
            bits(&expected),
            "group {}",
            g + 1
        );
    }
}

#[test]
fn missing_group_samples_are_reported() {
    let corpus = noisy(2);
    let without_cdef: Vec<LabeledSample> = corpus
        .samples()
        .iter()
        .filter(|s| !"CDEF".contains(s.label.letter()))
        .cloned()
        .collect();
    let err =
        train_hierarchical(&without_cdef, &GroupingScheme::default(), &small_cfg()).unwrap_err();
    match err {
        ModelError::EmptyGroup { group, letters } => {
            assert_eq!((group, letters.as_str()), (2, "CDEF"))
        }
        other => panic!("unexpected {other}"),
    }

    // A missing singleton letter leaves no position net to train.
    let without_z: Vec<LabeledSample> = corpus
        .samples()
        .iter()
        .filter(|s| s.label.letter() != 'Z')
        .cloned()
        .collect();
    assert!(train_hierarchical(&without_z, &GroupingScheme::default(), &small_cfg()).is_ok());
}

#[test]
fn training_is_independent_of_thread_count() {
    let corpus = noisy(2);
    let cfg = small_cfg();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let (c, _) = train_correlation(corpus.samples(), &cfg).unwrap();
            let (h, _) =
                train_hierarchical(corpus.samples(), &GroupingScheme::default(), &cfg).unwrap();
            (c, h)
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn direct_model_scores_all_letters() {
    let corpus = noisy(2);
    let cfg = small_cfg();
    let (model, trace) = train_direct(corpus.samples(), &cfg).unwrap();
    assert_eq!(trace.epochs_run, 5);
    let seed = derive_seed(cfg.training.seed, stream::DIRECT);
    let x = inputs(corpus.samples());
    let data: Vec<(&[f64], Vec<f64>)> = x
        .iter()
        .map(Vec::as_slice)
        .zip(
            corpus
                .samples()
                .iter()
                .map(|s| one_hot(s.label.index(), 26)),
        )
        .collect();
    let net = FeedForwardNet::random(PATTERN_LEN, cfg.hidden, 26, cfg.training.init_range, seed);
    let (expected, _) = train(net, &data, &cfg.training.with_seed(seed)).unwrap();
    assert_eq!(bits(model.net()), bits(&expected));
    for s in corpus.samples() {
        let r = model.recognize(&s.block);
        assert_eq!(r.scores.len(), 26);
        assert_eq!(r.predicted.index(), argmax(&r.scores));
    }
}
