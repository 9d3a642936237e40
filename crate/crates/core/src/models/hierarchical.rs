use rayon::prelude::*;

use super::{
    argmax, inputs_of, one_hot, warn_missing_labels, Detail, Label, ModelConfig, ModelError,
    ModelKind, RecognitionResult, Recognizer, LABEL_COUNT,
};
use crate::dataset::LabeledSample;
use crate::extraction::{flatten, PatternBlock, PATTERN_LEN};
use crate::network::{train, FeedForwardNet, TrainingTrace};
use crate::scalar::Scalar;
use crate::seed::{derive_seed, stream};

pub const GROUP_COUNT: usize = 11;
pub const DEFAULT_GROUP_SIZES: [usize; GROUP_COUNT] = [2, 4, 3, 4, 2, 3, 1, 3, 1, 2, 1];

/// Ordered partition of A..=Z into [`GROUP_COUNT`] non-empty groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupingScheme {
    groups: Vec<Vec<Label>>,
    /// `(group, position)` of each label index.
    lookup: [(usize, usize); LABEL_COUNT],
}

impl GroupingScheme {
    pub fn new(groups: Vec<Vec<Label>>) -> Result<Self, ModelError> {
        if groups.len() != GROUP_COUNT {
            return Err(ModelError::InvalidGrouping(format!(
                "expected {GROUP_COUNT} groups, got {}",
                groups.len()
            )));
        }
        let mut lookup = [(usize::MAX, usize::MAX); LABEL_COUNT];
        for (g, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(ModelError::InvalidGrouping(format!(
                    "group {} is empty",
                    g + 1
                )));
            }
            for (p, label) in group.iter().enumerate() {
                if lookup[label.index()].0 != usize::MAX {
                    return Err(ModelError::InvalidGrouping(format!(
                        "{label} appears more than once"
                    )));
                }
                lookup[label.index()] = (g, p);
            }
        }
        let missing: String = Label::all()
            .filter(|l| lookup[l.index()].0 == usize::MAX)
            .map(|l| l.letter())
            .collect();
        if !missing.is_empty() {
            return Err(ModelError::InvalidGrouping(format!(
                "letters not assigned to any group: {missing}"
            )));
        }
        Ok(Self { groups, lookup })
    }

    /// Alphabetical letters dealt consecutively into groups of
    /// `[2,4,3,4,2,3,1,3,1,2,1]`: AB, CDEF, GHI, JKLM, NO, PQR, S, TUV, W, XY, Z.
    pub fn default_alphabetical() -> Self {
        let mut labels = Label::all();
        let groups = DEFAULT_GROUP_SIZES
            .iter()
            .map(|&n| labels.by_ref().take(n).collect())
            .collect();
        Self::new(groups).expect("default sizes partition 26 letters")
    }

    /// One group per line, letters separated by commas. Blank lines and
    /// `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut groups = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let group = line
                .split(',')
                .map(|t| {
                    let t = t.trim();
                    let mut chars = t.chars();
                    match (chars.next(), chars.next()) {
                        (Some(c), None) => Label::from_letter(c),
                        _ => Err(ModelError::InvalidGrouping(format!("bad letter {t:?}"))),
                    }
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| ModelError::InvalidGrouping(e.to_string()))?;
            groups.push(group);
        }
        Self::new(groups)
    }

    pub fn to_file_string(&self) -> String {
        self.groups
            .iter()
            .map(|g| {
                g.iter()
                    .map(|l| l.letter().to_string())
                    .collect::<Vec<_>>()
                    .join(",")
                    + "\n"
            })
            .collect()
    }

    pub fn groups(&self) -> &[Vec<Label>] {
        &self.groups
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    /// 0-based `(group, position)` of `label`.
    pub fn locate(&self, label: Label) -> (usize, usize) {
        self.lookup[label.index()]
    }

    pub fn label_at(&self, group: usize, position: usize) -> Label {
        self.groups[group][position]
    }
}

impl Default for GroupingScheme {
    fn default() -> Self {
        Self::default_alphabetical()
    }
}

/// Group recognizer followed by a per-group position recognizer. Singleton
/// groups have no position network.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalModel<T> {
    grouping: GroupingScheme,
    group_net: FeedForwardNet<T>,
    position_nets: Vec<Option<FeedForwardNet<T>>>,
}

impl<T: Scalar> HierarchicalModel<T> {
    pub fn new(
        grouping: GroupingScheme,
        group_net: FeedForwardNet<T>,
        position_nets: Vec<Option<FeedForwardNet<T>>>,
    ) -> Result<Self, ModelError> {
        if group_net.input_size() != PATTERN_LEN || group_net.output_size() != grouping.groups.len()
        {
            return Err(ModelError::Structure(format!(
                "group net must be {PATTERN_LEN}-input with {} outputs",
                grouping.groups.len()
            )));
        }
        if position_nets.len() != grouping.groups.len() {
            return Err(ModelError::Structure(
                "one position slot per group required".into(),
            ));
        }
        for (g, (group, net)) in grouping.groups.iter().zip(&position_nets).enumerate() {
            match (group.len(), net) {
                (1, None) => {}
                (n, Some(net))
                    if n > 1 && net.input_size() == PATTERN_LEN && net.output_size() == n => {}
                _ => {
                    return Err(ModelError::Structure(format!(
                        "position net for group {g} does not fit its size"
                    )))
                }
            }
        }
        Ok(Self {
            grouping,
            group_net,
            position_nets,
        })
    }

    pub fn grouping_scheme(&self) -> &GroupingScheme {
        &self.grouping
    }

    pub fn group_net(&self) -> &FeedForwardNet<T> {
        &self.group_net
    }

    pub fn position_nets(&self) -> &[Option<FeedForwardNet<T>>] {
        &self.position_nets
    }
}

impl<T: Scalar> Recognizer<T> for HierarchicalModel<T> {
    fn kind(&self) -> ModelKind {
        ModelKind::Hierarchical
    }

    fn recognize(&self, block: &PatternBlock) -> RecognitionResult<T> {
        let x = flatten(block);
        let group_scores = self.group_net.predict(&x).expect("pattern-sized input");
        let group = argmax(&group_scores);
        let position_scores = match &self.position_nets[group] {
            Some(net) => net.predict(&x).expect("pattern-sized input"),
            None => vec![T::one()],
        };
        let position = argmax(&position_scores);
        RecognitionResult {
            predicted: self.grouping.label_at(group, position),
            scores: position_scores.clone(),
            detail: Detail::Hierarchical {
                group,
                group_scores,
                position,
                position_scores,
            },
        }
    }

    fn grouping(&self) -> Option<&GroupingScheme> {
        Some(&self.grouping)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalTraces {
    pub group: TrainingTrace,
    /// `None` for singleton groups.
    pub positions: Vec<Option<TrainingTrace>>,
}

/// Trains the group network on one-hot group targets over all samples and
/// each non-singleton group's position network on that group's samples only.
pub fn train_hierarchical<T: Scalar>(
    samples: &[LabeledSample],
    grouping: &GroupingScheme,
    cfg: &ModelConfig<T>,
) -> Result<(HierarchicalModel<T>, HierarchicalTraces), ModelError> {
    cfg.validate()?;
    let inputs = inputs_of::<T>(samples)?;
    warn_missing_labels(samples, "hierarchical model");
    let n_groups = grouping.groups.len();

    for (g, group) in grouping.groups.iter().enumerate() {
        if group.len() > 1 && !samples.iter().any(|s| grouping.locate(s.label).0 == g) {
            return Err(ModelError::EmptyGroup {
                group: g + 1,
                letters: group.iter().map(|l| l.letter()).collect(),
            });
        }
    }

    let train_group = || {
        let data: Vec<(&[T], Vec<T>)> = inputs
            .iter()
            .zip(samples)
            .map(|(x, s)| (x.as_slice(), one_hot(grouping.locate(s.label).0, n_groups)))
            .collect();
        let seed = derive_seed(cfg.training.seed, stream::GROUP);
        let net = FeedForwardNet::random(
            PATTERN_LEN,
            cfg.hidden,
            n_groups,
            cfg.training.init_range,
            seed,
        );
        train(net, &data, &cfg.training.with_seed(seed))
    };

    let train_positions = || {
        (0..n_groups)
            .into_par_iter()
            .map(|g| {
                let size = grouping.groups[g].len();
                if size == 1 {
                    return Ok(None);
                }
                let data: Vec<(&[T], Vec<T>)> = inputs
                    .iter()
                    .zip(samples)
                    .filter_map(|(x, s)| {
                        let (sg, pos) = grouping.locate(s.label);
                        (sg == g).then(|| (x.as_slice(), one_hot(pos, size)))
                    })
                    .collect();
                let seed = derive_seed(cfg.training.seed, stream::POSITION + g as u64);
                let net = FeedForwardNet::random(
                    PATTERN_LEN,
                    cfg.hidden,
                    size,
                    cfg.training.init_range,
                    seed,
                );
                train(net, &data, &cfg.training.with_seed(seed)).map(Some)
            })
            .collect::<Result<Vec<_>, _>>()
    };

    let (group_result, position_result) = rayon::join(train_group, train_positions);
    let (group_net, group_trace) = group_result?;
    let (position_nets, position_traces): (Vec<_>, Vec<_>) = position_result?
        .into_iter()
        .map(|o| match o {
            Some((net, trace)) => (Some(net), Some(trace)),
            None => (None, None),
        })
        .unzip();

    let model = HierarchicalModel::new(grouping.clone(), group_net, position_nets)?;
    Ok((
        model,
        HierarchicalTraces {
            group: group_trace,
            positions: position_traces,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::LayerWeights;

    fn letters(s: &str) -> Vec<Label> {
        s.chars().map(|c| Label::from_letter(c).unwrap()).collect()
    }

    #[test]
    fn default_scheme() {
        let g = GroupingScheme::default();
        assert_eq!(g.sizes(), DEFAULT_GROUP_SIZES.to_vec());
        assert_eq!(g.sizes().iter().sum::<usize>(), 26);
        assert_eq!(g.groups()[1], letters("CDEF"));
        assert_eq!(g.groups()[6], letters("S"));
        assert_eq!(g.groups()[10], letters("Z"));
        // H is group 3 (index 2), position 2 (index 1).
        assert_eq!(g.locate(Label::from_letter('H').unwrap()), (2, 1));
        let group_target: Vec<f64> = one_hot(2, GROUP_COUNT);
        let position_target: Vec<f64> = one_hot(1, 3);
        assert_eq!(group_target[2], 1.0);
        assert_eq!(position_target, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn file_format_round_trip() {
        let g = GroupingScheme::default();
        let text = g.to_file_string();
        assert_eq!(text.lines().count(), 11);
        assert_eq!(text.lines().next(), Some("A,B"));
        assert_eq!(GroupingScheme::parse(&text).unwrap(), g);
        let custom = "O,Q, C\nB,D,P,R\nE,F\nH,K,N,M\nI,J\nA\nG\nL,T\nS,Z\nU,V,W\nX,Y\n";
        let g = GroupingScheme::parse(custom).unwrap();
        assert_eq!(g.locate(Label::from_letter('C').unwrap()), (0, 2));
    }

    #[test]
    fn non_partitions_are_rejected() {
        let mut lines: Vec<String> = GroupingScheme::default()
            .to_file_string()
            .lines()
            .map(String::from)
            .collect();
        let mut dup = lines.clone();
        dup[0] = "A,B,C".into();
        assert!(GroupingScheme::parse(&dup.join("\n")).is_err());
        let mut missing = lines.clone();
        missing[0] = "A".into();
        assert!(GroupingScheme::parse(&missing.join("\n")).is_err());
        lines.pop();
        assert!(GroupingScheme::parse(&lines.join("\n")).is_err());
        assert!(GroupingScheme::parse("AB\n").is_err());
    }

    fn fixed_net(outputs: usize, biases: &[f64]) -> FeedForwardNet<f64> {
        let hidden = LayerWeights::zeros(1, PATTERN_LEN);
        let mut output = LayerWeights::zeros(outputs, 1);
        for (k, &b) in biases.iter().enumerate() {
            output.set(k, 1, b);
        }
        FeedForwardNet::from_layers(hidden, output).unwrap()
    }

    fn model_with(group_biases: &[f64]) -> HierarchicalModel<f64> {
        let grouping = GroupingScheme::default();
        let positions = grouping
            .groups()
            .iter()
            .map(|g| {
                (g.len() > 1).then(|| {
                    // Favor the last position so it is distinguishable from ties.
                    let b: Vec<f64> = (0..g.len()).map(|p| p as f64).collect();
                    fixed_net(g.len(), &b)
                })
            })
            .collect();
        HierarchicalModel::new(grouping, fixed_net(GROUP_COUNT, group_biases), positions).unwrap()
    }

    #[test]
    fn singleton_group_is_forced() {
        let mut b = vec![-1.0; GROUP_COUNT];
        b[6] = 2.0;
        let r = model_with(&b).recognize(&PatternBlock::blank());
        assert_eq!(r.predicted.letter(), 'S');
        assert_eq!(r.scores, vec![1.0]);
        assert!(matches!(
            r.detail,
            Detail::Hierarchical {
                group: 6,
                position: 0,
                ..
            }
        ));
    }

    #[test]
    fn two_stage_decision() {
        let mut b = vec![-1.0; GROUP_COUNT];
        b[3] = 1.0;
        let m = model_with(&b);
        let r = m.recognize(&PatternBlock::blank());
        assert_eq!(r.predicted.letter(), 'M');
        assert_eq!(m.grouping_scheme().locate(r.predicted).0, 3);
    }

    #[test]
    fn structure_is_checked() {
        let grouping = GroupingScheme::default();
        let none: Vec<Option<FeedForwardNet<f64>>> = vec![None; GROUP_COUNT];
        assert!(
            HierarchicalModel::new(grouping.clone(), fixed_net(GROUP_COUNT, &[]), none).is_err()
        );
        assert!(
            HierarchicalModel::new(grouping, fixed_net(10, &[]), vec![None; GROUP_COUNT]).is_err()
        );
    }
}
