//! Model bundles: a directory holding a `manifest` plus one `FFNET v1` file
//! per constituent network.
//!
//! ```text
//! SCRIPTA MODEL v1
//! kind=hierarchical
//! scalar=f64
//! hidden=50
//! eta=0.2
//! ...
//! grouping=A,B;C,D,E,F;...
//! ```
//!
//! Network files: `direct.ffnet`; `letter_A.ffnet` .. `letter_Z.ffnet`; or
//! `group.ffnet` plus `position_NN.ffnet` for each non-singleton group
//! (1-based, two digits).

use std::fs;
use std::path::Path;

use super::{
    CorrelationModel, DirectModel, GroupingScheme, HierarchicalModel, Label, Model, ModelConfig,
    ModelError, ModelKind, LABEL_COUNT,
};
use crate::extraction::PATTERN_LEN;
use crate::network::{save_net, FeedForwardNet, TrainingConfig};
use crate::scalar::Scalar;

const MAGIC: &str = "SCRIPTA MODEL v1";
pub const MANIFEST_FILE: &str = "manifest";

/// Parsed manifest, before the scalar type is fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub kind: ModelKind,
    pub scalar: String,
    pub grouping: Option<GroupingScheme>,
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn require<V: std::str::FromStr>(&self, key: &str) -> Result<V, ModelError> {
        let raw = self
            .get(key)
            .ok_or_else(|| ModelError::Bundle(format!("manifest lacks `{key}`")))?;
        raw.parse()
            .map_err(|_| ModelError::Bundle(format!("bad manifest value {key}={raw}")))
    }

    pub fn config<T: Scalar>(&self) -> Result<ModelConfig<T>, ModelError> {
        let cfg = ModelConfig {
            hidden: self.require("hidden")?,
            training: TrainingConfig {
                eta: self.require("eta")?,
                alpha: self.require("alpha")?,
                mse_threshold: self.require("mse_threshold")?,
                max_epochs: self.require("max_epochs")?,
                seed: self.require("seed")?,
                init_range: self.require("init_range")?,
                shuffle_each_epoch: self.require("shuffle_each_epoch")?,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ModelError + '_ {
    move |source| ModelError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn grouping_to_manifest(g: &GroupingScheme) -> String {
    g.groups()
        .iter()
        .map(|grp| {
            grp.iter()
                .map(|l| l.letter().to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join(";")
}

fn manifest_text<T: Scalar>(model: &Model<T>, cfg: &ModelConfig<T>) -> String {
    let t = &cfg.training;
    let mut lines = vec![
        MAGIC.to_string(),
        format!("kind={}", model_kind(model)),
        format!("scalar={}", T::NAME),
        format!("hidden={}", cfg.hidden),
        format!("eta={}", t.eta),
        format!("alpha={}", t.alpha),
        format!("mse_threshold={}", t.mse_threshold),
        format!("max_epochs={}", t.max_epochs),
        format!("seed={}", t.seed),
        format!("init_range={}", t.init_range),
        format!("shuffle_each_epoch={}", t.shuffle_each_epoch),
    ];
    if let Model::Hierarchical(m) = model {
        lines.push(format!(
            "grouping={}",
            grouping_to_manifest(m.grouping_scheme())
        ));
    }
    lines.join("\n") + "\n"
}

fn model_kind<T>(model: &Model<T>) -> ModelKind {
    match model {
        Model::Direct(_) => ModelKind::Direct,
        Model::Correlation(_) => ModelKind::Correlation,
        Model::Hierarchical(_) => ModelKind::Hierarchical,
    }
}

fn letter_file(label: Label) -> String {
    format!("letter_{}.ffnet", label.letter())
}

fn position_file(group: usize) -> String {
    format!("position_{:02}.ffnet", group + 1)
}

/// Writes `model` into `dir`, creating it if needed. Output depends only on
/// the model and configuration.
pub fn save_bundle<T: Scalar>(
    dir: &Path,
    model: &Model<T>,
    cfg: &ModelConfig<T>,
) -> Result<(), ModelError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let write = |name: &str, text: String| {
        let path = dir.join(name);
        fs::write(&path, text).map_err(io_err(&path))
    };
    write(MANIFEST_FILE, manifest_text(model, cfg))?;
    match model {
        Model::Direct(m) => write("direct.ffnet", save_net(m.net()))?,
        Model::Correlation(m) => {
            for label in Label::all() {
                write(&letter_file(label), save_net(m.net(label)))?;
            }
        }
        Model::Hierarchical(m) => {
            write("group.ffnet", save_net(m.group_net()))?;
            for (g, net) in m.position_nets().iter().enumerate() {
                if let Some(net) = net {
                    write(&position_file(g), save_net(net))?;
                }
            }
        }
    }
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, ModelError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let mut lines = text.lines();
    if lines.next() != Some(MAGIC) {
        return Err(ModelError::Bundle(format!(
            "{} is not a model manifest",
            path.display()
        )));
    }
    let mut entries = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ModelError::Bundle(format!("bad manifest line {line:?}")))?;
        entries.push((k.trim().to_string(), v.trim().to_string()));
    }
    let find = |key: &str| {
        entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.clone())
    };
    let kind: ModelKind = find("kind")
        .ok_or_else(|| ModelError::Bundle("manifest lacks `kind`".into()))?
        .parse()?;
    let scalar =
        find("scalar").ok_or_else(|| ModelError::Bundle("manifest lacks `scalar`".into()))?;
    let grouping = match find("grouping") {
        Some(g) => Some(GroupingScheme::parse(&g.replace(';', "\n"))?),
        None if kind == ModelKind::Hierarchical => {
            return Err(ModelError::Bundle(
                "hierarchical manifest lacks `grouping`".into(),
            ))
        }
        None => None,
    };
    Ok(Manifest {
        kind,
        scalar,
        grouping,
        entries,
    })
}

/// Loads a bundle written with the same scalar type.
pub fn load_bundle<T: Scalar>(dir: &Path) -> Result<(Model<T>, ModelConfig<T>), ModelError> {
    let manifest = read_manifest(dir)?;
    if manifest.scalar != T::NAME {
        return Err(ModelError::Bundle(format!(
            "bundle stores {} weights, requested {}",
            manifest.scalar,
            T::NAME
        )));
    }
    let cfg = manifest.config::<T>()?;
    let load = |name: &str, outputs: usize| -> Result<FeedForwardNet<T>, ModelError> {
        let path = dir.join(name);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        FeedForwardNet::load_expecting(&text, PATTERN_LEN, cfg.hidden, outputs)
            .map_err(|e| ModelError::Bundle(format!("{}: {e}", path.display())))
    };
    let model = match manifest.kind {
        ModelKind::Direct => Model::Direct(DirectModel::new(load("direct.ffnet", LABEL_COUNT)?)?),
        ModelKind::Correlation => {
            let nets = Label::all()
                .map(|l| load(&letter_file(l), 1))
                .collect::<Result<Vec<_>, _>>()?;
            Model::Correlation(CorrelationModel::new(nets)?)
        }
        ModelKind::Hierarchical => {
            let grouping = manifest.grouping.clone().expect("checked in read_manifest");
            let group_net = load("group.ffnet", grouping.groups().len())?;
            let positions = grouping
                .groups()
                .iter()
                .enumerate()
                .map(|(g, grp)| {
                    if grp.len() > 1 {
                        load(&position_file(g), grp.len()).map(Some)
                    } else {
                        Ok(None)
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            Model::Hierarchical(HierarchicalModel::new(grouping, group_net, positions)?)
        }
    };
    Ok((model, cfg))
}
