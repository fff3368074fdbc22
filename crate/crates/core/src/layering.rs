//! Group assignment from cluster class composition, and the two layer tasks
//! derived from it.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hcluster::FlatClustering;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    /// The instance's cluster holds only majority instances.
    PureMajority,
    /// The instance's cluster holds only minority instances.
    PureMinority,
    /// The instance's cluster holds both classes.
    Mixed,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::PureMajority => "pure_majority",
            Group::PureMinority => "pure_minority",
            Group::Mixed => "mixed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroupCounts {
    pub majority: usize,
    pub minority: usize,
    pub mixed: usize,
}

impl GroupCounts {
    pub fn total(&self) -> usize {
        self.majority + self.minority + self.mixed
    }
}

impl fmt::Display for GroupCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pure majority {}, pure minority {}, mixed {}",
            self.majority, self.minority, self.mixed
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAssignment {
    pub group_of: Vec<Group>,
    pub cluster_of: Vec<usize>,
    pub counts: GroupCounts,
}

/// Labels every instance by the class composition of its cluster.
pub fn assign_groups(labels: &[u8], clustering: &FlatClustering) -> Result<GroupAssignment> {
    if labels.len() != clustering.cluster_of.len() {
        return Err(Error::InvalidInput(format!(
            "{} labels but {} cluster assignments",
            labels.len(),
            clustering.cluster_of.len()
        )));
    }
    // (has majority, has minority) per cluster
    let mut composition = vec![(false, false); clustering.k];
    for (&c, &y) in clustering.cluster_of.iter().zip(labels) {
        if y == 1 {
            composition[c].1 = true;
        } else {
            composition[c].0 = true;
        }
    }
    let mut counts = GroupCounts::default();
    let group_of = clustering
        .cluster_of
        .iter()
        .map(|&c| match composition[c] {
            (true, false) => {
                counts.majority += 1;
                Group::PureMajority
            }
            (false, true) => {
                counts.minority += 1;
                Group::PureMinority
            }
            _ => {
                counts.mixed += 1;
                Group::Mixed
            }
        })
        .collect();
    Ok(GroupAssignment {
        group_of,
        cluster_of: clustering.cluster_of.clone(),
        counts,
    })
}

/// Layer-1 targets: 1 for mixed or pure-minority instances, 0 otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer1Targets {
    pub y_l1: Vec<u8>,
    /// Larger over smaller class count of the layer-1 task (infinite when
    /// the task is single-class).
    pub imbalance_ratio: f64,
}

pub fn derive_layer1_targets(g: &GroupAssignment) -> Layer1Targets {
    let y_l1: Vec<u8> = g
        .group_of
        .iter()
        .map(|grp| u8::from(*grp != Group::PureMajority))
        .collect();
    let ones = y_l1.iter().filter(|&&y| y == 1).count();
    let zeros = y_l1.len() - ones;
    Layer1Targets {
        imbalance_ratio: ones.max(zeros) as f64 / ones.min(zeros) as f64,
        y_l1,
    }
}

/// Layer-2 task: the original labels restricted to the layer-1 positives.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer2Targets {
    pub indices: Vec<usize>,
    pub y_l2: Vec<u8>,
}

pub fn derive_layer2_targets(labels: &[u8], g: &GroupAssignment) -> Layer2Targets {
    let indices: Vec<usize> = g
        .group_of
        .iter()
        .enumerate()
        .filter(|(_, grp)| **grp != Group::PureMajority)
        .map(|(i, _)| i)
        .collect();
    let y_l2 = indices.iter().map(|&i| labels[i]).collect();
    Layer2Targets { indices, y_l2 }
}

/// Both layer tasks of one group assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerTargets {
    pub layer1: Layer1Targets,
    pub layer2: Layer2Targets,
}

impl LayerTargets {
    pub fn derive(labels: &[u8], g: &GroupAssignment) -> Self {
        Self {
            layer1: derive_layer1_targets(g),
            layer2: derive_layer2_targets(labels, g),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DegeneracyKind {
    None,
    /// No pure-minority group; the method works as usual.
    EmptyCmin,
    /// No mixed group: the clustering separates the classes.
    EmptyCmix,
    /// No pure-majority group: layer 1 cannot be defined.
    EmptyCmaj,
}

impl fmt::Display for DegeneracyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DegeneracyKind::None => "none",
            DegeneracyKind::EmptyCmin => "pure minority group empty",
            DegeneracyKind::EmptyCmix => "mixed group empty",
            DegeneracyKind::EmptyCmaj => "pure majority group empty",
        })
    }
}

/// Which group is empty, with priority `EmptyCmaj > EmptyCmix > EmptyCmin`.
pub fn classify_degenerate(g: &GroupAssignment) -> DegeneracyKind {
    let c = g.counts;
    if c.majority == 0 {
        DegeneracyKind::EmptyCmaj
    } else if c.mixed == 0 {
        DegeneracyKind::EmptyCmix
    } else if c.minority == 0 {
        DegeneracyKind::EmptyCmin
    } else {
        DegeneracyKind::None
    }
}

/// Audit export: `index,cluster,group,label`.
pub fn write_groups_csv<W: Write>(g: &GroupAssignment, labels: &[u8], mut w: W) -> Result<()> {
    writeln!(w, "index,cluster,group,label")?;
    for (i, ((grp, c), y)) in g.group_of.iter().zip(&g.cluster_of).zip(labels).enumerate() {
        writeln!(w, "{i},{c},{grp},{y}")?;
    }
    Ok(())
}
