//! Control-flow change patterns over block-structured models.
//!
//! | kind                     | category           |
//! |--------------------------|--------------------|
//! | `serial_insert`          | insertion          |
//! | `conditional_insert`     | insertion          |
//! | `parallel_insert`        | insertion          |
//! | `remove_fragment`        | insertion          |
//! | `swap_fragments`         | resequentialization|
//! | `sequentialize_parallel` | resequentialization|
//! | `parallelize_sequence`   | resequentialization|
//! | `loop_fragment`          | optionalization    |
//! | `skip_fragment`          | optionalization    |

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::model::{base_model, Node, ProcessModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    SerialInsert,
    ConditionalInsert,
    ParallelInsert,
    RemoveFragment,
    SwapFragments,
    LoopFragment,
    SkipFragment,
    SequentializeParallel,
    ParallelizeSequence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Category {
    Insertion,
    Resequentialization,
    Optionalization,
}

impl PatternKind {
    pub const ALL: [PatternKind; 9] = [
        PatternKind::SerialInsert,
        PatternKind::ConditionalInsert,
        PatternKind::ParallelInsert,
        PatternKind::RemoveFragment,
        PatternKind::SwapFragments,
        PatternKind::LoopFragment,
        PatternKind::SkipFragment,
        PatternKind::SequentializeParallel,
        PatternKind::ParallelizeSequence,
    ];

    pub fn category(self) -> Category {
        use PatternKind::*;
        match self {
            SerialInsert | ConditionalInsert | ParallelInsert | RemoveFragment => Category::Insertion,
            SwapFragments | SequentializeParallel | ParallelizeSequence => Category::Resequentialization,
            LoopFragment | SkipFragment => Category::Optionalization,
        }
    }

    fn payload_len(self) -> usize {
        use PatternKind::*;
        match self {
            SerialInsert | ConditionalInsert | ParallelInsert => 1,
            _ => 0,
        }
    }
}

/// Default repeat probability of fragments made loopable.
pub const LOOP_REPEAT: f64 = 0.3;
/// Default skip probability of fragments made optional.
pub const SKIP_PROBABILITY: f64 = 0.3;
/// Default probability of the new branch of a conditional insertion.
pub const BRANCH_PROBABILITY: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePattern {
    pub kind: PatternKind,
    /// Child-index path from the root to the target block.
    pub target: Vec<usize>,
    /// Second block, for `swap_fragments`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<Vec<usize>>,
    /// Fresh activity labels, for the insertions.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub payload: Vec<String>,
    /// Loop repeat, skip or new-branch probability, overriding the default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
}

impl ChangePattern {
    pub fn new(kind: PatternKind, target: Vec<usize>) -> Self {
        ChangePattern {
            kind,
            target,
            other: None,
            payload: Vec::new(),
            probability: None,
        }
    }

    pub fn with_probability(mut self, p: f64) -> Self {
        self.probability = Some(p);
        self
    }

    pub fn insert(kind: PatternKind, target: Vec<usize>, label: impl Into<String>) -> Self {
        ChangePattern {
            payload: vec![label.into()],
            ..ChangePattern::new(kind, target)
        }
    }

    pub fn swap(a: Vec<usize>, b: Vec<usize>) -> Self {
        ChangePattern {
            other: Some(b),
            ..ChangePattern::new(PatternKind::SwapFragments, a)
        }
    }
}

fn pattern_err(msg: impl Into<String>) -> Error {
    Error::Pattern(msg.into())
}

fn node_at<'a>(m: &'a mut Node, path: &[usize]) -> Result<&'a mut Node> {
    m.at_mut(path)
        .ok_or_else(|| pattern_err(format!("no block at path {path:?}")))
}

/// Applies `p` to `m`. The result must differ from `m` in its set of
/// directly-follows relations; otherwise the change is invisible to the
/// detector and [`Error::UndetectablePattern`] is returned.
pub fn apply_change_pattern(m: &ProcessModel, p: &ChangePattern) -> Result<ProcessModel> {
    let want = p.kind.payload_len();
    if p.payload.len() != want {
        return Err(pattern_err(format!(
            "{:?} takes {want} payload label(s), got {}",
            p.kind,
            p.payload.len()
        )));
    }
    let existing: HashSet<&str> = m.labels().into_iter().collect();
    if let Some(dup) = p.payload.iter().find(|l| existing.contains(l.as_str())) {
        return Err(pattern_err(format!("payload label `{dup}` already in the model")));
    }
    let mut root = m.root.clone();
    let fresh = || Node::activity(p.payload[0].clone());
    let prob = |default: f64| p.probability.unwrap_or(default);
    match p.kind {
        PatternKind::SerialInsert => wrap(&mut root, &p.target, |n| Node::sequence(vec![n, fresh()]))?,
        PatternKind::ConditionalInsert => {
            let q = prob(BRANCH_PROBABILITY);
            wrap(&mut root, &p.target, |n| Node::choice(vec![(1.0 - q, n), (q, fresh())]))?
        }
        PatternKind::ParallelInsert => wrap(&mut root, &p.target, |n| Node::parallel(vec![n, fresh()]))?,
        PatternKind::LoopFragment => wrap(&mut root, &p.target, |n| Node::looped(n, prob(LOOP_REPEAT)))?,
        PatternKind::SkipFragment => wrap(&mut root, &p.target, |n| Node::skip(n, prob(SKIP_PROBABILITY)))?,
        PatternKind::RemoveFragment => remove(&mut root, &p.target)?,
        PatternKind::SwapFragments => {
            let other = p
                .other
                .as_ref()
                .ok_or_else(|| pattern_err("swap needs a second path"))?;
            let (a, b) = (&p.target, other);
            if a.starts_with(b) || b.starts_with(a) {
                return Err(pattern_err("swapped blocks must not contain each other"));
            }
            let first = node_at(&mut root, a)?.clone();
            let second = std::mem::replace(node_at(&mut root, b)?, first);
            *node_at(&mut root, a)? = second;
        }
        PatternKind::SequentializeParallel => {
            let node = node_at(&mut root, &p.target)?;
            let Node::Parallel { children } = node else {
                return Err(pattern_err("target is not a parallel block"));
            };
            *node = Node::sequence(std::mem::take(children));
        }
        PatternKind::ParallelizeSequence => {
            let node = node_at(&mut root, &p.target)?;
            match node {
                Node::Sequence { children } if children.len() >= 2 => {
                    *node = Node::parallel(std::mem::take(children));
                }
                _ => return Err(pattern_err("target is not a sequence of two or more blocks")),
            }
        }
    }
    let changed = ProcessModel::new(root)?;
    if changed.df_relations() == m.df_relations() {
        return Err(Error::UndetectablePattern);
    }
    Ok(changed)
}

/// Applies several patterns in turn; paths of later patterns refer to the
/// model produced by the earlier ones.
pub fn apply_composite(m: &ProcessModel, patterns: &[ChangePattern]) -> Result<ProcessModel> {
    patterns
        .iter()
        .try_fold(m.clone(), |acc, p| apply_change_pattern(&acc, p))
}

fn wrap(root: &mut Node, path: &[usize], f: impl FnOnce(Node) -> Node) -> Result<()> {
    let node = node_at(root, path)?;
    let inner = std::mem::replace(node, Node::sequence(Vec::new()));
    *node = f(inner);
    Ok(())
}

fn remove(root: &mut Node, path: &[usize]) -> Result<()> {
    let (&last, parent_path) = path
        .split_last()
        .ok_or_else(|| pattern_err("cannot remove the root"))?;
    let parent = node_at(root, parent_path)?;
    match parent {
        Node::Sequence { children } | Node::Parallel { children } if children.len() >= 2 => {
            if last >= children.len() {
                return Err(pattern_err(format!("no block at path {path:?}")));
            }
            children.remove(last);
        }
        Node::Choice {
            children,
            probabilities,
        } if children.len() >= 3 => {
            if last >= children.len() {
                return Err(pattern_err(format!("no block at path {path:?}")));
            }
            children.remove(last);
            probabilities.remove(last);
            let total: f64 = probabilities.iter().sum();
            probabilities.iter_mut().for_each(|p| *p /= total);
        }
        _ => {
            return Err(pattern_err(
                "only a block with remaining siblings in a sequence, parallel or choice can be removed",
            ))
        }
    }
    Ok(())
}

/// A pattern (or composite) with a short name, as used by the experiment
/// suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedPattern {
    pub name: String,
    pub steps: Vec<ChangePattern>,
}

impl NamedPattern {
    pub fn apply(&self, m: &ProcessModel) -> Result<ProcessModel> {
        apply_composite(m, &self.steps)
    }
}

/// Changes to [`base_model`] exercised by the built-in suite. The first five
/// alter a directly-follows relation in most traces; the rest are weaker or
/// composite changes covering the remaining pattern kinds.
pub fn standard_patterns() -> Vec<NamedPattern> {
    use PatternKind::*;
    let simple = |name: &str, p: ChangePattern| NamedPattern {
        name: name.into(),
        steps: vec![p],
    };
    vec![
        simple("serial_insert", ChangePattern::insert(SerialInsert, vec![0], "N")),
        simple("remove_fragment", ChangePattern::new(RemoveFragment, vec![1])),
        simple("remove_choice", ChangePattern::new(RemoveFragment, vec![2])),
        simple("swap_fragments", ChangePattern::swap(vec![1], vec![3])),
        simple(
            "loop_fragment",
            ChangePattern::new(LoopFragment, vec![1]).with_probability(0.7),
        ),
        simple("conditional_insert", ChangePattern::insert(ConditionalInsert, vec![1], "Q")),
        simple("parallel_insert", ChangePattern::insert(ParallelInsert, vec![1], "P")),
        simple("skip_fragment", ChangePattern::new(SkipFragment, vec![1])),
        simple("parallelize_sequence", ChangePattern::new(ParallelizeSequence, vec![3])),
        NamedPattern {
            name: "insert_sequentialize".into(),
            steps: vec![
                ChangePattern::insert(ParallelInsert, vec![3], "P"),
                ChangePattern::new(SequentializeParallel, vec![3]),
            ],
        },
        NamedPattern {
            name: "insert_swap_skip".into(),
            steps: vec![
                ChangePattern::insert(SerialInsert, vec![0], "N"),
                ChangePattern::swap(vec![2], vec![3]),
                ChangePattern::new(SkipFragment, vec![1]),
            ],
        },
    ]
}

/// Looks a pattern of [`standard_patterns`] up by name.
pub fn standard_pattern(name: &str) -> Option<NamedPattern> {
    standard_patterns().into_iter().find(|p| p.name == name)
}

/// Checks that every standard pattern applies to the base model.
pub fn check_standard_patterns() -> Result<()> {
    let base = base_model();
    standard_patterns().iter().try_for_each(|p| p.apply(&base).map(|_| ()))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::super::model::df_relations_of;
    use super::*;

    fn a(l: &str) -> Node {
        Node::activity(l)
    }

    fn rel(x: &str, y: &str) -> (String, String) {
        (x.into(), y.into())
    }

    fn enumerated(m: &ProcessModel) -> BTreeSet<(String, String)> {
        df_relations_of(&m.language(10_000).unwrap())
    }

    #[test]
    fn serial_insert_between_two_activities() {
        let m = ProcessModel::new(Node::sequence(vec![a("A"), a("B")])).unwrap();
        let changed =
            apply_change_pattern(&m, &ChangePattern::insert(PatternKind::SerialInsert, vec![0], "X")).unwrap();
        let lang = changed.language(10).unwrap();
        assert_eq!(lang.into_iter().collect::<Vec<_>>(), vec![vec!["A", "X", "B"]]);
        let df = changed.df_relations();
        assert!(df.contains(&rel("A", "X")) && df.contains(&rel("X", "B")));
        assert!(!df.contains(&rel("A", "B")));
    }

    #[test]
    fn sequentializing_parallel_drops_reverse_order() {
        let m = ProcessModel::new(Node::sequence(vec![
            a("D"),
            Node::parallel(vec![a("E"), a("F")]),
            a("G"),
        ]))
        .unwrap();
        let p = ChangePattern::new(PatternKind::SequentializeParallel, vec![1]);
        let changed = apply_change_pattern(&m, &p).unwrap();
        let before = m.df_relations();
        let after = changed.df_relations();
        let removed: BTreeSet<_> = before.difference(&after).cloned().collect();
        assert_eq!(removed, [rel("D", "F"), rel("E", "G"), rel("F", "E")].into());
        assert!(after.is_subset(&before));
        assert_eq!(after, enumerated(&changed));
    }

    #[test]
    fn removing_optional_block_drops_bypass() {
        let m = ProcessModel::new(Node::sequence(vec![a("A"), Node::skip(a("K"), 0.5), a("B")])).unwrap();
        let changed = apply_change_pattern(&m, &ChangePattern::new(PatternKind::RemoveFragment, vec![1])).unwrap();
        assert_eq!(enumerated(&m), m.df_relations());
        let removed: BTreeSet<_> = enumerated(&m).difference(&enumerated(&changed)).cloned().collect();
        assert_eq!(removed, [rel("A", "K"), rel("K", "B")].into());
        assert_eq!(enumerated(&changed), [rel("A", "B")].into());
    }

    #[test]
    fn branching_frequency_only_change_is_undetectable() {
        // swapping two branches of one choice changes nothing visible
        let m = ProcessModel::new(Node::sequence(vec![
            a("S"),
            Node::choice(vec![(0.2, a("A")), (0.8, a("B"))]),
        ]))
        .unwrap();
        let err = apply_change_pattern(&m, &ChangePattern::swap(vec![1, 0], vec![1, 1])).unwrap_err();
        assert!(matches!(err, Error::UndetectablePattern));
    }

    #[test]
    fn invalid_targets_rejected() {
        let m = base_model();
        let bad = [
            ChangePattern::new(PatternKind::LoopFragment, vec![9]),
            ChangePattern::new(PatternKind::SequentializeParallel, vec![0]),
            ChangePattern::new(PatternKind::RemoveFragment, vec![]),
            ChangePattern::insert(PatternKind::SerialInsert, vec![0], "A"),
            ChangePattern::new(PatternKind::SerialInsert, vec![0]),
            ChangePattern::swap(vec![1], vec![1, 0]),
        ];
        for p in bad {
            assert!(matches!(apply_change_pattern(&m, &p), Err(Error::Pattern(_))), "{p:?}");
        }
    }

    #[test]
    fn every_kind_has_a_category_and_every_category_is_used() {
        let cats: HashSet<_> = PatternKind::ALL.iter().map(|k| format!("{:?}", k.category())).collect();
        assert_eq!(cats.len(), 3);
    }

    #[test]
    fn standard_patterns_change_the_base_model() {
        for p in standard_patterns() {
            p.apply(&base_model()).unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
        let base = base_model();
        let kinds: HashSet<PatternKind> = standard_patterns()
            .iter()
            .flat_map(|p| p.steps.iter().map(|s| s.kind))
            .collect();
        assert_eq!(kinds.len(), PatternKind::ALL.len());
        for p in standard_patterns() {
            let changed = p.apply(&base).unwrap();
            if let (Some(l1), Some(l2)) = (base.language(10_000), changed.language(10_000)) {
                assert_ne!(df_relations_of(&l1), df_relations_of(&l2), "{}", p.name);
                assert_eq!(changed.df_relations(), df_relations_of(&l2), "{}", p.name);
            }
        }
    }

    #[test]
    fn pattern_json_round_trip() {
        for p in standard_patterns() {
            let text = serde_json::to_string(&p).unwrap();
            let back: NamedPattern = serde_json::from_str(&text).unwrap();
            assert_eq!(back, p);
        }
        let v = serde_json::to_value(ChangePattern::new(PatternKind::SkipFragment, vec![2])).unwrap();
        assert_eq!(v["kind"], "skip_fragment");
    }
}
