//! Block-structured process models.

use std::collections::{BTreeSet, HashSet};

use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A node of a block tree. Serialized as JSON tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Activity {
        label: String,
    },
    Sequence {
        children: Vec<Node>,
    },
    /// Exclusive choice; `probabilities[i]` is the chance of `children[i]`.
    Choice {
        children: Vec<Node>,
        probabilities: Vec<f64>,
    },
    /// All children run; every interleaving of their traces is equally likely.
    Parallel {
        children: Vec<Node>,
    },
    /// Runs `body` once, then again with probability `repeat` each time.
    Loop {
        body: Box<Node>,
        repeat: f64,
    },
    /// Omits `body` with probability `probability`.
    Skip {
        body: Box<Node>,
        probability: f64,
    },
}

impl Node {
    pub fn activity(label: impl Into<String>) -> Node {
        Node::Activity {
            label: label.into(),
        }
    }

    pub fn sequence(children: Vec<Node>) -> Node {
        Node::Sequence { children }
    }

    pub fn choice(branches: Vec<(f64, Node)>) -> Node {
        let (probabilities, children) = branches.into_iter().unzip();
        Node::Choice {
            children,
            probabilities,
        }
    }

    pub fn parallel(children: Vec<Node>) -> Node {
        Node::Parallel { children }
    }

    pub fn looped(body: Node, repeat: f64) -> Node {
        Node::Loop {
            body: Box::new(body),
            repeat,
        }
    }

    pub fn skip(body: Node, probability: f64) -> Node {
        Node::Skip {
            body: Box::new(body),
            probability,
        }
    }

    pub fn children(&self) -> &[Node] {
        match self {
            Node::Activity { .. } => &[],
            Node::Sequence { children }
            | Node::Choice { children, .. }
            | Node::Parallel { children } => children,
            Node::Loop { body, .. } | Node::Skip { body, .. } => std::slice::from_ref(&**body),
        }
    }

    pub fn children_mut(&mut self) -> &mut [Node] {
        match self {
            Node::Activity { .. } => &mut [],
            Node::Sequence { children }
            | Node::Choice { children, .. }
            | Node::Parallel { children } => children,
            Node::Loop { body, .. } | Node::Skip { body, .. } => std::slice::from_mut(&mut **body),
        }
    }

    /// Leaf labels in document order.
    pub fn labels(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_labels(&mut out);
        out
    }

    fn collect_labels<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Node::Activity { label } => out.push(label),
            _ => self.children().iter().for_each(|c| c.collect_labels(out)),
        }
    }

    pub fn is_acyclic(&self) -> bool {
        !matches!(self, Node::Loop { .. }) && self.children().iter().all(Node::is_acyclic)
    }

    pub fn at(&self, path: &[usize]) -> Option<&Node> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children().get(i)?.at(rest),
        }
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Option<&mut Node> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children_mut().get_mut(i)?.at_mut(rest),
        }
    }

    fn validate(&self) -> Result<()> {
        let open = |p: f64| p > 0.0 && p < 1.0;
        match self {
            Node::Activity { label } if label.is_empty() => {
                return Err(Error::Model("empty activity label".into()))
            }
            Node::Sequence { children } | Node::Parallel { children } if children.is_empty() => {
                return Err(Error::Model("block without children".into()))
            }
            Node::Choice {
                children,
                probabilities,
            } => {
                if children.len() < 2 || children.len() != probabilities.len() {
                    return Err(Error::Model(
                        "choice needs at least two branches, one probability each".into(),
                    ));
                }
                if !probabilities.iter().all(|&p| open(p)) {
                    return Err(Error::Model("branch probabilities must lie in (0, 1)".into()));
                }
                let total: f64 = probabilities.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::Model(format!(
                        "branch probabilities sum to {total}, not 1"
                    )));
                }
            }
            Node::Loop { repeat, .. } if !open(*repeat) => {
                return Err(Error::Model("loop repeat probability must lie in (0, 1)".into()))
            }
            Node::Skip { probability, .. } if !(*probability > 0.0 && *probability <= 1.0) => {
                return Err(Error::Model("skip probability must lie in (0, 1]".into()))
            }
            _ => {}
        }
        self.children().iter().try_for_each(Node::validate)
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<String>) {
        match self {
            Node::Activity { label } => out.push(label.clone()),
            Node::Sequence { children } => children.iter().for_each(|c| c.sample_into(rng, out)),
            Node::Choice {
                children,
                probabilities,
            } => {
                let mut u: f64 = rng.random();
                let mut pick = children.len() - 1;
                for (i, p) in probabilities.iter().enumerate() {
                    if u < *p {
                        pick = i;
                        break;
                    }
                    u -= p;
                }
                children[pick].sample_into(rng, out);
            }
            Node::Parallel { children } => {
                let mut parts: Vec<std::vec::IntoIter<String>> = children
                    .iter()
                    .map(|c| {
                        let mut part = Vec::new();
                        c.sample_into(rng, &mut part);
                        part.into_iter()
                    })
                    .collect();
                // drawing the next branch proportionally to its remaining
                // length makes every interleaving equally likely
                let mut remaining: usize = parts.iter().map(|p| p.len()).sum();
                while remaining > 0 {
                    let mut k = rng.random_range(0..remaining);
                    for part in parts.iter_mut() {
                        if k < part.len() {
                            out.extend(part.next());
                            break;
                        }
                        k -= part.len();
                    }
                    remaining -= 1;
                }
            }
            Node::Loop { body, repeat } => loop {
                body.sample_into(rng, out);
                if !rng.random_bool(*repeat) {
                    break;
                }
            },
            Node::Skip { body, probability } => {
                if !rng.random_bool(*probability) {
                    body.sample_into(rng, out);
                }
            }
        }
    }

    fn footprint(&self) -> Footprint {
        match self {
            Node::Activity { label } => {
                let one: BTreeSet<String> = [label.clone()].into();
                Footprint {
                    first: one.clone(),
                    last: one.clone(),
                    alphabet: one,
                    df: BTreeSet::new(),
                    nullable: false,
                }
            }
            Node::Sequence { children } => {
                let mut acc = Footprint::empty();
                for child in children {
                    let f = child.footprint();
                    acc.df.extend(f.df.iter().cloned());
                    acc.df.extend(cross(&acc.last, &f.first));
                    if acc.nullable {
                        acc.first.extend(f.first.iter().cloned());
                    }
                    if f.nullable {
                        acc.last.extend(f.last);
                    } else {
                        acc.last = f.last;
                    }
                    acc.alphabet.extend(f.alphabet);
                    acc.nullable &= f.nullable;
                }
                acc
            }
            Node::Choice { children, .. } => {
                let mut acc = Footprint::empty();
                acc.nullable = false;
                for f in children.iter().map(Node::footprint) {
                    acc.first.extend(f.first);
                    acc.last.extend(f.last);
                    acc.alphabet.extend(f.alphabet);
                    acc.df.extend(f.df);
                    acc.nullable |= f.nullable;
                }
                acc
            }
            Node::Parallel { children } => {
                let parts: Vec<Footprint> = children.iter().map(Node::footprint).collect();
                let mut acc = Footprint::empty();
                for (i, f) in parts.iter().enumerate() {
                    acc.first.extend(f.first.iter().cloned());
                    acc.last.extend(f.last.iter().cloned());
                    acc.alphabet.extend(f.alphabet.iter().cloned());
                    acc.df.extend(f.df.iter().cloned());
                    acc.nullable &= f.nullable;
                    for (j, g) in parts.iter().enumerate() {
                        if i != j {
                            acc.df.extend(cross(&f.alphabet, &g.alphabet));
                        }
                    }
                }
                acc
            }
            Node::Loop { body, .. } => {
                let mut f = body.footprint();
                let back = cross(&f.last, &f.first);
                f.df.extend(back);
                f
            }
            Node::Skip { body, .. } => {
                let mut f = body.footprint();
                f.nullable = true;
                f
            }
        }
    }
}

fn cross(a: &BTreeSet<String>, b: &BTreeSet<String>) -> Vec<(String, String)> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| (x.clone(), y.clone())))
        .collect()
}

struct Footprint {
    first: BTreeSet<String>,
    last: BTreeSet<String>,
    alphabet: BTreeSet<String>,
    df: BTreeSet<(String, String)>,
    nullable: bool,
}

impl Footprint {
    fn empty() -> Self {
        Footprint {
            first: BTreeSet::new(),
            last: BTreeSet::new(),
            alphabet: BTreeSet::new(),
            df: BTreeSet::new(),
            nullable: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessModel {
    pub root: Node,
}

impl ProcessModel {
    pub fn new(root: Node) -> Result<Self> {
        let m = ProcessModel { root };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.root.validate()?;
        let mut seen = HashSet::new();
        for label in self.root.labels() {
            if !seen.insert(label) {
                return Err(Error::Model(format!("activity `{label}` used twice")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: ProcessModel = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn labels(&self) -> Vec<&str> {
        self.root.labels()
    }

    /// One random walk of the block tree.
    pub fn sample_trace<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<String> {
        let mut out = Vec::new();
        self.root.sample_into(rng, &mut out);
        out
    }

    /// Every directly-follows relation some trace of the model can exhibit,
    /// computed structurally.
    pub fn df_relations(&self) -> BTreeSet<(String, String)> {
        self.root.footprint().df
    }

    /// All distinct traces of an acyclic model, or `None` when the model has
    /// a loop or more than `limit` distinct traces.
    pub fn language(&self, limit: usize) -> Option<BTreeSet<Vec<String>>> {
        if !self.root.is_acyclic() {
            return None;
        }
        let lang = enumerate(&self.root, limit)?;
        Some(lang.into_iter().collect())
    }
}

fn enumerate(node: &Node, limit: usize) -> Option<BTreeSet<Vec<String>>> {
    let out: BTreeSet<Vec<String>> = match node {
        Node::Activity { label } => [vec![label.clone()]].into(),
        Node::Sequence { children } => {
            let mut acc: BTreeSet<Vec<String>> = [Vec::new()].into();
            for child in children {
                let part = enumerate(child, limit)?;
                acc = acc
                    .iter()
                    .flat_map(|a| part.iter().map(move |b| [a.as_slice(), b].concat()))
                    .collect();
                if acc.len() > limit {
                    return None;
                }
            }
            acc
        }
        Node::Choice { children, .. } => {
            let mut acc = BTreeSet::new();
            for child in children {
                acc.extend(enumerate(child, limit)?);
            }
            acc
        }
        Node::Parallel { children } => {
            let mut acc: BTreeSet<Vec<String>> = [Vec::new()].into();
            for child in children {
                let part = enumerate(child, limit)?;
                let mut next = BTreeSet::new();
                for a in &acc {
                    for b in &part {
                        interleavings(a, b, &mut Vec::new(), &mut next);
                    }
                }
                acc = next;
                if acc.len() > limit {
                    return None;
                }
            }
            acc
        }
        Node::Skip { body, probability } => {
            let mut acc: BTreeSet<Vec<String>> = [Vec::new()].into();
            if *probability < 1.0 {
                acc.extend(enumerate(body, limit)?);
            }
            acc
        }
        Node::Loop { .. } => return None,
    };
    (out.len() <= limit).then_some(out)
}

fn interleavings(a: &[String], b: &[String], prefix: &mut Vec<String>, out: &mut BTreeSet<Vec<String>>) {
    match (a.split_first(), b.split_first()) {
        (None, _) => {
            out.insert([prefix.as_slice(), b].concat());
        }
        (_, None) => {
            out.insert([prefix.as_slice(), a].concat());
        }
        (Some((x, a_rest)), Some((y, b_rest))) => {
            prefix.push(x.clone());
            interleavings(a_rest, b, prefix, out);
            prefix.pop();
            prefix.push(y.clone());
            interleavings(a, b_rest, prefix, out);
            prefix.pop();
        }
    }
}

/// Directly-follows relations occurring in a set of traces.
pub fn df_relations_of<'a>(traces: impl IntoIterator<Item = &'a Vec<String>>) -> BTreeSet<(String, String)> {
    traces
        .into_iter()
        .flat_map(|t| t.windows(2).map(|w| (w[0].clone(), w[1].clone())))
        .collect()
}

/// The base model used by the built-in experiment suite: six activities,
/// five events per trace.
pub fn base_model() -> ProcessModel {
    use Node as N;
    let a = N::activity;
    ProcessModel::new(N::sequence(vec![
        a("A"),
        a("B"),
        N::choice(vec![(0.5, a("C")), (0.5, a("D"))]),
        N::sequence(vec![a("E"), a("F")]),
    ]))
    .expect("base model is valid")
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn a(l: &str) -> Node {
        Node::activity(l)
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn pure_sequence_is_deterministic() {
        let m = ProcessModel::new(Node::sequence(vec![a("A"), a("B"), a("C")])).unwrap();
        let mut r = rng();
        for _ in 0..20 {
            assert_eq!(m.sample_trace(&mut r), vec!["A", "B", "C"]);
        }
    }

    #[test]
    fn parallel_orders_are_balanced() {
        let m = ProcessModel::new(Node::parallel(vec![a("A"), a("B")])).unwrap();
        let mut r = rng();
        let ab = (0..10_000)
            .filter(|_| m.sample_trace(&mut r) == ["A", "B"])
            .count();
        let freq = ab as f64 / 10_000.0;
        assert!((freq - 0.5).abs() < 0.05, "{freq}");
    }

    #[test]
    fn parallel_interleavings_are_uniform() {
        // 2 + 2 activities: C(4, 2) = 6 interleavings
        let m = ProcessModel::new(Node::parallel(vec![
            Node::sequence(vec![a("A"), a("B")]),
            Node::sequence(vec![a("C"), a("D")]),
        ]))
        .unwrap();
        let lang = m.language(100).unwrap();
        assert_eq!(lang.len(), 6);
        let mut r = rng();
        let mut counts: HashMap<Vec<String>, usize> = HashMap::new();
        for _ in 0..12_000 {
            *counts.entry(m.sample_trace(&mut r)).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        for (t, c) in counts {
            assert!(lang.contains(&t));
            assert!((c as f64 / 12_000.0 - 1.0 / 6.0).abs() < 0.02, "{t:?}: {c}");
        }
    }

    #[test]
    fn certain_skip_emits_nothing() {
        let m = ProcessModel::new(Node::sequence(vec![a("X"), Node::skip(a("A"), 1.0)])).unwrap();
        let mut r = rng();
        for _ in 0..50 {
            assert_eq!(m.sample_trace(&mut r), vec!["X"]);
        }
    }

    #[test]
    fn choice_frequencies_follow_probabilities() {
        let m = ProcessModel::new(Node::choice(vec![(0.2, a("A")), (0.8, a("B"))])).unwrap();
        let mut r = rng();
        let n_a = (0..10_000).filter(|_| m.sample_trace(&mut r) == ["A"]).count();
        assert!((n_a as f64 / 10_000.0 - 0.2).abs() < 0.02);
    }

    #[test]
    fn loop_length_is_geometric() {
        let m = ProcessModel::new(Node::looped(a("A"), 0.5)).unwrap();
        let mut r = rng();
        let total: usize = (0..10_000).map(|_| m.sample_trace(&mut r).len()).sum();
        // mean of a geometric count starting at 1 with continue-probability 0.5
        assert!((total as f64 / 10_000.0 - 2.0).abs() < 0.05);
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(ProcessModel::new(Node::sequence(vec![a("A"), a("A")])).is_err());
        assert!(ProcessModel::new(Node::choice(vec![(0.5, a("A")), (0.6, a("B"))])).is_err());
        assert!(ProcessModel::new(Node::choice(vec![(1.0, a("A"))])).is_err());
        assert!(ProcessModel::new(Node::looped(a("A"), 1.0)).is_err());
        assert!(ProcessModel::new(Node::sequence(vec![])).is_err());
        assert!(ProcessModel::new(a("")).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = base_model();
        let back = ProcessModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        let v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(v["root"]["kind"], "sequence");
        assert_eq!(v["root"]["children"][0]["label"], "A");
    }

    #[test]
    fn base_model_shape() {
        let m = base_model();
        assert_eq!(m.labels().len(), 6);
        let mut r = rng();
        let mean = (0..5_000).map(|_| m.sample_trace(&mut r).len()).sum::<usize>() as f64 / 5_000.0;
        assert!((5.0..=8.0).contains(&mean), "{mean}");
    }

    #[test]
    fn samples_stay_in_language() {
        let m = base_model();
        let lang = m.language(10_000).unwrap();
        let mut r = rng();
        for _ in 0..2_000 {
            assert!(lang.contains(&m.sample_trace(&mut r)));
        }
    }

    fn arb_node(depth: u32, next: std::rc::Rc<std::cell::Cell<u32>>) -> BoxedStrategy<Node> {
        let leaf = {
            let next = next.clone();
            Just(()).prop_map(move |_| {
                let i = next.get();
                next.set(i + 1);
                Node::activity(format!("a{i}"))
            })
        };
        if depth == 0 {
            return leaf.boxed();
        }
        let child = move || arb_node(depth - 1, next.clone());
        prop_oneof![
            2 => leaf,
            1 => prop::collection::vec(child(), 1..4).prop_map(Node::sequence),
            1 => prop::collection::vec(child(), 2..4).prop_map(|cs| {
                let p = 1.0 / cs.len() as f64;
                Node::choice(cs.into_iter().map(|c| (p, c)).collect())
            }),
            1 => prop::collection::vec(child(), 2..3).prop_map(Node::parallel),
            1 => child().prop_map(|c| Node::skip(c, 0.5)),
        ]
        .boxed()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn structural_relations_match_enumeration(
            root in arb_node(3, std::rc::Rc::new(std::cell::Cell::new(0)))
        ) {
            let m = ProcessModel { root };
            prop_assume!(m.validate().is_ok());
            if let Some(lang) = m.language(10_000) {
                prop_assert_eq!(m.df_relations(), df_relations_of(&lang));
            }
        }
    }

    #[test]
    fn loop_relations_include_back_edge() {
        let m = ProcessModel::new(Node::looped(Node::sequence(vec![a("A"), a("B")]), 0.3)).unwrap();
        let df = m.df_relations();
        assert!(df.contains(&("B".into(), "A".into())));
        assert!(df.contains(&("A".into(), "B".into())));
        assert_eq!(df.len(), 2);
        assert!(m.language(100).is_none());
    }
}
