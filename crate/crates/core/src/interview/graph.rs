//! The interview question graph.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::DataError;

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Mandatory,
    LocWise,
}

/// The profile slot a node fills.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Item {
    Participants,
    Children,
    ChildrenAges,
    Transportation,
    PointsOfInterest,
    LocPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerSchema {
    YesNo,
    Companion,
    Ages,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerClass {
    Yes,
    No,
    Alone,
    Friend,
    Family,
    Ages,
    Any,
    Unknown,
}

impl AnswerSchema {
    /// Classes a node of this schema must route.
    pub fn classes(self) -> &'static [AnswerClass] {
        match self {
            AnswerSchema::YesNo => &[AnswerClass::Yes, AnswerClass::No],
            AnswerSchema::Companion => &[AnswerClass::Alone, AnswerClass::Friend, AnswerClass::Family],
            AnswerSchema::Ages => &[AnswerClass::Ages],
            AnswerSchema::Open => &[AnswerClass::Any],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Node(NodeId),
    Exit,
}

impl Serialize for Target {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Target::Node(id) => s.serialize_u32(*id),
            Target::Exit => s.serialize_str("exit"),
        }
    }
}

impl<'de> Deserialize<'de> for Target {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Id(NodeId),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Id(id) => Ok(Target::Node(id)),
            Raw::Word(w) if w == "exit" => Ok(Target::Exit),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "transition target must be a node id or \"exit\", got {w:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuestionNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub item: Item,
    /// Fixed question text; for location-wise nodes an example only, the
    /// asked text comes from the sight's generated questions.
    pub text: String,
    pub answer_schema: AnswerSchema,
    /// Which generated question a location-wise node asks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loc_index: Option<usize>,
    pub transitions: BTreeMap<AnswerClass, Target>,
    /// Class assumed after a second unparseable answer.
    pub default: AnswerClass,
}

impl QuestionNode {
    pub fn next(&self, class: AnswerClass) -> Target {
        let class = if class == AnswerClass::Unknown {
            self.default
        } else {
            class
        };
        self.transitions
            .get(&class)
            .or_else(|| self.transitions.get(&self.default))
            .copied()
            .unwrap_or(Target::Exit)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    start: NodeId,
    node: Vec<QuestionNode>,
}

/// Validated, immutable question graph.
#[derive(Debug, Clone, PartialEq)]
pub struct QuestionGraph {
    start: NodeId,
    nodes: BTreeMap<NodeId, QuestionNode>,
}

const DEFAULT_GRAPH: &str = include_str!("../../data/interview_graph.toml");

impl QuestionGraph {
    /// The shipped interview graph.
    pub fn standard() -> Self {
        Self::parse(DEFAULT_GRAPH).expect("bundled interview graph")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DataError> {
        Self::parse(&DataError::read(path.as_ref())?)
    }

    pub fn parse(text: &str) -> Result<Self, DataError> {
        let file: GraphFile = toml::from_str(text).map_err(|e| DataError::Parse {
            what: "question graph".into(),
            message: e.to_string(),
        })?;
        Self::new(file.start, file.node)
    }

    pub fn new(start: NodeId, nodes: Vec<QuestionNode>) -> Result<Self, DataError> {
        let invalid = |m: String| DataError::invalid("question graph", m);
        let mut map = BTreeMap::new();
        for node in nodes {
            let id = node.id;
            if map.insert(id, node).is_some() {
                return Err(invalid(format!("node {id} defined twice")));
            }
        }
        if !map.contains_key(&start) {
            return Err(invalid(format!("start node {start} does not exist")));
        }
        for node in map.values() {
            for class in node.answer_schema.classes() {
                if !node.transitions.contains_key(class) {
                    return Err(invalid(format!("node {} has no transition for {class:?}", node.id)));
                }
            }
            if !node.answer_schema.classes().contains(&node.default) {
                return Err(invalid(format!(
                    "node {} default {:?} is not an answer class of its schema",
                    node.id, node.default
                )));
            }
            for target in node.transitions.values() {
                if let Target::Node(to) = target {
                    if !map.contains_key(to) {
                        return Err(invalid(format!("node {} points at missing node {to}", node.id)));
                    }
                }
            }
            if (node.kind == NodeKind::LocWise) != node.loc_index.is_some() {
                return Err(invalid(format!(
                    "node {}: loc_index is required on location-wise nodes and only there",
                    node.id
                )));
            }
        }
        let graph = QuestionGraph { start, nodes: map };
        graph.check_acyclic_and_reachable()?;
        Ok(graph)
    }

    fn check_acyclic_and_reachable(&self) -> Result<(), DataError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Active,
            Done,
        }
        let mut marks: BTreeMap<NodeId, Mark> = BTreeMap::new();
        // Iterative DFS; a node seen while still active closes a cycle.
        let mut stack = vec![(self.start, false)];
        while let Some((id, leaving)) = stack.pop() {
            if leaving {
                marks.insert(id, Mark::Done);
                continue;
            }
            match marks.get(&id) {
                Some(Mark::Done) => continue,
                Some(Mark::Active) => {
                    return Err(DataError::invalid(
                        "question graph",
                        format!("cycle through node {id}"),
                    ))
                }
                None => {}
            }
            marks.insert(id, Mark::Active);
            stack.push((id, true));
            for target in self.nodes[&id].transitions.values() {
                if let Target::Node(to) = target {
                    if marks.get(to) == Some(&Mark::Active) {
                        return Err(DataError::invalid(
                            "question graph",
                            format!("cycle through node {to}"),
                        ));
                    }
                    stack.push((*to, false));
                }
            }
        }
        let unreachable: BTreeSet<_> = self
            .nodes
            .keys()
            .filter(|id| !marks.contains_key(id))
            .collect();
        if !unreachable.is_empty() {
            return Err(DataError::invalid(
                "question graph",
                format!("nodes {unreachable:?} are unreachable from {}", self.start),
            ));
        }
        Ok(())
    }

    pub fn start(&self) -> NodeId {
        self.start
    }

    pub fn node(&self, id: NodeId) -> Option<&QuestionNode> {
        self.nodes.get(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &QuestionNode> {
        self.nodes.values()
    }

    /// Pure transition lookup: where `class` leads from node `id`.
    pub fn next(&self, id: NodeId, class: AnswerClass) -> Option<Target> {
        self.nodes.get(&id).map(|n| n.next(class))
    }

    /// Follows `target` past location-wise nodes whose question does not
    /// exist for the current sight (fewer than three were generated).
    pub fn resolve(&self, mut target: Target, loc_questions: usize) -> Target {
        while let Target::Node(id) = target {
            match self.nodes.get(&id) {
                Some(node) if node.loc_index.is_some_and(|i| i >= loc_questions) => {
                    target = node.next(node.default);
                }
                _ => break,
            }
        }
        target
    }

    /// Longest start-to-exit path, counted in nodes.
    pub fn longest_path(&self) -> usize {
        fn depth(graph: &QuestionGraph, id: NodeId, memo: &mut BTreeMap<NodeId, usize>) -> usize {
            if let Some(&d) = memo.get(&id) {
                return d;
            }
            let d = 1 + graph.nodes[&id]
                .transitions
                .values()
                .map(|t| match t {
                    Target::Node(to) => depth(graph, *to, memo),
                    Target::Exit => 0,
                })
                .max()
                .unwrap_or(0);
            memo.insert(id, d);
            d
        }
        depth(self, self.start, &mut BTreeMap::new())
    }
}
