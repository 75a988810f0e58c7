//! Thesaurus trees, tree cuts and the line-oriented thesaurus file format.
//!
//! A [`Thesaurus`] is stored as a flat arena in pre-order: every node's
//! descendants occupy the contiguous id range `id + 1 .. subtree_end(id)`,
//! children always carry larger ids than their parent, and ascending id
//! order over a set of disjoint nodes is their left-to-right tree order.
//! Bottom-up passes are therefore plain reverse loops over an id range.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

/// Positional identifier of a node (its pre-order index).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThesaurusNode {
    pub id: NodeId,
    pub label: String,
    /// Words attached directly to this node, in file order, without duplicates.
    pub members: Vec<String>,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
    pub depth: usize,
    subtree_end: usize,
    leaf_count: usize,
    slot_count: usize,
}

impl ThesaurusNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Number of leaf nodes dominated by this node.
    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    /// Number of (node, member word) slots in this subtree; `|C|` when the
    /// node is used as a class of a cut.
    pub fn word_count(&self) -> usize {
        self.slot_count
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ThesaurusError {
    #[error("empty thesaurus")]
    EmptyTree,
    #[error("line {line}: malformed indentation ({reason})")]
    MalformedIndentation { line: usize, reason: &'static str },
    #[error("line {line}: empty label")]
    EmptyLabel { line: usize },
    #[error("line {line}: empty word in member list")]
    EmptyWord { line: usize },
    #[error("line {line}: leaf `{label}` has no member word")]
    LeafWithoutMembers { line: usize, label: String },
    #[error("leaf `{label}` has no member word")]
    EmptyLeaf { label: String },
    #[error("line {line}: second root `{label}`; a thesaurus has exactly one root")]
    MultipleRoots { line: usize, label: String },
    #[error("node `{label}` at position {position} has depth {depth}, expected at most {max}")]
    BadDepth { position: usize, label: String, depth: usize, max: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CutError {
    #[error("{count} cuts exceed the enumeration limit of {limit}")]
    LimitExceeded { count: String, limit: u128 },
    #[error("cut is empty")]
    Empty,
    #[error("node {0} is not in the subtree")]
    OutsideSubtree(NodeId),
    #[error("nodes {0} and {1} overlap")]
    Overlap(NodeId, NodeId),
    #[error("cut covers {covered} of {expected} leaves")]
    Incomplete { covered: usize, expected: usize },
}

/// A set of nodes whose dominated leaves partition the leaves of a subtree.
/// Nodes are kept in left-to-right order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Cut {
    pub nodes: Vec<NodeId>,
}

impl Cut {
    pub fn new(mut nodes: Vec<NodeId>) -> Self {
        nodes.sort_unstable();
        Cut { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Position of `node` in the cut, if present.
    pub fn position(&self, node: NodeId) -> Option<usize> {
        self.nodes.binary_search(&node).ok()
    }
}

/// Number of cuts of a subtree. Exact while it fits in a `u128`; `log2` is
/// always available.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutCount {
    pub exact: Option<u128>,
    pub log2: f64,
}

impl CutCount {
    const ONE: CutCount = CutCount { exact: Some(1), log2: 0.0 };

    pub fn is_approximate(&self) -> bool {
        self.exact.is_none()
    }

    pub fn fits(&self, limit: u128) -> bool {
        matches!(self.exact, Some(n) if n <= limit)
    }
}

impl fmt::Display for CutCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "~2^{:.2}", self.log2),
        }
    }
}

/// Flat pre-order description of one node, used to assemble a tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatNode {
    pub depth: usize,
    pub label: String,
    pub members: Vec<String>,
}

/// Nested description of a tree, convenient for building trees in code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeSpec {
    pub label: String,
    pub members: Vec<String>,
    pub children: Vec<NodeSpec>,
}

impl NodeSpec {
    /// Leaf whose single member word is its label.
    pub fn word(word: &str) -> Self {
        NodeSpec { label: word.to_string(), members: vec![word.to_string()], children: Vec::new() }
    }

    pub fn class(label: &str, children: Vec<NodeSpec>) -> Self {
        NodeSpec { label: label.to_string(), members: Vec::new(), children }
    }

    pub fn with_members(mut self, members: &[&str]) -> Self {
        self.members = members.iter().map(|m| m.to_string()).collect();
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Thesaurus {
    nodes: Vec<ThesaurusNode>,
    word_index: BTreeMap<String, Vec<NodeId>>,
}

impl Thesaurus {
    /// Assemble a tree from pre-order entries. The first entry must have
    /// depth 0 and every later entry a depth in `1..=previous + 1`.
    pub fn from_preorder(entries: Vec<FlatNode>) -> Result<Self, ThesaurusError> {
        if entries.is_empty() {
            return Err(ThesaurusError::EmptyTree);
        }
        let n = entries.len();
        let mut nodes: Vec<ThesaurusNode> = Vec::with_capacity(n);
        // stack[d] = id of the most recent node at depth d
        let mut stack: Vec<usize> = Vec::new();
        for (i, entry) in entries.into_iter().enumerate() {
            let max = if i == 0 { 0 } else { stack.len() };
            if entry.depth > max || (i > 0 && entry.depth == 0) {
                return Err(ThesaurusError::BadDepth { position: i, label: entry.label, depth: entry.depth, max });
            }
            stack.truncate(entry.depth);
            let parent = stack.last().copied();
            if let Some(p) = parent {
                nodes[p].children.push(NodeId(i));
            }
            let mut seen = HashSet::new();
            let members = entry.members.into_iter().filter(|w| seen.insert(w.clone())).collect();
            nodes.push(ThesaurusNode {
                id: NodeId(i),
                label: entry.label,
                members,
                children: Vec::new(),
                parent: parent.map(NodeId),
                depth: entry.depth,
                subtree_end: i + 1,
                leaf_count: 0,
                slot_count: 0,
            });
            stack.push(i);
        }

        for i in (0..n).rev() {
            let node = &nodes[i];
            if node.children.is_empty() && node.members.is_empty() {
                return Err(ThesaurusError::EmptyLeaf { label: node.label.clone() });
            }
            let (mut end, mut leaves, mut slots) = (i + 1, 0, node.members.len());
            if node.children.is_empty() {
                leaves = 1;
            }
            for c in &node.children {
                let child = &nodes[c.0];
                end = end.max(child.subtree_end);
                leaves += child.leaf_count;
                slots += child.slot_count;
            }
            let node = &mut nodes[i];
            node.subtree_end = end;
            node.leaf_count = leaves;
            node.slot_count = slots;
        }

        let mut word_index: BTreeMap<String, Vec<NodeId>> = BTreeMap::new();
        for node in &nodes {
            for w in &node.members {
                word_index.entry(w.clone()).or_default().push(node.id);
            }
        }
        Ok(Thesaurus { nodes, word_index })
    }

    pub fn from_spec(root: NodeSpec) -> Result<Self, ThesaurusError> {
        let mut entries = Vec::new();
        let mut stack = vec![(root, 0usize)];
        while let Some((spec, depth)) = stack.pop() {
            for child in spec.children.into_iter().rev() {
                stack.push((child, depth + 1));
            }
            entries.push(FlatNode { depth, label: spec.label, members: spec.members });
        }
        Self::from_preorder(entries)
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &ThesaurusNode {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> &[ThesaurusNode] {
        &self.nodes
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.nodes[id.0].label
    }

    /// Id range of the subtree rooted at `id` (including `id`).
    pub fn subtree(&self, id: NodeId) -> Range<usize> {
        id.0..self.nodes[id.0].subtree_end
    }

    pub fn dominates(&self, ancestor: NodeId, node: NodeId) -> bool {
        self.subtree(ancestor).contains(&node.0)
    }

    /// Nodes carrying `word` as a direct member.
    pub fn lookup(&self, word: &str) -> &[NodeId] {
        self.word_index.get(word).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn contains_word(&self, word: &str) -> bool {
        self.word_index.contains_key(word)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.word_index.keys().map(String::as_str)
    }

    pub fn word_index(&self) -> &BTreeMap<String, Vec<NodeId>> {
        &self.word_index
    }

    /// `id` followed by its ancestors up to the root.
    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(Some(id), move |n| self.nodes[n.0].parent)
    }

    pub fn leaves(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.subtree(id).filter(move |&i| self.nodes[i].is_leaf()).map(NodeId)
    }

    /// Bracketed label list, e.g. `[BIRD, INSECT]`.
    pub fn cut_labels(&self, cut: &Cut) -> String {
        let labels: Vec<&str> = cut.nodes.iter().map(|&n| self.label(n)).collect();
        format!("[{}]", labels.join(", "))
    }

    /// The cut consisting of every leaf under `id`.
    pub fn leaf_cut(&self, id: NodeId) -> Cut {
        Cut { nodes: self.leaves(id).collect() }
    }

    /// Check that `cut` partitions the leaves of the subtree rooted at `root`.
    pub fn check_cut(&self, root: NodeId, cut: &Cut) -> Result<(), CutError> {
        if cut.nodes.is_empty() {
            return Err(CutError::Empty);
        }
        let range = self.subtree(root);
        let mut sorted = cut.nodes.clone();
        sorted.sort_unstable();
        let mut covered = 0;
        let mut prev: Option<NodeId> = None;
        for &n in &sorted {
            if !range.contains(&n.0) {
                return Err(CutError::OutsideSubtree(n));
            }
            if let Some(p) = prev {
                if n.0 < self.nodes[p.0].subtree_end {
                    return Err(CutError::Overlap(p, n));
                }
            }
            covered += self.nodes[n.0].leaf_count;
            prev = Some(n);
        }
        let expected = self.nodes[root.0].leaf_count;
        if covered != expected {
            return Err(CutError::Incomplete { covered, expected });
        }
        Ok(())
    }

    /// Serialize to the tab-indented thesaurus file format. Leaves whose only
    /// member is their label are written bare.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for node in &self.nodes {
            for _ in 0..node.depth {
                out.push('\t');
            }
            out.push_str(&node.label);
            let bare = node.is_leaf() && node.members.len() == 1 && node.members[0] == node.label;
            if !bare && !node.members.is_empty() {
                out.push_str(": ");
                out.push_str(&node.members.join(","));
            }
            out.push('\n');
        }
        out
    }
}

/// Parse the tab-indented thesaurus format: one node per line, depth given by
/// the number of leading tabs, `label[: w1,w2,...]`. A leaf without a member
/// list has its label as its only member. Blank lines and `#` comments are
/// skipped.
pub fn parse_thesaurus(text: &str) -> Result<Thesaurus, ThesaurusError> {
    let mut entries: Vec<FlatNode> = Vec::new();
    // (line number, whether an explicit member list was given)
    let mut origin: Vec<(usize, bool)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let depth = raw.bytes().take_while(|&b| b == b'\t').count();
        let body = &raw[depth..];
        if body.starts_with(char::is_whitespace) {
            return Err(ThesaurusError::MalformedIndentation { line, reason: "indent with tabs only" });
        }
        match entries.last() {
            None if depth > 0 => {
                return Err(ThesaurusError::MalformedIndentation { line, reason: "first node must not be indented" })
            }
            Some(prev) if depth > prev.depth + 1 => {
                return Err(ThesaurusError::MalformedIndentation { line, reason: "indent deeper than parent + 1" })
            }
            _ => {}
        }
        let (label, members, explicit) = match body.split_once(':') {
            Some((label, list)) => {
                let list = list.trim();
                let members = if list.is_empty() {
                    Vec::new()
                } else {
                    list.split(',')
                        .map(|w| {
                            let w = w.trim();
                            if w.is_empty() {
                                Err(ThesaurusError::EmptyWord { line })
                            } else {
                                Ok(w.to_string())
                            }
                        })
                        .collect::<Result<Vec<_>, _>>()?
                };
                (label.trim(), members, true)
            }
            None => (body.trim(), Vec::new(), false),
        };
        if label.is_empty() {
            return Err(ThesaurusError::EmptyLabel { line });
        }
        if depth == 0 && !entries.is_empty() {
            return Err(ThesaurusError::MultipleRoots { line, label: label.to_string() });
        }
        entries.push(FlatNode { depth, label: label.to_string(), members });
        origin.push((line, explicit));
    }
    if entries.is_empty() {
        return Err(ThesaurusError::EmptyTree);
    }

    // A node is a leaf iff the next entry is not one level deeper.
    for i in 0..entries.len() {
        let is_leaf = entries.get(i + 1).is_none_or(|next| next.depth <= entries[i].depth);
        if is_leaf && entries[i].members.is_empty() {
            let (line, explicit) = origin[i];
            if explicit {
                return Err(ThesaurusError::LeafWithoutMembers { line, label: entries[i].label.clone() });
            }
            let label = entries[i].label.clone();
            entries[i].members.push(label);
        }
    }
    Thesaurus::from_preorder(entries)
}

/// Number of cuts of the subtree rooted at `node`: 1 for a leaf, otherwise
/// one plus the product of the children's counts.
pub fn count_cuts(t: &Thesaurus, node: NodeId) -> CutCount {
    let range = t.subtree(node);
    let base = range.start;
    let mut counts = vec![CutCount::ONE; range.len()];
    for i in range.rev() {
        let n = t.node(NodeId(i));
        if n.is_leaf() {
            continue;
        }
        let mut exact = Some(1u128);
        let mut log_product = 0.0;
        for c in &n.children {
            let cc = counts[c.0 - base];
            exact = exact.zip(cc.exact).and_then(|(a, b)| a.checked_mul(b));
            log_product += cc.log2;
        }
        let exact = exact.and_then(|p| p.checked_add(1));
        let log2 = match exact {
            Some(e) => (e as f64).log2(),
            // log2(P + 1) = log2 P + log2(1 + 1/P)
            None => log_product + (-log_product).exp2().ln_1p() / std::f64::consts::LN_2,
        };
        counts[i - base] = CutCount { exact, log2 };
    }
    counts[0]
}

/// Every cut of the subtree rooted at `node`, each exactly once. The single
/// node cut comes first, then child-cut combinations with the leftmost child
/// varying slowest.
pub fn enumerate_cuts(t: &Thesaurus, node: NodeId, limit: u128) -> Result<Vec<Cut>, CutError> {
    let count = count_cuts(t, node);
    if !count.fits(limit) {
        return Err(CutError::LimitExceeded { count: count.to_string(), limit });
    }
    let range = t.subtree(node);
    let base = range.start;
    let mut cuts: Vec<Vec<Vec<NodeId>>> = vec![Vec::new(); range.len()];
    for i in range.rev() {
        let n = t.node(NodeId(i));
        let mut here = vec![vec![n.id]];
        if !n.is_leaf() {
            let mut product: Vec<Vec<NodeId>> = vec![Vec::new()];
            for c in &n.children {
                let child_cuts = std::mem::take(&mut cuts[c.0 - base]);
                let mut next = Vec::with_capacity(product.len() * child_cuts.len());
                for prefix in &product {
                    for suffix in &child_cuts {
                        let mut cut = prefix.clone();
                        cut.extend_from_slice(suffix);
                        next.push(cut);
                    }
                }
                product = next;
            }
            here.extend(product);
        }
        cuts[i - base] = here;
    }
    Ok(std::mem::take(&mut cuts[0]).into_iter().map(|nodes| Cut { nodes }).collect())
}

/// Turn every node that carries a word from `observed` into a leaf by
/// discarding its descendants.
pub fn prune_observed_subtrees<S>(t: &Thesaurus, observed: &HashSet<S>) -> Thesaurus
where
    S: std::hash::Hash + Eq + std::borrow::Borrow<str>,
{
    let mut entries = Vec::with_capacity(t.len());
    let mut i = 0;
    while i < t.len() {
        let node = &t.nodes[i];
        entries.push(FlatNode { depth: node.depth, label: node.label.clone(), members: node.members.clone() });
        let hit = node.members.iter().any(|w| observed.contains(w.as_str()));
        i = if hit { node.subtree_end } else { i + 1 };
    }
    // Pruned nodes keep the observed member, so every new leaf has a member.
    Thesaurus::from_preorder(entries).expect("pruning preserves a valid tree")
}
