//! Hierarchical topic vocabulary with multi-position nodes.
//!
//! Each node carries one or more dot-separated tree numbers
//! (`C01.252.400`); single-segment tree numbers are root positions. A node
//! is one analytic entity regardless of how many positions it occupies: its
//! depth is the shallowest of them and its subtree is the union of all of
//! them, closed transitively over nodes.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::CorpusStore;
use crate::error::{Error, Result};

/// Deepest supported level.
pub const MAX_DEPTH: usize = 13;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicNode {
    pub id: String,
    pub label: String,
    pub tree_numbers: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Taxonomy {
    /// Sorted by id; a node's position here is its index.
    nodes: Vec<TopicNode>,
    index: HashMap<String, usize>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    top: Vec<Vec<usize>>,
    roots: Vec<usize>,
}

impl Taxonomy {
    pub fn from_nodes(nodes: Vec<TopicNode>) -> Result<Self> {
        let mut nodes = nodes;
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in nodes.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::DuplicateId(pair[0].id.clone()));
            }
        }

        let mut owner: BTreeMap<&str, usize> = BTreeMap::new();
        for (ix, node) in nodes.iter().enumerate() {
            if node.tree_numbers.is_empty() {
                return Err(Error::Config(format!("node `{}` has no tree numbers", node.id)));
            }
            for tn in &node.tree_numbers {
                if tn.is_empty() || tn.split('.').any(str::is_empty) {
                    return Err(Error::Config(format!(
                        "node `{}` has malformed tree number `{tn}`",
                        node.id
                    )));
                }
                if let Some(prev) = owner.insert(tn.as_str(), ix) {
                    if prev != ix {
                        return Err(Error::DuplicateId(tn.clone()));
                    }
                }
            }
        }

        let n = nodes.len();
        let mut children: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        let mut depth = vec![usize::MAX; n];
        let mut top: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (ix, node) in nodes.iter().enumerate() {
            for tn in &node.tree_numbers {
                let segments = tn.split('.').count();
                if segments > MAX_DEPTH {
                    return Err(Error::TooDeep {
                        id: node.id.clone(),
                        depth: segments,
                        max: MAX_DEPTH,
                    });
                }
                depth[ix] = depth[ix].min(segments);
                let root = tn.split('.').next().unwrap();
                top[ix].insert(owner[root]);
                if let Some((parent, _)) = tn.rsplit_once('.') {
                    match owner.get(parent) {
                        Some(&p) if p != ix => {
                            children[p].insert(ix);
                        }
                        Some(_) => {}
                        None => {
                            return Err(Error::DanglingTreeNumber {
                                id: node.id.clone(),
                                tree_number: tn.clone(),
                                parent: parent.to_string(),
                            })
                        }
                    }
                }
            }
        }

        let index = nodes
            .iter()
            .enumerate()
            .map(|(ix, n)| (n.id.clone(), ix))
            .collect();
        let roots = (0..n).filter(|&ix| depth[ix] == 1).collect();
        Ok(Taxonomy {
            nodes,
            index,
            children: children.into_iter().map(|s| s.into_iter().collect()).collect(),
            depth,
            top: top.into_iter().map(|s| s.into_iter().collect()).collect(),
            roots,
        })
    }

    pub fn read<R: BufRead>(reader: R, origin: &Path) -> Result<Self> {
        let mut nodes = Vec::new();
        for (ix, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(origin, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let node: TopicNode = serde_json::from_str(&line).map_err(|e| Error::Parse {
                path: origin.to_owned(),
                line: ix + 1,
                message: e.to_string(),
            })?;
            nodes.push(node);
        }
        Self::from_nodes(nodes)
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for node in &self.nodes {
            serde_json::to_writer(&mut out, node)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[TopicNode] {
        &self.nodes
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn ix(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownTopic(id.to_string()))
    }

    pub fn id(&self, ix: usize) -> &str {
        &self.nodes[ix].id
    }

    pub fn node(&self, id: &str) -> Result<&TopicNode> {
        Ok(&self.nodes[self.ix(id)?])
    }

    pub fn depth(&self, id: &str) -> Result<usize> {
        Ok(self.depth[self.ix(id)?])
    }

    pub fn depth_of(&self, ix: usize) -> usize {
        self.depth[ix]
    }

    pub fn max_depth(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Root-level node indices, in id order.
    pub fn root_ixs(&self) -> &[usize] {
        &self.roots
    }

    pub fn children_of(&self, ix: usize) -> &[usize] {
        &self.children[ix]
    }

    /// Indices of `ix` and every node beneath any of its positions.
    pub fn descendant_ixs(&self, ix: usize) -> Vec<usize> {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([ix]);
        seen[ix] = true;
        let mut out = Vec::new();
        while let Some(cur) = queue.pop_front() {
            out.push(cur);
            for &c in &self.children[cur] {
                if !seen[c] {
                    seen[c] = true;
                    queue.push_back(c);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Membership mask of [`descendant_ixs`](Self::descendant_ixs).
    pub fn descendant_mask(&self, ix: usize) -> Vec<bool> {
        let mut mask = vec![false; self.nodes.len()];
        for d in self.descendant_ixs(ix) {
            mask[d] = true;
        }
        mask
    }

    pub fn descendants(&self, id: &str) -> Result<BTreeSet<String>> {
        let ix = self.ix(id)?;
        Ok(self
            .descendant_ixs(ix)
            .into_iter()
            .map(|d| self.nodes[d].id.clone())
            .collect())
    }

    /// Cumulative set of topics at depth `d` or shallower.
    pub fn topics_at_depth(&self, d: usize) -> Result<BTreeSet<String>> {
        if !(1..=MAX_DEPTH).contains(&d) {
            return Err(Error::DepthOutOfRange(d));
        }
        Ok(self
            .nodes
            .iter()
            .zip(&self.depth)
            .filter(|(_, &depth)| depth <= d)
            .map(|(n, _)| n.id.clone())
            .collect())
    }

    pub fn top_ancestor_ixs(&self, ix: usize) -> &[usize] {
        &self.top[ix]
    }

    /// Root-level topic of each tree position of `id`.
    pub fn top_ancestors(&self, id: &str) -> Result<BTreeSet<String>> {
        let ix = self.ix(id)?;
        Ok(self.top[ix]
            .iter()
            .map(|&r| self.nodes[r].id.clone())
            .collect())
    }
}

pub fn load_taxonomy(path: impl AsRef<Path>) -> Result<Taxonomy> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Taxonomy::read(BufReader::new(file), path)
}

/// Unordered topic pair, canonicalized so that `a < b`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TopicPair {
    pub a: String,
    pub b: String,
    pub count: usize,
}

impl TopicPair {
    pub fn new(x: &str, y: &str, count: usize) -> Option<Self> {
        match x.cmp(y) {
            std::cmp::Ordering::Less => Some(TopicPair { a: x.into(), b: y.into(), count }),
            std::cmp::Ordering::Greater => Some(TopicPair { a: y.into(), b: x.into(), count }),
            std::cmp::Ordering::Equal => None,
        }
    }
}

/// Co-occurrence counts over both corpora, each document counted once per
/// pair.
pub fn pair_counts(store: &CorpusStore) -> BTreeMap<(String, String), usize> {
    let mut counts: BTreeMap<(String, String), usize> = BTreeMap::new();
    for doc in store.documents() {
        // topics are sorted and unique, so (i, j>i) is already canonical
        for (i, a) in doc.topics.iter().enumerate() {
            for b in &doc.topics[i + 1..] {
                *counts.entry((a.clone(), b.clone())).or_default() += 1;
            }
        }
    }
    counts
}

/// The most frequent `fraction` of co-occurring pairs, by count descending
/// then `(a, b)` ascending.
pub fn pareto_pairs(store: &CorpusStore, fraction: f64) -> Result<Vec<TopicPair>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!("pareto fraction {fraction} outside (0, 1]")));
    }
    if store.is_empty() {
        return Err(Error::Empty("document store".into()));
    }
    let mut pairs: Vec<TopicPair> = pair_counts(store)
        .into_iter()
        .map(|((a, b), count)| TopicPair { a, b, count })
        .collect();
    pairs.sort_by(|x, y| y.count.cmp(&x.count).then_with(|| (&x.a, &x.b).cmp(&(&y.a, &y.b))));
    // guard against 0.2 * 35 = 7.000000000000001
    let keep = ((fraction * pairs.len() as f64) - 1e-9).ceil().max(0.0) as usize;
    pairs.truncate(keep.min(pairs.len()));
    Ok(pairs)
}
