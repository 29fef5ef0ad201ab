//! Semantic network construction from word vectors.
//!
//! Non-cue word pairs are connected when their cosine similarity reaches
//! `tau`; pairs involving the cue word use the separate (typically lower)
//! threshold `tau_a`. Both comparisons are inclusive, so `tau = 1.0` still
//! connects exact-duplicate vectors. The fluency task can only reach nodes
//! connected to the cue, so [`SemanticNetwork::cue_component`] extracts
//! that subgraph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::VectorTable;
use crate::error::{Error, Result};

/// Undirected weighted graph over words with a designated cue node.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticNetwork {
    nodes: Vec<String>,
    index: BTreeMap<String, usize>,
    adjacency: Vec<Vec<(usize, f64)>>,
    edges: Vec<(usize, usize, f64)>,
    cue: usize,
    tau: f64,
    tau_a: f64,
}

/// Cosine similarity; `sqrt` of the squared-norm product keeps exact ratios
/// (e.g. (1,1,0)x(1,0,1)) exact.
pub fn cosine(v: &[f64], w: &[f64]) -> Result<f64> {
    if v.len() != w.len() {
        return Err(Error::DimensionMismatch(v.len(), w.len()));
    }
    let dot: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
    let nv: f64 = v.iter().map(|a| a * a).sum();
    let nw: f64 = w.iter().map(|a| a * a).sum();
    if nv == 0.0 {
        return Err(Error::ZeroVector("left operand".into()));
    }
    if nw == 0.0 {
        return Err(Error::ZeroVector("right operand".into()));
    }
    Ok(dot / (nv * nw).sqrt())
}

impl SemanticNetwork {
    /// Assembles a network from explicit parts, enforcing the structural
    /// invariants (no self-loops, thresholds respected, cue present).
    pub fn from_edges<N, E>(cue: &str, tau: f64, tau_a: f64, nodes: N, edges: E) -> Result<Self>
    where
        N: IntoIterator<Item = String>,
        E: IntoIterator<Item = (String, String, f64)>,
    {
        let mut node_set: BTreeSet<String> = nodes.into_iter().collect();
        node_set.insert(cue.to_string());
        let raw_edges: Vec<(String, String, f64)> = edges.into_iter().collect();
        for (u, v, _) in &raw_edges {
            node_set.insert(u.clone());
            node_set.insert(v.clone());
        }

        let nodes: Vec<String> = node_set.into_iter().collect();
        let index: BTreeMap<String, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let cue_idx = index[cue];

        let mut edge_list: Vec<(usize, usize, f64)> = Vec::with_capacity(raw_edges.len());
        let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (u, v, w) in raw_edges {
            let (ui, vi) = (index[&u], index[&v]);
            if ui == vi {
                return Err(Error::Validation(format!("self-loop on `{u}`")));
            }
            let key = (ui.min(vi), ui.max(vi));
            if !seen.insert(key) {
                return Err(Error::Validation(format!("duplicate edge `{u}`-`{v}`")));
            }
            let threshold = if ui == cue_idx || vi == cue_idx { tau_a } else { tau };
            if w < threshold {
                return Err(Error::Validation(format!(
                    "edge `{u}`-`{v}` weight {w} below threshold {threshold}"
                )));
            }
            edge_list.push((key.0, key.1, w));
        }
        edge_list.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut adjacency = vec![Vec::new(); nodes.len()];
        for &(u, v, w) in &edge_list {
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }
        for list in &mut adjacency {
            list.sort_by_key(|(n, _)| *n);
        }

        Ok(SemanticNetwork {
            nodes,
            index,
            adjacency,
            edges: edge_list,
            cue: cue_idx,
            tau,
            tau_a,
        })
    }

    /// Thresholded-cosine construction over `vocabulary` plus the cue.
    pub fn build(
        table: &VectorTable,
        vocabulary: &BTreeSet<String>,
        cue: &str,
        tau: f64,
        tau_a: f64,
    ) -> Result<Self> {
        if !table.contains(cue) {
            return Err(Error::CueMissing(cue.to_string()));
        }
        for w in vocabulary {
            if !table.contains(w) {
                return Err(Error::UnknownWord(w.clone()));
            }
        }
        if !(0.0..=1.0).contains(&tau) || !(0.0..=1.0).contains(&tau_a) {
            return Err(Error::Validation(format!(
                "thresholds must lie in [0, 1]: tau={tau} tau_a={tau_a}"
            )));
        }

        let mut node_set: BTreeSet<String> = vocabulary.clone();
        node_set.insert(cue.to_string());
        let nodes: Vec<String> = node_set.into_iter().collect();
        let vectors: Vec<&[f64]> = nodes
            .iter()
            .map(|n| table.get(n).expect("membership checked above"))
            .collect();
        let cue_idx = nodes.iter().position(|n| n == cue).expect("cue inserted");

        let edges: Vec<(usize, usize, f64)> = (0..nodes.len())
            .into_par_iter()
            .map(|u| {
                let mut local = Vec::new();
                for v in (u + 1)..nodes.len() {
                    let sim = cosine(vectors[u], vectors[v])?;
                    let threshold = if u == cue_idx || v == cue_idx { tau_a } else { tau };
                    if sim >= threshold {
                        local.push((u, v, sim));
                    }
                }
                Ok(local)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();

        let index: BTreeMap<String, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for &(u, v, w) in &edges {
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }
        for list in &mut adjacency {
            list.sort_by_key(|(n, _)| *n);
        }

        Ok(SemanticNetwork {
            nodes,
            index,
            adjacency,
            edges,
            cue: cue_idx,
            tau,
            tau_a,
        })
    }

    pub fn cue(&self) -> &str {
        &self.nodes[self.cue]
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn tau_a(&self) -> f64 {
        self.tau_a
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Node names in sorted order.
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn degree(&self, word: &str) -> Option<usize> {
        self.index.get(word).map(|&i| self.adjacency[i].len())
    }

    /// Neighbors with weights, sorted by neighbor name.
    pub fn neighbors(&self, word: &str) -> Option<Vec<(&str, f64)>> {
        self.index.get(word).map(|&i| {
            self.adjacency[i]
                .iter()
                .map(|&(n, w)| (self.nodes[n].as_str(), w))
                .collect()
        })
    }

    pub fn has_edge(&self, u: &str, v: &str) -> bool {
        self.weight(u, v).is_some()
    }

    pub fn weight(&self, u: &str, v: &str) -> Option<f64> {
        let (ui, vi) = (*self.index.get(u)?, *self.index.get(v)?);
        self.adjacency[ui]
            .iter()
            .find(|(n, _)| *n == vi)
            .map(|(_, w)| *w)
    }

    /// Edges as (u, v, weight) with u < v lexicographically.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.edges
            .iter()
            .map(|&(u, v, w)| (self.nodes[u].as_str(), self.nodes[v].as_str(), w))
    }

    pub(crate) fn cue_index(&self) -> usize {
        self.cue
    }

    pub(crate) fn adjacency(&self) -> &[Vec<(usize, f64)>] {
        &self.adjacency
    }

    pub(crate) fn node_name(&self, idx: usize) -> &str {
        &self.nodes[idx]
    }

    /// Induced subgraph on all nodes reachable from the cue.
    pub fn cue_component(&self) -> SemanticNetwork {
        let mut reach = vec![false; self.nodes.len()];
        reach[self.cue] = true;
        let mut queue = VecDeque::from([self.cue]);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if !reach[v] {
                    reach[v] = true;
                    queue.push_back(v);
                }
            }
        }
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(i, _)| reach[*i])
            .map(|(_, n)| n.clone());
        let edges = self
            .edges
            .iter()
            .filter(|(u, v, _)| reach[*u] && reach[*v])
            .map(|&(u, v, w)| (self.nodes[u].clone(), self.nodes[v].clone(), w));
        SemanticNetwork::from_edges(self.cue().to_string().as_str(), self.tau, self.tau_a, nodes, edges)
            .expect("subgraph of a valid network is valid")
    }

    /// Connected components as sorted node sets; with `exclude_cue` the cue
    /// node and its edges are removed first.
    pub fn components(&self, exclude_cue: bool) -> Vec<BTreeSet<String>> {
        let skip = |i: usize| exclude_cue && i == self.cue;
        let mut seen = vec![false; self.nodes.len()];
        let mut out = Vec::new();
        for start in 0..self.nodes.len() {
            if seen[start] || skip(start) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(u) = queue.pop_front() {
                comp.insert(self.nodes[u].clone());
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v] && !skip(v) {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            out.push(comp);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Edge-list CSV serialization
// ---------------------------------------------------------------------------

/// `# cue=.. tau=.. tau_a=..` metadata line, `# node <name>` lines for
/// isolated nodes, then `u,v,weight` rows at 6 decimals.
pub fn write_network(net: &SemanticNetwork) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# cue={} tau={:.6} tau_a={:.6}",
        net.cue(),
        net.tau(),
        net.tau_a()
    );
    for (i, node) in net.nodes.iter().enumerate() {
        if net.adjacency[i].is_empty() {
            let _ = writeln!(out, "# node {node}");
        }
    }
    out.push_str("u,v,weight\n");
    for (u, v, w) in net.edges() {
        let _ = writeln!(out, "{u},{v},{w:.6}");
    }
    out
}

pub fn parse_network(path: impl AsRef<Path>) -> Result<SemanticNetwork> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_network_str(&text, path)
}

pub fn parse_network_str(text: &str, path: impl AsRef<Path>) -> Result<SemanticNetwork> {
    let path = path.as_ref();
    let mut cue: Option<String> = None;
    let mut tau: Option<f64> = None;
    let mut tau_a: Option<f64> = None;
    let mut nodes: Vec<String> = Vec::new();
    let mut edges: Vec<(String, String, f64)> = Vec::new();
    let mut saw_header = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let meta = meta.trim();
            if let Some(name) = meta.strip_prefix("node ") {
                nodes.push(name.trim().to_string());
            } else {
                for field in meta.split_whitespace() {
                    let Some((key, value)) = field.split_once('=') else {
                        return Err(Error::parse(path, lineno, format!("bad metadata field `{field}`")));
                    };
                    match key {
                        "cue" => cue = Some(value.to_string()),
                        "tau" => {
                            tau = Some(value.parse().map_err(|_| {
                                Error::parse(path, lineno, format!("bad tau `{value}`"))
                            })?)
                        }
                        "tau_a" => {
                            tau_a = Some(value.parse().map_err(|_| {
                                Error::parse(path, lineno, format!("bad tau_a `{value}`"))
                            })?)
                        }
                        other => {
                            return Err(Error::parse(path, lineno, format!("unknown metadata key `{other}`")))
                        }
                    }
                }
            }
            continue;
        }
        if !saw_header {
            if line != "u,v,weight" {
                return Err(Error::parse(path, lineno, "expected `u,v,weight` header"));
            }
            saw_header = true;
            continue;
        }
        let mut fields = line.split(',');
        let (u, v, w) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(u), Some(v), Some(w), None) => (u.trim(), v.trim(), w.trim()),
            _ => return Err(Error::parse(path, lineno, "expected `u,v,weight` row")),
        };
        let w: f64 = w
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("bad weight `{w}`")))?;
        edges.push((u.to_string(), v.to_string(), w));
    }

    let cue = cue.ok_or_else(|| Error::parse(path, 1, "missing `# cue=...` metadata line"))?;
    let tau = tau.ok_or_else(|| Error::parse(path, 1, "missing tau metadata"))?;
    let tau_a = tau_a.ok_or_else(|| Error::parse(path, 1, "missing tau_a metadata"))?;
    SemanticNetwork::from_edges(&cue, tau, tau_a, nodes, edges)
}
