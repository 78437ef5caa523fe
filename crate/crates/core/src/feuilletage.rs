//! The discrete feuilletage: the top tree of an iterated snake with its nodes
//! identified level by level through the corner/node correspondence.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use crate::cvs::{cvs_from_corners, Quadrangulation};
use crate::encodings::corner_nodes;
use crate::error::{Error, Result};
use crate::sampling::{IteratedSnake, Seed};

/// Node `i >= 1` of layer `level` corresponds to corner `corners[i - 1]` of
/// layer `level - 1`; the root of layer `level` is new.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CornerNodeMap {
    pub level: usize,
    pub corners: Vec<usize>,
}

impl CornerNodeMap {
    /// Corner of layer `level - 1` for node `i`, `None` for the root.
    pub fn corner(&self, i: usize) -> Option<usize> {
        i.checked_sub(1).map(|k| self.corners[k])
    }
}

pub fn corner_node_map(snake: &IteratedSnake, j: usize) -> Result<CornerNodeMap> {
    if j < 2 || j > snake.depth() {
        return Err(Error::OutOfRange {
            index: j,
            max: snake.depth(),
        });
    }
    let m = snake.layers[j - 2].contour.n_corners();
    let a = snake.layers[j - 1].shift_a;
    Ok(CornerNodeMap {
        level: j,
        corners: (1..=m).map(|i| (a + i - 1) % m).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feuilletage {
    pub n: usize,
    pub depth: usize,
    /// Class of every node of the top tree, dense, numbered by first node.
    pub class_of: Vec<u32>,
    pub n_classes: usize,
    /// One class pair per edge of the top tree, `(parent, child)`.
    pub edges: Vec<(u32, u32)>,
    /// Class of the top tree's root; always 0.
    pub root_class: u32,
    /// Class of each layer's root, layer 1 first.
    pub layer_roots: Vec<u32>,
}

/// Identifies the nodes of the top tree: a non-root node of layer `j` joins
/// the class of the layer `j - 1` node owning its corner.
pub fn build_feuilletage(snake: &IteratedSnake) -> Result<Feuilletage> {
    snake.check_consistency()?;
    Ok(build_unchecked(snake))
}

pub(crate) fn build_unchecked(snake: &IteratedSnake) -> Feuilletage {
    let d = snake.depth();
    let base = &snake.layers[0];
    // raw classes of the current layer's nodes; layer 1 nodes are their own class
    let mut class: Vec<u32> = (0..=base.n_edges() as u32).collect();
    let mut count = class.len() as u32;
    let mut raw_roots = vec![0u32];
    for j in 2..=d {
        let lower = &snake.layers[j - 2];
        let upper = &snake.layers[j - 1];
        let m = lower.contour.n_corners();
        let a = upper.shift_a;
        let nodes = corner_nodes(&lower.contour);
        let mut next = Vec::with_capacity(m + 1);
        next.push(count);
        raw_roots.push(count);
        next.extend((1..=m).map(|i| class[nodes[(a + i - 1) % m]]));
        count += 1;
        class = next;
    }
    // renumber by first appearance in the top tree, so its root is class 0
    let mut dense = vec![u32::MAX; count as usize];
    let mut next_id = 0u32;
    for c in class.iter_mut() {
        let slot = &mut dense[*c as usize];
        if *slot == u32::MAX {
            *slot = next_id;
            next_id += 1;
        }
        *c = *slot;
    }
    let top = &snake.layers[d - 1].contour;
    let vals = top.values();
    let mut edges = Vec::with_capacity(top.n_edges());
    let mut stack: Vec<u32> = vec![0];
    let mut node = 0usize;
    for w in vals.windows(2) {
        if w[1] > w[0] {
            node += 1;
            let child = class[node];
            edges.push((*stack.last().expect("root on stack"), child));
            stack.push(child);
        } else {
            stack.pop();
        }
    }
    let layer_roots = raw_roots.iter().map(|&r| dense[r as usize]).collect();
    Feuilletage {
        n: snake.n,
        depth: d,
        class_of: class,
        n_classes: next_id as usize,
        edges,
        root_class: 0,
        layer_roots,
    }
}

/// The quadrangulation built from layer `j`'s tree and labels, `1 <= j < D`.
pub fn build_layer_quadrangulation(snake: &IteratedSnake, j: usize) -> Result<Quadrangulation> {
    Ok(build_layer_quadrangulation_with_nodes(snake, j)?.0)
}

/// As [`build_layer_quadrangulation`], also returning the map vertex of every
/// node of layer `j`.
pub fn build_layer_quadrangulation_with_nodes(
    snake: &IteratedSnake,
    j: usize,
) -> Result<(Quadrangulation, Vec<usize>)> {
    if j == 0 || j >= snake.depth() {
        return Err(Error::OutOfRange {
            index: j,
            max: snake.depth().saturating_sub(1),
        });
    }
    let layer = &snake.layers[j - 1];
    layer.labels.check_corner_consistency(&layer.contour)?;
    Ok(cvs_from_corners(&layer.contour, layer.labels.values(), false))
}

/// Edge list of the quotient graph; with `simplify`, loops are dropped and
/// parallel edges merged (each kept once as `(min, max)`, sorted).
pub fn export_quotient_graph(f: &Feuilletage, simplify: bool) -> Vec<(u32, u32)> {
    if !simplify {
        return f.edges.clone();
    }
    let set: BTreeSet<(u32, u32)> = f
        .edges
        .iter()
        .filter(|(u, v)| u != v)
        .map(|&(u, v)| (u.min(v), u.max(v)))
        .collect();
    set.into_iter().collect()
}

pub fn write_edge_list<W: Write>(
    mut out: W,
    f: &Feuilletage,
    seed: Seed,
    simplify: bool,
) -> std::io::Result<()> {
    writeln!(out, "# feuilletage n={} D={} seed={}", f.n, f.depth, seed)?;
    for (u, v) in export_quotient_graph(f, simplify) {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

/// Reads an edge list; returns the vertex count (largest id + 1) and edges.
pub fn read_edge_list<R: BufRead>(input: R) -> Result<(usize, Vec<(u32, u32)>)> {
    let mut edges = Vec::new();
    let mut vertices = 0usize;
    for line in input.lines() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut it = t.split_whitespace().map(str::parse::<u32>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(u)), Some(Ok(v)), None) => {
                vertices = vertices.max(u.max(v) as usize + 1);
                edges.push((u, v));
            }
            _ => return Err(Error::Parse(format!("bad edge line {t:?}"))),
        }
    }
    Ok((vertices, edges))
}
