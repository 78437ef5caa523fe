//! Rooted planar trees and their sequence encodings.
//!
//! Nodes are numbered by lexicographic first-visit order (node 0 is the root),
//! and corners by the position of the depth-first walk around the tree, so a
//! tree with `n` edges has corners `0..=2n` with corner `2n` equal to corner 0.

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// A rooted planar tree stored as flat arrays.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlanarTree {
    parent: Vec<usize>,
    child_offsets: Vec<usize>,
    child_list: Vec<usize>,
}

impl PlanarTree {
    /// Builds a tree from a parent array in lexicographic node order.
    /// `parent[0]` is a sentinel and is ignored.
    pub fn from_parents(parent: Vec<usize>) -> Result<Self> {
        if parent.is_empty() {
            return Err(Error::InvalidTree("empty parent array".into()));
        }
        let nodes = parent.len();
        let mut depth = vec![0usize; nodes];
        // Lexicographic order means the parent of k is seen before k and k
        // continues the depth-first walk from the current path.
        let mut path: Vec<usize> = vec![0];
        for k in 1..nodes {
            let p = parent[k];
            if p >= k {
                return Err(Error::InvalidTree(format!("parent of node {k} is {p}")));
            }
            while let Some(&top) = path.last() {
                if top == p {
                    break;
                }
                path.pop();
            }
            if path.is_empty() {
                return Err(Error::InvalidTree(format!(
                    "node {k} is not in depth-first order"
                )));
            }
            depth[k] = depth[p] + 1;
            path.push(k);
        }
        let mut counts = vec![0usize; nodes + 1];
        for &p in &parent[1..] {
            counts[p + 1] += 1;
        }
        for i in 0..nodes {
            counts[i + 1] += counts[i];
        }
        let child_offsets = counts.clone();
        let mut fill = counts;
        let mut child_list = vec![0usize; nodes - 1];
        for (k, &p) in parent.iter().enumerate().skip(1) {
            child_list[fill[p]] = k;
            fill[p] += 1;
        }
        let mut parent = parent;
        parent[0] = 0;
        Ok(PlanarTree {
            parent,
            child_offsets,
            child_list,
        })
    }

    pub fn single_node() -> Self {
        PlanarTree::from_parents(vec![0]).expect("single node is a tree")
    }

    pub fn n_edges(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn n_nodes(&self) -> usize {
        self.parent.len()
    }

    /// Parent of a non-root node; `None` for the root.
    pub fn parent(&self, k: usize) -> Option<usize> {
        (k != 0).then(|| self.parent[k])
    }

    pub fn parents(&self) -> &[usize] {
        &self.parent
    }

    pub fn children(&self, k: usize) -> &[usize] {
        &self.child_list[self.child_offsets[k]..self.child_offsets[k + 1]]
    }

    pub fn degree(&self, k: usize) -> usize {
        self.children(k).len() + usize::from(k != 0)
    }

    /// Undirected edges as `(parent, child)` pairs.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.n_nodes()).map(move |k| (self.parent[k], k))
    }
}

/// Depths of the nodes in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HeightSeq(Vec<i64>);

/// The contour walk of a tree, as values (not steps).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyckPath(Vec<i64>);

/// A corner-indexed label process.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelSeq(Vec<i64>);

impl HeightSeq {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        if values.first() != Some(&0) {
            return Err(Error::InvalidHeight("must start at 0".into()));
        }
        for i in 1..values.len() {
            if values[i] <= 0 {
                return Err(Error::InvalidHeight(format!("H({i}) = {} <= 0", values[i])));
            }
            if values[i] - values[i - 1] > 1 {
                return Err(Error::InvalidHeight(format!("increment > 1 at {i}")));
            }
        }
        Ok(HeightSeq(values))
    }

    /// Number of edges of the encoded tree.
    pub fn n_edges(&self) -> usize {
        self.0.len() - 1
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<i64> {
        self.0
    }
}

impl DyckPath {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        let len = values.len();
        if len.is_multiple_of(2) {
            return Err(Error::InvalidDyck(format!("length {len} is not odd")));
        }
        if values[0] != 0 || values[len - 1] != 0 {
            return Err(Error::InvalidDyck("must start and end at 0".into()));
        }
        for i in 1..len {
            if values[i] < 0 {
                return Err(Error::InvalidDyck(format!("negative at {i}")));
            }
            if (values[i] - values[i - 1]).abs() != 1 {
                return Err(Error::InvalidDyck(format!("step at {i} is not +-1")));
            }
        }
        Ok(DyckPath(values))
    }

    pub(crate) fn from_vec_unchecked(values: Vec<i64>) -> Self {
        DyckPath(values)
    }

    /// Builds a path from its `+1`/`-1` steps, given as booleans (`true` = up).
    pub fn from_steps(steps: &[bool]) -> Result<Self> {
        let mut values = Vec::with_capacity(steps.len() + 1);
        values.push(0);
        let mut h = 0i64;
        for &up in steps {
            h += if up { 1 } else { -1 };
            values.push(h);
        }
        DyckPath::new(values)
    }

    /// Number of edges of the encoded tree (half the number of steps).
    pub fn n_edges(&self) -> usize {
        (self.0.len() - 1) / 2
    }

    /// Number of corners, `2 * n_edges`.
    pub fn n_corners(&self) -> usize {
        self.0.len() - 1
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<i64> {
        self.0
    }

    pub fn is_up(&self, step: usize) -> bool {
        self.0[step + 1] > self.0[step]
    }
}

impl LabelSeq {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        let len = values.len();
        if len == 0 {
            return Err(Error::InvalidLabels("empty".into()));
        }
        if values[0] != 0 || values[len - 1] != 0 {
            return Err(Error::InvalidLabels("must start and end at 0".into()));
        }
        for i in 1..len {
            if (values[i] - values[i - 1]).abs() > 1 {
                return Err(Error::InvalidLabels(format!("increment at {i} exceeds 1")));
            }
        }
        Ok(LabelSeq(values))
    }

    pub(crate) fn from_vec_unchecked(values: Vec<i64>) -> Self {
        LabelSeq(values)
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    /// `N` such that the sequence is indexed by `0..=N`.
    pub fn span(&self) -> usize {
        self.0.len() - 1
    }

    pub fn into_vec(self) -> Vec<i64> {
        self.0
    }

    /// Checks that corners visiting the same node of `contour` carry equal labels.
    pub fn check_corner_consistency(&self, contour: &DyckPath) -> Result<()> {
        if self.0.len() != contour.0.len() {
            return Err(Error::LengthMismatch {
                left: self.0.len(),
                right: contour.0.len(),
            });
        }
        let nodes = corner_nodes(contour);
        let mut seen = vec![None; contour.n_edges() + 1];
        for (k, &node) in nodes.iter().enumerate() {
            match seen[node] {
                None => seen[node] = Some(self.0[k]),
                Some(l) if l != self.0[k] => {
                    return Err(Error::InvalidLabels(format!(
                        "node {node} carries labels {l} and {}",
                        self.0[k]
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

pub fn tree_to_height(t: &PlanarTree) -> HeightSeq {
    let mut h = vec![0i64; t.n_nodes()];
    for k in 1..t.n_nodes() {
        h[k] = h[t.parent[k]] + 1;
    }
    HeightSeq(h)
}

/// Inverse of [`tree_to_height`]: the parent of node `k` is the last earlier
/// node one level up.
pub fn height_to_tree(h: &HeightSeq) -> Result<PlanarTree> {
    let h = HeightSeq::new(h.0.clone())?;
    let mut parent = vec![0usize; h.0.len()];
    // last[d] = most recent node seen at depth d
    let mut last: Vec<usize> = vec![0];
    for k in 1..h.0.len() {
        let d = h.0[k] as usize;
        parent[k] = last[d - 1];
        last.truncate(d);
        last.push(k);
    }
    PlanarTree::from_parents(parent)
}

pub fn tree_to_contour(t: &PlanarTree) -> DyckPath {
    height_to_contour_unchecked(&tree_to_height(t))
}

pub fn contour_to_tree(c: &DyckPath) -> Result<PlanarTree> {
    height_to_tree(&contour_to_height(c))
}

pub fn height_to_contour(h: &HeightSeq) -> Result<DyckPath> {
    let h = HeightSeq::new(h.0.clone())?;
    Ok(height_to_contour_unchecked(&h))
}

pub(crate) fn height_to_contour_unchecked(h: &HeightSeq) -> DyckPath {
    let n = h.n_edges();
    let mut c = Vec::with_capacity(2 * n + 1);
    c.push(0i64);
    let mut cur = 0i64;
    for &target in &h.0[1..] {
        while cur >= target {
            cur -= 1;
            c.push(cur);
        }
        cur += 1;
        c.push(cur);
    }
    while cur > 0 {
        cur -= 1;
        c.push(cur);
    }
    DyckPath(c)
}

/// Heights reached by the up-steps of the contour, in order.
pub fn contour_to_height(c: &DyckPath) -> HeightSeq {
    let mut h = Vec::with_capacity(c.n_edges() + 1);
    h.push(0);
    for w in c.0.windows(2) {
        if w[1] > w[0] {
            h.push(w[1]);
        }
    }
    HeightSeq(h)
}

/// Node index (lexicographic rank) of every corner `0..=2n`.
pub fn corner_nodes(c: &DyckPath) -> Vec<usize> {
    let mut out = Vec::with_capacity(c.0.len());
    let mut stack: Vec<usize> = vec![0];
    let mut next = 1usize;
    out.push(0);
    for w in c.0.windows(2) {
        if w[1] > w[0] {
            stack.push(next);
            next += 1;
        } else {
            stack.pop();
        }
        out.push(*stack.last().expect("contour stays nonnegative"));
    }
    out
}

/// Discrete conjugation: rotate the labels at their first minimum and shift
/// them up by one. Returns the new height sequence and the rotation index.
pub fn conjugate_labels(l: &LabelSeq) -> Result<(HeightSeq, usize)> {
    let l = LabelSeq::new(l.0.clone())?;
    let n = l.span();
    if n == 0 {
        return Ok((HeightSeq(vec![0]), 0));
    }
    Ok(conjugate_unchecked(&l.0))
}

pub(crate) fn conjugate_unchecked(l: &[i64]) -> (HeightSeq, usize) {
    let n = l.len() - 1;
    let mut a = 0usize;
    for k in 1..n {
        if l[k] < l[a] {
            a = k;
        }
    }
    let base = l[a];
    let mut h = Vec::with_capacity(n + 1);
    h.push(0);
    for j in 1..=n {
        h.push(1 + l[(a + j - 1) % n] - base);
    }
    (HeightSeq(h), a)
}

/// Smallest contour index visiting node `k`, equal to `2k - H(k)`.
pub fn first_corner(h: &HeightSeq, k: usize) -> Result<usize> {
    if k > h.n_edges() {
        return Err(Error::OutOfRange {
            index: k,
            max: h.n_edges(),
        });
    }
    Ok(2 * k - h.0[k] as usize)
}

pub fn first_corners(h: &HeightSeq) -> Vec<usize> {
    h.0.iter()
        .enumerate()
        .map(|(k, &hk)| 2 * k - hk as usize)
        .collect()
}

/// Graph distance between the nodes owning corners `k` and `k2`.
pub fn tree_distance(c: &DyckPath, k: usize, k2: usize) -> Result<u64> {
    let max = c.0.len() - 1;
    for idx in [k, k2] {
        if idx > max {
            return Err(Error::OutOfRange { index: idx, max });
        }
    }
    let (lo, hi) = if k <= k2 { (k, k2) } else { (k2, k) };
    let min = c.0[lo..=hi].iter().copied().min().expect("nonempty range");
    Ok((c.0[k] + c.0[k2] - 2 * min) as u64)
}

/// Rotates the contour increments by `a`, which must be a root corner.
pub fn reroot_tree(c: &DyckPath, a: usize) -> Result<DyckPath> {
    let len = c.n_corners();
    if len == 0 && a == 0 {
        return Ok(c.clone());
    }
    if a >= len {
        return Err(Error::OutOfRange {
            index: a,
            max: len.saturating_sub(1),
        });
    }
    if c.0[a] != 0 {
        return Err(Error::NotRootCorner(a));
    }
    let values = (0..=len).map(|k| c.0[(a + k) % len]).collect();
    Ok(DyckPath(values))
}

/// Contour of the same plane tree rerooted at an arbitrary corner `a`.
pub fn reroot_at_corner(c: &DyckPath, a: usize) -> Result<DyckPath> {
    let len = c.n_corners();
    if len == 0 {
        return Ok(c.clone());
    }
    if a >= len {
        return Err(Error::OutOfRange {
            index: a,
            max: len - 1,
        });
    }
    let nodes = corner_nodes(c);
    let tree = contour_to_tree(c)?;
    let dist = tree_bfs(&tree, nodes[a]);
    let values = (0..=len).map(|k| dist[nodes[(a + k) % len]] as i64).collect();
    Ok(DyckPath(values))
}

fn tree_bfs(t: &PlanarTree, source: usize) -> Vec<u64> {
    let mut dist = vec![u64::MAX; t.n_nodes()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let next = t.children(v).iter().copied().chain(t.parent(v));
        for w in next {
            if dist[w] == u64::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Distance between the pointed classes of two discrete tours: the smallest
/// sup-norm discrepancy over all rerootings of the second tour at a corner of
/// its root vertex, contour and label components summed.
pub fn pointed_distance(tour1: (&DyckPath, &LabelSeq), tour2: (&DyckPath, &LabelSeq)) -> Result<u64> {
    let (c1, l1) = tour1;
    let (c2, l2) = tour2;
    for (c, l) in [(c1, l1), (c2, l2)] {
        if c.0.len() != l.0.len() {
            return Err(Error::LengthMismatch {
                left: c.0.len(),
                right: l.0.len(),
            });
        }
    }
    if c1.0.len() != c2.0.len() {
        return Err(Error::LengthMismatch {
            left: c1.0.len(),
            right: c2.0.len(),
        });
    }
    let len = c1.n_corners();
    if len == 0 {
        return Ok(l1.0[0].abs_diff(l2.0[0]));
    }
    let mut best = u64::MAX;
    for a in (0..len).filter(|&a| c2.0[a] == 0) {
        let mut dc = 0u64;
        let mut dl = 0u64;
        for k in 0..=len {
            let j = (a + k) % len;
            dc = dc.max(c1.0[k].abs_diff(c2.0[j]));
            dl = dl.max(l1.0[k].abs_diff(l2.0[j] - l2.0[a]));
        }
        best = best.min(dc + dl);
    }
    Ok(best)
}

/// Writes one layer in the process dump format: `# layer=<j> n=<n>` followed
/// by `idx,C,L` rows.
pub fn write_process_csv<W: Write>(
    mut out: W,
    layer: usize,
    n: usize,
    contour: &DyckPath,
    labels: &LabelSeq,
) -> std::io::Result<()> {
    writeln!(out, "# layer={layer} n={n}")?;
    for (k, (c, l)) in contour.0.iter().zip(&labels.0).enumerate() {
        writeln!(out, "{k},{c},{l}")?;
    }
    Ok(())
}

/// Parses a process dump. Comment lines other than the layer header are skipped.
pub fn read_process_csv<R: BufRead>(input: R) -> Result<(usize, usize, DyckPath, LabelSeq)> {
    let mut header = None;
    let mut contour = Vec::new();
    let mut labels = Vec::new();
    for line in input.lines() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(parsed) = parse_layer_header(rest) {
                header = Some(parsed);
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("expected idx,C,L: {line}")));
        }
        let parse = |s: &str| s.trim().parse::<i64>().map_err(|e| Error::Parse(e.to_string()));
        let idx = parse(fields[0])?;
        if idx != contour.len() as i64 {
            return Err(Error::Parse(format!("row index {idx} out of sequence")));
        }
        contour.push(parse(fields[1])?);
        labels.push(parse(fields[2])?);
    }
    let (layer, n) = header.ok_or_else(|| Error::Parse("missing layer header".into()))?;
    Ok((layer, n, DyckPath::new(contour)?, LabelSeq::new(labels)?))
}

fn parse_layer_header(s: &str) -> Option<(usize, usize)> {
    let mut layer = None;
    let mut n = None;
    for tok in s.split_whitespace() {
        if let Some(v) = tok.strip_prefix("layer=") {
            layer = v.parse().ok();
        } else if let Some(v) = tok.strip_prefix("n=") {
            n = v.parse().ok();
        }
    }
    Some((layer?, n?))
}
