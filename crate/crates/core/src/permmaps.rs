//! Combinatorial maps as permutation pairs, non-crossing partitions, and the
//! nested non-crossing permutation encoding of iterated feuilletages.

use std::collections::VecDeque;
use std::fmt;

use crate::encodings::{corner_nodes, first_corners, DyckPath, HeightSeq};
use crate::error::{Error, Result};
use crate::sampling::IteratedSnake;
use crate::unionfind::UnionFind;

/// A permutation of `0..len` in one-line form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(len: usize) -> Self {
        Permutation((0..len).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &x in &images {
            if x >= images.len() || std::mem::replace(&mut seen[x], true) {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a bijection"
                )));
            }
        }
        Ok(Permutation(images))
    }

    /// Builds a permutation of `0..len` from disjoint cycles; unlisted
    /// elements are fixed.
    pub fn from_cycles(len: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<usize> = (0..len).collect();
        let mut seen = vec![false; len];
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                if x >= len || std::mem::replace(&mut seen[x], true) {
                    return Err(Error::InvalidPermutation(format!(
                        "element {x} repeated or out of range"
                    )));
                }
                images[x] = cycle[(i + 1) % cycle.len()];
            }
        }
        Ok(Permutation(images))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (x, &y) in self.0.iter().enumerate() {
            inv[y] = x;
        }
        Permutation(inv)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Self {
        Permutation(other.0.iter().map(|&y| self.0[y]).collect())
    }

    /// Disjoint cycles, each starting at its smallest element, ordered by it.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.0.len()];
        let mut out = Vec::new();
        for start in 0..self.0.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x);
                x = self.0[x];
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_count(&self) -> usize {
        let mut seen = vec![false; self.0.len()];
        let mut count = 0;
        for start in 0..self.0.len() {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.0[x];
            }
        }
        count
    }

    pub fn is_fixed_point_free_involution(&self) -> bool {
        self.0
            .iter()
            .enumerate()
            .all(|(x, &y)| y != x && self.0[y] == x)
    }

    /// Parses cycle notation over `0..len`.
    pub fn parse(len: usize, text: &str) -> Result<Self> {
        Permutation::from_cycles(len, &parse_cycles(text)?)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_cycles(f, &self.cycles())
    }
}

/// Formats cycles as `(a,b,c)(d)...`.
pub fn format_cycles(cycles: &[Vec<usize>]) -> String {
    struct Cycles<'a>(&'a [Vec<usize>]);
    impl fmt::Display for Cycles<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write_cycles(f, self.0)
        }
    }
    Cycles(cycles).to_string()
}

fn write_cycles(f: &mut fmt::Formatter<'_>, cycles: &[Vec<usize>]) -> fmt::Result {
    for cycle in cycles {
        f.write_str("(")?;
        for (i, x) in cycle.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")?;
    }
    Ok(())
}

/// Parses `(a,b,c)(d)...`; whitespace is ignored.
pub fn parse_cycles(text: &str) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::Parse(format!("expected '(' at {rest:?}")))?;
        let close = body
            .find(')')
            .ok_or_else(|| Error::Parse("unclosed cycle".into()))?;
        let cycle = body[..close]
            .split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|e| Error::Parse(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        out.push(cycle);
        rest = body[close + 1..].trim_start();
    }
    Ok(out)
}

/// A combinatorial map: vertices are cycles of `sigma`, edges cycles of
/// `alpha`, faces cycles of `sigma ∘ alpha`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CombMap {
    pub sigma: Permutation,
    pub alpha: Permutation,
    pub root_dart: Option<usize>,
}

impl CombMap {
    pub fn new(sigma: Permutation, alpha: Permutation, root_dart: Option<usize>) -> Result<Self> {
        if sigma.len() != alpha.len() {
            return Err(Error::InvalidMap("sigma and alpha sizes differ".into()));
        }
        if !alpha.is_fixed_point_free_involution() {
            return Err(Error::InvalidMap("alpha is not a fixed-point-free involution".into()));
        }
        if let Some(r) = root_dart {
            if r >= sigma.len() {
                return Err(Error::InvalidMap(format!("root dart {r} out of range")));
            }
        }
        let map = CombMap {
            sigma,
            alpha,
            root_dart,
        };
        if !map.is_connected() {
            return Err(Error::InvalidMap("darts are not transitively connected".into()));
        }
        Ok(map)
    }

    pub fn n_darts(&self) -> usize {
        self.sigma.len()
    }

    pub fn n_edges(&self) -> usize {
        self.sigma.len() / 2
    }

    fn is_connected(&self) -> bool {
        let n = self.n_darts();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(d) = stack.pop() {
            for e in [self.sigma.apply(d), self.alpha.apply(d)] {
                if !seen[e] {
                    seen[e] = true;
                    count += 1;
                    stack.push(e);
                }
            }
        }
        count == n
    }

    pub fn vertices(&self) -> Vec<Vec<usize>> {
        self.sigma.cycles()
    }

    pub fn faces(&self) -> Vec<Vec<usize>> {
        self.sigma.compose(&self.alpha).cycles()
    }

    /// Vertex id of each dart; vertices numbered by their smallest dart.
    pub fn vertex_of_dart(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_darts()];
        for (v, cycle) in self.vertices().iter().enumerate() {
            for &d in cycle {
                out[d] = v;
            }
        }
        out
    }

    /// One `(u, v)` pair per edge, oriented from the smaller dart.
    pub fn graph_edges(&self) -> Vec<(usize, usize)> {
        let vod = self.vertex_of_dart();
        (0..self.n_darts())
            .filter(|&d| d < self.alpha.apply(d))
            .map(|d| (vod[d], vod[self.alpha.apply(d)]))
            .collect()
    }

    /// New name of every dart in breadth-first order from `root`, following
    /// `sigma` then `alpha`.
    pub fn bfs_labels(&self, root: usize) -> Vec<usize> {
        let n = self.n_darts();
        let mut label = vec![usize::MAX; n];
        let mut queue = VecDeque::from([root]);
        label[root] = 0;
        let mut next = 1;
        while let Some(d) = queue.pop_front() {
            for e in [self.sigma.apply(d), self.alpha.apply(d)] {
                if label[e] == usize::MAX {
                    label[e] = next;
                    next += 1;
                    queue.push_back(e);
                }
            }
        }
        label
    }

    /// `(sigma, alpha)` images after relabeling darts by [`Self::bfs_labels`].
    /// Two connected maps rooted at darts are isomorphic iff these agree.
    pub fn canonical_form(&self, root: usize) -> (Vec<usize>, Vec<usize>) {
        let label = self.bfs_labels(root);
        let n = self.n_darts();
        let mut sigma = vec![0; n];
        let mut alpha = vec![0; n];
        for d in 0..n {
            sigma[label[d]] = label[self.sigma.apply(d)];
            alpha[label[d]] = label[self.alpha.apply(d)];
        }
        (sigma, alpha)
    }

    /// The map of a plane tree: dart `k` is the contour step `k`, leaving
    /// corner `k`; the single face is the contour. Rooted at dart 0.
    pub fn from_tree(contour: &DyckPath) -> CombMap {
        let m = contour.n_corners();
        let vals = contour.values();
        let mut alpha = vec![0usize; m];
        let mut open: Vec<usize> = Vec::new();
        for k in 0..m {
            if vals[k + 1] > vals[k] {
                open.push(k);
            } else {
                let up = open.pop().expect("valid Dyck path");
                alpha[up] = k;
                alpha[k] = up;
            }
        }
        let sigma = (0..m).map(|d| (alpha[d] + 1) % m).collect();
        CombMap {
            sigma: Permutation(sigma),
            alpha: Permutation(alpha),
            root_dart: (m > 0).then_some(0),
        }
    }

    /// Glues corners of the map: each cycle `(e1, e2, ...)` of darts merges
    /// the corners entered just before `e1, e2, ...` into one vertex, the
    /// rotation passing from the corner before `e_i` into `e_{i+1}`.
    pub fn glue_corners(&self, cycles: &[Vec<usize>]) -> Result<CombMap> {
        let g = Permutation::from_cycles(self.n_darts(), cycles)?;
        CombMap::new(g.compose(&self.sigma), self.alpha.clone(), self.root_dart)
    }
}

/// Faces (cycles of `sigma ∘ alpha`) and genus from `V - E + F = 2 - 2g`.
pub fn map_faces_and_genus(m: &CombMap) -> Result<(Vec<Vec<usize>>, usize)> {
    if !m.alpha.is_fixed_point_free_involution() {
        return Err(Error::InvalidMap("alpha is not a fixed-point-free involution".into()));
    }
    if !m.is_connected() {
        return Err(Error::InvalidMap("map is disconnected".into()));
    }
    let faces = m.faces();
    let v = m.sigma.cycle_count() as i64;
    let e = m.n_edges() as i64;
    let f = faces.len() as i64;
    let twice_genus = 2 - (v - e + f);
    if twice_genus < 0 || twice_genus % 2 != 0 {
        return Err(Error::InvalidMap(format!("Euler characteristic {} is invalid", v - e + f)));
    }
    Ok((faces, (twice_genus / 2) as usize))
}

/// A partition of an ordered ground set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NCPartition {
    ground: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl NCPartition {
    /// Validates that `blocks` partition `ground` without crossings. Blocks
    /// are normalized to ground order and sorted by first element.
    pub fn new(ground: Vec<usize>, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let pos = positions(&ground)?;
        let mut covered = vec![false; ground.len()];
        let mut blocks = blocks;
        for block in &mut blocks {
            if block.is_empty() {
                return Err(Error::InvalidPermutation("empty block".into()));
            }
            for &x in block.iter() {
                let p = *pos
                    .get(&x)
                    .ok_or_else(|| Error::InvalidPermutation(format!("{x} not in ground set")))?;
                if std::mem::replace(&mut covered[p], true) {
                    return Err(Error::InvalidPermutation(format!("{x} in two blocks")));
                }
            }
            block.sort_by_key(|x| pos[x]);
        }
        if covered.iter().any(|c| !c) {
            return Err(Error::InvalidPermutation("blocks do not cover the ground set".into()));
        }
        blocks.sort_by_key(|b| pos[&b[0]]);
        let block_pos: Vec<Vec<usize>> = blocks
            .iter()
            .map(|b| b.iter().map(|x| pos[x]).collect())
            .collect();
        if !is_noncrossing_blocks(ground.len(), &block_pos) {
            return Err(Error::Crossing(format_cycles(&blocks)));
        }
        Ok(NCPartition { ground, blocks })
    }

    pub fn ground(&self) -> &[usize] {
        &self.ground
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }
}

fn positions(order: &[usize]) -> Result<std::collections::HashMap<usize, usize>> {
    let mut pos = std::collections::HashMap::with_capacity(order.len());
    for (i, &x) in order.iter().enumerate() {
        if pos.insert(x, i).is_some() {
            return Err(Error::InvalidPermutation(format!("{x} repeated in ordered set")));
        }
    }
    Ok(pos)
}

/// Non-crossing test on blocks given as sorted positions in `0..len`.
fn is_noncrossing_blocks(len: usize, blocks: &[Vec<usize>]) -> bool {
    let mut block_of = vec![usize::MAX; len];
    for (b, block) in blocks.iter().enumerate() {
        for &p in block {
            block_of[p] = b;
        }
    }
    let mut seen = vec![0usize; blocks.len()];
    let mut stack: Vec<usize> = Vec::new();
    for p in 0..len {
        let b = block_of[p];
        if b == usize::MAX {
            continue;
        }
        let size = blocks[b].len();
        seen[b] += 1;
        if size == 1 {
            continue;
        }
        if seen[b] == 1 {
            stack.push(b);
        } else {
            if stack.last() != Some(&b) {
                return false;
            }
            if seen[b] == size {
                stack.pop();
            }
        }
    }
    true
}

/// Kreweras complement. The result lives on the barred copy of the ground
/// set, `x̄` sitting just after `x`; it is returned with the same element
/// names as the input.
pub fn kreweras_complement(p: &NCPartition) -> NCPartition {
    let len = p.ground.len();
    let pos = positions(&p.ground).expect("validated on construction");
    // pi with increasing cycles, on positions
    let mut pi = vec![0usize; len];
    for block in &p.blocks {
        for (i, x) in block.iter().enumerate() {
            pi[pos[x]] = pos[&block[(i + 1) % block.len()]];
        }
    }
    let pi = Permutation(pi);
    let gamma = Permutation((0..len).map(|i| (i + 1) % len).collect());
    let k = pi.inverse().compose(&gamma);
    let blocks = k
        .cycles()
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|i| p.ground[i]).collect();
            c.sort_by_key(|x| pos[x]);
            c
        })
        .collect();
    NCPartition::new(p.ground.clone(), blocks).expect("Kreweras complement is non-crossing")
}

/// True if every cycle of length at least 2 has exactly one descent when
/// read cyclically in `order`.
pub fn respects_order(order: &[usize], cycles: &[Vec<usize>]) -> Result<bool> {
    let pos = positions(order)?;
    for cycle in cycles {
        if cycle.len() < 2 {
            continue;
        }
        let mut descents = 0;
        for (i, x) in cycle.iter().enumerate() {
            let y = cycle[(i + 1) % cycle.len()];
            let (px, py) = match (pos.get(x), pos.get(&y)) {
                (Some(a), Some(b)) => (*a, *b),
                _ => return Err(Error::InvalidPermutation(format!("{x} or {y} not in order"))),
            };
            if px > py {
                descents += 1;
            }
        }
        if descents != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Non-crossing permutation on the ordered set: the induced partition is
/// non-crossing and every cycle respects the order.
pub fn is_noncrossing_permutation(order: &[usize], cycles: &[Vec<usize>]) -> Result<bool> {
    let pos = positions(order)?;
    let mut blocks = Vec::with_capacity(cycles.len());
    for cycle in cycles {
        let mut b = Vec::with_capacity(cycle.len());
        for x in cycle {
            b.push(*pos.get(x).ok_or_else(|| {
                Error::InvalidPermutation(format!("{x} not in ordered set"))
            })?);
        }
        b.sort_unstable();
        blocks.push(b);
    }
    Ok(is_noncrossing_blocks(order.len(), &blocks) && respects_order(order, cycles)?)
}

/// Genus of a permutation on an ordered support:
/// `2g = 1 + n - #cycles(sigma) - #cycles(f0 ∘ sigma)`, where `f0` is the
/// boundary cycle of the support run against the given order, so that `g = 0`
/// exactly for the permutations that are non-crossing on `order`.
pub fn permutation_genus(order: &[usize], sigma: &Permutation) -> Result<usize> {
    let pos = positions(order)?;
    let mut cycles = Vec::new();
    let mut seen = vec![false; order.len()];
    for (i, &start) in order.iter().enumerate() {
        if seen[i] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut x = start;
        loop {
            if x >= sigma.len() {
                return Err(Error::InvalidPermutation(format!("{x} outside permutation")));
            }
            let p = *pos.get(&x).ok_or_else(|| {
                Error::InvalidPermutation(format!("sigma leaves the support at {x}"))
            })?;
            if seen[p] {
                break;
            }
            seen[p] = true;
            cycle.push(x);
            x = sigma.apply(x);
        }
        if x != start {
            return Err(Error::InvalidPermutation("not a permutation of the support".into()));
        }
        cycles.push(cycle);
    }
    genus_of_cycles(order, &cycles)
}

pub(crate) fn genus_of_cycles(order: &[usize], cycles: &[Vec<usize>]) -> Result<usize> {
    let n = order.len();
    let pos = positions(order)?;
    let mut sigma = (0..n).collect::<Vec<_>>();
    let mut count = 0;
    for cycle in cycles {
        count += 1;
        for (i, x) in cycle.iter().enumerate() {
            let y = cycle[(i + 1) % cycle.len()];
            sigma[pos[x]] = pos[&y];
        }
    }
    let sigma = Permutation::from_images(sigma)?;
    let f0 = Permutation((0..n).map(|i| (i + n - 1) % n.max(1)).collect());
    let boundary = f0.compose(&sigma).cycle_count();
    let twice = 1 + n as i64 - count as i64 - boundary as i64;
    if twice < 0 || twice % 2 != 0 {
        return Err(Error::InvalidPermutation(format!("2g = {twice} is not a nonnegative even integer")));
    }
    Ok((twice / 2) as usize)
}

/// The corner permutation of a plane tree on `0..2n`: each corner maps to the
/// next corner of the same node in contour order.
pub fn tree_corner_cycles(contour: &DyckPath) -> Vec<Vec<usize>> {
    let m = contour.n_corners();
    let nodes = corner_nodes(contour);
    let mut cycles = vec![Vec::new(); contour.n_edges() + 1];
    for k in 0..m.max(1) {
        cycles[nodes[k]].push(k);
    }
    cycles
}

/// Nested non-crossing permutations on the corner set `C_D` of the top tree.
/// `levels[0]` is the top tree's vertex permutation, `levels[i]` the gluing
/// at level `D - i`, each given by its cycles (singletons included).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestedNcp {
    pub corner_count: usize,
    pub levels: Vec<Vec<Vec<usize>>>,
}

impl NestedNcp {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Cycles of `σ^(j)`, `1 <= j <= D`.
    pub fn sigma(&self, j: usize) -> &[Vec<usize>] {
        &self.levels[self.depth() - j]
    }

    /// `C_j^*`: the support of `σ^(j)` ordered as `C_D` when `D - j` is even
    /// and reversed (keeping 0 first) otherwise.
    pub fn level_order(&self, j: usize) -> Vec<usize> {
        let mut support: Vec<usize> = self.sigma(j).iter().flatten().copied().collect();
        support.sort_unstable();
        if (self.depth() - j) % 2 == 1 && support.len() > 1 {
            support[1..].reverse();
        }
        support
    }

    /// Contour of the plane tree `(C_j^*, σ^(j))`, rooted at the first element.
    pub fn level_tree(&self, j: usize) -> Result<DyckPath> {
        let order = self.level_order(j);
        let mut first = std::collections::HashSet::new();
        let pos = positions(&order)?;
        for cycle in self.sigma(j) {
            let min = cycle.iter().min_by_key(|x| pos[x]).expect("nonempty cycle");
            first.insert(*min);
        }
        let mut values = Vec::with_capacity(order.len() + 1);
        values.push(0i64);
        let mut h = 0i64;
        for &x in &order[1..] {
            h += if first.contains(&x) { 1 } else { -1 };
            values.push(h);
        }
        values.push(h - 1);
        DyckPath::new(values)
    }

    /// Classes of the corners of `C_D` after all gluings, and the top tree's
    /// edges between classes. Classes are dense, numbered by first corner.
    pub fn quotient_graph(&self) -> Result<(usize, Vec<(usize, usize)>)> {
        let d = self.depth();
        let mut uf = UnionFind::new(self.corner_count);
        for level in &self.levels {
            for cycle in level {
                for w in cycle.windows(2) {
                    uf.union(w[0], w[1]);
                }
            }
        }
        let labels = uf.labels();
        let tree = self.level_tree(d)?;
        let vals = tree.values();
        let mut edges = Vec::with_capacity(tree.n_edges());
        for k in 0..tree.n_corners() {
            if vals[k + 1] > vals[k] {
                edges.push((labels[k], labels[k + 1]));
            }
        }
        Ok((uf.set_count(), edges))
    }

    /// One permutation per line, level `D` first.
    pub fn to_text(&self) -> String {
        let mut out = format!("# nested-ncp corners={} D={}\n", self.corner_count, self.depth());
        for level in &self.levels {
            out.push_str(&format_cycles(level));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut corner_count = None;
        let mut levels = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix('#') {
                for tok in rest.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("corners=") {
                        corner_count = v.parse().ok();
                    }
                }
                continue;
            }
            levels.push(parse_cycles(line)?);
        }
        let corner_count = match corner_count {
            Some(c) => c,
            None => levels
                .first()
                .map(|l: &Vec<Vec<usize>>| l.iter().flatten().count())
                .unwrap_or(0),
        };
        Ok(NestedNcp {
            corner_count,
            levels,
        })
    }
}

/// Checks every structural constraint of a nested non-crossing encoding.
pub fn validate_nested_ncp(ncp: &NestedNcp) -> Result<()> {
    let d = ncp.depth();
    if d == 0 {
        return Err(Error::InvalidPermutation("no levels".into()));
    }
    let full: Vec<usize> = (0..ncp.corner_count).collect();
    let top = ncp.sigma(d);
    let mut top_support: Vec<usize> = top.iter().flatten().copied().collect();
    top_support.sort_unstable();
    if top_support != full {
        return Err(Error::InvalidPermutation("top level must be supported on all corners".into()));
    }
    for j in (1..=d).rev() {
        let order = ncp.level_order(j);
        let cycles = ncp.sigma(j);
        if !is_noncrossing_permutation(&order, cycles)? {
            return Err(Error::Crossing(format!("level {j} is not non-crossing on its order")));
        }
        if j < d {
            let upper = ncp.sigma(j + 1);
            let mut cycle_of = vec![usize::MAX; ncp.corner_count];
            for (c, cycle) in upper.iter().enumerate() {
                for &x in cycle {
                    cycle_of[x] = c;
                }
            }
            let mut used = vec![false; upper.len()];
            for &x in cycles.iter().flatten() {
                let c = cycle_of[x];
                if c == usize::MAX {
                    return Err(Error::InvalidPermutation(format!(
                        "level {j} element {x} outside the support of level {}",
                        j + 1
                    )));
                }
                if std::mem::replace(&mut used[c], true) {
                    return Err(Error::InvalidPermutation(format!(
                        "level {j} has two elements in one cycle of level {}",
                        j + 1
                    )));
                }
            }
        }
    }
    Ok(())
}

/// For each corner `k` of layer `j`, the first corner (in layer `j + 1`'s
/// contour) of the layer-`j + 1` node built from it: the corner of that node
/// facing the layer-`j` tree.
pub(crate) fn dual_corner_map(snake: &IteratedSnake, j: usize) -> Vec<usize> {
    let lower = &snake.layers[j - 1];
    let upper = &snake.layers[j];
    let m = lower.contour.n_corners();
    let a = upper.shift_a;
    let heights = crate::encodings::contour_to_height(&upper.contour);
    let firsts = first_corners(&heights);
    (0..m).map(|k| firsts[(k + m - a) % m + 1]).collect()
}

/// Encodes an iterated snake as nested non-crossing permutations on the corner
/// set of its top tree, rooted at the corner dual to the base root corner.
pub fn nested_ncp_encode(snake: &IteratedSnake) -> Result<NestedNcp> {
    snake.check_consistency()?;
    let d = snake.depth();
    // to_top[j-1][k]: image in layer D's contour of corner k of layer j
    let mut to_top: Vec<Vec<usize>> = vec![Vec::new(); d];
    to_top[d - 1] = (0..snake.layers[d - 1].contour.n_corners()).collect();
    for j in (1..d).rev() {
        let dual = dual_corner_map(snake, j);
        let above = &to_top[j];
        to_top[j - 1] = dual.iter().map(|&x| above[x]).collect();
    }
    let m = snake.layers[d - 1].contour.n_corners();
    let origin = to_top[0][0];
    let relabel = |x: usize| (x + m - origin) % m;
    let mut levels = Vec::with_capacity(d);
    for j in (1..=d).rev() {
        let layer = &snake.layers[j - 1];
        let mut cycles = tree_corner_cycles(&layer.contour);
        let reversed = (d - j) % 2 == 1;
        for cycle in &mut cycles {
            for x in cycle.iter_mut() {
                *x = relabel(to_top[j - 1][*x]);
            }
            cycle.sort_unstable();
            if reversed {
                cycle.reverse();
            }
            let min_at = cycle.iter().enumerate().min_by_key(|(_, x)| **x).map(|(i, _)| i).unwrap_or(0);
            cycle.rotate_left(min_at);
        }
        cycles.sort_by_key(|c| c[0]);
        levels.push(cycles);
    }
    let ncp = NestedNcp {
        corner_count: m,
        levels,
    };
    validate_nested_ncp(&ncp)?;
    Ok(ncp)
}

/// Reverses the orientation of a contour (the mirror plane tree, same root corner).
pub fn mirror_contour(c: &DyckPath) -> DyckPath {
    let mut v = c.values().to_vec();
    v.reverse();
    DyckPath::from_vec_unchecked(v)
}

/// Height sequence helper used by tests and oracles.
pub fn heights_of(c: &DyckPath) -> HeightSeq {
    crate::encodings::contour_to_height(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encodings::reroot_at_corner;
    use crate::sampling::{sample_iterated_snake, Seed};

    fn cyc(text: &str) -> Vec<Vec<usize>> {
        parse_cycles(text).unwrap()
    }

    #[test]
    fn faces_and_genus_examples() {
        let m = CombMap::new(
            Permutation::identity(2),
            Permutation::parse(2, "(0,1)").unwrap(),
            None,
        )
        .unwrap();
        let (faces, g) = map_faces_and_genus(&m).unwrap();
        assert_eq!((faces.len(), g), (1, 0));

        let loop_map = CombMap::new(
            Permutation::parse(2, "(0,1)").unwrap(),
            Permutation::parse(2, "(0,1)").unwrap(),
            None,
        )
        .unwrap();
        let (faces, g) = map_faces_and_genus(&loop_map).unwrap();
        assert_eq!((faces.len(), g), (2, 0));

        let torus = CombMap::new(
            Permutation::parse(4, "(0,1,2,3)").unwrap(),
            Permutation::parse(4, "(0,2)(1,3)").unwrap(),
            None,
        )
        .unwrap();
        let (faces, g) = map_faces_and_genus(&torus).unwrap();
        assert_eq!((faces.len(), g), (1, 1));
    }

    #[test]
    fn invalid_maps_rejected() {
        assert!(CombMap::new(Permutation::identity(2), Permutation::identity(2), None).is_err());
        let disconnected = CombMap::new(
            Permutation::identity(4),
            Permutation::parse(4, "(0,1)(2,3)").unwrap(),
            None,
        );
        assert!(disconnected.is_err());
    }

    #[test]
    fn kreweras_examples() {
        let singletons = NCPartition::new(vec![1, 2, 3], cyc("(1)(2)(3)")).unwrap();
        assert_eq!(kreweras_complement(&singletons).blocks(), &cyc("(1,2,3)")[..]);
        let whole = NCPartition::new(vec![1, 2, 3], cyc("(1,2,3)")).unwrap();
        assert_eq!(kreweras_complement(&whole).blocks(), &cyc("(1)(2)(3)")[..]);
        let p = NCPartition::new(vec![1, 2, 3], cyc("(1,3)(2)")).unwrap();
        assert_eq!(kreweras_complement(&p).blocks(), &cyc("(1,2)(3)")[..]);
        assert!(matches!(
            NCPartition::new(vec![0, 1, 2, 3], cyc("(0,2)(1,3)")),
            Err(Error::Crossing(_))
        ));
    }

    #[test]
    fn genus_examples() {
        assert_eq!(permutation_genus(&[0, 1, 2], &Permutation::identity(3)).unwrap(), 0);
        let p = Permutation::parse(4, "(0,2)(1,3)").unwrap();
        assert_eq!(permutation_genus(&[0, 1, 2, 3], &p).unwrap(), 1);
        let inc = Permutation::parse(6, "(0,2,4)").unwrap();
        assert_eq!(permutation_genus(&[0, 1, 2, 3, 4, 5], &inc).unwrap(), 0);
        assert_eq!(permutation_genus(&[0, 5, 4, 3, 2, 1], &inc).unwrap(), 1);
    }

    #[test]
    fn worked_example_validates() {
        let ncp = NestedNcp {
            corner_count: 20,
            levels: vec![
                cyc("(0,18)(1,15,17)(2,4,10,12,14)(3)(5,9)(6,8)(7)(11)(13)(16)(19)"),
                cyc("(0,16)(1,13)(3,11,7)(4)(8)(19)"),
            ],
        };
        validate_nested_ncp(&ncp).unwrap();
        let order = ncp.level_order(1);
        assert_eq!(order, vec![0, 19, 16, 13, 11, 8, 7, 4, 3, 1]);
        assert_eq!(genus_of_cycles(&order, ncp.sigma(1)).unwrap(), 0);
        // the base tree has 5 edges
        assert_eq!(ncp.level_tree(1).unwrap().n_edges(), 5);
        assert_eq!(ncp.level_tree(2).unwrap().n_edges(), 10);

        let mut bad = ncp.clone();
        bad.levels[1] = cyc("(0,16)(1,13)(3,7,11)(4)(8)(19)");
        assert!(validate_nested_ncp(&bad).is_err());
        let mut twice = ncp.clone();
        twice.levels[1] = cyc("(0,18)(1,13)(3,11,7)(4)(8)(19)");
        assert!(validate_nested_ncp(&twice).is_err());
    }

    #[test]
    fn encode_depth_one_is_tree_permutation() {
        let snake = sample_iterated_snake(6, 1, Seed::new(1, 0)).unwrap();
        let ncp = nested_ncp_encode(&snake).unwrap();
        assert_eq!(ncp.depth(), 1);
        assert_eq!(ncp.levels[0], tree_corner_cycles(&snake.layers[0].contour));
    }

    #[test]
    fn encoded_levels_decode_to_rerooted_layer_trees() {
        for r in 0..30 {
            let snake = sample_iterated_snake(1 + r % 9, 1 + r % 4, Seed::new(5, r as u64)).unwrap();
            let ncp = nested_ncp_encode(&snake).unwrap();
            let d = snake.depth();
            // root corner of each layer in its own contour indexing
            let mut root = vec![0usize; d];
            for j in 1..d {
                root[j] = dual_corner_map(&snake, j)[root[j - 1]];
            }
            for j in 1..=d {
                let expected = reroot_at_corner(&snake.layers[j - 1].contour, root[j - 1]).unwrap();
                let expected = if (d - j) % 2 == 1 { mirror_contour(&expected) } else { expected };
                assert_eq!(ncp.level_tree(j).unwrap(), expected, "r={r} level {j}");
            }
        }
    }

    #[test]
    fn encoding_text_round_trip() {
        let snake = sample_iterated_snake(12, 3, Seed::new(9, 9)).unwrap();
        let ncp = nested_ncp_encode(&snake).unwrap();
        let back = NestedNcp::from_text(&ncp.to_text()).unwrap();
        assert_eq!(back, ncp);
        assert_eq!(nested_ncp_encode(&snake).unwrap(), back);
    }

    #[test]
    fn tree_map_is_planar_with_one_face() {
        let c = DyckPath::new(vec![0, 1, 2, 1, 2, 1, 0, 1, 0]).unwrap();
        let m = CombMap::from_tree(&c);
        let (faces, g) = map_faces_and_genus(&m).unwrap();
        assert_eq!((faces.len(), g), (1, 0));
        assert_eq!(m.sigma.cycle_count(), 5);
    }
}
