//! The correspondence between labeled rooted trees (with a bit `eta`) and
//! rooted pointed planar quadrangulations.
//!
//! Darts of the image of a tree with `n` edges: corner `k` of the tree emits
//! one edge, with dart `2k` at the tree node and dart `2k + 1` at the other end
//! (the node owning the linked corner, or the pointed vertex).

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use crate::encodings::{contour_to_tree, corner_nodes, tree_to_contour, DyckPath, PlanarTree};
use crate::error::{Error, Result};
use crate::permmaps::{format_cycles, map_faces_and_genus, parse_cycles, CombMap, Permutation};

/// A rooted plane tree with integer node labels and the rooting bit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledTree {
    pub tree: PlanarTree,
    /// Labels in lexicographic node order.
    pub node_labels: Vec<i64>,
    pub eta: bool,
}

impl LabeledTree {
    pub fn new(tree: PlanarTree, node_labels: Vec<i64>, eta: bool) -> Result<Self> {
        let lt = LabeledTree {
            tree,
            node_labels,
            eta,
        };
        lt.validate()?;
        Ok(lt)
    }

    /// Builds the labeled tree of a contour and its corner labels.
    pub fn from_contour(c: &DyckPath, corner_labels: &[i64], eta: bool) -> Result<Self> {
        if corner_labels.len() != c.values().len() {
            return Err(Error::LengthMismatch {
                left: corner_labels.len(),
                right: c.values().len(),
            });
        }
        let tree = contour_to_tree(c)?;
        let mut labels = vec![0i64; tree.n_nodes()];
        for (k, &v) in corner_nodes(c).iter().enumerate() {
            labels[v] = corner_labels[k];
        }
        LabeledTree::new(tree, labels, eta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_labels.len() != self.tree.n_nodes() {
            return Err(Error::LengthMismatch {
                left: self.node_labels.len(),
                right: self.tree.n_nodes(),
            });
        }
        if self.node_labels[0] != 0 {
            return Err(Error::InvalidLabels("root label must be 0".into()));
        }
        for (p, k) in self.tree.edges() {
            if (self.node_labels[p] - self.node_labels[k]).abs() > 1 {
                return Err(Error::InvalidLabels(format!(
                    "labels of nodes {p} and {k} differ by more than 1"
                )));
            }
        }
        Ok(())
    }

    pub fn n_edges(&self) -> usize {
        self.tree.n_edges()
    }

    pub fn corner_labels(&self) -> Vec<i64> {
        let c = tree_to_contour(&self.tree);
        corner_nodes(&c).iter().map(|&v| self.node_labels[v]).collect()
    }

    pub fn min_label(&self) -> i64 {
        *self.node_labels.iter().min().expect("at least one node")
    }
}

/// A rooted pointed map whose faces all have degree 4.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Quadrangulation {
    pub map: CombMap,
    /// Vertex id in the map's numbering (vertices ordered by smallest dart).
    pub pointed_vertex: usize,
    pub root_dart: usize,
}

impl Quadrangulation {
    pub fn new(map: CombMap, pointed_vertex: usize, root_dart: usize) -> Result<Self> {
        let q = Quadrangulation {
            map,
            pointed_vertex,
            root_dart,
        };
        q.validate()?;
        Ok(q)
    }

    /// Checks degree-4 faces, genus 0, and that root and pointed vertex exist.
    pub fn validate(&self) -> Result<()> {
        let (faces, genus) = map_faces_and_genus(&self.map)?;
        if let Some(f) = faces.iter().find(|f| f.len() != 4) {
            return Err(Error::InvalidMap(format!("face of degree {}", f.len())));
        }
        if genus != 0 {
            return Err(Error::InvalidMap(format!("genus {genus}")));
        }
        if self.root_dart >= self.map.n_darts() {
            return Err(Error::InvalidMap(format!("root dart {} out of range", self.root_dart)));
        }
        if self.pointed_vertex >= self.n_vertices() {
            return Err(Error::InvalidMap(format!(
                "pointed vertex {} out of range",
                self.pointed_vertex
            )));
        }
        Ok(())
    }

    pub fn n_vertices(&self) -> usize {
        self.map.sigma.cycle_count()
    }

    pub fn n_faces(&self) -> usize {
        self.map.n_edges() / 2
    }

    /// Graph distance of every vertex to the pointed vertex.
    pub fn distances_to_pointed(&self) -> Vec<u64> {
        vertex_distances(&self.map, self.pointed_vertex)
    }

    /// Isomorphism key for rooted pointed maps.
    pub fn canonical_key(&self) -> (Vec<usize>, Vec<usize>, usize) {
        let (sigma, alpha) = self.map.canonical_form(self.root_dart);
        // the pointed vertex is named by its smallest dart after relabeling
        let vod = self.map.vertex_of_dart();
        let label = self.map.bfs_labels(self.root_dart);
        let n = self.map.n_darts();
        let pointed = (0..n)
            .filter(|&d| vod[d] == self.pointed_vertex)
            .map(|d| label[d])
            .min()
            .expect("vertex has a dart");
        (sigma, alpha, pointed)
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "pointed={} root={}", self.pointed_vertex, self.root_dart)?;
        writeln!(out, "{}", format_cycles(&self.map.sigma.cycles()))?;
        writeln!(out, "{}", format_cycles(&self.map.alpha.cycles()))
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = Vec::new();
        for line in input.lines() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            lines.push(t.to_string());
        }
        if lines.len() != 3 {
            return Err(Error::Parse(format!("expected 3 lines, found {}", lines.len())));
        }
        let (mut pointed, mut root) = (None, None);
        for tok in lines[0].split_whitespace() {
            if let Some(v) = tok.strip_prefix("pointed=") {
                pointed = v.parse().ok();
            } else if let Some(v) = tok.strip_prefix("root=") {
                root = v.parse().ok();
            }
        }
        let (pointed, root) = pointed
            .zip(root)
            .ok_or_else(|| Error::Parse("missing pointed= or root=".into()))?;
        let sigma_cycles = parse_cycles(&lines[1])?;
        let alpha_cycles = parse_cycles(&lines[2])?;
        let darts = sigma_cycles.iter().map(Vec::len).sum();
        let sigma = Permutation::from_cycles(darts, &sigma_cycles)?;
        let alpha = Permutation::from_cycles(darts, &alpha_cycles)?;
        Quadrangulation::new(CombMap::new(sigma, alpha, Some(root))?, pointed, root)
    }
}

/// Breadth-first distances from a vertex over the darts of a map.
pub fn vertex_distances(map: &CombMap, source: usize) -> Vec<u64> {
    let vertices = map.vertices();
    let vod = map.vertex_of_dart();
    let mut dist = vec![u64::MAX; vertices.len()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for &d in &vertices[v] {
            let w = vod[map.alpha.apply(d)];
            if dist[w] == u64::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// The forward construction on a contour with corner labels. Returns the
/// quadrangulation and the map vertex of every tree node.
pub(crate) fn cvs_from_corners(
    c: &DyckPath,
    labels: &[i64],
    eta: bool,
) -> (Quadrangulation, Vec<usize>) {
    let m = c.n_corners();
    let nodes = corner_nodes(c);
    let n_nodes = c.n_edges() + 1;
    let mut a = 0usize;
    for k in 1..m {
        if labels[k] < labels[a] {
            a = k;
        }
    }
    let min = labels[a];
    let max = labels[..m].iter().copied().max().unwrap_or(min);
    // link[k]: the corner that corner k is joined to, or None for the pointed vertex
    let mut link: Vec<Option<usize>> = vec![None; m];
    let mut last = vec![usize::MAX; (max - min + 1) as usize];
    for j in 0..m {
        let k = (a + j) % m;
        let l = labels[k];
        if l > min {
            let p = last[(l - 1 - min) as usize];
            debug_assert_ne!(p, usize::MAX);
            link[k] = Some(p);
        }
        last[(l - min) as usize] = k;
    }
    // incoming edges of each corner, and of the pointed vertex, in decreasing
    // position from the first minimum
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut at_pointed = Vec::new();
    for j in (0..m).rev() {
        let k = (a + j) % m;
        match link[k] {
            Some(p) => incoming[p].push(k),
            None => at_pointed.push(k),
        }
    }
    let mut node_corners: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
    for k in 0..m {
        node_corners[nodes[k]].push(k);
    }
    let mut sigma = vec![0usize; 2 * m];
    let mut set_cycle = |cycle: &[usize]| {
        for (i, &d) in cycle.iter().enumerate() {
            sigma[d] = cycle[(i + 1) % cycle.len()];
        }
    };
    let mut rotation = Vec::new();
    for corners in &node_corners {
        rotation.clear();
        for &k in corners {
            rotation.push(2 * k);
            rotation.extend(incoming[k].iter().map(|&k2| 2 * k2 + 1));
        }
        set_cycle(&rotation);
    }
    let nu: Vec<usize> = at_pointed.iter().map(|&k| 2 * k + 1).collect();
    set_cycle(&nu);
    let alpha: Vec<usize> = (0..2 * m).map(|d| d ^ 1).collect();
    let root = usize::from(eta);
    let map = CombMap {
        sigma: Permutation::from_images(sigma).expect("rotation covers every dart once"),
        alpha: Permutation::from_images(alpha).expect("pairing"),
        root_dart: Some(root),
    };
    let vod = map.vertex_of_dart();
    let pointed = vod[2 * at_pointed[0] + 1];
    let node_vertex = node_corners.iter().map(|cs| vod[2 * cs[0]]).collect();
    (
        Quadrangulation {
            map,
            pointed_vertex: pointed,
            root_dart: root,
        },
        node_vertex,
    )
}

/// Labeled tree with `n >= 1` edges to its rooted pointed quadrangulation.
pub fn cvs_forward(lt: &LabeledTree) -> Result<Quadrangulation> {
    Ok(cvs_forward_with_nodes(lt)?.0)
}

/// As [`cvs_forward`], also returning the map vertex of every tree node.
pub fn cvs_forward_with_nodes(lt: &LabeledTree) -> Result<(Quadrangulation, Vec<usize>)> {
    lt.validate()?;
    if lt.n_edges() == 0 {
        return Err(Error::ZeroSize);
    }
    let c = tree_to_contour(&lt.tree);
    let labels = lt.corner_labels();
    Ok(cvs_from_corners(&c, &labels, lt.eta))
}

/// Recovers the labeled tree and `eta` from a rooted pointed quadrangulation.
pub fn cvs_backward(q: &Quadrangulation) -> Result<LabeledTree> {
    q.validate()?;
    let map = &q.map;
    let darts = map.n_darts();
    let vod = map.vertex_of_dart();
    let dist = q.distances_to_pointed();
    let label = |d: usize| dist[vod[d]];

    // one tree edge per face, stored as the pair of face corners it joins; a
    // face corner is named by the dart leaving it
    let mut tree_at = vec![usize::MAX; darts];
    let mut ends: Vec<[usize; 2]> = Vec::with_capacity(darts / 4);
    for face in map.faces() {
        let top = (0..4).max_by_key(|&i| (label(face[i]), std::cmp::Reverse(i))).unwrap();
        let opposite = (top + 2) % 4;
        let other = if label(face[opposite]) == label(face[top]) {
            opposite
        } else {
            (top + 1) % 4
        };
        let e = ends.len();
        tree_at[face[top]] = 2 * e;
        tree_at[face[other]] = 2 * e + 1;
        ends.push([face[top], face[other]]);
    }
    let n_edges = ends.len();
    let n_tree_darts = 2 * n_edges;

    // rotation of the tree darts, inherited from the map rotation
    let mut rot = vec![usize::MAX; n_tree_darts];
    let mut tree_vertex = vec![usize::MAX; n_tree_darts];
    for (v, cycle) in map.vertices().iter().enumerate() {
        let here: Vec<usize> = cycle
            .iter()
            .filter(|&&d| tree_at[d] != usize::MAX)
            .map(|&d| tree_at[d])
            .collect();
        for (i, &b) in here.iter().enumerate() {
            rot[b] = here[(i + 1) % here.len()];
            tree_vertex[b] = v;
        }
    }

    // root corner: the corner of the higher endpoint of the root edge that
    // holds the root edge; the contour leaves along the next tree dart
    let r = q.root_dart;
    let (high_dart, eta) = if label(r) > label(map.alpha.apply(r)) {
        (r, false)
    } else {
        (map.alpha.apply(r), true)
    };
    let mut y = map.sigma.apply(high_dart);
    while tree_at[y] == usize::MAX {
        y = map.sigma.apply(y);
        if y == map.sigma.apply(high_dart) {
            return Err(Error::InvalidMap("root vertex carries no tree edge".into()));
        }
    }
    let root_vertex = vod[high_dart];
    let d0 = dist[root_vertex] as i64;

    // walk the contour of the tree
    let mut values = Vec::with_capacity(n_tree_darts + 1);
    let mut node_of_vertex = vec![usize::MAX; dist.len()];
    let mut node_vertices = vec![root_vertex];
    node_of_vertex[root_vertex] = 0;
    let mut stack = vec![root_vertex];
    values.push(0i64);
    let mut b = tree_at[y];
    for _ in 0..n_tree_darts {
        let target = tree_vertex[b ^ 1];
        if stack.len() >= 2 && stack[stack.len() - 2] == target {
            stack.pop();
        } else {
            if node_of_vertex[target] != usize::MAX {
                return Err(Error::InvalidMap("face edges do not form a tree".into()));
            }
            node_of_vertex[target] = node_vertices.len();
            node_vertices.push(target);
            stack.push(target);
        }
        values.push(stack.len() as i64 - 1);
        b = rot[b ^ 1];
    }
    let c = DyckPath::new(values)?;
    let tree = contour_to_tree(&c)?;
    if tree.n_nodes() + 1 != dist.len() {
        return Err(Error::InvalidMap("face edges do not span the map".into()));
    }
    let node_labels = node_vertices.iter().map(|&v| dist[v] as i64 - d0).collect();
    LabeledTree::new(tree, node_labels, eta)
}

/// The tree with `2n` edges obtained by cutting the quadrangulation of `lt`
/// open along the corners of its tree, rooted at the corner facing the root
/// corner of `lt`. Read with the orientation of the contour encodings, it is
/// the conjugation tree of the corner labels rerooted at that corner.
pub fn extract_second_tree(lt: &LabeledTree) -> Result<PlanarTree> {
    lt.validate()?;
    let n = lt.n_edges();
    if n == 0 {
        return Err(Error::ZeroSize);
    }
    let c = tree_to_contour(&lt.tree);
    let labels = lt.corner_labels();
    let (q, _) = cvs_from_corners(&c, &labels, lt.eta);
    let m = c.n_corners();
    // each corner of the tree becomes its own vertex: the darts of its sector
    // keep their order, and the cut sits before the first of them
    let sigma = &q.map.sigma;
    let mut inv = vec![0usize; 2 * m];
    let sectors_all = sectors(m, sigma);
    for corner_sector in &sectors_all {
        // reversed reading: predecessor within the sector, cyclically
        for (i, &d) in corner_sector.iter().enumerate() {
            inv[d] = corner_sector[(i + corner_sector.len() - 1) % corner_sector.len()];
        }
    }
    let nu: Vec<usize> = {
        let start = (0..2 * m)
            .find(|&d| q.map.vertex_of_dart()[d] == q.pointed_vertex)
            .expect("pointed vertex has darts");
        let mut cycle = vec![start];
        let mut d = sigma.apply(start);
        while d != start {
            cycle.push(d);
            d = sigma.apply(d);
        }
        cycle
    };
    for (i, &d) in nu.iter().enumerate() {
        inv[d] = nu[(i + nu.len() - 1) % nu.len()];
    }
    let start = *sectors_all[0].last().expect("sector holds its own dart");
    // contour: leave along `d`, then continue with the dart after the
    // arrival dart in the reversed reading
    let mut values = Vec::with_capacity(2 * m + 1);
    values.push(0i64);
    let mut owner = vec![usize::MAX; 2 * m];
    for (k, s) in sectors_all.iter().enumerate() {
        for &d in s {
            owner[d] = k;
        }
    }
    for &d in &nu {
        owner[d] = m;
    }
    let mut stack = vec![owner[start]];
    let mut d = start;
    for _ in 0..2 * m {
        let target = owner[d ^ 1];
        if stack.len() >= 2 && stack[stack.len() - 2] == target {
            stack.pop();
        } else {
            stack.push(target);
        }
        values.push(stack.len() as i64 - 1);
        d = inv[d ^ 1];
    }
    let path = DyckPath::new(values)?;
    contour_to_tree(&path)
}

/// Darts of sector `k`: the edge of corner `k`, then the edges arriving at it.
fn sector_of(k: usize, sigma: &Permutation) -> Vec<usize> {
    let mut out = vec![2 * k];
    let mut d = sigma.apply(2 * k);
    while d % 2 == 1 {
        out.push(d);
        d = sigma.apply(d);
    }
    out
}

fn sectors(m: usize, sigma: &Permutation) -> Vec<Vec<usize>> {
    (0..m).map(|k| sector_of(k, sigma)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encodings::{conjugate_labels, first_corners, height_to_contour, reroot_at_corner};

    fn edge_tree(child: i64, eta: bool) -> LabeledTree {
        LabeledTree::new(PlanarTree::from_parents(vec![0, 0]).unwrap(), vec![0, child], eta).unwrap()
    }

    #[test]
    fn one_edge_examples() {
        let (q, nodes) = cvs_forward_with_nodes(&edge_tree(1, false)).unwrap();
        let d = q.distances_to_pointed();
        assert_eq!((d[nodes[0]], d[nodes[1]]), (1, 2));
        let (q, nodes) = cvs_forward_with_nodes(&edge_tree(-1, false)).unwrap();
        let d = q.distances_to_pointed();
        assert_eq!((d[nodes[0]], d[nodes[1]]), (2, 1));
    }

    #[test]
    fn six_distinct_images_at_n1() {
        let mut keys = std::collections::HashSet::new();
        for child in -1..=1 {
            for eta in [false, true] {
                let lt = edge_tree(child, eta);
                let q = cvs_forward(&lt).unwrap();
                q.validate().unwrap();
                assert_eq!(cvs_backward(&q).unwrap(), lt);
                keys.insert(q.canonical_key());
            }
        }
        assert_eq!(keys.len(), 6);
    }

    #[test]
    fn root_dart_follows_eta() {
        let q0 = cvs_forward(&edge_tree(1, false)).unwrap();
        let q1 = cvs_forward(&edge_tree(1, true)).unwrap();
        assert_eq!((q0.root_dart, q1.root_dart), (0, 1));
    }

    #[test]
    fn rejects_bad_labels() {
        let t = PlanarTree::from_parents(vec![0, 0]).unwrap();
        assert!(LabeledTree::new(t.clone(), vec![0, 2], false).is_err());
        assert!(LabeledTree::new(t, vec![1, 0], false).is_err());
    }

    #[test]
    fn rejects_non_quadrangulations() {
        let q = cvs_forward(&edge_tree(0, false)).unwrap();
        let mut bad = q.clone();
        bad.map.sigma = Permutation::identity(4);
        assert!(cvs_backward(&bad).is_err());
    }

    #[test]
    fn second_tree_examples() {
        let t = extract_second_tree(&edge_tree(-1, false)).unwrap();
        assert_eq!(t.n_edges(), 2);
        let lt = LabeledTree::new(
            PlanarTree::from_parents(vec![0, 0, 1, 0]).unwrap(),
            vec![0, 1, 0, -1],
            false,
        )
        .unwrap();
        let tau = extract_second_tree(&lt).unwrap();
        assert_eq!(tau.n_edges(), 6);
        let labels = crate::encodings::LabelSeq::new(lt.corner_labels()).unwrap();
        let (h, a) = conjugate_labels(&labels).unwrap();
        let m = labels.span();
        let conj = height_to_contour(&h).unwrap();
        let dual = first_corners(&h)[(m - a) % m + 1];
        assert_eq!(tree_to_contour(&tau), reroot_at_corner(&conj, dual).unwrap());
    }

    #[test]
    fn text_round_trip() {
        let lt = LabeledTree::new(
            PlanarTree::from_parents(vec![0, 0, 1, 1, 0]).unwrap(),
            vec![0, -1, 0, -1, 1],
            true,
        )
        .unwrap();
        let q = cvs_forward(&lt).unwrap();
        let mut buf = Vec::new();
        q.write_text(&mut buf).unwrap();
        let back = Quadrangulation::read_text(&buf[..]).unwrap();
        assert_eq!(back, q);
    }
}
