//! Exhaustive enumerators and counting checks for small sizes.

use std::collections::HashSet;
use std::fmt;

use crate::cvs::{cvs_backward, cvs_forward_with_nodes, LabeledTree};
use crate::encodings::{contour_to_tree, corner_nodes, DyckPath, LabelSeq};
use crate::error::{Error, Result};
use crate::feuilletage::build_feuilletage;
use crate::metrics::{bfs_distances, Graph};
use crate::sampling::IteratedSnake;

pub const MAX_DYCK_N: usize = 12;
pub const MAX_LABELED_N: usize = 7;
pub const MAX_CVS_N: usize = 5;
pub const MAX_FEUILLETAGE_N: usize = 3;
pub const MAX_FEUILLETAGE_D: usize = 3;
const MAX_WITNESSES: usize = 20;

fn guard(what: &'static str, value: usize, limit: usize) -> Result<()> {
    if value > limit {
        Err(Error::Guard { what, value, limit })
    } else {
        Ok(())
    }
}

pub fn catalan(n: usize) -> u64 {
    let mut c = 1u64;
    for k in 0..n as u64 {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c
}

/// Every Dyck path with `2n` steps, in lexicographic order of their values.
pub fn enumerate_dyck(n: usize) -> Result<Vec<DyckPath>> {
    guard("dyck n", n, MAX_DYCK_N)?;
    let mut out = Vec::with_capacity(catalan(n) as usize);
    let mut values = vec![0i64];
    fn rec(values: &mut Vec<i64>, n: usize, out: &mut Vec<DyckPath>) {
        let len = values.len() - 1;
        if len == 2 * n {
            out.push(DyckPath::from_vec_unchecked(values.clone()));
            return;
        }
        let h = *values.last().unwrap();
        let ups = (len as i64 + h) / 2;
        if h > 0 {
            values.push(h - 1);
            rec(values, n, out);
            values.pop();
        }
        if (ups as usize) < n {
            values.push(h + 1);
            rec(values, n, out);
            values.pop();
        }
    }
    rec(&mut values, n, &mut out);
    Ok(out)
}

/// Every corner labeling of the tree of `c` with root label 0 and increments
/// in {-1, 0, 1}, as corner sequences.
pub fn enumerate_labelings(c: &DyckPath) -> Vec<LabelSeq> {
    let nodes = corner_nodes(c);
    let tree = contour_to_tree(c).expect("valid contour");
    let k = tree.n_edges();
    let total = 3usize.pow(k as u32);
    let mut out = Vec::with_capacity(total);
    let mut inc = vec![-1i64; k];
    let mut node_label = vec![0i64; k + 1];
    for idx in 0..total {
        if idx > 0 {
            for x in inc.iter_mut() {
                if *x < 1 {
                    *x += 1;
                    break;
                }
                *x = -1;
            }
        }
        for v in 1..=k {
            node_label[v] = node_label[tree.parent(v).unwrap()] + inc[v - 1];
        }
        out.push(LabelSeq::from_vec_unchecked(nodes.iter().map(|&v| node_label[v]).collect()));
    }
    out
}

/// All labeled trees with `n` edges (with `eta = 0`): `3^n C_n` of them.
pub fn enumerate_labeled_trees(n: usize) -> Result<Vec<LabeledTree>> {
    guard("labeled tree n", n, MAX_LABELED_N)?;
    let mut out = Vec::with_capacity(3usize.pow(n as u32) * catalan(n) as usize);
    for c in enumerate_dyck(n)? {
        let tree = contour_to_tree(&c)?;
        let nodes = corner_nodes(&c);
        for l in enumerate_labelings(&c) {
            let mut labels = vec![0i64; tree.n_nodes()];
            for (k, &v) in nodes.iter().enumerate() {
                labels[v] = l.values()[k];
            }
            out.push(LabeledTree {
                tree: tree.clone(),
                node_labels: labels,
                eta: false,
            });
        }
    }
    Ok(out)
}

/// Outcome of an exhaustive check: observed against closed-form count, plus
/// witnesses of any failed per-object check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationReport {
    pub n: usize,
    pub family: String,
    pub count: u64,
    pub formula_count: u64,
    pub mismatches: Vec<String>,
}

impl EnumerationReport {
    pub fn passed(&self) -> bool {
        self.count == self.formula_count && self.mismatches.is_empty()
    }

    fn record(&mut self, witness: String) {
        if self.mismatches.len() < MAX_WITNESSES {
            self.mismatches.push(witness);
        }
    }
}

impl fmt::Display for EnumerationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} n={} count={} expected={} mismatches={}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.family,
            self.n,
            self.count,
            self.formula_count,
            self.mismatches.len()
        )
    }
}

pub fn expected_cvs_count(n: usize) -> u64 {
    2 * 3u64.pow(n as u32) * catalan(n)
}

/// Maps all of `LT_n × {0,1}` forward and checks map validity, injectivity,
/// the backward round trip and the distance identity on every image.
pub fn verify_cvs_exhaustive(n: usize) -> Result<EnumerationReport> {
    guard("cvs n", n, MAX_CVS_N)?;
    if n == 0 {
        return Err(Error::ZeroSize);
    }
    let mut report = EnumerationReport {
        n,
        family: "cvs".into(),
        count: 0,
        formula_count: expected_cvs_count(n),
        mismatches: Vec::new(),
    };
    let mut keys = HashSet::new();
    for base in enumerate_labeled_trees(n)? {
        for eta in [false, true] {
            let lt = LabeledTree { eta, ..base.clone() };
            let (q, node_vertex) = cvs_forward_with_nodes(&lt)?;
            if let Err(e) = q.validate() {
                report.record(format!("{lt:?}: invalid image: {e}"));
                continue;
            }
            let dist = q.distances_to_pointed();
            let min = lt.min_label();
            for (w, &v) in node_vertex.iter().enumerate() {
                if dist[v] as i64 != lt.node_labels[w] - min + 1 {
                    report.record(format!("{lt:?}: distance identity fails at node {w}"));
                    break;
                }
            }
            let vod = q.map.vertex_of_dart();
            if (0..q.map.n_darts()).any(|d| dist[vod[d]].abs_diff(dist[vod[q.map.alpha.apply(d)]]) != 1) {
                report.record(format!("{lt:?}: distance coloring is not proper"));
            }
            match cvs_backward(&q) {
                Ok(back) if back == lt => {}
                Ok(back) => report.record(format!("{lt:?}: backward gave {back:?}")),
                Err(e) => report.record(format!("{lt:?}: backward failed: {e}")),
            }
            if !keys.insert(q.canonical_key()) {
                report.record(format!("{lt:?}: image collides with an earlier tree"));
            }
        }
    }
    report.count = keys.len() as u64;
    Ok(report)
}

pub fn expected_feuilletage_count(n: usize, depth: usize) -> u64 {
    let mut total = catalan(n);
    for j in 0..depth.saturating_sub(1) {
        total *= 3u64.pow(((1usize << j) * n) as u32);
    }
    total
}

/// Every snake realization with base size `n` and depth `D` (all base trees
/// and all labelings of layers `1..D`; the top layer's labels do not affect
/// the feuilletage) must give `n + D` classes, `2^{D-1} n` edges and a
/// connected quotient.
pub fn verify_feuilletage_counts(n: usize, depth: usize) -> Result<EnumerationReport> {
    guard("feuilletage n", n, MAX_FEUILLETAGE_N)?;
    guard("feuilletage D", depth, MAX_FEUILLETAGE_D)?;
    if n == 0 || depth == 0 {
        return Err(Error::ZeroSize);
    }
    let mut report = EnumerationReport {
        n,
        family: format!("feuilletage D={depth}"),
        count: 0,
        formula_count: expected_feuilletage_count(n, depth),
        mismatches: Vec::new(),
    };
    for base in enumerate_dyck(n)? {
        walk_layers(&base, Vec::new(), depth, &mut |snake| {
            report.count += 1;
            let f = match build_feuilletage(snake) {
                Ok(f) => f,
                Err(e) => {
                    report.record(format!("build failed: {e}"));
                    return;
                }
            };
            let edges = (1usize << (depth - 1)) * n;
            if f.n_classes != n + depth || f.edges.len() != edges {
                report.record(format!(
                    "{} classes and {} edges for labels {:?}",
                    f.n_classes,
                    f.edges.len(),
                    snake.layers.iter().map(|l| l.labels.values().to_vec()).collect::<Vec<_>>()
                ));
                return;
            }
            let connected = Graph::from_edges(f.n_classes, &f.edges)
                .and_then(|g| bfs_distances(&g, 0))
                .is_ok();
            if !connected {
                report.record("quotient graph is disconnected".into());
            }
        })?;
    }
    Ok(report)
}

fn walk_layers(
    base: &DyckPath,
    labels: Vec<LabelSeq>,
    depth: usize,
    visit: &mut dyn FnMut(&IteratedSnake),
) -> Result<()> {
    // contour of the next layer to label
    let contour = if labels.is_empty() {
        base.clone()
    } else {
        let snake = IteratedSnake::from_parts(base.clone(), labels.clone())?;
        let last = snake.layers.last().expect("nonempty");
        let (h, _) = crate::encodings::conjugate_labels(&last.labels)?;
        crate::encodings::height_to_contour(&h)?
    };
    if labels.len() + 1 == depth {
        let mut all = labels;
        all.push(LabelSeq::from_vec_unchecked(vec![0; contour.values().len()]));
        let snake = IteratedSnake::from_parts(base.clone(), all)?;
        visit(&snake);
        return Ok(());
    }
    for l in enumerate_labelings(&contour) {
        let mut next = labels.clone();
        next.push(l);
        walk_layers(base, next, depth, visit)?;
    }
    Ok(())
}
