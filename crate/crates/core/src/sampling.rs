//! Seeded random generation of Dyck paths, branching-walk labelings and
//! iterated discrete snakes.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::encodings::{
    conjugate_unchecked, corner_nodes, height_to_contour_unchecked, DyckPath, LabelSeq,
};
use crate::error::{Error, Result};

/// Identifies one replicate's random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed {
    pub master: u64,
    pub replicate: u64,
}

impl Seed {
    pub fn new(master: u64, replicate: u64) -> Self {
        Seed { master, replicate }
    }

    /// ChaCha8 keyed by the master seed, with the replicate index as stream id.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.replicate);
        rng
    }
}

impl std::fmt::Display for Seed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.master, self.replicate)
    }
}

pub fn sample_dyck_uniform(n: usize, seed: Seed) -> Result<DyckPath> {
    sample_dyck_with(n, &mut seed.rng())
}

/// Uniform Dyck path with `2n` steps via the cycle lemma: a uniform
/// arrangement of `n` up-steps and `n + 1` down-steps is rotated to start just
/// after its first minimum, and the final down-step is dropped.
pub fn sample_dyck_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DyckPath> {
    if n == 0 {
        return Err(Error::ZeroSize);
    }
    let len = 2 * n + 1;
    let mut steps = Vec::with_capacity(len);
    let (mut ups, mut downs) = (n as u64, n as u64 + 1);
    for _ in 0..len {
        let up = rng.gen_range(0..ups + downs) < ups;
        if up {
            ups -= 1;
        } else {
            downs -= 1;
        }
        steps.push(up);
    }
    let mut h = 0i64;
    let (mut min, mut start) = (0i64, 0usize);
    for (i, &up) in steps.iter().enumerate() {
        h += if up { 1 } else { -1 };
        if h < min {
            min = h;
            start = i + 1;
        }
    }
    let mut values = Vec::with_capacity(len);
    values.push(0i64);
    let mut h = 0i64;
    for i in 0..len - 1 {
        h += if steps[(start + i) % len] { 1 } else { -1 };
        values.push(h);
    }
    debug_assert_eq!(h, 0);
    Ok(DyckPath::from_vec_unchecked(values))
}

pub fn sample_branching_labels(c: &DyckPath, seed: Seed) -> Result<LabelSeq> {
    let c = DyckPath::new(c.values().to_vec())?;
    Ok(sample_labels_with(&c, &mut seed.rng()))
}

/// Branching random walk on the tree of `c` with increments uniform on
/// {-1, 0, +1}. Increments are drawn node by node in lexicographic order.
pub fn sample_labels_with<R: Rng + ?Sized>(c: &DyckPath, rng: &mut R) -> LabelSeq {
    let values = c.values();
    let mut labels = Vec::with_capacity(values.len());
    let mut stack: Vec<i64> = Vec::with_capacity(64);
    stack.push(0);
    labels.push(0);
    for w in values.windows(2) {
        if w[1] > w[0] {
            let inc = rng.gen_range(0..3i64) - 1;
            let top = *stack.last().expect("root stays on the stack");
            stack.push(top + inc);
        } else {
            stack.pop();
        }
        labels.push(*stack.last().expect("contour stays nonnegative"));
    }
    LabelSeq::from_vec_unchecked(labels)
}

/// One level of an iterated snake.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnakeLayer {
    pub contour: DyckPath,
    pub labels: LabelSeq,
    /// Rotation index of the previous layer's labels that produced this
    /// layer's tree; 0 for the first layer.
    pub shift_a: usize,
}

impl SnakeLayer {
    pub fn n_edges(&self) -> usize {
        self.contour.n_edges()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IteratedSnake {
    pub n: usize,
    pub layers: Vec<SnakeLayer>,
}

impl IteratedSnake {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Layer `j`, 1-based.
    pub fn layer(&self, j: usize) -> Option<&SnakeLayer> {
        j.checked_sub(1).and_then(|i| self.layers.get(i))
    }

    /// Builds a snake from a base contour and the labels of every layer; each
    /// later contour is derived by conjugation. Used by exhaustive oracles.
    pub fn from_parts(base: DyckPath, labels: Vec<LabelSeq>) -> Result<Self> {
        let n = base.n_edges();
        let mut layers = Vec::with_capacity(labels.len());
        let mut contour = base;
        let mut shift_a = 0;
        for (j, l) in labels.into_iter().enumerate() {
            if l.values().len() != contour.values().len() {
                return Err(Error::InconsistentSnake(format!(
                    "layer {} labels have length {} for a contour of length {}",
                    j + 1,
                    l.values().len(),
                    contour.values().len()
                )));
            }
            l.check_corner_consistency(&contour)?;
            let (h, a) = conjugate_unchecked(l.values());
            let next = height_to_contour_unchecked(&h);
            layers.push(SnakeLayer {
                contour,
                labels: l,
                shift_a,
            });
            contour = next;
            shift_a = a;
        }
        Ok(IteratedSnake { n, layers })
    }

    /// Verifies sizes, codec memberships, corner consistency and that every
    /// layer's tree is the conjugation of the previous layer's labels.
    pub fn check_consistency(&self) -> Result<()> {
        if self.n == 0 || self.layers.is_empty() {
            return Err(Error::InconsistentSnake("empty snake".into()));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            let j = i + 1;
            let expected = (1usize << i) * self.n;
            if layer.contour.n_edges() != expected {
                return Err(Error::InconsistentSnake(format!(
                    "layer {j} has {} edges, expected {expected}",
                    layer.contour.n_edges()
                )));
            }
            DyckPath::new(layer.contour.values().to_vec())?;
            LabelSeq::new(layer.labels.values().to_vec())?;
            layer.labels.check_corner_consistency(&layer.contour)?;
            if i == 0 {
                if layer.shift_a != 0 {
                    return Err(Error::InconsistentSnake("layer 1 has a shift".into()));
                }
                continue;
            }
            let (h, a) = conjugate_unchecked(self.layers[i - 1].labels.values());
            if a != layer.shift_a || height_to_contour_unchecked(&h) != layer.contour {
                return Err(Error::InconsistentSnake(format!(
                    "layer {j} is not the conjugation of layer {i}"
                )));
            }
        }
        Ok(())
    }
}

pub fn sample_iterated_snake(n: usize, depth: usize, seed: Seed) -> Result<IteratedSnake> {
    sample_snake_with(n, depth, &mut seed.rng())
}

pub fn sample_snake_with<R: Rng + ?Sized>(
    n: usize,
    depth: usize,
    rng: &mut R,
) -> Result<IteratedSnake> {
    if depth == 0 {
        return Err(Error::ZeroSize);
    }
    let mut contour = sample_dyck_with(n, rng)?;
    let mut shift_a = 0;
    let mut layers = Vec::with_capacity(depth);
    for j in 1..=depth {
        let labels = sample_labels_with(&contour, rng);
        let next = if j < depth {
            let (h, a) = conjugate_unchecked(labels.values());
            Some((height_to_contour_unchecked(&h), a))
        } else {
            None
        };
        layers.push(SnakeLayer {
            contour,
            labels,
            shift_a,
        });
        match next {
            Some((c, a)) => {
                contour = c;
                shift_a = a;
            }
            None => break,
        }
    }
    Ok(IteratedSnake { n, layers })
}

/// Scale factors `(alpha, beta)` for the contour and label processes of level `j`.
pub fn normalization_constants(n: usize, j: u32) -> (f64, f64) {
    let two_n = 2.0 * n as f64;
    let p = |k: u32| 2f64.powi(-(k as i32));
    let alpha = two_n.powf(p(j)) * (2.0f64 / 3.0).powf(1.0 - p(j - 1));
    let beta = two_n.powf(p(j + 1)) * (2.0f64 / 3.0).powf(1.0 - p(j));
    (alpha, beta)
}

/// Per-node label increments recovered from a labeled contour, in
/// lexicographic node order (root excluded).
pub fn node_increments(c: &DyckPath, l: &LabelSeq) -> Vec<i64> {
    let nodes = corner_nodes(c);
    let mut label = vec![0i64; c.n_edges() + 1];
    let mut parent = vec![0usize; c.n_edges() + 1];
    let vals = c.values();
    for k in 1..vals.len() {
        if vals[k] > vals[k - 1] {
            label[nodes[k]] = l.values()[k];
            parent[nodes[k]] = nodes[k - 1];
        }
    }
    (1..label.len()).map(|v| label[v] - label[parent[v]]).collect()
}
