//! Graph distances at scale: BFS, profiles, ball volumes, eccentricities,
//! ensemble averages and log-log exponent fits.

use std::collections::VecDeque;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::feuilletage::build_unchecked;
use crate::sampling::{sample_iterated_snake, Seed};

/// Undirected multigraph in compressed adjacency form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Graph {
    pub fn from_edges(n_vertices: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut degree = vec![0usize; n_vertices + 1];
        for &(u, v) in edges {
            for x in [u, v] {
                if x as usize >= n_vertices {
                    return Err(Error::OutOfRange {
                        index: x as usize,
                        max: n_vertices.saturating_sub(1),
                    });
                }
            }
            degree[u as usize + 1] += 1;
            degree[v as usize + 1] += 1;
        }
        for i in 0..n_vertices {
            degree[i + 1] += degree[i];
        }
        let offsets = degree.clone();
        let mut fill = degree;
        let mut targets = vec![0u32; 2 * edges.len()];
        for &(u, v) in edges {
            targets[fill[u as usize]] = v;
            fill[u as usize] += 1;
            targets[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        Ok(Graph { offsets, targets })
    }

    pub fn n_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Exact shortest-path distances from `source`.
pub fn bfs_distances(g: &Graph, source: usize) -> Result<Vec<u32>> {
    let n = g.n_vertices();
    if source >= n {
        return Err(Error::OutOfRange {
            index: source,
            max: n.saturating_sub(1),
        });
    }
    let mut dist = vec![u32::MAX; n];
    dist[source] = 0;
    let mut queue = VecDeque::with_capacity(n.min(1 << 20));
    queue.push_back(source as u32);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v as usize] + 1;
        for &w in g.neighbors(v as usize) {
            if dist[w as usize] == u32::MAX {
                dist[w as usize] = dv;
                queue.push_back(w);
            }
        }
    }
    let unreachable: Vec<usize> = (0..n).filter(|&v| dist[v] == u32::MAX).collect();
    if !unreachable.is_empty() {
        return Err(Error::Disconnected { unreachable });
    }
    Ok(dist)
}

/// `counts[i]`: number of vertices at distance `i` from the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    pub counts: Vec<u64>,
}

impl Profile {
    pub fn from_distances(dist: &[u32]) -> Self {
        let max = dist.iter().copied().max().unwrap_or(0) as usize;
        let mut counts = vec![0u64; max + 1];
        for &d in dist {
            counts[d as usize] += 1;
        }
        Profile { counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "r,count")?;
        for (r, c) in self.counts.iter().enumerate() {
            writeln!(out, "{r},{c}")?;
        }
        Ok(())
    }
}

pub fn profile(g: &Graph, source: usize) -> Result<Profile> {
    Ok(Profile::from_distances(&bfs_distances(g, source)?))
}

/// Cumulative ball volumes and `log(N_r) / log(r + 1)`, taken as 0 at `r = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallStats {
    pub volumes: Vec<u64>,
    pub ratios: Vec<f64>,
}

pub fn ball_stats(p: &Profile) -> BallStats {
    let mut volumes = Vec::with_capacity(p.counts.len());
    let mut acc = 0u64;
    for &c in &p.counts {
        acc += c;
        volumes.push(acc);
    }
    let ratios = volumes
        .iter()
        .enumerate()
        .map(|(r, &v)| ball_ratio(r, v))
        .collect();
    BallStats { volumes, ratios }
}

fn ball_ratio(r: usize, volume: u64) -> f64 {
    if r == 0 {
        0.0
    } else {
        (volume as f64).ln() / ((r + 1) as f64).ln()
    }
}

impl BallStats {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "r,N_r,ratio")?;
        for (r, (v, x)) in self.volumes.iter().zip(&self.ratios).enumerate() {
            writeln!(out, "{r},{v},{x:.12}")?;
        }
        Ok(())
    }
}

/// Eccentricity of `source` and a two-sweep lower bound on the diameter: the
/// eccentricity of a vertex farthest from `source`.
pub fn eccentricity_and_diameter_bound(g: &Graph, source: usize) -> Result<(u32, u32)> {
    let dist = bfs_distances(g, source)?;
    let (far, ecc) = farthest(&dist);
    let (_, second) = farthest(&bfs_distances(g, far)?);
    Ok((ecc, second.max(ecc)))
}

fn farthest(dist: &[u32]) -> (usize, u32) {
    let mut best = (0usize, 0u32);
    for (v, &d) in dist.iter().enumerate() {
        if d > best.1 {
            best = (v, d);
        }
    }
    best
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = CompensatedSum::default();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Everything measured on one sampled feuilletage, from the top tree's root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplicateStats {
    pub profile: Profile,
    pub eccentricity: u32,
    pub diameter_lower: u32,
}

pub fn measure_replicate(n: usize, depth: usize, seed: Seed) -> Result<ReplicateStats> {
    let snake = sample_iterated_snake(n, depth, seed)?;
    let f = build_unchecked(&snake);
    drop(snake);
    let g = Graph::from_edges(f.n_classes, &f.edges)?;
    drop(f);
    let dist = bfs_distances(&g, 0)?;
    let profile = Profile::from_distances(&dist);
    let (far, ecc) = farthest(&dist);
    drop(dist);
    let (_, second) = farthest(&bfs_distances(&g, far)?);
    Ok(ReplicateStats {
        profile,
        eccentricity: ecc,
        diameter_lower: second.max(ecc),
    })
}

/// Mean normalized profile, mean ball statistics and diameter proxies of an
/// ensemble of feuilletages with fixed `(n, D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub n: usize,
    pub depth: usize,
    pub replicates: usize,
    /// Normalized abscissa `r / n^{1/2^D}` of each integer radius.
    pub grid: Vec<f64>,
    /// Mean of `q(r) / n^{1 - 1/2^D}` and its standard error.
    pub mean_profile: Vec<f64>,
    pub profile_stderr: Vec<f64>,
    /// Mean raw profile counts per radius.
    pub mean_counts: Vec<f64>,
    pub mean_volumes: Vec<f64>,
    pub mean_ratios: Vec<f64>,
    pub mean_eccentricity: f64,
    pub mean_diameter_lower: f64,
}

impl EnsembleSummary {
    /// Riemann sum of the mean normalized profile with bin width `n^{-1/2^D}`.
    pub fn profile_mass(&self) -> f64 {
        let width = (self.n as f64).powf(-scale_exponent(self.depth));
        compensated_sum(self.mean_profile.iter().map(|y| y * width))
    }

    pub fn max_mean_ratio(&self) -> f64 {
        self.mean_ratios.iter().copied().fold(0.0, f64::max)
    }

    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,mean,stderr")?;
        for ((x, y), s) in self.grid.iter().zip(&self.mean_profile).zip(&self.profile_stderr) {
            writeln!(out, "{x:.12},{y:.12},{s:.12}")?;
        }
        Ok(())
    }

    pub fn write_profile_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "r,count")?;
        for (r, c) in self.mean_counts.iter().enumerate() {
            writeln!(out, "{r},{c:.12}")?;
        }
        Ok(())
    }

    pub fn write_balls_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "r,N_r,ratio")?;
        for (r, (v, x)) in self.mean_volumes.iter().zip(&self.mean_ratios).enumerate() {
            writeln!(out, "{r},{v:.12},{x:.12}")?;
        }
        Ok(())
    }
}

/// `1 / 2^D`.
pub fn scale_exponent(depth: usize) -> f64 {
    0.5f64.powi(depth as i32)
}

/// Samples replicates `0..replicates` of `seed.master` in parallel on the
/// current rayon pool and reduces them in replicate order.
pub fn ensemble_summary(n: usize, depth: usize, replicates: usize, master: u64) -> Result<EnsembleSummary> {
    if n == 0 || depth == 0 || replicates == 0 {
        return Err(Error::ZeroSize);
    }
    let stats: Vec<ReplicateStats> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| measure_replicate(n, depth, Seed::new(master, r)))
        .collect::<Result<_>>()?;
    Ok(summarize(n, depth, &stats))
}

pub fn summarize(n: usize, depth: usize, stats: &[ReplicateStats]) -> EnsembleSummary {
    let reps = stats.len() as f64;
    let radii = stats.iter().map(|s| s.profile.counts.len()).max().unwrap_or(1);
    let e = scale_exponent(depth);
    let x_scale = (n as f64).powf(-e);
    let y_scale = (n as f64).powf(e - 1.0);
    let mut grid = Vec::with_capacity(radii);
    let mut mean_profile = Vec::with_capacity(radii);
    let mut profile_stderr = Vec::with_capacity(radii);
    let mut mean_counts = Vec::with_capacity(radii);
    let mut mean_volumes = Vec::with_capacity(radii);
    let mut mean_ratios = Vec::with_capacity(radii);
    let mut volumes: Vec<u64> = vec![0; stats.len()];
    for r in 0..radii {
        let counts: Vec<f64> = stats
            .iter()
            .map(|s| s.profile.counts.get(r).copied().unwrap_or(0) as f64)
            .collect();
        for (v, s) in volumes.iter_mut().zip(stats) {
            *v += s.profile.counts.get(r).copied().unwrap_or(0);
        }
        let mean = compensated_sum(counts.iter().copied()) / reps;
        let var = if stats.len() > 1 {
            compensated_sum(counts.iter().map(|c| (c - mean) * (c - mean))) / (reps - 1.0)
        } else {
            0.0
        };
        grid.push(r as f64 * x_scale);
        mean_profile.push(mean * y_scale);
        profile_stderr.push((var / reps).sqrt() * y_scale);
        mean_counts.push(mean);
        mean_volumes.push(compensated_sum(volumes.iter().map(|&v| v as f64)) / reps);
        mean_ratios.push(compensated_sum(volumes.iter().map(|&v| ball_ratio(r, v))) / reps);
    }
    EnsembleSummary {
        n,
        depth,
        replicates: stats.len(),
        grid,
        mean_profile,
        profile_stderr,
        mean_counts,
        mean_volumes,
        mean_ratios,
        mean_eccentricity: compensated_sum(stats.iter().map(|s| s.eccentricity as f64)) / reps,
        mean_diameter_lower: compensated_sum(stats.iter().map(|s| s.diameter_lower as f64)) / reps,
    }
}

/// Slope of `log y` against `log x` by least squares, with a jackknife
/// (leave one point out) 95% half-width.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub exponent: f64,
    pub intercept: f64,
    pub half_width: f64,
}

pub fn fit_exponent(points: &[(f64, f64)]) -> Result<ExponentFit> {
    if points.len() < 3 {
        return Err(Error::Guard {
            what: "fit points (minimum)",
            value: points.len(),
            limit: 3,
        });
    }
    if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::Parse("log-log fit needs positive coordinates".into()));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let (slope, intercept) = ols(&logs);
    let k = logs.len();
    let leave_out: Vec<f64> = (0..k)
        .map(|i| {
            let rest: Vec<(f64, f64)> = logs
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &p)| p)
                .collect();
            ols(&rest).0
        })
        .collect();
    let mean = compensated_sum(leave_out.iter().copied()) / k as f64;
    let var = (k as f64 - 1.0) / k as f64
        * compensated_sum(leave_out.iter().map(|s| (s - mean) * (s - mean)));
    Ok(ExponentFit {
        exponent: slope,
        intercept,
        half_width: 1.96 * var.sqrt(),
    })
}

fn ols(points: &[(f64, f64)]) -> (f64, f64) {
    let k = points.len() as f64;
    let mx = compensated_sum(points.iter().map(|p| p.0)) / k;
    let my = compensated_sum(points.iter().map(|p| p.1)) / k;
    let sxy = compensated_sum(points.iter().map(|p| (p.0 - mx) * (p.1 - my)));
    let sxx = compensated_sum(points.iter().map(|p| (p.0 - mx) * (p.0 - mx)));
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Mean diameter proxies of one ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub n: usize,
    pub eccentricity: f64,
    pub diameter_lower: f64,
}

/// Ensembles over an `n`-grid. The exponent is fitted on the mean root
/// eccentricity; the two-sweep bound is fitted alongside for comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub depth: usize,
    pub points: Vec<ScalingPoint>,
    pub fit: ExponentFit,
    pub diameter_fit: ExponentFit,
}

pub fn scaling_fit(ns: &[usize], depth: usize, replicates: usize, master: u64) -> Result<ScalingFit> {
    let mut points = Vec::with_capacity(ns.len());
    for &n in ns {
        let s = ensemble_summary(n, depth, replicates, master)?;
        points.push(ScalingPoint {
            n,
            eccentricity: s.mean_eccentricity,
            diameter_lower: s.mean_diameter_lower,
        });
    }
    let ecc: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.eccentricity)).collect();
    let diam: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.diameter_lower)).collect();
    Ok(ScalingFit {
        depth,
        points,
        fit: fit_exponent(&ecc)?,
        diameter_fit: fit_exponent(&diam)?,
    })
}
