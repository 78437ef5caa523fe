use feuilletage::feuilletage::build_layer_quadrangulation_with_nodes;
use feuilletage::metrics::*;
use feuilletage::sampling::{sample_iterated_snake, Seed};
use feuilletage::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(nv: usize, extra: usize, seed: u64, connected: bool) -> Vec<(u32, u32)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    if connected {
        for v in 1..nv {
            edges.push((rng.gen_range(0..v) as u32, v as u32));
        }
    }
    for _ in 0..extra {
        edges.push((rng.gen_range(0..nv) as u32, rng.gen_range(0..nv) as u32));
    }
    edges
}

fn floyd_warshall(nv: usize, edges: &[(u32, u32)]) -> Vec<Vec<u32>> {
    const INF: u32 = u32::MAX / 2;
    let mut d = vec![vec![INF; nv]; nv];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0;
    }
    for &(u, v) in edges {
        if u != v {
            d[u as usize][v as usize] = 1;
            d[v as usize][u as usize] = 1;
        }
    }
    for k in 0..nv {
        for i in 0..nv {
            for j in 0..nv {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn bfs_matches_all_pairs(nv in 1usize..200, extra in 0usize..300, seed in any::<u64>()) {
        let edges = random_graph(nv, extra, seed, true);
        let g = Graph::from_edges(nv, &edges).unwrap();
        let fw = floyd_warshall(nv, &edges);
        for s in [0, nv / 2, nv - 1] {
            prop_assert_eq!(&bfs_distances(&g, s).unwrap(), &fw[s]);
        }
    }

    #[test]
    fn disconnected_graphs_report_unreachable(nv in 2usize..100, extra in 0usize..60, seed in any::<u64>()) {
        let edges = random_graph(nv, extra, seed, false);
        let g = Graph::from_edges(nv, &edges).unwrap();
        let fw = floyd_warshall(nv, &edges);
        let missing: Vec<usize> = (0..nv).filter(|&v| fw[0][v] >= u32::MAX / 2).collect();
        match bfs_distances(&g, 0) {
            Ok(_) => prop_assert!(missing.is_empty()),
            Err(Error::Disconnected { unreachable }) => prop_assert_eq!(unreachable, missing),
            Err(e) => prop_assert!(false, "unexpected error {}", e),
        }
    }

    #[test]
    fn ball_volumes_accumulate_the_profile(nv in 1usize..150, extra in 0usize..200, seed in any::<u64>()) {
        let edges = random_graph(nv, extra, seed, true);
        let g = Graph::from_edges(nv, &edges).unwrap();
        let p = profile(&g, 0).unwrap();
        prop_assert_eq!(p.counts[0], 1);
        prop_assert_eq!(p.total(), nv as u64);
        let b = ball_stats(&p);
        prop_assert!(b.volumes.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(*b.volumes.last().unwrap(), nv as u64);
        prop_assert_eq!(b.ratios[0], 0.0);
        let (ecc, lower) = eccentricity_and_diameter_bound(&g, 0).unwrap();
        prop_assert_eq!(ecc as usize, p.counts.len() - 1);
        prop_assert!(lower >= ecc);
        let diameter = floyd_warshall(nv, &edges).into_iter().flatten().max().unwrap();
        prop_assert!(lower <= diameter);
    }
}

#[test]
fn layer_profiles_follow_the_labels() {
    for r in 0..20u64 {
        let snake = sample_iterated_snake(200, 3, Seed::new(60, r)).unwrap();
        for j in 1..3 {
            let layer = &snake.layers[j - 1];
            let (q, _) = build_layer_quadrangulation_with_nodes(&snake, j).unwrap();
            let edges: Vec<(u32, u32)> = q.map.graph_edges().into_iter().map(|(u, v)| (u as u32, v as u32)).collect();
            let g = Graph::from_edges(q.n_vertices(), &edges).unwrap();
            let p = profile(&g, q.pointed_vertex).unwrap();
            // one label per tree node, read at each node's first corner
            let vals = layer.contour.values();
            let labels = layer.labels.values();
            let min = *labels.iter().min().unwrap();
            let mut expected = vec![1u64];
            for k in 0..vals.len() {
                if k == 0 || vals[k] > vals[k - 1] {
                    let d = (labels[k] - min + 1) as usize;
                    if expected.len() <= d {
                        expected.resize(d + 1, 0);
                    }
                    expected[d] += 1;
                }
            }
            assert_eq!(p.counts, expected, "r={r} j={j}");
        }
    }
}

#[test]
fn summary_mass_counts_the_vertices() {
    for (n, d) in [(1000, 1), (1000, 2), (777, 3), (500, 4)] {
        let s = ensemble_summary(n, d, 8, 61).unwrap();
        let expected = (n + d) as f64 / n as f64;
        assert!((s.profile_mass() - expected).abs() < 1e-9, "n={n} D={d}");
        assert_eq!(s.grid.len(), s.mean_profile.len());
    }
}

#[test]
fn ensembles_do_not_depend_on_thread_count() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| ensemble_summary(3000, 3, 16, 62).unwrap())
    };
    assert_eq!(run(1), run(4));
}

/// Linear interpolation of `ys` sampled at `xs` (increasing), 0 outside.
fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    match xs.iter().position(|&g| g >= x) {
        Some(0) => ys[0],
        Some(i) => {
            let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            ys[i - 1] + t * (ys[i] - ys[i - 1])
        }
        None => 0.0,
    }
}

#[test]
fn normalized_profiles_stabilize() {
    // the profile itself is random: below a few thousand replicates the
    // Monte Carlo error of the mean swamps the finite-size trend
    let ns = [1 << 6, 1 << 8, 1 << 10, 1 << 12];
    let summaries: Vec<EnsembleSummary> = ns.iter().map(|&n| ensemble_summary(n, 2, 8000, 63).unwrap()).collect();
    let eps: Vec<f64> = summaries
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            a.grid
                .iter()
                .zip(&a.mean_profile)
                .map(|(&x, &y)| (y - interpolate(&b.grid, &b.mean_profile, x)).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    eprintln!("sup distances {eps:?}");
    assert!(eps.windows(2).all(|w| w[1] < w[0]), "{eps:?}");
}

#[test]
fn tree_diameter_scale_is_stable_across_seeds() {
    let n = 1 << 16;
    let batch = |master| {
        let mut r: Vec<f64> = (0..40)
            .map(|i| measure_replicate(n, 1, Seed::new(master, i)).unwrap().diameter_lower as f64 / (n as f64).sqrt())
            .collect();
        r.sort_by(f64::total_cmp);
        r[r.len() / 2]
    };
    let (a, b) = (batch(64), batch(65));
    eprintln!("medians {a} {b}");
    assert!((a - b).abs() / a.max(b) < 0.15, "{a} vs {b}");
}

#[test]
fn fit_matches_closed_form_least_squares() {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let points: Vec<(f64, f64)> = (10..=18)
        .map(|e| {
            let x = 2f64.powi(e);
            (x, 3.0 * x.powf(0.3) * (1.0 + rng.gen_range(-0.02..0.02)))
        })
        .collect();
    let fit = fit_exponent(&points).unwrap();
    let k = points.len() as f64;
    let (sx, sy, sxx, sxy) = points.iter().fold((0.0, 0.0, 0.0, 0.0), |acc, &(x, y)| {
        let (lx, ly) = (x.ln(), y.ln());
        (acc.0 + lx, acc.1 + ly, acc.2 + lx * lx, acc.3 + lx * ly)
    });
    let slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    assert!((fit.exponent - slope).abs() < 1e-12);
    assert!((fit.intercept - (sy - slope * sx) / k).abs() < 1e-10);
    assert!((fit.exponent - 0.3).abs() < 0.01);
    assert!(fit.half_width > 0.0 && fit.half_width < 0.02);
    assert!(fit_exponent(&points[..2]).is_err());
}
