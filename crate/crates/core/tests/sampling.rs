use std::collections::HashMap;

use feuilletage::encodings::{conjugate_labels, corner_nodes, height_to_contour};
use feuilletage::oracles::enumerate_dyck;
use feuilletage::sampling::*;

/// Upper 1% points of the chi-square law, indexed by degrees of freedom.
fn chi2_critical_1pct(df: usize) -> f64 {
    match df {
        1 => 6.635,
        4 => 13.277,
        13 => 27.688,
        _ => panic!("no table entry for df={df}"),
    }
}

fn chi_square_uniform(n: usize, draws: u64, master: u64) -> (f64, usize) {
    let paths = enumerate_dyck(n).unwrap();
    let index: HashMap<Vec<i64>, usize> = paths.iter().enumerate().map(|(i, p)| (p.values().to_vec(), i)).collect();
    let mut counts = vec![0u64; paths.len()];
    for r in 0..draws {
        let c = sample_dyck_uniform(n, Seed::new(master, r)).unwrap();
        counts[index[c.values()]] += 1;
    }
    let expected = draws as f64 / paths.len() as f64;
    let stat = counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    (stat, paths.len() - 1)
}

#[test]
fn dyck_sampler_is_uniform_at_n3() {
    let (stat, df) = chi_square_uniform(3, 100_000, 1);
    assert!(stat < chi2_critical_1pct(df), "chi2={stat}");
}

#[test]
fn dyck_sampler_is_uniform_for_small_n() {
    for n in 2..=4 {
        let (stat, df) = chi_square_uniform(n, 1_000_000, 20 + n as u64);
        assert!(stat < chi2_critical_1pct(df), "n={n} chi2={stat}");
    }
}

#[test]
fn two_paths_at_n2_are_equally_likely() {
    let draws = 100_000;
    let high = (0..draws)
        .filter(|&r| sample_dyck_uniform(2, Seed::new(2, r)).unwrap().values() == [0, 1, 2, 1, 0])
        .count();
    let freq = high as f64 / draws as f64;
    assert!((freq - 0.5).abs() < 0.01, "freq={freq}");
}

#[test]
fn increments_are_uniform_on_three_values() {
    let mut counts = [0u64; 3];
    let mut total = 0u64;
    let mut r = 0;
    while total < 1_000_000 {
        let c = sample_dyck_uniform(1000, Seed::new(3, r)).unwrap();
        let l = sample_branching_labels(&c, Seed::new(4, r)).unwrap();
        for inc in node_increments(&c, &l) {
            counts[(inc + 1) as usize] += 1;
            total += 1;
        }
        r += 1;
    }
    for k in counts {
        let f = k as f64 / total as f64;
        assert!((f - 1.0 / 3.0).abs() < 0.01, "{counts:?}");
    }
}

#[test]
fn labels_are_corner_consistent() {
    for r in 0..50 {
        let c = sample_dyck_uniform(200, Seed::new(7, r)).unwrap();
        let l = sample_branching_labels(&c, Seed::new(8, r)).unwrap();
        let nodes = corner_nodes(&c);
        let mut seen = vec![None; c.n_edges() + 1];
        for (k, &v) in nodes.iter().enumerate() {
            let x = l.values()[k];
            assert_eq!(*seen[v].get_or_insert(x), x);
        }
        assert_eq!(l.values()[0], 0);
    }
}

#[test]
fn random_snakes_are_consistent() {
    for r in 0..100u64 {
        let n = 1 + (r as usize * 37) % 100;
        let d = 1 + (r as usize) % 5;
        let snake = sample_iterated_snake(n, d, Seed::new(9, r)).unwrap();
        snake.check_consistency().unwrap();
        assert_eq!(snake.depth(), d);
        for (j, layer) in snake.layers.iter().enumerate() {
            assert_eq!(layer.contour.values().len(), (1 << (j + 1)) * n + 1);
            layer.labels.check_corner_consistency(&layer.contour).unwrap();
            if j > 0 {
                let (h, a) = conjugate_labels(&snake.layers[j - 1].labels).unwrap();
                assert_eq!(layer.shift_a, a);
                assert_eq!(layer.contour, height_to_contour(&h).unwrap());
            } else {
                assert_eq!(layer.shift_a, 0);
            }
        }
    }
}

#[test]
fn normalizations_chain_across_levels() {
    let n = 1_000_000;
    for j in 1..=10u32 {
        let (alpha, beta) = normalization_constants(n, j);
        let (next_alpha, _) = normalization_constants(n, j + 1);
        assert!((next_alpha - beta).abs() / beta < 1e-12, "j={j}");
        let p = 2f64.powi(j as i32);
        let expected = (2.0 * n as f64).powf(1.0 / p) * (2.0f64 / 3.0).powf(1.0 - 2.0 / p);
        assert!((alpha - expected).abs() / expected < 1e-12);
    }
    assert!((normalization_constants(8, 1).0 - 4.0).abs() < 1e-12);
}

#[test]
fn max_label_scales_like_fourth_root() {
    // band frozen from a 200-sample pilot over the same grid and seeds
    const BAND: (f64, f64) = (1.5, 2.4);
    let mut medians = Vec::new();
    for e in (10..=18).step_by(2) {
        let n = 1usize << e;
        let mut ratios: Vec<f64> = (0..200)
            .map(|i| {
                let c = sample_dyck_uniform(n, Seed::new(5, i)).unwrap();
                let l = sample_branching_labels(&c, Seed::new(6, i)).unwrap();
                let max = l.values().iter().map(|x| x.abs()).max().unwrap();
                max as f64 / (n as f64).powf(0.25)
            })
            .collect();
        ratios.sort_by(f64::total_cmp);
        let median = ratios[ratios.len() / 2];
        assert!(BAND.0 <= median && median <= BAND.1, "n=2^{e} median={median}");
        medians.push(median);
    }
    let lo = medians.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = medians.iter().copied().fold(0.0, f64::max);
    assert!(hi / lo < 1.2, "drift {medians:?}");
}
