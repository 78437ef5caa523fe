use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use feuilletage::encodings::write_process_csv;
use feuilletage::feuilletage::{build_feuilletage, write_edge_list};
use feuilletage::metrics::{ensemble_summary, scaling_fit, EnsembleSummary, ScalingFit};
use feuilletage::oracles::{
    catalan, enumerate_dyck, enumerate_labeled_trees, verify_cvs_exhaustive,
    verify_feuilletage_counts, EnumerationReport, MAX_CVS_N, MAX_FEUILLETAGE_D, MAX_FEUILLETAGE_N,
};
use feuilletage::permmaps::nested_ncp_encode;
use feuilletage::sampling::{sample_iterated_snake, IteratedSnake, Seed};
use feuilletage::svg::polyline_plot;

/// Largest top-tree edge count accepted (class ids are 32-bit).
const MAX_TOP_EDGES: usize = 1 << 31;

#[derive(Parser, Debug)]
#[command(name = "feuilletage", version, about = "Sample, verify and measure iterated discrete feuilletages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample iterated snakes and write layer processes and the quotient edge list.
    Sample(SampleArgs),
    /// Run the exhaustive small-size oracle suite.
    Verify(VerifyArgs),
    /// Ensemble statistics: mean profiles, ball growth, diameter exponents.
    Stats(StatsArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Base tree size (edges of the layer-1 tree).
    #[arg(long)]
    n: usize,
    /// Number of layers D.
    #[arg(long)]
    depth: usize,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    /// Drop loops and parallel edges from the exported edge list.
    #[arg(long)]
    simplify_edges: bool,
    /// Also write the nested non-crossing permutation encoding.
    #[arg(long)]
    ncp: bool,
    /// Plot each layer's contour and label processes.
    #[arg(long, overrides_with = "no_svg")]
    svg: bool,
    #[arg(long, overrides_with = "svg")]
    no_svg: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Largest size checked by the exhaustive bijection oracle (1 to 5).
    #[arg(long, default_value_t = MAX_CVS_N)]
    max_n: usize,
    /// Optional directory for a CSV of failure witnesses.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Test hook: corrupt the expected-count table.
    #[arg(long, hide = true)]
    corrupt_table: bool,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 200)]
    replicates: usize,
    /// Also fit the diameter exponent over n = 2^a..=2^b, given as `a:b`.
    #[arg(long, value_parser = parse_grid)]
    fit_grid: Option<(u32, u32)>,
    #[arg(long, default_value_t = 640)]
    width: u32,
    #[arg(long, default_value_t = 420)]
    height: u32,
    /// Write SVG plots (default).
    #[arg(long, overrides_with = "no_svg")]
    svg: bool,
    #[arg(long, overrides_with = "svg")]
    no_svg: bool,
}

fn parse_grid(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once(':').ok_or("expected a:b")?;
    let a: u32 = a.parse().map_err(|e| format!("{e}"))?;
    let b: u32 = b.parse().map_err(|e| format!("{e}"))?;
    if a > b || b > 40 || b - a < 2 {
        return Err("need a < b <= 40 with at least 3 grid points".into());
    }
    Ok((a, b))
}

enum Failure {
    /// Bad configuration or guard violation: exit 2.
    Usage(String),
    /// Verification failed or a runtime error occurred: exit 1.
    Run(String),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

impl From<feuilletage::Error> for Failure {
    fn from(e: feuilletage::Error) -> Self {
        match e {
            feuilletage::Error::Guard { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Run(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Stats(a) => cmd_stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    let threads = match threads {
        Some(0) => return Err(Failure::Usage("--threads must be at least 1".into())),
        Some(t) => t,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Run(e.to_string()))
}

fn validate_size(n: usize, depth: usize) -> Result<(), Failure> {
    if n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    if depth == 0 {
        return Err(Failure::Usage("--depth must be at least 1".into()));
    }
    let top = (depth < 40)
        .then(|| n.checked_mul(1usize << (depth - 1)))
        .flatten();
    match top {
        Some(e) if e <= MAX_TOP_EDGES => Ok(()),
        _ => Err(Failure::Usage(format!(
            "n * 2^(D-1) must not exceed {MAX_TOP_EDGES}"
        ))),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Run(format!("{}: {e}", path.display())))
}

fn io_at<T>(path: &Path, r: std::io::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Run(format!("{}: {e}", path.display())))
}

fn make_dir(dir: &Path) -> Result<(), Failure> {
    io_at(dir, fs::create_dir_all(dir))
}

/// First line of every output file: the command and its result-relevant
/// flags as `flag=value`. Thread count and output directory do not affect
/// results and are left out, so reruns compare byte for byte.
fn header_line(command: &str, fields: &[(&str, String)]) -> String {
    let mut s = format!("# feuilletage {command}");
    for (k, v) in fields {
        if v.is_empty() {
            s.push_str(&format!(" {k}"));
        } else {
            s.push_str(&format!(" {k}={v}"));
        }
    }
    s
}

fn cmd_sample(a: &SampleArgs) -> Result<(), Failure> {
    let c = &a.common;
    validate_size(c.n, c.depth)?;
    if a.replicates == 0 {
        return Err(Failure::Usage("--replicates must be at least 1".into()));
    }
    let svg = a.svg && !a.no_svg;
    let mut fields = vec![
        ("n", c.n.to_string()),
        ("depth", c.depth.to_string()),
        ("seed", c.seed.to_string()),
        ("replicates", a.replicates.to_string()),
    ];
    if a.simplify_edges {
        fields.push(("simplify-edges", String::new()));
    }
    let header = header_line("sample", &fields);
    make_dir(&c.out)?;
    let pool = pool(c.threads)?;
    pool.install(|| {
        (0..a.replicates as u64)
            .into_par_iter()
            .map(|r| {
                let dir = if a.replicates == 1 {
                    c.out.clone()
                } else {
                    c.out.join(format!("r{r}"))
                };
                make_dir(&dir)?;
                let seed = Seed::new(c.seed, r);
                let snake = sample_iterated_snake(c.n, c.depth, seed)?;
                write_sample(&dir, &header, &snake, seed, a, svg)
            })
            .collect::<Result<Vec<()>, Failure>>()
    })?;
    Ok(())
}

fn write_sample(
    dir: &Path,
    header: &str,
    snake: &IteratedSnake,
    seed: Seed,
    a: &SampleArgs,
    svg: bool,
) -> Result<(), Failure> {
    for (i, layer) in snake.layers.iter().enumerate() {
        let path = dir.join(format!("layer_{}.csv", i + 1));
        let mut w = create(&path)?;
        io_at(&path, writeln!(w, "{header} replicate={}", seed.replicate))?;
        io_at(&path, write_process_csv(&mut w, i + 1, snake.n, &layer.contour, &layer.labels))?;
        io_at(&path, w.flush())?;
        if svg {
            let path = dir.join(format!("layer_{}.svg", i + 1));
            let c: Vec<(f64, f64)> = layer.contour.values().iter().enumerate().map(|(k, &v)| (k as f64, v as f64)).collect();
            let l: Vec<(f64, f64)> = layer.labels.values().iter().enumerate().map(|(k, &v)| (k as f64, v as f64)).collect();
            let plot = polyline_plot(&format!("layer {} processes", i + 1), &[("contour", c), ("labels", l)], 900, 360);
            io_at(&path, fs::write(&path, format!("<!-- {} replicate={} -->\n{plot}", header.trim_start_matches("# "), seed.replicate)))?;
        }
    }
    let f = build_feuilletage(snake)?;
    let path = dir.join("feuilletage.edges");
    let mut w = create(&path)?;
    io_at(&path, writeln!(w, "{header} replicate={}", seed.replicate))?;
    io_at(&path, write_edge_list(&mut w, &f, seed, a.simplify_edges))?;
    io_at(&path, w.flush())?;
    if a.ncp {
        let path = dir.join("nested.ncp");
        let ncp = nested_ncp_encode(snake)?;
        io_at(&path, fs::write(&path, format!("{header} replicate={}\n{}", seed.replicate, ncp.to_text())))?;
    }
    Ok(())
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), Failure> {
    if !(1..=MAX_CVS_N).contains(&a.max_n) {
        return Err(Failure::Usage(format!(
            "--max-n must be between 1 and {MAX_CVS_N}, got {}",
            a.max_n
        )));
    }
    let pool = pool(a.threads)?;
    let mut reports: Vec<EnumerationReport> = Vec::new();
    for n in 1..=a.max_n {
        let paths = enumerate_dyck(n)?;
        reports.push(EnumerationReport {
            n,
            family: "dyck".into(),
            count: paths.len() as u64,
            formula_count: catalan(n),
            mismatches: Vec::new(),
        });
        let trees = enumerate_labeled_trees(n)?;
        reports.push(EnumerationReport {
            n,
            family: "labeled-trees".into(),
            count: trees.len() as u64,
            formula_count: 3u64.pow(n as u32) * catalan(n),
            mismatches: Vec::new(),
        });
    }
    let cvs: Vec<EnumerationReport> = pool.install(|| {
        (1..=a.max_n)
            .into_par_iter()
            .map(verify_cvs_exhaustive)
            .collect::<Result<_, _>>()
    })?;
    reports.extend(cvs);
    let pairs: Vec<(usize, usize)> = (1..=a.max_n.min(MAX_FEUILLETAGE_N))
        .flat_map(|n| (1..=MAX_FEUILLETAGE_D).map(move |d| (n, d)))
        .collect();
    let feuil: Vec<EnumerationReport> = pool.install(|| {
        pairs
            .par_iter()
            .map(|&(n, d)| verify_feuilletage_counts(n, d))
            .collect::<Result<_, _>>()
    })?;
    reports.extend(feuil);
    if a.corrupt_table {
        for r in &mut reports {
            r.formula_count += 1;
        }
    }
    let mut failed = false;
    for r in &reports {
        println!("{r}");
        failed |= !r.passed();
    }
    if let Some(dir) = &a.out {
        make_dir(dir)?;
        let path = dir.join("witnesses.csv");
        let mut w = create(&path)?;
        io_at(&path, writeln!(w, "{}", header_line("verify", &[("max-n", a.max_n.to_string())])))?;
        io_at(&path, writeln!(w, "family,n,witness"))?;
        for r in &reports {
            for m in &r.mismatches {
                io_at(&path, writeln!(w, "{},{},\"{}\"", r.family, r.n, m.replace('"', "'")))?;
            }
        }
        io_at(&path, w.flush())?;
    }
    if failed {
        println!("FAIL");
        Err(Failure::Run("verification failed".into()))
    } else {
        println!("PASS");
        Ok(())
    }
}

fn cmd_stats(a: &StatsArgs) -> Result<(), Failure> {
    let c = &a.common;
    validate_size(c.n, c.depth)?;
    if a.replicates == 0 {
        return Err(Failure::Usage("--replicates must be at least 1".into()));
    }
    if let Some((_, b)) = a.fit_grid {
        validate_size(1usize << b, c.depth)?;
    }
    let svg = !a.no_svg;
    let mut fields = vec![
        ("n", c.n.to_string()),
        ("depth", c.depth.to_string()),
        ("seed", c.seed.to_string()),
        ("replicates", a.replicates.to_string()),
    ];
    if let Some((lo, hi)) = a.fit_grid {
        fields.push(("fit-grid", format!("{lo}:{hi}")));
    }
    let header = header_line("stats", &fields);
    make_dir(&c.out)?;
    let pool = pool(c.threads)?;
    let summary = pool.install(|| ensemble_summary(c.n, c.depth, a.replicates, c.seed))?;
    write_stats(&c.out, &header, &summary, a, svg)?;
    if let Some((lo, hi)) = a.fit_grid {
        let ns: Vec<usize> = (lo..=hi).map(|k| 1usize << k).collect();
        let fit = pool.install(|| scaling_fit(&ns, c.depth, a.replicates, c.seed))?;
        write_scaling(&c.out, &header, &fit)?;
        println!(
            "D={} exponent={:.4} half_width={:.4}",
            fit.depth, fit.fit.exponent, fit.fit.half_width
        );
    }
    println!(
        "n={} D={} replicates={} mass={:.12} max_mean_ratio={:.6}",
        summary.n,
        summary.depth,
        summary.replicates,
        summary.profile_mass(),
        summary.max_mean_ratio()
    );
    Ok(())
}

fn write_stats(dir: &Path, header: &str, s: &EnsembleSummary, a: &StatsArgs, svg: bool) -> Result<(), Failure> {
    let files: [(&str, fn(&EnsembleSummary, &mut BufWriter<File>) -> std::io::Result<()>); 3] = [
        ("profile.csv", |s, w| s.write_profile_csv(w)),
        ("balls.csv", |s, w| s.write_balls_csv(w)),
        ("summary.csv", |s, w| {
            writeln!(
                w,
                "# mass={:.12} mean_eccentricity={:.6} mean_diameter_lower={:.6}",
                s.profile_mass(),
                s.mean_eccentricity,
                s.mean_diameter_lower
            )?;
            s.write_summary_csv(w)
        }),
    ];
    for (name, write) in files {
        let path = dir.join(name);
        let mut w = create(&path)?;
        io_at(&path, writeln!(w, "{header}"))?;
        io_at(&path, write(s, &mut w))?;
        io_at(&path, w.flush())?;
    }
    if svg {
        let profile: Vec<(f64, f64)> = s.grid.iter().copied().zip(s.mean_profile.iter().copied()).collect();
        let ratios: Vec<(f64, f64)> = s.mean_ratios.iter().enumerate().skip(1).map(|(r, &x)| (r as f64, x)).collect();
        let plots = [
            ("profile.svg", polyline_plot(&format!("mean normalized profile n={} D={}", s.n, s.depth), &[("profile", profile)], a.width, a.height)),
            ("balls.svg", polyline_plot(&format!("mean log N_r / log(r+1) n={} D={}", s.n, s.depth), &[("ratio", ratios)], a.width, a.height)),
        ];
        for (name, body) in plots {
            let path = dir.join(name);
            io_at(&path, fs::write(&path, format!("<!-- {} -->\n{body}", header.trim_start_matches("# "))))?;
        }
    }
    Ok(())
}

fn write_scaling(dir: &Path, header: &str, fit: &ScalingFit) -> Result<(), Failure> {
    let path = dir.join("scaling.csv");
    let mut w = create(&path)?;
    io_at(&path, writeln!(w, "{header}"))?;
    io_at(
        &path,
        writeln!(
            w,
            "# exponent={:.6} half_width={:.6} two_sweep_exponent={:.6} two_sweep_half_width={:.6}",
            fit.fit.exponent, fit.fit.half_width, fit.diameter_fit.exponent, fit.diameter_fit.half_width
        ),
    )?;
    io_at(&path, writeln!(w, "n,mean_eccentricity,mean_diameter_lower,exponent"))?;
    for p in &fit.points {
        io_at(
            &path,
            writeln!(w, "{},{:.6},{:.6},{:.6}", p.n, p.eccentricity, p.diameter_lower, fit.fit.exponent),
        )?;
    }
    io_at(&path, w.flush())
}
