use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use arc_regret::analysis::{competitive_ratio, competitive_ratio_with, convexity_check, regret_curve, RegretCurve};
use arc_regret::io::{read_price_path, read_problem_file, parse_oneway, write_curve_csv, write_plot_data, write_trace_csv, ProblemSource};
use arc_regret::oneway::{
    guarantee_curve, overall_guarantee, policy_step, random_paths, simulate as replay, MarketSpec, OnewayGrid,
    TradingState,
};
use arc_regret::solve::{solve_plain, VALUE_TOLERANCE};
use arc_regret::verify::{builtin_corpus, Check, Verifier};
use arc_regret::{Error, Result, TreeProblem};

use crate::{CrArgs, GridArgs, MarketArgs, OnewayArgs, SimulateArgs, SweepArgs, VerifyArgs};

pub const EXIT_INPUT: u8 = 1;
pub const EXIT_DEGENERATE: u8 = 2;
pub const EXIT_VERIFY: u8 = 3;

/// Betas of the one-way cross-check.
const CROSSCHECK_BETAS: [f64; 3] = [0.6, 1.0, 1.5];

enum Loaded {
    Tree(Box<dyn TreeProblem + Send + Sync>),
    Market { spec: MarketSpec, grid: Option<OnewayGrid> },
}

fn load(arg: &str) -> Result<Loaded> {
    let source = if arg.trim_start().starts_with("oneway") {
        parse_oneway(1, arg.trim())?
    } else if let Some(entry) = builtin_corpus().into_iter().find(|e| e.name == arg) {
        return Ok(Loaded::Tree(entry.problem));
    } else {
        read_problem_file(Path::new(arg))?
    };
    let grid = source.oneway_grid().transpose()?;
    Ok(match source {
        ProblemSource::Matrix(m) => Loaded::Tree(Box::new(m)),
        ProblemSource::Oneway { spec, .. } => Loaded::Market { spec, grid },
    })
}

fn linspace(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::Input(format!("beta grid needs at least 2 points, got {count}")));
    }
    if !(start.is_finite() && stop.is_finite() && start >= 0.0 && stop > start) {
        return Err(Error::Input(format!("beta grid needs 0 <= start < stop, got {start}..{stop}")));
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|i| if i + 1 == count { stop } else { start + step * i as f64 }).collect())
}

fn io_error(path: &Path, e: io::Error) -> Error {
    Error::Input(format!("cannot write {}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io_error(path, e))
}

fn spec_of(m: &MarketArgs) -> Result<MarketSpec> {
    MarketSpec::new(m.min_price, m.max_price, m.periods)
}

/// Reports go to stderr whenever the CSV output takes stdout.
fn report_sink(csv_to_stdout: bool) -> Box<dyn Write> {
    if csv_to_stdout {
        Box::new(io::stderr())
    } else {
        Box::new(io::stdout())
    }
}

fn curve_for(loaded: &Loaded, grid: &GridArgs) -> Result<RegretCurve> {
    let betas = linspace(grid.start, grid.stop, grid.count)?;
    match loaded {
        Loaded::Tree(p) => regret_curve(p.as_ref(), &betas),
        Loaded::Market { grid: Some(g), .. } => regret_curve(g, &betas),
        Loaded::Market { spec, grid: None } => guarantee_curve(spec, &betas),
    }
}

pub fn sweep(args: &SweepArgs) -> Result<u8> {
    let loaded = load(&args.problem.problem)?;
    let curve = curve_for(&loaded, &args.grid)?;
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            write_curve_csv(&mut w, &curve)?;
            w.flush().map_err(|e| io_error(path, e))?;
        }
        None => write_curve_csv(io::stdout().lock(), &curve)?,
    }
    let plot = args.plot.clone().or_else(|| args.out.as_ref().map(|p| p.with_extension("dat")));
    if let Some(path) = plot {
        let mut w = create(&path)?;
        write_plot_data(&mut w, &curve)?;
        w.flush().map_err(|e| io_error(&path, e))?;
    }
    Ok(0)
}

fn print_cr(out: &mut dyn Write, label: &str, r: &arc_regret::CrResult) -> io::Result<()> {
    writeln!(out, "{label}beta0: {:.6}", r.beta0)?;
    writeln!(out, "{label}tolerance: {:e}", r.tolerance)?;
    writeln!(out, "{label}iterations: {}", r.iterations)?;
    writeln!(out, "{label}degenerate: {}", r.degenerate)?;
    if r.bracket_expanded {
        writeln!(out, "{label}bracket expanded beyond beta = 1")?;
    }
    Ok(())
}

pub fn cr(args: &CrArgs) -> Result<u8> {
    let loaded = load(&args.problem.problem)?;
    let mut out = io::stdout().lock();
    let w = |e: io::Error| Error::Input(e.to_string());
    let degenerate = match &loaded {
        Loaded::Tree(p) => {
            let r = competitive_ratio(p.as_ref(), args.tol)?;
            writeln!(out, "problem: {}", p.name()).map_err(w)?;
            print_cr(&mut out, "", &r).map_err(w)?;
            r.degenerate
        }
        Loaded::Market { spec, grid } => {
            let closed = competitive_ratio_with(|b| overall_guarantee(b, spec), args.tol)?;
            writeln!(out, "market: m={} M={} T={}", spec.min_price(), spec.max_price(), spec.periods()).map_err(w)?;
            print_cr(&mut out, "", &closed).map_err(w)?;
            match grid {
                Some(g) => {
                    let r = competitive_ratio(g, args.tol)?;
                    writeln!(out, "{}", g.name()).map_err(w)?;
                    print_cr(&mut out, "discretized ", &r).map_err(w)?;
                    closed.degenerate || r.degenerate
                }
                None => closed.degenerate,
            }
        }
    };
    Ok(if degenerate { EXIT_DEGENERATE } else { 0 })
}

pub fn oneway(args: &OnewayArgs) -> Result<u8> {
    let spec = spec_of(&args.market)?;
    let betas = linspace(args.start, args.stop, args.count)?;
    let curve = guarantee_curve(&spec, &betas)?;
    match &args.out {
        Some(path) => {
            let mut f = create(path)?;
            write_curve_csv(&mut f, &curve)?;
            f.flush().map_err(|e| io_error(path, e))?;
        }
        None => write_curve_csv(io::stdout().lock(), &curve)?,
    }
    let mut out = report_sink(args.out.is_none());
    let w = |e: io::Error| Error::Input(e.to_string());
    writeln!(out, "market: m={} M={} T={}", spec.min_price(), spec.max_price(), spec.periods()).map_err(w)?;
    let convex = if curve.len() >= 3 {
        convexity_check(&curve, VALUE_TOLERANCE)?.to_string()
    } else {
        "n/a (needs 3 betas)".to_string()
    };
    writeln!(out, "convex: {convex} ({} betas on [{}, {}])", curve.len(), args.start, args.stop).map_err(w)?;
    writeln!(out, "D(1): {:.6}", overall_guarantee(1.0, &spec)?).map_err(w)?;
    let cr = competitive_ratio_with(|b| overall_guarantee(b, &spec), 1e-9)?;
    writeln!(out, "competitive ratio: {:.6}", cr.beta0).map_err(w)?;

    if args.beta > 0.0 {
        writeln!(out, "first-period policy at beta={:.6}:", args.beta).map_err(w)?;
        let start = TradingState::initial(&spec);
        for k in 0..5 {
            let price = spec.min_price() + spec.spread() * k as f64 / 4.0;
            let (sold, _) = policy_step(&start, price, args.beta, &spec)?;
            writeln!(out, "  price {price:.6} sell {sold:.6}").map_err(w)?;
        }
    }

    if let Some(points) = args.crosscheck {
        let grid = OnewayGrid::new(spec, points, args.alloc)?;
        writeln!(out, "crosscheck prices={points} alloc={}:", args.alloc).map_err(w)?;
        for beta in CROSSCHECK_BETAS {
            let closed = overall_guarantee(beta, &spec)?;
            let discrete = solve_plain(&grid, beta)?.value;
            writeln!(
                out,
                "  beta={beta:.6} closed={closed:.6} grid={discrete:.6} gap={:.6}",
                (closed - discrete).abs()
            )
            .map_err(w)?;
        }
    }
    Ok(0)
}

pub fn simulate(args: &SimulateArgs) -> Result<u8> {
    let spec = spec_of(&args.market)?;
    let w = |e: io::Error| Error::Input(e.to_string());
    if let Some(path) = &args.path {
        let prices = read_price_path(path, &spec)?;
        let sim = replay(&prices, args.beta, &spec)?;
        match &args.out {
            Some(p) => {
                let mut f = create(p)?;
                write_trace_csv(&mut f, &sim.trace)?;
                f.flush().map_err(|e| io_error(p, e))?;
            }
            None => write_trace_csv(io::stdout().lock(), &sim.trace)?,
        }
        let mut out = report_sink(args.out.is_none());
        writeln!(
            out,
            "revenue {:.6} regret {:.6} guarantee {:.6} {}",
            sim.revenue,
            sim.regret,
            sim.guarantee,
            if sim.within_guarantee { "PASS" } else { "FAIL" }
        )
        .map_err(w)?;
        return Ok(if sim.within_guarantee { 0 } else { EXIT_VERIFY });
    }

    let count = args.random.unwrap_or(0);
    let paths = random_paths(&spec, count, args.seed);
    let mut summary = match &args.out {
        Some(p) => {
            let mut f = create(p)?;
            writeln!(f, "path,revenue,regret,guarantee,within").map_err(|e| io_error(p, e))?;
            Some((f, p))
        }
        None => None,
    };
    let mut out = io::stdout().lock();
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut guarantee = overall_guarantee(args.beta, &spec)?;
    for (i, prices) in paths.iter().enumerate() {
        let sim = replay(prices, args.beta, &spec)?;
        guarantee = sim.guarantee;
        worst = worst.max(sim.regret);
        if !sim.within_guarantee {
            failures += 1;
            writeln!(out, "FAIL path {i}: regret {:.6} exceeds guarantee {:.6}", sim.regret, sim.guarantee).map_err(w)?;
        }
        if let Some((f, p)) = summary.as_mut() {
            writeln!(f, "{i},{},{},{},{}", sim.revenue, sim.regret, sim.guarantee, sim.within_guarantee)
                .map_err(|e| io_error(p, e))?;
        }
    }
    if let Some((mut f, p)) = summary {
        f.flush().map_err(|e| io_error(p, e))?;
    }
    writeln!(
        out,
        "{count} paths (seed {}): {failures} FAIL, max regret {:.6}, guarantee {guarantee:.6}",
        args.seed,
        if count == 0 { 0.0 } else { worst }
    )
    .map_err(w)?;
    Ok(if failures == 0 { 0 } else { EXIT_VERIFY })
}

pub fn verify(args: &VerifyArgs) -> Result<u8> {
    let mut verifier = Verifier::default();
    if !args.only.is_empty() {
        let checks = args.only.iter().map(|s| s.parse::<Check>()).collect::<Result<Vec<_>>>()?;
        verifier = verifier.only(checks);
    }
    let report = verifier.run(&builtin_corpus());
    println!("{report}");
    Ok(if report.all_passed() { 0 } else { EXIT_VERIFY })
}
