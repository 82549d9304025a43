use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fpfilter::harness::bench::{self, Distribution};
use fpfilter::harness::delaunay::{audit, hull_size_exact, triangulate};
use fpfilter::harness::points::{read_rows, PointSet2};
use fpfilter::harness::precision_map::{render, MapMode, PrecisionMapSpec};
use fpfilter::harness::stats::StageStats;
use fpfilter::harness::{derive_report, eval_rows, torture};
use fpfilter::{parse_expr, Builtin, Expr, Profile, StagedPredicate};

#[derive(Parser)]
#[command(name = "fpfilter", version, about = "Floating-point filters and staged exact predicates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Built-in predicate: orient2d, incircle2d, orient3d or power_side_3d.
    #[arg(long)]
    builtin: Option<Builtin>,
    /// File holding one expression such as `(_1 - _5) * (_4 - _6) - ...`.
    #[arg(long)]
    expr: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> Result<(String, Expr)> {
        match (&self.builtin, &self.expr) {
            (Some(b), _) => Ok((b.name().to_string(), b.expr())),
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let e = parse_expr(&text).with_context(|| format!("parsing {}", path.display()))?;
                Ok((path.display().to_string(), e))
            }
            (None, None) => bail!("pass --builtin or --expr"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the error bound and filter constants of an expression.
    Derive {
        #[command(flatten)]
        source: Source,
        /// Use the underflow-protected rules.
        #[arg(long)]
        ufp: bool,
    },
    /// Evaluate a staged predicate on every row of a points file.
    Eval {
        #[command(flatten)]
        source: Source,
        /// Whitespace or comma separated rows; hex floats are bit-exact.
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value = "safe")]
        profile: Profile,
    },
    /// Run the known failure cases of the naive orientation predicate.
    Torture {
        #[arg(long, default_value = "safe")]
        profile: Profile,
    },
    /// Render orient2d around (3.5, 3.5) at one-ulp steps as a PPM image.
    PrecisionMap {
        #[arg(long)]
        mode: MapMode,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1350)]
        width: usize,
        #[arg(long, default_value_t = 675)]
        height: usize,
    },
    /// Delaunay triangulation with per-stage filter statistics.
    Delaunay {
        /// Number of generated points; a grid uses the largest square that fits.
        #[arg(long, conflicts_with = "points", required_unless_present = "points")]
        random: Option<usize>,
        /// Two coordinates per row.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long, default_value = "uniform")]
        dist: Distribution,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "safe")]
        profile: Profile,
        #[arg(long)]
        stats_out: Option<PathBuf>,
        /// Check every (triangle, vertex) pair with the exact incircle.
        #[arg(long)]
        audit: bool,
    },
    /// Time the staged pipeline against naive, interval and exact evaluation.
    Bench {
        #[arg(long)]
        builtin: Builtin,
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value = "uniform")]
        dist: Distribution,
        #[arg(long, default_value = "fast")]
        profile: Profile,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn print_stats(s: &StageStats) {
    println!("{}:", s.predicate);
    println!("  {:<3} {:<16} {:>12} {:>12} {:>12}", "#", "stage", "calls", "certified", "failures");
    for (k, c) in s.stages.iter().enumerate() {
        println!(
            "  {:<3} {:<16} {:>12} {:>12} {:>12}",
            k + 1,
            c.name,
            c.calls,
            c.certifications,
            c.failures
        );
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Derive { source, ufp } => {
            let (_, e) = source.load()?;
            print!("{}", derive_report(&e, ufp)?);
        }
        Command::Eval { source, points, profile } => {
            let (_, e) = source.load()?;
            let p = StagedPredicate::for_expr(&e, profile)?;
            let rows = read_rows(&points, Some(p.arity()))?;
            for line in eval_rows(&p, &rows)? {
                println!("{line}");
            }
        }
        Command::Torture { profile } => {
            let r = torture::run(profile);
            print!("{r}");
            if r.mismatches() > 0 {
                eprintln!("{} staged result(s) differ from the exact sign", r.mismatches());
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::PrecisionMap { mode, out, width, height } => {
            if width == 0 || height == 0 {
                bail!("width and height must be at least 1");
            }
            let spec = PrecisionMapSpec {
                width,
                height,
                mode,
                ..PrecisionMapSpec::default()
            };
            let map = render(&spec);
            map.write_ppm(&out).with_context(|| format!("writing {}", out.display()))?;
            let c = map.counts();
            println!(
                "{} {}x{}: +1 {}, 0 {}, -1 {}, uncertain {}",
                mode.name(),
                width,
                height,
                c.positive,
                c.zero,
                c.negative,
                c.uncertain
            );
        }
        Command::Delaunay {
            random,
            points,
            dist,
            seed,
            profile,
            stats_out,
            audit: do_audit,
        } => {
            let mut set = match (random, &points) {
                (_, Some(path)) => PointSet2::from_file(path)?,
                (Some(n), None) => match dist {
                    Distribution::Uniform => PointSet2::uniform(n, seed),
                    Distribution::Grid => PointSet2::grid((n as f64).sqrt().floor() as usize, 1.0),
                },
                (None, None) => bail!("pass --random or --points"),
            };
            if points.is_none() {
                set.shuffle(seed);
            }
            let start = Instant::now();
            let t = triangulate(&set.points, profile);
            let wall = start.elapsed();
            println!("points      {}", t.points.len());
            if t.duplicates > 0 {
                println!("duplicates  {} removed", t.duplicates);
            }
            if t.is_empty() {
                eprintln!("warning: fewer than three non-collinear points, triangulation is empty");
            }
            println!("triangles   {}", t.triangle_count());
            println!("hull        {}", t.hull_size());
            println!("wall time   {:.3} s", wall.as_secs_f64());
            print_stats(&t.orient);
            print_stats(&t.incircle);
            if let Some(path) = stats_out {
                let mut csv = format!("{}\n", StageStats::CSV_HEADER);
                t.orient.write_csv_rows(&mut csv);
                t.incircle.write_csv_rows(&mut csv);
                std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
            }
            if do_audit {
                let h = hull_size_exact(&t.points);
                let violations = audit(&t);
                let euler = t.is_empty() || t.triangle_count() + h + 2 == 2 * t.points.len();
                println!("audit       {} violation(s), exact hull {h}, euler {}", violations.len(), if euler { "ok" } else { "FAILED" });
                if !violations.is_empty() || !euler {
                    return Ok(ExitCode::FAILURE);
                }
            }
        }
        Command::Bench { builtin, n, dist, profile, seed } => {
            if n == 0 {
                bail!("--n must be at least 1");
            }
            print!("{}", bench::run(builtin, n, profile, dist, seed));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
