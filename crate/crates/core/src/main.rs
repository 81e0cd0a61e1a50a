//! `selzeta` command-line interface.
//!
//! Exit codes: 0 on success, 1 on verification failure, 2 on usage errors.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use selzeta::cli::{
    self, expsum_grid, GridKind, GrowthScanConfig, Suite, SuiteLimits, XPolicy,
};
use selzeta::expsum::exp_sum_record;
use selzeta::lfunc;
use selzeta::pell::pell4_fundamental;
use selzeta::quadforms::class_data;

#[derive(Parser)]
#[command(
    name = "selzeta",
    version,
    about = "Selberg zeta engine for the modular group: verified class-number/L-value \
             trace sums and critical-strip growth scans"
)]
struct Cli {
    /// Worker threads (default: logical cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory holding the persistent L-value cache (lcache.csv)
    #[arg(long, global = true, env = "SELZETA_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a verification suite and print a JSON report
    Verify(VerifyArgs),
    /// Scan the strip estimate of Z'/Z along a vertical line (CSV + JSON summary)
    GrowthScan(GrowthScanArgs),
    /// Emit object catalogs as CSV
    Catalog(CatalogArgs),
    /// Reduced forms, cycles and narrow class number of one discriminant (JSON)
    Classdata {
        #[arg(long)]
        disc: i64,
    },
    /// Fundamental solution of t^2 - D u^2 = 4 (JSON)
    Pell {
        #[arg(long)]
        disc: i64,
    },
    /// Measure exponential sums against the van der Corput envelope (CSV)
    ExpsumScan(ExpsumScanArgs),
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "kebab-case")]
enum SuiteArg {
    Bykovskii,
    PsiTwoSided,
    LambdaKloosterman,
    Weil,
    ClassnumberFormula,
    PellMinimal,
    L1Threeway,
    Pgt,
    ExpsumEnvelope,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    suite: SuiteArg,
    /// Trace range bound (bykovskii, lambda-kloosterman)
    #[arg(long)]
    tmax: Option<i64>,
    /// Discriminant bound (classnumber-formula, pell-minimal, l1-threeway)
    #[arg(long)]
    dmax: Option<i64>,
    /// Kloosterman modulus bound (weil)
    #[arg(long)]
    cmax: Option<u64>,
    /// Coefficient index bound (lambda-kloosterman)
    #[arg(long)]
    qmax: Option<u64>,
    /// Cutoff x (pgt)
    #[arg(long)]
    x: Option<f64>,
    /// Terms of the direct-series route (l1-threeway)
    #[arg(long)]
    series_terms: Option<u64>,
    /// Reduced limits for a fast smoke pass
    #[arg(long)]
    quick: bool,
}

#[derive(Args)]
struct GrowthScanArgs {
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = 50.0)]
    tmin: f64,
    #[arg(long, default_value_t = 500.0)]
    tmax: f64,
    #[arg(long, value_enum, default_value_t = GridArg::Linear)]
    grid: GridArg,
    #[arg(long, default_value_t = 30)]
    points: usize,
    /// auto (x = T^{20/9}), pair (rows at x and 4x), or fixed:<value>
    #[arg(long, default_value = "pair")]
    x_policy: String,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Linear,
    Log,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct CatalogArgs {
    what: CatalogWhat,
    /// Exclusive trace bound (geodesics)
    #[arg(long, default_value_t = 20)]
    tmax: i64,
    /// Inclusive discriminant bound (classdata, pell, lvalue)
    #[arg(long, default_value_t = 100)]
    dmax: i64,
}

#[derive(Clone, Copy, ValueEnum)]
enum CatalogWhat {
    Geodesics,
    Classdata,
    Pell,
    Lvalue,
}

#[derive(Args)]
struct ExpsumScanArgs {
    /// Comma-separated T values (default: the standard grid 1e2,1e3,1e4)
    #[arg(long)]
    t_list: Option<String>,
    /// Comma-separated q2 values
    #[arg(long, default_value = "1,2,5")]
    q2_list: String,
    /// Comma-separated k values
    #[arg(long, default_value = "0,1,2")]
    k_list: String,
}

const USAGE_ERROR: u8 = 2;
const VERIFY_FAILURE: u8 = 1;

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(n) = cli.threads {
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("warning: thread pool already initialized, --threads ignored");
        }
    }

    let cache_path = cli.cache_dir.as_ref().map(|d| d.join("lcache.csv"));
    if let Some(path) = &cache_path {
        if path.exists() {
            match lfunc::cache().load_csv(path) {
                Ok(n) => eprintln!("loaded {n} cached L-values from {}", path.display()),
                Err(e) => {
                    eprintln!("error: cannot read L-cache {}: {e}", path.display());
                    return ExitCode::from(USAGE_ERROR);
                }
            }
        }
    }

    let code = match run(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(USAGE_ERROR)
        }
    };

    if let Some(path) = &cache_path {
        if let Err(e) = lfunc::cache().save_csv(path) {
            eprintln!("warning: could not rewrite L-cache {}: {e}", path.display());
        }
    }
    code
}

fn run(cmd: Cmd) -> selzeta::Result<ExitCode> {
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    match cmd {
        Cmd::Verify(args) => {
            let limits = build_limits(&args);
            let reports = match args.suite {
                SuiteArg::All => cli::run_all(&limits),
                s => vec![cli::run_suite(to_suite(s), &limits)],
            };
            let passed = reports.iter().all(|r| r.passed);
            let json = if reports.len() == 1 {
                serde_json::to_string_pretty(&reports[0])
            } else {
                serde_json::to_string_pretty(&reports)
            }
            .expect("report serialization");
            writeln!(out, "{json}").expect("stdout");
            out.flush().expect("stdout");
            Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(VERIFY_FAILURE) })
        }
        Cmd::GrowthScan(args) => {
            let cfg = GrowthScanConfig {
                sigma: args.sigma,
                tmin: args.tmin,
                tmax: args.tmax,
                grid: match args.grid {
                    GridArg::Linear => GridKind::Linear,
                    GridArg::Log => GridKind::Log,
                },
                points: args.points,
                x_policy: XPolicy::parse(&args.x_policy)?,
            };
            let (rows, summary) = cli::growth_scan(&cfg)?;
            match args.format {
                FormatArg::Csv => {
                    cli::write_growth_csv(&mut out, &rows).expect("stdout");
                    let sj = serde_json::to_string(&summary).expect("summary serialization");
                    writeln!(out, "# {sj}").expect("stdout");
                }
                FormatArg::Json => {
                    let doc = serde_json::json!({ "rows": rows, "summary": summary });
                    writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap())
                        .expect("stdout");
                }
            }
            out.flush().expect("stdout");
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Catalog(args) => {
            match args.what {
                CatalogWhat::Geodesics => {
                    let rows = cli::catalog_geodesics(args.tmax)?;
                    cli::write_geodesics_csv(&mut out, &rows).expect("stdout");
                }
                CatalogWhat::Classdata => {
                    let rows = cli::catalog_classdata(args.dmax)?;
                    cli::write_classdata_csv(&mut out, &rows).expect("stdout");
                }
                CatalogWhat::Pell => {
                    let rows = cli::catalog_pell(args.dmax)?;
                    cli::write_pell_csv(&mut out, &rows).expect("stdout");
                }
                CatalogWhat::Lvalue => {
                    let rows = cli::catalog_lvalue(args.dmax)?;
                    cli::write_lvalue_csv(&mut out, &rows).expect("stdout");
                }
            }
            out.flush().expect("stdout");
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Classdata { disc } => {
            let cd = class_data(disc)?;
            let forms: Vec<[i64; 3]> =
                cd.reduced_forms.iter().map(|f| [f.a(), f.b(), f.c()]).collect();
            let cycles: Vec<Vec<[i64; 3]>> = cd
                .cycles
                .iter()
                .map(|c| c.iter().map(|f| [f.a(), f.b(), f.c()]).collect())
                .collect();
            let doc = serde_json::json!({
                "discriminant": cd.discriminant,
                "h_narrow": cd.h_narrow,
                "reduced_forms": forms,
                "cycles": cycles,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap()).expect("stdout");
            out.flush().expect("stdout");
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Pell { disc } => {
            let pf = pell4_fundamental(disc)?;
            let doc = serde_json::json!({
                "discriminant": pf.discriminant(),
                "t": pf.t().to_string(),
                "u": pf.u().to_string(),
                "log_eps1": pf.log_eps1(),
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap()).expect("stdout");
            out.flush().expect("stdout");
            Ok(ExitCode::SUCCESS)
        }
        Cmd::ExpsumScan(args) => {
            let ts = match &args.t_list {
                Some(s) => parse_list::<f64>(s, "t-list")?,
                None => vec![1e2, 1e3, 1e4],
            };
            let q2s = parse_list::<u64>(&args.q2_list, "q2-list")?;
            let ks = parse_list::<i64>(&args.k_list, "k-list")?;
            let mut records = Vec::new();
            if args.t_list.is_none() && args.q2_list == "1,2,5" && args.k_list == "0,1,2" {
                for (k, q2, t, n) in expsum_grid() {
                    records.push(exp_sum_record(k, q2, t, n));
                }
            } else {
                for &t in &ts {
                    for n in [t.powf(1.0 / 3.0), t.powf(2.0 / 3.0), t, 4.0 * t] {
                        let n = n.max(3.0);
                        for &q2 in &q2s {
                            for &k in &ks {
                                records.push(exp_sum_record(k, q2, t, n));
                            }
                        }
                    }
                }
            }
            cli::write_expsum_csv(&mut out, &records).expect("stdout");
            out.flush().expect("stdout");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn to_suite(s: SuiteArg) -> Suite {
    match s {
        SuiteArg::Bykovskii => Suite::Bykovskii,
        SuiteArg::PsiTwoSided => Suite::PsiTwoSided,
        SuiteArg::LambdaKloosterman => Suite::LambdaKloosterman,
        SuiteArg::Weil => Suite::Weil,
        SuiteArg::ClassnumberFormula => Suite::ClassnumberFormula,
        SuiteArg::PellMinimal => Suite::PellMinimal,
        SuiteArg::L1Threeway => Suite::L1Threeway,
        SuiteArg::Pgt => Suite::Pgt,
        SuiteArg::ExpsumEnvelope => Suite::ExpsumEnvelope,
        SuiteArg::All => unreachable!("handled by caller"),
    }
}

fn build_limits(args: &VerifyArgs) -> SuiteLimits {
    let mut limits = if args.quick { SuiteLimits::quick() } else { SuiteLimits::standard() };
    if let Some(t) = args.tmax {
        limits.bykovskii_tmax = t;
        limits.lambda_tmax = t;
    }
    if let Some(d) = args.dmax {
        limits.class_dmax = d;
        limits.pell_dmax = d;
        limits.l1_dmax = d;
    }
    if let Some(c) = args.cmax {
        limits.weil_cmax = c;
    }
    if let Some(q) = args.qmax {
        limits.lambda_qmax = q;
    }
    if let Some(x) = args.x {
        limits.pgt_x = x;
    }
    if let Some(n) = args.series_terms {
        limits.l1_series_terms = n;
    }
    limits
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> selzeta::Result<Vec<T>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| selzeta::Error::InvalidParameter(format!("bad {what} entry '{p}'")))
        })
        .collect()
}
