//! Command-line surface for the symmetrised-bidisc toolkit: distance
//! queries, extremal scans, automorphism application, geodesic queries,
//! hereditary positivity checks, kernel tests, and the selftest suite.
//!
//! Conventions: complex literals are "re,im" pairs; JSON serializes complex
//! numbers as [re, im]; CSV uses 17 significant digits and LF endings; all
//! randomized modes take --seed so identical invocations are byte-identical.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 parse/schema, 3 domain
//! membership, 4 commutation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use symbidisc_core::cara_metric::{cara_distance, SearchConfig};
use symbidisc_core::disc_geometry::DiscError;
use symbidisc_core::hereditary::{positivity, HeredError};
use symbidisc_core::kernels::{
    extremal_quotient_check, gram, is_psd, magic_sandwich_identity, numeric_rank, szego,
};
use symbidisc_core::sampling::{g_point, seeded_rng, x_only_poly};
use symbidisc_core::symm_bidisc::{
    flat_point, flat_through, on_royal, phi, royal, royal_intersection, GError,
};
use symbidisc_core::{
    CirclePoint, CommutingTuple, ComplexMatrix, DiscPoint, FlatGeodesic, GAutomorphism, GPoint,
    HereditaryPolynomial, MoebiusMap, SelftestConfig, SelftestLevel,
};

const EXIT_INVARIANT: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_MEMBERSHIP: u8 = 3;
const EXIT_COMMUTATION: u8 = 4;

#[derive(Debug)]
enum CliError {
    Invariant(String),
    Parse(String),
    Membership(String),
    Commutation(f64),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invariant(_) => EXIT_INVARIANT,
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Membership(_) => EXIT_MEMBERSHIP,
            CliError::Commutation(_) => EXIT_COMMUTATION,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Invariant(m) | CliError::Parse(m) | CliError::Membership(m) => m.clone(),
            CliError::Commutation(r) => {
                format!("tuple does not commute: commutation residual {r:.17e}")
            }
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "symbidisc",
    version,
    about = "Geometry of the symmetrised bidisc: distances, geodesics, automorphisms, \
             hereditary positivity, and kernel tests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Caratheodory distance between two points of G with extremal data.
    Distance(DistanceArgs),
    /// Distance table from a fixed point over a grid, as CSV.
    Scan(ScanArgs),
    /// Apply an automorphism tau(m) to a point or a flat geodesic.
    Automorphism(AutomorphismArgs),
    /// Flat geodesic through a point, and royal-intersection data.
    Geodesic(GeodesicArgs),
    /// Evaluate a hereditary polynomial on a commuting tuple.
    Hered(HeredArgs),
    /// Positivity and rank tests for kernels on the disc and on G.
    Kernel(KernelArgs),
    /// Run the deterministic invariant suite.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct DistanceArgs {
    /// First point as two complex literals: s then p.
    #[arg(long, num_args = 2, value_names = ["S", "P"], required = true, allow_hyphen_values = true)]
    x: Vec<String>,
    /// Second point as two complex literals: s then p.
    #[arg(long, num_args = 2, value_names = ["S", "P"], required = true, allow_hyphen_values = true)]
    y: Vec<String>,
    /// Uniform angle samples for the extremal search grid.
    #[arg(long, default_value_t = 1024)]
    samples: usize,
    /// Golden-section refinement tolerance on the angle.
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    output_format: OutputFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScanMode {
    /// Rectangular grid in (s, p): both coordinates interpolate between
    /// two complex corners; points outside G are dropped.
    Rect,
    /// Royal-variety grid (2 lambda, lambda^2) over a lambda segment.
    Royal,
    /// Flat-geodesic grid along F_beta over a lambda segment.
    Flat,
}

#[derive(Args)]
struct ScanArgs {
    /// Base point as two complex literals: s then p.
    #[arg(long, num_args = 2, value_names = ["S", "P"], required = true, allow_hyphen_values = true)]
    x: Vec<String>,
    #[arg(long, value_enum)]
    mode: ScanMode,
    /// Segment for s in rect mode: "c0:c1:n" with complex endpoints.
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    /// Segment for p in rect mode: "c0:c1:n" with complex endpoints.
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    /// Lambda segment for royal and flat modes: "c0:c1:n".
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Flat parameter beta for flat mode.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long, default_value_t = 1024)]
    samples: usize,
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    output_format: OutputFormat,
}

#[derive(Args)]
struct AutomorphismArgs {
    /// Unimodular rotation factor of the Moebius map.
    #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
    rotation: String,
    /// Center (zero of the Blaschke factor), inside the disc.
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    center: String,
    /// Point of G to map, as two complex literals: s then p.
    #[arg(long, num_args = 2, value_names = ["S", "P"], allow_hyphen_values = true)]
    point: Option<Vec<String>>,
    /// Flat-geodesic parameter to map; reports the image parameter.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
}

#[derive(Args)]
struct GeodesicArgs {
    /// Point of G; reports the unique flat geodesic through it.
    #[arg(long, num_args = 2, value_names = ["S", "P"], allow_hyphen_values = true)]
    through: Option<Vec<String>>,
    /// Flat parameter; reports royal-intersection data for F_beta.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    /// With --beta: also evaluate the geodesic point at this parameter.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
}

#[derive(Args)]
struct HeredArgs {
    /// Path to the hereditary polynomial JSON.
    #[arg(long)]
    h: PathBuf,
    /// Path to the commuting-tuple JSON.
    #[arg(long)]
    tuple: PathBuf,
    /// Eigenvalue slack for the psd verdict.
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelMode {
    /// Szego Gram matrix on given disc points: psd verdict and rank.
    Szego,
    /// Extremal-form quotient kernel on seeded G points: psd, rank <= 1.
    Extremal,
    /// Moebius sandwich identity residual on seeded G points.
    Sandwich,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long, value_enum)]
    mode: KernelMode,
    /// Disc points for szego mode, one complex literal each.
    #[arg(long, num_args = 1.., allow_hyphen_values = true)]
    points: Vec<String>,
    /// Unimodular magic-function parameter (extremal and sandwich modes).
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    /// Rotation of the sandwiching Moebius map (sandwich mode).
    #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
    rotation: String,
    /// Center of the sandwiching Moebius map (sandwich mode).
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    center: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Number of seeded sample points (extremal and sandwich modes).
    #[arg(long, default_value_t = 8)]
    samples: usize,
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Level {
    Quick,
    Full,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Level::Full)]
    level: Level,
    /// Negative-control hook: flips a sign in the magic function so the
    /// royal-collapse check must fail.
    #[arg(long, hide = true)]
    perturb_phi_sign: bool,
}

// ---------------------------------------------------------------------------
// Parsing helpers.

fn parse_complex(text: &str) -> CliResult<Complex64> {
    let bad = || {
        CliError::Parse(format!(
            "expected a complex literal \"re,im\", got {text:?}"
        ))
    };
    let parts: Vec<&str> = text.trim().split(',').collect();
    let z = match parts.as_slice() {
        [re] => Complex64::new(re.trim().parse().map_err(|_| bad())?, 0.0),
        [re, im] => Complex64::new(
            re.trim().parse().map_err(|_| bad())?,
            im.trim().parse().map_err(|_| bad())?,
        ),
        _ => return Err(bad()),
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(bad())
    }
}

fn parse_g_point(pair: &[String]) -> CliResult<GPoint> {
    let s = parse_complex(&pair[0])?;
    let p = parse_complex(&pair[1])?;
    GPoint::new(s, p).map_err(|e| match e {
        GError::NotInG(modulus) => CliError::Membership(format!(
            "point (s, p) = ({}, {}) is not in G: root modulus {modulus:.17} is not \
             strictly below one",
            fmt_c(s),
            fmt_c(p)
        )),
        GError::NonFinite => CliError::Parse("non-finite coordinate".into()),
    })
}

fn parse_disc_point(text: &str, what: &str) -> CliResult<DiscPoint> {
    let z = parse_complex(text)?;
    DiscPoint::new(z).map_err(|e| match e {
        DiscError::OutsideDisc(m) => CliError::Membership(format!(
            "{what} {} is not strictly inside the unit disc: modulus {m:.17}",
            fmt_c(z)
        )),
        other => CliError::Parse(other.to_string()),
    })
}

fn parse_circle_point(text: &str, what: &str) -> CliResult<CirclePoint> {
    let z = parse_complex(text)?;
    CirclePoint::new(z)
        .map_err(|_| CliError::Parse(format!("{what} {} is not unimodular", fmt_c(z))))
}

/// "c0:c1:n" — n points interpolating the segment from c0 to c1.
fn parse_segment(text: &str, what: &str) -> CliResult<Vec<Complex64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || {
        CliError::Parse(format!(
            "expected {what} as a segment \"c0:c1:n\" with complex endpoints, got {text:?}"
        ))
    };
    if parts.len() != 3 {
        return Err(bad());
    }
    let c0 = parse_complex(parts[0]).map_err(|_| bad())?;
    let c1 = parse_complex(parts[1]).map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(bad());
    }
    Ok((0..n)
        .map(|k| {
            let t = if n == 1 {
                0.0
            } else {
                k as f64 / (n - 1) as f64
            };
            c0 + t * (c1 - c0)
        })
        .collect())
}

fn fmt_c(z: Complex64) -> String {
    format!("{},{}", z.re, z.im)
}

// ---------------------------------------------------------------------------
// Output helpers.

fn cj(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Every numeric in JSON output must be a finite double. serde_json turns
/// non-finite floats into null, so rejecting null catches them all.
fn ensure_finite(v: &Value) -> CliResult<()> {
    match v {
        Value::Null => Err(CliError::Invariant("non-finite numeric in output".into())),
        Value::Array(items) => items.iter().try_for_each(ensure_finite),
        Value::Object(map) => map.values().try_for_each(ensure_finite),
        _ => Ok(()),
    }
}

fn emit_json(v: &Value) -> CliResult<()> {
    ensure_finite(v)?;
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("value serializes")
    );
    Ok(())
}

/// 17 significant digits: round-trip-exact doubles for regression diffs.
fn csv_f(x: f64) -> String {
    format!("{x:.16e}")
}

// ---------------------------------------------------------------------------
// Subcommands.

fn cmd_distance(a: &DistanceArgs) -> CliResult<()> {
    let x = parse_g_point(&a.x)?;
    let y = parse_g_point(&a.y)?;
    let config = SearchConfig {
        samples: a.samples,
        refine_tolerance: a.tolerance,
        ..SearchConfig::default()
    };
    let result = cara_distance(&x, &y, &config);
    match a.output_format {
        OutputFormat::Json => emit_json(&json!({
            "distance": result.distance,
            "maximizers": result.maximizers.iter().map(|w| cj(w.value())).collect::<Vec<_>>(),
            "unique": result.unique,
            "residuals": { "value_agreement": result.refined_tolerance },
            "samples_used": result.samples_used,
        })),
        OutputFormat::Csv => {
            let mut out = String::from("distance,omega_star_arg,unique\n");
            out.push_str(&format!(
                "{},{},{}\n",
                csv_f(result.distance),
                csv_f(result.maximizers[0].angle()),
                result.unique
            ));
            print!("{out}");
            Ok(())
        }
    }
}

fn scan_grid(a: &ScanArgs) -> CliResult<Vec<GPoint>> {
    let filtered: Vec<GPoint> =
        match a.mode {
            ScanMode::Rect => {
                let s_seg = a.s.as_deref().ok_or_else(|| {
                    CliError::Parse("rect mode requires --s and --p segments".into())
                })?;
                let p_seg = a.p.as_deref().ok_or_else(|| {
                    CliError::Parse("rect mode requires --s and --p segments".into())
                })?;
                let ss = parse_segment(s_seg, "--s")?;
                let ps = parse_segment(p_seg, "--p")?;
                ss.iter()
                    .flat_map(|&s| ps.iter().map(move |&p| (s, p)))
                    .filter_map(|(s, p)| GPoint::new(s, p).ok())
                    .collect()
            }
            ScanMode::Royal => {
                let seg = a.lambda.as_deref().ok_or_else(|| {
                    CliError::Parse("royal mode requires a --lambda segment".into())
                })?;
                parse_segment(seg, "--lambda")?
                    .into_iter()
                    .filter_map(|l| DiscPoint::new(l).ok())
                    .map(royal)
                    .collect()
            }
            ScanMode::Flat => {
                let seg = a.lambda.as_deref().ok_or_else(|| {
                    CliError::Parse("flat mode requires a --lambda segment".into())
                })?;
                let beta_text = a
                    .beta
                    .as_deref()
                    .ok_or_else(|| CliError::Parse("flat mode requires --beta".into()))?;
                let beta = parse_disc_point(beta_text, "--beta")?;
                parse_segment(seg, "--lambda")?
                    .into_iter()
                    .filter_map(|l| DiscPoint::new(l).ok())
                    .map(|l| flat_point(beta, l))
                    .collect()
            }
        };
    if filtered.is_empty() {
        return Err(CliError::Membership(
            "grid is empty after membership filtering".into(),
        ));
    }
    Ok(filtered)
}

fn cmd_scan(a: &ScanArgs) -> CliResult<()> {
    let x = parse_g_point(&a.x)?;
    let grid = scan_grid(a)?;
    let config = SearchConfig {
        samples: a.samples,
        refine_tolerance: a.tolerance,
        ..SearchConfig::default()
    };
    // Parallel over grid points; collect preserves grid order.
    let rows: Vec<(GPoint, f64, f64, bool)> = grid
        .par_iter()
        .map(|g| {
            let r = cara_distance(&x, g, &config);
            (*g, r.distance, r.maximizers[0].angle(), r.unique)
        })
        .collect();
    match a.output_format {
        OutputFormat::Csv => {
            let mut out = String::from("s_re,s_im,p_re,p_im,distance,omega_star_arg,unique\n");
            for (g, d, arg, unique) in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    csv_f(g.s().re),
                    csv_f(g.s().im),
                    csv_f(g.p().re),
                    csv_f(g.p().im),
                    csv_f(*d),
                    csv_f(*arg),
                    unique
                ));
            }
            print!("{out}");
            Ok(())
        }
        OutputFormat::Json => emit_json(&json!(rows
            .iter()
            .map(|(g, d, arg, unique)| json!({
                "s": cj(g.s()),
                "p": cj(g.p()),
                "distance": d,
                "omega_star_arg": arg,
                "unique": unique,
            }))
            .collect::<Vec<_>>())),
    }
}

fn cmd_automorphism(a: &AutomorphismArgs) -> CliResult<()> {
    let rotation = parse_circle_point(&a.rotation, "--rotation")?;
    let center = parse_disc_point(&a.center, "--center")?;
    let map = GAutomorphism::new(MoebiusMap::new(rotation, center));
    if a.point.is_none() && a.beta.is_none() {
        return Err(CliError::Parse(
            "automorphism needs --point or --beta (or both)".into(),
        ));
    }

    let mut report = serde_json::Map::new();
    report.insert(
        "map".into(),
        json!({ "rotation": cj(rotation.value()), "center": cj(center.value()) }),
    );

    if let Some(pair) = &a.point {
        let g = parse_g_point(pair)?;
        let image = map.apply(&g);
        let royal_residual = |q: &GPoint| (q.s() * q.s() - 4.0 * q.p()).norm();
        report.insert(
            "point_image".into(),
            json!({
                "s": cj(image.s()),
                "p": cj(image.p()),
                "input_royal_residual": royal_residual(&g),
                "royal_residual": royal_residual(&image),
            }),
        );
    }

    if let Some(beta_text) = &a.beta {
        let beta = parse_disc_point(beta_text, "--beta")?;
        // tau(m) maps F_beta to another flat geodesic; recover its
        // parameter from mapped sample points and report the spread as a
        // consistency residual.
        let samples = [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.35, 0.0),
            Complex64::new(-0.2, 0.15),
        ];
        let betas: Vec<Complex64> = samples
            .iter()
            .map(|&l| {
                let lam = DiscPoint::new(l).expect("sample parameter is interior");
                let (flat, _) = flat_through(&map.apply(&flat_point(beta, lam)));
                flat.beta.value()
            })
            .collect();
        let consistency = betas[1..]
            .iter()
            .map(|b| (b - betas[0]).norm())
            .fold(0.0f64, f64::max);
        report.insert(
            "geodesic_image".into(),
            json!({ "beta": cj(betas[0]), "consistency_residual": consistency }),
        );
    }

    emit_json(&Value::Object(report))
}

fn cmd_geodesic(a: &GeodesicArgs) -> CliResult<()> {
    if a.through.is_none() && a.beta.is_none() {
        return Err(CliError::Parse("geodesic needs --through or --beta".into()));
    }

    let point_diff = |u: &GPoint, v: &GPoint| (u.s() - v.s()).norm().max((u.p() - v.p()).norm());
    let royal_block = |flat: &FlatGeodesic| {
        let (mu, lambda) = royal_intersection(flat);
        let point = royal(mu);
        let residual = point_diff(&flat_point(flat.beta, lambda), &point);
        json!({
            "mu": cj(mu.value()),
            "lambda": cj(lambda.value()),
            "point": { "s": cj(point.s()), "p": cj(point.p()) },
            "residual": residual,
        })
    };

    let mut report = serde_json::Map::new();

    if let Some(pair) = &a.through {
        let g = parse_g_point(pair)?;
        let (flat, lambda) = flat_through(&g);
        let roundtrip = point_diff(&flat_point(flat.beta, lambda), &g);
        report.insert("beta".into(), cj(flat.beta.value()));
        report.insert("lambda".into(), cj(lambda.value()));
        report.insert("roundtrip_residual".into(), json!(roundtrip));
        report.insert("on_royal".into(), json!(on_royal(&g, 1e-12)));
        report.insert("royal_intersection".into(), royal_block(&flat));
    } else if let Some(beta_text) = &a.beta {
        let beta = parse_disc_point(beta_text, "--beta")?;
        let flat = FlatGeodesic { beta };
        report.insert("beta".into(), cj(beta.value()));
        report.insert("royal_intersection".into(), royal_block(&flat));
        if let Some(lambda_text) = &a.lambda {
            let lambda = parse_disc_point(lambda_text, "--lambda")?;
            let g = flat_point(beta, lambda);
            report.insert("point".into(), json!({ "s": cj(g.s()), "p": cj(g.p()) }));
        }
    }

    emit_json(&Value::Object(report))
}

fn cmd_hered(a: &HeredArgs) -> CliResult<()> {
    let read = |path: &PathBuf| {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))
    };
    let h: HereditaryPolynomial = serde_json::from_str(&read(&a.h)?)
        .map_err(|e| CliError::Parse(format!("invalid hereditary polynomial JSON: {e}")))?;

    // Deserialize the matrices alone first so a commutation failure maps to
    // its own exit code instead of a generic schema error.
    #[derive(serde::Deserialize)]
    struct TupleFile {
        matrices: Vec<ComplexMatrix>,
    }
    let tf: TupleFile = serde_json::from_str(&read(&a.tuple)?)
        .map_err(|e| CliError::Parse(format!("invalid tuple JSON: {e}")))?;
    let tuple = CommutingTuple::new(tf.matrices).map_err(|e| match e {
        HeredError::CommutationViolated(residual) => CliError::Commutation(residual),
        HeredError::BadTuple | HeredError::Matrix(_) => CliError::Parse(e.to_string()),
        other => CliError::Invariant(other.to_string()),
    })?;

    let (psd, min_eig) = positivity(&h, &tuple, a.tolerance).map_err(|e| match e {
        HeredError::DimensionMismatch(_, _) | HeredError::NotHermitianSymmetric(_) => {
            CliError::Parse(e.to_string())
        }
        other => CliError::Invariant(other.to_string()),
    })?;

    emit_json(&json!({
        "dimension": h.dim(),
        "size": tuple.size(),
        "commutation_residual": tuple.commutation_residual(),
        "joint_spectrum": tuple
            .joint_spectrum()
            .iter()
            .map(|pt| pt.iter().map(|&z| cj(z)).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "min_eig": min_eig,
        "psd": psd,
    }))
}

fn cmd_kernel(a: &KernelArgs) -> CliResult<()> {
    match a.mode {
        KernelMode::Szego => {
            if a.points.is_empty() {
                return Err(CliError::Parse("szego mode requires --points".into()));
            }
            let points: Vec<Vec<Complex64>> = a
                .points
                .iter()
                .map(|t| parse_disc_point(t, "--points entry").map(|d| vec![d.value()]))
                .collect::<CliResult<_>>()?;
            let gm = gram(|x, y| szego(x[0], y[0]), &points)
                .map_err(|e| CliError::Invariant(e.to_string()))?;
            let (psd, min_eig) =
                is_psd(&gm, a.tolerance).map_err(|e| CliError::Invariant(e.to_string()))?;
            let rank = if psd {
                numeric_rank(&gm, a.tolerance).map_err(|e| CliError::Invariant(e.to_string()))?
            } else {
                0
            };
            emit_json(&json!({
                "mode": "szego",
                "points": points.len(),
                "psd": psd,
                "min_eig": min_eig,
                "rank": rank,
            }))?;
            if !psd {
                return Err(CliError::Invariant(format!(
                    "szego Gram matrix is not psd: min eigenvalue {min_eig:.17e}"
                )));
            }
            Ok(())
        }
        KernelMode::Extremal => {
            let omega_text = a
                .omega
                .as_deref()
                .ok_or_else(|| CliError::Parse("extremal mode requires --omega".into()))?;
            let omega = parse_circle_point(omega_text, "--omega")?;
            if a.samples == 0 {
                return Err(CliError::Parse("--samples must be positive".into()));
            }
            let mut rng = seeded_rng(a.seed);
            let f_poly = x_only_poly(&mut rng, 2, 2, 3);
            let points: Vec<GPoint> = (0..a.samples).map(|_| g_point(&mut rng, 0.9)).collect();
            let zeros = vec![Complex64::new(0.0, 0.0); 2];
            let f = |g: &GPoint| {
                symbidisc_core::hereditary::hered_eval_point(&f_poly, &[g.s(), g.p()], &zeros)
            };
            let (psd, rank) = extremal_quotient_check(f, omega, &points)
                .map_err(|e| CliError::Invariant(e.to_string()))?;
            let pass = psd && rank <= 1;
            emit_json(&json!({
                "mode": "extremal",
                "omega": cj(omega.value()),
                "seed": a.seed,
                "samples": a.samples,
                "psd": psd,
                "rank": rank,
                "pass": pass,
            }))?;
            if !pass {
                return Err(CliError::Invariant(format!(
                    "extremal quotient kernel failed: psd={psd} rank={rank}"
                )));
            }
            Ok(())
        }
        KernelMode::Sandwich => {
            let omega_text = a
                .omega
                .as_deref()
                .ok_or_else(|| CliError::Parse("sandwich mode requires --omega".into()))?;
            let omega = parse_circle_point(omega_text, "--omega")?;
            let rotation = parse_circle_point(&a.rotation, "--rotation")?;
            let center = parse_disc_point(&a.center, "--center")?;
            if a.samples == 0 {
                return Err(CliError::Parse("--samples must be positive".into()));
            }
            let m = MoebiusMap::new(rotation, center);
            let mut rng = seeded_rng(a.seed);
            let points: Vec<GPoint> = (0..a.samples).map(|_| g_point(&mut rng, 0.95)).collect();
            let residual = magic_sandwich_identity(&m, |g| phi(omega, g).value(), &points);
            let pass = residual <= a.tolerance;
            emit_json(&json!({
                "mode": "sandwich",
                "omega": cj(omega.value()),
                "rotation": cj(rotation.value()),
                "center": cj(center.value()),
                "seed": a.seed,
                "samples": a.samples,
                "residual": residual,
                "pass": pass,
            }))?;
            if !pass {
                return Err(CliError::Invariant(format!(
                    "sandwich identity residual {residual:.17e} exceeds tolerance"
                )));
            }
            Ok(())
        }
    }
}

fn cmd_selftest(a: &SelftestArgs) -> CliResult<()> {
    let config = SelftestConfig {
        seed: a.seed,
        level: match a.level {
            Level::Quick => SelftestLevel::Quick,
            Level::Full => SelftestLevel::Full,
        },
        perturb_phi_sign: a.perturb_phi_sign,
    };
    let report = symbidisc_core::selftest::run(&config);
    print!("{}", report.render());
    if report.all_pass {
        Ok(())
    } else {
        Err(CliError::Invariant("selftest reported failures".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Distance(a) => cmd_distance(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Automorphism(a) => cmd_automorphism(a),
        Command::Geodesic(a) => cmd_geodesic(a),
        Command::Hered(a) => cmd_hered(a),
        Command::Kernel(a) => cmd_kernel(a),
        Command::Selftest(a) => cmd_selftest(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
