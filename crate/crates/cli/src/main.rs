mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use oklim_core::config::{parse_config, ConfigFile};
use oklim_core::local::{optimal_particle_mass, single_particle_threshold};
use oklim_core::sharp::{quotient_reference, DEFAULT_FOURIER_CUTOFF};
use oklim_core::{
    concavity_coefficient, e0, e2d, e3d_ball, envelope_2d, f0_energy, green_eval, green_grad,
    lattice_candidate_energy, place_with, regular_part, richardson, second_order_quotient,
    sharp_energy, splitting_threshold_3d, Dim, EnergyBreakdown, Error, EwaldParameters, Lattice,
    Mass, OptimizationResult, PairConvention, PlaceOptions,
};
use output::{cell, csv_with_header, emit, num, nums, Manifest};

const ALPHA_ENV: &str = "OKLIM_EWALD_ALPHA";

#[derive(Parser)]
#[command(
    name = "oklim",
    version,
    about = "Limit energies of small particles on the flat torus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Periodic Green's function at a point.
    Green {
        #[arg(long, value_parser = parse_dim)]
        dim: Dim,
        #[arg(
            long,
            value_delimiter = ',',
            allow_negative_numbers = true,
            required = true
        )]
        x: Vec<f64>,
        /// Also print the gradient.
        #[arg(long)]
        grad: bool,
        /// Also print the regular part.
        #[arg(long)]
        regular: bool,
    },
    /// Single-particle energies.
    Local {
        #[arg(long, value_parser = parse_dim)]
        dim: Dim,
        #[arg(long, allow_negative_numbers = true)]
        mass: f64,
        /// Optimal equal partition (2D).
        #[arg(long)]
        partition: bool,
        /// Single-particle threshold and optimal part mass (2D).
        #[arg(long)]
        threshold: bool,
        /// Mass at which one ball splits into two (3D).
        #[arg(long)]
        splitting: bool,
        /// Concavity coefficient of the ball family (3D).
        #[arg(long)]
        concavity: bool,
    },
    /// Limit or finite-η energy of a configuration, as CSV.
    Energy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value = "ordered")]
        pair_convention: PairConvention,
        #[arg(long, default_value_t = DEFAULT_FOURIER_CUTOFF)]
        cutoff: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Second-order quotient over a sweep of η, as CSV.
    Expand {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        etas: Vec<f64>,
        /// Extrapolate the 3D quotient to η = 0.
        #[arg(long)]
        richardson: bool,
        #[arg(long, default_value_t = DEFAULT_FOURIER_CUTOFF)]
        cutoff: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multi-start minimization of the interaction energy, as JSON.
    Place {
        #[arg(long, value_parser = parse_dim)]
        dim: Option<Dim>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        mass: Option<f64>,
        /// Take masses (and dimension) from a configuration file.
        #[arg(long, conflicts_with_all = ["n", "mass"])]
        config: Option<PathBuf>,
        /// Use the configuration's positions as an extra start.
        #[arg(long, requires = "config")]
        from_config: bool,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iterations: usize,
        /// Append explicit lattice energies.
        #[arg(long)]
        lattice_compare: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_dim(s: &str) -> Result<Dim, String> {
    match s {
        "2" => Ok(Dim::Two),
        "3" => Ok(Dim::Three),
        _ => Err(format!("dimension must be 2 or 3, got {s}")),
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Io(_) => 1,
            Failure::Core(e) => match e {
                Error::SingularPoint { .. } => 2,
                Error::CoincidentPoints { .. }
                | Error::OverlappingBalls { .. }
                | Error::DiameterTooLarge { .. } => 3,
                Error::NotAdmissible(_) | Error::UnequalMasses2D { .. } => 4,
                _ => 1,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Io(m) => m.clone(),
            Failure::Core(e @ Error::UnequalMasses2D { .. }) => {
                format!("not an admissible limit configuration: {e}")
            }
            Failure::Core(e) => e.to_string(),
        }
    }
}

type Run = Result<(), Failure>;

fn ewald() -> Result<EwaldParameters, Failure> {
    match std::env::var(ALPHA_ENV) {
        Ok(s) => {
            let alpha: f64 = s
                .trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("{ALPHA_ENV}={s} is not a number")))?;
            Ok(EwaldParameters::with_alpha(alpha)?)
        }
        Err(_) => Ok(EwaldParameters::default()),
    }
}

fn load(path: &PathBuf) -> Result<ConfigFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_config(&text)?)
}

fn mass(m: f64) -> Result<Mass, Failure> {
    Mass::new(m).map_err(|e| Failure::Usage(e.to_string()))
}

fn print_json(v: &Value) {
    println!("{v}");
}

fn cmd_green(dim: Dim, x: &[f64], grad: bool, regular: bool) -> Run {
    if x.len() != dim.n() {
        return Err(Failure::Usage(format!(
            "--x needs {} coordinates, got {}",
            dim.n(),
            x.len()
        )));
    }
    let params = ewald()?;
    let g = green_eval(dim, x, &params)?;
    if !grad && !regular {
        print_json(&num(g));
        return Ok(());
    }
    let mut m = Map::new();
    m.insert("G".into(), num(g));
    if grad {
        m.insert("grad".into(), nums(&green_grad(dim, x, &params)?));
    }
    if regular {
        m.insert("g".into(), num(regular_part(dim, x, &params)?));
    }
    print_json(&Value::Object(m));
    Ok(())
}

fn breakdown_json(b: &EnergyBreakdown) -> Value {
    json!({
        "perimeter_term": num(b.perimeter_term),
        "self_h1_term": num(b.self_h1_term),
        "total": num(b.total),
    })
}

fn cmd_local(
    dim: Dim,
    m: f64,
    partition: bool,
    threshold: bool,
    splitting: bool,
    concavity: bool,
) -> Run {
    let m = mass(m)?;
    let mut out = Map::new();
    out.insert("mass".into(), num(m.get()));
    match dim {
        Dim::Two => {
            if splitting || concavity {
                return Err(Failure::Usage(
                    "--splitting and --concavity are 3D options".into(),
                ));
            }
            out.insert("e2d".into(), num(e2d(m)));
            if partition {
                let p = envelope_2d(m);
                out.insert(
                    "partition".into(),
                    json!({"n": p.n, "per_mass": num(p.per_mass), "envelope_value": num(p.envelope_value)}),
                );
            }
            if threshold {
                out.insert(
                    "single_particle_threshold".into(),
                    num(single_particle_threshold()),
                );
                out.insert("optimal_particle_mass".into(), num(optimal_particle_mass()));
            }
        }
        Dim::Three => {
            if partition || threshold {
                return Err(Failure::Usage(
                    "--partition and --threshold are 2D options".into(),
                ));
            }
            out.insert("e3d_ball".into(), breakdown_json(&e3d_ball(m)));
            if concavity {
                out.insert(
                    "concavity_coefficient".into(),
                    num(concavity_coefficient(m)),
                );
            }
            if splitting {
                out.insert("splitting_threshold".into(), num(splitting_threshold_3d()?));
            }
        }
    }
    print_json(&Value::Object(out));
    Ok(())
}

const ENERGY_COLUMNS: [&str; 11] = [
    "kind",
    "dim",
    "eta",
    "perimeter_term",
    "self_h1_term",
    "regular_self_term",
    "cross_term",
    "total",
    "gamma",
    "truncation_bound",
    "pair_convention",
];

fn energy_row(kind: &str, b: &EnergyBreakdown, convention: &str) -> Vec<String> {
    vec![
        kind.to_string(),
        b.dim.n().to_string(),
        cell(b.eta),
        cell(Some(b.perimeter_term)),
        cell(Some(b.self_h1_term)),
        cell(Some(b.regular_self_term)),
        cell(Some(b.cross_term)),
        cell(Some(b.total)),
        cell(b.gamma),
        cell(b.truncation_bound),
        convention.to_string(),
    ]
}

fn cmd_energy(
    config: &PathBuf,
    eta: Option<f64>,
    convention: PairConvention,
    cutoff: usize,
    out: Option<PathBuf>,
) -> Run {
    let params = ewald()?;
    let manifest = Manifest::new(
        "energy",
        json!({
            "config": config.display().to_string(),
            "eta": eta.map(num),
            "pair_convention": convention.to_string(),
            "cutoff": cutoff,
        }),
        params,
    );
    let mut cfg = load(config)?;
    let rows = if let Some(e) = eta.or(cfg.eta) {
        cfg.eta = Some(e);
        let b = sharp_energy(&cfg.balls()?, cutoff)?;
        vec![energy_row("sharp", &b, "")]
    } else {
        let first = e0(&cfg.points);
        let mut b0 = EnergyBreakdown::from_parts(cfg.points.dim(), first, 0.0, 0.0, 0.0);
        b0.total = first;
        let f = f0_energy(&cfg.points, &params, convention)?;
        vec![
            energy_row("e0", &b0, ""),
            energy_row("f0", &f, &convention.to_string()),
        ]
    };
    let text = csv_with_header(&[("manifest", manifest.to_value())], &ENERGY_COLUMNS, &rows)?;
    emit(out.as_deref(), &text)?;
    Ok(())
}

fn cmd_expand(
    config: &PathBuf,
    etas: &[f64],
    extrapolate: bool,
    cutoff: usize,
    out: Option<PathBuf>,
) -> Run {
    if etas.is_empty() {
        return Err(Failure::Usage("--etas needs at least one value".into()));
    }
    let params = ewald()?;
    let manifest = Manifest::new(
        "expand",
        json!({
            "config": config.display().to_string(),
            "etas": nums(etas),
            "richardson": extrapolate,
            "cutoff": cutoff,
        }),
        params,
    );
    let cfg = load(config)?;
    let dim = cfg.points.dim();
    quotient_reference(&cfg.points).map_err(|e| match e {
        Error::UnequalMasses2D { .. } => Error::NotAdmissible(e.to_string()),
        other => other,
    })?;
    let table = second_order_quotient(&cfg.points, etas, cutoff)?;
    let limit = f0_energy(&cfg.points, &params, PairConvention::Ordered)?.total;

    let mut header = vec![("manifest", manifest.to_value())];
    if extrapolate {
        if dim != Dim::Three {
            return Err(Failure::Usage(
                "--richardson applies to 3D configurations only".into(),
            ));
        }
        let samples: Vec<(f64, f64)> = table.iter().map(|r| (r.eta, r.f_eta)).collect();
        let estimate = richardson(&samples, 1.0)?;
        header.push((
            "richardson",
            json!({
                "f0_extrapolated": num(estimate),
                "f0_limit": num(limit),
                "relative_gap": num((estimate - limit).abs() / limit.abs()),
            }),
        ));
    }
    let columns = [
        "eta",
        "energy",
        "reference",
        "f_eta",
        "f0_limit",
        "perimeter_term",
        "self_h1_term",
        "regular_self_term",
        "cross_term",
        "truncation_bound",
    ];
    let rows: Vec<Vec<String>> = table
        .iter()
        .map(|r| {
            vec![
                cell(Some(r.eta)),
                cell(Some(r.energy.total)),
                cell(Some(r.reference)),
                cell(Some(r.f_eta)),
                cell(Some(limit)),
                cell(Some(r.energy.perimeter_term)),
                cell(Some(r.energy.self_h1_term)),
                cell(Some(r.energy.regular_self_term)),
                cell(Some(r.energy.cross_term)),
                cell(r.energy.truncation_bound),
            ]
        })
        .collect();
    let text = csv_with_header(&header, &columns, &rows)?;
    emit(out.as_deref(), &text)?;
    Ok(())
}

fn result_json(r: &OptimizationResult) -> Value {
    let positions: Vec<Value> = r
        .config
        .particles()
        .iter()
        .map(|p| nums(p.position.coords()))
        .collect();
    let masses: Vec<f64> = r.config.particles().iter().map(|p| p.mass.get()).collect();
    json!({
        "converged": r.converged,
        "energy": num(r.energy),
        "grad_norm": num(r.grad_norm),
        "iterations": r.iterations,
        "restarts_used": r.restarts_used,
        "restart_index": r.restart_index,
        "masses": nums(&masses),
        "positions": positions,
        "pairwise_distances": nums(&r.pairwise_distances),
    })
}

struct PlaceArgs {
    dim: Option<Dim>,
    n: Option<usize>,
    mass: Option<f64>,
    config: Option<PathBuf>,
    from_config: bool,
    restarts: usize,
    seed: u64,
    tol: f64,
    max_iterations: usize,
    lattice_compare: bool,
    out: Option<PathBuf>,
}

fn cmd_place(a: PlaceArgs) -> Run {
    let params = ewald()?;
    let (dim, masses, initial) = match &a.config {
        Some(path) => {
            let cfg = load(path)?;
            if a.dim.is_some_and(|d| d != cfg.points.dim()) {
                return Err(Failure::Usage(
                    "--dim disagrees with the configuration".into(),
                ));
            }
            let ps = cfg.points.particles();
            let masses: Vec<f64> = ps.iter().map(|p| p.mass.get()).collect();
            let initial = a
                .from_config
                .then(|| ps.iter().map(|p| p.position.coords().to_vec()).collect());
            (cfg.points.dim(), masses, initial)
        }
        None => {
            let (Some(dim), Some(n), Some(m)) = (a.dim, a.n, a.mass) else {
                return Err(Failure::Usage(
                    "place needs --dim, --n and --mass, or --config".into(),
                ));
            };
            (dim, vec![mass(m)?.get(); n], None)
        }
    };
    let manifest = Manifest::new(
        "place",
        json!({
            "dim": dim.n(),
            "masses": nums(&masses),
            "config": a.config.as_ref().map(|p| p.display().to_string()),
            "from_config": a.from_config,
            "restarts": a.restarts,
            "seed": a.seed,
            "tol": num(a.tol),
            "max_iterations": a.max_iterations,
            "lattice_compare": a.lattice_compare,
        }),
        params,
    );
    let opts = PlaceOptions {
        restarts: a.restarts,
        seed: a.seed,
        tol: a.tol,
        max_iterations: a.max_iterations,
        params,
        inject_lattice: true,
        initial,
    };
    let result = match place_with(dim, &masses, &opts) {
        Ok(r) => r,
        Err(Error::NoConvergence { best }) => *best,
        Err(Error::InvalidInput(m)) => return Err(Failure::Usage(m)),
        Err(e) => return Err(e.into()),
    };

    let mut doc = Map::new();
    doc.insert("converged".into(), json!(result.converged));
    doc.insert("result".into(), result_json(&result));
    if a.lattice_compare {
        let equal = masses.iter().all(|&m| m == masses[0]);
        let rows: Vec<Value> = [Lattice::Square, Lattice::TriangularSheared]
            .into_iter()
            .map(|lattice| {
                if !equal {
                    return json!({"lattice": lattice.to_string(), "skipped": "masses are not equal"});
                }
                match lattice_candidate_energy(dim, masses.len(), masses[0], lattice, &params) {
                    Ok(e) => json!({"lattice": lattice.to_string(), "energy": num(e)}),
                    Err(e) => json!({"lattice": lattice.to_string(), "skipped": e.to_string()}),
                }
            })
            .collect();
        doc.insert("lattice_comparison".into(), Value::Array(rows));
    }
    doc.insert("manifest".into(), manifest.to_value());
    let text = serde_json::to_string_pretty(&Value::Object(doc))
        .map_err(|e| Failure::Io(e.to_string()))?;
    emit(a.out.as_deref(), &(text + "\n"))?;
    Ok(())
}

fn run(cli: Cli) -> Run {
    match cli.command {
        Command::Green {
            dim,
            x,
            grad,
            regular,
        } => cmd_green(dim, &x, grad, regular),
        Command::Local {
            dim,
            mass,
            partition,
            threshold,
            splitting,
            concavity,
        } => cmd_local(dim, mass, partition, threshold, splitting, concavity),
        Command::Energy {
            config,
            eta,
            pair_convention,
            cutoff,
            out,
        } => cmd_energy(&config, eta, pair_convention, cutoff, out),
        Command::Expand {
            config,
            etas,
            richardson,
            cutoff,
            out,
        } => cmd_expand(&config, &etas, richardson, cutoff, out),
        Command::Place {
            dim,
            n,
            mass,
            config,
            from_config,
            restarts,
            seed,
            tol,
            max_iterations,
            lattice_compare,
            out,
        } => cmd_place(PlaceArgs {
            dim,
            n,
            mass,
            config,
            from_config,
            restarts,
            seed,
            tol,
            max_iterations,
            lattice_compare,
            out,
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
