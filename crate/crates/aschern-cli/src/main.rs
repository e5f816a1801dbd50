//! Command-line front end: generate assets, evaluate cocycle pairings,
//! run the property suites, emit JSON reports.
//!
//! Exit codes: 0 = all checks pass; 2 = precondition or admissibility
//! failure (bad inputs, gap violations, inadmissible meshes); 3 = a
//! numerical check failed its tolerance.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use aschern::checks::{self, Asset};
use aschern::error::Error;
use aschern::geom::{
    gen_bott_sphere, gen_circle_winding, gen_monopole, gen_su2_sphere3, gen_two_band_torus,
    CochainSpec, Mesh,
};
use aschern::io::{
    digest, mesh_from_json, mesh_to_json, projector_to_json, sample_from_json, unitary_to_json,
    AnySample, CheckRecord, MeshJson, RunReport, SampleJson,
};
use aschern::quad::QuadConfig;

#[derive(Parser)]
#[command(
    name = "aschern",
    about = "Alexander-Spanier Chern character cocycles: asset generation, \
             integer pairings, and property suites",
    version
)]
struct Cli {
    /// Worker threads for per-simplex parallelism (reductions stay
    /// deterministic regardless).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Include wall-clock timings in reports (off by default so reports are
    /// byte-identical across runs with the same seed).
    #[arg(long, global = true)]
    timings: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Copy)]
struct QuadArgs {
    /// Polynomial degree of the base simplex rule (odd, 1..=13).
    #[arg(long, default_value_t = 7)]
    quad_degree: usize,
    /// Fixed edgewise subdivision level; omit for adaptive refinement.
    #[arg(long)]
    quad_subdiv: Option<usize>,
    /// Adaptive refinement target per simplex evaluation.
    #[arg(long, default_value_t = 1e-9)]
    quad_tol: f64,
}

impl QuadArgs {
    fn config(&self) -> QuadConfig {
        QuadConfig { degree: self.quad_degree, subdiv: self.quad_subdiv, tol: self.quad_tol }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    Circle,
    Bott,
    Monopole,
    Su2,
    Torus,
}

#[derive(Args, Clone, Copy)]
struct GeneratorArgs {
    /// Winding number (circle).
    #[arg(long, default_value_t = 1)]
    k: i64,
    /// Vertex count (circle).
    #[arg(long, default_value_t = 24)]
    m: usize,
    /// Subdivision level (bott, monopole, su2).
    #[arg(long, default_value_t = 2)]
    level: usize,
    /// Monopole charge.
    #[arg(long, default_value_t = 1)]
    charge: usize,
    /// Bloch mass parameter (torus).
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    /// Grid size per direction (torus).
    #[arg(long, default_value_t = 24)]
    grid: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a mesh + sample asset pair as JSON files.
    Gen {
        #[arg(value_enum)]
        generator: Generator,
        #[command(flatten)]
        params: GeneratorArgs,
        /// Output directory for mesh.json and sample.json.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Pair a cocycle with the fundamental cycle of a mesh.
    Pair {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        sample: PathBuf,
        /// Cocycle: ch1 | ch-odd:N | ch-even:N | phi
        #[arg(long)]
        cocycle: String,
        #[command(flatten)]
        quad: QuadArgs,
        /// Write the report JSON here as well as stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a property suite and report pass/fail records.
    Check {
        #[arg(value_enum)]
        suite: Suite,
        /// Asset for the cocycle suite.
        #[arg(long, value_enum, default_value_t = Generator::Bott)]
        generator: Generator,
        #[command(flatten)]
        params: GeneratorArgs,
        /// Random tuples per cocycle check.
        #[arg(long, default_value_t = 50)]
        count: usize,
        /// Series gap parameter.
        #[arg(long, default_value_t = 0.3)]
        rho: f64,
        /// Series truncation order.
        #[arg(long = "K", default_value_t = 10)]
        k_trunc: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        quad: QuadArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Cocycle,
    Homotopy,
    Derham,
    Series,
    Cross,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn parse_cocycle(s: &str) -> Result<CochainSpec, Error> {
    match s {
        "ch1" => Ok(CochainSpec::Ch1Closed),
        "phi" => Ok(CochainSpec::TriplePhase),
        other => {
            if let Some(n) = other.strip_prefix("ch-odd:") {
                let n: usize = n
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad degree in '{other}'")))?;
                Ok(CochainSpec::ChOdd(n))
            } else if let Some(n) = other.strip_prefix("ch-even:") {
                let n: usize = n
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad degree in '{other}'")))?;
                Ok(CochainSpec::ChEven(n))
            } else {
                Err(Error::InvalidInput(format!(
                    "unknown cocycle '{other}' (expected ch1, ch-odd:N, ch-even:N, phi)"
                )))
            }
        }
    }
}

fn generate(generator: Generator, p: &GeneratorArgs) -> Result<(Mesh, AnySample), Error> {
    match generator {
        Generator::Circle => {
            let (mesh, s) = gen_circle_winding(p.k, p.m)?;
            Ok((mesh, AnySample::Unitary(s)))
        }
        Generator::Bott => {
            let (mesh, s) = gen_bott_sphere(p.level)?;
            Ok((mesh, AnySample::Projector(s)))
        }
        Generator::Monopole => {
            let (mesh, s) = gen_monopole(p.charge, p.level)?;
            Ok((mesh, AnySample::Projector(s)))
        }
        Generator::Su2 => {
            let (mesh, s) = gen_su2_sphere3(p.level)?;
            Ok((mesh, AnySample::Unitary(s)))
        }
        Generator::Torus => {
            let (mesh, s) = gen_two_band_torus(p.mass, p.grid)?;
            Ok((mesh, AnySample::Projector(s)))
        }
    }
}

fn asset_of(generator: Generator, p: &GeneratorArgs) -> Asset {
    match generator {
        Generator::Circle => Asset::Circle { k: p.k, m: p.m },
        Generator::Bott => Asset::Bott { level: p.level },
        Generator::Monopole => Asset::Monopole { charge: p.charge, level: p.level },
        Generator::Su2 => Asset::Su2 { level: p.level },
        Generator::Torus => Asset::Torus { mass: p.mass, grid: p.grid },
    }
}

fn emit_report(report: &RunReport, out: Option<&Path>) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Io(format!("report serialization: {e}")))?;
    println!("{text}");
    if let Some(path) = out {
        std::fs::write(path, &text).map_err(|e| Error::Io(format!("write {path:?}: {e}")))?;
    }
    for c in &report.checks {
        eprintln!(
            "[{}] {} = {:.3e} (tol {:.3e})",
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    match &cli.cmd {
        Cmd::Gen { generator, params, out } => {
            let (mesh, sample) = generate(*generator, params)?;
            std::fs::create_dir_all(out).map_err(|e| Error::Io(format!("mkdir {out:?}: {e}")))?;
            let mesh_json = serde_json::to_string_pretty(&mesh_to_json(&mesh))
                .map_err(|e| Error::Io(e.to_string()))?;
            let sample_json = match &sample {
                AnySample::Unitary(s) => serde_json::to_string_pretty(&unitary_to_json(s)),
                AnySample::Projector(s) => serde_json::to_string_pretty(&projector_to_json(s)),
            }
            .map_err(|e| Error::Io(e.to_string()))?;
            let mesh_path = out.join("mesh.json");
            let sample_path = out.join("sample.json");
            std::fs::write(&mesh_path, mesh_json)
                .map_err(|e| Error::Io(format!("write {mesh_path:?}: {e}")))?;
            std::fs::write(&sample_path, sample_json)
                .map_err(|e| Error::Io(format!("write {sample_path:?}: {e}")))?;
            eprintln!(
                "wrote {} ({} vertices, {} simplices) and {}",
                mesh_path.display(),
                mesh.vertices.len(),
                mesh.simplices.len(),
                sample_path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Pair { mesh, sample, cocycle, quad, out } => {
            let started = Instant::now();
            let mesh_text = std::fs::read_to_string(mesh)
                .map_err(|e| Error::Io(format!("read {mesh:?}: {e}")))?;
            let sample_text = std::fs::read_to_string(sample)
                .map_err(|e| Error::Io(format!("read {sample:?}: {e}")))?;
            let mesh_json: MeshJson = serde_json::from_str(&mesh_text)
                .map_err(|e| Error::Io(format!("parse {mesh:?}: {e}")))?;
            let sample_json: SampleJson = serde_json::from_str(&sample_text)
                .map_err(|e| Error::Io(format!("parse {sample:?}: {e}")))?;
            let mesh = mesh_from_json(&mesh_json)?;
            let any = sample_from_json(&sample_json)?;
            let spec = parse_cocycle(cocycle)?;
            let cfg = quad.config();
            let (value, int_dist, estimate) =
                checks::pairing_report(&mesh, &any, &spec, &cfg)?;

            let mut report = RunReport::new(
                format!("pair --cocycle {cocycle}"),
                digest(format!("{mesh_text}{sample_text}").as_bytes()),
                None,
            );
            report.value = Some([value.re, value.im]);
            report.record("distance to nearest integer", int_dist, 0.5);
            report.record(
                "quadrature convergence estimate",
                estimate,
                (100.0 * cfg.tol).max(1e-6),
            );
            if cli.timings {
                report
                    .timings_ms
                    .insert("total".into(), started.elapsed().as_secs_f64() * 1e3);
            }
            emit_report(&report, out.as_deref())?;
            Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
        Cmd::Check {
            suite,
            generator,
            params,
            count,
            rho,
            k_trunc,
            seed,
            quad,
            out,
        } => {
            let started = Instant::now();
            let cfg = quad.config();
            let records: Vec<CheckRecord> = match suite {
                Suite::Cocycle => {
                    checks::suite_cocycle(&asset_of(*generator, params), *count, *seed, &cfg)?
                }
                Suite::Homotopy => checks::suite_homotopy(*seed, &cfg)?,
                Suite::Derham => checks::suite_derham(&cfg)?,
                Suite::Series => checks::suite_series(*rho, *k_trunc, *seed)?,
                Suite::Cross => checks::suite_cross(*seed, &cfg)?,
            };
            let suite_name = match suite {
                Suite::Cocycle => "cocycle",
                Suite::Homotopy => "homotopy",
                Suite::Derham => "derham",
                Suite::Series => "series",
                Suite::Cross => "cross",
            };
            let mut report = RunReport::new(
                format!("check {suite_name}"),
                digest(format!("{suite_name}:{seed}:{count}:{rho}:{k_trunc}").as_bytes()),
                Some(*seed),
            );
            for r in records {
                report.pass &= r.pass;
                report.checks.push(r);
            }
            if cli.timings {
                report
                    .timings_ms
                    .insert("total".into(), started.elapsed().as_secs_f64() * 1e3);
            }
            emit_report(&report, out.as_deref())?;
            Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
    }
}
