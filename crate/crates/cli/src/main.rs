use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use finite_part::expansion::{generate_terms, reduce_term, symmetry_reduce};
use finite_part::gamma::{closed_form_fp, default_trunc};
use finite_part::grassmann::{check_conjecture, sample_points};
use finite_part::pipeline::{cross_check, finite_part_cached, sample_grid, Cache, Evaluation, PipelineSpec, Route};
use finite_part::quadrature::{default_fit_degree, fit_laurent, sample_zeta};

#[derive(Parser)]
#[command(name = "fp", version, about = "Finite parts of divergent integrals on projective space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Pipeline,
    ClosedForm,
    Fit,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Exact finite part from the Gamma-function closed form.
    ClosedForm {
        #[arg(long)]
        n: u32,
        /// Truncation order of the λ-series.
        #[arg(long)]
        trunc: Option<i32>,
        #[arg(long)]
        json: bool,
    },
    /// Pointwise check of the top-degree current identity at random points.
    VerifyConjecture {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// List the symmetry-reduced expansion terms and their reductions.
    Expand {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        json: bool,
    },
    /// Sample Z(λ) = ∫ ‖s‖^{2λ} ω by quadrature.
    SampleZeta {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit the Laurent expansion of Z(λ) at λ = 0 from samples.
    Fit {
        #[arg(long)]
        n: usize,
        /// Comma-separated λ values.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Compute the finite part along one route, or cross-check all routes.
    Run {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "all")]
        route: RouteArg,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// Evaluate every pipeline term exactly instead of by quadrature.
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn pipeline_spec(exact: bool, seed: Option<u64>) -> PipelineSpec {
    let mut spec = PipelineSpec::default();
    if exact {
        spec.evaluation = Evaluation::Exact;
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    spec
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::ClosedForm { n, trunc, json } => {
            let cf = closed_form_fp(n, trunc.unwrap_or_else(|| default_trunc(n)))?;
            if json {
                print_json(&json!({
                    "n": n,
                    "fp": cf.fp,
                    "fp_float": cf.fp.eval(),
                    "leading": cf.leading,
                    "intermediate_gamma_degree": cf.intermediate_gamma_degree,
                    "series": cf.series,
                }))?;
            } else {
                println!("{}", cf.fp);
            }
        }
        Command::VerifyConjecture { n, points, seed, tol } => {
            let report = check_conjecture(n, &sample_points(n, points, seed), seed, tol);
            print_json(&report)?;
            return Ok(report.pass);
        }
        Command::Expand { n, json } => {
            let classes = symmetry_reduce(&generate_terms(n)?);
            let mut rows = Vec::new();
            for class in &classes {
                let reduced = reduce_term(class)?;
                if !json {
                    println!("{class}");
                    for r in &reduced {
                        println!("    {r}");
                    }
                }
                rows.push(json!({ "term": class, "reduced": reduced }));
            }
            if json {
                print_json(&rows)?;
            }
        }
        Command::SampleZeta { n, lambda, seed } => {
            let spec = pipeline_spec(false, seed).zeta_quadrature(n);
            let s = sample_zeta(n, lambda, &spec)?;
            print_json(&json!({ "n": n, "sample": s, "spec": spec }))?;
        }
        Command::Fit { n, grid, degree } => {
            let mut spec = PipelineSpec::default();
            if let Some(g) = grid {
                spec.grid = g;
            }
            let degree = degree.unwrap_or_else(|| default_fit_degree(n));
            let samples = sample_grid(n, &spec)?;
            let fit = fit_laurent(&samples, n, degree, spec.max_condition)?;
            print_json(&json!({
                "n": n,
                "degree": degree,
                "fit": fit,
                "samples": samples,
                "spec": spec,
            }))?;
        }
        Command::Run {
            n,
            route,
            json,
            cache_dir,
            exact,
            seed,
        } => {
            let spec = pipeline_spec(exact, seed);
            let cache = cache_dir.map(Cache::new);
            let single = match route {
                RouteArg::Pipeline => Some(Route::Pipeline),
                RouteArg::ClosedForm => Some(Route::ClosedForm),
                RouteArg::Fit => Some(Route::QuadratureFit),
                RouteArg::All => None,
            };
            if let Some(route) = single {
                let r = finite_part_cached(n, route, &spec, cache.as_ref())?;
                if json {
                    print_json(&r)?;
                } else {
                    match &r.exact {
                        Some(e) => println!("{e}"),
                        None => println!("{:.12e} ± {:.3e}", r.float_value, r.error_estimate),
                    }
                }
                return Ok(true);
            }
            if n > 3 {
                bail!("cross-check supports n <= 3, got {n}");
            }
            let report = cross_check(n, &spec, cache.as_ref());
            if json {
                print_json(&report)?;
            } else {
                for c in &report.comparisons {
                    let status = if c.pass { "PASS" } else { "FAIL" };
                    match (&c.value, &c.error) {
                        (Some(v), _) => println!(
                            "{status} {} {v:.12e} vs {:.12e} (deviation {:.3e}, limit {:.1e})",
                            c.route,
                            c.reference,
                            c.deviation.unwrap_or(f64::NAN),
                            c.tolerance.limit()
                        ),
                        (None, Some(e)) => println!("{status} {}: {e}", c.route),
                        (None, None) => println!("{status} {}", c.route),
                    }
                }
            }
            return Ok(report.pass);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
