//! `dddr` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use dddr_core::benchmarks::compare::{statistic_names, statistic_values, test_scenarios};
use dddr_core::benchmarks::{evaluate_plan, TestDistribution};
use dddr_core::experiment::{
    fixture_instance, generate_instance, run, write_atomic, ExperimentConfig, LambdaRecipe,
};
use dddr_core::milp::export_lp_text;
use dddr_core::model::SupportSpec;
use dddr_core::solvers::{build_formulation, solve_plan, BoundsRecipe, Method, Plan, SolverChoice};
use dddr_core::ProblemData;

#[derive(Parser)]
#[command(
    name = "dddr",
    version,
    about = "Decision-dependent robust facility location experiments"
)]
struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance and write it as JSON.
    Gen {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the published 10x20 layout with drawn costs, capacities and moments.
    Fixture {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one plan and write it as JSON.
    Solve {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        target: Target,
        /// sp, spN, dr or dddr.
        #[arg(long)]
        method: String,
        /// Training scenarios when the method is a bare `sp`.
        #[arg(long)]
        scenarios: Option<usize>,
        /// Plan file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a plan out of sample and write the statistics as CSV.
    Evaluate {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        plan: PathBuf,
        /// Instance file; defaults to `instance.json` next to the plan.
        #[arg(long)]
        instance: Option<PathBuf>,
        /// Seed whose test stream is used.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = parse_via::<TestDistribution>)]
        dist: Option<TestDistribution>,
        /// Number of test scenarios.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full comparison for every configured seed.
    Compare {
        #[command(flatten)]
        config: ConfigArgs,
        /// Run directory.
        #[arg(long, default_value = "dddr-run")]
        out: PathBuf,
    },
    /// Write the training model of a method in LP format.
    ExportLp {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value = "dddr")]
        method: String,
        #[arg(long)]
        scenarios: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Which instance a command works on.
#[derive(Args)]
struct Target {
    /// Instance file; generated from the config and seed when absent.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Config file plus per-field overrides.
#[derive(Args, Default)]
struct ConfigArgs {
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Facilities and customers as `I,J`.
    #[arg(long, value_parser = parse_size)]
    size: Option<(usize, usize)>,
    #[arg(long)]
    facilities: Option<usize>,
    #[arg(long)]
    customers: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_via::<Method>)]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    penalty: Option<f64>,
    #[arg(long)]
    revenue: Option<f64>,
    /// Support grid as `MIN,MAX,STEP`.
    #[arg(long, value_parser = parse_support)]
    support: Option<SupportSpec>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    budget: Option<usize>,
    /// Squared coefficient of variation.
    #[arg(long)]
    cv: Option<f64>,
    #[arg(long)]
    test_scenarios: Option<usize>,
    #[arg(long, value_parser = parse_via::<TestDistribution>)]
    distribution: Option<TestDistribution>,
    #[arg(long)]
    perturbed_reps: Option<usize>,
    /// certified, default, or a flat positive bound.
    #[arg(long, value_parser = parse_via::<BoundsRecipe>)]
    dual_bounds: Option<BoundsRecipe>,
    /// on or off.
    #[arg(long, value_parser = parse_switch)]
    cuts: Option<bool>,
    #[arg(long, value_parser = parse_via::<SolverChoice>)]
    solver: Option<SolverChoice>,
    #[arg(long)]
    export_lp: bool,
    /// Distance recipe scale.
    #[arg(long, conflicts_with = "rho")]
    lambda_scale: Option<f64>,
    /// Distance recipe row sum.
    #[arg(long, conflicts_with = "rho")]
    lambda_row_sum: Option<f64>,
    /// Switches to the rho-nearest recipe.
    #[arg(long)]
    rho: Option<usize>,
    #[arg(long, requires = "rho")]
    sigma_scale: Option<f64>,
}

fn parse_via<T>(s: &str) -> Result<T, String>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| e.to_string())
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (i, j) = s.split_once(',').ok_or("expected I,J")?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((p(i)?, p(j)?))
}

fn parse_support(s: &str) -> Result<SupportSpec, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [min, max, step] => Ok(SupportSpec { min, max, step }),
        _ => Err("expected MIN,MAX,STEP".into()),
    }
}

fn parse_switch(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" => Ok(true),
        "off" | "false" | "no" => Ok(false),
        _ => Err(format!("expected on or off, got {s:?}")),
    }
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => {
                let text =
                    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                ExperimentConfig::from_toml(&text)
                    .with_context(|| format!("parsing {}", p.display()))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some((i, j)) = self.size {
            c.facilities = i;
            c.customers = j;
        }
        macro_rules! set {
            ($($f:ident),*) => {$(
                if let Some(v) = &self.$f {
                    c.$f = v.clone();
                }
            )*};
        }
        set!(
            facilities,
            customers,
            seeds,
            methods,
            penalty,
            revenue,
            support,
            kappa,
            cv,
            test_scenarios,
            distribution,
            perturbed_reps,
            dual_bounds,
            cuts,
            solver
        );
        if self.budget.is_some() {
            c.budget = self.budget;
        }
        c.export_lp |= self.export_lp;
        if let Some(rho) = self.rho {
            c.lambda = LambdaRecipe::Rho {
                rho,
                sigma_scale: self.sigma_scale.unwrap_or(0.99),
            };
        } else if self.lambda_scale.is_some() || self.lambda_row_sum.is_some() {
            let (scale, row_sum) = match c.lambda {
                LambdaRecipe::Distance { scale, row_sum } => (scale, row_sum),
                LambdaRecipe::Rho { .. } => match LambdaRecipe::default() {
                    LambdaRecipe::Distance { scale, row_sum } => (scale, row_sum),
                    LambdaRecipe::Rho { .. } => unreachable!("default recipe is distance based"),
                },
            };
            c.lambda = LambdaRecipe::Distance {
                scale: self.lambda_scale.unwrap_or(scale),
                row_sum: self.lambda_row_sum.unwrap_or(row_sum),
            };
        }
        c.validate()?;
        Ok(c)
    }
}

fn first_seed(config: &ExperimentConfig, seed: Option<u64>) -> u64 {
    seed.unwrap_or(config.seeds[0])
}

fn read_problem(path: &Path) -> Result<ProblemData> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ProblemData::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_target(config: &ExperimentConfig, target: &Target) -> Result<(ProblemData, u64)> {
    let seed = first_seed(config, target.seed);
    let data = match &target.instance {
        Some(p) => read_problem(p)?,
        None => {
            let (instance, demand) = generate_instance(config, seed)?;
            ProblemData { instance, demand }
        }
    };
    Ok((data, seed))
}

fn method_arg(method: &str, scenarios: Option<usize>) -> Result<Method> {
    if method.eq_ignore_ascii_case("sp") {
        return Ok(Method::Sp(scenarios.unwrap_or(20)));
    }
    let m: Method = method.parse()?;
    if let (Method::Sp(n), Some(s)) = (m, scenarios) {
        if n != s {
            bail!("--method {method} conflicts with --scenarios {s}");
        }
    }
    Ok(m)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => {
            write_atomic(p, bytes).with_context(|| format!("writing {}", p.display()))?;
            log::info!("wrote {}", p.display());
        }
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
        }
    }
    Ok(())
}

fn plan_json(v: &Plan) -> Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

fn report_csv(plan: &Plan, report: &dddr_core::benchmarks::EvaluationReport) -> String {
    let mut s = String::from("method,statistic,value\n");
    for (name, v) in statistic_names().iter().zip(statistic_values(report)) {
        s.push_str(&format!("{},{name},{v}\n", plan.method));
    }
    s
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match cli.command {
        Command::Gen { config, seed, out } => {
            let c = config.resolve()?;
            let (instance, demand) = generate_instance(&c, first_seed(&c, seed))?;
            emit(
                Some(&out),
                ProblemData { instance, demand }.to_json()?.as_bytes(),
            )?;
        }
        Command::Fixture { config, seed, out } => {
            let c = config.resolve()?;
            let (instance, demand) = fixture_instance(&c, first_seed(&c, seed))?;
            emit(
                Some(&out),
                ProblemData { instance, demand }.to_json()?.as_bytes(),
            )?;
        }
        Command::Solve {
            config,
            target,
            method,
            scenarios,
            out,
        } => {
            let c = config.resolve()?;
            let method = method_arg(&method, scenarios)?;
            let (data, seed) = load_target(&c, &target)?;
            let plan = solve_plan(&data.instance, &data.demand, method, &c.plan_options(seed))?;
            log::info!(
                "{method}: open {:?}, objective {}",
                plan.open_facilities,
                plan.objective
            );
            emit(out.as_deref(), &plan_json(&plan)?)?;
        }
        Command::Evaluate {
            config,
            plan,
            instance,
            seed,
            dist,
            n,
            out,
        } => {
            let mut c = config.resolve()?;
            if let Some(d) = dist {
                c.distribution = d;
            }
            if let Some(n) = n {
                c.test_scenarios = n;
            }
            c.validate()?;
            let text =
                fs::read_to_string(&plan).with_context(|| format!("reading {}", plan.display()))?;
            let p: Plan = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", plan.display()))?;
            let instance_path = instance.unwrap_or_else(|| {
                plan.parent()
                    .unwrap_or(Path::new("."))
                    .join("instance.json")
            });
            let data = read_problem(&instance_path)?;
            if p.y.len() != data.instance.num_facilities() {
                bail!(
                    "plan has {} facilities, instance {}",
                    p.y.len(),
                    data.instance.num_facilities()
                );
            }
            let opts = c.compare_options(first_seed(&c, seed));
            let test = test_scenarios(&data.demand, &p.y, &opts)?;
            let report = evaluate_plan(&data.instance, &p.y, &test)?;
            emit(out.as_deref(), report_csv(&p, &report).as_bytes())?;
        }
        Command::Compare { config, out } => {
            let c = config.resolve()?;
            let manifest = run(&c, &out)?;
            println!(
                "{} files written to {} (config {})",
                manifest.files.len() + 1,
                out.display(),
                &manifest.config_hash[..12]
            );
            for s in &manifest.seeds {
                let table = out.join(format!("seed_{s}/comparison.txt"));
                println!("seed {s}\n{}", fs::read_to_string(table)?);
            }
        }
        Command::ExportLp {
            config,
            target,
            method,
            scenarios,
            out,
        } => {
            let c = config.resolve()?;
            let method = method_arg(&method, scenarios)?;
            let (data, seed) = load_target(&c, &target)?;
            let f = build_formulation(&data.instance, &data.demand, method, &c.plan_options(seed))?;
            emit(out.as_deref(), export_lp_text(&f.model).as_bytes())?;
        }
    }
    Ok(())
}
