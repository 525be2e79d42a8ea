use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use twostroke::config::{Overrides, ParamValues, RunConfig};
use twostroke::propagators::PropagatorMode;
use twostroke::sweep::{
    figure_preset, plot_script, run_sweep, series_path, write_csv, Routes, Series, SweepSummary,
};
use twostroke::validate::{run_validation, Status};

/// Two-qubit two-stroke heat engine with a spin-squeezing interaction.
#[derive(Parser, Debug)]
#[command(name = "twostroke", version)]
struct Cli {
    /// Propagator: full, interaction, oracle-full or oracle-interaction.
    #[arg(long, global = true)]
    mode: Option<PropagatorMode>,

    /// Comma-separated evaluation routes: trace, closed, cf.
    #[arg(long, global = true)]
    routes: Option<Routes>,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a parameter sweep and write CSV.
    Sweep(SweepArgs),
    /// Run the cross-route consistency suite.
    Validate,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// TOML run configuration.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,

    /// Figure preset (fig2a, fig2b, fig3a, fig3b, fig4a, fig4b, fig5, fig9, fig10).
    #[arg(long)]
    preset: Option<String>,

    /// Output CSV; multi-series presets write `<stem>.<series>.csv` next to it.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write a gnuplot script next to the CSV output.
    #[arg(long)]
    plot: bool,

    #[arg(long)]
    eps_a: Option<f64>,
    #[arg(long)]
    eps_b: Option<f64>,
    #[arg(long)]
    beta_a: Option<f64>,
    #[arg(long)]
    beta_b: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
}

impl SweepArgs {
    fn param_overrides(&self) -> ParamValues {
        ParamValues {
            eps_a: self.eps_a,
            eps_b: self.eps_b,
            beta_a: self.beta_a,
            beta_b: self.beta_b,
            kappa: self.kappa,
            omega: self.omega,
            tau: self.tau,
        }
    }
}

const USAGE: u8 = 2;

fn series_for(cli: &Cli, args: &SweepArgs) -> Result<(Vec<Series>, PathBuf), String> {
    let over = Overrides {
        params: args.param_overrides(),
        mode: cli.mode,
        routes: cli.routes,
        output: args.out.clone(),
    };
    if let Some(path) = &args.config {
        let spec = RunConfig::load(path)
            .and_then(|c| c.into_spec(&over))
            .map_err(|e| e.to_string())?;
        let out = spec.output.clone().ok_or("no output path: set [sweep] output or pass --out")?;
        return Ok((vec![Series { label: String::new(), spec }], out));
    }
    let name = args.preset.as_deref().unwrap_or_default();
    let preset = figure_preset(name).map_err(|e| e.to_string())?;
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(format!("{name}.csv")));
    let mut series = preset.series;
    for s in &mut series {
        over.params.apply_to(&mut s.spec.base, s.spec.variable);
        if let Some(m) = cli.mode {
            s.spec.mode = m;
        }
        if let Some(r) = cli.routes {
            s.spec.routes = r;
        }
    }
    Ok((series, out))
}

fn sweep(cli: &Cli, args: &SweepArgs) -> ExitCode {
    let (series, out) = match series_for(cli, args) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(USAGE);
        }
    };
    let mut failed = false;
    let mut written = Vec::new();
    for s in &series {
        let path = series_path(&out, &s.label);
        let rows = match run_sweep(&s.spec, cli.workers) {
            Ok(rows) => rows,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(USAGE);
            }
        };
        for r in rows.iter().filter(|r| r.failed()) {
            eprintln!("{} = {:e}: {}", s.spec.variable, r.swept_value, r.failures.join("; "));
        }
        if let Err(e) = write_csv(&path, &rows) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::FAILURE;
        }
        let summary = SweepSummary::of(&rows);
        failed |= summary.failures > 0;
        println!("{} [{} {}]: {summary}", path.display(), s.spec.variable, s.spec.mode);
        written.push(path);
    }
    if args.plot {
        let script = out.with_extension("gp");
        let variable = series[0].spec.variable;
        if let Err(e) = std::fs::write(&script, plot_script(&written, variable)) {
            eprintln!("error: cannot write {}: {e}", script.display());
            return ExitCode::FAILURE;
        }
        println!("plot script: {}", script.display());
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn validate() -> ExitCode {
    match run_validation() {
        Ok(checks) => {
            for c in &checks {
                println!("{c}");
            }
            if checks.iter().any(|c| c.status == Status::Fail) {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Sweep(args) => sweep(&cli, args),
        Command::Validate => validate(),
    }
}
