use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hybrid_pon::analysis::{analyze, PacketDelay};
use hybrid_pon::harness::{
    format_sig, parse_scenario, replication_seed, run_experiment, sim_options, ExperimentSpec, OutputKind,
};
use hybrid_pon::sim::{confidence_interval, simulate};
use hybrid_pon::Error;

#[derive(Parser)]
#[command(name = "hybrid-pon", version, about = "Circuit and packet access on a TDM PON upstream channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print analytic blocking, occupancy and delay for every grid point.
    Analyze(Common),
    /// Simulate every grid point and print replication summaries.
    Simulate(Common),
    /// Print the blocking table (analytic and simulated).
    Table(Common),
    /// Run the full experiment and write CSV reports.
    Sweep(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args)]
struct Common {
    /// Scenario file; the reference operating point when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    /// Output directory for CSV reports.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Simulated time per replication, seconds.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    warmup: Option<f64>,
    #[arg(long, value_enum)]
    low_traffic_polling: Option<OnOff>,
}

impl Common {
    fn spec(&self) -> Result<ExperimentSpec, Error> {
        let mut spec = match &self.scenario {
            Some(path) => parse_scenario(&std::fs::read_to_string(path)?)?,
            None => ExperimentSpec::default(),
        };
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if let Some(r) = self.replications {
            spec.replications = r;
        }
        if let Some(d) = self.duration {
            spec.duration = d;
        }
        if let Some(w) = self.warmup {
            spec.warmup = w;
        }
        if let Some(flag) = self.low_traffic_polling {
            spec.base.low_traffic_polling = matches!(flag, OnOff::On);
        }
        if !(spec.duration > 0.0 && spec.warmup >= 0.0 && spec.warmup < spec.duration) {
            return Err(Error::InvalidScenario("need 0 <= warmup < duration".into()));
        }
        Ok(spec)
    }
}

fn cmd_analyze(spec: &ExperimentSpec) -> Result<(), Error> {
    println!("chi,C_c,pi,blocking_per_class,blocking_avg,mean_occupancy,packet_partition,pi_max,delay");
    for cfg in spec.grid() {
        let a = analyze(&cfg, spec.eta)?;
        let per_class: Vec<_> = a.blocking.per_class.iter().map(|&b| format_sig(b)).collect();
        let delay = match a.packet.delay {
            PacketDelay::Stable { total, .. } => format_sig(total),
            PacketDelay::Unstable => "unstable".into(),
        };
        println!(
            "{},{},{},{},{},{},{},{},{}",
            format_sig(cfg.circuit_load()),
            format_sig(cfg.circuit_limit),
            format_sig(cfg.packet_load()),
            per_class.join(" "),
            format_sig(a.blocking.average),
            format_sig(a.packet.mean_circuit_bandwidth),
            format_sig(a.packet.packet_partition),
            format_sig(a.packet.stability_limit.value),
            delay,
        );
    }
    Ok(())
}

fn cmd_simulate(spec: &ExperimentSpec) -> Result<(), Error> {
    let opts = sim_options(spec);
    println!("chi,C_c,pi,replication,blocking_avg,mean_occupancy,delay_mean,delay_std,unstable");
    for (p, cfg) in spec.grid().iter().enumerate() {
        let mut delays = Vec::new();
        for r in 0..spec.replications {
            let m = simulate(cfg, &opts, replication_seed(spec.seed, p, r))?;
            println!(
                "{},{},{},{r},{},{},{},{},{}",
                format_sig(cfg.circuit_load()),
                format_sig(cfg.circuit_limit),
                format_sig(cfg.packet_load()),
                format_sig(m.average_blocking()),
                format_sig(m.occupancy.mean()),
                format_sig(m.delay.mean()),
                format_sig(m.delay.std_dev()),
                m.unstable,
            );
            delays.push(m.delay.mean());
        }
        if let Ok(ci) = confidence_interval(&delays, 0.90) {
            eprintln!("point {p}: delay {} +/- {} (90 %)", format_sig(ci.mean), format_sig(ci.half_width));
        }
    }
    Ok(())
}

fn cmd_table(spec: &ExperimentSpec) -> Result<(), Error> {
    let spec = ExperimentSpec { outputs: vec![OutputKind::BlockingTable], ..spec.clone() };
    let report = run_experiment(&spec)?;
    print!("{}", report.file(OutputKind::BlockingTable).unwrap_or_default());
    Ok(())
}

fn cmd_sweep(spec: &ExperimentSpec, out: &std::path::Path) -> Result<(), Error> {
    let report = run_experiment(spec)?;
    for path in report.write(out)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Analyze(c) => c.spec().and_then(|s| cmd_analyze(&s)),
        Command::Simulate(c) => c.spec().and_then(|s| cmd_simulate(&s)),
        Command::Table(c) => c.spec().and_then(|s| cmd_table(&s)),
        Command::Sweep(c) => c.spec().and_then(|s| cmd_sweep(&s, &c.out)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Parse { .. } | Error::InvalidScenario(_) | Error::Io(_) => 1,
                Error::InfeasibleCycle { .. } => 2,
                _ => 3,
            })
        }
    }
}
