//! Command-line front end: measurement from count records, equilibrium
//! sampling, characteristic curves, the coupled-subsystem map, and exact
//! enumeration, all as deterministic CSV/JSON emitters.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use agenttemp::domain::{CountRecord, MeasurementVariant, SystemParams, Topology};
use agenttemp::{equilibrium, estimator, meanfield, oracle, simulator, Error};

const EXIT_INPUT: u8 = 2;
const EXIT_ALL_ROWS_FAILED: u8 = 3;
const EXIT_NON_CONVERGENCE: u8 = 4;

#[derive(Parser)]
#[command(name = "agenttemp", version, about = "Two-state agent-system temperature toolkit")]
struct Cli {
    /// RNG seed shared by all stochastic subcommands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output encoding.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantFlag {
    /// Full measurement equation.
    Exact,
    /// First-order expansion around M = 0+.
    Taylor,
    /// Ideal-system (Curie) form.
    Ideal,
}

impl From<VariantFlag> for MeasurementVariant {
    fn from(v: VariantFlag) -> Self {
        match v {
            VariantFlag::Exact => MeasurementVariant::Exact,
            VariantFlag::Taylor => MeasurementVariant::Taylor,
            VariantFlag::Ideal => MeasurementVariant::Ideal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// Independent draws from the exact single-agent law (J = 0 only).
    Ideal,
    /// Single-flip heat-bath Markov chain.
    Mcmc,
}

fn parse_topology(s: &str) -> Result<Topology, String> {
    match s {
        "ring" => Ok(Topology::Ring),
        "square" => Ok(Topology::SquarePeriodic),
        "full" => Ok(Topology::FullyConnected),
        other => other
            .strip_prefix("hypercubic:")
            .and_then(|d| d.parse().ok())
            .map(|dim| Topology::Hypercubic { dim })
            .ok_or_else(|| {
                format!("unknown topology '{other}' (expected ring, square, hypercubic:<dim>, full)")
            }),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Turn occupation-count records into temperature readings.
    Measure {
        /// CSV file with header label,n_plus,n_minus,B,mu,k,J,z.
        input: PathBuf,

        /// Which form of the measurement equation to apply.
        #[arg(long, value_enum, default_value_t = VariantFlag::Exact)]
        variant: VariantFlag,
    },

    /// Sample equilibrium configurations and report the surplus of each.
    Simulate {
        #[arg(long, value_enum)]
        method: Method,

        /// Neighborhood structure: ring, square, hypercubic:<dim>, full.
        #[arg(long, value_parser = parse_topology, default_value = "full")]
        topology: Topology,

        /// Population size N.
        #[arg(long)]
        agents: usize,

        /// Simulation temperature.
        #[arg(long)]
        temperature: f64,

        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 0.0)]
        j: f64,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,

        /// Number of sampled configurations.
        #[arg(long, default_value_t = 100)]
        samples: usize,

        /// Discarded equilibration sweeps (mcmc only).
        #[arg(long, default_value_t = 1000)]
        burn_in: usize,

        /// Sweeps between retained samples (mcmc only).
        #[arg(long, default_value_t = 10)]
        interval: usize,
    },

    /// Characteristic measurement curves T/T0 over a surplus grid.
    Curve {
        /// Pairwise-utility values, one curve each.
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
        j_values: Vec<f64>,

        #[arg(long, default_value_t = 0.01)]
        m_min: f64,
        #[arg(long, default_value_t = 0.99)]
        m_max: f64,
        #[arg(long, default_value_t = 99)]
        m_count: usize,

        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 12)]
        z: usize,
    },

    /// Coupled-subsystem map: ideal surplus M1 to interacting surplus M2.
    Equilibrium {
        #[arg(long, default_value_t = 1.0)]
        j: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 12)]
        z: usize,
        #[arg(long, default_value_t = 1.0)]
        b: f64,

        /// Ideal-subsystem surplus values M1.
        #[arg(long, value_delimiter = ',', default_value = "0.01")]
        m1: Vec<f64>,
    },

    /// Exact canonical averages by full enumeration (N <= 24).
    Oracle {
        #[arg(long, value_parser = parse_topology, default_value = "full")]
        topology: Topology,

        #[arg(long)]
        agents: usize,

        /// Temperatures to enumerate at.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,10")]
        t_values: Vec<f64>,

        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 0.0)]
        j: f64,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
    },
}

/// One cell of an output table.
#[derive(Clone)]
enum Field {
    Str(String),
    Num(f64),
    Bool(bool),
    Null,
}

struct Table {
    headers: Vec<&'static str>,
    rows: Vec<Vec<Field>>,
}

impl Table {
    fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("header");
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|f| match f {
                    Field::Str(s) => s.clone(),
                    Field::Num(v) => format!("{v}"),
                    Field::Bool(v) => format!("{v}"),
                    Field::Null => String::new(),
                })
                .collect();
            w.write_record(&cells).expect("row");
        }
        String::from_utf8(w.into_inner().expect("csv buffer")).expect("utf8")
    }

    fn to_json(&self) -> String {
        let objects: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (name, field) in self.headers.iter().zip(row) {
                    let value = match field {
                        Field::Str(s) => serde_json::Value::String(s.clone()),
                        Field::Num(v) => serde_json::json!(v),
                        Field::Bool(v) => serde_json::Value::Bool(*v),
                        Field::Null => serde_json::Value::Null,
                    };
                    obj.insert((*name).to_string(), value);
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        let mut text = serde_json::to_string_pretty(&objects).expect("json");
        text.push('\n');
        text
    }
}

/// A failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::NonConvergence { .. } => EXIT_NON_CONVERGENCE,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (table, row_failures) = match run(&cli) {
        Ok(result) => result,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            return ExitCode::from(failure.code);
        }
    };

    let rendered = match cli.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    if let Some(path) = &cli.output {
        if let Err(err) = fs::write(path, rendered) {
            eprintln!("error: cannot write {}: {err}", path.display());
            return ExitCode::from(EXIT_INPUT);
        }
    } else {
        let mut stdout = std::io::stdout();
        if stdout.write_all(rendered.as_bytes()).is_err() {
            return ExitCode::from(EXIT_INPUT);
        }
    }

    if row_failures == RowFailures::All {
        return ExitCode::from(EXIT_ALL_ROWS_FAILED);
    }
    ExitCode::SUCCESS
}

#[derive(PartialEq, Eq)]
enum RowFailures {
    None,
    Some,
    All,
}

fn run(cli: &Cli) -> Result<(Table, RowFailures), Failure> {
    match &cli.command {
        Command::Measure { input, variant } => cmd_measure(input, (*variant).into()),
        Command::Simulate {
            method,
            topology,
            agents,
            temperature,
            mu,
            j,
            k,
            b,
            samples,
            burn_in,
            interval,
        } => cmd_simulate(
            *method,
            *topology,
            *agents,
            *temperature,
            [*mu, *j, *k, *b],
            *samples,
            *burn_in,
            *interval,
            cli.seed,
        )
        .map(|t| (t, RowFailures::None)),
        Command::Curve {
            j_values,
            m_min,
            m_max,
            m_count,
            mu,
            k,
            b,
            z,
        } => cmd_curve(j_values, *m_min, *m_max, *m_count, *mu, *k, *b, *z)
            .map(|t| (t, RowFailures::None)),
        Command::Equilibrium { j, mu, z, b, m1 } => {
            cmd_equilibrium(*j, *mu, *z, *b, m1).map(|t| (t, RowFailures::None))
        }
        Command::Oracle {
            topology,
            agents,
            t_values,
            mu,
            j,
            k,
            b,
        } => cmd_oracle(*topology, *agents, t_values, [*mu, *j, *k, *b])
            .map(|t| (t, RowFailures::None)),
    }
}

/// Wire shape of one input row of the count-record schema.
#[derive(Deserialize)]
struct RawCount {
    label: String,
    n_plus: u64,
    n_minus: u64,
    #[serde(rename = "B")]
    b: f64,
    mu: f64,
    k: f64,
    #[serde(rename = "J")]
    j: f64,
    z: usize,
}

fn cmd_measure(
    input: &PathBuf,
    variant: MeasurementVariant,
) -> Result<(Table, RowFailures), Failure> {
    let mut reader = csv::Reader::from_path(input)
        .map_err(|err| Failure::input(format!("cannot read {}: {err}", input.display())))?;

    struct Outcome {
        label: String,
        m: Option<f64>,
        reading: Option<agenttemp::TemperatureReading>,
        error: Option<String>,
    }

    let mut outcomes = Vec::new();
    for (index, raw) in reader.deserialize::<RawCount>().enumerate() {
        let row_number = index + 2; // header is row 1
        let raw = raw.map_err(|err| Failure::input(format!("row {row_number}: {err}")))?;

        let measured = measure_one(&raw, variant);
        outcomes.push(match measured {
            Ok((m, reading)) => Outcome {
                label: raw.label,
                m: Some(m),
                reading: Some(reading),
                error: None,
            },
            Err(err) => Outcome {
                label: raw.label,
                m: None,
                reading: None,
                error: Some(err.to_string()),
            },
        });
    }
    if outcomes.is_empty() {
        return Err(Failure::input(format!(
            "{} contains no records",
            input.display()
        )));
    }

    let failed = outcomes.iter().filter(|o| o.error.is_some()).count();
    let any_failed = failed > 0;
    let mut headers = vec!["label", "M", "T", "T_std_error", "inverted", "variant"];
    if any_failed {
        headers.push("error");
    }

    let rows = outcomes
        .into_iter()
        .map(|o| {
            let mut row = match (&o.m, &o.reading) {
                (Some(m), Some(r)) => vec![
                    Field::Str(o.label.clone()),
                    Field::Num(*m),
                    Field::Num(r.t),
                    Field::Num(r.t_std_error),
                    Field::Bool(r.inverted),
                    Field::Str(variant_name(r.variant).to_string()),
                ],
                _ => vec![
                    Field::Str(o.label.clone()),
                    Field::Null,
                    Field::Null,
                    Field::Null,
                    Field::Null,
                    Field::Null,
                ],
            };
            if any_failed {
                row.push(match o.error {
                    Some(message) => Field::Str(message),
                    None => Field::Null,
                });
            }
            row
        })
        .collect::<Vec<_>>();

    let status = if failed == rows.len() {
        RowFailures::All
    } else if any_failed {
        RowFailures::Some
    } else {
        RowFailures::None
    };
    Ok((Table { headers, rows }, status))
}

fn measure_one(
    raw: &RawCount,
    variant: MeasurementVariant,
) -> Result<(f64, agenttemp::TemperatureReading), Error> {
    let n_agents = (raw.n_plus + raw.n_minus) as usize;
    let params = SystemParams::new(n_agents.max(1), raw.z, raw.mu, raw.j, raw.k, raw.b)?;
    let record = CountRecord {
        label: raw.label.clone(),
        n_plus: raw.n_plus,
        n_minus: raw.n_minus,
        params,
    };
    let estimate = estimator::surplus_from_counts(&record)?;
    let reading = estimator::temperature_with_uncertainty_variant(&params, &estimate, variant)?;
    Ok((estimate.m_hat, reading))
}

fn variant_name(v: MeasurementVariant) -> &'static str {
    match v {
        MeasurementVariant::Exact => "exact",
        MeasurementVariant::Taylor => "taylor",
        MeasurementVariant::Ideal => "ideal",
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    method: Method,
    topology: Topology,
    agents: usize,
    temperature: f64,
    [mu, j, k, b]: [f64; 4],
    samples: usize,
    burn_in: usize,
    interval: usize,
    seed: u64,
) -> Result<Table, Failure> {
    let z = topology.implied_z(agents)?;
    let params = SystemParams::new(agents, z, mu, j, k, b)?;
    let mut config = simulator::SimulationConfig::new(params, topology, temperature, seed);
    config.burn_in_sweeps = burn_in;
    config.sample_interval_sweeps = interval;
    config.n_samples = samples;

    let surpluses: Vec<f64> = match method {
        Method::Ideal => (0..samples)
            .map(|replica| {
                let snapshot = simulator::sample_ideal_stream(&config, replica as u64)?;
                let est: agenttemp::SurplusEstimate = estimator::census_surplus(&snapshot);
                Ok(est.m_hat)
            })
            .collect::<Result<_, Error>>()?,
        Method::Mcmc => simulator::sample_mcmc(&config)?
            .iter()
            .map(|snapshot| {
                let est: agenttemp::SurplusEstimate = estimator::census_surplus(snapshot);
                est.m_hat
            })
            .collect(),
    };

    Ok(Table {
        headers: vec!["sample_index", "M"],
        rows: surpluses
            .into_iter()
            .enumerate()
            .map(|(i, m)| vec![Field::Num(i as f64), Field::Num(m)])
            .collect(),
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_curve(
    j_values: &[f64],
    m_min: f64,
    m_max: f64,
    m_count: usize,
    mu: f64,
    k: f64,
    b: f64,
    z: usize,
) -> Result<Table, Failure> {
    if m_count < 1 {
        return Err(Failure::input("surplus grid needs at least one point"));
    }
    let grid: Vec<f64> = if m_count == 1 {
        vec![m_min]
    } else {
        (0..m_count)
            .map(|i| m_min + (m_max - m_min) * i as f64 / (m_count - 1) as f64)
            .collect()
    };
    let params = SystemParams::new(z + 1, z, mu, 0.0, k, b)?;
    let points = meanfield::characteristic_curve(&params, j_values, &grid)?;
    Ok(Table {
        headers: vec!["J", "M", "T_over_T0"],
        rows: points
            .into_iter()
            .map(|p| vec![Field::Num(p.j), Field::Num(p.m), Field::Num(p.t_over_t0)])
            .collect(),
    })
}

fn cmd_equilibrium(j: f64, mu: f64, z: usize, b: f64, m1_values: &[f64]) -> Result<Table, Failure> {
    let params = SystemParams::new(z + 1, z, mu, j, 1.0, b)?;
    let mut rows = Vec::with_capacity(m1_values.len());
    for &m1 in m1_values {
        let exact = equilibrium::coupled_surplus_exact(&params, m1)?;
        let linear = equilibrium::coupled_surplus_linear(&params, m1)?;
        let sensitivity = equilibrium::influence_sensitivity(&params, m1)?;
        rows.push(vec![
            Field::Num(m1),
            Field::Num(exact.m2),
            Field::Num(linear),
            Field::Num(sensitivity),
        ]);
    }
    Ok(Table {
        headers: vec!["M1", "M2_exact", "M2_linear", "dM2_dmu"],
        rows,
    })
}

fn cmd_oracle(
    topology: Topology,
    agents: usize,
    t_values: &[f64],
    [mu, j, k, b]: [f64; 4],
) -> Result<Table, Failure> {
    let z = topology.implied_z(agents)?;
    let params = SystemParams::new(agents, z, mu, j, k, b)?;
    let mut rows = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let ensemble = oracle::enumerate_exact(&params, topology, t)?;
        rows.push(vec![
            Field::Num(t),
            Field::Num(ensemble.partition_value),
            Field::Num(ensemble.mean_surplus),
            Field::Num(ensemble.mean_utility),
        ]);
    }
    Ok(Table {
        headers: vec!["T", "Z", "mean_M", "mean_U"],
        rows,
    })
}
