use std::fs::File;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use ftcluster::analytic::{self, ThresholdParams};
use ftcluster::exec::ExecOptions;
use ftcluster::gadgets::{self, Gadget, Mode};
use ftcluster::montecarlo::{self, EstimateReport, TrialPlan};
use ftcluster::noise::{pair_from_index, NoiseModel};
use ftcluster::oracle::enumeration;
use ftcluster::oracle::statevec::{self, PhaseConvention};
use ftcluster::pauli::Pauli;
use ftcluster::report::{self, Format};
use ftcluster::resources::{self, SuccessTable};
use ftcluster::tableau::Gate;
use ftcluster::BigRational;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{
    Command, GadgetArgs, NoiseArgs, OracleArgs, OutputArgs, ResourcesArgs, RunArgs, SimulateArgs, SweepArgs,
    ThresholdArgs,
};

pub fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Threshold(a) => threshold(a),
        Command::Resources(a) => resources(a),
        Command::OracleCheck(a) => oracle_check(a),
    }
}

fn noise_model(a: &NoiseArgs) -> Result<NoiseModel<f64>> {
    let mut m = NoiseModel::depolarizing(a.p_e);
    if let Some(spec) = &a.table {
        let mut entries = Vec::new();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .with_context(|| format!("table entry `{item}` is not AB=p"))?;
            let letters: Vec<Pauli> = k.trim().chars().filter_map(Pauli::from_char).collect();
            if letters.len() != 2 || k.trim().chars().count() != 2 {
                bail!("table key `{k}` is not a two-letter Pauli pair");
            }
            let v: f64 = v
                .trim()
                .parse()
                .with_context(|| format!("table value in `{item}`"))?;
            entries.push(((letters[0], letters[1]), v));
        }
        m = NoiseModel::with_table(a.p_e, &entries, m.p_m)?;
    }
    if let Some(pm) = a.p_m {
        m.p_m = pm;
    }
    let m = m.with_memory(a.tau_m, a.n_steps);
    m.validate()?;
    Ok(m)
}

fn plan(g: &GadgetArgs, model: NoiseModel<f64>, r: &RunArgs) -> Result<TrialPlan> {
    let jobs = r.jobs.unwrap_or_else(default_jobs);
    let p = TrialPlan::new(g.gadget, g.level, model.p_e)
        .with_model(model)
        .with_mode(g.mode)
        .with_trials(r.trials)
        .with_seed(r.seed)
        .with_jobs(jobs)
        .with_options(ExecOptions {
            retry: !r.abort,
            ..ExecOptions::default()
        });
    p.validate()?;
    Ok(p)
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Writes `bytes` to `--out` (or stdout). Nothing is created on earlier
/// failures because callers render fully before calling this.
fn emit(out: &OutputArgs, bytes: &[u8]) -> Result<()> {
    match &out.out {
        Some(path) => write_file(path, bytes),
        None => {
            io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    f.write_all(bytes)
        .with_context(|| format!("cannot write {}", path.display()))
}

fn summary(r: &EstimateReport) -> String {
    format!(
        "{} level {} p_e={}: accepted {}/{} p_hat={:.6} [{:.6}, {:.6}] cond_err={:.3e} [{:.3e}, {:.3e}] frame_rate={:.3e}",
        r.gadget, r.level, r.p_e, r.accepts, r.trials, r.p_hat, r.ci_low, r.ci_high, r.cond_err, r.cond_err_lo,
        r.cond_err_hi, r.frame_rate
    )
}

/// Rows go to `--out`; when that is stdout the summary goes to stderr.
fn report_rows(out: &OutputArgs, rows: &[EstimateReport]) -> Result<()> {
    let mut buf = Vec::new();
    report::write(&mut buf, rows, out.format)?;
    for r in rows {
        if out.out.is_some() {
            println!("{}", summary(r));
        } else {
            eprintln!("{}", summary(r));
        }
    }
    emit(out, &buf)
}

fn simulate(a: SimulateArgs) -> Result<ExitCode> {
    let p = plan(&a.gadget, noise_model(&a.noise)?, &a.run)?;
    let r = montecarlo::run_trials(&p)?;
    report_rows(&a.output, &[r])?;
    Ok(ExitCode::SUCCESS)
}

fn sweep(a: SweepArgs) -> Result<ExitCode> {
    let grid = if a.grid.is_empty() {
        if !(a.pe_lo > 0.0 && a.pe_lo <= a.pe_hi) || a.points == 0 {
            bail!(
                "bad sweep range [{}, {}] with {} points",
                a.pe_lo,
                a.pe_hi,
                a.points
            );
        }
        let n = a.points.max(2) - 1;
        let ratio = (a.pe_hi / a.pe_lo).powf(1.0 / n as f64);
        (0..a.points).map(|i| a.pe_lo * ratio.powi(i as i32)).collect()
    } else {
        a.grid.clone()
    };
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        bail!("sweep grid must be strictly increasing");
    }
    let p = plan(&a.gadget, noise_model(&a.noise)?, &a.run)?;
    let rows = montecarlo::estimate_logical_error_curve(&p, &grid)?;
    report_rows(&a.output, &rows)?;
    Ok(ExitCode::SUCCESS)
}

/// The simplest fraction that rounds to `v`, so `0.0004` reads as `1/2500`.
fn exact(v: f64) -> Result<BigRational> {
    let r = BigRational::from_float(v).ok_or_else(|| anyhow!("{v} is not finite"))?;
    if r.is_negative() {
        return Ok(r);
    }
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut x = r.clone();
    for _ in 0..64 {
        let a = x.floor().to_integer();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        let cand = BigRational::new(h2.clone(), k2.clone());
        if cand.to_f64() == Some(v) {
            return Ok(cand);
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = &x - x.floor();
        if frac.is_zero() {
            break;
        }
        x = frac.recip();
    }
    Ok(r)
}

/// The exact model behind `a`; the default table keeps `p_e` symbolic.
fn exact_model(a: &NoiseArgs) -> Result<NoiseModel<BigRational>> {
    if a.table.is_none() && a.p_m.is_none() {
        return Ok(NoiseModel::depolarizing(BigRational::one()));
    }
    let m = noise_model(a)?;
    let entries = m
        .table()
        .iter()
        .enumerate()
        .map(|(i, v)| Ok((pair_from_index(i), exact(*v)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(NoiseModel::with_table(exact(m.p_e)?, &entries, exact(m.p_m)?)?)
}

fn parse_ratio(s: &str) -> Result<BigRational> {
    let s = s.trim();
    match s.parse::<BigRational>() {
        Ok(r) => Ok(r),
        Err(_) => exact(s.parse().with_context(|| format!("cannot parse D = `{s}`"))?),
    }
}

fn fmt_ratio(r: &BigRational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else if r.denom().bits() <= 20 {
        format!("{}/{}", r.numer(), r.denom())
    } else {
        format!("{:.6}", r.to_f64().unwrap_or(f64::NAN))
    }
}

fn threshold(a: ThresholdArgs) -> Result<ExitCode> {
    let params: ThresholdParams<BigRational> = match &a.d {
        Some(d) => ThresholdParams::from_d(parse_ratio(d)?)?,
        None => analytic::threshold(&exact_model(&a.noise)?)?,
    };
    let p_th = params.p_th.to_f64().unwrap_or(f64::NAN);
    let d = params.d.to_f64().unwrap_or(f64::NAN);
    println!("D={} p_th={:.4}", fmt_ratio(&params.d), p_th);
    println!("p_th exact={} ({:.5})", fmt_ratio(&params.p_th), p_th);
    if let Some(n) = a.n {
        let m = analytic::memory_threshold(n, a.noise.n_steps, a.noise.tau_m, d)?;
        println!(
            "memory N={} n_steps={} tau_m={} levels={:.3}: p_th={:.4} (with D: {:.4})",
            n, a.noise.n_steps, a.noise.tau_m, m.levels, m.verbatim, m.d_adjusted
        );
    }
    if a.empirical {
        let g = GadgetArgs {
            gadget: a.gadget,
            level: 1,
            mode: a.mode,
        };
        let template = plan(&g, noise_model(&a.noise)?, &a.run)?;
        let est = montecarlo::find_empirical_threshold(&template, (1, 2), a.p_lo, a.p_hi, a.steps)
            .map_err(|e| match e {
                ftcluster::Error::NoCrossing { lo, hi } => anyhow!(
                    "the level-1 and level-2 curves do not cross in [{lo}, {hi}]; pass a bracketing --p-lo/--p-hi"
                ),
                e => e.into(),
            })?;
        println!(
            "empirical crossing p_e={:.4} bracket=[{:.4}, {:.4}] resolved={} evaluations={}",
            est.p_cross,
            est.lo,
            est.hi,
            est.resolved,
            est.evaluations.len()
        );
        if a.output.out.is_some() {
            let rows: Vec<EstimateReport> = est
                .evaluations
                .iter()
                .flat_map(|(_, lo, hi)| [lo.clone(), hi.clone()])
                .collect();
            let mut buf = Vec::new();
            report::write(&mut buf, &rows, a.output.format)?;
            emit(&a.output, &buf)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn resources(a: ResourcesArgs) -> Result<ExitCode> {
    let table = match a.success_table.as_deref() {
        None => {
            bail!("missing success table below level 3: pass --success-table <csv> or --success-table unit")
        }
        Some("unit") => SuccessTable::<f64>::unit(),
        Some(path) => {
            let f = File::open(path).with_context(|| format!("cannot open {path}"))?;
            SuccessTable::read_csv(f).with_context(|| format!("success table {path}"))?
        }
    };
    let overlay = match &a.overlay {
        Some(path) => {
            let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
            Some(resources::read_overlay(f).with_context(|| format!("overlay {}", path.display()))?)
        }
        None => None,
    };
    let grid = match a.n {
        Some(n) => vec![n],
        None => resources::log_grid(a.n_lo, a.n_hi, a.per_decade)?,
    };
    let mut rows = resources::resource_curve(&grid, &a.p_e, &table)?;
    if let Some(points) = &overlay {
        resources::apply_overlay(&mut rows, points)?;
    }
    let mut buf = Vec::new();
    match a.output.format {
        Format::Csv => resources::write_curve_csv(&rows, &mut buf)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &rows)?;
            buf.push(b'\n');
        }
    }
    emit(&a.output, &buf)?;
    Ok(ExitCode::SUCCESS)
}

/// Drops gates one at a time while the exact comparison still fails.
fn shrink(n: usize, mut gates: Vec<Gate>, convention: PhaseConvention) -> Result<Vec<Gate>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut i = 0;
    while i < gates.len() {
        let mut trial = gates.clone();
        trial.remove(i);
        if statevec::cross_check(n, &trial, 0, convention, &mut rng)?
            .violation(1.0)
            .is_some()
        {
            gates = trial;
        } else {
            i += 1;
        }
    }
    Ok(gates)
}

struct Suite {
    circuits: usize,
    max_qubits: usize,
    depth: usize,
    shots: u64,
    trials: u64,
}

fn oracle_check(a: OracleArgs) -> Result<ExitCode> {
    let suite = if a.quick {
        Suite {
            circuits: 20,
            max_qubits: 6,
            depth: 40,
            shots: 10_000,
            trials: 20_000,
        }
    } else {
        Suite {
            circuits: 100,
            max_qubits: 10,
            depth: 80,
            shots: 10_000,
            trials: 200_000,
        }
    };
    let convention = if a.corrupt_phase {
        PhaseConvention::Conjugated
    } else {
        PhaseConvention::Standard
    };
    let shot_tol = 0.02;
    let mut failures = 0;

    let mut worst = (0.0f64, 0.0f64);
    let mut first_bad = None;
    for i in 0..suite.circuits {
        let seed = montecarlo::trial_seed(a.seed, i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 1 + i % suite.max_qubits;
        let gates = statevec::random_clifford_circuit(n, suite.depth, &mut rng);
        let c = statevec::cross_check(n, &gates, suite.shots, convention, &mut rng)?;
        worst = (worst.0.max(c.exact_tv), worst.1.max(c.shot_tv));
        if first_bad.is_none() {
            if let Some(v) = c.violation(shot_tol) {
                first_bad = Some((seed, v, c));
            }
        }
    }
    match first_bad {
        None => println!(
            "PASS tableau vs state vector: {} circuits, max exact TV {:.2e}, max sampled TV {:.4}",
            suite.circuits, worst.0, worst.1
        ),
        Some((seed, v, c)) => {
            failures += 1;
            let gates = shrink(c.n, c.gates, convention)?;
            println!("FAIL tableau vs state vector: {v}");
            println!("  reproduce: seed={seed} n={} reduced gates={gates:?}", c.n);
        }
    }

    let jobs = a.jobs.unwrap_or_else(default_jobs);
    for (k, p_e) in [1e-4, 1e-3].into_iter().enumerate() {
        let model = NoiseModel::depolarizing(p_e);
        let circuit = gadgets::build(Gadget::CzSingle, 1, Mode::Faithful)?;
        let truth = enumeration::enumerate(&circuit, &model, 2)?;
        let opts = ExecOptions {
            retry: false,
            ..ExecOptions::default()
        };
        let seed = a.seed.wrapping_add(k as u64 + 1);
        let map = ftcluster::compiled::FaultMap::compile(&circuit)?;
        let c = montecarlo::run_compiled(&map, &model, opts, suite.trials, seed, jobs)?;
        let r = EstimateReport::from_counts(Gadget::CzSingle, 1, p_e, seed, &c);
        let acc_ok = r.ci_low <= truth.acceptance && truth.acceptance <= r.ci_high;
        let err_ok = r.cond_err_lo <= truth.conditional_error && truth.conditional_error <= r.cond_err_hi;
        let tag = if acc_ok && err_ok { "PASS" } else { "FAIL" };
        println!(
            "{tag} cz_single level 1 p_e={p_e}: enumeration acceptance {:.6} in [{:.6}, {:.6}], cond_err {:.3e} in [{:.3e}, {:.3e}]",
            truth.acceptance, r.ci_low, r.ci_high, truth.conditional_error, r.cond_err_lo, r.cond_err_hi
        );
        if tag == "FAIL" {
            failures += 1;
            println!("  reproduce: seed={seed} trials={} abort mode", suite.trials);
        }
    }

    Ok(if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
