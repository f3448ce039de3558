//! Turn a parsed scenario into engine calls and a [`Report`].

use nalgebra::DMatrix;
use qreverse::dynamics::{check_detailed_balance_identity, check_mechanical_reversibility};
use qreverse::engine::{
    abl_distribution, detailed_balance_table, entropy_flow_demo, entropy_trace,
    enumerate_distribution, sample_many, two_spin_retrodiction, verify_abl_symmetry,
    verify_time_reversal, worker_rng, EntropyFlowConfig, TrajectoryDistribution,
};
use qreverse::markov::{balance_table, gibbs_chain, is_detailed_balance, reverse_chain_with};
use qreverse::observables::{magnetization, site_operator};
use qreverse::random::{random_hermitian, random_real_symmetric};
use qreverse::{
    AntiunitaryInvolution, CMatrix, Complex64, DensityMatrix, Error, FiniteDynamicalSystem,
    HermitianOperator, Macrostate, MarkovChain, MeasurementSchedule, ObservableDecomposition,
    Pauli, PotentialForm, StateVector, Trajectory,
};
use rand::Rng;

use crate::error::CliError;
use crate::report::{Cell, Check, Report, Table};
use crate::scenario::*;

pub const DEFAULT_WORKERS: usize = 4;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const MAX_SITES: usize = qreverse::observables::MAX_SITES;

/// Command-line overrides.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    pub workers: usize,
    pub enumeration_cap: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: None,
            samples: None,
            tol: None,
            workers: DEFAULT_WORKERS,
            enumeration_cap: qreverse::engine::DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl RunOptions {
    fn tol(&self, scenario: Option<f64>, default: f64) -> Result<f64, CliError> {
        let tol = self.tol.or(scenario).unwrap_or(default);
        if !(tol >= 0.0) || !tol.is_finite() {
            return Err(CliError::field(
                "tol",
                format!("tolerance must be a nonnegative number, got {tol}"),
            ));
        }
        Ok(tol)
    }

    fn seed(&self, scenario: Option<u64>) -> u64 {
        self.seed.or(scenario).unwrap_or(0)
    }
}

pub fn run(name: &str, scenario: &Scenario, opts: &RunOptions) -> Result<Report, CliError> {
    let mut report = Report::new(name, scenario.kind(), scenario.description());
    match scenario {
        Scenario::Reversal(s) => reversal(s, opts, &mut report)?,
        Scenario::Distribution(s) => distribution(s, opts, &mut report)?,
        Scenario::Sample(s) => sample(s, opts, &mut report)?,
        Scenario::Abl(s) => abl(s, opts, &mut report)?,
        Scenario::Retrodict(s) => retrodict(s, opts, &mut report)?,
        Scenario::EntropyFlow(s) => entropy_flow(s, opts, &mut report)?,
        Scenario::Markov(s) => markov(s, opts, &mut report)?,
        Scenario::Dynsys(s) => dynsys(s, opts, &mut report)?,
    }
    Ok(report)
}

fn complex(e: &ComplexEntry) -> Complex64 {
    Complex64::new(e[0], e[1])
}

fn complex_matrix(field: &str, entries: &ComplexMatrix, dim: usize) -> Result<CMatrix, CliError> {
    if entries.len() != dim || entries.iter().any(|r| r.len() != dim) {
        return Err(CliError::field(
            field,
            format!("expected a {dim}×{dim} matrix"),
        ));
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| complex(&entries[i][j])))
}

fn engine(field: &str) -> impl Fn(Error) -> CliError + '_ {
    move |e| CliError::field(field, e.to_string())
}

fn hamiltonian(
    spec: &HamiltonianSpec,
    sites: usize,
    seed: u64,
) -> Result<HermitianOperator, CliError> {
    let d = 1usize << sites;
    let field = "schedule.hamiltonian";
    Ok(match spec {
        HamiltonianSpec::Zero {} => HermitianOperator::zero(d),
        HamiltonianSpec::RandomReal { seed: own } => {
            random_real_symmetric(d, &mut worker_rng(own.unwrap_or(seed), 0))
        }
        HamiltonianSpec::RandomHermitian { seed: own } => {
            random_hermitian(d, &mut worker_rng(own.unwrap_or(seed), 0))
        }
        HamiltonianSpec::Precession { omega } => {
            let mut m = CMatrix::zeros(d, d);
            for i in 1..=sites {
                let x = site_operator(sites, i, Pauli::X).map_err(engine(field))?;
                m += (CMatrix::identity(d, d) - x.matrix()) * Complex64::new(omega / 2.0, 0.0);
            }
            HermitianOperator::new(m).map_err(engine(field))?
        }
        HamiltonianSpec::Matrix { entries } => {
            let field = "schedule.hamiltonian.entries";
            HermitianOperator::new(complex_matrix(field, entries, d)?).map_err(engine(field))?
        }
    })
}

fn initial_state(spec: &InitialSpec, d: usize) -> Result<DensityMatrix, CliError> {
    Ok(match spec {
        InitialSpec::Mixed {} => DensityMatrix::maximally_mixed(d),
        InitialSpec::Basis { index } => DensityMatrix::pure(
            &StateVector::basis(d, *index).map_err(engine("schedule.initial.index"))?,
        ),
        InitialSpec::Pure { amplitudes } => {
            let field = "schedule.initial.amplitudes";
            if amplitudes.len() != d {
                return Err(CliError::field(field, format!("expected {d} amplitudes")));
            }
            let amps: Vec<Complex64> = amplitudes.iter().map(complex).collect();
            DensityMatrix::pure(&StateVector::from_slice(&amps).map_err(engine(field))?)
        }
        InitialSpec::Matrix { entries } => {
            let field = "schedule.initial.entries";
            DensityMatrix::new(complex_matrix(field, entries, d)?).map_err(engine(field))?
        }
    })
}

fn times(spec: &TimesSpec) -> Result<Vec<f64>, CliError> {
    match spec {
        TimesSpec::List(t) => Ok(t.clone()),
        TimesSpec::Grid(g) => {
            if g.count == 0 {
                return Err(CliError::field(
                    "schedule.times.count",
                    "at least one time is required",
                ));
            }
            let unit = match g.period_of {
                Some(omega) if omega > 0.0 && omega.is_finite() => {
                    2.0 * std::f64::consts::PI / omega
                }
                Some(omega) => {
                    return Err(CliError::field(
                        "schedule.times.period_of",
                        format!("frequency must be positive, got {omega}"),
                    ))
                }
                None => 1.0,
            };
            Ok((0..g.count)
                .map(|k| (g.start + k as f64 * g.step) * unit)
                .collect())
        }
    }
}

fn observable(
    spec: &ObservableSpec,
    sites: usize,
    field: &str,
) -> Result<HermitianOperator, CliError> {
    let err = |m: String| CliError::field(field, m);
    match spec {
        ObservableSpec::Matrix(entries) => {
            let m = complex_matrix(field, entries, 1 << sites)?;
            HermitianOperator::new(m).map_err(|e| err(e.to_string()))
        }
        ObservableSpec::Named(name) => {
            let z = |i| site_operator(sites, i, Pauli::Z).map_err(|e| err(e.to_string()));
            match name.as_str() {
                "mz" => magnetization(sites).map_err(|e| err(e.to_string())),
                "sum" => {
                    let mut acc = z(1)?;
                    for i in 2..=sites {
                        acc = acc.sum(&z(i)?)?;
                    }
                    Ok(acc)
                }
                "diff" => {
                    if sites < 2 {
                        return Err(err("\"diff\" needs at least two sites".into()));
                    }
                    Ok(z(1)?.difference(&z(2)?)?)
                }
                _ => {
                    let (which, site) = name
                        .split_once(':')
                        .ok_or_else(|| err(format!("unknown observable \"{name}\"")))?;
                    let pauli = match which {
                        "sx" => Pauli::X,
                        "sy" => Pauli::Y,
                        "sz" => Pauli::Z,
                        _ => return Err(err(format!("unknown observable \"{name}\""))),
                    };
                    let site: usize = site
                        .parse()
                        .map_err(|_| err(format!("bad site index in \"{name}\"")))?;
                    site_operator(sites, site, pauli).map_err(|e| err(e.to_string()))
                }
            }
        }
    }
}

fn schedule(
    spec: &ScheduleSpec,
    seed: u64,
    opts: &RunOptions,
) -> Result<MeasurementSchedule, CliError> {
    let sites = spec.sites;
    if sites == 0 || sites > MAX_SITES {
        return Err(CliError::field(
            "schedule.sites",
            format!("must be between 1 and {MAX_SITES}"),
        ));
    }
    let d = 1usize << sites;
    let h = hamiltonian(&spec.hamiltonian, sites, seed)?;
    let initial = initial_state(&spec.initial, d)?;
    let times = times(&spec.times)?;
    let observables = match (&spec.observable, &spec.observables) {
        (Some(o), None) => {
            let a = observable(o, sites, "schedule.observable")?;
            let obs = ObservableDecomposition::with_default_tol(&a)
                .map_err(engine("schedule.observable"))?;
            vec![obs; times.len()]
        }
        (None, Some(list)) => {
            if list.len() != times.len() {
                return Err(CliError::field(
                    "schedule.observables",
                    format!("{} observables for {} times", list.len(), times.len()),
                ));
            }
            list.iter()
                .enumerate()
                .map(|(k, o)| {
                    let field = format!("schedule.observables[{k}]");
                    let a = observable(o, sites, &field)?;
                    ObservableDecomposition::with_default_tol(&a)
                        .map_err(|e| CliError::field(&field, e.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        _ => {
            return Err(CliError::field(
                "schedule",
                "give exactly one of \"observable\" or \"observables\"",
            ))
        }
    };
    let s = MeasurementSchedule::new(h, initial, times, observables)
        .map_err(engine("schedule.times"))?;
    Ok(s.with_enumeration_cap(opts.enumeration_cap))
}

fn involution(spec: &PiSpec, sites: usize) -> Result<AntiunitaryInvolution, CliError> {
    let d = 1usize << sites;
    match spec {
        PiSpec::Named(n) if n == "conjugation" => Ok(AntiunitaryInvolution::conjugation(d)),
        PiSpec::Named(n) if n == "spin-flip" => {
            AntiunitaryInvolution::spin_flip(sites).map_err(engine("pi"))
        }
        PiSpec::Named(n) => Err(CliError::field(
            "pi",
            format!("unknown involution \"{n}\" (expected \"conjugation\", \"spin-flip\" or {{\"unitary\": …}})"),
        )),
        PiSpec::Unitary { unitary } => {
            AntiunitaryInvolution::new(complex_matrix("pi.unitary", unitary, d)?).map_err(engine("pi.unitary"))
        }
    }
}

fn trajectory_table(dist: &TrajectoryDistribution) -> Table {
    let mut t = Table::new("trajectories", &["trajectory", "probability"]);
    for (traj, p) in dist.entries() {
        t.push(vec![traj.to_string().into(), (*p).into()]);
    }
    t
}

fn marginal_table(s: &MeasurementSchedule, dist: &TrajectoryDistribution) -> Table {
    let d = s.dim() as f64;
    let mut t = Table::new(
        "marginals",
        &[
            "step",
            "time",
            "label",
            "dimension",
            "probability",
            "dimension_weight",
        ],
    );
    for step in 0..s.steps() {
        for (label, p) in dist.marginal(step) {
            let dim = s.observables()[step].condition(&label).map_or(0, |c| c.dim);
            t.push(vec![
                step.into(),
                s.times()[step].into(),
                label.into(),
                dim.into(),
                p.into(),
                (dim as f64 / d).into(),
            ]);
        }
    }
    t
}

fn entropy_table(
    s: &MeasurementSchedule,
    dist: &TrajectoryDistribution,
) -> Result<Table, CliError> {
    let mut t = Table::new(
        "entropy",
        &["trajectory", "step", "time", "label", "entropy"],
    );
    for (traj, _) in dist.entries() {
        let trace = entropy_trace(s, traj)?;
        for (step, e) in trace.into_iter().enumerate() {
            t.push(vec![
                traj.to_string().into(),
                step.into(),
                s.times()[step].into(),
                traj.labels()[step].as_str().into(),
                e.into(),
            ]);
        }
    }
    Ok(t)
}

/// Max `|Prob[ω] − 1/count|` and the trajectory attaining it.
fn uniformity(dist: &TrajectoryDistribution) -> (f64, Option<String>) {
    let target = 1.0 / dist.len() as f64;
    dist.entries()
        .iter()
        .map(|(t, p)| ((p - target).abs(), Some(t.to_string())))
        .fold((0.0, None), |acc, x| if x.0 > acc.0 { x } else { acc })
}

fn marginal_deviation(
    s: &MeasurementSchedule,
    dist: &TrajectoryDistribution,
) -> (f64, Option<String>) {
    let d = s.dim() as f64;
    let mut worst = (0.0, None);
    for step in 0..s.steps() {
        for (label, p) in dist.marginal(step) {
            let dim = s.observables()[step].condition(&label).map_or(0, |c| c.dim) as f64;
            let dev = (p - dim / d).abs();
            if dev > worst.0 {
                worst = (dev, Some(format!("step {step} label {label}")));
            }
        }
    }
    worst
}

fn describe_schedule(report: &mut Report, s: &MeasurementSchedule) {
    report.set("dimension", s.dim());
    report.set("steps", s.steps());
    report.set("trajectories", s.trajectory_count() as u64);
}

fn reversal(sc: &ReversalScenario, opts: &RunOptions, report: &mut Report) -> Result<(), CliError> {
    let seed = opts.seed(sc.seed);
    let tol = opts.tol(sc.tol, 1e-10)?;
    let ratio_tol = sc.ratio_tol.unwrap_or(1e-8);
    let s = schedule(&sc.schedule, seed, opts)?;
    let pi = involution(&sc.pi, sc.schedule.sites)?;
    describe_schedule(report, &s);
    report.set("seed", seed);

    let rev = verify_time_reversal(&s, &pi)?;
    let mut table = Table::new(
        "trajectories",
        &[
            "trajectory",
            "probability",
            "reversed_probability",
            "deviation",
        ],
    );
    for row in &rev.rows {
        table.push(vec![
            row.trajectory.to_string().into(),
            row.probability.into(),
            row.reversed_probability.into(),
            row.deviation.into(),
        ]);
    }
    let witness = rev.worst.as_ref().and_then(|w| {
        rev.rows.iter().find(|r| &r.trajectory == w).map(|r| {
            format!(
                "{} vs reversed {} ({:e} vs {:e})",
                r.trajectory, r.reversed, r.probability, r.reversed_probability
            )
        })
    });
    report.set("max_reversal_deviation", rev.max_deviation);
    report.check(
        Check::at_most("max |Prob[w] - Prob[rev w]|", rev.max_deviation, tol).with_witness(witness),
    );

    let db = detailed_balance_table(&s, &pi)?;
    let mut ratios = Table::new(
        "detailed_balance",
        &["trajectory", "ratio", "predicted", "deviation"],
    );
    let mut worst = (0.0f64, None);
    let mut defined = 0usize;
    for row in &db {
        match row.ratio {
            Some(r) => {
                defined += 1;
                if r.deviation > worst.0 {
                    worst = (
                        r.deviation,
                        Some(format!(
                            "{} ratio {} vs {}",
                            row.trajectory, r.ratio, r.predicted
                        )),
                    );
                }
                ratios.push(vec![
                    row.trajectory.to_string().into(),
                    r.ratio.into(),
                    r.predicted.into(),
                    r.deviation.into(),
                ]);
            }
            None => ratios.push(vec![
                row.trajectory.to_string().into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
            ]),
        }
    }
    report.set("defined_ratios", defined);
    report.set("max_ratio_deviation", worst.0);
    report.check(
        Check::at_most("max |ratio - d_last/d_first|", worst.0, ratio_tol).with_witness(worst.1),
    );

    let dist = enumerate_distribution(&s)?;
    if sc.uniform {
        let (dev, w) = uniformity(&dist);
        report
            .check(Check::at_most("max |Prob[w] - 1/count|", dev, tol.max(1e-12)).with_witness(w));
    }
    report.tables.push(table);
    report.tables.push(ratios);
    report.tables.push(marginal_table(&s, &dist));
    report.tables.push(entropy_table(&s, &dist)?);
    Ok(())
}

fn distribution(
    sc: &DistributionScenario,
    opts: &RunOptions,
    report: &mut Report,
) -> Result<(), CliError> {
    let seed = opts.seed(sc.seed);
    let tol = opts.tol(sc.tol, 1e-10)?;
    let s = schedule(&sc.schedule, seed, opts)?;
    describe_schedule(report, &s);
    report.set("seed", seed);
    let dist = enumerate_distribution(&s)?;
    report.set("total_probability", dist.total());
    report.check(Check::at_most(
        "|sum Prob - 1|",
        (dist.total() - 1.0).abs(),
        tol,
    ));
    if s.initial().deviation_from_maximally_mixed() <= 1e-12 {
        let (dev, w) = marginal_deviation(&s, &dist);
        report.check(Check::at_most("max |marginal - d_a/d|", dev, tol).with_witness(w));
    }
    if sc.uniform {
        let (dev, w) = uniformity(&dist);
        report.check(Check::at_most("max |Prob[w] - 1/count|", dev, tol).with_witness(w));
    }
    report.tables.push(trajectory_table(&dist));
    report.tables.push(marginal_table(&s, &dist));
    report.tables.push(entropy_table(&s, &dist)?);
    Ok(())
}

fn sample(sc: &SampleScenario, opts: &RunOptions, report: &mut Report) -> Result<(), CliError> {
    let seed = opts.seed(sc.seed);
    let tol = opts.tol(sc.tol, 0.02)?;
    let samples = opts.samples.or(sc.samples).unwrap_or(DEFAULT_SAMPLES);
    if samples == 0 {
        return Err(CliError::field("samples", "must be positive"));
    }
    let s = schedule(&sc.schedule, seed, opts)?;
    describe_schedule(report, &s);
    report.set("seed", seed);
    report.set("samples", samples);
    report.set("workers", opts.workers);
    let dist = enumerate_distribution(&s)?;
    let draws = sample_many(&s, samples, seed, opts.workers)?;
    let mut counts = std::collections::HashMap::<&Trajectory, usize>::new();
    for t in &draws {
        *counts.entry(t).or_default() += 1;
    }
    let mut table = Table::new(
        "trajectories",
        &["trajectory", "probability", "count", "frequency"],
    );
    let mut worst = (0.0f64, None);
    for (t, p) in dist.entries() {
        let c = counts.get(t).copied().unwrap_or(0);
        let f = c as f64 / samples as f64;
        if (f - p).abs() > worst.0 {
            worst = ((f - p).abs(), Some(format!("{t}: frequency {f} vs {p}")));
        }
        table.push(vec![t.to_string().into(), (*p).into(), c.into(), f.into()]);
    }
    let tv = dist.total_variation(&draws);
    report.set("total_variation", tv);
    report.check(Check::at_most("total variation distance", tv, tol).with_witness(worst.1));
    report.tables.push(table);
    report.tables.push(marginal_table(&s, &dist));
    Ok(())
}

fn abl(sc: &AblScenario, opts: &RunOptions, report: &mut Report) -> Result<(), CliError> {
    let seed = opts.seed(sc.seed);
    let tol = opts.tol(sc.tol, 1e-10)?;
    let s = schedule(&sc.schedule, seed, opts)?;
    if s.steps() < 2 {
        return Err(CliError::field(
            "schedule.times",
            "two-time conditioning needs at least two times",
        ));
    }
    describe_schedule(report, &s);
    report.set("first", sc.first.as_str());
    report.set("last", sc.last.as_str());
    let law = abl_distribution(&s, &sc.first, &sc.last)?;
    let mut table = Table::new("conditional", &["intermediate", "probability"]);
    let mut total = 0.0;
    for (mid, p) in &law {
        total += p;
        table.push(vec![mid.join(">").into(), (*p).into()]);
    }
    report.check(Check::at_most(
        "|sum of conditionals - 1|",
        (total - 1.0).abs(),
        tol,
    ));
    for (k, e) in sc.expect.iter().enumerate() {
        let got = law
            .iter()
            .find(|(mid, _)| *mid == e.intermediate)
            .map(|(_, p)| *p)
            .ok_or_else(|| {
                CliError::field(
                    format!("expect[{k}].intermediate"),
                    format!("no intermediate sequence {:?}", e.intermediate),
                )
            })?;
        report.set(&format!("conditional[{}]", e.intermediate.join(">")), got);
        report.check(
            Check::at_most(
                format!("|P({}) - {}|", e.intermediate.join(">"), e.probability),
                (got - e.probability).abs(),
                tol,
            )
            .with_witness(Some(format!("got {got}"))),
        );
    }
    if let Some(pi) = &sc.pi {
        let pi = involution(pi, sc.schedule.sites)?;
        let dev = verify_abl_symmetry(&s, &pi)?;
        report.set("symmetry_deviation", dev);
        report.check(Check::at_most(
            "max |P(w | ends) - P(rev w | rev ends)|",
            dev,
            tol,
        ));
    }
    report.tables.push(table);
    Ok(())
}

fn retrodict(
    sc: &RetrodictScenario,
    opts: &RunOptions,
    report: &mut Report,
) -> Result<(), CliError> {
    let tol = opts.tol(sc.tol, 1e-12)?;
    let r = two_spin_retrodiction(sc.coefficients.map(|e| complex(&e)))?;
    report.set("forward", r.forward);
    report.set("reversed", r.reversed);
    report.set("ratio", r.ratio());
    // d(σ1 − σ2 = 2) / d(σ1 + σ2 = 0)
    report.set("dimension_ratio", 0.5);
    if let Some(e) = &sc.expect {
        report.check(Check::at_most(
            format!("|forward - {}|", e.forward),
            (r.forward - e.forward).abs(),
            tol,
        ));
        report.check(Check::at_most(
            format!("|reversed - {}|", e.reversed),
            (r.reversed - e.reversed).abs(),
            tol,
        ));
    }
    let mut table = Table::new(
        "retrodiction",
        &["direction", "given", "outcome", "probability"],
    );
    table.push(vec![
        "forward".into(),
        "sum=0".into(),
        "diff=2".into(),
        r.forward.into(),
    ]);
    table.push(vec![
        "reversed".into(),
        "diff=2".into(),
        "sum=0".into(),
        r.reversed.into(),
    ]);
    report.tables.push(table);
    Ok(())
}

fn entropy_flow(
    sc: &EntropyFlowScenario,
    opts: &RunOptions,
    report: &mut Report,
) -> Result<(), CliError> {
    let defaults = EntropyFlowConfig::default();
    let config = EntropyFlowConfig {
        sites: sc.sites.unwrap_or(defaults.sites),
        seeds: sc.seeds.unwrap_or(defaults.seeds),
        steps: sc.steps.unwrap_or(defaults.steps),
        dt: sc.dt.unwrap_or(defaults.dt),
        seed: opts.seed(sc.seed),
    };
    if config.steps == 0 {
        return Err(CliError::field("steps", "must be positive"));
    }
    let summary = entropy_flow_demo(config)?;
    report.set("sites", config.sites);
    report.set("seeds", config.seeds);
    report.set("seed", config.seed);
    let mut steps = Table::new(
        "entropy_steps",
        &[
            "step",
            "time",
            "median",
            "lower_quartile",
            "upper_quartile",
            "mean",
            "min",
            "max",
        ],
    );
    for st in &summary.steps {
        steps.push(vec![
            st.step.into(),
            (st.step as f64 * config.dt).into(),
            st.median.into(),
            st.lower_quartile.into(),
            st.upper_quartile.into(),
            st.mean.into(),
            st.min.into(),
            st.max.into(),
        ]);
    }
    let mut increments = Table::new("entropy_increments", &["run", "step", "increment"]);
    for (run, row) in summary.increments.iter().enumerate() {
        for (step, x) in row.iter().enumerate() {
            increments.push(vec![run.into(), step.into(), (*x).into()]);
        }
    }
    let median = summary.steps[1].median;
    report.set("median_first_increment", median);
    report.check(Check::above("median S(a_1) - S(a_0)", median, 0.0));
    report.tables.push(steps);
    report.tables.push(increments);
    Ok(())
}

fn markov(sc: &MarkovScenario, opts: &RunOptions, report: &mut Report) -> Result<(), CliError> {
    let tol = opts.tol(sc.tol, 1e-12)?;
    let chain = match (&sc.transitions, &sc.potential_form) {
        (Some(rows), None) => {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(CliError::field("transitions", "matrix is not square"));
            }
            let states = state_labels(sc, n)?;
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            MarkovChain::new(states, DMatrix::from_row_slice(n, n, &flat))
                .map_err(engine("transitions"))?
        }
        (None, Some(pf)) => {
            let form = PotentialForm::from_rows(&pf.activity, pf.potential.clone())
                .map_err(engine("potential_form"))?;
            let g = gibbs_chain(&form).map_err(engine("potential_form"))?;
            let states = state_labels(sc, form.len())?;
            MarkovChain::new(states, g.transitions().clone())?
                .with_stationary(form.gibbs_weights())?
        }
        _ => {
            return Err(CliError::field(
                "transitions",
                "give exactly one of \"transitions\" or \"potential_form\"",
            ))
        }
    };
    let n = chain.len();
    let involution: Vec<usize> = sc.involution.clone().unwrap_or_else(|| (0..n).collect());
    let rho = chain.stationary_or_solve()?;
    let reversed = reverse_chain_with(&chain, &involution).map_err(engine("involution"))?;
    let twice = reverse_chain_with(&reversed, &involution)?;
    let db = is_detailed_balance(&chain, tol)?;
    let name = |i: usize| chain.states()[i].clone();
    let witness = db.witness.map(|(y, z)| {
        format!(
            "{}<->{}: {:e} vs {:e}",
            name(y),
            name(z),
            rho[y] * chain.p(y, z),
            rho[z] * chain.p(z, y)
        )
    });

    let mut stationarity = 0.0f64;
    for j in 0..n {
        let flow: f64 = (0..n).map(|i| rho[i] * reversed.p(i, j)).sum();
        stationarity = stationarity.max((flow - rho[j]).abs());
    }
    let self_reversed = chain.max_difference(&reversed);
    report.set("states", n);
    report.set("detailed_balance", db.holds);
    report.set("max_violation", db.max_violation);
    report.set("reversal_difference", self_reversed);
    report.check(Check::at_most(
        "reversed chain stationarity",
        stationarity,
        1e-10,
    ));
    report.check(Check::at_most(
        "double reversal difference",
        chain.max_difference(&twice),
        1e-12,
    ));
    if sc.involution.is_none() {
        report.check(Check::holds(
            "detailed balance iff reversed chain equals chain",
            db.holds == (self_reversed <= tol),
        ));
    }
    if let Some(expected) = sc.expect_detailed_balance {
        let name = if expected {
            "detailed balance holds"
        } else {
            "detailed balance fails"
        };
        report.check(Check::holds(name, db.holds == expected).with_witness(witness.clone()));
    }
    report.set("witness", witness);

    let mut stationary = Table::new("stationary", &["state", "probability"]);
    for (i, p) in rho.iter().enumerate() {
        stationary.push(vec![name(i).into(), (*p).into()]);
    }
    let mut balance = Table::new(
        "balance",
        &["from", "to", "flow", "reverse_flow", "violation"],
    );
    for (y, z, f, b) in balance_table(&chain)? {
        balance.push(vec![
            name(y).into(),
            name(z).into(),
            f.into(),
            b.into(),
            (f - b).abs().into(),
        ]);
    }
    let mut rev = Table::new("reversed", &["from", "to", "p", "p_reversed"]);
    for y in 0..n {
        for z in 0..n {
            rev.push(vec![
                name(y).into(),
                name(z).into(),
                chain.p(y, z).into(),
                reversed.p(y, z).into(),
            ]);
        }
    }
    report.tables.extend([stationary, balance, rev]);
    Ok(())
}

fn state_labels(sc: &MarkovScenario, n: usize) -> Result<Vec<String>, CliError> {
    match &sc.states {
        Some(s) if s.len() != n => Err(CliError::field(
            "states",
            format!("{} labels for {n} states", s.len()),
        )),
        Some(s) => Ok(s.clone()),
        None => Ok((0..n).map(|i| i.to_string()).collect()),
    }
}

fn system(spec: &SystemSpec) -> Result<FiniteDynamicalSystem, CliError> {
    match spec {
        SystemSpec::Named(name) => {
            let n = name
                .strip_prefix("free-motion:")
                .and_then(|n| n.parse::<usize>().ok())
                .ok_or_else(|| {
                    CliError::field(
                        "system",
                        format!("unknown system \"{name}\" (expected \"free-motion:n\")"),
                    )
                })?;
            FiniteDynamicalSystem::free_motion(n).map_err(engine("system"))
        }
        SystemSpec::Tables {
            forward,
            involution,
        } => FiniteDynamicalSystem::new(forward.clone(), involution.clone())
            .map_err(engine("system")),
    }
}

fn dynsys(sc: &DynsysScenario, opts: &RunOptions, report: &mut Report) -> Result<(), CliError> {
    let sys = system(&sc.system)?;
    let max_time = sc.max_time.unwrap_or(16);
    let size = sys.len();
    report.set("states", size);
    report.set("max_time", max_time);

    let failure = (0..=max_time).find_map(|t| {
        let c = check_mechanical_reversibility(&sys, t);
        c.witness.map(|x| (t, x))
    });
    let reversible = failure.is_none();
    report.set("mechanically_reversible", reversible);
    report.check(
        Check::holds(
            if sc.expect_reversible {
                "pi f^t pi = f^-t for all t"
            } else {
                "mechanical reversibility fails"
            },
            reversible == sc.expect_reversible,
        )
        .with_witness(failure.map(|(t, x)| format!("t = {t}, state {x}"))),
    );

    let mut pairs: Vec<(Macrostate, Macrostate, u32)> = Vec::new();
    for (k, p) in sc.pairs.iter().enumerate() {
        if let Some(&x) = p.a.iter().chain(&p.b).find(|&&x| x >= size) {
            return Err(CliError::field(
                format!("pairs[{k}]"),
                format!("state {x} out of range for {size} states"),
            ));
        }
        pairs.push((
            Macrostate::new(p.a.iter().copied()),
            Macrostate::new(p.b.iter().copied()),
            p.t,
        ));
    }
    if let Some(rp) = &sc.random_pairs {
        if !(0.0..=1.0).contains(&rp.density) {
            return Err(CliError::field(
                "random_pairs.density",
                "must lie in [0, 1]",
            ));
        }
        if max_time == 0 {
            return Err(CliError::field(
                "max_time",
                "random pairs need max_time >= 1",
            ));
        }
        let seed = opts.seed(sc.seed);
        report.set("seed", seed);
        let mut rng = worker_rng(seed, 0);
        for _ in 0..rp.count {
            let a = Macrostate::from_predicate(size, |_| rng.random_bool(rp.density));
            let b = Macrostate::from_predicate(size, |_| rng.random_bool(rp.density));
            let t = rng.random_range(1..=max_time);
            pairs.push((a, b, t));
        }
    }

    let mut table = Table::new(
        "identity",
        &["pair", "t", "size_a", "size_b", "lhs", "rhs", "equal"],
    );
    let mut failures = 0usize;
    let mut first_failure = None;
    let mut defined = 0usize;
    for (k, (a, b, t)) in pairs.iter().enumerate() {
        match check_detailed_balance_identity(&sys, a, b, *t) {
            Ok(id) => {
                defined += 1;
                if !id.equal {
                    failures += 1;
                    first_failure
                        .get_or_insert_with(|| format!("pair {k}: {} != {}", id.lhs, id.rhs));
                }
                table.push(vec![
                    k.into(),
                    (*t).into(),
                    a.len().into(),
                    b.len().into(),
                    id.lhs.to_string().into(),
                    id.rhs.to_string().into(),
                    id.equal.into(),
                ]);
            }
            Err(Error::UndefinedConditional(_)) => {
                table.push(vec![
                    k.into(),
                    (*t).into(),
                    a.len().into(),
                    b.len().into(),
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                ]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    report.set("pairs", pairs.len());
    report.set("defined_pairs", defined);
    if reversible && !pairs.is_empty() {
        report.check(
            Check::holds(
                format!("counting identity exact on {defined} defined pairs"),
                failures == 0,
            )
            .with_witness(first_failure),
        );
    }
    report.tables.push(table);
    Ok(())
}
