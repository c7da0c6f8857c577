use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, Context};
use serde_json::json;

use robustcut::generate;
use robustcut::oracle::{brute_force_robust, certify_with_oracle, inner_at_cut};
use robustcut::relaxation::Relaxation;
use robustcut::robust::{solve_dro, solve_robust};
use robustcut::rounding::{large_cut_ratio, round_solution, GAMMA};
use robustcut::{
    CertifyConfig, GramFactor, Instance, ProblemKind, RoundConfig, SaddleMethod, SaddleSolution, Scheme,
    SolverConfig, UncertaintySpec, WeightAssignment,
};

use crate::report::{
    BoundsSection, CertificationSection, InputDigest, RoundingSection, RunReport, SolverSection, Status, Timings,
};
use crate::{BenchArgs, Common, GenArgs, GenKind, GenSpec, MethodArg, SchemeArg, SolverArgs};

/// Outcome classes with their exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or malformed input, or an invalid request (exit 1).
    Input(anyhow::Error),
    /// The solver stopped before reaching its tolerance (exit 2).
    NotConverged(String),
    /// A certified inequality failed (exit 3).
    FailedChecks(Vec<String>),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::NotConverged(_) => 2,
            Failure::FailedChecks(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(e) => write!(f, "{e:#}"),
            Failure::NotConverged(m) => write!(f, "solver did not converge: {m}"),
            Failure::FailedChecks(c) => write!(f, "{} inequality check(s) failed: {}", c.len(), c.join("; ")),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

impl From<robustcut::Error> for Failure {
    fn from(e: robustcut::Error) -> Self {
        Failure::Input(e.into())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn read(path: &Path) -> anyhow::Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn text(bytes: &[u8], path: &Path) -> anyhow::Result<String> {
    String::from_utf8(bytes.to_vec()).with_context(|| format!("{} is not UTF-8", path.display()))
}

fn load_instance(common: &Common) -> anyhow::Result<(Instance, InputDigest)> {
    let bytes = read(&common.instance)?;
    let t = text(&bytes, &common.instance)?;
    let inst = if common.directed && !t.trim_start().starts_with('{') {
        Instance::from_edge_list(&t, ProblemKind::DiCut)
    } else {
        Instance::parse(&t)
    }
    .with_context(|| format!("in {}", common.instance.display()))?;
    let digest = InputDigest::new(&bytes, inst.kind().to_string());
    Ok((inst, digest))
}

fn load_spec(path: &Path) -> anyhow::Result<(UncertaintySpec, InputDigest)> {
    let bytes = read(path)?;
    let spec = UncertaintySpec::from_json(&text(&bytes, path)?).with_context(|| format!("in {}", path.display()))?;
    let digest = InputDigest::new(&bytes, spec.kind_name());
    Ok((spec, digest))
}

fn solver_config(args: &SolverArgs, seed: u64, spec: &UncertaintySpec) -> anyhow::Result<SolverConfig> {
    let mut cfg = match &args.config {
        Some(p) => SolverConfig::from_json(&text(&read(p)?, p)?).with_context(|| format!("in {}", p.display()))?,
        None => SolverConfig::default(),
    };
    cfg.seed = seed;
    if args.rank.is_some() {
        cfg.rank = args.rank;
    }
    if let Some(g) = args.gap_tol {
        if g.is_nan() || g <= 0.0 {
            return Err(anyhow!("--gap-tol must be positive"));
        }
        cfg.gap_tol = g;
    }
    if let Some(m) = args.max_iter {
        if matches!(spec, UncertaintySpec::Singleton { .. }) {
            cfg.sdp_max_iter = m;
        } else {
            cfg.max_iter = m;
        }
    }
    match args.method {
        Some(MethodArg::CuttingPlane) => cfg.method = SaddleMethod::CuttingPlane,
        Some(MethodArg::Supergradient) => cfg.method = SaddleMethod::Supergradient,
        None => {}
    }
    Ok(cfg)
}

fn run_solver(inst: &Instance, spec: &UncertaintySpec, cfg: &SolverConfig) -> robustcut::Result<SaddleSolution> {
    if spec.is_distributional() {
        solve_dro(inst, spec, cfg)
    } else {
        solve_robust(inst, spec, cfg)
    }
}

fn solver_section(sol: &SaddleSolution, spec: &UncertaintySpec, cfg: &SolverConfig) -> SolverSection {
    SolverSection {
        method: match (spec, cfg.method) {
            (UncertaintySpec::Singleton { .. }, _) => "nominal".into(),
            (_, SaddleMethod::CuttingPlane) => "cutting-plane".into(),
            (_, SaddleMethod::Supergradient) => "supergradient".into(),
        },
        value: sol.value,
        upper_bound: sol.upper_bound,
        gap: sol.upper_bound - sol.value,
        iterations: sol.report.iterations,
        converged: sol.report.converged,
        rank: sol.factor.rank(),
        worst: sol.worst.clone(),
    }
}

fn round_config(common: &Common, kind: ProblemKind) -> RoundConfig {
    let scheme = match common.scheme {
        Some(SchemeArg::Uniform) => Scheme::Uniform,
        Some(SchemeArg::DicutUniform) => Scheme::DicutUniform,
        Some(SchemeArg::AllequalBiased) => Scheme::AllequalBiased,
        Some(SchemeArg::SignPsd) => Scheme::SignPsd,
        None => Scheme::for_kind(kind),
    };
    RoundConfig {
        seed: common.seed,
        trials: common.trials,
        scheme,
    }
}

fn rounding_section(
    inst: &Instance,
    spec: &UncertaintySpec,
    factor: &GramFactor,
    w: &WeightAssignment,
    cfg: RoundConfig,
) -> robustcut::Result<RoundingSection> {
    let outcome = round_solution(inst, factor, w, &cfg)?;
    let worst_case_value = inner_at_cut(inst, spec, &outcome.best)?.value;
    Ok(RoundingSection {
        config: cfg,
        outcome,
        worst_case_value,
    })
}

fn echo(name: &str, common: &Common, solver: Option<&SolverArgs>, extra: serde_json::Value) -> serde_json::Value {
    let mut v = json!({
        "name": name,
        "directed": common.directed,
        "seed": common.seed,
        "trials": common.trials,
        "scheme": common.scheme.map(|s| format!("{s:?}")),
        "extra": extra,
    });
    if let Some(s) = solver {
        v["rank"] = json!(s.rank);
        v["gap_tol"] = json!(s.gap_tol);
        v["max_iter"] = json!(s.max_iter);
        v["method"] = json!(s.method.map(|m| format!("{m:?}")));
        v["config_sha256"] = json!(s
            .config
            .as_ref()
            .and_then(|p| read(p).ok())
            .map(|b| InputDigest::new(&b, "config").sha256));
    }
    v
}

fn emit(out: Option<&Path>, body: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, body).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

struct Solved {
    inst: Instance,
    spec: UncertaintySpec,
    report: RunReport,
    solution: SaddleSolution,
    timings: Timings,
}

fn solve_stage(name: &str, common: &Common, args: &SolverArgs, extra: serde_json::Value) -> Result<Solved, Failure> {
    let (inst, inst_digest) = load_instance(common)?;
    let (spec, spec_digest) = load_spec(&args.spec)?;
    let cfg = solver_config(args, common.seed, &spec)?;
    let start = Instant::now();
    let solution = run_solver(&inst, &spec, &cfg)?;
    let timings = Timings {
        solve_seconds: start.elapsed().as_secs_f64(),
        round_seconds: 0.0,
        verify_seconds: 0.0,
    };
    let report = RunReport {
        command: echo(name, common, Some(args), extra),
        instance: inst_digest,
        spec: Some(spec_digest),
        seed: common.seed,
        status: if solution.report.converged {
            Status::Ok
        } else {
            Status::NotConverged
        },
        solver: Some(solver_section(&solution, &spec, &cfg)),
        rounding: None,
        certification: None,
        factor: Some(solution.factor.clone()),
        timings: None,
    };
    Ok(Solved {
        inst,
        spec,
        report,
        solution,
        timings,
    })
}

fn finish(common: &Common, mut report: RunReport, timings: Timings) -> anyhow::Result<()> {
    if common.timings {
        eprintln!(
            "solve {:.3}s, round {:.3}s, verify {:.3}s",
            timings.solve_seconds, timings.round_seconds, timings.verify_seconds
        );
        report.timings = Some(timings);
    }
    emit(common.out.as_deref(), &report.to_json())
}

fn not_converged(sol: &SaddleSolution) -> Failure {
    Failure::NotConverged(format!(
        "{} iterations, value {}, upper bound {}",
        sol.report.iterations, sol.value, sol.upper_bound
    ))
}

pub fn solve(common: &Common, args: &SolverArgs, csv: Option<&Path>) -> Outcome {
    let Solved {
        inst,
        spec,
        mut report,
        solution,
        mut timings,
    } = solve_stage("solve", common, args, json!({ "csv": csv.is_some() }))?;
    if !solution.report.converged {
        finish(common, report, timings)?;
        return Err(not_converged(&solution));
    }
    let start = Instant::now();
    let w = solution.worst.weights();
    let rounding = rounding_section(&inst, &spec, &solution.factor, w, round_config(common, inst.kind()))?;
    timings.round_seconds = start.elapsed().as_secs_f64();
    if let Some(path) = csv {
        let table = term_table(&inst, &solution.factor, w, &rounding)?;
        fs::write(path, table).with_context(|| format!("cannot write {}", path.display()))?;
    }
    report.rounding = Some(rounding);
    finish(common, report, timings)?;
    Ok(())
}

fn term_label(inst: &Instance, t: usize) -> String {
    match inst.kind() {
        ProblemKind::MaxCut => {
            let e = &inst.edges()[t];
            format!("{}-{}", e.tail + 1, e.head + 1)
        }
        ProblemKind::DiCut => {
            let e = &inst.edges()[t];
            format!("{}>{}", e.tail + 1, e.head + 1)
        }
        ProblemKind::AllEqual => inst.clauses()[t]
            .literals
            .iter()
            .map(|l| format!("{}{}", if l.negated { "-" } else { "+" }, l.var + 1))
            .collect::<Vec<_>>()
            .join(" "),
    }
}

fn term_table(
    inst: &Instance,
    factor: &GramFactor,
    w: &WeightAssignment,
    rounding: &RoundingSection,
) -> robustcut::Result<String> {
    let coeffs = Relaxation::new(inst).coefficients(factor);
    let ind = inst.term_indicators(&rounding.outcome.best)?;
    let mut out = String::from("term,endpoints,weight,relaxed_coefficient,rounded_indicator,contribution\n");
    for t in 0..inst.num_terms() {
        let wt = w.values()[t];
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            t,
            term_label(inst, t),
            wt,
            coeffs[t],
            ind[t],
            wt * ind[t]
        ));
    }
    Ok(out)
}

pub fn verify(common: &Common, args: &SolverArgs, samples: usize, cuts: usize, corrupt: Option<f64>) -> Outcome {
    let extra = json!({ "samples": samples, "cuts": cuts, "corrupt_value": corrupt });
    let Solved {
        inst,
        spec,
        mut report,
        mut solution,
        mut timings,
    } = solve_stage("verify", common, args, extra)?;
    if !solution.report.converged {
        finish(common, report, timings)?;
        return Err(not_converged(&solution));
    }
    if let Some(v) = corrupt {
        solution.value = v;
    }
    let start = Instant::now();
    let w = solution.worst.weights().clone();
    report.rounding = Some(rounding_section(
        &inst,
        &spec,
        &solution.factor,
        &w,
        round_config(common, inst.kind()),
    )?);
    timings.round_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let oracle = brute_force_robust(&inst, &spec)?;
    let cfg = CertifyConfig {
        samples,
        cuts,
        seed: common.seed,
        ..CertifyConfig::default()
    };
    let sandwich = certify_with_oracle(&inst, &spec, &solution, oracle.value, &cfg)?;
    let ratio = large_cut_ratio(GAMMA)?;
    let bounds = BoundsSection {
        gamma: GAMMA,
        large_cut_ratio: ratio,
        large_cut_ratio_in_range: (0.878..=0.880).contains(&ratio),
        negative_weight: w.negative_part(),
    };
    timings.verify_seconds = start.elapsed().as_secs_f64();

    let mut failed: Vec<String> = sandwich
        .failures()
        .map(|c| format!("{} ({} < {})", c.label, c.lhs, c.rhs))
        .collect();
    if !bounds.large_cut_ratio_in_range {
        failed.push(format!("large-cut ratio {ratio} outside [0.878, 0.880]"));
    }
    let pass = failed.is_empty();
    if let Some(s) = report.solver.as_mut() {
        s.value = solution.value;
    }
    report.certification = Some(CertificationSection {
        oracle,
        sandwich,
        bounds,
        pass,
    });
    if !pass {
        report.status = Status::FailedChecks;
    }
    finish(common, report, timings)?;
    if pass {
        Ok(())
    } else {
        Err(Failure::FailedChecks(failed))
    }
}

pub fn round(common: &Common, spec_path: &Path, report_path: &Path) -> Outcome {
    let (inst, inst_digest) = load_instance(common)?;
    let (spec, spec_digest) = load_spec(spec_path)?;
    let previous: RunReport = serde_json::from_slice(&read(report_path)?)
        .with_context(|| format!("in {}", report_path.display()))?;
    if previous.instance.sha256 != inst_digest.sha256 {
        return Err(anyhow!("{} was produced from a different instance", report_path.display()).into());
    }
    let factor = previous
        .factor
        .ok_or_else(|| anyhow!("{} holds no factor", report_path.display()))?;
    let solver = previous
        .solver
        .ok_or_else(|| anyhow!("{} holds no solver result", report_path.display()))?;
    let start = Instant::now();
    let rounding = rounding_section(&inst, &spec, &factor, solver.worst.weights(), round_config(common, inst.kind()))?;
    let timings = Timings {
        solve_seconds: 0.0,
        round_seconds: start.elapsed().as_secs_f64(),
        verify_seconds: 0.0,
    };
    let report = RunReport {
        command: echo("round", common, None, json!({ "report_sha256": InputDigest::new(&read(report_path)?, "report").sha256 })),
        instance: inst_digest,
        spec: Some(spec_digest),
        seed: common.seed,
        status: Status::Ok,
        solver: Some(solver),
        rounding: Some(rounding),
        certification: None,
        factor: Some(factor),
        timings: None,
    };
    finish(common, report, timings)?;
    Ok(())
}

pub fn gen(args: &GenArgs) -> Outcome {
    let body = match (args.kind, args.spec) {
        (Some(kind), None) => {
            let inst = match kind {
                GenKind::Gnp => generate::gnp(args.n, args.p, args.lo, args.hi, args.seed),
                GenKind::Cycle => generate::cycle(args.n),
                GenKind::Digraph => generate::digraph(args.n, args.p, args.lo, args.hi, args.seed),
                GenKind::Allequal => generate::allequal(args.n, args.k, args.m, args.lo, args.hi, args.seed),
                GenKind::Signed => generate::signed_gnp(args.n, args.p, args.lo, args.hi, args.seed),
            }?;
            inst.to_json()
        }
        (None, Some(kind)) => {
            let path = args.instance.as_deref().ok_or_else(|| anyhow!("--spec needs --instance"))?;
            let inst = Instance::parse(&text(&read(path)?, path)?).with_context(|| format!("in {}", path.display()))?;
            spec_for(kind, &inst, args)?.to_json()
        }
        _ => return Err(anyhow!("pass exactly one of --kind and --spec").into()),
    };
    emit(args.out.as_deref(), &format!("{body}\n"))?;
    Ok(())
}

fn spec_for(kind: GenSpec, inst: &Instance, args: &GenArgs) -> robustcut::Result<UncertaintySpec> {
    match kind {
        GenSpec::Singleton => Ok(generate::singleton_spec(inst)),
        GenSpec::Box => generate::box_spec(inst, args.width),
        GenSpec::Budget => generate::budget_spec(inst, args.width, args.budget),
        GenSpec::Ellipsoid => generate::ellipsoid_spec(inst, args.frac, args.seed),
        GenSpec::Wasserstein => generate::wasserstein_spec(inst, args.points, args.spread, args.radius, args.seed),
    }
}

pub fn bench(args: &BenchArgs) -> Outcome {
    let mut rows = Vec::new();
    for &n in &args.sizes {
        for rep in 0..args.reps as u64 {
            let seed = args.seed + rep;
            let inst = generate::gnp(n, args.p, 0.5, 1.5, seed)?;
            let gen_args = GenArgs {
                kind: None,
                spec: Some(args.spec),
                instance: None,
                n,
                p: args.p,
                k: 3,
                m: 0,
                lo: 0.5,
                hi: 1.5,
                width: 0.2,
                budget: 1.0,
                frac: 0.3,
                points: 3,
                spread: 0.3,
                radius: 0.1,
                seed,
                out: None,
            };
            let spec = spec_for(args.spec, &inst, &gen_args)?;
            let cfg = SolverConfig {
                seed,
                ..SolverConfig::default()
            };
            let start = Instant::now();
            let sol = run_solver(&inst, &spec, &cfg)?;
            let solve_seconds = start.elapsed().as_secs_f64();
            let start = Instant::now();
            let rc = RoundConfig {
                seed,
                ..RoundConfig::default()
            };
            let out = round_solution(&inst, &sol.factor, sol.worst.weights(), &rc)?;
            let round_seconds = start.elapsed().as_secs_f64();
            eprintln!("n={n} rep={rep}: solve {solve_seconds:.3}s, round {round_seconds:.3}s");
            rows.push(json!({
                "n": n,
                "rep": rep,
                "edges": inst.num_terms(),
                "iterations": sol.report.iterations,
                "converged": sol.report.converged,
                "value": sol.value,
                "rounded_value": out.best_value,
                "solve_seconds": solve_seconds,
                "round_seconds": round_seconds,
            }));
        }
    }
    let body = serde_json::to_string_pretty(&json!({ "spec": format!("{:?}", args.spec), "runs": rows }))
        .expect("json serializes");
    emit(args.out.as_deref(), &format!("{body}\n"))?;
    Ok(())
}
