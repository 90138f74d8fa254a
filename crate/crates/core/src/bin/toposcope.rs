use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use toposcope::complex::Complex;
use toposcope::config::{header_comment, RunConfig};
use toposcope::dynamics::{integrate, lyapunov_max, LorenzParams, Trajectory};
use toposcope::embedding::{choose_m, choose_tau, delay_embed, EmbeddingConfig, PointCloud};
use toposcope::hodge::{complex_laplacian, random_bound_check, spectrum, DEFAULT_TAU0_REL};
use toposcope::persistence::{compute_persistence, enclosing_radius, max_h1_persistence, rips_filtration, PersistenceDiagram};
use toposcope::probe::{
    amplitudes_csv, apply_register_phases, dephase_average, dicke_superposition, dicke_weights, diagonal_populations,
    edge_register_state, random_phases, w_state_circuit, ProbeKind,
};
use toposcope::qcompile::{choose_alpha, compile_report, EvolutionConfig, StateVector};
use toposcope::selection::{select, RepresentativeSet};
use toposcope::spectro::{correlator_exact, correlator_hadamard, estimate, periodogram, CorrelatorSeries, Ensemble, HadamardConfig};
use toposcope::susy::{susy_hamiltonian, verify_block_equivalence};
use toposcope::sweep::{records_csv, resume_sweep, Mode, SweepRecord};
use toposcope::topograph::{EdgeTag, TopoGraph, TriangleMode};
use toposcope::{fivepoint, Error, Result};

#[derive(Parser)]
#[command(name = "toposcope", version, about = "Lorenz attractor topology and simulated spectral readout")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Flat `key = value` run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// exact | hadamard
    #[arg(long, global = true)]
    mode: Option<String>,
    #[arg(long, global = true)]
    shots: Option<usize>,
    /// Override any config key, e.g. `--set spectro.dt=0.2`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Betti numbers and first gap of the five-point fixture.
    ValidateFivepoint,
    /// Full pipeline over the rho grid.
    Sweep,
    /// Gap-persistence bound over random planar clouds.
    BoundCheck,
    /// Compiled vs. textbook phase-estimation two-qubit counts.
    CompileReport,
    /// Trajectory and largest Lyapunov exponent at `rho`.
    Lorenz,
    /// Delay-embedded point cloud.
    Embed,
    /// Rips persistence diagram of the embedded cloud.
    Ph,
    /// Representative points.
    Select,
    /// Topograph, its L1 spectrum and Betti numbers.
    Graph,
    /// SUSY Hamiltonian terms and the sector/Laplacian check.
    Susy,
    /// Probe, correlator and spectral estimate on the topograph.
    Qpe,
}

enum Outcome {
    Pass,
    Fail,
}

fn load_config(g: &Global) -> Result<RunConfig> {
    let text = match &g.config {
        Some(p) => fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(s) = g.seed {
        cfg.set("seed", &s.to_string())?;
    }
    if let Some(o) = &g.out {
        cfg.out = o.clone();
    }
    if let Some(m) = &g.mode {
        cfg.set("mode", m)?;
    }
    if let Some(s) = g.shots {
        cfg.set("shots", &s.to_string())?;
    }
    for kv in &g.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.finish()?;
    Ok(cfg)
}

struct Out {
    dir: PathBuf,
    digest: String,
    files: Vec<String>,
}

impl Out {
    fn new(cfg: &RunConfig) -> Result<Self> {
        fs::create_dir_all(&cfg.out)?;
        Ok(Self { dir: cfg.out.clone(), digest: cfg.digest(), files: Vec::new() })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn raw(&mut self, name: &str, body: &str) -> Result<()> {
        fs::write(self.path(name), body)?;
        self.files.push(name.into());
        Ok(())
    }

    fn csv(&mut self, name: &str, body: &str) -> Result<()> {
        let text = format!("{}{body}", header_comment(&self.digest));
        self.raw(name, &text)
    }

    fn json(&mut self, name: &str, data: serde_json::Value) -> Result<()> {
        let doc = json!({ "version": env!("CARGO_PKG_VERSION"), "config_sha256": self.digest, "data": data });
        let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Internal(e.to_string()))? + "\n";
        self.raw(name, &text)
    }

    fn manifest(&mut self, cmd: &str, cfg: &RunConfig, outcome: &Outcome) -> Result<()> {
        let entries: serde_json::Map<String, serde_json::Value> =
            cfg.entries().into_iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
        let files = self.files.clone();
        self.json(
            "manifest.json",
            json!({
                "command": cmd,
                "seed": cfg.seed,
                "pass": matches!(outcome, Outcome::Pass),
                "config": entries,
                "files": files,
            }),
        )
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

struct Pipeline {
    traj: Trajectory,
    tau: usize,
    m: usize,
    cloud: PointCloud,
    diag: Option<PersistenceDiagram>,
    rep: Option<RepresentativeSet>,
    graph: Option<TopoGraph>,
}

#[derive(PartialEq, PartialOrd)]
enum Stage {
    Embed,
    Ph,
    Select,
    Graph,
}

fn pipeline(cfg: &RunConfig, upto: Stage) -> Result<Pipeline> {
    let s = &cfg.sweep;
    let params = LorenzParams::new(s.sigma, cfg.rho, s.beta)?;
    let traj = integrate(&params, s.x0, s.dt, s.t_trans, s.t_trans + s.t_len)?;
    let series = traj.observable(s.observable);
    let tau = s.tau.unwrap_or_else(|| choose_tau(&series, s.max_lag).tau);
    let m = s.m.unwrap_or_else(|| choose_m(&series, tau, s.m_max, s.fnn_threshold).m);
    let full = delay_embed(&series, &EmbeddingConfig { tau, m, observable: s.observable, normalize: s.normalize })?;
    let idx: Vec<usize> = (0..full.len()).step_by(s.stride.max(1)).collect();
    let cloud = full.subset(&idx);
    let mut p = Pipeline { traj, tau, m, cloud, diag: None, rep: None, graph: None };
    if upto >= Stage::Ph {
        let filt = rips_filtration(&p.cloud, enclosing_radius(&p.cloud), 2)?;
        p.diag = Some(compute_persistence(&filt));
    }
    if upto >= Stage::Select {
        let rep = select(&p.cloud, p.diag.as_ref().unwrap(), &s.selection)?;
        p.rep = Some(rep);
    }
    if upto >= Stage::Graph {
        let rep = p.rep.as_ref().unwrap();
        let pts = p.cloud.subset(&rep.indices);
        let mut ecfg = s.edges.clone();
        if ecfg.use_ring && ecfg.ring_vertices.is_none() {
            ecfg.ring_vertices = Some(rep.topo_positions());
        }
        p.graph = Some(TopoGraph::build(&pts, Some(&rep.angles), &ecfg, TriangleMode::All3Cliques)?);
    }
    Ok(p)
}

fn cmd_validate_fivepoint(cfg: &RunConfig, out: &mut Out) -> Result<Outcome> {
    let s = &cfg.sweep;
    let report = fivepoint::validate(&fivepoint::FIVE_POINT, cfg.eta, s.corr_samples, s.corr_dt)?;
    out.csv("fivepoint.csv", &report.to_csv())?;
    let pc = fivepoint::cloud();
    out.csv("fivepoint_points.csv", &pc.to_csv())?;
    let filt = rips_filtration(&pc, 2.0, 2)?;
    for &eps in &fivepoint::RADII {
        let c = filt.complex_at(eps);
        let l1 = complex_laplacian(&c, 1);
        let pops = vec![1.0 / c.edges.len() as f64; c.edges.len()];
        let alpha = report.rows.iter().find(|r| r.eps == eps).map_or(1.0, |r| r.alpha);
        let series = correlator_exact(&l1, Ensemble::Diagonal(&pops), s.corr_samples, s.corr_dt, alpha)?;
        out.csv(&format!("fivepoint_correlator_eps{eps}.csv"), &series.to_csv())?;
        out.csv(&format!("fivepoint_spectrum_eps{eps}.csv"), &periodogram(&series)?.to_csv())?;
        out.csv(&format!("fivepoint_l1_eps{eps}.csv"), &spectrum(&l1, DEFAULT_TAU0_REL)?.to_csv())?;
    }
    eprint!("{}", report.to_csv());
    Ok(if report.pass { Outcome::Pass } else { Outcome::Fail })
}

fn cmd_sweep(cfg: &RunConfig, out: &mut Out) -> Result<Outcome> {
    let grid = cfg.grid();
    let cache = out.path("sweep_records.json");
    let mut done: Vec<SweepRecord> = Vec::new();
    if let Ok(text) = fs::read_to_string(&cache) {
        if let Ok(doc) = serde_json::from_str::<serde_json::Value>(&text) {
            if doc["config_sha256"] == json!(out.digest) {
                done = serde_json::from_value(doc["data"].clone()).unwrap_or_default();
                log::info!("resuming with {} completed records", done.len());
            }
        }
    }
    let res = resume_sweep(&grid, &cfg.sweep, &done)?;
    out.json("sweep_records.json", to_value(&res.records))?;
    out.csv("sweep.csv", &records_csv(&res.records))?;
    out.json(
        "correlation.json",
        json!({
            "x": "ell_max_h1",
            "y": "delta1_susy_sim",
            "correlation": to_value(&res.correlation),
            "argmax_ell": res.argmax_ell,
            "argmax_gap": res.argmax_gap,
            "effective_hamiltonian": "L1 / alpha of the pipeline graph",
        }),
    )?;
    let failed = res.records.iter().filter(|r| r.failed_stage.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} grid points failed");
    }
    Ok(Outcome::Pass)
}

fn cmd_bound_check(cfg: &RunConfig, out: &mut Out) -> Result<Outcome> {
    let reports = random_bound_check(cfg.bound_clouds, cfg.bound_points, cfg.seed)?;
    let mut rows = Vec::new();
    let mut slacks = Vec::new();
    let mut violations = 0;
    for (k, r) in reports.iter().enumerate() {
        for rec in &r.records {
            if !rec.holds {
                violations += 1;
            }
            if let Some(s) = rec.slack {
                slacks.push(s);
            }
            rows.push(vec![
                k.to_string(),
                toposcope::io::fmt_f64(rec.birth),
                toposcope::io::fmt_f64(rec.death),
                toposcope::io::fmt_f64(rec.lipschitz),
                rec.d_max.to_string(),
                rec.lambda_at_birth.map(toposcope::io::fmt_f64).unwrap_or_default(),
                toposcope::io::fmt_f64(rec.lhs),
                rec.slack.map(toposcope::io::fmt_f64).unwrap_or_default(),
                rec.holds.to_string(),
            ]);
        }
    }
    out.csv(
        "bound_check.csv",
        &toposcope::io::csv(&["cloud", "birth", "death", "lipschitz", "d_max", "lambda", "lhs", "slack", "holds"], &rows),
    )?;
    let q = |p: f64| if slacks.is_empty() { None } else { Some(toposcope::linalg::quantile(&slacks, p)) };
    out.json(
        "bound_summary.json",
        json!({
            "clouds": cfg.bound_clouds,
            "points": cfg.bound_points,
            "pairs": rows.len(),
            "violations": violations,
            "slack_min": q(0.0),
            "slack_median": q(0.5),
            "slack_max": q(1.0),
        }),
    )?;
    eprintln!("{} pairs, {violations} violations", rows.len());
    Ok(if violations == 0 { Outcome::Pass } else { Outcome::Fail })
}

fn instance(cfg: &RunConfig) -> Result<Complex> {
    Complex::new(cfg.instance_vertices, cfg.instance_edges.clone(), Vec::new())
}

fn cmd_compile_report(cfg: &RunConfig, out: &mut Out) -> Result<Outcome> {
    let g = instance(cfg)?;
    let h = susy_hamiltonian(&g.adjacency())?;
    let alpha = choose_alpha(&h, cfg.compile_time / cfg.sweep.trotter.steps as f64, 0.9).max(cfg.sweep.alpha);
    let ecfg = EvolutionConfig { alpha, ..cfg.sweep.trotter };
    let (circ, report) = compile_report(&h, cfg.compile_time, &ecfg, cfg.phase_bits)?;
    out.raw("circuit.jsonl", &circ.to_jsonl())?;
    out.raw("hamiltonian.jsonl", &h.to_jsonl())?;
    out.json("compile_report.json", json!({ "alpha": alpha, "time": cfg.compile_time, "report": to_value(&report) }))?;
    eprintln!(
        "compiled {} vs baseline {} two-qubit gates, ratio {:.2}",
        report.compiled_two_qubit, report.baseline_two_qubit, report.ratio
    );
    Ok(Outcome::Pass)
}

fn cmd_lorenz(cfg: &RunConfig, out: &mut Out) -> Result<Outcome> {
    let s = &cfg.sweep;
    let params = LorenzParams::new(s.sigma, cfg.rho, s.beta)?;
    let traj = integrate(&params, s.x0, s.dt, s.t_trans, s.t_trans + s.t_len)?;
    out.csv("trajectory.csv", &traj.to_csv())?;
    let l = lyapunov_max(&params, s.x0, s.dt, s.lyap_t_total, s.lyap_renorm_every)?;
    out.json("lyapunov.json", json!({ "rho": cfg.rho, "lambda_max": l.lambda_max, "total_time": l.total_time }))?;
    Ok(Outcome::Pass)
}

fn cmd_embed(cfg: &RunConfig, out: &mut Out) -> Result<Outcome> {
    let p = pipeline(cfg, Stage::Embed)?;
    out.csv("cloud.csv", &p.cloud.to_csv())?;
    out.json("embedding.json", json!({ "tau": p.tau, "tau_time": p.tau as f64 * p.traj.dt, "m": p.m, "points": p.cloud.len() }))?;
    Ok(Outcome::Pass)
}

fn cmd_ph(cfg: &RunConfig, out: &mut Out) -> Result<Outcome> {
    let p = pipeline(cfg, Stage::Ph)?;
    let diag = p.diag.as_ref().unwrap();
    out.csv("cloud.csv", &p.cloud.to_csv())?;
    out.csv("diagram.csv", &diag.to_csv())?;
    out.json("persistence.json", json!({ "ell_max_h1": max_h1_persistence(diag), "pairs": diag.pairs.len() }))?;
    Ok(Outcome::Pass)
}

fn cmd_select(cfg: &RunConfig, out: &mut Out) -> Result<Outcome> {
    let p = pipeline(cfg, Stage::Select)?;
    let rep = p.rep.as_ref().unwrap();
    out.csv("representatives.csv", &p.cloud.subset(&rep.indices).to_csv())?;
    out.json("selection.json", to_value(rep))?;
    Ok(Outcome::Pass)
}

fn cmd_graph(cfg: &RunConfig, out: &mut Out) -> Result<Outcome> {
    let p = pipeline(cfg, Stage::Graph)?;
    let g = p.graph.as_ref().unwrap();
    let l1 = complex_laplacian(&g.complex, 1);
    let spec = spectrum(&l1, DEFAULT_TAU0_REL)?;
    out.json("graph.json", g.to_json())?;
    out.csv("l1_spectrum.csv", &spec.to_csv())?;
    out.csv("l1.csv", &toposcope::io::dense_csv(&l1))?;
    out.json("betti.json", to_value(&toposcope::hodge::betti_numbers(&g.complex)))?;
    Ok(Outcome::Pass)
}

fn cmd_susy(cfg: &RunConfig, out: &mut Out) -> Result<Outcome> {
    let p = pipeline(cfg, Stage::Graph)?;
    let g = p.graph.as_ref().unwrap();
    let adj = g.complex.adjacency();
    let h = susy_hamiltonian(&adj)?;
    out.raw("hamiltonian.jsonl", &h.to_jsonl())?;
    let report = verify_block_equivalence(&adj, adj.len())?;
    out.json("blocks.json", to_value(&report))?;
    Ok(if report.pass() { Outcome::Pass } else { Outcome::Fail })
}

fn cmd_qpe(cfg: &RunConfig, out: &mut Out) -> Result<Outcome> {
    let s = &cfg.sweep;
    let p = pipeline(cfg, Stage::Graph)?;
    let g = p.graph.as_ref().unwrap();
    let c = &g.complex;
    let n = c.n_vertices;
    let h = susy_hamiltonian(&c.adjacency())?;
    let probe = match cfg.probe.kind {
        ProbeKind::UniformEdge => edge_register_state(n, &c.edges)?,
        ProbeKind::WState => {
            let mut sv = StateVector::zero(n)?;
            sv.run(&w_state_circuit(n)?)?;
            sv.amps
        }
        ProbeKind::DickeWeighted => {
            let ring: Vec<[usize; 2]> = g.edges.iter().filter(|e| e.tag == EdgeTag::Ring).map(|e| [e.i, e.j]).collect();
            let adj = c.adjacency();
            let degrees: Vec<usize> = adj.iter().map(|r| r.iter().filter(|&&b| b).count()).collect();
            let lambda = max_h1_persistence(p.diag.as_ref().unwrap());
            let pr = &cfg.probe;
            let w = dicke_weights(n, &ring, &degrees, pr.alpha_bias, pr.beta_bias, pr.eta, lambda)?;
            dicke_superposition(n, &w)?
        }
    };
    out.csv("probe_amplitudes.csv", &amplitudes_csv(&probe))?;
    let series: CorrelatorSeries = match s.mode {
        Mode::Exact => {
            let pops = diagonal_populations(&probe);
            correlator_exact(&h.dense()?, Ensemble::Diagonal(&pops), s.corr_samples, s.corr_dt, s.alpha)?
        }
        Mode::Hadamard => {
            let need = (h.norm_bound() * s.corr_dt / (s.alpha * std::f64::consts::PI)).floor() as usize + 1;
            let evolution = EvolutionConfig { alpha: s.alpha, steps: s.trotter.steps.max(need), ..s.trotter };
            let hcfg = HadamardConfig { evolution, shots: s.shots };
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(cfg.seed);
            let mut runs = Vec::new();
            for _ in 0..s.dephase_samples.max(1) {
                let psi = apply_register_phases(&probe, &random_phases(n, &mut rng));
                runs.push(correlator_hadamard(&h, &psi, s.corr_samples, s.corr_dt, &hcfg, &mut rng)?.values);
            }
            CorrelatorSeries { dt: s.corr_dt, values: dephase_average(&runs)?, shots: s.shots, alpha: s.alpha }
        }
    };
    out.csv("correlator.csv", &series.to_csv())?;
    out.csv("spectrum.csv", &periodogram(&series)?.to_csv())?;
    let mut ecfg = s.estimate.clone();
    ecfg.seed = cfg.seed;
    if cfg.probe.kind == ProbeKind::UniformEdge {
        ecfg.count_dim = Some(c.edges.len());
    }
    let est = estimate(&series, None, &ecfg)?;
    let classical = spectrum(&complex_laplacian(c, 1), DEFAULT_TAU0_REL)?;
    out.json(
        "estimate.json",
        json!({
            "mode": s.mode.as_str(),
            "probe": to_value(&cfg.probe.kind),
            "estimate": to_value(&est),
            "beta1": classical.beta,
            "delta1": classical.first_nonzero(),
        }),
    )?;
    Ok(Outcome::Pass)
}

fn run(cmd: &Cmd, cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Out::new(cfg)?;
    let (name, outcome) = match cmd {
        Cmd::ValidateFivepoint => ("validate-fivepoint", cmd_validate_fivepoint(cfg, &mut out)?),
        Cmd::Sweep => ("sweep", cmd_sweep(cfg, &mut out)?),
        Cmd::BoundCheck => ("bound-check", cmd_bound_check(cfg, &mut out)?),
        Cmd::CompileReport => ("compile-report", cmd_compile_report(cfg, &mut out)?),
        Cmd::Lorenz => ("lorenz", cmd_lorenz(cfg, &mut out)?),
        Cmd::Embed => ("embed", cmd_embed(cfg, &mut out)?),
        Cmd::Ph => ("ph", cmd_ph(cfg, &mut out)?),
        Cmd::Select => ("select", cmd_select(cfg, &mut out)?),
        Cmd::Graph => ("graph", cmd_graph(cfg, &mut out)?),
        Cmd::Susy => ("susy", cmd_susy(cfg, &mut out)?),
        Cmd::Qpe => ("qpe", cmd_qpe(cfg, &mut out)?),
    };
    out.manifest(name, cfg, &outcome)?;
    Ok(outcome)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = match load_config(&cli.global) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cli.cmd, &cfg) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
