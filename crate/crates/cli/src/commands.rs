use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use log::{info, warn};
use serde::de::DeserializeOwned;
use serde_json::json;

use gmsnet::coarse::CoarseSpace;
use gmsnet::generate::{
    self, default_label_tol, label_boundaries_per_axis, Family, GeneratorConfig, PropertyConfig, PropertyMode,
};
use gmsnet::io::{fmt_real, read_vector_csv, write_vector_csv};
use gmsnet::metrics::{
    all_errors, format_table, plot_csv, write_report, CellAverage, ErrorSummary, Errors, StepErrors,
};
use gmsnet::msbasis::{load_basis, save_basis, BasisConfig, BasisHeader};
use gmsnet::netcore::io::{network_dir_hash, read_meta, read_network, write_network};
use gmsnet::netcore::{connected_components, BoundarySpec, Network};
use gmsnet::pipeline::Problem;
use gmsnet::solve::{multiscale_solve, LinearSolverConfig, TimeGrid, Trajectory};
use gmsnet::upscale::UpscaleConfig;

use crate::config::{parse_assignments, parse_box, parse_overrides, FileConfig};
use crate::{
    BasisArgs, BasisOptions, Cli, Command, CompareArgs, GenArgs, InfoArgs, MsArgs, ProblemArgs, SolveFineArgs,
    UpscaleArgs,
};

pub fn run(cli: &Cli, file: &FileConfig) -> Result<()> {
    let ctx = Ctx {
        file,
        timings: cli.timings,
    };
    match &cli.command {
        Command::Gen(a) => ctx.gen(a),
        Command::SolveFine(a) => ctx.solve_fine(a),
        Command::Basis(a) => ctx.basis(a),
        Command::Ms(a) => ctx.ms(a),
        Command::Upscale(a) => ctx.upscale(a),
        Command::Compare(a) => ctx.compare(a),
        Command::Info(a) => info_cmd(a),
    }
}

struct Ctx<'a> {
    file: &'a FileConfig,
    timings: bool,
}

/// Parses a snake_case enum name (hyphens accepted).
fn parse_enum<T: DeserializeOwned>(what: &str, s: &str) -> Result<T> {
    serde_json::from_value(json!(s.replace('-', "_"))).map_err(|_| anyhow!("unknown {what} {s:?}"))
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

/// The solved problem plus the settings echoed in reports.
struct Setup {
    problem: Problem,
    tg: TimeGrid,
    save_every: Option<usize>,
    network_dir: PathBuf,
    seed: Option<u64>,
}

impl Ctx<'_> {
    fn timing_map(&self, entries: &[(&str, f64)]) -> BTreeMap<String, f64> {
        if !self.timings {
            return BTreeMap::new();
        }
        entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn gen(&self, a: &GenArgs) -> Result<()> {
        let f = &self.file.network;
        let p = &self.file.properties;
        let family_name = a.family.clone().or_else(|| f.family.clone()).context("--family is required")?;
        let family = match family_name.as_str() {
            "regular" | "structured_regular" => Family::StructuredRegular,
            "irregular" | "structured_irregular" => Family::StructuredIrregular,
            "unstructured" => Family::Unstructured,
            other => bail!("unknown network family {other:?}"),
        };
        let seed = a.seed.or(self.file.seed).context("--seed is required")?;
        let shape = a.dims.clone().or_else(|| f.dims.clone()).unwrap_or_default();
        let dim = match family {
            Family::Unstructured => a.dim.or(f.dim).unwrap_or(2),
            _ => shape.len(),
        };
        if family != Family::Unstructured && shape.is_empty() {
            bail!("--dims is required for lattice families");
        }
        let box_lengths = a.box_lengths.clone().or_else(|| f.box_lengths.clone()).unwrap_or_else(|| vec![1.0; dim]);
        let gen_cfg = GeneratorConfig {
            family,
            box_lengths,
            shape,
            points: a.points.or(f.points).unwrap_or(0),
            removal_prob: a.removal_prob.or(f.removal_prob).unwrap_or(0.2),
            knn: a.knn.or(f.knn).unwrap_or(6),
            seed,
        };
        let defaults = PropertyConfig::default();
        let mode = match a.properties.as_deref() {
            Some(s) => parse_enum("property mode", s)?,
            None => p.mode.unwrap_or(PropertyMode::PoiseuilleRandom),
        };
        let boxes = if a.contrast_boxes.is_empty() {
            p.boxes.clone().unwrap_or_default()
        } else {
            a.contrast_boxes.iter().map(|b| parse_box(b)).collect::<Result<_>>()?
        };
        let prop_cfg = PropertyConfig {
            mode,
            d_min: a.d_min.or(p.d_min).unwrap_or(defaults.d_min),
            d_max: a.d_max.or(p.d_max).unwrap_or(defaults.d_max),
            throat_rule: match a.throat_rule.as_deref() {
                Some(s) => parse_enum("throat rule", s)?,
                None => p.throat_rule.unwrap_or(defaults.throat_rule),
            },
            viscosity: a.viscosity.or(p.viscosity).unwrap_or(defaults.viscosity),
            boxes,
            d_in: a.d_in.or(p.d_in).unwrap_or(defaults.d_in),
            d_out: a.d_out.or(p.d_out).unwrap_or(defaults.d_out),
            field_path: a.field.clone().or_else(|| p.field.clone()),
            field_mode: match a.field_mode.as_deref() {
                Some(s) => parse_enum("field mode", s)?,
                None => p.field_mode.unwrap_or_default(),
            },
            seed,
        };
        let net = generate::generate(&gen_cfg)?;
        let mut net = generate::assign_properties(net, &prop_cfg)?;
        let tol = match a.label_tol.or(f.label_tol) {
            Some(t) => vec![t; net.dim],
            None => default_label_tol(&gen_cfg, &net),
        };
        let empty = label_boundaries_per_axis(&mut net, &tol)?;
        for label in empty {
            warn!("face label {label:?} is empty");
        }
        write_network(&a.out, &net, family.name(), Some(seed))?;
        println!("{} nodes, {} edges", net.n_nodes(), net.n_edges());
        Ok(())
    }

    fn setup(&self, a: &ProblemArgs) -> Result<Setup> {
        let net = read_network(&a.network)?;
        let meta = read_meta(&a.network)?;
        let mut dirichlet = parse_assignments(&a.dirichlet)?;
        if dirichlet.is_empty() {
            dirichlet = self
                .file
                .boundary
                .dirichlet
                .clone()
                .unwrap_or_else(|| BTreeMap::from([("top".to_string(), 1.0)]));
        }
        let mut bc = BoundarySpec::new();
        for (label, value) in &dirichlet {
            if net.labeled(label).is_empty() {
                bail!("Dirichlet label {label:?} matches no node of {}", a.network.display());
            }
            bc = bc.with(label, *value);
        }
        let n = net.n_nodes();
        let pr = &self.file.problem;
        let source = vec![a.source.or(pr.source).unwrap_or(0.0); n];
        let u0 = match &a.u0_file {
            Some(path) => {
                let u = read_vector_csv(path)?;
                if u.len() != n {
                    bail!("{}: {} values for {n} nodes", path.display(), u.len());
                }
                u
            }
            None => vec![a.u0.or(pr.u0).unwrap_or(0.0); n],
        };
        let t = &self.file.time;
        let steps = a.steps.or(t.steps).unwrap_or(50);
        let tg = match a.tau.or(t.tau) {
            Some(tau) => TimeGrid::new(tau, steps)?,
            None => TimeGrid::from_final_time(a.t_final.or(t.t_final).unwrap_or(1.0), steps)?,
        };
        Ok(Setup {
            problem: Problem::new(net, bc, source, u0)?,
            tg,
            save_every: a.save_every.or(t.save_every),
            network_dir: a.network.clone(),
            seed: meta.seed,
        })
    }

    fn solver(&self, method: Option<&str>, rtol: Option<f64>, max_iter: Option<usize>) -> Result<LinearSolverConfig> {
        let s = &self.file.solver;
        let d = LinearSolverConfig::default();
        Ok(LinearSolverConfig {
            method: match method {
                Some(m) => parse_enum("solver", m)?,
                None => s.method.unwrap_or(d.method),
            },
            rtol: rtol.or(s.rtol).unwrap_or(d.rtol),
            max_iter: max_iter.or(s.max_iter).unwrap_or(d.max_iter),
        })
    }

    fn basis_config(&self, b: &BasisOptions) -> Result<BasisConfig> {
        let f = &self.file.basis;
        let mut cfg = if b.full || f.full.unwrap_or(false) {
            BasisConfig::full()
        } else {
            BasisConfig::uniform(b.m.or(f.m).unwrap_or(4))
        };
        if !cfg.full && cfg.m == 0 {
            bail!("--m must be at least 1");
        }
        if let Some(o) = &f.overrides {
            for (k, v) in o {
                cfg.overrides.insert(k.parse().with_context(|| format!("invalid patch index {k:?}"))?, *v);
            }
        }
        cfg.overrides.extend(parse_overrides(&b.m_patch)?);
        if let Some(d) = b.dense_limit.or(f.dense_limit) {
            cfg.dense_limit = d;
        }
        Ok(cfg)
    }

    fn grid(&self, flag: &Option<Vec<usize>>, net: &Network) -> Vec<usize> {
        flag.clone()
            .or_else(|| self.file.coarse.grid.clone())
            .unwrap_or_else(|| vec![5; net.dim])
    }

    fn solve_fine(&self, a: &SolveFineArgs) -> Result<()> {
        let s = self.setup(&a.problem)?;
        let solver = self.solver(a.solver.as_deref(), a.rtol, a.max_iter)?;
        let t = Instant::now();
        let traj = s.problem.fine(&s.tg, &solver, s.save_every)?;
        let elapsed = secs(t);
        write_vector_csv(&a.out.join("u.csv"), &traj.last)?;
        write_trajectory(&a.out, "u", &traj)?;
        let run = json!({
            "command": "solve-fine",
            "DOF_h": s.problem.reduced.n_free(),
            "nodes": s.problem.net.n_nodes(),
            "tau": s.tg.tau,
            "steps": s.tg.n_steps,
            "T": s.tg.final_time(),
            "solver": solver,
            "seed": s.seed,
            "timings": self.timing_map(&[("solve", elapsed)]),
        });
        write_json(&a.out.join("run.json"), &run)?;
        println!(
            "fine solve: {} free nodes, {} steps, T = {}",
            s.problem.reduced.n_free(),
            s.tg.n_steps,
            fmt_real(s.tg.final_time())
        );
        Ok(())
    }

    fn basis(&self, a: &BasisArgs) -> Result<()> {
        let s = self.setup(&a.problem)?;
        let cfg = self.basis_config(&a.basis)?;
        let grid = self.grid(&a.basis.grid, &s.problem.net);
        let space = CoarseSpace::new(&s.problem.net, &grid)?;
        let basis = s.problem.basis(&space, &cfg)?;
        let labels: Vec<String> = s.problem.bc.dirichlet.iter().map(|(l, _)| l.clone()).collect();
        let header = BasisHeader::new(&space, &basis, labels, network_dir_hash(&s.network_dir)?);
        save_basis(&a.out, &header, &basis.projection)?;
        println!("{:>6} {:>7} {:>8} {:>4} {:>5}", "patch", "nodes", "cluster", "M_i", "rows");
        let mut rows_per_patch = vec![0usize; space.patches.len()];
        for m in &basis.projection.rows {
            rows_per_patch[m.patch] += 1;
        }
        for (p, sub) in basis.subnetworks.iter().enumerate() {
            let (nodes, cluster) = sub
                .as_ref()
                .map_or((0, 0), |s| (s.len(), s.cluster.iter().filter(|&&c| c).count()));
            println!(
                "{:>6} {:>7} {:>8} {:>4} {:>5}",
                p,
                nodes,
                cluster,
                header.eigen_counts[p],
                rows_per_patch[p]
            );
        }
        println!("coarse DOF: {}", header.n_rows);
        Ok(())
    }

    fn ms(&self, a: &MsArgs) -> Result<()> {
        let s = self.setup(&a.problem)?;
        let average = if a.unweighted { CellAverage::Unweighted } else { CellAverage::Capacity };
        let reference = a.reference.as_ref().map(|p| read_vector_csv(p)).transpose()?;
        if let Some(r) = &reference {
            if r.len() != s.problem.net.n_nodes() {
                bail!("reference has {} values for {} nodes", r.len(), s.problem.net.n_nodes());
            }
        }
        if let Some(ms) = &a.sweep {
            return self.ms_sweep(a, &s, ms, reference.as_deref(), average);
        }
        let t = Instant::now();
        let (r, grid, m, offline) = if a.build_basis {
            let cfg = self.basis_config(&a.basis)?;
            let grid = self.grid(&a.basis.grid, &s.problem.net);
            let space = CoarseSpace::new(&s.problem.net, &grid)?;
            let basis = s.problem.basis(&space, &cfg)?;
            (basis.projection.r, grid, (!cfg.full).then_some(cfg.m), secs(t))
        } else {
            let dir = a
                .basis_dir
                .as_ref()
                .context("no basis given: pass --basis-dir or --build-basis")?;
            let (header, projection) = load_basis(dir)?;
            let hash = network_dir_hash(&s.network_dir)?;
            if header.network_hash != hash {
                bail!(
                    "basis in {} was built for a different network (hash {} vs {})",
                    dir.display(),
                    header.network_hash,
                    hash
                );
            }
            let labels: Vec<String> = s.problem.bc.dirichlet.iter().map(|(l, _)| l.clone()).collect();
            if header.dirichlet_labels != labels || header.n_cols != s.problem.reduced.n_free() {
                bail!(
                    "basis was built for Dirichlet labels {:?}, this run uses {:?}",
                    header.dirichlet_labels,
                    labels
                );
            }
            let m = header.eigen_counts.iter().copied().max();
            (projection.r, header.grid, m, secs(t))
        };
        let t = Instant::now();
        let (_, coarse, fine) = multiscale_solve(&r, &s.problem.reduced, &s.problem.u0, &s.tg, s.save_every)?;
        let online = secs(t);
        write_vector_csv(&a.out.join("u_ms.csv"), &fine.last)?;
        write_vector_csv(&a.out.join("u_coarse.csv"), &coarse.last)?;
        write_trajectory(&a.out, "u_ms", &fine)?;
        let timings = self.timing_map(&[("offline", offline), ("online", online)]);
        let run = json!({
            "command": "ms",
            "DOF_h": s.problem.reduced.n_free(),
            "DOF_H": r.n_rows(),
            "M": m,
            "grid": grid,
            "tau": s.tg.tau,
            "steps": s.tg.n_steps,
            "T": s.tg.final_time(),
            "seed": s.seed,
            "timings": timings,
        });
        write_json(&a.out.join("run.json"), &run)?;
        if let Some(reference) = &reference {
            let space = CoarseSpace::new(&s.problem.net, &grid)?;
            let summary = self.summary(
                "multiscale",
                &s,
                &space,
                reference,
                &fine,
                average,
                r.n_rows(),
                m,
                timings,
                a.per_step,
            )?;
            write_report(&a.out.join("report.json"), &summary)?;
            print!("{}", format_table(std::slice::from_ref(&summary)));
        } else {
            println!("multiscale solve: DOF_H = {}", r.n_rows());
        }
        Ok(())
    }

    fn ms_sweep(&self, a: &MsArgs, s: &Setup, ms: &[usize], reference: Option<&[f64]>, average: CellAverage) -> Result<()> {
        let reference = reference.context("--sweep needs --reference")?;
        let grid = self.grid(&a.basis.grid, &s.problem.net);
        let mut summaries = Vec::new();
        let mut sorted = ms.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        for &m in &sorted {
            let cfg = BasisConfig {
                m,
                ..self.basis_config(&a.basis)?
            };
            let run = s.problem.multiscale(&grid, &cfg, &s.tg, s.save_every)?;
            let dir = a.out.join(format!("M{m}"));
            write_vector_csv(&dir.join("u_ms.csv"), &run.fine.last)?;
            let timings = self.timing_map(&[
                ("offline", run.timings["offline"]),
                ("online", run.timings["online"]),
            ]);
            let summary = self.summary(
                "multiscale",
                s,
                &run.space,
                reference,
                &run.fine,
                average,
                run.dof_coarse(),
                Some(m),
                timings,
                a.per_step,
            )?;
            write_report(&dir.join("report.json"), &summary)?;
            summaries.push(summary);
        }
        let table = format_table(&summaries);
        std::fs::create_dir_all(&a.out)?;
        std::fs::write(a.out.join("table.txt"), &table)?;
        std::fs::write(a.out.join("plot.csv"), plot_csv(&summaries))?;
        print!("{table}");
        let e: Vec<f64> = summaries.iter().map(|s| s.errors.e1_h).collect();
        println!("e1_h nonincreasing in M (5% slack): {}", nonincreasing(&e, 0.05));
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn summary(
        &self,
        method: &str,
        s: &Setup,
        space: &CoarseSpace,
        reference: &[f64],
        traj: &Trajectory,
        average: CellAverage,
        dof_coarse: usize,
        m: Option<usize>,
        timings: BTreeMap<String, f64>,
        per_step: bool,
    ) -> Result<ErrorSummary> {
        let p = &s.problem;
        let errors: Errors = all_errors(reference, &traj.last, &p.l, &space.assignment, &p.net, average)?;
        let per_step = if per_step {
            // intermediate states are compared with the final reference only
            // when the reference trajectory is not available; skip them here
            traj.steps
                .iter()
                .zip(&traj.snapshots)
                .filter(|(&step, _)| step == s.tg.n_steps)
                .map(|(&step, u)| {
                    Ok(StepErrors {
                        step,
                        errors: all_errors(reference, u, &p.l, &space.assignment, &p.net, average)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(ErrorSummary {
            method: method.into(),
            errors,
            dof_fine: p.reduced.n_free(),
            dof_coarse,
            m,
            timings,
            seed: s.seed,
            config: json!({
                "grid": space.grid.cells,
                "tau": s.tg.tau,
                "steps": s.tg.n_steps,
                "T": s.tg.final_time(),
                "dirichlet": p.bc.dirichlet,
                "average": average,
            }),
            per_step,
        })
    }

    fn upscale(&self, a: &UpscaleArgs) -> Result<()> {
        let s = self.setup(&a.problem)?;
        let f = &self.file.upscale;
        let mut cfg = UpscaleConfig::default();
        if let Some(d) = a.delta.or(f.delta_fraction) {
            cfg.delta_fraction = d;
        }
        cfg.average = if a.unweighted {
            CellAverage::Unweighted
        } else {
            f.average.unwrap_or(CellAverage::Capacity)
        };
        let grid = self.grid(&a.grid, &s.problem.net);
        let run = s.problem.upscaled(&grid, &cfg, &s.tg, s.save_every)?;
        let relevant: Vec<_> = run
            .model
            .faces
            .iter()
            .filter(|f| run.model.capacity[f.lower] > 0.0 && run.model.capacity[f.upper] > 0.0)
            .collect();
        let unsolvable = relevant.iter().filter(|f| !f.solvable).count();
        if !relevant.is_empty() && 2 * unsolvable > relevant.len() {
            bail!(
                "{unsolvable} of {} faces have no connected flow path; the coarse grid is too coarse for this network",
                relevant.len()
            );
        }
        write_vector_csv(&a.out.join("u_up.csv"), &run.fine.last)?;
        write_vector_csv(&a.out.join("cells.csv"), &run.cells.last)?;
        write_trajectory(&a.out, "u_up", &run.fine)?;
        write_json(&a.out.join("model.json"), &serde_json::to_value(&run.model)?)?;
        write_network(&a.out.join("coarse_network"), &run.model.to_network()?, "upscaled", s.seed)?;
        let timings = self.timing_map(&[("offline", run.timings["offline"]), ("online", run.timings["online"])]);
        if let Some(path) = &a.reference {
            let reference = read_vector_csv(path)?;
            let summary = self.summary(
                "upscaling",
                &s,
                &run.space,
                &reference,
                &run.fine,
                cfg.average,
                run.dof_coarse(),
                None,
                timings,
                false,
            )?;
            write_report(&a.out.join("report.json"), &summary)?;
            println!(
                "upscaled: DOF_H = {}, e1_H = {:.4}%, e1_h = {:.4}%, e2_h = {:.4}%",
                summary.dof_coarse, summary.errors.e1_cap_h, summary.errors.e1_h, summary.errors.e2_h
            );
        } else {
            println!("upscaled: DOF_H = {}", run.dof_coarse());
        }
        Ok(())
    }

    fn compare(&self, a: &CompareArgs) -> Result<()> {
        let net = read_network(&a.network)?;
        let problem = Problem::homogeneous(net, BoundarySpec::new())?;
        let grid = if a.grid.is_empty() { vec![5; problem.net.dim] } else { a.grid.clone() };
        let space = CoarseSpace::new(&problem.net, &grid)?;
        let average = if a.unweighted { CellAverage::Unweighted } else { CellAverage::Capacity };
        let reference = read_vector_csv(&a.reference)?;
        if let Some(ms) = &a.m_values {
            if ms.len() != a.candidates.len() {
                bail!("{} M values for {} candidates", ms.len(), a.candidates.len());
            }
        }
        let mut summaries = Vec::new();
        for (k, path) in a.candidates.iter().enumerate() {
            let u = read_vector_csv(path)?;
            if u.len() != reference.len() {
                bail!("{}: {} values, reference has {}", path.display(), u.len(), reference.len());
            }
            let errors = all_errors(&reference, &u, &problem.l, &space.assignment, &problem.net, average)?;
            summaries.push(ErrorSummary {
                method: path.display().to_string(),
                errors,
                dof_fine: problem.net.n_nodes(),
                dof_coarse: 0,
                m: a.m_values.as_ref().map(|m| m[k]),
                timings: BTreeMap::new(),
                seed: None,
                config: json!({ "grid": grid, "average": average }),
                per_step: Vec::new(),
            });
        }
        write_json(&a.out.join("compare.json"), &serde_json::to_value(&summaries)?)?;
        std::fs::write(a.out.join("plot.csv"), plot_csv(&summaries))?;
        let mut table = format!("{:>12} {:>12} {:>12}  {}\n", "e1_h(%)", "e2_h(%)", "e1_H(%)", "file");
        for s in &summaries {
            table.push_str(&format!(
                "{:>12.6} {:>12.6} {:>12.6}  {}\n",
                s.errors.e1_h, s.errors.e2_h, s.errors.e1_cap_h, s.method
            ));
        }
        std::fs::write(a.out.join("table.txt"), &table)?;
        print!("{table}");
        let e: Vec<f64> = summaries.iter().map(|s| s.errors.e1_h).collect();
        println!("e1_h nonincreasing in listed order (5% slack): {}", nonincreasing(&e, 0.05));
        Ok(())
    }
}

/// Each value at most `(1 + slack)` times its predecessor.
pub fn nonincreasing(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn write_trajectory(out: &Path, stem: &str, traj: &Trajectory) -> Result<()> {
    for (step, u) in traj.steps.iter().zip(&traj.snapshots) {
        write_vector_csv(&out.join("trajectory").join(format!("{stem}_{step:05}.csv")), u)?;
    }
    Ok(())
}

fn info_cmd(a: &InfoArgs) -> Result<()> {
    let net = read_network(&a.network)?;
    let meta = read_meta(&a.network)?;
    let comps = connected_components(&net);
    let range = |v: &mut dyn Iterator<Item = f64>| {
        v.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
    };
    let (c_lo, c_hi) = range(&mut net.nodes.iter().map(|n| n.capacity));
    let (w_lo, w_hi) = range(&mut net.edges.iter().map(|e| e.weight));
    println!("generator:  {}", meta.generator);
    println!("seed:       {}", meta.seed.map_or("-".into(), |s| s.to_string()));
    println!("dimension:  {}", net.dim);
    println!("box:        {:?}", net.box_lengths);
    println!("nodes:      {}", net.n_nodes());
    println!("edges:      {}", net.n_edges());
    println!("components: {}", comps.count());
    println!("capacity:   [{c_lo:e}, {c_hi:e}]");
    println!("weight:     [{w_lo:e}, {w_hi:e}]");
    let mut labels: BTreeMap<&str, usize> = BTreeMap::new();
    for n in &net.nodes {
        for l in &n.labels {
            *labels.entry(l.as_str()).or_default() += 1;
        }
    }
    for (l, c) in labels {
        println!("label {l:<8} {c} nodes");
    }
    if let Some(dir) = &a.basis_dir {
        let (header, _) = load_basis(dir)?;
        let matches = header.network_hash == network_dir_hash(&a.network)?;
        println!("basis grid: {:?}", header.grid);
        println!("basis rows: {} (coarse DOF), columns {}", header.n_rows, header.n_cols);
        println!("basis matches network: {matches}");
    }
    info!("network hash {}", network_dir_hash(&a.network)?);
    Ok(())
}
