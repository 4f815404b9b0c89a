use crate::config::{parse_profile, CommonArgs, Resolved};
use crate::manifest::{Manifest, Stats};
use anyhow::{bail, Context, Result};
use congest_core::grid::{Grid, GridState};
use congest_core::output::{write_frame, FrameFormat};
use congest_core::scenario::{
    convergence_against, convergence_reference, exact_riemann_averages, riemann_fan, riemann_l1_errors,
    run_scenario_with, Scenario, ScenarioError, ScenarioResult,
};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::thread;

/// Writes frames on a separate thread while the solver keeps stepping.
struct FrameSink {
    tx: Option<mpsc::Sender<(usize, GridState)>>,
    worker: Option<thread::JoinHandle<Result<Vec<String>>>>,
}

impl FrameSink {
    fn new(grid: Grid, dir: PathBuf, format: FrameFormat) -> Self {
        let (tx, rx) = mpsc::channel::<(usize, GridState)>();
        let worker = thread::spawn(move || {
            let mut files = Vec::new();
            for (k, state) in rx {
                let name = format!("frame_{k:04}.{}", format.extension());
                write_frame(&state, &grid, &dir.join(&name), format)?;
                files.push(name);
            }
            Ok(files)
        });
        Self {
            tx: Some(tx),
            worker: Some(worker),
        }
    }

    fn send(&self, k: usize, state: GridState) {
        if let Some(tx) = &self.tx {
            // A closed channel means the writer already failed; finish() reports it.
            let _ = tx.send((k, state));
        }
    }

    fn finish(mut self) -> Result<Vec<String>> {
        drop(self.tx.take());
        match self.worker.take().expect("joined once").join() {
            Ok(r) => r,
            Err(_) => bail!("frame writer panicked"),
        }
    }
}

/// Runs a scenario, streaming frames and writing the manifest whatever
/// the outcome.
fn simulate(command: &str, r: &Resolved, extra: impl FnOnce(&ScenarioResult, &mut Manifest) -> Result<()>) -> Result<()> {
    let s = &r.scenario;
    fs::create_dir_all(&r.out_dir).with_context(|| format!("creating {}", r.out_dir.display()))?;
    let grid = s.grid()?;
    let mut manifest = Manifest::new(
        command,
        s,
        s.time_step(&grid),
        &r.out_dir,
        r.format.extension(),
        r.config_path.clone(),
    );
    let sink = FrameSink::new(grid, r.out_dir.clone(), r.format);
    let interval = s.frame_interval;
    let mut next = 0.0;
    let mut count = 0;
    let tol = 1e-9 * s.t_end;
    let outcome = run_scenario_with(
        &Scenario {
            frame_interval: None,
            ..s.clone()
        },
        |_, st| {
            let due = count == 0 || st.time >= s.t_end - tol || interval.is_some_and(|_| st.time >= next - tol);
            if due {
                sink.send(count, st.clone());
                count += 1;
                while next <= st.time + tol {
                    next += interval.unwrap_or(f64::INFINITY);
                }
            }
        },
    );
    let frames = sink.finish();
    match outcome {
        Ok(res) => {
            manifest.output.files = frames?;
            manifest.stats = Some(Stats::from_result(&res));
            extra(&res, &mut manifest)?;
            write_history(&r.out_dir, &res)?;
            manifest.output.files.push("history.csv".into());
            manifest.run.status = "ok".into();
            let path = manifest.write(&r.out_dir)?;
            println!(
                "{}: {} steps to t = {}, max Z = {:.6}, mass {:.9} -> {:.9}",
                command,
                res.steps,
                res.final_state.time,
                res.max_z,
                res.mass_history[0].1,
                res.mass_history.last().unwrap().1
            );
            println!("wrote {}", path.display());
            Ok(())
        }
        Err(e) => {
            manifest.output.files = frames.unwrap_or_default();
            record_failure(&mut manifest, &e);
            manifest.write(&r.out_dir)?;
            Err(e.into())
        }
    }
}

fn record_failure(m: &mut Manifest, e: &ScenarioError) {
    m.run.status = "failed".into();
    m.run.error = Some(e.to_string());
    if let ScenarioError::Step { step, time, .. } = e {
        m.run.failed_step = Some(*step);
        m.run.failed_time = Some(*time);
    }
}

fn write_history(dir: &Path, res: &ScenarioResult) -> Result<()> {
    let path = dir.join("history.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["t", "mass", "cfl"])?;
    for (k, (t, m)) in res.mass_history.iter().enumerate() {
        let cfl = if k == 0 { 0.0 } else { res.cfl_history[k - 1] };
        w.write_record([format!("{t:.16e}"), format!("{m:.16e}"), format!("{cfl:.6e}")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn riemann(args: &CommonArgs) -> Result<()> {
    let r = args.resolve(Scenario::riemann1d(), &args.file()?, "out/riemann")?;
    simulate("riemann", &r, |res, m| {
        let e = riemann_l1_errors(&r.scenario, &res.grid, &res.final_state)?;
        println!("L1 errors: rho {:.4e}  q {:.4e}  Z {:.4e}  rho_star {:.4e}", e[0], e[1], e[2], e[3]);
        m.errors = Some(e.into());
        Ok(())
    })
}

pub fn exact_riemann(args: &CommonArgs) -> Result<()> {
    let r = args.resolve(Scenario::riemann1d(), &args.file()?, "out/exact-riemann")?;
    let s = &r.scenario;
    fs::create_dir_all(&r.out_dir).with_context(|| format!("creating {}", r.out_dir.display()))?;
    let grid = s.grid()?;
    let fan = riemann_fan(s)?;
    let [rho, q1, z, rho_star] = exact_riemann_averages(&fan, &grid, s.t_end);
    let state = GridState {
        q2: vec![0.0; rho.len()],
        rho,
        q1,
        z,
        rho_star,
        time: s.t_end,
    };
    let name = format!("exact.{}", r.format.extension());
    write_frame(&state, &grid, &r.out_dir.join(&name), r.format)?;
    let mut m = Manifest::new("exact-riemann", s, 0.0, &r.out_dir, r.format.extension(), r.config_path.clone());
    m.output.files.push(name);
    m.run.status = "ok".into();
    let path = m.write(&r.out_dir)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{:?} | contact {:.6} | {:?}", fan.wave1, fan.contact_speed(), fan.wave3)?;
    writeln!(out, "intermediate v = {:.9}, Z_L = {:.9}", fan.v_m(), fan.z_m())?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(())
}

pub fn collide2d(args: &CommonArgs, case: Option<u8>) -> Result<()> {
    let file = args.file()?;
    let case = case.or(file.scenario.case).unwrap_or(1);
    let r = args.resolve(Scenario::collide2d(case), &file, "out/collide2d")?;
    simulate("collide2d", &r, |_, _| Ok(()))
}

pub fn evacuate(args: &CommonArgs, profile: Option<&str>) -> Result<()> {
    let file = args.file()?;
    let profile = parse_profile(profile.or(file.scenario.profile.as_deref()).unwrap_or("step"))?;
    let r = args.resolve(Scenario::evacuate2d(profile), &file, "out/evacuate")?;
    simulate("evacuate", &r, |res, _| {
        println!("mass remaining at t = {}: {:.6}", res.final_state.time, res.mass_history.last().unwrap().1);
        Ok(())
    })
}

pub fn convergence(args: &CommonArgs, nxs: Option<Vec<usize>>, reference_nx: Option<usize>) -> Result<()> {
    let file = args.file()?;
    let mut r = args.resolve(Scenario::smooth1d(), &file, "out/convergence")?;
    let nxs = nxs
        .or(file.convergence.nxs.clone())
        .unwrap_or_else(|| vec![250, 500, 1000]);
    let reference_nx = reference_nx.or(file.convergence.reference_nx).unwrap_or(10_000);
    // First-order runs use a fixed small step so the time error stays below
    // the space error.
    if r.scenario.time_order == 1 && args.dt_factor.is_none() && file.scheme.dt.is_none() && file.scheme.dt_factor.is_none() {
        r.scenario.dt = Some(5e-6);
    }
    fs::create_dir_all(&r.out_dir).with_context(|| format!("creating {}", r.out_dir.display()))?;
    let grid = r.scenario.grid()?;
    let mut m = Manifest::new(
        "convergence",
        &r.scenario,
        r.scenario.time_step(&grid),
        &r.out_dir,
        "csv",
        r.config_path.clone(),
    );
    let report = convergence_reference(&r.scenario, reference_nx)
        .and_then(|reference| convergence_against(&r.scenario, &nxs, &reference));
    let report = match report {
        Ok(rep) => rep,
        Err(e) => {
            record_failure(&mut m, &e);
            m.write(&r.out_dir)?;
            return Err(e.into());
        }
    };
    let path = r.out_dir.join("convergence.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["dx", "rho", "q", "Z", "rho_star"])?;
    for (dx, e) in report.dx.iter().zip(&report.errors) {
        let mut row = vec![format!("{dx:.6e}")];
        row.extend(e.iter().map(|v| format!("{v:.6e}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    m.output.files.push("convergence.csv".into());
    m.run.status = "ok".into();
    m.errors = report.errors.last().map(|e| (*e).into());
    let mpath = m.write(&r.out_dir)?;
    for (dx, e) in report.dx.iter().zip(&report.errors) {
        println!("dx {dx:.3e}: rho {:.4e}  q {:.4e}  Z {:.4e}  rho_star {:.4e}", e[0], e[1], e[2], e[3]);
    }
    let sl = report.slopes;
    println!("slopes: rho {:.3}  q {:.3}  Z {:.3}  rho_star {:.3}", sl[0], sl[1], sl[2], sl[3]);
    println!("wrote {}", mpath.display());
    Ok(())
}
