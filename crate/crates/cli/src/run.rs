//! Pipeline runs and their output files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use alexandrov_core::estimates::{run_lemma_checks, run_lemma_suite, LemmaReport, LemmaSuiteConfig};
use alexandrov_core::hypersurface::RadialSurface;
use alexandrov_core::stability::{stability_report, write_sweep_csv, StabilityConfig, StabilityReport, SweepRow};
use alexandrov_core::SpaceForm;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, SCHEMA};
use crate::error::{CliError, Result};
use crate::summary::{self, Gate};

/// One surface of the experiment at one grid level.
pub struct Case {
    pub model: SpaceForm,
    pub eps: f64,
    pub outcome: std::result::Result<StabilityReport, String>,
}

impl Case {
    pub fn row(&self, family: &str) -> SweepRow {
        match &self.outcome {
            Ok(report) => SweepRow::from_report(report, family, self.eps),
            Err(_) => SweepRow::failed(&self.model.kind.to_string(), family, self.eps),
        }
    }
}

pub struct RunOutcome {
    pub gates: Vec<Gate>,
    pub summary: String,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.pass)
    }
}

struct Writer {
    dir: PathBuf,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Output {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    fn write(&self, name: &str, fill: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let io = |source| CliError::Output { path: path.clone(), source };
        let mut out = BufWriter::new(File::create(&path).map_err(io)?);
        fill(&mut out).and_then(|_| out.flush()).map_err(io)
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        self.write(name, |out| {
            serde_json::to_writer_pretty(&mut *out, value)?;
            out.write_all(b"\n")
        })
    }
}

fn to_io(e: alexandrov_core::Error) -> std::io::Error {
    std::io::Error::other(e.to_string())
}

#[derive(Serialize)]
struct Tagged<'a, T: Serialize> {
    schema: &'a str,
    seed: u64,
    #[serde(flatten)]
    body: T,
}

fn header(config: &ExperimentConfig) -> String {
    format!(
        "# {SCHEMA} seed={} family={} operator={} grid_level={}",
        config.seed, config.family.name(), config.operator, config.grid_levels[0]
    )
}

fn stability_config(config: &ExperimentConfig, level: usize) -> StabilityConfig {
    StabilityConfig {
        grid_level: level,
        radial_nodes: config.radial_nodes,
        plane_directions: config.directions,
        measure_defects: config.measure_defects,
        tolerances: config.scaled_tolerances(),
    }
}

pub fn run_cases(config: &ExperimentConfig, level: usize) -> Vec<Case> {
    let settings = stability_config(config, level);
    config
        .cases()
        .into_par_iter()
        .map(|(model, eps)| {
            let outcome = RadialSurface::centered(model, config.family.surface_family(config.dim, eps))
                .and_then(|s| stability_report(&s, &config.operator, &settings))
                .map_err(|e| e.to_string());
            Case { model, eps, outcome }
        })
        .collect()
}

fn report_name(config: &ExperimentConfig, case: &Case) -> String {
    if config.family.is_sphere() {
        format!("stability_report_{}.json", case.model.kind)
    } else {
        format!("stability_report_{}_eps{}.json", case.model.kind, case.eps)
    }
}

fn lemma_config(config: &ExperimentConfig) -> LemmaSuiteConfig {
    LemmaSuiteConfig {
        seed: config.seed,
        dim: config.dim,
        grid_level: config.lemma_grid_level,
        tolerances: config.scaled_tolerances(),
        ..Default::default()
    }
}

fn write_checks(out: &Writer, config: &ExperimentConfig, report: &LemmaReport) -> Result<()> {
    out.write("checks.csv", |w| {
        writeln!(w, "{}", header(config))?;
        report.write_csv(&mut *w).map_err(to_io)
    })?;
    out.json(
        "checks_summary.json",
        &Tagged {
            schema: SCHEMA,
            seed: config.seed,
            body: report.summary(config.seed),
        },
    )
}

/// Full pipeline for every configured surface: stability reports, the sweep
/// table, plot data, lemma checks and the gate summary.
pub fn run_experiment(config: &ExperimentConfig, dir: &Path, command: &str) -> Result<RunOutcome> {
    let out = Writer::new(dir)?;
    out.json(
        "resolved_config.json",
        &Tagged {
            schema: SCHEMA,
            seed: config.seed,
            body: config,
        },
    )?;
    let family = config.family.name();
    let cases = run_cases(config, config.grid_levels[0]);
    for case in &cases {
        if let Ok(report) = &case.outcome {
            #[derive(Serialize)]
            struct Body<'a> {
                eps: f64,
                report: &'a StabilityReport,
            }
            out.json(
                &report_name(config, case),
                &Tagged {
                    schema: SCHEMA,
                    seed: config.seed,
                    body: Body { eps: case.eps, report },
                },
            )?;
        }
    }
    let rows: Vec<SweepRow> = cases.iter().map(|c| c.row(&family)).collect();
    out.write("sweep.csv", |w| {
        writeln!(w, "{}", header(config))?;
        write_sweep_csv(&mut *w, &rows).map_err(to_io)
    })?;
    for model in &config.models {
        let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.model == model.to_string() && r.osc.is_finite()).collect();
        for (name, columns, pick) in [
            ("osc_vs_gap", "osc R_minus_r", 0),
            ("osc_vs_psi_grad_sq", "osc psi_grad_sup^2", 1),
        ] {
            out.write(&format!("{name}_{model}.dat"), |w| {
                writeln!(w, "{} model={model}", header(config))?;
                writeln!(w, "# {columns}")?;
                for row in &mine {
                    let points = row.plot_points();
                    let [x, y] = if pick == 0 { points.0 } else { points.1 };
                    writeln!(w, "{x:.11e} {y:.11e}")?;
                }
                Ok(())
            })?;
        }
    }

    let refined = config.grid_levels.get(1).map(|&level| run_cases(config, level));
    if let Some(fine) = &refined {
        let fine_rows: Vec<SweepRow> = fine.iter().map(|c| c.row(&family)).collect();
        out.write("convergence.csv", |w| {
            writeln!(w, "{}", header(config))?;
            writeln!(w, "model,eps,level,refined_level,max_relative_change")?;
            for (a, b) in rows.iter().zip(&fine_rows) {
                writeln!(
                    w,
                    "{},{:.11e},{},{},{:.11e}",
                    a.model,
                    a.eps,
                    config.grid_levels[0],
                    config.grid_levels[1],
                    a.relative_change(b)
                )?;
            }
            Ok(())
        })?;
    }

    let lemmas = if config.lemmas {
        let surfaces = config
            .cases()
            .into_iter()
            .map(|(model, eps)| RadialSurface::centered(model, config.family.surface_family(config.dim, eps)))
            .collect::<alexandrov_core::Result<Vec<_>>>()
            .map_err(CliError::pipeline("surface construction"))?;
        let report = run_lemma_checks(&surfaces, &lemma_config(config)).map_err(CliError::pipeline("lemma checks"))?;
        write_checks(&out, config, &report)?;
        Some(report)
    } else {
        None
    };

    let gates = summary::run_gates(config, &cases, refined.as_deref(), lemmas.as_ref());
    let text = summary::render(command, config, &cases, &gates);
    out.write("summary.txt", |w| w.write_all(text.as_bytes()))?;
    Ok(RunOutcome { gates, summary: text })
}

/// The lemma suite on its fixed surfaces, with the configured seed and
/// resolution.
pub fn check_lemmas(config: &ExperimentConfig, dir: &Path) -> Result<RunOutcome> {
    let out = Writer::new(dir)?;
    let report = run_lemma_suite(&lemma_config(config)).map_err(CliError::pipeline("lemma suite"))?;
    write_checks(&out, config, &report)?;
    let gates = vec![summary::lemma_gate(config, &report, true)];
    let text = summary::render_lemmas(config, &report, &gates);
    out.write("summary.txt", |w| w.write_all(text.as_bytes()))?;
    Ok(RunOutcome { gates, summary: text })
}
