//! Pass/fail gates over a run and the plain-text summary.

use std::fmt::Write;

use alexandrov_core::estimates::{CheckKind, LemmaReport, IDENTITY_TOL, INEQUALITY_TOL};
use alexandrov_core::hypersurface::CurvatureOperator;
use alexandrov_core::stability::{SweepFamily, SweepRow};
use alexandrov_core::ModelKind;

use crate::config::{ExperimentConfig, FamilySpec, SCHEMA};
use crate::run::Case;

/// Check counts below this do not exercise the lemma suite.
const SUITE_MIN_CHECKS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    /// Acceptance criterion the gate reproduces, if any.
    pub criterion: Option<usize>,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Gate {
    fn new(criterion: Option<usize>, name: impl Into<String>, pass: bool, detail: String) -> Self {
        Self {
            criterion,
            name: name.into(),
            pass,
            detail,
        }
    }

    pub fn line(&self) -> String {
        let label = match self.criterion {
            Some(n) => format!("criterion {n} {}", self.name),
            None => self.name.clone(),
        };
        format!("{label}: {} {}", if self.pass { "PASS" } else { "FAIL" }, self.detail)
    }
}

fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(0.0, f64::max);
    hi / lo
}

fn fmt_list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

pub fn run_gates(config: &ExperimentConfig, cases: &[Case], refined: Option<&[Case]>, lemmas: Option<&LemmaReport>) -> Vec<Gate> {
    let scale = config.tol_scale;
    let family = config.family.name();
    let rows: Vec<SweepRow> = cases.iter().map(|c| c.row(&family)).collect();
    let mut gates = Vec::new();

    let mut problems: Vec<String> = Vec::new();
    for case in cases {
        match &case.outcome {
            Err(e) => problems.push(format!("{} eps={}: {e}", case.model.kind, case.eps)),
            Ok(r) if !r.valid => problems.push(format!(
                "{} eps={}: {}",
                case.model.kind,
                case.eps,
                r.failing_stage.as_deref().unwrap_or("invalid report")
            )),
            Ok(_) => {}
        }
    }
    gates.push(Gate::new(
        None,
        "pipeline",
        problems.is_empty(),
        if problems.is_empty() {
            format!("{} surfaces processed", cases.len())
        } else {
            format!("failing stages: {}", problems.join("; "))
        },
    ));

    let reports: Vec<_> = cases.iter().filter_map(|c| c.outcome.as_ref().ok()).collect();
    match &config.family {
        FamilySpec::Sphere { .. } => {
            let osc = reports.iter().map(|r| r.osc).fold(0.0, f64::max);
            let planes = reports.iter().map(|r| r.max_center_plane_distance).fold(0.0, f64::max);
            let gap = reports.iter().map(|r| r.gap()).fold(0.0, f64::max);
            let com = reports.iter().map(|r| r.center_of_mass_distance).fold(0.0, f64::max);
            gates.push(Gate::new(
                Some(2),
                "sphere degeneracy",
                !reports.is_empty() && osc <= 1e-8 * scale && planes <= 1e-6 * scale && gap <= 1e-7 * scale,
                format!("osc {osc:.3e}, plane-center distance {planes:.3e}, R - r {gap:.3e}"),
            ));
            gates.push(Gate::new(
                Some(8),
                "center consistency",
                !reports.is_empty() && com <= 1e-6 * scale,
                format!("d(center of mass, O) {com:.3e}"),
            ));
        }
        FamilySpec::Sweep { family } => {
            let criterion = match (family, &config.operator) {
                (_, CurvatureOperator::SymmetricRoot(r)) if *r > 1 => 6,
                (SweepFamily::Spheroid, _) => 3,
                _ => 4,
            };
            for model in &config.models {
                let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.model == model.to_string()).collect();
                // eps = 0 rows are round: their ratios are undefined and they
                // take no part in the rate gates.
                let swept: Vec<&SweepRow> = mine.iter().copied().filter(|r| r.eps > 0.0).collect();
                let ratios: Vec<f64> = swept.iter().filter_map(|r| r.ratio).collect();
                let s = spread(&ratios);
                let banded = matches!(family, SweepFamily::Spheroid) && *model == ModelKind::Euclidean;
                let in_band = !banded || ratios.iter().all(|r| (0.3..=0.8).contains(r));
                gates.push(Gate::new(
                    Some(criterion),
                    format!("linear rate [{model}]"),
                    !ratios.is_empty() && ratios.len() == swept.len() && s < 2.0 && in_band,
                    format!(
                        "ratios {}, max/min {s:.3}{}",
                        fmt_list(&ratios),
                        if banded { ", band [0.3, 0.8]" } else { "" }
                    ),
                ));
                if swept.len() >= 2 {
                    let scaled: Vec<f64> = swept.iter().filter_map(|r| r.psi_grad_scaled).collect();
                    let s = spread(&scaled);
                    let psi_ok = mine.iter().all(|r| r.psi_sup <= r.gap + 1e-8 * scale);
                    gates.push(Gate::new(
                        Some(5),
                        format!("square-root rate [{model}]"),
                        scaled.len() == swept.len() && s < 3.0 && psi_ok,
                        format!(
                            "Psi_grad_sup/sqrt(osc) {}, max/min {s:.3}; Psi_sup <= R - r: {psi_ok}",
                            fmt_list(&scaled)
                        ),
                    ));
                }
            }
            let (round, swept): (Vec<&SweepRow>, Vec<&SweepRow>) = rows.iter().partition(|r| r.ratio.is_none() && r.valid);
            let worst = swept.iter().map(|r| r.com_distance / r.osc).fold(0.0, f64::max);
            let linear = swept.iter().all(|r| r.com_distance <= 5.0 * r.osc);
            let round_com = round.iter().map(|r| r.com_distance).fold(0.0, f64::max);
            gates.push(Gate::new(
                Some(8),
                "center consistency",
                linear && round_com <= 1e-6 * scale,
                format!(
                    "max d(center of mass, O)/osc {worst:.3e} (limit 5){}",
                    if round.is_empty() {
                        String::new()
                    } else {
                        format!("; round rows {round_com:.3e} (limit 1e-6)")
                    }
                ),
            ));
        }
    }

    if let Some(fine) = refined {
        if config.family.is_sphere() {
            gates.push(Gate::new(
                Some(9),
                "grid convergence",
                true,
                "not applicable: every compared quantity vanishes on a sphere".into(),
            ));
        } else {
            let worst = rows
                .iter()
                .zip(fine.iter().map(|c| c.row(&family)))
                .map(|(a, b)| a.relative_change(&b))
                .fold(0.0, f64::max);
            gates.push(Gate::new(
                Some(9),
                "grid convergence",
                worst < 0.05,
                format!(
                    "levels {} -> {}: max relative change of osc, R - r, ratio {worst:.3e}",
                    config.grid_levels[0], config.grid_levels[1]
                ),
            ));
        }
    }

    if let Some(report) = lemmas {
        gates.push(lemma_gate(config, report, false));
    }
    gates
}

/// Identities, constant-free inequalities and fitted-constant stability;
/// `suite` also requires the full check count.
pub fn lemma_gate(config: &ExperimentConfig, report: &LemmaReport, suite: bool) -> Gate {
    let scale = config.tol_scale;
    let identity = report.min_margin(CheckKind::Identity).unwrap_or(0.0);
    let free = report.min_margin(CheckKind::ConstantFree).unwrap_or(0.0);
    let stable = report.constants.iter().all(|c| c.stable);
    let count = report.checks.len();
    let failing: Vec<String> = report
        .summary(config.seed)
        .tags
        .iter()
        .filter(|t| t.min_margin < -t.kind.tolerance() * scale)
        .map(|t| format!("{} (min margin {:.3e})", t.tag.name(), t.min_margin))
        .collect();
    let pass = identity >= -IDENTITY_TOL * scale
        && free >= -INEQUALITY_TOL * scale
        && stable
        && (!suite || count >= SUITE_MIN_CHECKS);
    Gate::new(
        Some(7),
        "lemma checks",
        pass,
        format!(
            "{count} checks, identity min margin {identity:.3e}, constant-free min margin {free:.3e}, \
             fitted constants stable: {stable}{}",
            if failing.is_empty() {
                String::new()
            } else {
                format!("; failing: {}", failing.join(", "))
            }
        ),
    )
}

fn verdict(gates: &[Gate]) -> &'static str {
    if gates.iter().all(|g| g.pass) {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn render(command: &str, config: &ExperimentConfig, cases: &[Case], gates: &[Gate]) -> String {
    let mut s = String::new();
    let models: Vec<String> = config.models.iter().map(|m| m.to_string()).collect();
    let _ = writeln!(s, "{SCHEMA} {command}");
    let _ = writeln!(s, "seed: {}", config.seed);
    let _ = writeln!(s, "models: {}", models.join(", "));
    let _ = writeln!(
        s,
        "family: {}  operator: {}  grid levels: {:?}  tol scale: {}",
        config.family.name(),
        config.operator,
        config.grid_levels,
        config.tol_scale
    );
    let failed = cases.iter().filter(|c| c.outcome.is_err()).count();
    let _ = writeln!(s, "surfaces: {} ({failed} failed)", cases.len());
    let _ = writeln!(s);
    for case in cases {
        if let Ok(r) = &case.outcome {
            let _ = writeln!(
                s,
                "{} eps={}: osc {:.6e}, R - r {:.6e}, ratio {}, Psi_sup {:.6e}, Psi_grad_sup {:.6e}",
                case.model.kind,
                case.eps,
                r.osc,
                r.gap(),
                r.ratio.map_or("undefined".to_string(), |v| format!("{v:.6}")),
                r.psi_sup,
                r.psi_grad_sup
            );
        }
    }
    let _ = writeln!(s);
    for g in gates {
        let _ = writeln!(s, "{}", g.line());
    }
    let _ = writeln!(s, "overall: {}", verdict(gates));
    s
}

pub fn render_lemmas(config: &ExperimentConfig, report: &LemmaReport, gates: &[Gate]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{SCHEMA} check-lemmas");
    let _ = writeln!(s, "seed: {}", config.seed);
    let _ = writeln!(s, "lemma grid level: {}  tol scale: {}", config.lemma_grid_level, config.tol_scale);
    let _ = writeln!(s);
    for t in report.summary(config.seed).tags {
        let _ = writeln!(
            s,
            "{:<32} {:>7} checks {:>5} failing  min margin {:.3e}",
            t.tag.name(),
            t.count,
            t.failures,
            t.min_margin
        );
    }
    for c in &report.constants {
        let _ = writeln!(
            s,
            "constant {:<28} {:.6} (halves {:.6} / {:.6}, change {:.2}%)",
            c.name,
            c.value,
            c.first_half,
            c.second_half,
            100.0 * c.relative_change
        );
    }
    let _ = writeln!(s);
    for g in gates {
        let _ = writeln!(s, "{}", g.line());
    }
    let _ = writeln!(s, "overall: {}", verdict(gates));
    s
}
