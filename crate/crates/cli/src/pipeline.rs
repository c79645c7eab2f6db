//! The staged study: each stage feeds its decisions to the next and the
//! run stops, with the reason recorded, as soon as a precondition fails.

use vecmkit::dataset::{describe, difference_dataset, first_difference, load_csv, log_transform};
use vecmkit::diagnostics::diagnose;
use vecmkit::dynamics::{bootstrap_bands, fevd, irf};
use vecmkit::johansen::johansen_test;
use vecmkit::unitroot::{adf_test, integration_order_at, pp_test, Bandwidth};
use vecmkit::varmodel::{granger_test, select_lag_order};
use vecmkit::vecm::{fit_vecm, normalize_long_run, weak_exogeneity_test, VecmModel};

use crate::config::PipelineConfig;
use crate::report::{self, StageRecord, StageStatus, StudyReport, UnitRootRow};
use crate::CliError;

pub const STAGES: [&str; 12] = [
    "load",
    "describe",
    "unit_roots",
    "lag_selection",
    "johansen",
    "vecm_unrestricted",
    "weak_exogeneity",
    "restricted_chain",
    "granger",
    "diagnostics",
    "irf",
    "fevd",
];

enum Halt {
    Failed(CliError),
    /// Preconditions for later stages do not hold; not an error.
    Stopped { stage: &'static str, reason: String },
}

impl From<CliError> for Halt {
    fn from(e: CliError) -> Self {
        Halt::Failed(e)
    }
}

fn pct(level: f64) -> String {
    format!("{}%", level * 100.0)
}

struct Run<'a> {
    cfg: &'a PipelineConfig,
    report: StudyReport,
}

impl<'a> Run<'a> {
    fn done(&mut self, stage: &str, detail: Option<String>) {
        self.report.stages.push(StageRecord {
            stage: stage.into(),
            status: StageStatus::Completed,
            detail,
        });
    }

    fn decide(&mut self, text: String) {
        self.report.decisions.push(text);
    }

    fn execute(&mut self) -> Result<(), Halt> {
        let cfg = self.cfg;
        let level = cfg.significance;
        cfg.validate()?;

        // load
        let mut d = load_csv(&cfg.data, &cfg.columns).map_err(CliError::at("load"))?;
        for name in &cfg.log {
            let s = d.get(name).map_err(CliError::at("load"))?;
            let logged = log_transform(s).map_err(CliError::at("load"))?.renamed(name.clone());
            d = d.replace(name, logged).map_err(CliError::at("load"))?;
        }
        d.require_multivariate().map_err(CliError::at("load"))?;
        self.done(
            "load",
            Some(format!(
                "{} series, {} observations ({}-{})",
                d.n_series(),
                d.n_obs(),
                d.time_index()[0],
                d.time_index()[d.n_obs() - 1]
            )),
        );

        // describe
        let stats = d
            .series()
            .iter()
            .map(|s| describe(s).map(|st| (s.name().to_string(), st)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(CliError::at("describe"))?;
        self.report.tables.push(report::descriptives(&stats));
        self.done("describe", None);

        // unit roots
        let stage = "unit_roots";
        let mut rows = Vec::new();
        for s in d.series() {
            let ds = first_difference(s).map_err(CliError::at(stage))?;
            rows.push(UnitRootRow {
                variable: s.name().to_string(),
                adf_level: adf_test(s, cfg.det_level, cfg.unitroot_max_lag).map_err(CliError::at(stage))?,
                adf_diff: adf_test(&ds, cfg.det_diff, cfg.unitroot_max_lag).map_err(CliError::at(stage))?,
                pp_level: pp_test(s, cfg.det_level, Bandwidth::Automatic).map_err(CliError::at(stage))?,
                pp_diff: pp_test(&ds, cfg.det_diff, Bandwidth::Automatic).map_err(CliError::at(stage))?,
                order: integration_order_at(s, cfg.det_level, cfg.det_diff, level).ok(),
            });
        }
        self.report.tables.push(report::unit_roots(&rows, level));
        self.done(stage, None);
        let not_i1: Vec<String> = rows
            .iter()
            .filter(|r| r.order != Some(1))
            .map(|r| match r.order {
                Some(o) => format!("{} is I({o})", r.variable),
                None => format!("{} is not I(0) or I(1)", r.variable),
            })
            .collect();
        let adf_dissent: Vec<&str> = rows
            .iter()
            .filter(|r| r.adf_level.rejects_at(level) || !r.adf_diff.rejects_at(level))
            .map(|r| r.variable.as_str())
            .collect();
        if !not_i1.is_empty() {
            return Err(Halt::Stopped {
                stage,
                reason: format!(
                    "Phillips-Perron at {}: {}; cointegration analysis needs every series I(1)",
                    pct(level),
                    not_i1.join(", ")
                ),
            });
        }
        let mut text = format!("unit roots: all series I(1) by Phillips-Perron at {}", pct(level));
        if !adf_dissent.is_empty() {
            text.push_str(&format!("; ADF disagrees for {}", adf_dissent.join(", ")));
        }
        self.decide(text);

        // lag selection
        let stage = "lag_selection";
        let sel = select_lag_order(&d, cfg.max_lag).map_err(CliError::at(stage))?;
        self.report.tables.push(report::lag_selection(
            "table03_lag_selection",
            "VAR lag order selection",
            &sel,
        ));
        let p = sel.recommended;
        self.decide(lag_decision("lag order", &sel));
        self.done(stage, Some(format!("recommended lag {p}")));

        // johansen
        let stage = "johansen";
        let j = johansen_test(&d, p, cfg.johansen_case).map_err(CliError::at(stage))?;
        self.report.tables.push(report::johansen(
            "table04_johansen",
            "Johansen cointegration test",
            &j,
            level,
        ));
        let rank = j.rank_at(level);
        self.done(stage, Some(format!("rank {rank}")));
        check_rank(stage, rank, d.n_series(), &mut self.report.decisions, level, j.eigen_rank_at(level))?;
        check_lag(stage, p)?;

        // unrestricted VECM
        let stage = "vecm_unrestricted";
        let m = fit_vecm(&d, p, rank, cfg.johansen_case).map_err(CliError::at(stage))?;
        self.report.tables.push(report::vecm_own(
            "table05_vecm_unrestricted",
            "Unrestricted VECM: own error-correction terms and short-run coefficients",
            &m,
        ));
        self.report.tables.push(report::vecm_full(
            "appendix_a1_vecm_unrestricted_full",
            "Unrestricted VECM: all coefficients",
            &m,
        ));
        self.decide(ect_decision("unrestricted VECM", &m));
        self.done(stage, None);

        // weak exogeneity
        let stage = "weak_exogeneity";
        let we = d
            .names()
            .iter()
            .map(|v| weak_exogeneity_test(&m, v))
            .collect::<Result<Vec<_>, _>>()
            .map_err(CliError::at(stage))?;
        self.report.tables.push(report::weak_exogeneity(&we, cfg.weak_exog_level));
        let dropped: Vec<String> = we
            .iter()
            .filter(|w| w.p_value >= cfg.weak_exog_level)
            .map(|w| w.variable.clone())
            .collect();
        let keep: Vec<String> = we
            .iter()
            .filter(|w| w.p_value < cfg.weak_exog_level)
            .map(|w| w.variable.clone())
            .collect();
        self.decide(format!(
            "weak exogeneity at {}: {}; kept {}",
            pct(cfg.weak_exog_level),
            if dropped.is_empty() {
                "no variable is weakly exogenous".to_string()
            } else {
                format!("{} weakly exogenous and dropped", dropped.join(", "))
            },
            keep.join(", ")
        ));
        self.done(stage, None);
        if keep.len() < 2 {
            return Err(Halt::Stopped {
                stage,
                reason: format!(
                    "only {} variable(s) are not weakly exogenous; a restricted system needs at least 2",
                    keep.len()
                ),
            });
        }

        // restricted chain
        let stage = "restricted_chain";
        let sub = d.subset(&keep).map_err(CliError::at(stage))?;
        let sel_r = select_lag_order(&sub, cfg.max_lag).map_err(CliError::at(stage))?;
        self.report.tables.push(report::lag_selection(
            "appendix_a4_lag_selection_restricted",
            "VAR lag order selection, restricted system",
            &sel_r,
        ));
        let p_r = sel_r.recommended;
        self.decide(lag_decision("restricted lag order", &sel_r));
        let j_r = johansen_test(&sub, p_r, cfg.johansen_case).map_err(CliError::at(stage))?;
        self.report.tables.push(report::johansen(
            "appendix_a5_johansen_restricted",
            "Johansen cointegration test, restricted system",
            &j_r,
            level,
        ));
        let rank_r = j_r.rank_at(level);
        check_rank(stage, rank_r, sub.n_series(), &mut self.report.decisions, level, j_r.eigen_rank_at(level))?;
        check_lag(stage, p_r)?;
        let m_r = fit_vecm(&sub, p_r, rank_r, cfg.johansen_case).map_err(CliError::at(stage))?;
        self.report.tables.push(report::vecm_own(
            "table06_vecm_restricted",
            "Restricted VECM: own error-correction terms and short-run coefficients",
            &m_r,
        ));
        self.report.tables.push(report::vecm_full(
            "appendix_a3_vecm_restricted_full",
            "Restricted VECM: all coefficients",
            &m_r,
        ));
        self.decide(ect_decision("restricted VECM", &m_r));
        let lr = normalize_long_run(&m_r, &sub.names()).map_err(CliError::at(stage))?;
        self.report.tables.push(report::long_run(&lr));
        self.decide(format!(
            "long run: {}",
            lr.iter().map(|v| v.presentation.clone()).collect::<Vec<_>>().join("; ")
        ));
        self.done(stage, Some(format!("{}: lag {p_r}, rank {rank_r}", keep.join(", "))));

        // granger
        let stage = "granger";
        let (x, y) = cfg.granger.clone().unwrap_or_else(|| (keep[0].clone(), keep[1].clone()));
        let g_lag = cfg.granger_lag.unwrap_or(p_r);
        let (g_data, on) = if cfg.granger_levels {
            (d.clone(), "levels")
        } else {
            (difference_dataset(&d).map_err(CliError::at(stage))?, "first differences")
        };
        let g = vec![
            granger_test(&g_data, &x, &y, g_lag).map_err(CliError::at(stage))?,
            granger_test(&g_data, &y, &x, g_lag).map_err(CliError::at(stage))?,
        ];
        self.report.tables.push(report::granger(&g, level, on));
        self.decide(granger_decision(&g, level));
        self.done(stage, None);

        // diagnostics
        let stage = "diagnostics";
        let du = diagnose(&m.residuals, m.p_levels, cfg.portmanteau_lags, cfg.arch_lags)
            .map_err(CliError::at(stage))?;
        let dr = diagnose(&m_r.residuals, m_r.p_levels, cfg.portmanteau_lags, cfg.arch_lags)
            .map_err(CliError::at(stage))?;
        let lu = format!("unrestricted (r={})", m.r);
        let lr_label = format!("restricted (r={})", m_r.r);
        self.report.tables.push(report::diagnostics(&[(&lu, &du), (&lr_label, &dr)]));
        let verdict = |p: f64| if p < level { "rejects" } else { "accepts" };
        self.decide(format!(
            "diagnostics at {} (restricted): portmanteau {} (p={:.4}), Jarque-Bera {} (p={:.4}), ARCH {} (p={:.4})",
            pct(level),
            verdict(dr.portmanteau_p()),
            dr.portmanteau_p(),
            verdict(dr.jarque_bera_p()),
            dr.jarque_bera_p(),
            verdict(dr.arch_p()),
            dr.arch_p()
        ));
        self.done(stage, None);

        // irf
        let stage = "irf";
        let ordering = cfg.ordering.clone().unwrap_or_else(|| sub.names());
        let ir = if cfg.bootstrap_replications > 0 {
            bootstrap_bands(
                &m_r,
                cfg.horizon,
                &ordering,
                cfg.bootstrap_replications,
                cfg.seed,
                cfg.bootstrap_level,
            )
        } else {
            irf(&m_r, cfg.horizon, &ordering)
        }
        .map_err(CliError::at(stage))?;
        self.report.tables.push(report::irf(&ir));
        self.done(
            stage,
            Some(if cfg.bootstrap_replications > 0 {
                format!("{} bootstrap replications", cfg.bootstrap_replications)
            } else {
                "no bands".into()
            }),
        );

        // fevd
        let stage = "fevd";
        let fv = fevd(&m_r, cfg.horizon, &ordering).map_err(CliError::at(stage))?;
        self.report.tables.push(report::fevd(&fv));
        self.done(stage, Some(format!("ordering {}", ordering.join(", "))));
        Ok(())
    }
}

fn lag_decision(what: &str, sel: &vecmkit::varmodel::LagSelection) -> String {
    let c = sel.chosen;
    let mut s = format!(
        "{what} {} by modal vote (AIC {}, HQ {}, SC {}, FPE {})",
        sel.recommended, c.aic, c.hq, c.sc, c.fpe
    );
    if sel.criteria_disagree() {
        let dissent: Vec<String> = [("AIC", c.aic), ("HQ", c.hq), ("SC", c.sc), ("FPE", c.fpe)]
            .iter()
            .filter(|(_, l)| *l != sel.recommended)
            .map(|(n, l)| format!("{n} at {l}"))
            .collect();
        s.push_str(&format!("; dissenting: {}", dissent.join(", ")));
    }
    s
}

fn check_rank(
    stage: &'static str,
    rank: usize,
    k: usize,
    decisions: &mut Vec<String>,
    level: f64,
    eigen_rank: usize,
) -> Result<(), Halt> {
    decisions.push(format!(
        "{stage}: cointegrating rank {rank} (trace test at {}; max-eigenvalue test gives {eigen_rank})",
        pct(level)
    ));
    if rank == 0 {
        return Err(Halt::Stopped {
            stage,
            reason: "rank 0: no cointegration; VECM skipped".into(),
        });
    }
    if rank == k {
        return Err(Halt::Stopped {
            stage,
            reason: format!("rank {k} = k: system is stationary in levels; VECM skipped"),
        });
    }
    Ok(())
}

fn check_lag(stage: &'static str, p: usize) -> Result<(), Halt> {
    if p < 2 {
        return Err(Halt::Stopped {
            stage,
            reason: format!("recommended level lag {p} leaves no lagged differences; VECM skipped"),
        });
    }
    Ok(())
}

fn ect_decision(what: &str, m: &VecmModel) -> String {
    let parts: Vec<String> = m
        .equations
        .iter()
        .take(m.r)
        .enumerate()
        .map(|(i, eq)| {
            let c = &eq.coefficients[i];
            format!("Δ{} own ECT {:.4}{} (p={:.4})", eq.variable, c.estimate, c.stars, c.p_value)
        })
        .collect();
    format!("{what}: {}", parts.join("; "))
}

fn granger_decision(g: &[vecmkit::varmodel::GrangerResult], level: f64) -> String {
    let causes: Vec<&vecmkit::varmodel::GrangerResult> = g.iter().filter(|r| r.p_value < level).collect();
    let detail: Vec<String> = g
        .iter()
        .map(|r| {
            format!(
                "{} does not cause {} {} (p={:.4})",
                r.cause,
                r.effect,
                if r.p_value < level { "rejected" } else { "accepted" },
                r.p_value
            )
        })
        .collect();
    let summary = match causes.len() {
        0 => "no Granger causality".to_string(),
        1 => format!("unidirectional causality {}→{}", causes[0].cause, causes[0].effect),
        _ => "bidirectional causality".to_string(),
    };
    format!("Granger at {}: {}; {summary}", pct(level), detail.join(", "))
}

/// Runs every stage in order. Failures and early stops are recorded in the
/// report (the `failure` field for errors) rather than returned.
pub fn run_pipeline(cfg: &PipelineConfig) -> StudyReport {
    let mut run = Run {
        cfg,
        report: StudyReport {
            config: cfg.echo(),
            stages: Vec::new(),
            decisions: Vec::new(),
            tables: Vec::new(),
            failure: None,
        },
    };
    let outcome = run.execute();
    let mut report = run.report;
    let halted_at = match outcome {
        Ok(()) => None,
        Err(Halt::Failed(e)) => {
            report.stages.push(StageRecord {
                stage: e.stage.clone(),
                status: StageStatus::Failed,
                detail: Some(e.message.clone()),
            });
            report.failure = Some(e.to_string());
            Some(format!("not run: pipeline failed at {}", e.stage))
        }
        Err(Halt::Stopped { stage, reason }) => {
            report.decisions.push(format!("stopped after {stage}: {reason}"));
            Some(format!("skipped: {reason}"))
        }
    };
    if let Some(reason) = halted_at {
        for s in STAGES {
            if report.stage(s).is_none() {
                report.stages.push(StageRecord {
                    stage: s.into(),
                    status: StageStatus::Skipped,
                    detail: Some(reason.clone()),
                });
            }
        }
    }
    report
}
