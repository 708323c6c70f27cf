//! One function per subcommand, each producing a CSV table and an optional
//! one-line summary.

use std::io::Read;
use std::path::Path;

use lpfilter_core::{
    daf_weights, family_filter, fit_delta_ratio, frequency_grid, leverage, musgrave_weights,
    revision_report, select_bandwidth, smooth, spectral_response, symmetric_weights, Boundary,
    Error as CoreError, FilterWeights, KernelWeights, MusgraveSpec, Series,
};

use crate::config::{Bandwidth, Command, DeltaChoice, FamilyChoice, RunConfig};
use crate::error::CliError;
use crate::io::{read_series_csv, read_series_path, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub table: Table,
    pub summary: Option<String>,
}

pub fn run(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    match cfg.command {
        Command::Weights => weights(cfg),
        Command::Gain => gain(cfg),
        Command::Table1 => table1(cfg),
        Command::Smooth => smooth_cmd(cfg),
        Command::Cv => cv(cfg),
        Command::FitDelta => fit_delta(cfg),
        Command::Report => report(cfg),
    }
}

fn load(path: &Path) -> Result<Series, CliError> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(crate::io::ReadError::from)?;
        Ok(read_series_csv(text.as_bytes())?)
    } else {
        Ok(read_series_path(path)?)
    }
}

fn input(cfg: &RunConfig) -> Result<Series, CliError> {
    let path = cfg
        .input
        .as_deref()
        .ok_or_else(|| CliError::Usage("--input is required".into()))?;
    load(path)
}

fn half_width(cfg: &RunConfig) -> usize {
    match &cfg.bandwidth {
        Bandwidth::Fixed(h) => *h,
        Bandwidth::Range(r) => *r.start(),
    }
}

fn kernel(cfg: &RunConfig) -> Result<KernelWeights, CliError> {
    Ok(cfg.kernel.weights(half_width(cfg))?)
}

/// Resolves the boundary flags against `series` (needed only to fit the ratio).
fn boundary(
    cfg: &RunConfig,
    kernel: &KernelWeights,
    series: Option<&Series>,
) -> Result<(Boundary, Option<String>), CliError> {
    let Some(family) = cfg.family.mmsre_family() else {
        return Ok((Boundary::Direct, None));
    };
    let delta = match (cfg.delta, cfg.musgrave_r) {
        (_, Some(r)) => MusgraveSpec::R(r).delta_ratio()?,
        (Some(DeltaChoice::Value(v)), None) => v,
        (Some(DeltaChoice::Fit), None) => {
            let series = match series {
                Some(s) => s,
                None => return Err(CliError::Usage("--delta fit requires --input".into())),
            };
            let fit = fit_delta_ratio(series, kernel, cfg.degree, family, &cfg.delta_grid)?;
            let note = format!(
                "fitted delta_ratio={} msre={}",
                cfg.format.format(fit.delta_ratio),
                cfg.format.format(fit.msre)
            );
            return Ok((Boundary::mmsre(family, fit.delta_ratio), Some(note)));
        }
        (None, None) => return Err(CliError::Usage("missing --delta".into())),
    };
    Ok((Boundary::mmsre(family, delta), None))
}

fn selected_filter(cfg: &RunConfig) -> Result<(FilterWeights, Option<String>), CliError> {
    let kernel = kernel(cfg)?;
    let h = kernel.half_width();
    if cfg.q > h {
        return Err(CoreError::FutureSpanOutOfRange { q: cfg.q, h }.into());
    }
    let symmetric = symmetric_weights(&kernel, cfg.degree)?;
    if cfg.family == FamilyChoice::Musgrave {
        let spec = match (cfg.musgrave_r, cfg.delta) {
            (Some(r), _) => MusgraveSpec::R(r),
            (None, Some(DeltaChoice::Value(v))) => MusgraveSpec::DeltaRatio(v),
            _ => return Err(CliError::Usage("musgrave requires --delta or --r".into())),
        };
        return Ok((musgrave_weights(&symmetric, cfg.q, spec)?, None));
    }
    let series = cfg.input.as_deref().map(load).transpose()?;
    let (b, note) = boundary(cfg, &kernel, series.as_ref())?;
    let filter = match b {
        Boundary::Direct => daf_weights(&kernel, cfg.degree, cfg.q)?,
        Boundary::Mmsre {
            family,
            delta_ratio,
        } => family_filter(family, &symmetric, cfg.q, delta_ratio)?,
    };
    Ok((filter, note))
}

fn weights(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let (filter, summary) = selected_filter(cfg)?;
    let mut table = Table::new(["offset", "weight"]);
    for (k, w) in filter.iter() {
        table.push(vec![k.to_string(), cfg.format.format(w)]);
    }
    Ok(CommandOutput { table, summary })
}

fn gain(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let (filter, summary) = selected_filter(cfg)?;
    let response = spectral_response(&filter, &frequency_grid(cfg.grid_points))?;
    let mut table = Table::new(["omega", "gain", "phase"]);
    for i in 0..response.omegas.len() {
        table.push(vec![
            cfg.format.format(response.omegas[i]),
            cfg.format.format(response.gain[i]),
            cfg.format.format(response.phase[i]),
        ]);
    }
    Ok(CommandOutput { table, summary })
}

fn table1(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let kernel = kernel(cfg)?;
    let h = kernel.half_width();
    let header = std::iter::once(String::new()).chain((0..=cfg.d_max).map(|d| format!("d={d}")));
    let mut table = Table::new(header);
    for q in 0..=h {
        let mut row = vec![format!("q={q}")];
        for d in 0..=cfg.d_max {
            row.push(match leverage(&kernel, d, q) {
                Ok(v) => cfg.format.format(v),
                Err(CoreError::Underdetermined { .. }) => String::new(),
                Err(e) => return Err(e.into()),
            });
        }
        table.push(row);
    }
    Ok(CommandOutput {
        table,
        summary: None,
    })
}

fn smooth_cmd(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let series = input(cfg)?;
    let kernel = kernel(cfg)?;
    let (b, summary) = boundary(cfg, &kernel, Some(&series))?;
    let est = smooth(&series, &kernel, cfg.degree, b)?;
    let mut table = Table::new(["t", "label", "y", "trend"]);
    for (i, (y, m)) in series.values().iter().zip(&est.values).enumerate() {
        let t = i + 1;
        table.push(vec![
            t.to_string(),
            series.label(t),
            cfg.format.format(*y),
            cfg.format.format(*m),
        ]);
    }
    Ok(CommandOutput { table, summary })
}

fn cv(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let series = input(cfg)?;
    let range = match &cfg.bandwidth {
        Bandwidth::Range(r) => r.clone(),
        Bandwidth::Fixed(h) => *h..=*h,
    };
    let sel = select_bandwidth(&series, cfg.kernel, cfg.degree, range)?;
    let mut table = Table::new(["parameter", "score"]);
    let mut best = f64::NAN;
    for (h, score) in &sel.curve {
        if *h == sel.h {
            best = *score;
        }
        table.push(vec![h.to_string(), cfg.format.format(*score)]);
    }
    Ok(CommandOutput {
        table,
        summary: Some(format!("argmin h={} cv={}", sel.h, cfg.format.format(best))),
    })
}

fn fit_delta(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let series = input(cfg)?;
    let kernel = kernel(cfg)?;
    let family = cfg
        .family
        .mmsre_family()
        .ok_or_else(|| CliError::Usage("fit-delta requires --family lc, ql or cq".into()))?;
    let fit = fit_delta_ratio(&series, &kernel, cfg.degree, family, &cfg.delta_grid)?;
    let mut table = Table::new(["parameter", "score"]);
    for (delta, msre) in &fit.curve {
        table.push(vec![cfg.format.format(*delta), cfg.format.format(*msre)]);
    }
    Ok(CommandOutput {
        table,
        summary: Some(format!(
            "argmin delta_ratio={} msre={}",
            cfg.format.format(fit.delta_ratio),
            cfg.format.format(fit.msre)
        )),
    })
}

fn report(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let series = input(cfg)?;
    let kernel = kernel(cfg)?;
    let (b, note) = boundary(cfg, &kernel, Some(&series))?;
    let grid = cfg.per_vintage_refit.then_some(&cfg.delta_grid);
    let r = revision_report(&series, &kernel, cfg.degree, b, grid)?;
    let fmt = cfg.format;
    let header = ["t", "label", "y", "trend"]
        .into_iter()
        .map(String::from)
        .chain((0..=r.h).map(|q| format!("vintage_{q}")))
        .chain(std::iter::once("revision".to_string()));
    let mut table = Table::new(header);
    for i in 0..series.len() {
        let t = i + 1;
        let mut row = vec![
            t.to_string(),
            series.label(t),
            fmt.format(series.values()[i]),
            fmt.format_opt(r.final_[i]),
        ];
        row.extend(r.vintages.iter().map(|v| fmt.format_opt(v[i])));
        row.push(fmt.format_opt(r.revisions[i]));
        table.push(row);
    }
    let mut summary = format!(
        "msre={} kernel={} h={} d={} boundary={} seed={}",
        fmt.format(r.msre),
        cfg.kernel,
        r.h,
        r.degree,
        r.boundary,
        cfg.seed
    );
    if cfg.per_vintage_refit {
        let deltas: Vec<String> = r
            .vintage_deltas
            .iter()
            .flatten()
            .map(|d| fmt.format(*d))
            .collect();
        summary.push_str(&format!(" vintage_deltas={}", deltas.join(";")));
    }
    if let Some(note) = note {
        summary = format!("{summary} {note}");
    }
    Ok(CommandOutput {
        table,
        summary: Some(summary),
    })
}
