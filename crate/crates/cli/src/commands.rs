use std::io::Write;

use serde::Serialize;

use keyrate::analysis::{self, Threshold};
use keyrate::montecarlo::{compare, simulate, ComparisonReport, MonteCarloEstimate};
use keyrate::{rate as eval_rate, Bb84Params, DdiParams, DiParams, EcParams, Mode, Scheme, SchemeParams};

use crate::output::{cell, fmt_num, write_csv, write_json};
use crate::{CliError, CurveArgs, Format, McArgs, PointArgs, RateArgs, SchemeArg, SweepArgs, ThresholdArgs, Vary};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn reject(present: bool, flag: &str, scheme: SchemeArg) -> Result<(), CliError> {
    if present {
        Err(usage(format!("{flag} does not apply to scheme {}", Scheme::from(scheme))))
    } else {
        Ok(())
    }
}

/// Builds the operating point, enforcing the flags each scheme requires.
pub fn resolve_point(p: &PointArgs, e_single: f64) -> Result<SchemeParams, CliError> {
    Ok(match p.scheme {
        SchemeArg::Bb84 => {
            let ps = p.ps.ok_or_else(|| usage("bb84 needs --ps"))?;
            reject(p.eta.is_some(), "--eta", p.scheme)?;
            reject(p.eta_a.is_some() || p.eta_b.is_some(), "--eta-a/--eta-b", p.scheme)?;
            SchemeParams::Bb84(Bb84Params::new(ps, e_single)?)
        }
        SchemeArg::Ddi => {
            let eta = p.eta.ok_or_else(|| usage("ddi needs --eta"))?;
            reject(p.ps.is_some(), "--ps", p.scheme)?;
            reject(p.eta_a.is_some() || p.eta_b.is_some(), "--eta-a/--eta-b", p.scheme)?;
            SchemeParams::Ddi(DdiParams::new(eta, e_single)?)
        }
        SchemeArg::Di => {
            reject(p.ps.is_some(), "--ps", p.scheme)?;
            let (a, b) = match (p.eta, p.eta_a, p.eta_b) {
                (Some(eta), None, None) => (eta, eta),
                (None, Some(a), Some(b)) => (a, b),
                _ => return Err(usage("di needs either --eta or both --eta-a and --eta-b")),
            };
            SchemeParams::Di(DiParams::new(a, b, e_single)?)
        }
    })
}

fn ec(f: f64) -> Result<EcParams, CliError> {
    Ok(EcParams::new(f)?)
}

#[derive(Debug, Serialize)]
struct PointRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    ps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta_b: Option<f64>,
    e_s: f64,
}

impl PointRecord {
    fn from_params(params: &SchemeParams) -> Self {
        let none = PointRecord { ps: None, eta: None, eta_a: None, eta_b: None, e_s: params.e_single().value() };
        match params {
            SchemeParams::Bb84(p) => PointRecord { ps: Some(p.p_single().value()), ..none },
            SchemeParams::Ddi(p) => PointRecord { eta: Some(p.eta().value()), ..none },
            SchemeParams::Di(p) => {
                PointRecord { eta_a: Some(p.eta_a().value()), eta_b: Some(p.eta_b().value()), ..none }
            }
        }
    }
}

#[derive(Debug, Serialize)]
struct RateRecord {
    scheme: Scheme,
    mode: Mode,
    params: PointRecord,
    h_a: f64,
    h_a_given_b: f64,
    i_pa: f64,
    f: f64,
    rate: f64,
    e_c: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<f64>,
}

pub fn rate<W: Write>(args: &RateArgs, out: &mut W) -> Result<(), CliError> {
    let params = resolve_point(&args.point, args.es)?;
    let ec = ec(args.common.f)?;
    let records: Vec<RateRecord> = args
        .mode
        .modes()
        .into_iter()
        .map(|mode| {
            let r = eval_rate(&params, mode, ec);
            RateRecord {
                scheme: params.scheme(),
                mode,
                params: PointRecord::from_params(&params),
                h_a: r.h_a,
                h_a_given_b: r.h_a_given_b,
                i_pa: r.i_pa,
                f: r.f,
                rate: r.rate,
                e_c: params.coarse_error().value(),
                s: params.bell_parameter(),
            }
        })
        .collect();
    match args.common.format {
        Format::Json => write_json(out, &records),
        Format::Csv => {
            let rows: Vec<Vec<String>> = records
                .iter()
                .map(|r| {
                    vec![
                        r.scheme.to_string(),
                        r.mode.to_string(),
                        cell(r.params.ps),
                        cell(r.params.eta),
                        cell(r.params.eta_a),
                        cell(r.params.eta_b),
                        fmt_num(r.params.e_s),
                        fmt_num(r.f),
                        fmt_num(r.h_a),
                        fmt_num(r.h_a_given_b),
                        fmt_num(r.i_pa),
                        fmt_num(r.rate),
                        fmt_num(r.e_c),
                        cell(r.s),
                    ]
                })
                .collect();
            write_csv(out, &RATE_CSV_HEADER, &rows)
        }
    }
}

pub const RATE_CSV_HEADER: [&str; 14] = [
    "scheme", "mode", "ps", "eta", "eta_a", "eta_b", "e_s", "f", "h_a", "h_a_given_b", "i_pa", "rate", "e_c", "s",
];

#[derive(Debug, Serialize)]
struct ThresholdRecord {
    scheme: Scheme,
    mode: Mode,
    vary: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    e_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    f: f64,
    tol: f64,
    found: bool,
    #[serde(flatten)]
    threshold: Option<Threshold>,
}

pub const THRESHOLD_CSV_HEADER: [&str; 13] = [
    "scheme",
    "mode",
    "vary",
    "e_s",
    "eta",
    "f",
    "root",
    "bracket_lo",
    "bracket_hi",
    "iterations",
    "achieved_tolerance",
    "extra_sign_changes",
    "tol",
];

pub fn threshold<W: Write>(args: &ThresholdArgs, out: &mut W) -> Result<(), CliError> {
    let scheme = Scheme::from(args.scheme);
    let ec = ec(args.common.f)?;
    let (fixed_es, fixed_eta) = match args.vary {
        Vary::Eta => {
            if args.ps.is_some() || args.eta.is_some() {
                return Err(usage("--vary eta takes only --es as the fixed parameter"));
            }
            (Some(args.es.unwrap_or(0.0)), None)
        }
        Vary::Es => {
            if args.es.is_some() {
                return Err(usage("--vary es takes --eta (or --ps for bb84) as the fixed parameter"));
            }
            let eta = match (args.scheme, args.ps, args.eta) {
                (SchemeArg::Bb84, Some(ps), None) => ps,
                (SchemeArg::Bb84, _, _) => return Err(usage("bb84 needs --ps")),
                (_, None, Some(eta)) => eta,
                (s, _, _) => return Err(usage(format!("{} needs --eta", Scheme::from(s)))),
            };
            (None, Some(eta))
        }
    };

    let mut records = Vec::new();
    for mode in args.mode.modes() {
        let found = match args.vary {
            Vary::Eta => analysis::find_eta_threshold(scheme, mode, fixed_es.unwrap(), args.tol, ec)?,
            Vary::Es => analysis::find_es_threshold(scheme, mode, fixed_eta.unwrap(), args.tol, ec)?,
        };
        if let Some(w) = found.as_ref().and_then(Threshold::warning) {
            eprintln!("keyrate: {scheme} {mode}: {w}");
        }
        records.push(ThresholdRecord {
            scheme,
            mode,
            vary: match args.vary {
                Vary::Eta => "eta",
                Vary::Es => "es",
            },
            e_s: fixed_es,
            eta: fixed_eta,
            f: ec.f(),
            tol: args.tol,
            found: found.is_some(),
            threshold: found,
        });
    }

    match args.common.format {
        Format::Json => write_json(out, &records)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = records
                .iter()
                .map(|r| {
                    let t = r.threshold.as_ref();
                    vec![
                        r.scheme.to_string(),
                        r.mode.to_string(),
                        r.vary.to_string(),
                        cell(r.e_s),
                        cell(r.eta),
                        fmt_num(r.f),
                        cell(t.map(|t| t.result.root)),
                        cell(t.map(|t| t.result.bracket_lo)),
                        cell(t.map(|t| t.result.bracket_hi)),
                        t.map(|t| t.result.iterations.to_string()).unwrap_or_default(),
                        cell(t.map(|t| t.result.achieved_tolerance)),
                        t.map(|t| t.extra_sign_changes.to_string()).unwrap_or_default(),
                        fmt_num(r.tol),
                    ]
                })
                .collect();
            write_csv(out, &THRESHOLD_CSV_HEADER, &rows)?;
        }
    }
    let missing: Vec<String> = records.iter().filter(|r| !r.found).map(|r| r.mode.to_string()).collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(CliError::NoThreshold(format!("rate never turns positive for mode(s) {}", missing.join(", "))))
    }
}

pub fn sweep<W: Write>(args: &SweepArgs, out: &mut W) -> Result<(), CliError> {
    let scheme = Scheme::from(args.scheme);
    let rows = analysis::sweep(scheme, args.es, args.eta_min, args.eta_max, args.steps, ec(args.common.f)?)?;
    match args.common.format {
        Format::Json => write_json(out, &rows),
        Format::Csv => {
            let mut header = vec!["eta", "rate_coarse", "rate_refined", "e_c", "h_a", "i_pa"];
            if scheme == Scheme::Di {
                header.push("s");
            }
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut v = vec![
                        fmt_num(r.eta),
                        fmt_num(r.rate_coarse),
                        fmt_num(r.rate_refined),
                        fmt_num(r.e_c),
                        fmt_num(r.h_a),
                        fmt_num(r.i_pa_coarse),
                    ];
                    if scheme == Scheme::Di {
                        v.push(cell(r.s));
                    }
                    v
                })
                .collect();
            write_csv(out, &header, &cells)
        }
    }
}

pub const CURVE_CSV_HEADER: [&str; 3] = ["e_s", "eta_threshold_coarse", "eta_threshold_refined"];

pub fn curve<W: Write>(args: &CurveArgs, out: &mut W) -> Result<(), CliError> {
    let points = analysis::tradeoff_curve(
        Scheme::from(args.scheme),
        args.es_min,
        args.es_max,
        args.steps,
        args.tol,
        ec(args.common.f)?,
    )?;
    match args.common.format {
        Format::Json => write_json(out, &points),
        Format::Csv => {
            let rows: Vec<Vec<String>> = points
                .iter()
                .map(|p| vec![fmt_num(p.e_s), cell(p.eta_threshold_coarse), cell(p.eta_threshold_refined)])
                .collect();
            write_csv(out, &CURVE_CSV_HEADER, &rows)
        }
    }
}

#[derive(Debug, Serialize)]
struct McOutput<'a> {
    estimate: &'a MonteCarloEstimate,
    report: &'a ComparisonReport,
}

pub const MC_CSV_HEADER: [&str; 11] = [
    "scheme",
    "rng",
    "seed",
    "n",
    "quantity",
    "analytic",
    "empirical",
    "std_error",
    "allowance",
    "z",
    "flagged",
];

pub fn mc<W: Write>(args: &McArgs, out: &mut W) -> Result<(), CliError> {
    let params = resolve_point(&args.point, args.es)?;
    if args.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let estimate = simulate(&params, args.n, args.seed)?;
    let report = compare(&estimate, &params)?;
    if !report.all_within() {
        eprintln!(
            "keyrate: {} comparison(s) exceed |z| > {}",
            report.rows.iter().filter(|r| r.flagged).count(),
            report.z_limit
        );
    }
    match args.format {
        Format::Json => write_json(out, &McOutput { estimate: &estimate, report: &report }),
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        params.scheme().to_string(),
                        estimate.rng.clone(),
                        estimate.seed.to_string(),
                        estimate.n.to_string(),
                        r.quantity.clone(),
                        fmt_num(r.analytic),
                        fmt_num(r.empirical),
                        fmt_num(r.std_error),
                        fmt_num(r.allowance),
                        fmt_num(r.z),
                        r.flagged.to_string(),
                    ]
                })
                .collect();
            write_csv(out, &MC_CSV_HEADER, &rows)
        }
    }
}
