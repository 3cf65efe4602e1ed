use serde::Serialize;

use spa_core::channels::{
    apply_channel, chi_of, choi_of, minimal_spa_admixture, ChannelRep, ChiMatrix, ChoiMatrix,
};
use spa_core::metrics::{
    average_fidelity_monte_carlo, process_and_average_fidelity, uhlmann_fidelity, FidelityKind,
    FidelityReport,
};
use spa_core::qmath::ComplexMatrix;
use spa_core::shots::{
    generate_tomography_dataset, read_csv, write_csv, DatasetRequest, SourceModel, TomographyKind,
};
use spa_core::tomography::{qpt_mle, qst_mle, Design, MleResult, TomographyProblem};

use crate::{
    emit, resolve_channel, resolve_scheme, resolve_state, to_json, Cli, CliError, CliResult,
    Command, FidelityArg, Format, KindArg, ReproduceConfig,
};

const MINIMAL_P_TOL: f64 = 1e-9;

pub(crate) fn dispatch(cli: &Cli) -> CliResult<i32> {
    let g = &cli.global;
    let out = g.out.as_deref();
    match &cli.command {
        Command::MinimalP { dim } => {
            let dim = *dim as usize;
            let p = minimal_spa_admixture(dim)?;
            let formula = dim as f64 / (dim as f64 + 1.0);
            let report = MinimalP {
                dim,
                admixture: p,
                formula,
                difference: (p - formula).abs(),
            };
            let text = match g.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&report)?,
                Format::Csv => csv_rows(std::slice::from_ref(&report))?,
            };
            emit(out, &text)?;
            Ok(if report.difference < MINIMAL_P_TOL {
                0
            } else {
                1
            })
        }
        Command::Choi { channel } => {
            let rep = resolve_channel(channel)?;
            let choi = choi_of(&rep)?;
            let chi = if rep.input_dim() == 2 {
                Some(chi_of(&rep)?)
            } else {
                None
            };
            let text = match g.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&ChoiOutput {
                    channel: channel.clone(),
                    choi: &choi,
                    chi: chi.as_ref(),
                })?,
                Format::Csv => {
                    let mut rows = matrix_rows("choi", choi.matrix());
                    if let Some(chi) = &chi {
                        rows.extend(matrix_rows("chi", chi.matrix()));
                    }
                    csv_rows(&rows)?
                }
            };
            emit(out, &text)?;
            Ok(0)
        }
        Command::Simulate {
            input_state,
            channel,
            kind,
        } => {
            let scheme = resolve_scheme(channel)?;
            let request = request_for(*kind, input_state)?;
            let data = generate_tomography_dataset(&request, scheme, &g.source()?, g.seed)?;
            let text = match g.format.unwrap_or(Format::Csv) {
                Format::Json => to_json(&data)?,
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_csv(&data.records, &mut buf)?;
                    String::from_utf8(buf).expect("csv output is UTF-8")
                }
            };
            emit(out, &text)?;
            Ok(0)
        }
        Command::Qst {
            data,
            input_state,
            channel,
            noiseless,
            trace,
        } => {
            let (problem, truth) = match data {
                Some(path) => (problem_from_csv(TomographyKind::Qst, path)?, None),
                None => {
                    let input = resolve_state(input_state)?;
                    let request = DatasetRequest::Qst {
                        input: input.clone(),
                        input_label: input_state.clone(),
                    };
                    let (problem, rep) = simulated_problem(&request, channel, *noiseless, g)?;
                    let truth = match &rep {
                        Some(rep) => apply_channel(rep, &input)?,
                        None => input,
                    };
                    (problem, Some(truth))
                }
            };
            let result = finish(qst_mle(&problem)?, *trace);
            let fidelity = truth
                .as_ref()
                .map(|t| uhlmann_fidelity(&result.estimate, t))
                .transpose()?;
            let text = match g.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&TomographyOutput {
                    result: &result,
                    fidelity_to_truth: fidelity,
                })?,
                Format::Csv => csv_rows(&matrix_rows("estimate", result.estimate.matrix()))?,
            };
            emit(out, &text)?;
            Ok(0)
        }
        Command::Qpt {
            data,
            channel,
            noiseless,
            trace,
        } => {
            let (problem, truth) = match data {
                Some(path) => (problem_from_csv(TomographyKind::Qpt, path)?, None),
                None => {
                    let (problem, rep) =
                        simulated_problem(&DatasetRequest::Qpt, channel, *noiseless, g)?;
                    let truth =
                        rep.unwrap_or_else(|| spa_core::channels::KrausSet::identity(2).into());
                    (problem, Some(truth))
                }
            };
            let result = finish(qpt_mle(&problem)?, *trace);
            let fidelity = match (&truth, result.choi()) {
                (Some(t), Some(choi)) => {
                    Some(process_and_average_fidelity(t, &choi?.into())?.process)
                }
                _ => None,
            };
            let text = match g.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&TomographyOutput {
                    result: &result,
                    fidelity_to_truth: fidelity,
                })?,
                Format::Csv => {
                    let mut rows = matrix_rows("choi", result.estimate.matrix());
                    if let Some(chi) = &result.chi {
                        rows.extend(matrix_rows("chi", chi.matrix()));
                    }
                    csv_rows(&rows)?
                }
            };
            emit(out, &text)?;
            Ok(0)
        }
        Command::Fidelity {
            kind,
            samples,
            a,
            b,
        } => {
            let (report, std_error) = match kind {
                FidelityArg::Uhlmann | FidelityArg::Overlap => {
                    let k = if *kind == FidelityArg::Uhlmann {
                        FidelityKind::Uhlmann
                    } else {
                        FidelityKind::Overlap
                    };
                    let (a, b) = (resolve_state(a)?, resolve_state(b)?);
                    (FidelityReport::states(k, &a, &b)?, None)
                }
                FidelityArg::Process => {
                    let (a, b) = (resolve_channel(a)?, resolve_channel(b)?);
                    (
                        FidelityReport::channels(FidelityKind::Process, &a, &b)?,
                        None,
                    )
                }
                FidelityArg::Average => {
                    let (a, b) = (resolve_channel(a)?, resolve_channel(b)?);
                    match samples {
                        Some(n) => {
                            let mc = average_fidelity_monte_carlo(&a, &b, *n, g.seed)?;
                            let value = mc.mean.min(1.0);
                            (
                                FidelityReport::new(FidelityKind::Average, value, &[&a, &b])?,
                                Some(mc.std_error),
                            )
                        }
                        None => (
                            FidelityReport::channels(FidelityKind::Average, &a, &b)?,
                            None,
                        ),
                    }
                }
            };
            let text = match g.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&FidelityOutput {
                    report: &report,
                    std_error,
                })?,
                Format::Csv => csv_rows(&[FidelityRow {
                    kind: report.kind,
                    value: report.value,
                    std_error,
                    operand_a: report.operands[0].clone(),
                    operand_b: report.operands[1].clone(),
                }])?,
            };
            emit(out, &text)?;
            Ok(0)
        }
        Command::ReproducePaper {
            qst_trials,
            qpt_trials,
            mc_samples,
        } => {
            let config = ReproduceConfig {
                master_seed: g.seed,
                source: g.source()?,
                qst_trials: *qst_trials,
                qpt_trials: *qpt_trials,
                mc_samples: *mc_samples,
            };
            let report = crate::reproduce(&config)?;
            let text = match g.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&report)?,
                Format::Csv => report.to_csv()?,
            };
            emit(out, &text)?;
            Ok(if report.all_checks_pass() { 0 } else { 1 })
        }
    }
}

fn request_for(kind: KindArg, input_state: &str) -> CliResult<DatasetRequest> {
    Ok(match kind {
        KindArg::Qst => DatasetRequest::Qst {
            input: resolve_state(input_state)?,
            input_label: input_state.to_string(),
        },
        KindArg::Qpt => DatasetRequest::Qpt,
    })
}

fn problem_from_csv(kind: TomographyKind, path: &std::path::Path) -> CliResult<TomographyProblem> {
    let file =
        std::fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let records = read_csv(file)?;
    Ok(TomographyProblem::from_records(
        kind,
        &records,
        &Design::standard(),
    )?)
}

/// Tomography problem for a simulated experiment and the channel it probes.
fn simulated_problem(
    request: &DatasetRequest,
    channel: &str,
    noiseless: bool,
    g: &crate::GlobalArgs,
) -> CliResult<(TomographyProblem, Option<ChannelRep>)> {
    let source: SourceModel = g.source()?;
    if noiseless {
        let rep = if channel == "none" {
            None
        } else {
            Some(resolve_channel(channel)?)
        };
        let problem = TomographyProblem::noiseless(request, rep.as_ref(), &source)?;
        return Ok((problem, rep));
    }
    let scheme = resolve_scheme(channel)?;
    let data = generate_tomography_dataset(request, scheme, &source, g.seed)?;
    let problem =
        TomographyProblem::from_records(request.kind(), &data.records, &Design::standard())?;
    Ok((problem, scheme.map(|s| s.channel())))
}

fn finish(result: MleResult, keep_trace: bool) -> MleResult {
    if keep_trace {
        result
    } else {
        result.without_trace()
    }
}

#[derive(Debug, Clone, Serialize)]
struct MinimalP {
    dim: usize,
    admixture: f64,
    formula: f64,
    difference: f64,
}

#[derive(Serialize)]
struct ChoiOutput<'a> {
    channel: String,
    choi: &'a ChoiMatrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    chi: Option<&'a ChiMatrix>,
}

#[derive(Serialize)]
struct TomographyOutput<'a> {
    #[serde(flatten)]
    result: &'a MleResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    fidelity_to_truth: Option<f64>,
}

#[derive(Serialize)]
struct FidelityOutput<'a> {
    #[serde(flatten)]
    report: &'a FidelityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    std_error: Option<f64>,
}

#[derive(Serialize)]
struct FidelityRow {
    kind: FidelityKind,
    value: f64,
    std_error: Option<f64>,
    operand_a: String,
    operand_b: String,
}

#[derive(Serialize)]
struct MatrixRow {
    matrix: &'static str,
    row: usize,
    col: usize,
    re: f64,
    im: f64,
}

fn matrix_rows(name: &'static str, m: &ComplexMatrix) -> Vec<MatrixRow> {
    let d = m.dim();
    (0..d)
        .flat_map(|row| (0..d).map(move |col| (row, col)))
        .map(|(row, col)| MatrixRow {
            matrix: name,
            row,
            col,
            re: m[(row, col)].re,
            im: m[(row, col)].im,
        })
        .collect()
}

pub(crate) fn csv_rows<T: Serialize>(rows: &[T]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(spa_core::Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
