use std::f64::consts::PI;

use anyhow::{anyhow, bail, Context, Result};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use spinpair::endor_spect::{
    endor_lines, energy_levels, epr_lines, tppi_classify, tppi_simulate_state, EndorRegime, SpinHamiltonianParams,
    TppiClass, TppiConfig,
};
use spinpair::entanglement::{
    concurrence, entropy_of_entanglement, is_ppt, log_negativity, negativity, report, EntanglementReport,
};
use spinpair::pulse_engine::{
    bell_prepare, dephase, pseudo_pure_prepare, Channel, PulseSequence, SequenceStep, Transition,
};
use spinpair::quantum_state::{Evolve, MatrixJson, StateJson, VectorJson};
use spinpair::sdc::{
    conventional_witness, decomposition_residual, evaluate_w1_w2, mixed_sdc_states, signal_stats,
    verify_sign_flip_impossibility, witness_f, SdcMessage, SignFlipReport, SignalStats,
};
use spinpair::spin_ensemble::{
    entanglement_margin, nuclear_frequency, polarization, product_state, resonance_field, threshold_temperature,
    transfer_sequence, PolarizationPair, TransferTrace,
};
use spinpair::tensor_fit::{
    fit_t1, fit_t2, fit_tensor, AngularMeasurement, ConsistencyReport, Plane, PlaneConstants, Quantity,
    RelaxationFit,
};
use spinpair::{DensityMatrix, PureState};

use crate::args::*;
use crate::output::{read_csv, read_json, write_csv, RunRecord};

fn nuclear(nu_e: f64, nucleus: &str, nu_n: Option<f64>) -> Result<(f64, Option<String>)> {
    match nu_n {
        Some(f) => Ok((f, None)),
        None => Ok((nuclear_frequency(nucleus, resonance_field(nu_e))?, Some(nucleus.to_string()))),
    }
}

#[derive(Serialize)]
struct ThresholdOut {
    field_tesla: f64,
    nucleus: Option<String>,
    nu_n_hz: f64,
    transfer: bool,
    t_critical_kelvin: f64,
    epsilon_s: f64,
    epsilon_i: f64,
}

#[derive(Serialize)]
struct MarginRow {
    temperature_k: f64,
    epsilon_s: f64,
    epsilon_i: f64,
    margin: f64,
}

pub fn threshold(a: &ThresholdArgs) -> Result<RunRecord> {
    let (nu_n, nucleus) = nuclear(a.nu_e, &a.nucleus, a.nu_n)?;
    let t = threshold_temperature(a.nu_e, nu_n, a.transfer)?;
    let pair = |temp: f64| -> Result<PolarizationPair> {
        let es = polarization(a.nu_e, temp)?;
        Ok(PolarizationPair { epsilon_s: es, epsilon_i: if a.transfer { es } else { polarization(nu_n, temp)? } })
    };
    let at = pair(t)?;
    if let Some(path) = &a.out {
        let rows = (0..200)
            .map(|k| 10f64.powf(-2.0 + 4.0 * k as f64 / 199.0))
            .map(|temp| {
                let p = pair(temp)?;
                Ok(MarginRow { temperature_k: temp, epsilon_s: p.epsilon_s, epsilon_i: p.epsilon_i, margin: entanglement_margin(p) })
            })
            .collect::<Result<Vec<_>>>()?;
        write_csv(path, &rows)?;
    }
    let out = ThresholdOut {
        field_tesla: resonance_field(a.nu_e),
        nucleus,
        nu_n_hz: nu_n,
        transfer: a.transfer,
        t_critical_kelvin: t,
        epsilon_s: at.epsilon_s,
        epsilon_i: at.epsilon_i,
    };
    RunRecord::new("threshold", a, &out)
}

#[derive(Serialize)]
struct ThermalOut {
    nu_n_hz: f64,
    epsilon_s: f64,
    epsilon_i: f64,
    /// Levels |00⟩..|11⟩, electron first.
    populations: Vec<f64>,
    margin: f64,
    bell_circuit: EntanglementReport,
    transfer: Option<TransferTrace>,
}

pub fn thermal(a: &ThermalArgs) -> Result<RunRecord> {
    let (nu_n, _) = nuclear(a.nu_e, &a.nucleus, a.nu_n)?;
    let es = polarization(a.nu_e, a.temperature)?;
    // Full transfer, as in `threshold`. The linearised trace is reported
    // alongside but is only meaningful for small ε.
    let (pair, trace) = if a.transfer {
        (PolarizationPair { epsilon_s: es, epsilon_i: es }, Some(transfer_sequence(es)?))
    } else {
        (PolarizationPair { epsilon_s: es, epsilon_i: polarization(nu_n, a.temperature)? }, None)
    };
    let rho = product_state(&[pair.epsilon_s, pair.epsilon_i])?;
    let bell = rho.conjugate_by(&spinpair::sdc::u_ent());
    let out = ThermalOut {
        nu_n_hz: nu_n,
        epsilon_s: pair.epsilon_s,
        epsilon_i: pair.epsilon_i,
        populations: rho.populations(),
        margin: entanglement_margin(pair),
        bell_circuit: report(&bell)?,
        transfer: trace,
    };
    RunRecord::new("thermal", a, &out)
}

fn parse_message(s: &str) -> Result<SdcMessage> {
    let b: Vec<u8> = s
        .trim()
        .chars()
        .map(|c| c.to_digit(2).map(|d| d as u8))
        .collect::<Option<_>>()
        .ok_or_else(|| anyhow!("message must be two bits, got {s:?}"))?;
    match b.as_slice() {
        [z, x] => Ok(SdcMessage::new(*z, *x)?),
        _ => bail!("message must be two bits, got {s:?}"),
    }
}

#[derive(Serialize)]
struct MonteCarlo {
    trials: usize,
    seed: u64,
    error_rate_i: f64,
    error_rate_s: f64,
}

#[derive(Serialize)]
struct SdcOut {
    message: String,
    shared_state: MatrixJson,
    w1: f64,
    w2: f64,
    witness_f: f64,
    conventional_witness: f64,
    entangled: bool,
    concurrence: f64,
    decoded_populations: Vec<f64>,
    decoded_message: String,
    statistics: SignalStats,
    monte_carlo: Option<MonteCarlo>,
}

/// Fraction of ensemble readouts whose majority disagrees with the sent bit.
/// Each molecule reads correctly with probability `p`; ties are a coin flip.
fn sampled_error_rate(rng: &mut StdRng, n: u64, p: f64, trials: usize) -> Result<f64> {
    let dist = Binomial::new(n, p).map_err(|e| anyhow!("binomial sampler: {e}"))?;
    let wrong = (0..trials)
        .filter(|_| {
            let k = dist.sample(rng);
            match (2 * k).cmp(&n) {
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Equal => rng.random_bool(0.5),
            }
        })
        .count();
    Ok(wrong as f64 / trials as f64)
}

pub fn sdc(a: &SdcArgs) -> Result<RunRecord> {
    let msg = parse_message(&a.message)?;
    let states = mixed_sdc_states(a.p_i, a.p_s, msg)?;
    let (w1, w2) = evaluate_w1_w2(&states.rho2)?;
    let f = witness_f(w1, w2)?;
    let pops = states.rho3.populations();
    let best = (0..4).max_by(|&x, &y| pops[x].total_cmp(&pops[y])).unwrap_or(0);
    let stats = signal_stats(a.n, 2.0 * a.p_i - 1.0, 2.0 * a.p_s - 1.0, msg)?;
    let monte_carlo = if a.trials > 0 {
        if !(a.n.fract() == 0.0 && a.n <= u64::MAX as f64) {
            bail!("Monte-Carlo sampling needs an integral molecule count, got {}", a.n);
        }
        let mut rng = StdRng::seed_from_u64(a.seed);
        let n = a.n as u64;
        Some(MonteCarlo {
            trials: a.trials,
            seed: a.seed,
            error_rate_i: sampled_error_rate(&mut rng, n, a.p_i, a.trials)?,
            error_rate_s: sampled_error_rate(&mut rng, n, a.p_s, a.trials)?,
        })
    } else {
        None
    };
    let out = SdcOut {
        message: format!("{}{}", msg.z, msg.x),
        shared_state: MatrixJson::from_matrix(states.rho2.matrix()),
        w1,
        w2,
        witness_f: f,
        conventional_witness: states.rho2.expectation(conventional_witness(msg).matrix()),
        entangled: f < 0.0,
        concurrence: concurrence(&states.rho2)?,
        decoded_populations: pops,
        decoded_message: format!("{}{}", best >> 1, best & 1),
        statistics: stats,
        monte_carlo,
    };
    RunRecord::new("sdc", a, &out)
}

#[derive(Serialize)]
struct MessageResidual {
    message: String,
    max_residual: f64,
}

#[derive(Serialize)]
struct TheoremOut {
    a: f64,
    b: f64,
    c: f64,
    residuals: Vec<MessageResidual>,
    max_residual: f64,
    holds: bool,
    sign_flip: SignFlipReport,
}

pub fn witness_theorem(a: &WitnessTheoremArgs) -> Result<RunRecord> {
    if a.points < 2 || a.flip_points < 2 {
        bail!("grids need at least 2 points per axis");
    }
    let residuals = SdcMessage::all()
        .iter()
        .map(|&m| Ok(MessageResidual { message: format!("{}{}", m.z, m.x), max_residual: decomposition_residual(m, a.points)? }))
        .collect::<Result<Vec<_>>>()?;
    let max_residual = residuals.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    let dec = spinpair::sdc::decompose_witness(SdcMessage::new(0, 0)?);
    let out = TheoremOut {
        a: dec.a,
        b: dec.b,
        c: dec.c,
        residuals,
        max_residual,
        holds: max_residual <= 1e-10,
        sign_flip: verify_sign_flip_impossibility(a.flip_points)?,
    };
    RunRecord::new("witness-theorem", a, &out)
}

/// One MW and one RF transition from a comma list.
fn mw_rf(list: &str) -> Result<(Transition, Transition)> {
    let ts = list
        .split(',')
        .map(|t| t.trim().parse::<Transition>().map_err(anyhow::Error::from))
        .collect::<Result<Vec<_>>>()?;
    let pick = |ch: Channel| -> Result<Transition> {
        let found: Vec<&Transition> = ts.iter().filter(|t| t.channel().ok() == Some(ch)).collect();
        match found.as_slice() {
            [t] => Ok(**t),
            _ => bail!("{list:?} must name exactly one {ch:?} transition"),
        }
    };
    if ts.len() != 2 {
        bail!("{list:?} must name two transitions");
    }
    Ok((pick(Channel::Mw)?, pick(Channel::Rf)?))
}

#[derive(Serialize)]
struct TppiOut {
    class: TppiClass,
    peak_hz: Option<f64>,
    bin_hz: f64,
    prepared_state: VectorJson,
    prepared_concurrence: f64,
    dephased: bool,
}

#[derive(Serialize)]
struct SignalRow {
    t_s: f64,
    signal: f64,
}

pub fn tppi(a: &TppiArgs) -> Result<RunRecord> {
    let (mw, rf1) = mw_rf(&a.seq)?;
    let (mw_det, rf2) = mw_rf(&a.detect)?;
    if mw_det != mw {
        bail!("detection MW {mw_det} differs from entangling MW {mw}");
    }
    let mut cfg = TppiConfig::new(a.init, rf1, mw, rf2);
    cfg.nu1 = a.nu1;
    cfg.nu2 = a.nu2;
    cfg.dt = a.dt;
    cfg.steps = a.steps;
    cfg.validate()?;
    let psi = bell_prepare(a.init, rf1, mw)?;
    let rho = if a.dephase { dephase(&psi.to_density()) } else { psi.to_density() };
    let ig = tppi_simulate_state(&cfg, &rho)?;
    let c = tppi_classify(&ig, a.nu1, a.nu2)?;
    if let Some(path) = &a.out {
        let rows: Vec<SignalRow> = ig.times.iter().zip(&ig.signal).map(|(&t, &s)| SignalRow { t_s: t, signal: s }).collect();
        write_csv(path, &rows)?;
    }
    let out = TppiOut {
        class: c.class,
        peak_hz: c.peak_hz,
        bin_hz: c.bin_hz,
        prepared_state: VectorJson::from_state(&psi),
        prepared_concurrence: concurrence(&rho)?,
        dephased: a.dephase,
    };
    RunRecord::new("tppi", a, &out)
}

#[derive(Serialize)]
struct LevelOut {
    m_s: f64,
    m_i: f64,
    energy_hz: f64,
}

#[derive(Serialize)]
struct LinesOut {
    levels: Vec<LevelOut>,
    epr_lines_hz: [f64; 2],
    endor_lines_hz: [f64; 2],
    endor_regime: EndorRegime,
}

pub fn lines(a: &LinesArgs) -> Result<RunRecord> {
    let p = SpinHamiltonianParams::new(a.nu_e / 1e6, a.nu_n / 1e6, a.a / 1e6)?;
    let e = endor_lines(&p);
    let out = LinesOut {
        levels: energy_levels(&p)
            .iter()
            .map(|l| LevelOut { m_s: l.m_s, m_i: l.m_i, energy_hz: l.energy_mhz * 1e6 })
            .collect(),
        epr_lines_hz: epr_lines(&p).map(|v| v * 1e6),
        endor_lines_hz: e.lines.map(|v| v * 1e6),
        endor_regime: e.regime,
    };
    RunRecord::new("lines", a, &out)
}

#[derive(Deserialize)]
struct AngleRow {
    plane: String,
    angle_deg: f64,
    value: f64,
}

#[derive(Serialize)]
struct FitRow {
    plane: String,
    angle_deg: f64,
    observed: f64,
    fitted: f64,
}

#[derive(Serialize)]
struct PlaneOut {
    plane: String,
    constants: PlaneConstants,
}

#[derive(Serialize)]
struct TensorOut {
    quantity: TensorKind,
    principal_values: [f64; 3],
    direction_cosines: [[f64; 3]; 3],
    sign_unknown: bool,
    residuals: Vec<PlaneOut>,
    consistency: ConsistencyReport,
}

pub fn fit_tensor_cmd(a: &FitTensorArgs) -> Result<RunRecord> {
    let rows: Vec<AngleRow> = read_csv(&a.input)?;
    let data = rows
        .iter()
        .map(|r| Ok(AngularMeasurement { plane: r.plane.parse::<Plane>()?, theta: r.angle_deg.to_radians(), value: r.value }))
        .collect::<Result<Vec<_>>>()?;
    let q = match a.quantity {
        TensorKind::G => Quantity::G,
        TensorKind::A => Quantity::A,
    };
    let fit = fit_tensor(&data, q)?;
    if let Some(path) = &a.out {
        let fitted: Vec<FitRow> = data
            .iter()
            .zip(&rows)
            .map(|(m, r)| {
                let k = Plane::all().iter().position(|p| *p == m.plane).expect("three planes");
                FitRow {
                    plane: m.plane.to_string(),
                    angle_deg: r.angle_deg,
                    observed: m.value,
                    fitted: fit.planes[k].squared_at(m.theta).max(0.0).sqrt(),
                }
            })
            .collect();
        write_csv(path, &fitted)?;
    }
    let out = TensorOut {
        quantity: a.quantity,
        principal_values: fit.principal.principal_values,
        direction_cosines: fit.principal.direction_cosines,
        sign_unknown: fit.principal.sign_unknown,
        residuals: Plane::all()
            .iter()
            .zip(fit.planes)
            .map(|(p, k)| PlaneOut { plane: p.to_string(), constants: k })
            .collect(),
        consistency: fit.consistency,
    };
    RunRecord::new("fit-tensor", a, &out)
}

#[derive(Deserialize)]
struct RelaxRow {
    t_s: f64,
    signal: f64,
}

#[derive(Serialize)]
struct RelaxFitRow {
    t_s: f64,
    observed: f64,
    fitted: f64,
}

#[derive(Serialize)]
struct RelaxOut {
    model: RelaxModel,
    fit: RelaxationFit,
}

pub fn fit_relax(a: &FitRelaxArgs) -> Result<RunRecord> {
    let rows: Vec<RelaxRow> = read_csv(&a.input)?;
    let data: Vec<(f64, f64)> = rows.iter().map(|r| (r.t_s, r.signal)).collect();
    let fit = match a.model {
        RelaxModel::T1 => fit_t1(&data)?,
        RelaxModel::T2 => fit_t2(&data)?,
    };
    let model = |t: f64| match a.model {
        RelaxModel::T1 => fit.amplitude * (1.0 - (-t / fit.time_constant).exp()),
        RelaxModel::T2 => fit.amplitude * (-2.0 * t / fit.time_constant).exp(),
    };
    if let Some(path) = &a.out {
        let rows: Vec<RelaxFitRow> = data.iter().map(|&(t, y)| RelaxFitRow { t_s: t, observed: y, fitted: model(t) }).collect();
        write_csv(path, &rows)?;
    }
    RunRecord::new("fit-relax", a, &RelaxOut { model: a.model, fit })
}

fn parse_cut(s: &str) -> Result<(usize, usize)> {
    let (x, y) = s.split_once(['x', 'X']).ok_or_else(|| anyhow!("cut must look like 2x2, got {s:?}"))?;
    Ok((x.trim().parse().context("cut")?, y.trim().parse().context("cut")?))
}

#[derive(Serialize)]
struct EntangleOut {
    dim: usize,
    cut: (usize, usize),
    purity: f64,
    /// Two-qubit states only.
    concurrence: Option<f64>,
    eof_bits: Option<f64>,
    negativity: f64,
    log_negativity_bits: f64,
    ppt: bool,
    min_pt_eigenvalue: f64,
    /// Pure states only.
    entropy_of_entanglement_bits: Option<f64>,
    /// NPT, or positive concurrence for two qubits.
    entangled: bool,
}

fn even_cut(dim: usize) -> Result<(usize, usize)> {
    if !dim.is_power_of_two() || dim < 4 {
        bail!("dimension {dim} has no qubit bipartition; pass --cut");
    }
    let n = dim.trailing_zeros();
    Ok((1 << (n / 2), 1 << (n - n / 2)))
}

pub fn entangle(a: &EntangleArgs) -> Result<RunRecord> {
    let doc: StateJson = read_json(&a.state)?;
    let rho = doc.to_density()?;
    let cut = match &a.cut {
        Some(s) => parse_cut(s)?,
        None => even_cut(rho.dim())?,
    };
    let pure = match &doc {
        StateJson::Vector(v) => Some(PureState::new(v.to_vector()?)?),
        StateJson::Matrix(_) => None,
    };
    let (ppt, min_pt) = is_ppt(&rho, cut)?;
    let two_qubit = (rho.dim() == 4 && cut == (2, 2)).then(|| report(&rho)).transpose()?;
    let out = EntangleOut {
        dim: rho.dim(),
        cut,
        purity: rho.purity(),
        concurrence: two_qubit.as_ref().map(|r| r.concurrence),
        eof_bits: two_qubit.as_ref().map(|r| r.eof_bits),
        negativity: negativity(&rho, cut)?,
        log_negativity_bits: log_negativity(&rho, cut)?,
        ppt,
        min_pt_eigenvalue: min_pt,
        entropy_of_entanglement_bits: pure.as_ref().map(|p| entropy_of_entanglement(p, cut)).transpose()?,
        entangled: two_qubit.map(|r| r.entangled).unwrap_or(!ppt),
    };
    RunRecord::new("entangle", a, &out)
}

#[derive(Serialize)]
struct StepRow {
    step: usize,
    label: String,
    p1: f64,
    p2: f64,
    p3: f64,
    p4: f64,
}

#[derive(Serialize)]
struct PulsesOut {
    steps: usize,
    populations: Vec<f64>,
    density: MatrixJson,
    /// Product of the pulses; absent when the sequence dephases.
    unitary: Option<MatrixJson>,
    entanglement: EntanglementReport,
}

/// Rounds away float noise so labels read like the input.
fn tidy(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

fn step_row(step: usize, label: String, rho: &DensityMatrix) -> StepRow {
    let p = rho.populations();
    StepRow { step, label, p1: p[0], p2: p[1], p3: p[2], p4: p[3] }
}

fn initial_state(a: &PulsesArgs) -> Result<DensityMatrix> {
    if let Some(path) = &a.state {
        return Ok(read_json::<StateJson>(path)?.to_density()?);
    }
    if let Some(eps) = a.epsilon {
        let thermal = product_state(&[eps, 0.0])?;
        return Ok(if a.pseudo_pure { pseudo_pure_prepare(&thermal)? } else { thermal });
    }
    let level = a.init.unwrap_or(1);
    if !(1..=4).contains(&level) {
        bail!("initial level {level} outside 1..4");
    }
    Ok(PureState::basis(4, level - 1)?.to_density())
}

pub fn pulses(a: &PulsesArgs) -> Result<RunRecord> {
    let mut rho = initial_state(a)?;
    if rho.dim() != 4 {
        bail!("pulse sequences act on the 4-level system, got dim {}", rho.dim());
    }
    let seq: Option<PulseSequence> = a.seq.as_deref().map(str::parse).transpose()?;
    let mut rows = vec![step_row(0, "initial".into(), &rho)];
    if let Some(seq) = &seq {
        for (k, step) in seq.steps().iter().enumerate() {
            let label = match step {
                SequenceStep::Pulse(p) => {
                    rho = rho.conjugate_by(&p.unitary());
                    format!("{}:{}pi:{}", p.transition, tidy(p.theta / PI), tidy(p.phi.to_degrees()))
                }
                SequenceStep::Dephase => {
                    rho = dephase(&rho);
                    "dephase".to_string()
                }
            };
            rows.push(step_row(k + 1, label, &rho));
        }
    }
    if let Some(path) = &a.out {
        write_csv(path, &rows)?;
    }
    let out = PulsesOut {
        steps: rows.len() - 1,
        populations: rho.populations(),
        density: MatrixJson::from_matrix(rho.matrix()),
        unitary: seq.as_ref().and_then(|s| s.unitary().ok()).map(|u| MatrixJson::from_matrix(&u)),
        entanglement: report(&rho)?,
    };
    RunRecord::new("pulses", a, &out)
}
