//! Acceptance criteria 1-7. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spine_rectify::centerline::{extract_centerline, from_uniform_points, CenterlineConfig};
use spine_rectify::config::RunConfig;
use spine_rectify::heatmap::{splat_gaussian, VertebraAnnotation};
use spine_rectify::metrics::{identify_matches, report, Outcome, VertebraPrediction};
use spine_rectify::optimize::{
    brute_force_solve, expansion_candidate, expansion_op, regularizer, solve, EnergyConfig, LabelingState, Mode,
    Problem, SolveConfig, SolveOutcome, DEFAULT_BUDGET,
};
use spine_rectify::pipeline::{Pipeline, Prepared};
use spine_rectify::rectify::{map_back, rectified_signals, rectify_grid, RectifyConfig, Signal1D, SignalSet};
use spine_rectify::synth::{generate, NoiseSpec, PhantomSpec, RandomRun};
use spine_rectify::volume::{ActivationStack, Geometry, Vec3, VolumeGrid};
use std::time::{Duration, Instant};

// Tolerances and corpus sizes.
const C1_INSTANCES: u64 = 100;
const C1_ENERGY_REL_TOL: f64 = 0.05;
const C1_MIN_SHARE: f64 = 0.90;
const C1_TIME_LIMIT: Duration = Duration::from_secs(60);
const C2_PHANTOMS: u64 = 100;
const C2_MAX_MEAN_ERR_MM: f64 = 2.0;
const C2_TIME_LIMIT: Duration = Duration::from_secs(300);
const C3_PHANTOMS: u64 = 100;
const C3_MIN_GAIN_PP: f64 = 10.0;
const C3_MIN_OPTIM_PCT: f64 = 95.0;
const C5_FRAME_TOL: f64 = 1e-9;
const C5_IDENTITY_TOL: f64 = 1e-6;
const C5_LINEARITY_TOL: f64 = 1e-9;
const C6_TOL: f64 = 1e-9;
const MAX_ITERS: usize = 50;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// Every solve trace observed by criteria 1-3.
#[derive(Default)]
struct Traces {
    outcomes: Vec<SolveOutcome>,
}

fn noisy_spec() -> PhantomSpec {
    PhantomSpec {
        noise: NoiseSpec {
            label_shift_prob: 0.2,
            dropout_prob: 0.05,
            jitter_sigma_mm: 2.0,
            ..NoiseSpec::default()
        },
        ..PhantomSpec::default()
    }
}

fn id_pct(outcomes: &[Outcome]) -> f64 {
    100.0 * report(outcomes).overall.id_rate.unwrap_or(0.0)
}

/// Solves the oriented signals the way the optim mode does.
fn solve_prepared(prepared: &Prepared, energy: &EnergyConfig, cfg: &SolveConfig) -> SolveOutcome {
    let s = &prepared.oriented;
    let p = Problem::new(&s.channels, energy).unwrap();
    solve(&p, &s.q_hat, cfg).unwrap()
}

// ---------------------------------------------------------------- 1

fn bump(len: usize, center: f64, amp: f64, sigma: f64) -> Signal1D {
    Signal1D::new(
        (0..len).map(|i| amp * (-(i as f64 - center).powi(2) / (2.0 * sigma * sigma)).exp()).collect(),
        1.0,
    )
}

/// V_max 6, 50 samples, 2-4 true vertebrae with label-shift echoes and a
/// low floor of clutter. Gaps stay above the 10-sample peak separation.
fn oracle_instance(seed: u64) -> (Vec<Signal1D>, Signal1D) {
    let (v_max, len) = (6usize, 50usize);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=4usize);
    let v_l = rng.random_range(1..=v_max + 1 - n);
    let mut centers = vec![rng.random_range(3.0..6.0)];
    for _ in 1..n {
        let last = *centers.last().unwrap();
        centers.push(last + rng.random_range(11.0..14.0));
    }
    let mut channels: Vec<Signal1D> = (0..v_max)
        .map(|_| Signal1D::new((0..len).map(|_| rng.random_range(0.0..2.0)).collect(), 1.0))
        .collect();
    for (j, &c) in centers.iter().enumerate() {
        let v = v_l + j;
        let amp = rng.random_range(20.0..60.0);
        channels[v - 1] = channels[v - 1].add(&bump(len, c, amp, 2.0));
        if rng.random_bool(0.3) {
            let nb = if j + 1 < n && (j == 0 || rng.random_bool(0.5)) { centers[j + 1] } else { centers[j.saturating_sub(1)] };
            channels[v - 1] = channels[v - 1].add(&bump(len, nb, amp * rng.random_range(0.3..0.7), 2.0));
        }
    }
    let q_hat = channels.iter().fold(Signal1D::zeros(len, 1.0), |acc, c| acc.add(c));
    (channels, q_hat)
}

fn criterion_1(traces: &mut Traces) -> Verdict {
    let start = Instant::now();
    let cfg = EnergyConfig::anchored(6);
    let mut close = 0;
    let mut violations = 0;
    let mut worst = 0.0f64;
    for seed in 0..C1_INSTANCES {
        let (channels, q_hat) = oracle_instance(seed);
        let p = Problem::new(&channels, &cfg).unwrap();
        let out = solve(&p, &q_hat, &SolveConfig::default()).unwrap();
        let oracle = brute_force_solve(&p, 6, 1.0, DEFAULT_BUDGET).unwrap();
        let s = &out.best;
        let valid = s.check(6, 50).is_ok() && p.energy(s.v_l, &s.k).is_ok_and(|e| (e - s.energy).abs() < 1e-9);
        if !valid {
            violations += 1;
        }
        let rel = (s.energy - oracle.energy).abs() / oracle.energy.abs();
        worst = worst.max(rel);
        if rel <= C1_ENERGY_REL_TOL {
            close += 1;
        }
        traces.outcomes.push(out);
    }
    let elapsed = start.elapsed();
    let share = close as f64 / C1_INSTANCES as f64;
    verdict(
        share >= C1_MIN_SHARE && violations == 0 && elapsed < C1_TIME_LIMIT,
        format!(
            "{close}/{C1_INSTANCES} within {:.0}% of the oracle (need {:.0}%), worst {:.1}%, {violations} constraint violations, {:.1}s",
            100.0 * C1_ENERGY_REL_TOL,
            100.0 * C1_MIN_SHARE,
            100.0 * worst,
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- 2

fn consecutive(preds: &[VertebraPrediction]) -> bool {
    preds.windows(2).all(|w| w[1].label == w[0].label + 1)
}

fn criterion_2(traces: &mut Traces) -> Verdict {
    let start = Instant::now();
    let pipeline = Pipeline::new(RunConfig::default());
    let solve_cfg = pipeline.config().solve();
    let mut outcomes = Vec::new();
    let mut bad_order = 0;
    for seed in 0..C2_PHANTOMS {
        let phantom = generate(&PhantomSpec::default().random(seed, &RandomRun::default())).unwrap();
        let prepared = pipeline.prepare(&phantom.stack).unwrap();
        let inf = pipeline.decode(&phantom.stack, &prepared, Mode::Optim).unwrap();
        if !(consecutive(&inf.predictions) && inf.anatomically_plausible) {
            bad_order += 1;
        }
        outcomes.extend(identify_matches(&inf.predictions, &phantom.truth).unwrap());
        let energy = pipeline.config().energy(prepared.oriented.v_max());
        traces.outcomes.push(solve_prepared(&prepared, &energy, &solve_cfg));
    }
    let elapsed = start.elapsed();
    let r = report(&outcomes);
    let id = id_pct(&outcomes);
    let mean = r.overall.mean_error_mm.unwrap_or(f64::INFINITY);
    verdict(
        id == 100.0 && mean <= C2_MAX_MEAN_ERR_MM && bad_order == 0 && elapsed < C2_TIME_LIMIT,
        format!(
            "id {id:.2}% ({}/{}), mean error {mean:.2} mm (max {C2_MAX_MEAN_ERR_MM}), {bad_order} non-consecutive outputs, {:.1}s",
            r.overall.identified,
            r.overall.total,
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- 3

fn criterion_3(traces: &mut Traces) -> Verdict {
    let pipeline = Pipeline::new(RunConfig::default());
    let solve_cfg = pipeline.config().solve();
    let mut per_mode = vec![Vec::new(); Mode::ALL.len()];
    for seed in 0..C3_PHANTOMS {
        let phantom = generate(&noisy_spec().random(seed, &RandomRun::default())).unwrap();
        let prepared = pipeline.prepare(&phantom.stack).unwrap();
        for (m, mode) in Mode::ALL.iter().enumerate() {
            let inf = pipeline.decode(&phantom.stack, &prepared, *mode).unwrap();
            per_mode[m].extend(identify_matches(&inf.predictions, &phantom.truth).unwrap());
        }
        let energy = pipeline.config().energy(prepared.oriented.v_max());
        traces.outcomes.push(solve_prepared(&prepared, &energy, &solve_cfg));
    }
    let rates: Vec<f64> = per_mode.iter().map(|o| id_pct(o)).collect();
    let rate = |m: Mode| rates[Mode::ALL.iter().position(|x| *x == m).unwrap()];
    let (base, order, optim) = (rate(Mode::Base), rate(Mode::Order), rate(Mode::Optim));
    verdict(
        base < order && order < optim && optim - base >= C3_MIN_GAIN_PP && optim >= C3_MIN_OPTIM_PCT,
        format!(
            "base {base:.2}% < order {order:.2}% < optim {optim:.2}% (base+rect {:.2}%), gain {:.2} pp (need {C3_MIN_GAIN_PP}), optim need {C3_MIN_OPTIM_PCT}%",
            rate(Mode::Rect),
            optim - base
        ),
    )
}

// ---------------------------------------------------------------- 4

/// Some anchor channel with activation is below its maximum where `state`
/// puts that label, or the label is missing from `state`.
fn anchors_disagree(signals: &SignalSet, state: &LabelingState, anchors: &[usize]) -> bool {
    anchors.iter().any(|&a| {
        let ch = signals.channel(a);
        if ch.max() <= 0.0 {
            return false;
        }
        match state.labels().position(|l| l == a) {
            Some(i) => ch.at(state.k[i]) < ch.max() - 1e-9,
            None => true,
        }
    })
}

fn criterion_4() -> Verdict {
    let anchored = Pipeline::new(RunConfig::default());
    let uniform = Pipeline::new(RunConfig {
        anchor_weight: 1.0,
        ..RunConfig::default()
    });
    let anchors = anchored.config().anchors().unwrap();
    let runs = RandomRun {
        require_anchor: true,
        ..RandomRun::default()
    };
    let solve_cfg = anchored.config().solve();
    let (mut out_a, mut out_u) = (Vec::new(), Vec::new());
    let (mut changed, mut unexplained) = (0, Vec::new());
    for seed in 0..C3_PHANTOMS {
        let phantom = generate(&noisy_spec().random(seed, &runs)).unwrap();
        let prepared = anchored.prepare(&phantom.stack).unwrap();
        for (pipeline, out) in [(&anchored, &mut out_a), (&uniform, &mut out_u)] {
            let inf = pipeline.decode(&phantom.stack, &prepared, Mode::Optim).unwrap();
            out.extend(identify_matches(&inf.predictions, &phantom.truth).unwrap());
        }
        // each energy's argmin, estimated as the lower of the two searches' results
        let s = &prepared.oriented;
        let (ea, eu) = (anchored.config().energy(s.v_max()), uniform.config().energy(s.v_max()));
        let (pa, pu) = (Problem::new(&s.channels, &ea).unwrap(), Problem::new(&s.channels, &eu).unwrap());
        let sa = solve(&pa, &s.q_hat, &solve_cfg).unwrap().best;
        let su = solve(&pu, &s.q_hat, &solve_cfg).unwrap().best;
        let argmin = |p: &Problem| {
            if p.energy(su.v_l, &su.k).unwrap() <= p.energy(sa.v_l, &sa.k).unwrap() {
                &su
            } else {
                &sa
            }
        };
        let (min_a, min_u) = (argmin(&pa), argmin(&pu));
        if (min_a.v_l, &min_a.k) != (min_u.v_l, &min_u.k) {
            changed += 1;
            if !anchors_disagree(s, min_u, &anchors) {
                unexplained.push(seed);
            }
        }
    }
    let (ra, ru) = (id_pct(&out_a), id_pct(&out_u));
    verdict(
        ra >= ru && unexplained.is_empty(),
        format!(
            "anchor weight 2 id {ra:.2}% vs uniform {ru:.2}%; argmin changed on {changed} cases, {} with agreeing anchors {unexplained:?}",
            unexplained.len()
        ),
    )
}

// ---------------------------------------------------------------- 5

fn criterion_5() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;

    // frames along a traced, curved centerline
    let phantom = generate(&PhantomSpec {
        curve: spine_rectify::synth::CurveSpec {
            amplitude_mm: 30.0,
            bow_mm: 10.0,
            ..Default::default()
        },
        ..PhantomSpec::default()
    })
    .unwrap();
    let g_hat = phantom.stack.combine();
    let c = extract_centerline(&g_hat, &CenterlineConfig::default()).unwrap();
    let mut frame_err = 0.0f64;
    for s in c.samples() {
        let (e1, e2, e3) = (s.e1, s.e2, s.e3);
        for x in [e1.norm() - 1.0, e2.norm() - 1.0, e3.norm() - 1.0, e1.dot(&e2), e1.dot(&e3), e2.dot(&e3)] {
            frame_err = frame_err.max(x.abs());
        }
        frame_err = frame_err.max((e1.dot(&e2.cross(&e3)) - 1.0).abs());
    }
    pass &= frame_err < C5_FRAME_TOL;
    notes.push(format!("frame error {frame_err:.1e}"));

    // straight centerline through voxel centers: rectification copies voxels
    let g = Geometry::new([15, 15, 20], [1.0; 3], [0.0; 3]).unwrap();
    let grid = VolumeGrid::from_world_fn(g, |p| (p.x * 0.3).sin().abs() + p.y * 0.1 + p.z * 0.05).unwrap();
    let line = from_uniform_points((0..20).map(|i| Vec3::new(7.0, 7.0, i as f64)).collect(), 1.0).unwrap();
    let line = spine_rectify::centerline::compute_frames(line);
    let rcfg = RectifyConfig {
        delta_mm: 1.0,
        cross_half_extent_mm: 5.0,
        smooth_sigma_samples: None,
    };
    let r = rectify_grid(&grid, &line, &rcfg);
    let mut ident = 0.0f64;
    for z in 0..20 {
        for y in 0..11 {
            for x in 0..11 {
                ident = ident.max((r.get(x, y, z) - grid.get(x + 2, y + 2, z)).abs());
            }
        }
    }
    pass &= ident < C5_IDENTITY_TOL;
    notes.push(format!("straight identity {ident:.1e}"));

    // blobs on the traced centerline come back within delta + step
    let rcfg = RunConfig::default().rectify();
    let mut stack_channels = vec![VolumeGrid::zeros(*phantom.stack.geometry()); 26];
    let picks = [c.len() / 5, c.len() / 2, 4 * c.len() / 5];
    for (j, &i) in picks.iter().enumerate() {
        splat_gaussian(&mut stack_channels[j], &c.samples()[i].point, 4.0, 1.0);
    }
    let on_line = ActivationStack::new(stack_channels).unwrap();
    let signals = rectified_signals(&on_line, &on_line.combine(), &c, &RectifyConfig { smooth_sigma_samples: None, ..rcfg });
    let mut round_trip = 0.0f64;
    for (j, &i) in picks.iter().enumerate() {
        let k = signals.channel(j + 1).argmax().unwrap();
        round_trip = round_trip.max((map_back(k as f64, &c).unwrap() - c.samples()[i].point).norm());
    }
    let bound = rcfg.delta_mm + c.step();
    pass &= round_trip <= bound;
    notes.push(format!("map_back {round_trip:.2} mm <= {bound:.2}"));

    // combining channels and plane sums are linear
    let stack = &phantom.stack;
    let sum: Vec<f64> = (0..g_hat.data().len())
        .map(|i| stack.channels().iter().map(|ch| ch.data()[i]).sum())
        .collect();
    let comb = g_hat.data().iter().zip(&sum).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let sig = rectified_signals(stack, &g_hat, &c, &RectifyConfig { smooth_sigma_samples: None, ..rcfg });
    let mut agg = 0.0f64;
    for z in 0..sig.len() {
        let total: f64 = sig.channels.iter().map(|ch| ch.values()[z]).sum();
        agg = agg.max((sig.q_hat.values()[z] - total).abs() / sig.q_hat.max());
    }
    pass &= comb < C5_LINEARITY_TOL && agg < C5_LINEARITY_TOL;
    notes.push(format!("linearity {comb:.1e} / {agg:.1e}"));

    verdict(pass, notes.join(", "))
}

// ---------------------------------------------------------------- 6

fn reference_energy(channels: &[Signal1D], lambda: &[f64], v_l: usize, k: &[f64]) -> f64 {
    let interp = |s: &Signal1D, x: f64| {
        let i = x.floor() as usize;
        let f = x - i as f64;
        let v = s.values();
        if f == 0.0 {
            v[i]
        } else {
            v[i] * (1.0 - f) + v[i + 1] * f
        }
    };
    let mut e = 0.0;
    for (i, &ki) in k.iter().enumerate() {
        let v = v_l + i;
        e -= lambda[v - 1] * interp(&channels[v - 1], ki);
    }
    for i in 1..k.len().saturating_sub(1) {
        let (a, b) = (k[i] - k[i - 1], k[i + 1] - k[i]);
        e += (a / b).max(b / a).exp();
    }
    e
}

fn criterion_6() -> Verdict {
    let mut failures = Vec::new();
    let e = std::f64::consts::E;
    let r = |a, b| regularizer(a, b).unwrap();
    if (r(5.0, 5.0) - e).abs() > C6_TOL || (r(3.0, 6.0) - e * e).abs() > C6_TOL || (r(2.0, 7.0) - r(7.0, 2.0)).abs() > C6_TOL {
        failures.push("regularizer values");
    }
    if regularizer(0.0, 1.0).is_ok() {
        failures.push("zero gap accepted");
    }

    // energy against the reference on random states
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (v_max, len) = (26, 120);
    let channels: Vec<Signal1D> = (0..v_max)
        .map(|_| Signal1D::new((0..len).map(|_| rng.random_range(0.0..10.0)).collect(), 1.0))
        .collect();
    let cfg = EnergyConfig::anchored(v_max);
    let p = Problem::new(&channels, &cfg).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..=12usize);
        let v_l = rng.random_range(1..=v_max + 1 - n);
        let mut k: Vec<f64> = (0..n).map(|_| (rng.random_range(0.0..(len - 1) as f64) * 2.0).round() / 2.0).collect();
        k.sort_by(f64::total_cmp);
        k.dedup();
        let Ok(got) = p.energy(v_l, &k) else { continue };
        // relative: wide gap ratios make R astronomically large
        worst = worst.max((got - reference_energy(&channels, &cfg.lambda, v_l, &k)).abs() / got.abs().max(1.0));
    }
    if worst > C6_TOL {
        failures.push("energy mismatch");
    }

    // expansion inserts a midpoint and picks the best gap
    if expansion_candidate(&[0.0, 10.0, 30.0], 1) != vec![0.0, 10.0, 20.0, 30.0] {
        failures.push("midpoint");
    }
    let st = p.state(3, vec![10.0, 20.0, 40.0, 70.0]).unwrap();
    let exp = expansion_op(&p, &st);
    let best_gap = (0..3)
        .map(|u| p.energy(3, &expansion_candidate(&st.k, u)).unwrap())
        .fold(f64::INFINITY, f64::min);
    if exp.n() != 5 || exp.v_l != 3 || (exp.energy - best_gap).abs() > C6_TOL {
        failures.push("expansion choice");
    }

    // mutual-closest within 20 mm
    let at = |z: f64| Vec3::new(0.0, 0.0, z);
    let truth: Vec<VertebraAnnotation> = [(10, 100.0), (11, 75.0), (12, 50.0), (13, 25.0)]
        .into_iter()
        .map(|(label, z)| VertebraAnnotation { label, center: at(z) })
        .collect();
    let pred = |label, z| VertebraPrediction {
        label,
        center: at(z),
        activation: 1.0,
    };
    let preds = vec![
        pred(10, 103.0), // hit
        pred(11, 52.0),  // closer to truth 12
        pred(12, 30.0),  // closest truth is 13
        pred(13, 1.0),   // 24 mm away
    ];
    let out = identify_matches(&preds, &truth).unwrap();
    let ids: Vec<bool> = out.iter().map(|o| o.identified).collect();
    if ids != vec![true, false, false, false] {
        failures.push("metric");
    }
    let exact = identify_matches(&[pred(10, 119.5)], &truth[..1]).unwrap();
    if !exact[0].identified {
        failures.push("metric radius");
    }

    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!("regularizer, energy (max rel diff {worst:.1e}), expansion and metric checks hold")
        } else {
            format!("failed: {failures:?} (energy diff {worst:.3e})")
        },
    )
}

// ---------------------------------------------------------------- 7

fn criterion_7(traces: &Traces) -> Verdict {
    let bad = traces
        .outcomes
        .iter()
        .filter(|o| o.iterations > MAX_ITERS || o.accepted.windows(2).any(|w| !(w[1] < w[0])))
        .count();
    let most = traces.outcomes.iter().map(|o| o.iterations).max().unwrap_or(0);
    verdict(
        bad == 0 && !traces.outcomes.is_empty(),
        format!("{} traces, {bad} non-monotone or over {MAX_ITERS} iterations, most iterations {most}", traces.outcomes.len()),
    )
}

fn main() {
    let mut traces = Traces::default();
    let results = [
        ("1 oracle equivalence", criterion_1(&mut traces)),
        ("2 clean-phantom exactness", criterion_2(&mut traces)),
        ("3 ablation ordering", criterion_3(&mut traces)),
        ("4 anchor weights", criterion_4()),
        ("5 geometry invariants", criterion_5()),
        ("6 formula checks", criterion_6()),
        ("7 monotone convergence", criterion_7(&traces)),
    ];
    let mut failed = 0;
    for (name, v) in &results {
        println!("{} criterion {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
