//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if a criterion fails that is not listed in `KNOWN_FAILURES`.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use taxgame::expcli::{
    preset, run_experiment, run_to_dir, ExperimentConfig, ResultRow, RunOptions, Scale,
    PRESET_NAMES,
};
use taxgame::game::{classify, critical_alpha, redistributed_matrix, GameClass};
use taxgame::network::NetworkKind;
use taxgame::redistribution::{compute_fitness, fitness_of};
use taxgame::seed::{derive, rng_from_seed};
use taxgame::{
    AssignmentRule, BeneficiaryAssignment, GameParams, PopulationState, Strategy, TaxPolicy,
};

/// Criteria that do not hold for this model at desk scale. They still run
/// and print FAIL; see the README for the measured values.
const KNOWN_FAILURES: [u32; 3] = [5, 9, 11];

const SCALE_FREE: NetworkKind = NetworkKind::ScaleFree { m: 2 };
const HOMOGENEOUS: NetworkKind = NetworkKind::HomogeneousRandom { degree: 4 };

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

/// Desk-scale simulation study: Z = 200, 100 replicates over 5 networks.
fn study(
    networks: &[NetworkKind],
    rules: &[AssignmentRule],
    theta: &[f64],
    alpha: &[f64],
    temptation: &[f64],
    adjust: impl FnOnce(&mut ExperimentConfig),
) -> Vec<ResultRow> {
    let mut cfg = preset("fig4", Scale::Desk).unwrap();
    cfg.name = "acceptance".into();
    cfg.networks = networks.to_vec();
    cfg.grid.assignment = rules.to_vec();
    cfg.grid.theta = theta.to_vec();
    cfg.grid.alpha = alpha.to_vec();
    cfg.grid.temptation = temptation.to_vec();
    adjust(&mut cfg);
    run_experiment(&cfg, &RunOptions::default())
        .unwrap()
        .cells()
        .unwrap()
        .to_vec()
}

fn cell(
    rows: &[ResultRow],
    kind: NetworkKind,
    rule: AssignmentRule,
    alpha: f64,
    t: f64,
) -> &ResultRow {
    let label = kind.to_string();
    rows.iter()
        .find(|r| {
            r.network == label && r.assignment == rule && r.alpha == alpha && r.temptation == t
        })
        .unwrap_or_else(|| panic!("no row for {label} {rule} alpha={alpha} T={t}"))
}

fn coop(row: &ResultRow) -> (f64, f64) {
    (row.cooperation_level.unwrap(), row.coop_stderr.unwrap())
}

/// `b` is not below `a` by more than two combined standard errors.
fn not_below(a: (f64, f64), b: (f64, f64)) -> bool {
    b.0 >= a.0 - 2.0 * (a.1 * a.1 + b.1 * b.1).sqrt()
}

fn analytic_exactness() -> Verdict {
    let thetas = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut checked = 0;
    for k in 1..=50 {
        let t = 1.0 + k as f64 / 50.0;
        let game = GameParams::new(t).unwrap();
        for &theta in &thetas {
            let star = critical_alpha(t, theta).unwrap();
            let class = |a: f64| classify(&redistributed_matrix(&game, a, theta).unwrap());
            if class(star - 1e-9) != GameClass::PrisonersDilemma {
                return verdict(
                    false,
                    format!("T={t} theta={theta}: not PD just below alpha*={star}"),
                );
            }
            if star + 1e-9 <= 1.0 && class(star + 1e-9) != GameClass::Harmony {
                return verdict(
                    false,
                    format!("T={t} theta={theta}: not Harmony just above alpha*={star}"),
                );
            }
            // alpha = 1 is excluded: at theta = 0 it ties T' with P and S' with R
            for step in 0..1000 {
                let a = step as f64 / 1000.0;
                let expected = if a < star - 1e-9 {
                    GameClass::PrisonersDilemma
                } else if a > star + 1e-9 {
                    GameClass::Harmony
                } else {
                    continue;
                };
                if class(a) != expected {
                    return verdict(
                        false,
                        format!("T={t} theta={theta} alpha={a}: {:?}", class(a)),
                    );
                }
                checked += 1;
            }
        }
    }
    verdict(
        true,
        format!("250 (T, theta) pairs, {checked} grid points on the expected side"),
    )
}

struct Instance {
    net: taxgame::Network,
    game: GameParams,
    strategies: Vec<Strategy>,
    assignment: BeneficiaryAssignment,
    policy: TaxPolicy,
}

fn random_instance(seed: u64, max_population: usize) -> Instance {
    let mut rng = rng_from_seed(seed);
    let kind = if rng.random::<bool>() {
        NetworkKind::HomogeneousRandom {
            degree: rng.random_range(2..=6),
        }
    } else {
        NetworkKind::ScaleFree {
            m: rng.random_range(1..=3),
        }
    };
    let z = rng.random_range(8..=max_population / 2) * 2;
    let net = kind.generate(z, &mut rng).unwrap();
    let game = GameParams::new(rng.random_range(1.0..2.0) + 1e-6).unwrap();
    let strategies = (0..z)
        .map(|_| {
            if rng.random::<bool>() {
                Strategy::Cooperate
            } else {
                Strategy::Defect
            }
        })
        .collect();
    let rule = match rng.random_range(0..3) {
        0 => AssignmentRule::Nearest,
        1 => AssignmentRule::Random,
        _ => AssignmentRule::Extended {
            d: rng.random_range(1..=3),
        },
    };
    let assignment = BeneficiaryAssignment::assign(&net, rule, &mut rng).unwrap();
    let policy = TaxPolicy {
        alpha: rng.random_range(0.0..=1.0),
        theta: rng.random_range(0.0..3.0),
        brackets: rng.random_range(0..=5),
        legacy_two_bracket: rng.random::<bool>(),
    };
    Instance {
        net,
        game,
        strategies,
        assignment,
        policy,
    }
}

fn conservation() -> Verdict {
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let inst = random_instance(derive(2, &[k]), 200);
        let state = PopulationState::new(&inst.net, inst.strategies, &inst.game);
        let fitness = compute_fitness(state.payoffs(), &inst.assignment, &inst.policy).unwrap();
        let gap = (fitness.iter().sum::<f64>() - state.payoffs().iter().sum::<f64>()).abs();
        let z = inst.net.node_count() as f64;
        worst = worst.max(gap / z);
        if gap > 1e-9 * z {
            return verdict(
                false,
                format!("instance {k}: |sum f - sum payoff| = {gap:e}"),
            );
        }
    }
    verdict(true, format!("1000 instances, worst gap / Z = {worst:.1e}"))
}

fn oracle_equivalence() -> Verdict {
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let inst = random_instance(derive(3, &[k]), 30);
        let t = inst.game.temptation();
        let n = inst.net.node_count();
        let mut state = PopulationState::new(&inst.net, inst.strategies.clone(), &inst.game);
        let mut rng = rng_from_seed(derive(3, &[k, 1]));
        for _ in 0..rng.random_range(0..3 * n) {
            let i = rng.random_range(0..n);
            let s = if state.strategy(i).is_cooperator() {
                Strategy::Defect
            } else {
                Strategy::Cooperate
            };
            state.flip(i, s, &inst.net, &inst.game);
        }
        let payoffs = common::payoffs(&inst.net, state.strategies(), t);
        let sets = common::beneficiaries(&inst.net, &inst.assignment);
        let p = &inst.policy;
        let expected = common::ledger_fitness(
            &payoffs,
            &sets,
            p.alpha,
            p.theta,
            p.brackets,
            p.legacy_two_bracket,
        );
        for i in 0..n {
            let cache_gap = (state.payoffs()[i] - payoffs[i]).abs();
            let fitness_gap =
                (fitness_of(i, state.payoffs(), &inst.assignment, p) - expected[i]).abs();
            worst = worst.max(cache_gap).max(fitness_gap);
            if cache_gap > 1e-12 || fitness_gap > 1e-12 {
                return verdict(
                    false,
                    format!("instance {k} agent {i}: cache {cache_gap:e}, fitness {fitness_gap:e}"),
                );
            }
        }
    }
    verdict(
        true,
        format!("1000 instances, Z <= 30, worst gap {worst:.1e}"),
    )
}

fn defector_dominance() -> Verdict {
    let rows = study(
        &[HOMOGENEOUS, SCALE_FREE],
        &[AssignmentRule::Nearest],
        &[1.0],
        &[0.0],
        &[1.5],
        |_| {},
    );
    let levels: Vec<(String, f64)> = rows
        .iter()
        .map(|r| (r.network.clone(), coop(r).0))
        .collect();
    let pass = levels.iter().all(|(_, c)| *c <= 0.05);
    verdict(pass, format!("cooperation {levels:?}, bound 0.05"))
}

const SWEEP: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

/// theta = 1, T = 1.2 over the full alpha axis on both network kinds.
fn alpha_sweep() -> Vec<ResultRow> {
    study(
        &[HOMOGENEOUS, SCALE_FREE],
        &[AssignmentRule::Nearest],
        &[1.0],
        &SWEEP,
        &[1.2],
        |_| {},
    )
}

fn redistribution_rescue(sweep: &[ResultRow]) -> Verdict {
    let alphas = [0.0, 0.2, 0.4, 0.6, 0.8];
    let levels: Vec<(f64, f64)> = alphas
        .iter()
        .map(|&a| coop(cell(sweep, SCALE_FREE, AssignmentRule::Nearest, a, 1.2)))
        .collect();
    let gain = levels[4].0 - levels[0].0;
    let monotone = levels.windows(2).all(|w| not_below(w[0], w[1]));
    let shown: Vec<String> = levels.iter().map(|(c, _)| format!("{c:.2}")).collect();
    verdict(
        gain >= 0.5 && monotone,
        format!(
            "cooperation at alpha 0..0.8: [{}], gain {gain:.2} (need >= 0.5), monotone {monotone}",
            shown.join(", ")
        ),
    )
}

fn heterogeneous_advantage(sweep: &[ResultRow]) -> Verdict {
    let sf = coop(cell(sweep, SCALE_FREE, AssignmentRule::Nearest, 0.6, 1.2)).0;
    let hom = coop(cell(sweep, HOMOGENEOUS, AssignmentRule::Nearest, 0.6, 1.2)).0;
    verdict(
        sf >= hom - 0.05,
        format!("scale-free {sf:.3}, homogeneous {hom:.3}"),
    )
}

const LOCALITY_T: [f64; 3] = [1.2, 1.5, 1.8];

fn locality_study() -> Vec<ResultRow> {
    let rules = [
        AssignmentRule::Nearest,
        AssignmentRule::Random,
        AssignmentRule::Extended { d: 1 },
        AssignmentRule::Extended { d: 2 },
        AssignmentRule::Extended { d: 4 },
    ];
    study(
        &[HOMOGENEOUS, SCALE_FREE],
        &rules,
        &[0.5],
        &[0.9],
        &LOCALITY_T,
        |_| {},
    )
}

fn nearest_beats_random(rows: &[ResultRow]) -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for kind in [HOMOGENEOUS, SCALE_FREE] {
        let mut widest: f64 = f64::NEG_INFINITY;
        for t in LOCALITY_T {
            let near = coop(cell(rows, kind, AssignmentRule::Nearest, 0.9, t)).0;
            let rand = coop(cell(rows, kind, AssignmentRule::Random, 0.9, t)).0;
            pass &= near >= rand;
            widest = widest.max(near - rand);
        }
        pass &= widest >= 0.2;
        notes.push(format!("{kind} widest gap {widest:.2}"));
    }
    verdict(pass, notes.join(", "))
}

fn locality_optimum(rows: &[ResultRow]) -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for kind in [HOMOGENEOUS, SCALE_FREE] {
        for t in LOCALITY_T {
            let levels: Vec<(f64, f64)> = [1, 2, 4]
                .iter()
                .map(|&d| coop(cell(rows, kind, AssignmentRule::Extended { d }, 0.9, t)))
                .collect();
            pass &= levels.windows(2).all(|w| not_below(w[1], w[0]));
            let shown: Vec<String> = levels.iter().map(|(c, _)| format!("{c:.2}")).collect();
            notes.push(format!("{kind} T={t} [{}]", shown.join(" ")));
        }
    }
    verdict(pass, notes.join("; "))
}

/// The swept alpha whose cooperation level is nearest 0.5, provided the
/// sweep crosses 0.5 at all.
fn near_critical(sweep: &[ResultRow], kind: NetworkKind) -> Option<f64> {
    let levels: Vec<(f64, f64)> = SWEEP
        .iter()
        .map(|&a| {
            (
                a,
                coop(cell(sweep, kind, AssignmentRule::Nearest, a, 1.2)).0,
            )
        })
        .collect();
    let below = levels.iter().any(|&(_, c)| c < 0.5);
    let above = levels.iter().any(|&(_, c)| c >= 0.5);
    if !(below && above) {
        return None;
    }
    levels
        .iter()
        .min_by(|x, y| (x.1 - 0.5).abs().total_cmp(&(y.1 - 0.5).abs()))
        .map(|&(a, _)| a)
}

fn fixation_peak(sweep: &[ResultRow]) -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for kind in [SCALE_FREE, HOMOGENEOUS] {
        let time = |a: f64| cell(sweep, kind, AssignmentRule::Nearest, a, 1.2).fixation_time_mean;
        match near_critical(sweep, kind) {
            Some(critical) if critical > 0.2 && critical < 0.9 => {
                let (low, mid, high) = (time(0.2), time(critical), time(0.9));
                let ok = matches!((low, mid, high), (Some(l), Some(m), Some(h)) if m > l && m > h);
                pass &= ok;
                notes.push(format!(
                    "{kind} critical alpha {critical}: times {:.1} / {:.1} / {:.1}",
                    low.unwrap_or(f64::NAN),
                    mid.unwrap_or(f64::NAN),
                    high.unwrap_or(f64::NAN)
                ));
            }
            other => {
                pass = false;
                let times: Vec<String> = SWEEP
                    .iter()
                    .map(|&a| format!("{:.0}", time(a).unwrap_or(f64::NAN)))
                    .collect();
                notes.push(format!(
                    "{kind} no interior crossing of 0.5 (nearest {other:?}); times over alpha [{}]",
                    times.join(" ")
                ));
            }
        }
    }
    verdict(pass, notes.join("; "))
}

fn neutral_drift() -> Verdict {
    let rows = study(
        &[HOMOGENEOUS, SCALE_FREE],
        &[AssignmentRule::Nearest],
        &[1.0],
        &[0.0],
        &[1.5],
        |cfg| {
            cfg.population = 100;
            cfg.beta = 0.0;
            cfg.replicates_per_cell = 400;
            cfg.max_iterations = 5_000_000;
        },
    );
    let mut pass = true;
    let mut notes = Vec::new();
    for row in &rows {
        let fixed = row.coop_fixation_count.unwrap() as f64 / row.replicate_count.unwrap() as f64;
        pass &= (fixed - 0.5).abs() <= 0.1;
        notes.push(format!(
            "{} {fixed:.3} ({} unfixed)",
            row.network,
            row.unfixed_count.unwrap()
        ));
    }
    verdict(pass, notes.join(", "))
}

fn inequality_reduction() -> Verdict {
    let mut cfg = preset("fig10", Scale::Desk).unwrap();
    cfg.grid.alpha = SWEEP.to_vec();
    let rows = run_experiment(&cfg, &RunOptions::default())
        .unwrap()
        .cells()
        .unwrap()
        .to_vec();
    let ratio = |r: &ResultRow| r.variance_ratio.unwrap();
    let untaxed_exact = rows
        .iter()
        .filter(|r| r.alpha == 0.0)
        .all(|r| ratio(r) == 1.0);
    let top: Vec<f64> = rows.iter().filter(|r| r.theta == 2.0).map(ratio).collect();
    let monotone = top.windows(2).all(|w| w[1] <= w[0]);
    let floor = *top.last().unwrap();
    verdict(
        untaxed_exact && monotone && floor <= 0.15,
        format!("ratio 1 at alpha 0: {untaxed_exact}, nonincreasing: {monotone}, ratio at (2.0, 1.0) {floor:.4} (need <= 0.15)"),
    )
}

fn bracket_neutrality() -> Verdict {
    let run = |brackets: u32, legacy: bool| {
        let rows = study(
            &[SCALE_FREE],
            &[AssignmentRule::Nearest],
            &[1.0],
            &[0.8],
            &[1.2],
            |cfg| {
                cfg.grid.brackets = vec![brackets];
                cfg.legacy_two_bracket = legacy;
            },
        );
        coop(&rows[0]).0
    };
    let legacy = run(2, true);
    let three = run(3, false);
    verdict(
        (three - legacy).abs() <= 0.15,
        format!("B=2 legacy {legacy:.3}, B=3 {three:.3}"),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    for name in PRESET_NAMES {
        let mut cfg = preset(name, Scale::Desk).unwrap();
        cfg.population = cfg.population.min(60);
        cfg.replicates_per_cell = 4;
        cfg.network_instances = 2;
        cfg.max_iterations = 20_000;
        let out = dir.path().join(name);
        let first = run_to_dir(
            &cfg,
            &out,
            &RunOptions {
                workers: Some(1),
                ..Default::default()
            },
        )
        .unwrap();
        let bytes = std::fs::read(&first).unwrap();
        let config = std::fs::read(out.join("config.json")).unwrap();
        let second = run_to_dir(
            &cfg,
            &out,
            &RunOptions {
                workers: Some(3),
                ..Default::default()
            },
        )
        .unwrap();
        if std::fs::read(&second).unwrap() != bytes
            || std::fs::read(out.join("config.json")).unwrap() != config
        {
            return verdict(false, format!("{name}: output changed between runs"));
        }
    }
    verdict(
        true,
        format!("{} presets rerun byte-identically", PRESET_NAMES.len()),
    )
}

struct Criterion {
    id: u32,
    name: &'static str,
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut results = Vec::new();
    // `shared` is time already spent on a study that several criteria read
    let mut record = |id: u32,
                      name: &'static str,
                      limit: Duration,
                      shared: Duration,
                      check: &mut dyn FnMut() -> Verdict| {
        let started = Instant::now();
        let v = check();
        let elapsed = shared + started.elapsed();
        let pass = v.pass && elapsed <= limit;
        println!(
            "{} {:>2} {:<28} {:>7.2}s  {}",
            if pass { "PASS" } else { "FAIL" },
            id,
            name,
            elapsed.as_secs_f64(),
            v.detail
        );
        if v.pass && elapsed > limit {
            println!("        over the {:.0}s time budget", limit.as_secs_f64());
        }
        results.push((Criterion { id, name }, pass));
    };

    record(
        1,
        "analytic exactness",
        secs(1),
        Duration::ZERO,
        &mut analytic_exactness,
    );
    record(
        2,
        "conservation",
        secs(10),
        Duration::ZERO,
        &mut conservation,
    );
    record(
        3,
        "oracle equivalence",
        secs(30),
        Duration::ZERO,
        &mut oracle_equivalence,
    );
    record(
        4,
        "defector dominance",
        secs(120),
        Duration::ZERO,
        &mut defector_dominance,
    );

    let started = Instant::now();
    let sweep = alpha_sweep();
    let sweep_time = started.elapsed();
    record(
        5,
        "redistribution rescue",
        secs(600),
        sweep_time,
        &mut || redistribution_rescue(&sweep),
    );
    record(
        6,
        "heterogeneous advantage",
        secs(300),
        sweep_time,
        &mut || heterogeneous_advantage(&sweep),
    );

    let started = Instant::now();
    let locality = locality_study();
    let locality_time = started.elapsed();
    record(
        7,
        "nearest beats random",
        secs(600),
        locality_time,
        &mut || nearest_beats_random(&locality),
    );
    record(8, "locality optimum", secs(600), locality_time, &mut || {
        locality_optimum(&locality)
    });
    record(9, "fixation-time peak", secs(600), sweep_time, &mut || {
        fixation_peak(&sweep)
    });
    record(
        10,
        "neutral drift",
        secs(120),
        Duration::ZERO,
        &mut neutral_drift,
    );
    record(
        11,
        "inequality reduction",
        secs(60),
        Duration::ZERO,
        &mut inequality_reduction,
    );
    record(
        12,
        "bracket near-neutrality",
        secs(600),
        Duration::ZERO,
        &mut bracket_neutrality,
    );
    record(
        13,
        "determinism",
        secs(120),
        Duration::ZERO,
        &mut determinism,
    );

    let passed = results.iter().filter(|(_, p)| *p).count();
    println!("{passed}/{} criteria pass", results.len());
    let unexpected: Vec<u32> = results
        .iter()
        .filter(|(c, p)| !p && !KNOWN_FAILURES.contains(&c.id))
        .map(|(c, _)| c.id)
        .collect();
    for (c, p) in &results {
        if *p && KNOWN_FAILURES.contains(&c.id) {
            println!(
                "criterion {} ({}) now passes; update KNOWN_FAILURES",
                c.id, c.name
            );
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
