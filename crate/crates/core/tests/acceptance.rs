//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints one PASS/FAIL line; exits non-zero if any criterion fails.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::Instant;

use num_rational::BigRational;
use rand::seq::index;
use rand::Rng;

use sos_core::analysis::{
    analytic_denial_exact, analytic_denial_probability, enumerate_denial_exact, enumerate_denial_oracle,
    expected_walk_length, montecarlo_denial, LayerModel, RoleSets, ScenarioParams,
};
use sos_core::packet::DeliveryStatus;
use sos_core::ring::{NodeRecord, Overlay, RingId};
use sos_core::roles::derive_beacons;
use sos_core::seed::stream;
use sos_core::threat::{
    AllocationPolicy, AttackWindow, AttackerBudget, Congestion, HealingConfig, Scenario, ScheduledLoad, Simulation,
    StaticRandom,
};
use sos_core::world::{World, WorldConfig};
use sos_core::Address;

const SEED: u64 = 0x5eed;
const THREE: LayerModel = LayerModel::Three;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn singleton(nodes: usize, attacked: usize) -> ScenarioParams {
    ScenarioParams {
        nodes,
        soaps_per_user: 1,
        beacons: 1,
        servlets: 1,
        attacked,
        disjoint: true,
    }
}

fn linear_successor(ids: &[u64], key: u64) -> u64 {
    ids.iter()
        .copied()
        .filter(|&id| id >= key)
        .min()
        .unwrap_or_else(|| *ids.iter().min().unwrap())
}

fn chord_correctness() -> Outcome {
    let mut checked = 0u64;
    for n in 1..=64usize {
        let mut rng = stream(SEED, &format!("acceptance/chord/{n}"));
        let ids: Vec<u64> = index::sample(&mut rng, 256, n).into_iter().map(|i| i as u64).collect();
        let mut overlay = Overlay::new(8).map_err(|e| e.to_string())?;
        for &id in &ids {
            let rid = overlay.space().id(id).unwrap();
            overlay
                .join(NodeRecord::up(rid, Address::new(format!("n{id}"))))
                .unwrap();
        }
        for key in 0..256u64 {
            let k = overlay.space().id(key).unwrap();
            let expected = linear_successor(&ids, key);
            let got = overlay.lookup(k).map_err(|e| e.to_string())?.owner.value();
            if got != expected {
                return Err(format!("N={n} key={key}: owner {got}, oracle {expected}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} lookups match the linear scan"))
}

fn mean_path(n: usize) -> f64 {
    let mut overlay = Overlay::new(32).unwrap();
    let mut rng = stream(SEED, &format!("acceptance/routing/{n}"));
    while overlay.live_count() < n {
        let id = overlay.space().id(rng.random::<u32>() as u64).unwrap();
        let addr = Address::new(format!("n{}", id.value()));
        let _ = overlay.join(NodeRecord::up(id, addr));
    }
    let live: Vec<RingId> = overlay.live_ids().to_vec();
    let mut total = 0usize;
    let keys = 10_000;
    for _ in 0..keys {
        let start = live[rng.random_range(0..live.len())];
        let key = overlay.space().id(rng.random::<u32>() as u64).unwrap();
        total += overlay.lookup_from(start, key).unwrap().path.len();
    }
    total as f64 / keys as f64
}

fn logarithmic_routing() -> Outcome {
    let mut means = Vec::new();
    let mut ok = true;
    for n in [16usize, 64, 256] {
        let m = mean_path(n);
        ok &= m <= 2.0 * (n as f64).log2();
        means.push((n, m));
    }
    let ratio = means[2].1 / means[0].1;
    let detail = means
        .iter()
        .map(|(n, m)| format!("N={n}: {m:.3}"))
        .collect::<Vec<_>>()
        .join(", ");
    ensure(ok && ratio <= 3.0, format!("{detail}; ratio {ratio:.3}"))
}

fn analytic_equals_enumeration() -> Outcome {
    let mut cells = 0;
    let mut worst = 0.0f64;
    for n in 1..=16usize {
        for a in 1..=3 {
            for b in 1..=3 {
                for s in 1..=3 {
                    if a + b + s > n {
                        continue;
                    }
                    for k in 0..=4usize.min(n) {
                        let p = ScenarioParams {
                            nodes: n,
                            soaps_per_user: a,
                            beacons: b,
                            servlets: s,
                            attacked: k,
                            disjoint: true,
                        };
                        let analytic = analytic_denial_probability(&p, THREE).map_err(|e| e.to_string())?;
                        let brute = enumerate_denial_oracle(&p, &RoleSets::canonical(&p), THREE, 1_000_000)
                            .map_err(|e| e.to_string())?;
                        let gap = (analytic - brute).abs();
                        worst = worst.max(gap);
                        if gap > 1e-12 {
                            return Err(format!("{p:?}: analytic {analytic}, enumerated {brute}"));
                        }
                        cells += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{cells} cells, max gap {worst:e}"))
}

fn known_values() -> Outcome {
    let mut detail = Vec::new();
    for (n, k, num, den) in [(10usize, 1usize, 3i64, 10i64), (5, 2, 9, 10)] {
        let p = singleton(n, k);
        let want = BigRational::new(num.into(), den.into());
        let analytic = analytic_denial_exact(&p, THREE).map_err(|e| e.to_string())?;
        let brute =
            enumerate_denial_exact(&p, &RoleSets::canonical(&p), THREE, 1_000_000).map_err(|e| e.to_string())?;
        if analytic != want || brute != want {
            return Err(format!(
                "N={n} k={k}: analytic {analytic}, enumerated {brute}, expected {want}"
            ));
        }
        detail.push(format!("N={n} k={k} -> {want}"));
    }
    Ok(detail.join(", "))
}

fn montecarlo_calibration() -> Outcome {
    let p = singleton(10, 1);
    let roles = RoleSets::canonical(&p);
    let mut covered = 0;
    for s in 0..100u64 {
        let mut rng = stream(SEED + s, "acceptance/calibration");
        let est = montecarlo_denial(&p, &roles, THREE, 100_000, &mut rng).map_err(|e| e.to_string())?;
        if est.covers(0.3) {
            covered += 1;
        }
    }
    ensure(covered >= 95, format!("{covered}/100 intervals contain 0.3"))
}

fn resistance_grows_with_n() -> Outcome {
    let base = ScenarioParams {
        nodes: 10,
        soaps_per_user: 3,
        beacons: 3,
        servlets: 3,
        attacked: 6,
        disjoint: true,
    };
    let mut values = Vec::new();
    for n in [10usize, 20, 40, 80] {
        let p = ScenarioParams { nodes: n, ..base };
        let v = analytic_denial_probability(&p, THREE).map_err(|e| e.to_string())?;
        if n <= 20 {
            let brute =
                enumerate_denial_oracle(&p, &RoleSets::canonical(&p), THREE, 1_000_000).map_err(|e| e.to_string())?;
            if (v - brute).abs() > 1e-12 {
                return Err(format!("N={n}: analytic {v} vs enumerated {brute}"));
            }
        }
        values.push(v);
    }
    let detail = format!("{values:.6?}");
    ensure(values.windows(2).all(|w| w[1] < w[0]), detail)
}

fn filter_and_auth_soundness() -> Outcome {
    let cfg = WorldConfig {
        nodes: 30,
        soaps: 3,
        soaps_per_user: 2,
        beacons: 2,
        servlets: 2,
        users: 3,
        ..WorldConfig::default()
    };
    let world = World::build(&cfg, SEED, None).map_err(|e| e.to_string())?;
    let scenario = Scenario {
        attacker: Some(Box::new(StaticRandom::new(3, true))),
        budget: AttackerBudget::new(3 * cfg.capacity),
        window: AttackWindow::always(),
        inject_packets: true,
        duration: 10_000,
    };
    let trace = Simulation::new(world, scenario, SEED)
        .run()
        .map_err(|e| e.to_string())?;
    let sent: u64 = trace.summaries.iter().map(|s| u64::from(s.attacker_packets)).sum();
    let leaked = trace.attacker_delivered();
    let serviceable: Vec<_> = trace.records.iter().filter(|r| r.serviceable).collect();
    let delivered = serviceable
        .iter()
        .filter(|r| r.status == DeliveryStatus::Delivered)
        .count();
    ensure(
        sent > 0 && leaked == 0 && !serviceable.is_empty() && delivered == serviceable.len(),
        format!(
            "{leaked}/{sent} attacker packets delivered; {delivered}/{} serviceable legitimate packets delivered",
            serviceable.len()
        ),
    )
}

fn self_healing() -> Outcome {
    let healing = HealingConfig {
        enabled: true,
        repair_delay: 2,
        filter_latency: 1,
    };
    let cfg = WorldConfig {
        nodes: 16,
        soaps: 1,
        soaps_per_user: 1,
        beacons: 1,
        servlets: 1,
        healing,
        ..WorldConfig::default()
    };
    let world = World::build(&cfg, SEED, None).map_err(|e| e.to_string())?;
    let beacon = *world.roles.beacons.first().unwrap();
    let servlet = *world.roles.servlets.first().unwrap();
    let t = 10u64;
    let hit = |node| ScheduledLoad {
        node,
        load: cfg.capacity,
        from_epoch: t,
        until_epoch: t + 5,
    };
    let scenario = Scenario {
        attacker: Some(Box::new(Congestion {
            policy: AllocationPolicy::Explicit(vec![hit(beacon), hit(servlet)]),
        })),
        budget: AttackerBudget::new(2 * cfg.capacity),
        window: AttackWindow::always(),
        inject_packets: true,
        duration: t + 30,
    };
    let mut sim = Simulation::new(world, scenario, SEED);
    let trace = sim.run().map_err(|e| e.to_string())?;
    let hit_during = trace
        .records
        .iter()
        .any(|r| (t..t + 5).contains(&r.epoch) && r.status != DeliveryStatus::Delivered);
    let late: Vec<_> = trace.records.iter().filter(|r| r.epoch >= t + 8).collect();
    let late_ok = late.iter().all(|r| r.status == DeliveryStatus::Delivered);
    let fresh = derive_beacons(&sim.world.overlay, &sim.world.target, 1).map_err(|e| e.to_string())?;
    let beacon_ok = sim.world.roles.beacons == fresh;
    let first_bad = late
        .iter()
        .find(|r| r.status != DeliveryStatus::Delivered)
        .map(|r| r.epoch);
    ensure(
        late_ok && beacon_ok && trace.attacker_delivered() == 0,
        format!(
            "attack at t={t} denied service: {hit_during}; delivery from t+8 = {}; first failure after t+8: {first_bad:?}; beacon matches fresh derivation: {beacon_ok}",
            if late_ok { "1.0" } else { "<1.0" }
        ),
    )
}

fn random_walk_cost() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for (n, ns) in [(10usize, 1usize), (10, 5), (50, 5)] {
        let mut rng = stream(SEED, &format!("acceptance/walk/{n}/{ns}"));
        let r = expected_walk_length(n, ns, 100_000, &mut rng).map_err(|e| e.to_string())?;
        ok &= r.relative_gap <= 0.05;
        detail.push(format!(
            "(N={n}, N_s={ns}) mean {:.3} vs N/N_s {:.3} (N*N_s = {})",
            r.mean_contacted, r.geometric, r.product_form
        ));
    }
    ensure(ok, detail.join("; "))
}

fn reproducibility() -> Outcome {
    let work = std::env::temp_dir().join(format!("sos-acceptance-{}", std::process::id()));
    fs::create_dir_all(&work).map_err(|e| e.to_string())?;
    let scenario = work.join("scenario.json");
    fs::write(
        &scenario,
        r#"{
  "name": "repro",
  "overlay": {"nodes": 20},
  "roles": {"soaps_per_user": 2, "soap_pool": 3, "beacons": 2, "servlets": 2},
  "users": {"count": 2},
  "attack": {"model": "adaptive", "k": 3, "duration": 200},
  "analysis": {"trials": 50000, "sweep_nodes": [10, 20, 40]}
}"#,
    )
    .map_err(|e| e.to_string())?;
    let run = |dir: &str| -> Result<(), String> {
        let status = Command::new(env!("CARGO_BIN_EXE_sos-sim"))
            .args([
                "--mode",
                "compare",
                "--seed",
                "99",
                "--format",
                "csv,json,dat",
                "--scenario",
            ])
            .arg(&scenario)
            .arg("--out")
            .arg(work.join(dir))
            .env("RUST_LOG", "off")
            .status()
            .map_err(|e| e.to_string())?;
        if status.success() {
            Ok(())
        } else {
            Err(format!("sos-sim exited with {status}"))
        }
    };
    run("a")?;
    run("b")?;
    let mut compared = Vec::new();
    for file in ["comparison.csv", "epochs.csv", "result.json", "sweep.dat"] {
        let a = fs::read(work.join("a").join(file)).map_err(|e| e.to_string())?;
        let b = fs::read(work.join("b").join(file)).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{file} differs between runs"));
        }
        compared.push(format!("{file} ({} bytes)", a.len()));
    }
    let _ = fs::remove_dir_all(&work);
    Ok(format!("identical: {}", compared.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("chord lookup matches linear scan, N=1..64, m=8", chord_correctness),
        ("mean lookup path is logarithmic", logarithmic_routing),
        (
            "closed form equals enumeration on the exhaustive grid",
            analytic_equals_enumeration,
        ),
        ("known denial values 0.3 and 0.9", known_values),
        ("Monte Carlo 3-sigma intervals are calibrated", montecarlo_calibration),
        ("denial strictly decreases as N grows", resistance_grows_with_n),
        (
            "filter and token checks stop all attacker packets",
            filter_and_auth_soundness,
        ),
        ("overlay self-heals after beacon and servlet attack", self_healing),
        ("random-walk cost tracks N/N_s", random_walk_cost),
        ("compare runs are byte-identical", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2}: {name} [{secs:.2}s] {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name} [{secs:.2}s] {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
