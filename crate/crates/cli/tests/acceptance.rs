//! Acceptance run: one PASS/FAIL line per criterion with its wall time.
//! Built with `harness = false` so the lines show under plain `cargo test`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use qmac_core::channels::library;
use qmac_core::codesim::{block_channel, concatenate, et_to_eg, pad, product_channel, sample_hybrid_code, EtCode, LetterDims};
use qmac_core::entropic::effective_cqq_state;
use qmac_core::regions::{compound_rect, one_shot_region, timeshare_input, CodingInput, RateRegion};
use qmac_core::suites::{run_suite, Suite, SuiteConfig};
use qmac_core::{ComplexMatrix, CompoundSet, CqChannel, KrausChannel, PureState};

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Option<Duration>, Box<dyn FnOnce() -> Check + 'a>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn canonical() -> (Vec<f64>, CqChannel, PureState) {
    (vec![0.5, 0.5], CqChannel::computational_basis(2), PureState::maximally_entangled(2))
}

fn region_corners(dir: &Path, input: &Path, budget: &str, tag: &str) -> Vec<(f64, f64)> {
    let csv = dir.join(format!("{tag}.csv"));
    qmac_ok(&["region", "--input", s(input), "--budget", budget, "--out-csv", s(&csv)]);
    read_csv(&csv).iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect()
}

fn identity_region(dir: &Path) -> Check {
    let input = write_set(dir, "identity.json", &CompoundSet::singleton(identity_qmac()));
    let corners = region_corners(dir, &input, "50", "identity");
    ensure(corners.iter().any(|&(a, b)| a >= 0.98 && b >= 0.98), || format!("no corner dominates (0.98, 0.98): {corners:?}"))?;
    let (p, v, psi) = canonical();
    let r = one_shot_region(&identity_qmac(), &p, &v, &psi).map_err(|e| e.to_string())?;
    ensure((r.r1_max - 1.0).abs() < 1e-7 && (r.r2_max - 1.0).abs() < 1e-7, || format!("one-shot corner {r:?}"))?;
    Ok(format!("cli corners {corners:?}, one-shot ({:.9}, {:.9})", r.r1_max, r.r2_max))
}

fn compound_pair() -> Check {
    let set = CompoundSet::new(vec![identity_qmac(), on_b(library::dephasing(0.5).unwrap())], vec!["id".into(), "dephase".into()]).unwrap();
    let (p, v, psi) = canonical();
    let r = compound_rect(&set, 1, &p, &v, &psi).map_err(|e| e.to_string())?;
    ensure((r.r1_max - 1.0).abs() < 1e-7 && r.r2_max.abs() < 1e-7, || format!("compound corner {r:?}"))?;
    let config = SuiteConfig { instances: Some(100), ..SuiteConfig::new(0) };
    let mono = run_suite(Suite::CompoundMonotonicity, &config).map_err(|e| e.to_string())?;
    ensure(mono.passed && mono.violations == 0, || format!("{mono:?}"))?;
    Ok(format!("corner ({:.9}, {:.9}), monotonicity {} sets, {} violations", r.r1_max, r.r2_max, mono.instances, mono.violations))
}

fn erasure() -> Check {
    let t = on_b(library::erasure(2, 0.5).unwrap());
    ensure(t.out_dim() == 6, || format!("output dimension {}", t.out_dim()))?;
    let (p, v, psi) = canonical();
    let ic = effective_cqq_state(&t, &p, &v, &psi).and_then(|w| w.coherent_b_given_cx()).map_err(|e| e.to_string())?;
    ensure(ic.abs() < 1e-7, || format!("coherent information {ic:e}"))?;
    Ok(format!("I_c = {ic:.3e}"))
}

fn inequality_suites() -> Check {
    let config = SuiteConfig::new(0);
    let mut parts = Vec::new();
    for suite in [Suite::GentleMeasurement, Suite::PureFidelityContinuity, Suite::ProductFidelity, Suite::AlickiFannes] {
        let r = run_suite(suite, &config).map_err(|e| e.to_string())?;
        ensure(r.passed && r.instances >= 500, || format!("{r:?}"))?;
        parts.push(format!("{} {}/{} (margin {:.2e})", r.suite, r.instances - r.violations, r.instances, r.worst_margin));
    }
    Ok(parts.join(", "))
}

/// (1−q)·tr_B + q·tr_A on two qubits.
fn forgetful_mixer(q: f64) -> KrausChannel {
    let mut kraus = Vec::new();
    for j in 0..2 {
        kraus.push(ComplexMatrix::from_fn(2, 4, |o, i| if i == o * 2 + j { (1.0 - q).sqrt().into() } else { 0.0.into() }));
        kraus.push(ComplexMatrix::from_fn(2, 4, |o, i| if i == j * 2 + o { q.sqrt().into() } else { 0.0.into() }));
    }
    KrausChannel::new(kraus, vec![2, 2], vec![2]).unwrap()
}

fn time_sharing() -> Check {
    let set = CompoundSet::from_members(vec![forgetful_mixer(0.85), forgetful_mixer(0.9)]).unwrap();
    let classical = CodingInput::new(vec![0.5, 0.5], CqChannel::computational_basis(2), PureState::basis(4, 0).with_dims(vec![2, 2]).unwrap());
    let quantum = CodingInput::new(vec![1.0], CqChannel::from_pure(&[PureState::basis(2, 0)]).unwrap(), PureState::maximally_entangled(2));
    let rect = |l: usize, c: &CodingInput| compound_rect(&set, l, &c.p, &c.v, &c.psi).map_err(|e| e.to_string());
    let (ra, rb) = (rect(1, &classical)?, rect(1, &quantum)?);
    let mid = (0.5 * (ra.r1_max + rb.r1_max), 0.5 * (ra.r2_max + rb.r2_max));
    let (len, joint) = timeshare_input(&classical, 1, &quantum, 1, 2, 1).map_err(|e| e.to_string())?;
    let blocked = RateRegion::from(rect(len, &joint)?);
    ensure(blocked.contains_closed(mid, 0.05), || format!("{blocked:?} misses {mid:?}"))?;
    Ok(format!("midpoint ({:.4}, {:.4}) inside blocked corner {:?}", mid.0, mid.1, blocked.rects()))
}

fn random_code(rng: &mut ChaCha8Rng, m1: usize, m2: usize) -> EtCode {
    let classical = (0..m1)
        .map(|_| {
            let g = library::random_channel(1, 2, 2, rng);
            ComplexMatrix::from_fn(2, 2, |r, k| g.kraus()[k][(r, 0)])
        })
        .collect();
    EtCode::new(classical, library::random_channel(m2, 2, 2, rng), library::random_instrument(2, m2, m1, 2, rng)).unwrap()
}

fn random_mac(rng: &mut ChaCha8Rng) -> KrausChannel {
    library::random_channel(4, 2, 3, rng).with_dims(vec![2, 2], vec![2]).unwrap()
}

fn code_identities() -> Check {
    let err = |e: qmac_core::Error| e.to_string();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_gap = f64::INFINITY;
    let mut worst_defect = 0.0f64;
    let mut worst_identity = 0.0f64;
    for _ in 0..200 {
        let t = random_mac(&mut rng);
        let code = random_code(&mut rng, 2, 2);
        let eg = et_to_eg(&code, &t).map_err(err)?;
        let gap = eg.performance(&t).map_err(err)? - code.performance(&t).map_err(err)?;
        ensure(gap >= 0.0, || format!("generation below transmission by {gap:e}"))?;
        worst_gap = worst_gap.min(gap);
        worst_defect = worst_defect.max(code.completeness_defect()).max(eg.completeness_defect());
    }
    for _ in 0..20 {
        let t = random_mac(&mut rng);
        let code = random_code(&mut rng, 2, 2);
        let p = code.performance(&t).map_err(err)?;
        let padded = pad(&code, 1, LetterDims { a: 2, b: 2, c: 2 }).map_err(err)?;
        worst_identity = worst_identity.max((padded.performance(&block_channel(&t, 2).map_err(err)?).map_err(err)? - p).abs());
        let (t2, other) = (random_mac(&mut rng), random_code(&mut rng, 3, 2));
        let q = other.performance(&t2).map_err(err)?;
        let joint = concatenate(&[code, other]).map_err(err)?;
        worst_identity = worst_identity.max((joint.performance(&product_channel(&t, &t2).map_err(err)?).map_err(err)? - p * q).abs());
        worst_defect = worst_defect.max(padded.completeness_defect()).max(joint.completeness_defect());
    }
    let set = dephasing_pair(0.1);
    for seed in 0..10 {
        let inst = sample_hybrid_code(&set, &[0.5, 0.5], &CqChannel::computational_basis(2), 2, 2, 2, seed).map_err(err)?;
        worst_defect = worst_defect.max(inst.code.completeness_defect());
    }
    ensure(worst_identity < 1e-10, || format!("pad/concatenate off by {worst_identity:e}"))?;
    ensure(worst_defect < 1e-7, || format!("completeness defect {worst_defect:e}"))?;
    Ok(format!("min EG−ET gap {worst_gap:.3e}, identity error {worst_identity:.1e}, completeness {worst_defect:.1e}"))
}

fn simulation(dir: &Path) -> Check {
    let id = write_set(dir, "identity.json", &CompoundSet::singleton(identity_qmac()));
    let id_json = dir.join("sim-identity.json");
    qmac_ok(&["simulate", "--input", s(&id), "--n", "1", "--m1", "1", "--m2", "2", "--seeds", "5", "--p", "1,0", "--out-json", s(&id_json)]);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&id_json).unwrap()).unwrap();
    let worst = v["trend"][0]["worst_performance"].as_f64().unwrap();
    ensure((worst - 1.0).abs() < 1e-12, || format!("identity worst seed {worst}"))?;

    let pair = write_set(dir, "pair.json", &dephasing_pair(0.1));
    let json = dir.join("sim-pair.json");
    qmac_ok(&["simulate", "--input", s(&pair), "--n", "3", "--m1", "2", "--m2", "2", "--seeds", "100", "--out-json", s(&json)]);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    let best = v["trend"][0]["best_performance"].as_f64().unwrap();
    let violations = v["trend"][0]["chain_violations"].as_u64().unwrap();
    ensure(best >= 0.8 && violations == 0, || format!("best {best}, chain violations {violations}"))?;
    Ok(format!("identity {worst:.15}, pair best {best:.4} (seed {}), chain violations {violations}", v["trend"][0]["best_seed"]))
}

fn determinism(dir: &Path) -> Check {
    let pair = write_set(dir, "pair.json", &dephasing_pair(0.1));
    let mut compared = 0;
    for k in 0..2 {
        let tag = |ext: &str| dir.join(format!("run{k}.{ext}"));
        qmac_ok(&["region", "--input", s(&pair), "--budget", "5", "--seed", "3", "--out-csv", s(&tag("csv")), "--out-svg", s(&tag("svg")), "--out-json", s(&tag("region.json"))]);
        qmac_ok(&["simulate", "--input", s(&pair), "--n", "2", "--seeds", "10", "--seed", "3", "--out-json", s(&tag("sim.json")), "--out-csv", s(&tag("trend.csv"))]);
        qmac_ok(&["verify", "--seed", "3", "--instances", "50", "--out-json", s(&tag("verify.json"))]);
    }
    for ext in ["csv", "svg", "region.json", "sim.json", "trend.csv", "verify.json"] {
        let a = std::fs::read(dir.join(format!("run0.{ext}"))).unwrap();
        let b = std::fs::read(dir.join(format!("run1.{ext}"))).unwrap();
        ensure(a == b, || format!("{ext} differs between runs"))?;
        compared += 1;
    }
    Ok(format!("{compared} output files byte-identical"))
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let d = dir.path();
    let criteria: Vec<Criterion> = vec![
        ("identity region", Some(Duration::from_secs(10)), Box::new(|| identity_region(d))),
        ("compound identity + dephasing", None, Box::new(compound_pair)),
        ("erasure coherent information", Some(Duration::from_secs(1)), Box::new(erasure)),
        ("inequality suites", Some(Duration::from_secs(30)), Box::new(inequality_suites)),
        ("time sharing", Some(Duration::from_secs(60)), Box::new(time_sharing)),
        ("code identities", None, Box::new(code_identities)),
        ("simulator", Some(Duration::from_secs(120)), Box::new(|| simulation(d))),
        ("determinism", None, Box::new(|| determinism(d))),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(l)) if elapsed > l => Err(format!("took longer than {l:?}")),
            (o, _) => o,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        println!("criterion {} {tag} [{:>8.3} s] {name}: {detail}", i + 1, elapsed.as_secs_f64());
        failed += outcome.is_err() as usize;
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
