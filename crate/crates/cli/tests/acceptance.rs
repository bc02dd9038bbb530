//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero if any fail.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use ftqc_cli::rows::{from_csv, ConcatRow, SurfaceRow};
use ftqc_core::concat_cost::concat_physical_qubits;
use ftqc_core::gate_algebra::GateCounts;
use ftqc_core::sk::{BaseNet, NetParams, Synthesizer};
use ftqc_core::surface_cost::{
    distill_once, is_minimal_distance, total_cycles, total_cycles_closed, TimProblem,
};
use ftqc_core::tim_model::{trotter_error_bound, trotter_error_exact};
use rand::{Rng, SeedableRng};
use serde_json::Value;

struct Env {
    dir: PathBuf,
    cache: PathBuf,
    net: BaseNet<f64>,
}

impl Env {
    fn ftqc(&self, args: &[&str]) -> Result<String, String> {
        let o = Command::new(env!("CARGO_BIN_EXE_ftqc"))
            .current_dir(&self.dir)
            .env_remove("FTQC_CONFIG")
            .arg("--net-cache-path")
            .arg(&self.cache)
            .args(args)
            .output()
            .map_err(|e| e.to_string())?;
        if !o.status.success() {
            return Err(format!(
                "`ftqc {}` exited {:?}: {}",
                args.join(" "),
                o.status.code(),
                String::from_utf8_lossy(&o.stderr).trim()
            ));
        }
        Ok(String::from_utf8(o.stdout).expect("utf-8 output"))
    }

    fn json(&self, args: &[&str]) -> Result<Value, String> {
        serde_json::from_str(&self.ftqc(args)?).map_err(|e| e.to_string())
    }
}

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn surface_report(env: &Env, args: &[&str]) -> Result<Value, String> {
    let mut full = vec!["estimate", "surface"];
    full.extend_from_slice(args);
    Ok(env.json(&full)?["report"].clone())
}

fn criterion_1(env: &Env) -> Outcome {
    let start = Instant::now();
    let rep = surface_report(
        env,
        &[
            "-N",
            "100",
            "-M",
            "10",
            "--r",
            "1",
            "--p-ratio",
            "0.1",
            "--t-phys",
            "20e-9",
        ],
    )?;
    let secs = start.elapsed().as_secs_f64();
    let q = rep["physical_qubits"]
        .as_f64()
        .ok_or("missing physical_qubits")?;
    let hours = rep["wall_seconds"].as_f64().ok_or("missing wall_seconds")? / 3600.0;
    check(
        (1e6..=1e8).contains(&q) && (0.5..=50.0).contains(&hours) && secs < 600.0,
        format!("physical_qubits {q:.3e} in [1e6, 1e8], wall {hours:.3} h in [0.5, 50] h, runtime {secs:.2} s"),
    )
}

fn criterion_2(env: &Env) -> Outcome {
    let days = |m: &str| -> Result<f64, String> {
        let rep = surface_report(
            env,
            &[
                "-N",
                "100",
                "-M",
                m,
                "--p-ratio",
                "0.03",
                "--t-phys",
                "1e-5",
            ],
        )?;
        Ok(rep["wall_seconds"].as_f64().ok_or("missing wall_seconds")? / 86400.0)
    };
    let w10 = days("10")?;
    let w16 = days("16")?;
    let ratio = w16 / w10;
    check(
        (10.0..=1e3).contains(&w10) && (1e3..=1e5).contains(&w16) && (32.0..=128.0).contains(&ratio),
        format!(
            "wall(M=10) {w10:.1} days in [10, 1000]; wall(M=16) {w16:.4e} days in [1e3, 1e5]; ratio {ratio:.1} in [32, 128]"
        ),
    )
}

fn criterion_3(env: &Env) -> Outcome {
    let text = env.ftqc(&[
        "sweep",
        "surface",
        "-N",
        "100",
        "-M",
        "4..14",
        "--r",
        "0.1,0.5,1",
    ])?;
    let rows: Vec<SurfaceRow> = from_csv(&text).map_err(|e| e.to_string())?;
    let mut problems = Vec::new();
    if rows.len() != 33 {
        problems.push(format!("expected 33 rows, got {}", rows.len()));
    }
    let d_of = |r: f64, m: u32| {
        rows.iter()
            .find(|row| row.r == r && row.m == m)
            .and_then(|row| row.d)
    };
    for &r in &[0.1, 0.5, 1.0] {
        for m in 4..14 {
            match (d_of(r, m), d_of(r, m + 1)) {
                (Some(a), Some(b)) if b >= a => {}
                other => problems.push(format!("d not non-decreasing at r={r}, M={m}: {other:?}")),
            }
        }
    }
    for m in 4..=14 {
        if !matches!((d_of(0.1, m), d_of(1.0, m)), (Some(a), Some(b)) if a >= b) {
            problems.push(format!("d(r=0.1) < d(r=1) at M={m}"));
        }
    }
    for row in &rows {
        let (Some(d), Some(k0), Some(n_h), Some(n_s), Some(n_t)) =
            (row.d, row.k0, row.n_h, row.n_s, row.n_t)
        else {
            problems.push(format!(
                "row r={} M={} failed: {:?}",
                row.r, row.m, row.error
            ));
            continue;
        };
        let mut prob = TimProblem::new(row.n, row.m);
        prob.r = row.r;
        prob.p_ratio = row.p_ratio;
        let counts = GateCounts::new(n_h, n_s, n_t);
        let minimal = is_minimal_distance(&prob, k0, &counts, d).map_err(|e| e.to_string())?;
        if d % 2 == 0 || d < 3 || !minimal {
            problems.push(format!(
                "d={d} at r={} M={} not odd and minimal",
                row.r, row.m
            ));
        }
    }
    let d_range = |r: f64| {
        format!(
            "{:?}..{:?}",
            d_of(r, 4).unwrap_or(0),
            d_of(r, 14).unwrap_or(0)
        )
    };
    check(
        problems.is_empty(),
        if problems.is_empty() {
            format!(
                "33 points, d monotone in M, d(r=0.1) >= d(r=1), all odd and minimal; d range r=1 {} r=0.1 {}",
                d_range(1.0),
                d_range(0.1)
            )
        } else {
            problems.join("; ")
        },
    )
}

fn criterion_4(env: &Env) -> Outcome {
    let text = env.ftqc(&["sweep", "concat", "-N", "100", "-M", "1..12"])?;
    let rows: Vec<ConcatRow> = from_csv(&text).map_err(|e| e.to_string())?;
    let mut problems = Vec::new();
    for row in &rows {
        let expect = row.m >= 5;
        if row.ec_needed != Some(expect) {
            problems.push(format!("ec_needed at M={} is {:?}", row.m, row.ec_needed));
        }
    }
    let k: Vec<f64> = rows.iter().map(|r| r.k.unwrap_or(f64::NAN)).collect();
    let steps: Vec<f64> = k.windows(2).map(|w| w[1] / w[0]).collect();
    if !steps.iter().all(|&s| s >= 1.0) {
        problems.push(format!("K not non-decreasing: {k:?}"));
    }
    // M = 4 -> 5 is steps[3]; it must dominate every other step
    let jump = steps.get(3).copied().unwrap_or(f64::NAN);
    let other = steps
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != 3)
        .map(|(_, &s)| s)
        .fold(0.0, f64::max);
    if !(jump > 10.0 * other) {
        problems.push(format!(
            "K jump at the flip {jump:.3e} not dominant (max other step {other:.3e})"
        ));
    }
    let level2 = rows.iter().find(|r| r.level == Some(2));
    let q2 = level2.and_then(|r| r.physical_qubits);
    if q2 != Some(176_400) || concat_physical_qubits(400, 2) != 176_400 {
        problems.push(format!("level-2 qubits {q2:?} != 176400"));
    }
    check(
        problems.is_empty(),
        if problems.is_empty() {
            format!("ec flips at M=5, K jump x{jump:.3e} (other steps <= x{other:.2}), level-2 qubits 176400")
        } else {
            problems.join("; ")
        },
    )
}

/// Independent 2×2 complex re-multiplication from gate labels.
mod oracle {
    type C = (f64, f64);

    fn mul(a: C, b: C) -> C {
        (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
    }

    fn add(a: C, b: C) -> C {
        (a.0 + b.0, a.1 + b.1)
    }

    fn cis(x: f64) -> C {
        (x.cos(), x.sin())
    }

    type M = [[C; 2]; 2];

    fn matmul(a: &M, b: &M) -> M {
        let mut out = [[(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = add(mul(a[i][0], b[0][j]), mul(a[i][1], b[1][j]));
            }
        }
        out
    }

    fn gate(label: &str) -> M {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = (0.0, 0.0);
        let one = (1.0, 0.0);
        let diag = |phase: f64| [[one, z], [z, cis(phase)]];
        let q = std::f64::consts::FRAC_PI_4;
        match label {
            "I" => diag(0.0),
            "H" => [[(s, 0.0), (s, 0.0)], [(s, 0.0), (-s, 0.0)]],
            "S" => diag(2.0 * q),
            "Sdg" => diag(-2.0 * q),
            "T" => diag(q),
            "Tdg" => diag(-q),
            "X" => [[z, one], [one, z]],
            "Y" => [[z, (0.0, -1.0)], [(0.0, 1.0), z]],
            "Z" => diag(4.0 * q),
            other => panic!("unknown gate label {other}"),
        }
    }

    /// Phase-invariant distance `sqrt(2 − |tr(R_z(θ)† U)|)` to the sequence product.
    pub fn distance_to_rz(theta: f64, seq: &str) -> f64 {
        let mut u: M = gate("I");
        for g in seq.split_whitespace().filter(|g| *g != "-") {
            u = matmul(&gate(g), &u);
        }
        let tr = add(
            mul(cis(theta / 2.0), u[0][0]),
            mul(cis(-theta / 2.0), u[1][1]),
        );
        (2.0 - (tr.0 * tr.0 + tr.1 * tr.1).sqrt()).max(0.0).sqrt()
    }
}

fn criterion_5(env: &Env) -> Outcome {
    let start = Instant::now();
    let synth = Synthesizer::new(&env.net);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
    let angles: Vec<f64> = (0..100).map(|_| rng.random_range(-PI..PI)).collect();
    let mut failures = Vec::new();
    let mut worst = [0.0f64; 3];
    for (i, &eps) in [1e-2, 1e-3, 1e-4].iter().enumerate() {
        for &theta in &angles {
            match synth.compile_rz(theta, eps) {
                Ok(rot) => {
                    let d = oracle::distance_to_rz(theta, &rot.seq.to_ascii());
                    worst[i] = worst[i].max(d / eps);
                    if !(d <= eps) {
                        failures.push(format!("theta={theta} eps={eps}: re-multiplied {d:.3e}"));
                    }
                }
                Err(e) => failures.push(format!("theta={theta} eps={eps}: {e}")),
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        failures.is_empty() && secs < 600.0,
        format!(
            "{} of 300 compiles failed; worst achieved/eps {:.3} {:.3} {:.3}; runtime {secs:.1} s{}",
            failures.len(),
            worst[0],
            worst[1],
            worst[2],
            failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut violations = Vec::new();
    for n in 2..=6 {
        for &t in &[0.25, 0.5, 1.0] {
            for &k in &[4u64, 8, 16, 32, 64] {
                let exact = trotter_error_exact(n, t, k).map_err(|e| e.to_string())?;
                let bound = trotter_error_bound(n, t, k);
                if !(bound >= exact) {
                    violations.push(format!(
                        "N={n} t={t} k={k}: bound {bound:.3e} < exact {exact:.3e}"
                    ));
                }
            }
        }
    }
    // least-squares slope of log error against log k
    let pts: Vec<(f64, f64)> = [4u64, 8, 16, 32, 64]
        .iter()
        .map(|&k| Ok(((k as f64).ln(), trotter_error_exact(2, 1.0, k)?.ln())))
        .collect::<ftqc_core::Result<_>>()
        .map_err(|e| e.to_string())?;
    let n = pts.len() as f64;
    let (sx, sy) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let cov: f64 = pts.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = pts.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    let alpha = -cov / var;
    check(
        violations.is_empty() && (1.7..=2.3).contains(&alpha),
        format!(
            "{} bound violations over 75 grid points; alpha {alpha:.4} in [1.7, 2.3]{}",
            violations.len(),
            violations
                .first()
                .map(|v| format!("; first: {v}"))
                .unwrap_or_default()
        ),
    )
}

fn criterion_7(env: &Env) -> Outcome {
    let runs = |args: &[&str]| -> Result<Vec<Value>, String> {
        env.ftqc(args)?
            .lines()
            .map(|l| serde_json::from_str(l).map_err(|e| e.to_string()))
            .collect()
    };
    let e0 = -(5.0f64).sqrt();
    let exact8 = runs(&[
        "simulate", "-N", "2", "-M", "8", "--mode", "exact", "--seeds", "10", "--seed", "0",
    ])?;
    let mut within = 0;
    let mut energies = Vec::new();
    for r in &exact8 {
        let tau = r["tau"].as_f64().ok_or("missing tau")?;
        let e = r["energy_estimate"].as_f64().ok_or("missing energy")?;
        let step = 2.0 * PI / (tau * 256.0);
        if (e - e0).abs() <= step + 1e-12 {
            within += 1;
        }
        energies.push(format!("{e:.4}"));
    }
    let a = runs(&[
        "simulate", "-N", "2", "-M", "6", "--mode", "exact", "--seeds", "20", "--seed", "0",
    ])?;
    let b = runs(&[
        "simulate", "-N", "2", "-M", "6", "--mode", "trotter", "--seeds", "20", "--seed", "0",
    ])?;
    let matched = a
        .iter()
        .zip(&b)
        .filter(|(x, y)| x["bits"] == y["bits"])
        .count();
    let k0 = b.first().map(|r| r["k0"].clone()).unwrap_or(Value::Null);
    check(
        within == 10 && exact8.len() == 10 && matched * 10 >= 9 * 20,
        format!(
            "M=8 exact: {within}/10 seeds within one grid step of -sqrt(5) (estimates {}); M=6 trotter (k0 {k0}) matches exact bits in {matched}/20 seeds",
            energies.join(" ")
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut worst: f64 = 0.0;
    for &(k0, s_r, d) in &[(1u64, 3.796e6, 23u32), (57, 1234.5, 3), (1000, 5e4, 41)] {
        for m in 1..=20 {
            let a: f64 = total_cycles(m, k0, s_r, d);
            let b: f64 = total_cycles_closed(m, k0, s_r, d);
            worst = worst.max((a - b).abs() / b.abs());
        }
    }
    let p = 0.01f64;
    let once = distill_once(p);
    let twice = distill_once(once);
    let oracle1 = 35.0 * 1e-6;
    let oracle2 = 35f64.powi(4) * 1e-18;
    let rel1 = (once - oracle1).abs() / oracle1;
    let rel2 = (twice - oracle2).abs() / oracle2;
    // "exactly" within double rounding: a few ulps of the product chain
    let ulps = 4.0 * f64::EPSILON;
    check(
        worst <= 1e-12 && rel1 <= ulps && rel2 <= ulps,
        format!(
            "cycle sum vs closed form max rel diff {worst:.2e} (<= 1e-12); 35p^3 rel {rel1:.1e}, 35^4 p^9 rel {rel2:.1e} (<= {ulps:.1e})"
        ),
    )
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let dir = tmp.path().to_path_buf();
    let cache = dir.join("net.cache");
    let net = BaseNet::build(NetParams::default()).expect("default net");
    net.save(&cache).expect("write net cache");
    let env = Env { dir, cache, net };
    assert!(Path::new(&env.cache).exists());

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (
            "surface N=100 M=10 magnitudes",
            Box::new(|| criterion_1(&env)),
        ),
        (
            "surface slow-hardware wall times",
            Box::new(|| criterion_2(&env)),
        ),
        (
            "code distance shape over M and r",
            Box::new(|| criterion_3(&env)),
        ),
        (
            "concatenated-code error-correction onset",
            Box::new(|| criterion_4(&env)),
        ),
        (
            "rotation synthesis certification",
            Box::new(|| criterion_5(&env)),
        ),
        ("Trotter bound soundness and order", Box::new(criterion_6)),
        (
            "phase estimation end to end",
            Box::new(|| criterion_7(&env)),
        ),
        (
            "cycle sum and distillation identities",
            Box::new(criterion_8),
        ),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} PASS [{name}] {detail} ({secs:.1} s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL [{name}] {detail} ({secs:.1} s)", i + 1)
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
