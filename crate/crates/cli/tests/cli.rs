use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lchzk::lch::{compile, LchInstance, LchTerm, VGate, VerificationCircuit};
use lchzk::pauli_clifford::CliffordCircuit;
use lchzk::selftest;
use serde_json::Value;
use tempfile::TempDir;

fn lchzk(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lchzk")).current_dir(dir).args(args).output().expect("spawn lchzk")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, v: &T) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn last_verdict(p: &Path) -> String {
    let text = fs::read_to_string(p).unwrap();
    let last: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["kind"], "verdict");
    last["payload"]["verdict"].as_str().unwrap().to_owned()
}

/// One `|0⟩⟨0|` term on qubit 0: `|1⟩` has zero energy.
fn zero_projector_instance(dir: &Path) -> PathBuf {
    let inst = LchInstance::new(1, 1, vec![LchTerm::new(vec![0], CliffordCircuit::new(1)).unwrap()], 4, 2).unwrap();
    write_json(dir, "zero.json", &inst)
}

/// Instance and zero-energy witness used by the built-in checks.
fn perfect_files(dir: &Path) -> (PathBuf, PathBuf) {
    let (inst, w) = selftest::perfect_instance().unwrap();
    (write_json(dir, "perfect.json", &inst), write_json(dir, "perfect_witness.json", &w))
}

fn witness_arg(p: &Path) -> String {
    format!("state:{}", p.display())
}

#[test]
fn compile_single_lambda_p_matches_library_counts() {
    let dir = TempDir::new().unwrap();
    let v = VerificationCircuit::new(1, 1, 0, vec![VGate::ControlledPhase(0, 1)]).unwrap();
    let circuit = write_json(dir.path(), "c.json", &v);
    let o = lchzk(dir.path(), &["compile", circuit.to_str().unwrap(), "-p", "8", "-o", "inst.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("propagation 4"), "{}", stderr(&o));
    let got = read_json(&dir.path().join("inst.json"));
    let want = serde_json::to_value(compile(&v, 8).unwrap()).unwrap();
    assert_eq!(got, want);
    let counts = &got["metadata"]["term_counts"];
    assert_eq!(counts["propagation"], 4);
    let penalty = ["input", "output", "clock"].iter().map(|k| counts[k].as_u64().unwrap()).sum::<u64>();
    assert!(penalty > 0);
    assert_eq!(got["terms"].as_array().unwrap().len() as u64, 4 + penalty);
}

#[test]
fn compile_empty_circuit_has_only_penalty_terms() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("e.json"), r#"{"witness":1,"ancilla":1,"output":0,"gates":[]}"#).unwrap();
    let o = lchzk(dir.path(), &["compile", "e.json", "-p", "8", "-o", "inst.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let got = read_json(&dir.path().join("inst.json"));
    assert_eq!(got["metadata"]["term_counts"]["propagation"], 0);
    assert!(!got["terms"].as_array().unwrap().is_empty());
}

#[test]
fn compile_malformed_gate_reports_position() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.json"), "{\"witness\":1,\"ancilla\":1,\"output\":0,\n\"gates\":[[\"QQ\",0,1]]}").unwrap();
    let o = lchzk(dir.path(), &["compile", "bad.json", "-p", "8"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bad.json:2:"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn compile_rejects_small_p() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("c.json"), r#"{"witness":1,"ancilla":1,"output":0,"gates":[["CP",0,1]]}"#).unwrap();
    let o = lchzk(dir.path(), &["compile", "c.json", "-p", "3"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn honest_run_accepts_perfect_witness() {
    let dir = TempDir::new().unwrap();
    let inst = zero_projector_instance(dir.path());
    for t in ["1", "2"] {
        let o = lchzk(dir.path(), &["run", inst.to_str().unwrap(), "--witness", "bits:1", "--t-level", t, "-o", "t.jsonl"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert_eq!(last_verdict(&dir.path().join("t.jsonl")), "accept");
    }
    let (inst, w) = perfect_files(dir.path());
    for seed in 0..5 {
        let seed = seed.to_string();
        let args = ["run", inst.to_str().unwrap(), "--witness", &witness_arg(&w), "--seed", &seed, "-o", "p.jsonl"];
        let o = lchzk(dir.path(), &args);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
}

#[test]
fn compiled_history_state_run_accepts() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("c.json"), r#"{"witness":1,"ancilla":1,"output":0,"gates":[["CP",0,1]]}"#).unwrap();
    assert_eq!(code(&lchzk(dir.path(), &["compile", "c.json", "-p", "8", "-o", "inst.json"])), 0);
    let o = lchzk(dir.path(), &["run", "inst.json", "--witness", "history:1", "--circuit", "c.json", "-o", "t.jsonl"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = lchzk(dir.path(), &["run", "inst.json", "--witness", "history:1", "--circuit", "c.json", "--exact", "-o", "x.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let exact = read_json(&dir.path().join("x.json"));
    assert!((exact["accept_probability"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn exact_mode_on_mixed_witness() {
    let dir = TempDir::new().unwrap();
    let inst = zero_projector_instance(dir.path());
    let o = lchzk(dir.path(), &["run", inst.to_str().unwrap(), "--witness", "mixed", "--exact", "-o", "x.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let exact = read_json(&dir.path().join("x.json"));
    assert!((exact["accept_probability"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn heavy_mask_aborts_with_exit_1() {
    let dir = TempDir::new().unwrap();
    let (inst, w) = perfect_files(dir.path());
    for seed in 0..5 {
        let seed = seed.to_string();
        let args = [
            "run",
            inst.to_str().unwrap(),
            "--witness",
            &witness_arg(&w),
            "--adversary",
            "xor:w40",
            "--seed",
            &seed,
            "-o",
            "t.jsonl",
        ];
        let o = lchzk(dir.path(), &args);
        assert_eq!(code(&o), 1, "{}", stderr(&o));
        let t = dir.path().join("t.jsonl");
        assert_eq!(last_verdict(&t), "abort");
        assert!(fs::read_to_string(&t).unwrap().contains(r#""role":"prover","kind":"abort""#));
    }
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let (inst, w) = perfect_files(dir.path());
    let inst = inst.to_str().unwrap();
    let wit = witness_arg(&w);
    let runs: [Vec<&str>; 4] = [
        vec!["run", inst, "--witness", &wit, "--seed", "7"],
        vec!["run", inst, "--witness", "mixed", "--seed", "7", "--adversary", "xor:w3"],
        vec!["attack", inst, "--term", "1", "--adversary", "xor:w5", "--samples", "500", "--seed", "7"],
        vec!["analyze", "zk", inst, "--witness", &wit, "--samples", "500", "--seed", "7"],
    ];
    for args in runs {
        let a = lchzk(dir.path(), &args);
        let b = lchzk(dir.path(), &args);
        assert!(!a.stdout.is_empty(), "{args:?}: {}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(code(&a), code(&b));
    }
    let a = lchzk(dir.path(), &["run", inst, "--witness", &wit, "--seed", "7"]);
    let c = lchzk(dir.path(), &["run", inst, "--witness", &wit, "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

fn secret_strings(p: &Path) -> Vec<String> {
    let key = read_json(p);
    let mut out: Vec<String> = ["traps", "a", "b", "salt"].iter().map(|k| key[k].as_str().unwrap().to_owned()).collect();
    out.push(serde_json::to_string(&key["perm"]).unwrap());
    out
}

fn files_in(dir: &Path) -> Vec<(PathBuf, String)> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.to_string_lossy().ends_with(".secrets.json") {
            continue;
        }
        out.push((p.clone(), String::from_utf8_lossy(&fs::read(&p).unwrap()).into_owned()));
    }
    out
}

#[test]
fn key_material_stays_out_of_outputs() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let (inst, w) = perfect_files(d);
    let inst = inst.to_str().unwrap();
    let wit = witness_arg(&w);

    let plain = lchzk(d, &["run", inst, "--witness", &wit, "--seed", "3", "-o", "plain.jsonl"]);
    assert_eq!(code(&plain), 0, "{}", stderr(&plain));
    assert!(!d.join("plain.jsonl.secrets.json").exists());
    assert!(fs::read_dir(d).unwrap().all(|e| !e.unwrap().path().to_string_lossy().ends_with(".secrets.json")));

    let o = lchzk(d, &["run", inst, "--witness", &wit, "--seed", "3", "--export-secrets", "-o", "run.jsonl"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read(d.join("plain.jsonl")).unwrap(), fs::read(d.join("run.jsonl")).unwrap());
    let secrets = secret_strings(&d.join("run.jsonl.secrets.json"));
    assert!(secrets.iter().all(|s| s.len() >= 16));

    let o = lchzk(d, &["run", inst, "--witness", "mixed", "--seed", "3", "--adversary", "xor:w40", "-o", "abort.jsonl"]);
    assert_eq!(code(&o), 1);
    let o = lchzk(d, &["analyze", "zk", inst, "--witness", &wit, "--samples", "200", "--seed", "3", "-o", "zk.json"]);
    assert_eq!(code(&o), 0);
    let o = lchzk(d, &["attack", inst, "--term", "0", "--adversary", "xor:w3", "--samples", "200", "--seed", "3", "-o", "at.json"]);
    assert_eq!(code(&o), 0);

    let outputs = files_in(d);
    for (path, text) in &outputs {
        for s in &secrets {
            assert!(!text.contains(s.as_str()), "{} leaks key material", path.display());
        }
    }
    for (stream, name) in [(&plain.stdout, "stdout"), (&plain.stderr, "stderr")] {
        let text = String::from_utf8_lossy(stream);
        assert!(secrets.iter().all(|s| !text.contains(s.as_str())), "{name} leaks key material");
    }
}

#[test]
fn transparent_backend_requires_export_flag() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let inst = zero_projector_instance(d);
    let inst = inst.to_str().unwrap();
    let o = lchzk(d, &["run", inst, "--witness", "bits:1", "--backend", "transparent", "-o", "t.jsonl"]);
    assert_eq!(code(&o), 2);
    assert!(!d.join("t.jsonl").exists());
    let o = lchzk(d, &["run", inst, "--witness", "bits:1", "--backend", "transparent", "--export-secrets", "-o", "t.jsonl"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    // the transparent commitment embeds the salt in the clear
    let salt = read_json(&d.join("t.jsonl.secrets.json"))["salt"].as_str().unwrap().to_owned();
    assert!(fs::read_to_string(d.join("t.jsonl")).unwrap().contains(&salt));
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let inst = zero_projector_instance(d);
    let inst = inst.to_str().unwrap();
    let cases: [&[&str]; 11] = [
        &["frobnicate"],
        &["run"],
        &["run", "missing.json", "--witness", "bits:1"],
        &["run", inst, "--witness", "bits:1", "--t-level", "3"],
        &["run", inst, "--witness", "bits:11"],
        &["run", inst, "--witness", "nonsense"],
        &["run", inst, "--witness", "bits:1", "--adversary", "xor:"],
        &["run", inst, "--witness", "bits:1", "--adversary", "wrong-term:5"],
        &["run", inst, "--witness", "bits:1", "--backend", "plain"],
        &["run", inst, "--witness", "bits:1", "--export-secrets"],
        &["attack", inst, "--term", "4", "--adversary", "xor:w3"],
    ];
    for args in cases {
        let o = lchzk(d, args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
    }
    let o = lchzk(d, &["attack", inst, "--adversary", "honest"]);
    assert_eq!(code(&o), 2);
    let o = lchzk(d, &["analyze", "zk", inst, "--export-secrets", "--witness", "bits:1"]);
    assert_eq!(code(&o), 2);
    fs::write(d.join("junk.jsonl"), "{\"role\":\"prover\"}\n").unwrap();
    let o = lchzk(d, &["analyze", "transcripts", "junk.jsonl"]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&lchzk(d, &["--help"])), 0);
}

#[test]
fn attack_above_distance_respects_bound() {
    let dir = TempDir::new().unwrap();
    let (inst, _) = perfect_files(dir.path());
    for (term, w) in [(0, 9), (1, 12), (2, 30)] {
        let adv = format!("xor:w{w}");
        let term = term.to_string();
        let args = ["attack", inst.to_str().unwrap(), "--term", &term, "--adversary", &adv, "--samples", "4000", "-o", "a.json"];
        let o = lchzk(dir.path(), &args);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let rep = read_json(&dir.path().join("a.json"));
        let bound = rep["bound"].as_f64().expect("bound populated");
        let q = rep["q_hat"].as_f64().unwrap();
        let sigma = rep["sigma"].as_f64().unwrap();
        assert!(q <= bound + 3.0 * sigma, "term {term}: q {q} bound {bound}");
        assert!(rep.get("beta").is_none());
    }
}

#[test]
fn attack_below_distance_reports_beta() {
    let dir = TempDir::new().unwrap();
    let (inst, _) = perfect_files(dir.path());
    let o = lchzk(dir.path(), &["attack", inst.to_str().unwrap(), "--adversary", "xor:w2", "--samples", "4000", "-o", "a.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep = read_json(&dir.path().join("a.json"));
    assert!(rep["bound"].is_null());
    let beta = rep["beta"]["estimate"].as_f64().unwrap();
    let sigma = rep["beta"]["sigma"].as_f64().unwrap() + rep["sigma"].as_f64().unwrap();
    // passing requires the mask to survive the trap checks
    assert!(rep["q_hat"].as_f64().unwrap() <= beta + 4.0 * sigma);
}

#[test]
fn analyze_zk_on_perfect_witness_is_close() {
    let dir = TempDir::new().unwrap();
    let (inst, w) = perfect_files(dir.path());
    let o = lchzk(dir.path(), &["analyze", "zk", inst.to_str().unwrap(), "--witness", &witness_arg(&w), "-o", "zk.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep = read_json(&dir.path().join("zk.json"));
    assert_eq!(rep["samples"], 10_000);
    assert!(rep["tv"].as_f64().unwrap() <= 0.02, "tv {}", rep["tv"]);
}

#[test]
fn analyze_transcripts_summarizes_files() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let (inst, w) = perfect_files(d);
    let inst = inst.to_str().unwrap();
    let wit = witness_arg(&w);
    let mut good = Vec::new();
    for seed in 0..6 {
        let name = format!("g{seed}.jsonl");
        let seed = seed.to_string();
        assert_eq!(code(&lchzk(d, &["run", inst, "--witness", &wit, "--seed", &seed, "-o", &name])), 0);
        good.push(name);
    }
    assert_eq!(code(&lchzk(d, &["run", inst, "--witness", &wit, "--adversary", "xor:w40", "-o", "bad.jsonl"])), 1);
    let mut args = vec!["analyze", "transcripts"];
    args.extend(good.iter().map(String::as_str));
    args.extend(["bad.jsonl", "-o", "sum.json"]);
    let o = lchzk(d, &args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let sum = read_json(&d.join("sum.json"));
    assert_eq!(sum["transcripts"], 7);
    assert_eq!(sum["accept"]["hits"], 6);
    let counted: u64 = sum["features"].as_object().unwrap().values().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(counted, 7);
}

#[test]
fn selftest_single_criterion() {
    let dir = TempDir::new().unwrap();
    let o = lchzk(dir.path(), &["selftest", "--criterion", "1", "-o", "st.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().count(), 1);
    assert!(stdout.contains("PASS"));
    assert_eq!(read_json(&dir.path().join("st.json"))[0]["passed"], true);
    assert_eq!(code(&lchzk(dir.path(), &["selftest", "--criterion", "42"])), 2);
}

#[test]
fn selftest_full_suite_passes() {
    let dir = TempDir::new().unwrap();
    let o = lchzk(dir.path(), &["selftest"]);
    assert_eq!(code(&o), 0, "{}\n{}", String::from_utf8_lossy(&o.stdout), stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.contains("PASS")).count(), selftest::criterion_ids().len());
}

#[test]
fn run_matches_library_session() {
    use lchzk::protocol::session::run_protocol;
    use lchzk::protocol::{Adversary, ProtocolConfig};
    use rand::SeedableRng;

    let dir = TempDir::new().unwrap();
    let (inst_path, w_path) = perfect_files(dir.path());
    let (inst, w) = selftest::perfect_instance().unwrap();
    for (adv, seed) in [("honest", 11u64), ("xor:w2", 12), ("wrong-term:1", 13)] {
        let s = seed.to_string();
        let args = ["run", inst_path.to_str().unwrap(), "--witness", &witness_arg(&w_path), "--adversary", adv, "--seed", &s];
        let o = lchzk(dir.path(), &args);
        let adversary: Adversary = adv.parse().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let t = run_protocol(&inst, Some(&w), &adversary, &ProtocolConfig::default(), &mut rng).unwrap();
        assert_eq!(String::from_utf8(o.stdout).unwrap(), t.to_jsonl(), "{adv}");
    }
}
