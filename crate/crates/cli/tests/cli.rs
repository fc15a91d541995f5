use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ppdesup::analysis::micro1;
use tempfile::TempDir;

fn ppdesup(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppdesup")).args(args).output().expect("binary runs")
}

fn write_micro(dir: &Path) -> String {
    let path = dir.join("micro.json");
    fs::write(&path, micro1().to_json().unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

fn solution(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generate_one_and_many() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    let args = ["generate", "--products", "5", "--facilities", "2", "--levels", "2", "--scenarios", "5", "--seed", "7", "-o", o];
    let r = ppdesup(&args);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(fs::read_dir(&out).unwrap().count(), 1);

    let mut many = args.to_vec();
    many.extend(["--count", "5"]);
    let r = ppdesup(&many);
    assert!(r.status.success());
    let printed = String::from_utf8(r.stdout).unwrap();
    assert_eq!(printed.lines().count(), 5);
    for seed in 7..12 {
        assert!(printed.contains(&format!("seed{seed}.json")), "{printed}");
    }
    let first = fs::read_to_string(printed.lines().next().unwrap()).unwrap();
    let again = ppdesup(&args);
    assert!(again.status.success());
    let repeat = fs::read_to_string(String::from_utf8(again.stdout).unwrap().trim()).unwrap();
    assert_eq!(first, repeat);
}

#[test]
fn generate_rejects_four_levels() {
    let dir = TempDir::new().unwrap();
    let r = ppdesup(&[
        "generate", "--products", "5", "--facilities", "2", "--levels", "4", "--scenarios", "5", "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn solve_micro_with_each_method() {
    let dir = TempDir::new().unwrap();
    let inst = write_micro(dir.path());
    for method in ["bbm-vi2", "extensive", "bbm", "bbm-bc", "oracle"] {
        let out = dir.path().join(format!("{method}.json"));
        let log = dir.path().join(format!("{method}.csv"));
        let r = ppdesup(&[
            "solve", &inst, "--method", method, "--gap", "0", "-o", out.to_str().unwrap(), "--log", log.to_str().unwrap(),
        ]);
        assert_eq!(r.status.code(), Some(0), "{method}: {}", String::from_utf8_lossy(&r.stderr));
        let s = solution(&out);
        assert!((s["objective"].as_f64().unwrap() - 63.0).abs() < 1e-6, "{method}");
        assert_eq!(s["levels"][0][0], 1);
        assert_eq!(s["distributions"][0], 1);
        assert_eq!(s["format_version"], 1);
        assert!(fs::read_to_string(&log).unwrap().starts_with("k,v_rmp,v_mp,v_best,gap,cuts_added,elapsed_seconds"));
    }
}

#[test]
fn solve_error_codes() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(ppdesup(&["solve", missing.to_str().unwrap()]).status.code(), Some(2));
    let inst = write_micro(dir.path());
    assert_eq!(ppdesup(&["solve", &inst, "--method", "cplex"]).status.code(), Some(2));
    assert_eq!(ppdesup(&["solve", &inst, "--method", "oracle", "--oracle-budget", "1"]).status.code(), Some(4));

    let gen = ppdesup(&[
        "generate", "--products", "5", "--facilities", "5", "--levels", "3", "--scenarios", "1", "-o",
        dir.path().to_str().unwrap(),
    ]);
    let big = String::from_utf8(gen.stdout).unwrap();
    assert_eq!(ppdesup(&["solve", big.trim(), "--method", "oracle"]).status.code(), Some(4));
}

#[test]
fn solve_time_limit_exit_code() {
    let dir = TempDir::new().unwrap();
    let inst = write_micro(dir.path());
    let r = ppdesup(&["solve", &inst, "--method", "bbm-bc", "--time-limit", "0"]);
    assert_eq!(r.status.code(), Some(3), "{}", String::from_utf8_lossy(&r.stderr));
    let s: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(s["status"], "time_limit");
    assert!(s["bound"].as_f64().unwrap() >= 63.0 - 1e-9);
}

#[test]
fn vss_on_micro() {
    let dir = TempDir::new().unwrap();
    let inst = write_micro(dir.path());
    let r = ppdesup(&["vss", &inst, "--variant", "all"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let text = String::from_utf8(r.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "instance,v_sp,v_ev_supply,v_ev_demand,v_ev_full,vss_supply,vss_demand,vss_full,ratio_defined,sp_solved"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "micro");
    for v in &row[5..8] {
        assert!(v.parse::<f64>().unwrap().abs() < 1e-6, "{text}");
    }
    assert_eq!(ppdesup(&["vss", "no/such/file.json"]).status.code(), Some(2));
    assert_eq!(ppdesup(&["vss", &inst, "--variant", "price"]).status.code(), Some(2));
}

#[test]
fn bench_campaigns() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.toml");
    fs::write(&empty, "").unwrap();
    let r = ppdesup(&["bench", empty.to_str().unwrap()]);
    assert!(r.status.success());
    assert_eq!(String::from_utf8(r.stdout).unwrap().lines().count(), 1);

    let cfg = dir.path().join("campaign.toml");
    fs::write(
        &cfg,
        r#"
methods = ["oracle", "bbm", "bbm-vi1", "bbm-vi2", "extensive"]
scenarios = [2]
seeds = [1, 2]
gap = 1e-6
time_limit = 60.0

[[classes]]
products = 2
facilities = 2
levels = 2
"#,
    )
    .unwrap();
    let csv_path = dir.path().join("runs.csv");
    let r = ppdesup(&["bench", cfg.to_str().unwrap(), "-o", csv_path.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let summary = String::from_utf8(r.stdout).unwrap();
    assert!(summary.contains("(2,2,2)"));
    assert!(summary.contains("bbm-vi2"));
    let rows = ppdesup::io::read_bench_csv(fs::File::open(&csv_path).unwrap()).unwrap();
    assert_eq!(rows.len(), 10);
    for seed_rows in rows.chunks(5) {
        let v0 = seed_rows[0].objective.unwrap();
        for r in seed_rows {
            assert!(r.solved);
            assert!((r.objective.unwrap() - v0).abs() <= 1e-6 * v0.abs().max(1.0));
        }
    }

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "methods = [\"simplex\"]").unwrap();
    assert_eq!(ppdesup(&["bench", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn shipped_campaign_parses() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../campaigns/small.toml");
    let cfg: ppdesup::io::CampaignConfig = toml::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    cfg.validate().unwrap();
    assert_eq!(cfg.num_runs(), 50);
}
