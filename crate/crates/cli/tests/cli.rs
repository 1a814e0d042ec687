mod common;

use std::path::Path;

use bfvar::resample::{bootstrap_pmp, ResamplePlan};
use bfvar_cli::{load_dataset, RunConfig};
use common::{bfvar, fixture};

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &std::process::Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (headers, rows)
}

const TWO_MODELS: &str = r#"
dataset = "data.csv"
response = "y"
[[model]]
label = "a"
columns = ["x1"]
g = 10.0
sigma2 = 1.0
[[model]]
label = "b"
columns = ["x2"]
g = 10.0
sigma2 = 1.0
[dgp]
mean = "mu"
sigma2 = 2.0
"#;

fn dataset(n: usize) -> String {
    let mut s = String::from("x1,x2,mu,y\n");
    for i in 0..n {
        let t = i as f64;
        s += &format!(
            "{},{},{},{}\n",
            (0.3 * t).sin(),
            (0.7 * t).cos() + 0.1 * t,
            0.05 * t,
            (0.11 * t).sin() + 0.2
        );
    }
    s
}

#[test]
fn input_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = d.join("out");
    let out = out.to_str().unwrap();

    let o = bfvar(&["moments", "--config", d.join("missing.toml").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let cfg = write(d, "c.toml", TWO_MODELS);
    write(d, "data.csv", "x1,x2,mu,y\n1,2,3,4\n5,6,7\n");
    let o = bfvar(&["moments", "--config", &cfg, "--out", out], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 3"), "{}", stderr(&o));

    write(d, "data.csv", "x1,x2,mu,y\n1,2,3,4\n5,6,seven,8\n");
    let o = bfvar(&["moments", "--config", &cfg, "--out", out], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("column 3"), "{}", stderr(&o));

    write(d, "data.csv", "x1,x2,mu,y\n");
    assert_eq!(bfvar(&["moments", "--config", &cfg], None).status.code(), Some(2));

    write(d, "data.csv", "\u{0}\u{ff}garbage");
    assert_eq!(bfvar(&["pmp", "--config", &cfg], None).status.code(), Some(2));

    write(d, "data.csv", &dataset(20));
    let bad = write(d, "bad.toml", &TWO_MODELS.replace("[\"x2\"]", "[\"nope\"]"));
    let o = bfvar(&["pmp", "--config", &bad, "--out", out], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope"));

    let bad = write(d, "bad.toml", "this is not toml = = =");
    assert_eq!(bfvar(&["pmp", "--config", &bad], None).status.code(), Some(2));
    let bad = write(d, "bad.toml", "");
    assert_eq!(bfvar(&["pmp", "--config", &bad], None).status.code(), Some(2));

    assert_eq!(bfvar(&["frobnicate", "--config", &cfg], None).status.code(), Some(2));
    assert_eq!(bfvar(&["pmp"], None).status.code(), Some(2));
    assert_eq!(
        bfvar(&["pmp", "--config", &cfg, "--out", out], Some("lots"))
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bfvar(&["pmp", "--config", &cfg, "--out", out, "--threads", "0"], None)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bfvar(
            &["bootstrap", "--config", &cfg, "--out", out, "--block-length", "999"],
            None
        )
        .status
        .code(),
        Some(2)
    );
    let bad = write(d, "bad.toml", &TWO_MODELS.replace("sigma2 = 1.0", "sigma2 = -1.0"));
    assert_eq!(
        bfvar(&["pmp", "--config", &bad, "--out", out], None).status.code(),
        Some(2)
    );
}

#[test]
fn threads_flag_overrides_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", TWO_MODELS);
    write(dir.path(), "data.csv", &dataset(20));
    let out = dir.path().join("out");
    let o = bfvar(
        &[
            "pmp",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--threads",
            "2",
        ],
        Some("lots"),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn rank_deficient_resamples_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // x2 is nonzero in a single row, so most resamples lose it
    let mut data = String::from("x1,x2,mu,y\n");
    for i in 0..30 {
        data += &format!(
            "{},{},0,{}\n",
            1.0 + 0.1 * i as f64,
            if i == 0 { 1 } else { 0 },
            (i as f64).sin()
        );
    }
    write(d, "data.csv", &data);
    let cfg = write(d, "c.toml", &format!("{TWO_MODELS}\n[bootstrap]\nscheme = \"iid\"\n"));
    let o = bfvar(
        &[
            "bootstrap",
            "--config",
            &cfg,
            "--out",
            d.join("o").to_str().unwrap(),
            "--replicates",
            "200",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("rank-deficient"));
}

#[test]
fn identical_models_give_zero_moments_and_angles() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "data.csv", &dataset(25));
    let same = TWO_MODELS.replace("columns = [\"x2\"]", "columns = [\"x1\"]");
    let permuted = TWO_MODELS
        .replace("columns = [\"x2\"]", "columns = [\"x1\", \"x2\"]")
        .replace("columns = [\"x1\"]", "columns = [\"x2\", \"x1\"]");
    let out = d.join("o");
    let o = bfvar(
        &[
            "moments",
            "--config",
            &write(d, "same.toml", &same),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let o = bfvar(
        &[
            "angles",
            "--config",
            &write(d, "perm.toml", &permuted),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = read_csv(&out.join("moments.csv"));
    let col = |name: &str| h.iter().position(|x| x == name).unwrap();
    assert_eq!(rows[0][col("mean")].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[0][col("variance")].parse::<f64>().unwrap(), 0.0);

    let (h, rows) = read_csv(&out.join("angles.csv"));
    let col = |name: &str| h.iter().position(|x| x == name).unwrap();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert_eq!(r[col("theta")].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r[col("shared_dims")], "2");
        assert!(r[col("nonshared_dof_direct")].parse::<f64>().unwrap().abs() < 1e-12);
        assert_eq!(r[col("nonshared_dof_via_angles")].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn pmp_matrix_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let config = fixture("overconfident.toml");
    let o = bfvar(
        &[
            "bootstrap",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--replicates",
            "60",
            "--seed",
            "4",
        ],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));

    let cfg = RunConfig::load(&config).unwrap();
    let table = load_dataset(&cfg.dataset).unwrap();
    let set = bfvar::ModelSet::uniform(
        cfg.models
            .iter()
            .map(|m| {
                let x = table.matrix(&m.columns).unwrap();
                (
                    m.label.clone(),
                    bfvar::RegressionModel::univariate(x, m.sigma2.unwrap(), m.g).unwrap(),
                )
            })
            .collect(),
    )
    .unwrap();
    let y = bfvar::Response::Vector(table.vector("y").unwrap());
    let expected = bootstrap_pmp(&y, &set, &ResamplePlan::circular(None, 60, 4)).unwrap();

    let (h, rows) = read_csv(&out.join("pmp_matrix.csv"));
    assert_eq!(&h[2..], expected.labels.as_slice());
    assert_eq!(rows.len(), expected.nrows());
    for (r, e) in rows.iter().zip(&expected.values) {
        let parsed: Vec<f64> = r[2..].iter().map(|v| v.parse().unwrap()).collect();
        assert_eq!(&parsed, e);
    }

    let (_, rows) = read_csv(&out.join("stripes.csv"));
    let second: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(second.windows(2).all(|w| w[0] >= w[1]));

    let (_, rows) = read_csv(&out.join("bf_histogram.csv"));
    assert_eq!(rows.len(), 61);
    assert_eq!(rows[60][0], "observed");
    for r in &rows {
        let v: f64 = r[2].parse().unwrap();
        let two: f64 = r[3].parse().unwrap();
        assert_eq!(two, 2.0 * v);
    }
}

#[test]
fn golden_outputs_are_reproduced() {
    let mut runs = Vec::new();
    for threads in ["1", "4", "1"] {
        let dir = tempfile::tempdir().unwrap();
        runs.push(common::golden_run(dir.path(), threads).unwrap());
    }
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
    common::check_golden(&runs[0]).unwrap();
}
