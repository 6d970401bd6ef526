//! End-to-end checks of the `spincorr` binary: exit codes, CSV output,
//! overrides, and worker-count invariance through `SPINCORR_THREADS`.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spincorr"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn appendix_a_runs_and_is_thread_invariant() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "experiment = appendix_a\nj_list = 0.5, 1, 10\n");

    let out1 = tmp.path().join("out1");
    let status = bin()
        .args(["appendix_a", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out1)
        .env("SPINCORR_THREADS", "1")
        .status()
        .unwrap();
    assert!(status.success());
    let table1 = std::fs::read_to_string(out1.join("moments.csv")).unwrap();
    assert!(table1.contains("j,jx2_q,jx2_c,jx4_q,jx4_c,delta_jx4,delta_jx4_over_j2"));
    assert!(table1.contains("# config_hash = "));

    let out2 = tmp.path().join("out2");
    let status = bin()
        .args(["appendix_a", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out2)
        .env("SPINCORR_THREADS", "16")
        .status()
        .unwrap();
    assert!(status.success());
    let table2 = std::fs::read_to_string(out2.join("moments.csv")).unwrap();
    assert_eq!(table1, table2);
}

#[test]
fn relax_rerun_is_byte_identical_across_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s = 5\nl = 6\na = 5\ngamma = 2.835\n\
         theta_s = 45\nphi_s = 70\ntheta_l = 135\nphi_l = 70\n\
         n_kicks = 4\nn_traj = 20000\nmaster_seed = 3\ndist_kicks = 0,4\n",
    );
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = tmp.path().join(format!("out{threads}"));
        let status = bin()
            .args(["relax", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .env("SPINCORR_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.success());
        let mut names: Vec<_> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|n| n.ends_with(".csv"))
            .collect();
        names.sort();
        let blob: String = names
            .iter()
            .map(|n| std::fs::read_to_string(out.join(n)).unwrap())
            .collect();
        outputs.push((names, blob));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn override_changes_the_config_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "j_list = 1\n");
    let out1 = tmp.path().join("a");
    let out2 = tmp.path().join("b");
    assert!(bin()
        .args(["appendix_a", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out1)
        .status()
        .unwrap()
        .success());
    assert!(bin()
        .args(["appendix_a", "--config"])
        .arg(&cfg)
        .args(["--set", "j_list=2"])
        .arg("--out")
        .arg(&out2)
        .status()
        .unwrap()
        .success());
    let a = std::fs::read_to_string(out1.join("moments.csv")).unwrap();
    let b = std::fs::read_to_string(out2.join("moments.csv")).unwrap();
    assert_ne!(a, b);
    assert!(b.contains("# cfg j_list = 2"));
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    // unknown experiment name
    let cfg = write_config(tmp.path(), "j_list = 1\n");
    let status = bin()
        .args(["bogus", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // missing required key
    let status = bin()
        .args(["relax", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("y"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // malformed config file
    let bad = write_config(tmp.path(), "no equals sign here\n");
    let status = bin()
        .args(["appendix_a", "--config"])
        .arg(&bad)
        .arg("--out")
        .arg(tmp.path().join("z"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn invalid_thread_override_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "j_list = 1\n");
    let status = bin()
        .args(["appendix_a", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .env("SPINCORR_THREADS", "zero")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn capacity_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s = 260\nl = 286\na = 5\ngamma = 2.835\n\
         theta_s = 45\nphi_s = 70\ntheta_l = 135\nphi_l = 70\n\
         n_kicks = 1\nn_traj = 10\n",
    );
    let status = bin()
        .args(["relax", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}
