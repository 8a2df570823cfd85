//! The `fracheat` binary: argument handling, errors and outputs.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracheat"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const MOMENTS: &str = "kind = \"moments\"\nseed = 1\n\n[moments]\nhurst = [[0.5, 0.8]]\nn = 6\noffset_exponents = [2, 3, 4]\nfixed_offset = 0.5\n";

#[test]
fn missing_parameter_is_rejected_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "kind = \"sample\"\nseed = 1\n\n[sample]\nh1 = 0.5\nn = 4\npairs = [[[0.5, 0.5], [0.5, 0.5]]]\ndraws = 10\n");
    let out = dir.path().join("out");
    let res = bin().args(["sample", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(!res.status.success());
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("\"error\"") && err.contains("h2"), "{err}");
    assert!(!out.exists() || std::fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn kind_must_match_the_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.toml", MOMENTS);
    let res = bin().args(["kernel", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert!(!res.status.success());
}

#[test]
fn run_writes_manifest_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.toml", MOMENTS);
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let res = bin()
            .args(["moments", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .env("FRACHEAT_THREADS", threads)
            .output()
            .unwrap();
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        out
    };
    let (a, b) = (run("a", "1"), run("b", "2"));
    for name in ["moments.csv", "fits.csv"] {
        let (x, y) = (std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap());
        assert_eq!(x, y, "{name} differs");
    }
    // the manifest echoes --out, which is the only line allowed to differ
    let manifest = std::fs::read_to_string(a.join("manifest.txt")).unwrap();
    let other = std::fs::read_to_string(b.join("manifest.txt")).unwrap();
    let strip = |m: &str| m.lines().filter(|l| !l.starts_with("out = ")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&manifest), strip(&other));
    assert!(manifest.contains("[moments]") && manifest.contains("fits.csv"));
    let csv = std::fs::read_to_string(a.join("fits.csv")).unwrap();
    assert!(csv.starts_with('#'));
}
