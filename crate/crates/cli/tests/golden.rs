//! End-to-end run on the bundled 20-ticker universe, compared byte for byte
//! with `tests/golden/`. Set `ATRE_UPDATE_GOLDEN=1` to regenerate.

mod common;

use std::fs;
use std::path::Path;

use common::{assert_schema, atre, stderr, stdout, workspace};

const BUNDLE: [&str; 6] = [
    "report.json",
    "profile.csv",
    "percentile.csv",
    "cumulative.csv",
    "stats.csv",
    "exclusions.csv",
];

fn run_backtest(dir: &Path, jobs: &str) -> Vec<Vec<u8>> {
    let out = atre(
        &["backtest", "--manifest", "universe/manifest.csv", "--config", "backtest.toml", "--out", "out", "--jobs", jobs],
        dir,
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_schema("backtest-summary", &stdout(&out));
    BUNDLE.iter().map(|f| fs::read(dir.join("out").join(f)).unwrap()).collect()
}

#[test]
fn golden_backtest_is_reproduced_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let fixtures = workspace().join("fixtures/golden");
    for file in ["universe.toml", "backtest.toml"] {
        fs::copy(fixtures.join(file), d.join(file)).unwrap();
    }
    let out = atre(&["simulate", "--spec", "universe.toml", "--out", "universe"], d);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let first = run_backtest(d, "1");
    assert_schema("report", std::str::from_utf8(&first[0]).unwrap());
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    if std::env::var_os("ATRE_UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(&golden).unwrap();
        for (file, bytes) in BUNDLE.iter().zip(&first) {
            fs::write(golden.join(file), bytes).unwrap();
        }
    }
    for (file, bytes) in BUNDLE.iter().zip(&first) {
        let expected = fs::read(golden.join(file)).unwrap_or_else(|e| panic!("{file}: {e}"));
        assert!(expected == *bytes, "{file} differs from the golden copy");
    }

    // Rerun into the same directory with more threads.
    let second = run_backtest(d, "2");
    assert!(first == second, "rerun with --jobs 2 changed the bundle");
    let entries: Vec<_> = fs::read_dir(d.join("out")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(entries.len(), BUNDLE.len());
}
