use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use isarf_core::eval::validate_report;
use isarf_core::features::FeatureTable;
use isarf_core::synth::read_manifest;
use isarf_core::volume::svol::{read_svol, write_svol};
use isarf_core::volume::{Mask, VoxelVolume};

fn isarf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isarf")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = isarf(args);
    assert!(
        out.status.success(),
        "isarf {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// One 60-subject cohort and its feature table, shared by the tests.
fn fixture() -> &'static (tempfile::TempDir, PathBuf, PathBuf) {
    static F: OnceLock<(tempfile::TempDir, PathBuf, PathBuf)> = OnceLock::new();
    F.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let cohort = dir.path().join("cohort");
        let csv = dir.path().join("features.csv");
        ok(&["synth", "--out", s(&cohort), "--n", "60", "--seed", "2"]);
        ok(&["extract", "--cohort", s(&cohort), "--out", s(&csv), "--jobs", "1"]);
        (dir, cohort, csv)
    })
}

#[test]
fn extract_shape_and_jobs_independence() {
    let (dir, cohort, csv) = fixture();
    let text = fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 61);
    assert!(lines.iter().all(|l| l.split(',').count() == 99));
    assert!(lines[0].starts_with("subject_id,label,size_fraction,vol_abs_total"));

    let other = dir.path().join("features_jobs3.csv");
    ok(&["extract", "--cohort", s(cohort), "--out", s(&other), "--jobs", "3"]);
    assert_eq!(fs::read(csv).unwrap(), fs::read(&other).unwrap());
}

fn copy_cohort(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for e in fs::read_dir(from).unwrap() {
        let e = e.unwrap();
        fs::copy(e.path(), to.join(e.file_name())).unwrap();
    }
}

#[test]
fn empty_infection_subject_gives_zero_row() {
    let (dir, cohort, _) = fixture();
    let copy = dir.path().join("cohort_empty");
    copy_cohort(cohort, &copy);
    let entry = &read_manifest(&copy).unwrap()[4];
    let path = copy.join(&entry.infection_file);
    let inf = read_svol(&path).unwrap();
    write_svol(&path, &VoxelVolume::from_mask(&Mask::empty(inf.dims()), inf.spacing())).unwrap();

    let csv = dir.path().join("empty.csv");
    ok(&["extract", "--cohort", s(&copy), "--out", s(&csv)]);
    let t = FeatureTable::read_csv(&csv).unwrap();
    assert_eq!(t.ids[4], entry.subject_id);
    assert!(t.values.row(4).iter().all(|&v| v == 0.0));
    assert_eq!(t.size_fractions[4], 0.0);
}

#[test]
fn missing_or_damaged_volume_names_the_subject() {
    let (dir, cohort, _) = fixture();
    let copy = dir.path().join("cohort_broken");
    copy_cohort(cohort, &copy);
    let entries = read_manifest(&copy).unwrap();
    fs::remove_file(copy.join(&entries[2].intensity_file)).unwrap();
    let out = isarf(&["extract", "--cohort", s(&copy), "--out", s(&dir.path().join("x.csv"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains(&entries[2].subject_id));

    let copy2 = dir.path().join("cohort_damaged");
    copy_cohort(cohort, &copy2);
    let bad = copy2.join(&entries[1].segmentation_file);
    fs::write(&bad, b"SVOL1 nonsense").unwrap();
    let out = isarf(&["extract", "--cohort", s(&copy2), "--out", s(&dir.path().join("y.csv"))]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(&entries[1].subject_id) && err.contains(&entries[1].segmentation_file), "{err}");
}

#[test]
fn cv_report_validates_and_reruns_identically() {
    let (dir, _, csv) = fixture();
    let a = dir.path().join("cv_a.txt");
    let b = dir.path().join("cv_b.txt");
    let out = ok(&["cv", "--features", s(csv), "--model", "isarf", "--seed", "7", "--out", s(&a)]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("SEN") && stdout.contains("AUC"));
    assert_eq!(stdout.lines().filter(|l| l.contains('%')).count(), 5);
    ok(&["cv", "--features", s(csv), "--model", "isarf", "--seed", "7", "--out", s(&b), "--jobs", "2"]);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let summary = validate_report(&text).unwrap();
    assert_eq!(summary.n_subjects, 60);
    assert_eq!(summary.model, "isarf");

    let rf = dir.path().join("cv_rf.txt");
    ok(&["cv", "--features", s(csv), "--model", "rf-global", "--seed", "7", "--out", s(&rf)]);
    let rs = validate_report(&fs::read_to_string(&rf).unwrap()).unwrap();
    let total: usize = rs.groups.iter().map(|g| g.1 + g.2).sum();
    assert_eq!(total, 60);
    assert!(rs.size_thresholds.is_empty());
}

#[test]
fn train_predict_roundtrip_and_determinism() {
    let (dir, _, csv) = fixture();
    let m1 = dir.path().join("m1.txt");
    let m2 = dir.path().join("m2.txt");
    ok(&["train", "--features", s(csv), "--model-out", s(&m1), "--seed", "7"]);
    ok(&["train", "--features", s(csv), "--model-out", s(&m2), "--seed", "7", "--jobs", "2"]);
    assert_eq!(fs::read(&m1).unwrap(), fs::read(&m2).unwrap());

    let p = dir.path().join("pred.csv");
    ok(&["predict", "--model", s(&m1), "--features", s(csv), "--out", s(&p)]);
    let model = isarf_core::forest::load_model(&m1).unwrap();
    let table = FeatureTable::read_csv(csv).unwrap();
    let expected = model.predict_table(&table).unwrap();
    let text = fs::read_to_string(&p).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("id,prob,group"));
    for ((line, id), (prob, group)) in lines.zip(&table.ids).zip(expected) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0], id);
        let pr: f64 = f[1].parse().unwrap();
        assert_eq!(pr, prob);
        assert!((0.0..=1.0).contains(&pr));
        assert_eq!(f[2].parse::<usize>().unwrap(), group);
        assert!(group < model.n_groups());
    }
}

#[test]
fn predict_rejects_other_manifest_and_version() {
    let (dir, _, csv) = fixture();
    let m = dir.path().join("m_hash.txt");
    ok(&["train", "--features", s(csv), "--model-out", s(&m), "--seed", "3"]);

    let text = fs::read_to_string(csv).unwrap();
    let renamed = dir.path().join("renamed.csv");
    fs::write(&renamed, text.replacen("hist_mean", "hist_average", 1)).unwrap();
    let out = isarf(&["predict", "--model", s(&m), "--features", s(&renamed), "--out", s(&dir.path().join("p.csv"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mismatch"));

    let model_text = fs::read_to_string(&m).unwrap();
    let v2 = dir.path().join("m_v2.txt");
    fs::write(&v2, model_text.replacen("ISARF-MODEL v1", "ISARF-MODEL v2", 1)).unwrap();
    let out = isarf(&["predict", "--model", s(&v2), "--features", s(csv), "--out", s(&dir.path().join("q.csv"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("v2"));
}

#[test]
fn usage_and_data_exit_codes() {
    let (dir, _, csv) = fixture();
    let out = dir.path().join("r.txt");
    assert_eq!(isarf(&["cv", "--features", s(csv), "--model", "svm", "--seed", "1", "--out", s(&out)]).status.code(), Some(2));
    assert_eq!(isarf(&["cv", "--features", s(csv), "--model", "lr", "--out", s(&out)]).status.code(), Some(2));
    assert_eq!(isarf(&["train", "--features", s(csv), "--model-out", s(&out)]).status.code(), Some(2));
    assert_eq!(isarf(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        isarf(&["cv", "--features", "/nonexistent.csv", "--model", "lr", "--seed", "1", "--out", s(&out)]).status.code(),
        Some(3)
    );

    let text = fs::read_to_string(csv).unwrap();
    let one_class: String = text
        .lines()
        .enumerate()
        .filter(|(i, l)| *i == 0 || l.contains(",COVID,"))
        .map(|(_, l)| format!("{l}\n"))
        .collect();
    let oc = dir.path().join("one_class.csv");
    fs::write(&oc, one_class).unwrap();
    assert_eq!(isarf(&["cv", "--features", s(&oc), "--model", "lr", "--seed", "1", "--out", s(&out)]).status.code(), Some(3));
}

#[test]
fn commands_leave_inputs_untouched() {
    let (dir, _, csv) = fixture();
    let before = fs::read(csv).unwrap();
    let m = dir.path().join("m_ro.txt");
    ok(&["train", "--features", s(csv), "--model-out", s(&m), "--seed", "5"]);
    let model_before = fs::read(&m).unwrap();
    ok(&["predict", "--model", s(&m), "--features", s(csv), "--out", s(&dir.path().join("ro.csv"))]);
    assert_eq!(fs::read(csv).unwrap(), before);
    assert_eq!(fs::read(&m).unwrap(), model_before);
}
