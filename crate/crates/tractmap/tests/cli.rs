use std::path::Path;
use std::process::{Command, Output};

use tractmap::io::{read_trk, write_trk};
use tractmap::report::MappingFile;

fn tractmap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tractmap"))
        .arg("--output-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn small_synth(dir: &Path, extra: &[&str]) {
    let mut args = vec!["synth", "--bundle-size", "8"];
    args.extend_from_slice(extra);
    if !extra.contains(&"--distractors") {
        args.extend_from_slice(&["--distractors", "20"]);
    }
    let out = tractmap(dir, &args);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn synth_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = tractmap(dir.path(), &["synth"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["ground_truth.json", "source_tract.json", "target_full.json"]
    );
}

#[test]
fn synth_without_distractors_gives_a_bijection() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), &["--distractors", "0", "--format", "trk"]);
    let truth =
        MappingFile::parse(&std::fs::read_to_string(dir.path().join("ground_truth.json")).unwrap())
            .unwrap();
    assert_eq!(truth.n_targets, 8);
    let mut seen = truth.assignment.clone();
    seen.sort_unstable();
    assert_eq!(seen, (0..8).collect::<Vec<_>>());
    assert!(dir.path().join("target_full.trk").exists());
}

#[test]
fn map_with_zero_iterations_returns_the_initialization() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), &[]);
    let out = tractmap(
        dir.path(),
        &[
            "map",
            "--source-tract",
            &p(dir.path(), "source_tract.json"),
            "--target-full",
            &p(dir.path(), "target_full.json"),
            "--iterations",
            "0",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 2);

    let args = tractmap::cli::MapArgs {
        iterations: 0,
        ..tractmap::cli::MapArgs::new(
            dir.path().join("source_tract.json"),
            dir.path().join("target_full.json"),
        )
    };
    let global = tractmap::cli::GlobalArgs {
        output_dir: dir.path().join("lib"),
        ..Default::default()
    };
    let run = tractmap::cli::cmd_map(&global, &args).unwrap();
    assert_eq!(run.mapping, run.initial);
    let written =
        MappingFile::parse(&std::fs::read_to_string(dir.path().join("mapping.json")).unwrap())
            .unwrap();
    assert_eq!(written.assignment, run.initial.assignment());
}

#[test]
fn map_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), &[]);
    std::fs::write(dir.path().join("tract.json"), {
        let truth = MappingFile::parse(
            &std::fs::read_to_string(dir.path().join("ground_truth.json")).unwrap(),
        )
        .unwrap();
        serde_json::to_string(&truth.target_tract.unwrap()).unwrap()
    })
    .unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let out = tractmap(
            &out_dir,
            &[
                "map",
                "--source-tract",
                &p(dir.path(), "source_tract.json"),
                "--target-full",
                &p(dir.path(), "target_full.json"),
                "--target-tract",
                &p(dir.path(), "tract.json"),
                "--iterations",
                "200",
                "--seed",
                "7",
            ],
        );
        assert!(out.status.success(), "{}", stderr(&out));
        let files: Vec<Vec<u8>> = [
            "mapping.json",
            "trace.csv",
            "mapped_tract.json",
            "report.json",
            "report.csv",
        ]
        .iter()
        .map(|f| std::fs::read(out_dir.join(f)).unwrap())
        .collect();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn eval_scores_identical_and_disjoint_tracts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let far = dir.path().join("far.json");
    std::fs::write(&a, r#"{"streamlines":[[[0,0,0],[3,0,0]]]}"#).unwrap();
    std::fs::write(&far, r#"{"streamlines":[[[100,0,0],[103,0,0]]]}"#).unwrap();
    let score = |b: &Path| {
        let out = tractmap(
            dir.path(),
            &[
                "eval",
                "--tract-a",
                a.to_str().unwrap(),
                "--mapped-b",
                b.to_str().unwrap(),
            ],
        );
        assert!(out.status.success(), "{}", stderr(&out));
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("eval.json")).unwrap())
                .unwrap();
        v
    };
    assert_eq!(score(&a)["jaccard"], 1.0);
    let v = score(&far);
    assert_eq!(v["jaccard"], 0.0);
    assert!(v.get("recovery_rate").is_none());
}

#[test]
fn eval_with_truth_reports_recovery() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), &[]);
    let truth = p(dir.path(), "ground_truth.json");
    let src = p(dir.path(), "source_tract.json");
    let out = tractmap(
        dir.path(),
        &[
            "eval",
            "--tract-a",
            &src,
            "--mapped-b",
            &src,
            "--truth",
            &truth,
            "--mapping",
            &truth,
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("eval.json")).unwrap())
            .unwrap();
    assert_eq!(v["recovery_rate"], 1.0);
}

#[test]
fn convert_round_trips_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), &["--format", "trk"]);
    let trk = p(dir.path(), "source_tract.trk");
    let json = p(dir.path(), "copy.json");
    let back = p(dir.path(), "copy.trk");
    for (i, o) in [(&trk, &json), (&json, &back)] {
        let out = tractmap(dir.path(), &["convert", "--in", i, "--out", o]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let original = read_trk(&std::fs::read(&trk).unwrap()).unwrap();
    let round = read_trk(&std::fs::read(&back).unwrap()).unwrap();
    assert_eq!(round.streamlines(), original.streamlines());
    assert_eq!(write_trk(&round).unwrap(), std::fs::read(&trk).unwrap());
}

#[test]
fn bad_magic_exits_with_code_two_and_offset() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.trk");
    std::fs::write(&bad, vec![0u8; 1000]).unwrap();
    let out = tractmap(
        dir.path(),
        &[
            "convert",
            "--in",
            bad.to_str().unwrap(),
            "--out",
            &p(dir.path(), "x.json"),
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("byte 0"), "{}", stderr(&out));
    assert!(!dir.path().join("x.json").exists());
}

#[test]
fn json_schema_error_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"streamlines":[[[0,0,0]],[[1,"x",0]]]}"#).unwrap();
    let out = tractmap(
        dir.path(),
        &[
            "convert",
            "--in",
            bad.to_str().unwrap(),
            "--out",
            &p(dir.path(), "x.trk"),
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("$.streamlines[1][0][1]"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn missing_input_and_bad_flags_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = tractmap(
        dir.path(),
        &[
            "map",
            "--source-tract",
            "nope.json",
            "--target-full",
            "nope.json",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nope.json"), "{}", stderr(&out));
    let out = tractmap(dir.path(), &["synth", "--jitter", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = tractmap(dir.path(), &["--voxel-size", "2", "0", "2", "synth"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("> 0"), "{}", stderr(&out));
}

#[test]
fn out_of_range_tract_index_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), &[]);
    std::fs::write(dir.path().join("tract.json"), "[0, 9999]").unwrap();
    let out = tractmap(
        dir.path(),
        &[
            "map",
            "--source-tract",
            &p(dir.path(), "source_tract.json"),
            "--target-full",
            &p(dir.path(), "target_full.json"),
            "--target-tract",
            &p(dir.path(), "tract.json"),
        ],
    );
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}
