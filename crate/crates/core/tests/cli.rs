use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use linkclust::eval::{accuracy_error, round3, ConfusionMatrix};

const SAMPLE: &str = "M,A\nM,B\nF,B\nF,A\nM,C\nF,C\nM,C\nF,C\nF,A\nM,B\n";

fn linkclust(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linkclust"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

/// Sample table with a class column appended: first five rows `x`, rest `y`.
fn labeled_sample() -> String {
    SAMPLE
        .lines()
        .enumerate()
        .map(|(i, l)| format!("{l},{}\n", if i < 5 { "x" } else { "y" }))
        .collect()
}

#[test]
fn squeezer_without_labels_notes_it() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "t.csv", SAMPLE);
    let out = linkclust(&[
        "experiment",
        "--data",
        &data,
        "--algo",
        "squeezer",
        "--threshold",
        "1.0",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "squeezer s=1");
    assert_eq!(lines[1], "note\tno labels");
    let clusters: Vec<&str> = lines[2..]
        .iter()
        .map(|l| l.split('\t').nth(1).unwrap())
        .collect();
    assert_eq!(clusters, ["1", "1", "2", "2", "1", "2", "1", "2", "2", "1"]);
}

#[test]
fn exit_codes() {
    let out = linkclust(&["experiment", "--data", "/definitely/not/here.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let out = linkclust(&["experiment", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "t.csv", SAMPLE);
    let out = linkclust(&["experiment", "--data", &data, "--pi", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let out = linkclust(&["experiment", "--data", &data, "--restarts", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let out = linkclust(&["cluster", "--data", &data, "--algo", "all"]);
    assert_eq!(out.status.code(), Some(1));
    let ragged = write(dir.path(), "r.csv", "a,b\nc\n");
    assert_eq!(
        linkclust(&["transform", "--data", &ragged]).status.code(),
        Some(1)
    );
    assert_eq!(linkclust(&["--help"]).status.code(), Some(0));
}

#[test]
fn report_shape_and_error_consistency() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "t.csv", &labeled_sample());
    let out = linkclust(&[
        "experiment",
        "--data",
        &data,
        "--class-col",
        "last",
        "--k",
        "2",
        "--restarts",
        "5",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let sections: Vec<&str> = text.split("\n\n").collect();
    assert_eq!(sections.len(), 3);
    let names: Vec<&str> = sections
        .iter()
        .map(|s| s.split([' ', '\t']).next().unwrap())
        .collect();
    assert_eq!(names, ["squeezer", "kmodes", "lcbcdc"]);

    for section in sections {
        let lines: Vec<&str> = section.lines().collect();
        assert!(lines[0].ends_with("\tx\ty"), "{}", lines[0]);
        let last: Vec<&str> = lines.last().unwrap().split('\t').collect();
        assert_eq!(last[0], "error");
        let counts: Vec<Vec<usize>> = lines[1..lines.len() - 1]
            .iter()
            .map(|l| l.split('\t').skip(1).map(|c| c.parse().unwrap()).collect())
            .collect();
        let m = ConfusionMatrix::from_counts(&["x", "y"], counts, 10);
        let e = round3(accuracy_error(&m).unwrap().error);
        assert_eq!(format!("{e:.3}"), last[1]);
    }

    let json = linkclust(&[
        "experiment",
        "--data",
        &data,
        "--class-col",
        "last",
        "--restarts",
        "5",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    let sections = v["sections"].as_array().unwrap();
    assert_eq!(sections.len(), 3);
    for s in sections {
        assert_eq!(s["status"], "evaluated");
        let err = s["error"].as_f64().unwrap();
        assert!((err - (1.0 - s["accuracy"].as_f64().unwrap())).abs() < 1e-15);
    }
}

#[test]
fn stages_compose_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "t.csv", &labeled_sample());
    let labels = dir.path().join("labels.tsv");
    let chart = dir.path().join("chart.tsv");
    let out = linkclust(&[
        "cluster",
        "--data",
        &data,
        "--class-col",
        "last",
        "--algo",
        "lcbcdc",
        "--restarts",
        "5",
        "--out",
        labels.to_str().unwrap(),
        "--chart",
        chart.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(fs::read_to_string(&labels).unwrap().lines().count(), 10);
    assert!(!fs::read_to_string(&chart).unwrap().is_empty());

    let out = linkclust(&[
        "eval",
        "--data",
        &data,
        "--class-col",
        "last",
        "--labels",
        labels.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.starts_with("cluster\tx\ty\n"));
    assert!(text.lines().last().unwrap().starts_with("error\t"));

    let km = dir.path().join("km.tsv");
    linkclust(&[
        "cluster",
        "--data",
        &data,
        "--class-col",
        "last",
        "--algo",
        "kmodes",
        "--out",
        km.to_str().unwrap(),
    ]);
    let rows: Vec<String> = fs::read_to_string(&km)
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect();
    let clusters: Vec<&str> = rows.iter().map(|l| l.split('\t').nth(1).unwrap()).collect();
    assert_eq!(clusters, ["2", "2", "1", "1", "1", "1", "1", "1", "1", "2"]);
}

#[test]
fn transform_json() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "t.csv", SAMPLE);
    let out = linkclust(&["transform", "--data", &data, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["entities"], 10);
    assert_eq!(v["links"].as_array().unwrap().len(), 5);
    assert_eq!(v["links"][4]["members"], serde_json::json!([5, 6, 7, 8]));
}

#[test]
fn unreachable_threshold_is_reported_per_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "t.csv", &labeled_sample());
    let out = linkclust(&[
        "experiment",
        "--data",
        &data,
        "--class-col",
        "last",
        "--target-k",
        "7",
        "--restarts",
        "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let sections: Vec<&str> = text.split("\n\n").collect();
    assert!(
        sections[0].contains("note\tno threshold on the search grid yields 7 clusters"),
        "{}",
        sections[0]
    );
    assert!(sections[1].starts_with("kmodes"));
    assert!(sections[2].starts_with("lcbcdc"));
}
