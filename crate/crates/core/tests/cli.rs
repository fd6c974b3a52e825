mod common;

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn agreeset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agreeset"))
        .args(args)
        .env_remove("AGREESET_ARTIFACT")
        .output()
        .unwrap()
}

fn build_desk(dir: &Path) -> String {
    let out = dir.join("desk.artifact");
    let folder = common::desk_folder();
    let o = agreeset(&[
        "build",
        "--folder",
        folder.to_str().unwrap(),
        "--class",
        "dog",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out.to_str().unwrap().to_string()
}

#[test]
fn build_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.artifact");
    let folder = common::desk_folder();
    let o = agreeset(&[
        "build",
        "--folder",
        folder.to_str().unwrap(),
        "--class",
        "dog",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(
        text.contains("models: 3 (detr-resnet, faster-rcnn, yolo-base)"),
        "{text}"
    );
    assert!(
        text.contains("detections: 28 (2 of other classes dropped)"),
        "{text}"
    );
    assert!(out.exists());
}

#[test]
fn bad_input_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.artifact");
    let o = agreeset(&[
        "build",
        "--folder",
        "/no/such/folder",
        "--class",
        "dog",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("folder not found"));
    assert!(!out.exists());

    let folder = common::desk_folder();
    let o = agreeset(&[
        "build",
        "--folder",
        folder.to_str().unwrap(),
        "--class",
        "dog",
        "--set-iou",
        "1.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("set-iou out of range"));

    let artifact = build_desk(dir.path());
    let o = agreeset(&["query", "--artifact", &artifact, "--eval-iou", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eval-iou out of range"));
    let o = agreeset(&["query", "--artifact", &artifact, "--include", "nobody"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn query_finds_shared_false_positives() {
    let dir = tempfile::tempdir().unwrap();
    let artifact = build_desk(dir.path());
    let o = agreeset(&[
        "query",
        "--artifact",
        &artifact,
        "--include",
        "detr-resnet,yolo-base",
        "--exclude",
        "faster-rcnn",
        "--status",
        "fp",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["cluster_ids"].as_array().unwrap().len(), 2);
    for c in v["clusters"].as_array().unwrap() {
        assert_eq!(c["status"]["status"], "fp");
    }
}

#[test]
fn metrics_json_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let artifact = build_desk(dir.path());
    let o = agreeset(&["metrics", "--artifact", &artifact]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["scores"].as_array().unwrap().len(), 3);
    assert_eq!(v["jaccard"]["values"][0][0], 1.0);
    let o = agreeset(&["metrics", "--artifact", &artifact, "--format", "table"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("yolo-base"));
}

#[test]
fn tag_then_export() {
    let dir = tempfile::tempdir().unwrap();
    let artifact = build_desk(dir.path());
    let o = agreeset(&[
        "tag",
        "--artifact",
        &artifact,
        "--tag",
        "Occluded",
        "--images",
        "img02,img05",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = agreeset(&[
        "tag",
        "--artifact",
        &artifact,
        "--tag",
        "Occluded",
        "--images",
        "ghost",
    ]);
    assert_eq!(o.status.code(), Some(2));

    let exported = dir.path().join("tags.json");
    let o = agreeset(&[
        "export-tags",
        "--artifact",
        &artifact,
        "--out",
        exported.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&std::fs::read(&exported).unwrap()).unwrap();
    let imgs: Vec<&str> = v["Occluded"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["image_id"].as_str().unwrap())
        .collect();
    assert_eq!(imgs, ["img02", "img05"]);
}

#[test]
fn outputs_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = build_desk(dir.path());
    let first = std::fs::read(&a).unwrap();
    build_desk(dir.path());
    assert_eq!(std::fs::read(&a).unwrap().len(), first.len());
    let q1 = agreeset(&["query", "--artifact", &a, "--include", "yolo-base"]).stdout;
    let q2 = agreeset(&["query", "--artifact", &a, "--include", "yolo-base"]).stdout;
    assert_eq!(q1, q2);
    let m1 = agreeset(&["metrics", "--artifact", &a]).stdout;
    let m2 = agreeset(&["metrics", "--artifact", &a]).stdout;
    assert_eq!(m1, m2);
}
