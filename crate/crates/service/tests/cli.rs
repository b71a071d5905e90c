use std::io::Write;
use std::process::{Command, Output, Stdio};

use tourdesk_core::bundle::ArtifactBundle;

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/corpus/odaiba.jsonl");
const BIN: &str = env!("CARGO_BIN_EXE_tourdesk");

const SCRIPT: &str = "A teacher.\nTeaching children.\nNo.\nWith my family.\nYes.\n5 and 2.\nYes.\nNo.\nYes.\nNo.\nGood food.\nHow much is it?\nNo, thank you.\n";

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .env("RUST_LOG", "warn")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

const CHAT: &[&str] = &[
    "--corpus", CORPUS, "--backend", "mock", "--seed", "3", "chat",
    "--candidate-a", "trick_art_museum", "--candidate-b", "daiba_park",
];

#[test]
fn build_corpus_writes_a_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("odaiba.bundle.json");
    let stdout = ok(&run(&["--corpus", CORPUS, "--seed", "1", "build-corpus", "--out", out.to_str().unwrap()], ""));
    assert!(stdout.starts_with("built 8 sights"), "{stdout}");
    let bundle = ArtifactBundle::load(&out).unwrap();
    assert_eq!(bundle.artifacts.len(), 8);
    assert!(bundle.artifacts.values().all(|a| a.questions.len() <= 3));

    // The bundle can then be served from a config file.
    let config = dir.path().join("tourdesk.toml");
    std::fs::write(&config, "bundle = \"odaiba.bundle.json\"\n").unwrap();
    let chat = ok(&run(
        &["--config", config.to_str().unwrap(), "chat", "--candidate-a", "miraikan", "--candidate-b", "joypolis"],
        "",
    ));
    assert!(chat.contains("[greeting] agent:"));
    assert!(chat.contains("(input ended in phase icebreaker)"));
}

#[test]
fn chat_is_deterministic_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let saved = dir.path().join("chat.jsonl");
    let mut args = CHAT.to_vec();
    args.extend(["--save", saved.to_str().unwrap()]);
    let first = ok(&run(&args, SCRIPT));
    let second = ok(&run(CHAT, SCRIPT));
    assert_eq!(first, second);
    assert!(first.contains("[closing] agent:"), "{first}");
    assert!(first.contains("[qa] customer: How much is it?"));

    let file = saved.to_str().unwrap();
    let render_a = ok(&run(&["replay", file], ""));
    let render_b = ok(&run(&["replay", file], ""));
    assert_eq!(render_a, render_b);
    assert_eq!(render_a, first);

    let verified = ok(&run(
        &[
            "--corpus", CORPUS, "--backend", "mock", "--seed", "3", "replay", file,
            "--candidate-a", "trick_art_museum", "--candidate-b", "daiba_park",
        ],
        "",
    ));
    assert!(verified.contains("replay reproduced"), "{verified}");

    let wrong_seed = run(
        &[
            "--corpus", CORPUS, "--backend", "mock", "--seed", "4", "replay", file,
            "--candidate-a", "trick_art_museum", "--candidate-b", "daiba_park",
        ],
        "",
    );
    assert!(!wrong_seed.status.success());
}

#[test]
fn usage_errors_exit_nonzero() {
    assert!(!run(&["chat", "--candidate-a", "a", "--candidate-b", "b"], "").status.success());
    assert!(!run(&["--corpus", CORPUS, "--backend", "remote", "build-corpus", "--out", "/dev/null"], "").status.success());
    assert!(!run(&["--corpus", CORPUS, "chat", "--candidate-a", "x", "--candidate-b", "daiba_park"], "").status.success());
}
