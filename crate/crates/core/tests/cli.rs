use std::process::{Command, Output, Stdio};
use std::time::Duration;

fn easyvoice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_easyvoice"))
        .args(args)
        .env_remove("EASYVOICE_CONFIG")
        .output()
        .unwrap()
}

fn free_udp_port() -> u16 {
    std::net::UdpSocket::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

#[test]
fn help_and_usage_errors() {
    let out = easyvoice(&["serve", "--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("--peer"));

    for bad in [&["serve", "--frobnicate"][..], &["launch"], &[], &["speak-once"], &["serve", "--ui-port", "70000"]] {
        let out = easyvoice(bad);
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("error") || err.contains("Usage"), "{bad:?}");
    }
}

#[test]
fn check_config_names_missing_dictionary() {
    let out = easyvoice(&["check-config", "--dict", "/no/such/words.tsv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/words.tsv"));

    let out = easyvoice(&["check-config", "--dict", "/no/such/words.tsv", "--no-completion"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn config_path_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"layout_path": "/no/such/layout.json"}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_easyvoice"))
        .arg("check-config")
        .env("EASYVOICE_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/layout.json"));

    std::fs::write(&cfg, r#"{"unknown_field": 1}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_easyvoice"))
        .arg("check-config")
        .env("EASYVOICE_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn speak_once_into_loopback_subprocess() {
    let dir = tempfile::tempdir().unwrap();
    let port = free_udp_port().to_string();
    let peer = Command::new(env!("CARGO_BIN_EXE_easyvoice"))
        .args(["loopback", "--listen", &port, "--duration-ms", "10000", "--idle-timeout-ms", "500"])
        .arg("--out-dir")
        .arg(dir.path())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    // give the peer a moment to bind
    std::thread::sleep(Duration::from_millis(300));

    let out = easyvoice(&["speak-once", "--peer", &format!("127.0.0.1:{port}"), "--text", "hi", "--synth", "tone"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["packets"], 8);
    assert_eq!(summary["duration_ms"], 160);

    let done = peer.wait_with_output().unwrap();
    assert_eq!(done.status.code(), Some(0), "{}", String::from_utf8_lossy(&done.stderr));
    let stats: serde_json::Value = serde_json::from_slice(&done.stdout).unwrap();
    assert_eq!(stats["packets_received"], 8);
    assert_eq!(stats["samples"], 1280);

    let on_disk: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("stats.json")).unwrap()).unwrap();
    assert_eq!(on_disk, stats);
    let wav = easyvoice::speech::parse_wav(&std::fs::read(dir.path().join("received.wav")).unwrap()).unwrap();
    assert_eq!((wav.sample_rate_hz(), wav.len()), (8000, 1280));
}

#[test]
fn speak_once_without_peer_fails() {
    let out = easyvoice(&["speak-once", "--text", "hi"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--peer"));
}
