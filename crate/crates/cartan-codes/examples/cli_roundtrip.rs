//! Drive the file-based workflow end to end from library code: write a
//! search config, run the search command, re-load the produced code and
//! parameters, and re-derive the reported loss from each.
//!
//! The same files work with the installed binary:
//!
//! ```text
//! cartan-codes search --config run.json --out-dir out/
//! cartan-codes verify out/code.json --noise '{"family":"amplitude_damping","gamma":0.1}'
//! ```
//!
//! Run with: `cargo run --example cli_roundtrip`

use cartan_codes::Result;
use cartan_codes::cli::{ResultFile, cmd_search, cmd_verify};
use cartan_codes::qec::CodeFile;

fn main() -> Result<()> {
    let dir = std::env::temp_dir().join("cartan-codes-example");
    std::fs::create_dir_all(&dir)?;
    let config_path = dir.join("run.json");
    let out_dir = dir.join("out");

    std::fs::write(
        &config_path,
        r#"{
  "noise": {"family": "amplitude_damping", "gamma": 0.1},
  "n_qubits": 3,
  "mode": "structured_trivial",
  "restarts": 6,
  "seed": 5
}
"#,
    )?;

    println!("== search ==");
    cmd_search(&config_path, &out_dir, None, None)?;

    // Everything the run produced is plain JSON.
    let result: ResultFile =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("result.json"))?)?;
    let code: CodeFile =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("code.json"))?)?;
    println!("\nreloaded result.json: eta = {:.6}, {} parameters", result.eta, result.params.params.len());
    println!("reloaded code.json:   n = {} qubits", code.n_qubits);

    println!("\n== verify (same code, independent route) ==");
    cmd_verify(
        out_dir.join("code.json").to_str().unwrap(),
        r#"{"family":"amplitude_damping","gamma":0.1}"#,
        4000,
    )?;
    Ok(())
}
