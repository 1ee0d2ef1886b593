//! Report assembly and emission. Reports are JSON with sorted keys and
//! 10-significant-digit floats, so identical runs produce identical bytes.
//! Each report echoes a SHA-256 digest of every input file it consumed.

use std::path::Path;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use srgm_core::numfmt::to_json_string;
use srgm_core::{Error, Result};

/// Digest entry for one input file: the path as given plus its content hash.
pub fn input_entry(path: &Path) -> Result<Value> {
    let bytes =
        std::fs::read(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    Ok(json!({
        "path": path.display().to_string(),
        "sha256": hex,
    }))
}

/// Builds the `inputs` section from `(label, path)` pairs.
pub fn inputs_section(files: &[(&str, &Path)]) -> Result<Value> {
    let mut map = serde_json::Map::new();
    for (label, path) in files {
        map.insert((*label).to_string(), input_entry(path)?);
    }
    Ok(Value::Object(map))
}

/// Wraps a subcommand result into the common report envelope.
pub fn envelope(command: &str, inputs: Value, result: Value) -> Value {
    json!({
        "command": command,
        "inputs": inputs,
        "result": result,
    })
}

/// Writes the report to `out`, or to stdout when no path was given. The
/// serialized text is built in full before any byte is written.
pub fn emit(out: Option<&Path>, report: &Value) -> Result<()> {
    let text = to_json_string(report);
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Writes a machine artifact (saved network weights) at full precision, so
/// reloading it reproduces the exact floats. Reports round floats for humans;
/// this must not.
pub fn emit_exact(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

/// Writes plain text (CSV plot data) to `out` or stdout.
pub fn emit_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn input_entry_hashes_content() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"hello\n").unwrap();
        let entry = input_entry(f.path()).unwrap();
        assert_eq!(
            entry["sha256"],
            "5891b5b522d5df086d0ff0b110fbd9d21bb4fc7163af34d08286a2e846f6be03"
        );
    }

    #[test]
    fn envelope_serializes_with_sorted_keys() {
        let report = envelope("fit", json!({}), json!({"z": 1.0, "a": 2.0}));
        let text = to_json_string(&report);
        let a = text.find("\"a\"").unwrap();
        let z = text.find("\"z\"").unwrap();
        assert!(a < z, "keys must be sorted: {text}");
    }
}
