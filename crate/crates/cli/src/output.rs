use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use johnforge_core::{BoundingBox, SCHEMA};

use crate::CliError;

/// Writes `bytes` to a temporary file next to `path`, then renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    // temporary files are created owner-only; artifacts get the usual mode
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))
            .map_err(io)?;
    }
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Every JSON artifact: schema tag, subcommand, resolved parameters and the
/// result. Nothing time- or host-dependent is written.
#[derive(Serialize)]
pub struct Envelope<'a, P: Serialize, R: Serialize> {
    pub schema: &'static str,
    pub command: &'a str,
    pub params: &'a P,
    pub result: &'a R,
}

pub fn envelope_json<P: Serialize, R: Serialize>(
    command: &str,
    params: &P,
    result: &R,
) -> Result<String, CliError> {
    let env = Envelope {
        schema: SCHEMA,
        command,
        params,
        result,
    };
    let mut s = serde_json::to_string_pretty(&env).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes the envelope to `out`, or to stdout when no path is given.
pub fn emit<P: Serialize, R: Serialize>(
    command: &str,
    params: &P,
    result: &R,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let text = envelope_json(command, params, result)?;
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Reads a JSON artifact and returns its `result` member (or the whole
/// document when it is not wrapped).
pub fn read_result(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
    if let Some(schema) = v.get("schema").and_then(Value::as_str) {
        if schema != SCHEMA {
            return Err(CliError::Format(format!(
                "{}: unknown schema {schema}",
                path.display()
            )));
        }
    }
    Ok(match v {
        Value::Object(mut m) if m.contains_key("result") && m.contains_key("command") => {
            m.remove("result").unwrap()
        }
        other => other,
    })
}

/// CSV with a header row; values in shortest round-trip form.
pub fn csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct FieldSidecar<'a> {
    schema: &'static str,
    kind: &'static str,
    data: &'a str,
    level: u32,
    #[serde(rename = "box")]
    bbox: BoundingBox,
    value_type: &'static str,
    layout: &'static str,
    inactive: &'static str,
}

/// Flat little-endian `f64` grid plus a JSON sidecar at `<path>.json`.
pub fn write_field(
    path: &Path,
    bbox: BoundingBox,
    level: u32,
    values: &[f64],
) -> Result<(), CliError> {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    write_atomic(path, &bytes)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let side = FieldSidecar {
        schema: SCHEMA,
        kind: "field",
        data: &name,
        level,
        bbox,
        value_type: "f64le",
        layout: "row-major, x fastest, origin at the lower-left corner",
        inactive: "NaN",
    };
    let mut text = serde_json::to_string_pretty(&side).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".json");
    write_atomic(Path::new(&sidecar), text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        // no temporary files left behind
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let s = csv(&["n", "gap"], &[vec![4.0, 0.5], vec![8.0, 0.25]]);
        assert_eq!(s, "n,gap\n4,0.5\n8,0.25\n");
    }
}
