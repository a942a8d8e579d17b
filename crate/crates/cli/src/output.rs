//! Report files: JSON with 17-digit floats, CSV, atomic writes.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use robin_core::io::fmt_f64;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::CliError;

/// Pretty JSON whose floats carry 17 significant digits.
struct Digits17<'a>(PrettyFormatter<'a>);

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> std::io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

/// Serializes `value` as pretty JSON with 17-digit floats.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Io(format!("serializing report: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| CliError::Io(e.to_string()))
}

/// Envelope of every JSON report; `timestamp` is the only field that
/// differs between identical runs.
#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize, R: Serialize> {
    pub command: &'a str,
    pub converged: bool,
    pub config: &'a C,
    pub result: &'a R,
    pub timestamp: u64,
}

pub fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Writes `contents` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::Io(format!("temporary file in {}: {e}", dir.display())))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| CliError::Io(format!("writing {}: {e}", target.display())))?;
    tmp.persist(&target)
        .map_err(|e| CliError::Io(format!("renaming onto {}: {e}", target.display())))?;
    Ok(target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_17_digits() {
        let s =
            to_json(&serde_json::json!({"a": 0.1, "b": [1.5, -2.0], "c": 3, "d": null})).unwrap();
        assert!(s.contains("\"a\": 1.0000000000000001e-1"), "{s}");
        assert!(s.contains("1.5000000000000000e0"), "{s}");
        assert!(s.contains("\"c\": 3"), "{s}");
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }

    #[test]
    fn non_finite_becomes_null() {
        let s = to_json(&vec![f64::NAN, f64::INFINITY]).unwrap();
        assert!(!s.contains("NaN") && s.contains("null"), "{s}");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "x.txt", "one").unwrap();
        let p = write_atomic(dir.path(), "x.txt", "two").unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
