//! JSON instance files.
//!
//! ```json
//! { "v0": 1.0,
//!   "nests": [ { "gamma": 0.5, "capacity": 2,
//!                "products": [ { "v": 4.0, "r": 3.0 }, { "v": 1.0, "r": 6.0 } ] } ] }
//! ```
//!
//! Numbers are written in the shortest form that parses back to the same
//! `f64`, so `read_instance(write_instance(x)) == x` bit for bit.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{Instance, ModelError};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid instance")]
    Invalid(#[from] ModelError),
    #[error("bad generator spec: {0}")]
    BadSpec(String),
}

/// Parses and validates an instance.
pub fn from_json_str(text: &str) -> Result<Instance, InstanceError> {
    let instance: Instance = serde_json::from_str(text).map_err(|e| InstanceError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    instance.validate()?;
    Ok(instance)
}

pub fn to_json_string(instance: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(instance).expect("instances always serialize");
    s.push('\n');
    s
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_json_str(&text)
}

pub fn write_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    fs::write(path, to_json_string(instance)).map_err(|source| InstanceError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Nest, Product};
    use proptest::prelude::*;

    #[test]
    fn file_round_trip() {
        let inst = Instance::new(
            vec![Nest::new(
                vec![Product::new(4.0, 6.0), Product::new(0.1, 8.5), Product::new(1.0 / 3.0, 2.5)],
                0.5,
                2,
            )],
            1.0,
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.json");
        write_instance(&inst, &path).unwrap();
        assert_eq!(read_instance(&path).unwrap(), inst);
    }

    #[test]
    fn missing_v0_names_the_field() {
        let err = from_json_str(r#"{"nests": []}"#).unwrap_err();
        match err {
            InstanceError::Parse { line, message, .. } => {
                assert_eq!(line, 1);
                assert!(message.contains("v0"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_location() {
        let err = from_json_str("{\n  \"v0\": 1.0,\n  \"nests\": [ oops ]\n}").unwrap_err();
        assert!(matches!(err, InstanceError::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn invalid_gamma_surfaces_on_read() {
        let text = r#"{"v0": 1, "nests": [{"gamma": 1.5, "capacity": 1, "products": [{"v": 1, "r": 1}]}]}"#;
        assert!(matches!(
            from_json_str(text),
            Err(InstanceError::Invalid(ModelError::GammaOutOfRange { nest: 0, .. }))
        ));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            read_instance("/nonexistent/instance.json"),
            Err(InstanceError::Io { .. })
        ));
    }

    proptest! {
        #[test]
        fn text_round_trip_is_exact(
            nests in prop::collection::vec(
                (prop::collection::vec((0.0..1e6f64, 0.0..1e6f64), 0..5), 1e-9..=1.0f64, 0usize..6),
                1..4),
            v0 in 1e-12..1e12f64,
        ) {
            let inst = Instance::new(
                nests.into_iter()
                    .map(|(ps, g, c)| Nest::new(ps.into_iter().map(|(v, r)| Product::new(v, r)).collect(), g, c))
                    .collect(),
                v0,
            );
            let back = from_json_str(&to_json_string(&inst)).unwrap();
            prop_assert_eq!(back, inst);
        }
    }
}
