//! JSON config files mirroring the command-line flags. A flag given on the
//! command line always wins over the file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

/// A scalar or a list, so `"n": 10` and `"n": [4, 10, 60]` both parse.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

impl OneOrMany {
    pub fn into_vec(self) -> Vec<usize> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<OneOrMany>,
    pub j: Option<f64>,
    pub bx_min: Option<f64>,
    pub bx_max: Option<f64>,
    pub steps: Option<usize>,
    pub k: Option<OneOrMany>,
    pub jx0: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub state_file: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    /// A single `n`; a list in the file is only accepted if it has one entry.
    pub fn single_n(&self) -> Result<Option<usize>, CliError> {
        match &self.n {
            None => Ok(None),
            Some(OneOrMany::One(x)) => Ok(Some(*x)),
            Some(OneOrMany::Many(v)) if v.len() == 1 => Ok(Some(v[0])),
            Some(OneOrMany::Many(v)) => Err(CliError::Usage(format!("this command takes a single n, config has {v:?}"))),
        }
    }
}

/// Flag, then config entry, then default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// List flag (empty when not given), then config entry, then default.
pub fn pick_list(flag: Vec<usize>, file: Option<OneOrMany>, default: &[usize]) -> Vec<usize> {
    if !flag.is_empty() {
        flag
    } else {
        file.map(OneOrMany::into_vec).unwrap_or_else(|| default.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_scalars_and_lists() {
        let c: FileConfig = serde_json::from_str(r#"{"n": [4, 10], "j": 0.5, "k": 2}"#).unwrap();
        assert_eq!(c.n, Some(OneOrMany::Many(vec![4, 10])));
        assert_eq!(c.k.clone().map(OneOrMany::into_vec), Some(vec![2]));
        assert!(c.single_n().is_err());
        assert!(serde_json::from_str::<FileConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn flags_win() {
        assert_eq!(pick(Some(3), Some(4), 5), 3);
        assert_eq!(pick(None, Some(4), 5), 4);
        assert_eq!(pick(None, None, 5), 5);
        assert_eq!(pick_list(vec![], Some(OneOrMany::One(7)), &[1]), vec![7]);
        assert_eq!(pick_list(vec![2], Some(OneOrMany::One(7)), &[1]), vec![2]);
    }
}
