//! Optional TOML configuration; every key mirrors a command-line flag of the
//! same name and the command line wins.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub p: Option<u32>,
    pub trials: Option<usize>,
    pub threads: Option<usize>,
    pub budget: Option<u64>,
    pub timings: Option<bool>,
    pub kind: Option<String>,
    pub locus: Option<String>,
    pub sigma: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_known_keys() {
        let c = FileConfig::parse("seed = 4\np = 7\ntimings = true\nlocus = \"o2\"").unwrap();
        assert_eq!(c.seed, Some(4));
        assert_eq!(c.p, Some(7));
        assert_eq!(c.timings, Some(true));
        assert_eq!(c.locus.as_deref(), Some("o2"));
        assert_eq!(c.trials, None);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(FileConfig::parse("primes = [3]").is_err());
        assert!(FileConfig::parse("seed = \"x\"").is_err());
    }

    #[test]
    fn empty_file_is_default() {
        assert_eq!(FileConfig::parse("").unwrap(), FileConfig::default());
    }
}
