use std::path::Path;

use serde::Deserialize;

use crate::energy_planner::{dbm_to_watts, BsPowerProfile, BUILTIN_PROFILES};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    p_dbm: Option<f64>,
    p_watts: Option<f64>,
    eta: f64,
    pc: f64,
    ppre: f64,
    p0: f64,
}

/// A built-in profile by name, or a flat TOML file with keys
/// `p_dbm | p_watts, eta, pc, ppre, p0`.
pub fn load_profile(name_or_path: &str) -> Result<BsPowerProfile> {
    if BUILTIN_PROFILES.contains(&name_or_path) {
        return BsPowerProfile::builtin(name_or_path);
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return Err(Error::Config(format!(
            "{name_or_path:?} is neither a built-in profile ({}) nor a readable file",
            BUILTIN_PROFILES.join(", ")
        )));
    }
    let text = std::fs::read_to_string(path)?;
    parse_profile(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_profile(text: &str) -> Result<BsPowerProfile> {
    let raw: ProfileFile = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
    let p = match (raw.p_dbm, raw.p_watts) {
        (Some(dbm), None) => dbm_to_watts(dbm),
        (None, Some(w)) => w,
        (Some(_), Some(_)) => return Err(Error::Config("give only one of p_dbm and p_watts".into())),
        (None, None) => return Err(Error::Config("missing transmit power: p_dbm or p_watts".into())),
    };
    BsPowerProfile::new(p, raw.eta, raw.pc, raw.ppre, raw.p0).map_err(|e| match e {
        Error::Domain(msg) => Error::Config(msg),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_dbm_and_watts() {
        let p = parse_profile("p_dbm = 33\neta = 0.08\npc = 6.8\nppre = 1.74\np0 = 1.5\n").unwrap();
        assert_eq!(p, BsPowerProfile::builtin("pico").unwrap());
        let p = parse_profile("p_watts = 2.0\neta = 0.5\npc = 1\nppre = 1\np0 = 1\n").unwrap();
        assert_eq!(p.p, 2.0);
    }

    #[test]
    fn rejects_bad_files() {
        let err = parse_profile("p_dbm = 33\neta = 1.5\npc = 6.8\nppre = 1.74\np0 = 1.5\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(parse_profile("p_dbm = 33\neta = 0.5\npc = 6.8\nppre = 1.74\n").is_err());
        assert!(parse_profile("p_dbm = 33\neta = 0.5\npc = 6.8\nppre = 1.74\np0 = 1\nextra = 2\n").is_err());
        assert!(parse_profile("p_dbm = 33\np_watts = 2\neta = 0.5\npc = 6.8\nppre = 1.74\np0 = 1\n").is_err());
        assert!(parse_profile("eta = 0.5\npc = 6.8\nppre = 1.74\np0 = 1\n").is_err());
        assert!(load_profile("no-such-profile").is_err());
    }
}
