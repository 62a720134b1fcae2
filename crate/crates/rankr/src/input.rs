use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use rankr_core::catalog::{self, CatalogEntry};
use rankr_core::newton::SharedSystem;
use rankr_core::polysys::PolySystem;
use rankr_core::{Vector, C64};
use serde::Deserialize;

/// Contents of a polynomial system file.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PolyFile {
    pub vars: Vec<String>,
    pub equations: Vec<String>,
}

impl PolyFile {
    pub fn into_system(self) -> rankr_core::Result<PolySystem> {
        let vars: Vec<&str> = self.vars.iter().map(String::as_str).collect();
        let eqs: Vec<&str> = self.equations.iter().map(String::as_str).collect();
        PolySystem::parse(&vars, &eqs)
    }
}

pub enum SystemSource {
    Catalog(Box<CatalogEntry>),
    File(SharedSystem),
}

impl SystemSource {
    pub fn system(&self) -> SharedSystem {
        match self {
            SystemSource::Catalog(e) => e.system.clone(),
            SystemSource::File(s) => s.clone(),
        }
    }

    pub fn entry(&self) -> Option<&CatalogEntry> {
        match self {
            SystemSource::Catalog(e) => Some(e),
            SystemSource::File(_) => None,
        }
    }
}

/// Resolves a catalog key, or failing that, a path to a polynomial file.
pub fn load_system(key: &str, t: Option<C64>) -> Result<SystemSource> {
    if catalog::NAMES.contains(&key) {
        return Ok(SystemSource::Catalog(Box::new(catalog::lookup_with(key, t)?)));
    }
    let path = Path::new(key);
    if !path.is_file() {
        return Err(rankr_core::Error::UnknownSystem(key.to_string()).into());
    }
    if t.is_some() {
        bail!("--t applies only to cyclic4");
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {key}"))?;
    let file: PolyFile =
        serde_json::from_str(&text).with_context(|| format!("{key} is not a polynomial file"))?;
    let sys = file.into_system()?.with_label(key);
    Ok(SystemSource::File(Arc::new(sys)))
}

/// `a`, `a+bi`, `a-bi` or `bi`, without spaces.
pub fn parse_complex(s: &str) -> Result<C64> {
    if s.is_empty() || s.contains(char::is_whitespace) {
        bail!("bad complex literal `{s}`");
    }
    s.parse::<C64>()
        .map_err(|_| anyhow::anyhow!("bad complex literal `{s}`"))
}

pub fn parse_complex_list(s: &str) -> Result<Vector> {
    let v = s
        .split(',')
        .map(parse_complex)
        .collect::<Result<Vec<_>>>()?;
    Ok(Vector::from_vec(v))
}
