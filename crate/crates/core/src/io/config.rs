use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::sim::{default_alpha_grid, OrderConfig, SimConfig, SimMode};

/// A parsed `simulate` configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum Study {
    /// Mean log-ratio curves over an α grid.
    Curve(SimConfig),
    /// Exact versus expanded likelihood at each α.
    Order(OrderConfig),
}

impl Study {
    pub fn seed(&self) -> u64 {
        match self {
            Study::Curve(c) => c.seed,
            Study::Order(o) => o.seed,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            Study::Curve(c) => c.seed = seed,
            Study::Order(o) => o.seed = seed,
        }
    }
}

const KEYS: [&str; 9] = ["study", "mode", "b", "c", "b_vec", "alphas", "alpha_points", "n", "seed"];

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn real(key: &str, s: &str) -> Result<f64> {
    if !s.contains('.') {
        return Err(cfg_err(format!("{key}: {s:?} needs an explicit decimal point")));
    }
    s.parse()
        .ok()
        .filter(|v: &f64| v.is_finite())
        .ok_or_else(|| cfg_err(format!("{key}: {s:?} is not a real number")))
}

fn reals(key: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|t| real(key, t.trim())).collect()
}

fn integer(key: &str, s: &str) -> Result<u64> {
    s.parse()
        .map_err(|_| cfg_err(format!("{key}: {s:?} is not a nonnegative integer")))
}

/// Parse flat `key = value` text. `#` starts a comment.
///
/// Keys: `study` (`curve` or `order`), `mode` (`coalescing` or `general`),
/// `b`, `c`, `b_vec`, `alphas` (comma-separated lists), `alpha_points`,
/// `n`, `seed`. Real numbers must contain a decimal point; `n`,
/// `alpha_points` and `seed` are integers.
pub fn parse_study_config(text: &str) -> Result<Study> {
    let mut kv: BTreeMap<&str, &str> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| cfg_err(format!("line {}: expected key = value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(cfg_err(format!("line {}: unknown key {k:?}", i + 1)));
        }
        if kv.insert(k, v).is_some() {
            return Err(cfg_err(format!("line {}: duplicate key {k:?}", i + 1)));
        }
    }
    let get_real = |k: &str| kv.get(k).map(|v| real(k, v)).transpose();
    let get_reals = |k: &str| kv.get(k).map(|v| reals(k, v)).transpose();
    let get_int = |k: &str| kv.get(k).map(|v| integer(k, v)).transpose();

    let seed = get_int("seed")?.unwrap_or(0);
    let study = kv.get("study").copied().unwrap_or("curve");
    match study {
        "curve" => {
            let mode = match kv.get("mode").copied() {
                Some("coalescing") => SimMode::Coalescing {
                    b: get_real("b")?.ok_or_else(|| cfg_err("coalescing mode needs b"))?,
                    c: get_reals("c")?.ok_or_else(|| cfg_err("coalescing mode needs c"))?,
                },
                Some("general") => SimMode::General {
                    b_vec: get_reals("b_vec")?.ok_or_else(|| cfg_err("general mode needs b_vec"))?,
                },
                Some(other) => return Err(cfg_err(format!("unknown mode {other:?}"))),
                None => return Err(cfg_err("curve study needs mode")),
            };
            let grid = match get_reals("alphas")? {
                Some(g) => g,
                None => default_alpha_grid(get_int("alpha_points")?.unwrap_or(10) as usize),
            };
            let n = get_int("n")?.unwrap_or(10_000) as usize;
            Ok(Study::Curve(SimConfig::new(mode, grid, n, seed)?))
        }
        "order" => {
            if kv.contains_key("mode") || kv.contains_key("b_vec") {
                return Err(cfg_err("order study uses the coalescing model only (b, c)"));
            }
            let cfg = OrderConfig {
                b: get_real("b")?.ok_or_else(|| cfg_err("order study needs b"))?,
                c: get_reals("c")?.ok_or_else(|| cfg_err("order study needs c"))?,
                alphas: get_reals("alphas")?.unwrap_or_else(|| vec![0.04, 0.02, 0.01]),
                n: get_int("n")?.unwrap_or(200) as usize,
                seed,
            };
            Ok(Study::Order(cfg))
        }
        other => Err(cfg_err(format!("unknown study {other:?}"))),
    }
}
