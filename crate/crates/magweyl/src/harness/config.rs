//! Suite configuration: a TOML document with plain values and nested tables.
//! Every field has a default, so an empty document is the default config.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::harness::checks;
use crate::magnetics::{GaugeFunction, MagneticField, Poly, VectorPotential, DEFAULT_NODES};
use crate::weyl::Params;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Suites run when a config does not list any.
pub const DEFAULT_SUITES: [&str; 7] = ["grid", "weyl", "products", "supercalc", "appendix", "inequalities", "seminorms"];

/// Suites that exist but are only run on request.
pub const OPTIONAL_SUITES: [&str; 1] = ["closed-forms"];

/// Field strength of the default Landau potential.
pub const DEFAULT_LANDAU_B: f64 = 0.5;

/// Key in `[tolerances]` that overrides every check.
pub const ALL_CHECKS: &str = "all";

/// Box length with `Δx = Δξ` for a grid of `n` sites.
pub fn balanced_length(n: usize) -> f64 {
    (2.0 * std::f64::consts::PI * n as f64).sqrt()
}

fn default_grid() -> GridSpec {
    GridSpec { d: 1, n: 15, l: balanced_length(15) }
}

fn default_seed() -> u64 {
    20_240_611
}

fn one() -> f64 {
    1.0
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}

fn default_suites() -> Vec<String> {
    DEFAULT_SUITES.iter().map(|s| s.to_string()).collect()
}

/// Gauge function table: `chi` is a list of `{coef, pow}` monomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeSpec {
    pub chi: Poly,
}

/// Symbol families a config may name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum SymbolFamily {
    /// `exp(−|x − center|²/(2w²) − |ξ − momentum|²/(2w²))`.
    Gaussian { center: Vec<f64>, width: f64, momentum: Vec<f64> },
    /// Plane wave at the lattice point `(j, l)`.
    Planewave { j: Vec<i64>, l: Vec<i64> },
    /// Liouville symbol of the named symbol.
    Liouville { h: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolSpec {
    pub name: String,
    #[serde(flatten)]
    pub family: SymbolFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "one")]
    pub eps: f64,
    #[serde(default = "one")]
    pub lambda: f64,
    /// Circulation quadrature nodes unless a suite overrides them.
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_suites")]
    pub suites: Vec<String>,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(default)]
    pub field: Option<MagneticField>,
    /// Absent potential and field: Landau gauge with `b = 0.5`.
    #[serde(default)]
    pub potential: Option<VectorPotential>,
    #[serde(default)]
    pub gauge: Option<GaugeSpec>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub suite_nodes: BTreeMap<String, usize>,
    #[serde(default)]
    pub symbols: Vec<SymbolSpec>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty document uses defaults")
    }
}

fn known_suite(s: &str) -> bool {
    DEFAULT_SUITES.contains(&s) || OPTIONAL_SUITES.contains(&s)
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SuiteConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| bad(e.to_string()))
    }

    pub fn params(&self) -> Result<Params> {
        Params::new(self.eps, self.lambda)
    }

    /// Checks every reference and range; run by [`SuiteConfig::from_toml`].
    pub fn validate(&self) -> Result<()> {
        let grid = GridSpec::new(self.grid.d, self.grid.n, self.grid.l)?;
        self.params()?;
        if self.nodes == 0 {
            return Err(bad("nodes must be at least 1"));
        }
        if let Some(f) = &self.field {
            f.validate()?;
            if f.d() != grid.d {
                return Err(bad(format!("field dimension {} differs from grid dimension {}", f.d(), grid.d)));
            }
        }
        if let Some(a) = &self.potential {
            a.validate()?;
            if a.d() != grid.d {
                return Err(bad(format!("potential dimension {} differs from grid dimension {}", a.d(), grid.d)));
            }
        }
        if let Some(g) = &self.gauge {
            if g.chi.terms.iter().any(|t| t.pow.len() != grid.d) {
                return Err(bad("gauge monomials must have one power per dimension"));
            }
        }
        for s in &self.suites {
            if !known_suite(s) {
                return Err(bad(format!("unknown suite {s:?}")));
            }
        }
        for (s, &k) in &self.suite_nodes {
            if !known_suite(s) {
                return Err(bad(format!("unknown suite {s:?} in suite_nodes")));
            }
            if k == 0 {
                return Err(bad(format!("suite_nodes.{s} must be at least 1")));
            }
        }
        for (id, &t) in &self.tolerances {
            if id != ALL_CHECKS && checks::find(id).is_none() {
                return Err(bad(format!("tolerance for unknown check {id:?}")));
            }
            if !(t.is_finite() && t >= 0.0) {
                return Err(bad(format!("tolerance for {id:?} must be finite and non-negative (got {t})")));
            }
        }
        self.validate_symbols(grid.d)
    }

    fn validate_symbols(&self, d: usize) -> Result<()> {
        let mut names = BTreeMap::new();
        for s in &self.symbols {
            if names.insert(s.name.as_str(), &s.family).is_some() {
                return Err(bad(format!("duplicate symbol name {:?}", s.name)));
            }
        }
        for s in &self.symbols {
            match &s.family {
                SymbolFamily::Gaussian { center, width, momentum } => {
                    if center.len() != d || momentum.len() != d {
                        return Err(bad(format!("symbol {:?}: center and momentum need {d} entries", s.name)));
                    }
                    if !(width.is_finite() && *width > 0.0) {
                        return Err(bad(format!("symbol {:?}: width must be positive", s.name)));
                    }
                }
                SymbolFamily::Planewave { j, l } => {
                    if j.len() != d || l.len() != d {
                        return Err(bad(format!("symbol {:?}: j and l need {d} entries", s.name)));
                    }
                }
                SymbolFamily::Liouville { h } => match names.get(h.as_str()) {
                    None => return Err(bad(format!("symbol {:?} refers to unknown symbol {h:?}", s.name))),
                    Some(SymbolFamily::Liouville { .. }) => {
                        return Err(bad(format!("symbol {:?}: liouville symbols must refer to a plain symbol", s.name)))
                    }
                    Some(_) => {}
                },
            }
        }
        Ok(())
    }

    /// Tolerance of a check: `[tolerances]` entry, then `all`, then the default.
    pub fn tolerance(&self, id: &str, default: f64) -> f64 {
        self.tolerances.get(id).or_else(|| self.tolerances.get(ALL_CHECKS)).copied().unwrap_or(default)
    }

    pub fn nodes_for(&self, suite: &str) -> usize {
        self.suite_nodes.get(suite).copied().unwrap_or(self.nodes)
    }

    /// The configured potential, or the Landau default when neither a
    /// potential nor a field is given.
    pub fn resolved_potential(&self) -> Option<VectorPotential> {
        match (&self.potential, &self.field) {
            (Some(a), _) => Some(a.clone()),
            (None, Some(_)) => None,
            (None, None) => Some(VectorPotential::Landau { d: self.grid.d, b: DEFAULT_LANDAU_B }),
        }
    }

    pub fn gauge_function(&self) -> Option<GaugeFunction> {
        self.gauge.as_ref().map(|g| GaugeFunction { chi: g.chi.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        let c = SuiteConfig::from_toml("").unwrap();
        assert_eq!(c.grid.n, 15);
        assert_eq!(c.suites.len(), DEFAULT_SUITES.len());
        assert_eq!(c, SuiteConfig::default());
    }

    #[test]
    fn full_document_round_trips() {
        let text = r#"
            seed = 3
            eps = 0.5
            suites = ["grid", "closed-forms"]
            [grid]
            d = 2
            n = 5
            L = 6.0
            [potential]
            family = "symmetric"
            b = 0.7
            [gauge]
            chi = [{ coef = 0.2, pow = [1, 1] }]
            [tolerances]
            all = 1e-6
            weyl-composition = 1e-9
            [suite_nodes]
            weyl = 12
            [[symbols]]
            name = "g"
            family = "gaussian"
            center = [0.1, 0.2]
            width = 1.0
            momentum = [0.0, 0.3]
            [[symbols]]
            name = "lg"
            family = "liouville"
            h = "g"
        "#;
        let c = SuiteConfig::from_toml(text).unwrap();
        assert_eq!(c.tolerance("weyl-composition", 1.0), 1e-9);
        assert_eq!(c.tolerance("plancherel", 1.0), 1e-6);
        assert_eq!(c.nodes_for("weyl"), 12);
        assert_eq!(c.nodes_for("grid"), DEFAULT_NODES);
        let again = SuiteConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn references_and_ranges_are_checked() {
        for text in [
            "suites = [\"nope\"]",
            "[tolerances]\nnope = 1.0",
            "[tolerances]\nplancherel = -1.0",
            "[[symbols]]\nname = \"a\"\nfamily = \"liouville\"\nh = \"b\"",
            "[[symbols]]\nname = \"a\"\nfamily = \"planewave\"\nj = [1, 2]\nl = [0, 0]",
            "[grid]\nd = 1\nn = 4\nL = 3.0",
            "eps = 0.0",
            "[potential]\nfamily = \"symmetric\"\nb = 1.0",
            "bogus = 1",
        ] {
            assert!(SuiteConfig::from_toml(text).is_err(), "{text}");
        }
        assert!(SuiteConfig::from_toml("[tolerances]\nall = 0.0").is_ok());
    }
}
