use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Config problems carry the dotted path of the offending field.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub msg: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.msg)
    }
}

fn err(field: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError { field: field.to_string(), msg: msg.into() }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Lattice {
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    /// Chain length for the trivial scenario.
    pub sites: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Orders {
    pub n: Option<usize>,
    pub n_star: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub qi: f64,
    pub ground: f64,
    pub generator: f64,
    /// Allowed |slope − n_*| for the gap fit.
    pub gap_slope: f64,
    /// Required excess of residual slopes over n.
    pub slope_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { qi: 1e-9, ground: 1e-8, generator: 1e-12, gap_slope: 0.15, slope_margin: 0.8 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QiConfig {
    pub max_single: usize,
    pub max_total: usize,
}

impl Default for QiConfig {
    fn default() -> Self {
        Self { max_single: 2, max_total: 2 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub slopes: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { slopes: true }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareConfig {
    /// "local" or "global" (self-comparison).
    pub against: String,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self { against: "local".into() }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub dir: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// Builtin name or path to a model file with `graph`, `bond_dim` and `maps`.
    pub model: String,
    /// `"corrupted"` swaps in the sign-flipped double-semion tensor.
    pub fixture: Option<String>,
    pub lattice: Lattice,
    pub epsilons: Option<Vec<f64>>,
    pub orders: Orders,
    pub delta_tilde: Option<f64>,
    pub tolerances: Tolerances,
    pub qi: QiConfig,
    pub sweep: SweepConfig,
    pub compare: CompareConfig,
    pub output: Output,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            model: "trivial".into(),
            fixture: None,
            lattice: Lattice::default(),
            epsilons: None,
            orders: Orders::default(),
            delta_tilde: None,
            tolerances: Tolerances::default(),
            qi: QiConfig::default(),
            sweep: SweepConfig::default(),
            compare: CompareConfig::default(),
            output: Output::default(),
            seed: 7,
        }
    }
}

pub const BUILTINS: [&str; 3] = ["double-semion", "toric-code", "trivial"];

/// Sets `path` (dotted) inside a JSON object, creating intermediate objects.
pub fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<(), ConfigError> {
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(err(path, "empty key in dotted path"));
    }
    let mut cur = doc;
    for k in &keys[..keys.len() - 1] {
        if !cur.is_object() {
            return Err(err(path, format!("`{k}` is not inside an object")));
        }
        cur = cur.as_object_mut().unwrap().entry(k.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    match cur {
        Value::Object(m) => {
            m.insert(keys[keys.len() - 1].to_string(), value);
            Ok(())
        }
        _ => Err(err(path, "parent is not an object")),
    }
}

/// `KEY=VALUE`; the value is read as JSON when it parses, else as a string.
pub fn parse_assignment(s: &str) -> Result<(String, Value), ConfigError> {
    let (k, v) = s.split_once('=').ok_or_else(|| err(s, "expected KEY=VALUE"))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.to_string(), value))
}

pub fn load(path: Option<&Path>, sets: &[String], seed: Option<u64>) -> Result<ScenarioConfig, ConfigError> {
    let mut doc = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| err("--config", format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| err("--config", e.to_string()))?
        }
        None => Value::Object(Default::default()),
    };
    for s in sets {
        let (k, v) = parse_assignment(s)?;
        set_path(&mut doc, &k, v)?;
    }
    if let Some(s) = seed {
        set_path(&mut doc, "seed", Value::from(s))?;
    }
    let cfg: ScenarioConfig = serde_json::from_value(doc).map_err(|e| err("config", e.to_string()))?;
    cfg.resolve()
}

impl ScenarioConfig {
    pub fn is_builtin(&self) -> bool {
        BUILTINS.contains(&self.model.as_str())
    }

    /// Fills scenario-dependent defaults and validates ranges.
    pub fn resolve(mut self) -> Result<Self, ConfigError> {
        let (rows, cols, n_star) = match self.model.as_str() {
            "double-semion" => (1, 1, 6),
            "toric-code" => (2, 2, 4),
            "trivial" => (1, 1, 1),
            _ => (1, 1, 2),
        };
        self.lattice.rows.get_or_insert(rows);
        self.lattice.cols.get_or_insert(cols);
        if self.model == "trivial" {
            self.lattice.sites.get_or_insert(3);
        }
        self.orders.n_star.get_or_insert(n_star);
        self.orders.n.get_or_insert(2);
        self.epsilons.get_or_insert_with(|| vec![0.03, 0.02, 0.013]);
        self.delta_tilde.get_or_insert(pepsgad::gadget::default_delta_tilde(6));

        if !self.is_builtin() && !Path::new(&self.model).exists() {
            return Err(err("model", format!("`{}` is neither {} nor an existing file", self.model, BUILTINS.join(" | "))));
        }
        if let Some(f) = &self.fixture {
            if f != "corrupted" {
                return Err(err("fixture", format!("unknown fixture `{f}`")));
            }
            if self.model != "double-semion" {
                return Err(err("fixture", "the corrupted fixture exists for double-semion only"));
            }
        }
        for (i, e) in self.epsilons.as_ref().unwrap().iter().enumerate() {
            if !(*e > 0.0 && *e < 1.0) {
                return Err(err(&format!("epsilons[{i}]"), format!("{e} is outside (0, 1)")));
            }
        }
        let n = self.orders.n.unwrap();
        let ns = self.orders.n_star.unwrap();
        if n == 0 || n > 8 {
            return Err(err("orders.n", "must lie in 1..=8"));
        }
        if ns == 0 || ns > 8 {
            return Err(err("orders.n_star", "must lie in 1..=8"));
        }
        if self.delta_tilde.unwrap() <= 0.0 {
            return Err(err("delta_tilde", "must be positive"));
        }
        if !["local", "global"].contains(&self.compare.against.as_str()) {
            return Err(err("compare.against", "expected \"local\" or \"global\""));
        }
        if self.qi.max_single == 0 {
            return Err(err("qi.max_single", "must be at least 1"));
        }
        Ok(self)
    }

    pub fn eps(&self) -> &[f64] {
        self.epsilons.as_deref().unwrap_or(&[])
    }

    pub fn n(&self) -> usize {
        self.orders.n.unwrap_or(2)
    }

    pub fn n_star(&self) -> usize {
        self.orders.n_star.unwrap_or(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn dotted_paths_create_objects() {
        let mut doc = json!({"orders": {"n": 1}});
        set_path(&mut doc, "orders.n_star", json!(4)).unwrap();
        set_path(&mut doc, "tolerances.qi", json!(1e-6)).unwrap();
        assert_eq!(doc, json!({"orders": {"n": 1, "n_star": 4}, "tolerances": {"qi": 1e-6}}));
        assert!(set_path(&mut doc, "orders.n.x", json!(1)).is_err());
        assert!(set_path(&mut doc, "a..b", json!(1)).is_err());
    }

    #[test]
    fn assignment_values_parse_as_json_or_strings() {
        assert_eq!(parse_assignment("epsilons=[0.1,0.2]").unwrap().1, json!([0.1, 0.2]));
        assert_eq!(parse_assignment("model=toric-code").unwrap().1, json!("toric-code"));
        assert!(parse_assignment("model").is_err());
    }

    #[test]
    fn defaults_follow_the_model() {
        let ds = load(None, &["model=double-semion".into()], None).unwrap();
        assert_eq!((ds.n(), ds.n_star()), (2, 6));
        let tc = load(None, &["model=toric-code".into()], Some(3)).unwrap();
        assert_eq!((tc.lattice.rows, tc.n_star(), tc.seed), (Some(2), 4, 3));
        let e = load(None, &["orders.n=0".into()], None).unwrap_err();
        assert_eq!(e.field, "orders.n");
    }
}
