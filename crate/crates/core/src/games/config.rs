//! JSON game-config schema.
//!
//! A config is an object whose `family` discriminator selects one of
//! `polynomial`, `bilinear`, `perturbed_bilinear`, `quadratic`, `rps`,
//! or `composite`. Matrices are row-major arrays of arrays; polynomial
//! terms are `{"c": .., "e1": [..], "e2": [..]}`; `composite` nests two
//! game objects plus `"t"`. Validation errors carry the JSON path of the
//! offending field.

use super::{GameDefinition, GameError, GameFamily, PolyTerm};
use crate::games::BlockDims;
use crate::linalg::Mat;
use serde::{Serialize, Serializer};
use serde_json::{json, Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("game config error at `{path}`: {reason}")]
pub struct ConfigError {
    pub path: String,
    pub reason: String,
}

impl ConfigError {
    fn new(path: &str, reason: impl Into<String>) -> Self {
        Self { path: path.to_string(), reason: reason.into() }
    }
}

fn join(prefix: &str, field: &str) -> String {
    if prefix.is_empty() {
        field.to_string()
    } else {
        format!("{prefix}.{field}")
    }
}

struct Fields<'a> {
    prefix: &'a str,
    map: &'a Map<String, Value>,
}

impl<'a> Fields<'a> {
    fn get(&self, name: &str) -> Result<&'a Value, ConfigError> {
        self.map
            .get(name)
            .ok_or_else(|| ConfigError::new(&join(self.prefix, name), "missing required field"))
    }

    fn opt(&self, name: &str) -> Option<&'a Value> {
        self.map.get(name)
    }

    fn f64(&self, name: &str) -> Result<f64, ConfigError> {
        let v = self.get(name)?;
        v.as_f64().ok_or_else(|| ConfigError::new(&join(self.prefix, name), "expected a number"))
    }

    fn usize(&self, name: &str) -> Result<usize, ConfigError> {
        let v = self.get(name)?;
        v.as_u64()
            .map(|n| n as usize)
            .ok_or_else(|| ConfigError::new(&join(self.prefix, name), "expected a non-negative integer"))
    }

    fn matrix(&self, name: &str) -> Result<Mat, ConfigError> {
        let path = join(self.prefix, name);
        let rows = self
            .get(name)?
            .as_array()
            .ok_or_else(|| ConfigError::new(&path, "expected an array of arrays"))?;
        let mut data: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let row = row
                .as_array()
                .ok_or_else(|| ConfigError::new(&format!("{path}[{i}]"), "expected an array"))?;
            let mut out = Vec::with_capacity(row.len());
            for (j, v) in row.iter().enumerate() {
                out.push(v.as_f64().ok_or_else(|| {
                    ConfigError::new(&format!("{path}[{i}][{j}]"), "expected a number")
                })?);
            }
            data.push(out);
        }
        if data.is_empty() || data[0].is_empty() {
            return Err(ConfigError::new(&path, "matrix must be non-empty"));
        }
        Mat::from_rows(&data).ok_or_else(|| ConfigError::new(&path, "rows have unequal lengths"))
    }

    fn exponents(&self, value: &Value, path: &str) -> Result<Vec<u32>, ConfigError> {
        let arr =
            value.as_array().ok_or_else(|| ConfigError::new(path, "expected an array of integers"))?;
        let mut out = Vec::with_capacity(arr.len());
        for (j, v) in arr.iter().enumerate() {
            let n = v.as_u64().ok_or_else(|| {
                ConfigError::new(&format!("{path}[{j}]"), "expected a non-negative integer")
            })?;
            out.push(n as u32);
        }
        Ok(out)
    }

    fn reject_unknown(&self, allowed: &[&str]) -> Result<(), ConfigError> {
        for key in self.map.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(ConfigError::new(&join(self.prefix, key), "unknown field"));
            }
        }
        Ok(())
    }
}

/// Parses a JSON game config into a validated [`GameDefinition`].
/// Round-trips through [`emit_game_config`].
pub fn parse_game_config(text: &str) -> Result<GameDefinition, ConfigError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| ConfigError::new("", format!("invalid JSON: {e}")))?;
    parse_value(&value, "")
}

fn parse_value(value: &Value, prefix: &str) -> Result<GameDefinition, ConfigError> {
    let map = value
        .as_object()
        .ok_or_else(|| ConfigError::new(prefix, "expected a JSON object"))?;
    let fields = Fields { prefix, map };
    let family = fields
        .get("family")?
        .as_str()
        .ok_or_else(|| ConfigError::new(&join(prefix, "family"), "expected a string"))?;

    // An explicit m1/m2 must agree with shapes inferred from matrices.
    let check_dims = |got: BlockDims| -> Result<(), ConfigError> {
        if let Some(v) = fields.opt("m1") {
            let m1 = v.as_u64().map(|n| n as usize);
            if m1 != Some(got.m1()) {
                return Err(ConfigError::new(
                    &join(prefix, "m1"),
                    format!("inconsistent with matrix shapes (expected {})", got.m1()),
                ));
            }
        }
        if let Some(v) = fields.opt("m2") {
            let m2 = v.as_u64().map(|n| n as usize);
            if m2 != Some(got.m2()) {
                return Err(ConfigError::new(
                    &join(prefix, "m2"),
                    format!("inconsistent with matrix shapes (expected {})", got.m2()),
                ));
            }
        }
        Ok(())
    };

    let lift = |e: GameError| match e {
        GameError::Invalid { path, reason } => ConfigError::new(&join(prefix, &path), reason),
        other => ConfigError::new(prefix, other.to_string()),
    };

    match family {
        "polynomial" => {
            fields.reject_unknown(&["family", "m1", "m2", "terms"])?;
            let m1 = fields.usize("m1")?;
            let m2 = fields.usize("m2")?;
            let dims = BlockDims::new(m1, m2).map_err(lift)?;
            let terms_path = join(prefix, "terms");
            let terms_val = fields
                .get("terms")?
                .as_array()
                .ok_or_else(|| ConfigError::new(&terms_path, "expected an array"))?;
            let mut terms = Vec::with_capacity(terms_val.len());
            for (k, tv) in terms_val.iter().enumerate() {
                let tpath = format!("{terms_path}[{k}]");
                let tmap = tv
                    .as_object()
                    .ok_or_else(|| ConfigError::new(&tpath, "expected an object"))?;
                let tf = Fields { prefix: &tpath, map: tmap };
                tf.reject_unknown(&["c", "e1", "e2"])?;
                let c = tf.f64("c")?;
                let e1 = tf.exponents(tf.get("e1")?, &format!("{tpath}.e1"))?;
                let e2 = tf.exponents(tf.get("e2")?, &format!("{tpath}.e2"))?;
                terms.push(PolyTerm::new(c, e1, e2));
            }
            GameDefinition::polynomial(dims, terms).map_err(lift)
        }
        "bilinear" => {
            fields.reject_unknown(&["family", "m1", "m2", "A"])?;
            let a = fields.matrix("A")?;
            let game = GameDefinition::bilinear(a).map_err(lift)?;
            check_dims(game.dims())?;
            Ok(game)
        }
        "perturbed_bilinear" => {
            fields.reject_unknown(&["family", "m1", "m2", "A", "eps"])?;
            let a = fields.matrix("A")?;
            let eps = fields.f64("eps")?;
            let game = GameDefinition::perturbed_bilinear(a, eps).map_err(lift)?;
            check_dims(game.dims())?;
            Ok(game)
        }
        "quadratic" => {
            fields.reject_unknown(&["family", "m1", "m2", "Q", "S", "R"])?;
            let q = fields.matrix("Q")?;
            let s = fields.matrix("S")?;
            let r = fields.matrix("R")?;
            let game = GameDefinition::quadratic_saddle(q, s, r).map_err(lift)?;
            check_dims(game.dims())?;
            Ok(game)
        }
        "rps" => {
            fields.reject_unknown(&["family", "m1", "m2", "beta1", "beta2", "eps"])?;
            let beta1 = fields.f64("beta1")?;
            let beta2 = fields.f64("beta2")?;
            let eps = fields.f64("eps")?;
            let game = GameDefinition::rps_softmax(beta1, beta2, eps).map_err(lift)?;
            check_dims(game.dims())?;
            Ok(game)
        }
        "composite" => {
            fields.reject_unknown(&["family", "base", "perturbation", "t"])?;
            let base = parse_value(fields.get("base")?, &join(prefix, "base"))?;
            let pert = parse_value(fields.get("perturbation")?, &join(prefix, "perturbation"))?;
            let t = fields.f64("t")?;
            GameDefinition::composite(base, pert, t).map_err(lift)
        }
        other => Err(ConfigError::new(
            &join(prefix, "family"),
            format!(
                "unknown family `{other}` (expected one of polynomial, bilinear, \
                 perturbed_bilinear, quadratic, rps, composite)"
            ),
        )),
    }
}

/// Canonical JSON form of a game definition.
pub fn game_config_value(game: &GameDefinition) -> Value {
    let dims = game.dims();
    match game.family() {
        GameFamily::Polynomial(terms) => json!({
            "family": "polynomial",
            "m1": dims.m1(),
            "m2": dims.m2(),
            "terms": terms
                .iter()
                .map(|t| json!({"c": t.coeff, "e1": t.e1, "e2": t.e2}))
                .collect::<Vec<_>>(),
        }),
        GameFamily::Bilinear(a) => json!({
            "family": "bilinear",
            "m1": dims.m1(),
            "m2": dims.m2(),
            "A": a.rows(),
        }),
        GameFamily::PerturbedBilinear { a, eps } => json!({
            "family": "perturbed_bilinear",
            "m1": dims.m1(),
            "m2": dims.m2(),
            "A": a.rows(),
            "eps": eps,
        }),
        GameFamily::QuadraticSaddle { q, s, r } => json!({
            "family": "quadratic",
            "m1": dims.m1(),
            "m2": dims.m2(),
            "Q": q.rows(),
            "S": s.rows(),
            "R": r.rows(),
        }),
        GameFamily::RpsSoftmax { beta1, beta2, eps } => json!({
            "family": "rps",
            "beta1": beta1,
            "beta2": beta2,
            "eps": eps,
        }),
        GameFamily::Composite { base, perturbation, t } => json!({
            "family": "composite",
            "base": game_config_value(base),
            "perturbation": game_config_value(perturbation),
            "t": t,
        }),
    }
}

/// Serializes a game definition to its config JSON text.
pub fn emit_game_config(game: &GameDefinition) -> String {
    game_config_value(game).to_string()
}

impl Serialize for GameDefinition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        game_config_value(self).serialize(serializer)
    }
}
