//! `key = value` configuration files.
//!
//! ```text
//! # standard competition run
//! d1 = 1
//! d2 = 1
//! mu = 1
//! rho = 1
//! h0 = 1
//! T = 2
//! kernel.family = tent
//! kernel.a = 1
//! reaction.kind = competition
//! reaction.a = 1
//! reaction.b = 1
//! reaction.c = 1
//! grid.N = 201
//! grid.dt = auto
//! init.u0 = bump
//! init.v0 = bump
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::model::{
    ConfigError, InitialProfile, KernelFamily, KernelSpec, ProblemConfig, ReactionModel, TimeStep,
};

const REQUIRED: [&str; 16] = [
    "d1",
    "d2",
    "mu",
    "rho",
    "h0",
    "T",
    "kernel.family",
    "kernel.a",
    "reaction.kind",
    "reaction.a",
    "reaction.b",
    "reaction.c",
    "grid.N",
    "grid.dt",
    "init.u0",
    "init.v0",
];

const OPTIONAL: [&str; 8] = [
    "kernel.sigma",
    "init.u0_amp",
    "init.v0_amp",
    "grid.theta",
    "picard.tol",
    "picard.max",
    "output.snapshots",
    "run.recheck_every",
];

/// Raw key-value pairs in file order, with duplicate and unknown keys rejected.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut pairs = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                message: "empty key or value".into(),
            });
        }
        if !REQUIRED.contains(&key) && !OPTIONAL.contains(&key) {
            return Err(ConfigError::UnknownKey(key.into()));
        }
        if pairs.insert(key.to_string(), value.to_string()).is_some() {
            return Err(ConfigError::Syntax {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(pairs)
}

struct Pairs(BTreeMap<String, String>);

impl Pairs {
    fn raw(&self, key: &str) -> Result<&str, ConfigError> {
        self.0
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| ConfigError::MissingKey(key.into()))
    }

    fn num(&self, key: &str) -> Result<f64, ConfigError> {
        parse_num(key, self.raw(key)?)
    }

    fn opt_num(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.0.get(key).map(|v| parse_num(key, v)).transpose()
    }

    fn opt_count(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.0
            .get(key)
            .map(|v| {
                v.parse::<usize>().map_err(|e| ConfigError::BadValue {
                    key: key.into(),
                    message: format!("`{v}`: {e}"),
                })
            })
            .transpose()
    }
}

fn parse_num(key: &str, value: &str) -> Result<f64, ConfigError> {
    match value.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(ConfigError::BadValue {
            key: key.into(),
            message: format!("`{value}` is not a finite number"),
        }),
    }
}

fn bad(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::BadValue {
        key: key.into(),
        message: message.into(),
    }
}

/// Parses and range-checks a configuration.
pub fn parse_config(text: &str) -> Result<ProblemConfig, ConfigError> {
    let pairs = parse_pairs(text)?;
    let kind = pairs.get("reaction.kind").map(String::as_str);
    for key in REQUIRED {
        let optional_here =
            kind == Some("inert") && key.starts_with("reaction.") && key != "reaction.kind";
        if !optional_here && !pairs.contains_key(key) {
            return Err(ConfigError::MissingKey(key.into()));
        }
    }
    let p = Pairs(pairs);

    let radius = p.num("kernel.a")?;
    let kernel = match p.raw("kernel.family")? {
        "uniform" => KernelSpec::uniform(radius),
        "tent" => KernelSpec::tent(radius),
        "truncated_gaussian" => {
            let sigma = p.opt_num("kernel.sigma")?.unwrap_or(0.5 * radius);
            KernelSpec::truncated_gaussian(radius, sigma)
        }
        other => return Err(bad("kernel.family", format!("unknown family `{other}`"))),
    }
    .map_err(|e| bad("kernel", e.to_string()))?;
    if p.0.contains_key("kernel.sigma") && kernel.sigma().is_none() {
        return Err(bad("kernel.sigma", "only valid for truncated_gaussian"));
    }

    let reaction = match p.raw("reaction.kind")? {
        "competition" => ReactionModel::competition(
            p.num("reaction.a")?,
            p.num("reaction.b")?,
            p.num("reaction.c")?,
        ),
        "prey_predator" => ReactionModel::prey_predator(
            p.num("reaction.a")?,
            p.num("reaction.b")?,
            p.num("reaction.c")?,
        ),
        "inert" => {
            if ["reaction.a", "reaction.b", "reaction.c"]
                .iter()
                .any(|k| p.0.contains_key(*k))
            {
                return Err(bad("reaction.kind", "`inert` takes no coefficients"));
            }
            ReactionModel::inert()
        }
        other => return Err(bad("reaction.kind", format!("unknown kind `{other}`"))),
    };
    if let ReactionModel::Competition { a, b, c } | ReactionModel::PreyPredator { a, b, c } =
        reaction
    {
        if !(a > 0.0 && b > 0.0 && c > 0.0) {
            return Err(bad("reaction", "a, b, c must be positive"));
        }
    }

    let profile = |key: &str, amp_key: &str| -> Result<InitialProfile, ConfigError> {
        let amp = p.opt_num(amp_key)?.unwrap_or(1.0);
        if amp < 0.0 {
            return Err(bad(amp_key, "must be nonnegative"));
        }
        match p.raw(key)? {
            "bump" => Ok(InitialProfile::Bump { amp }),
            "parabola" => Ok(InitialProfile::Parabola { amp }),
            other => Err(bad(key, format!("unknown profile `{other}`"))),
        }
    };
    let u0 = profile("init.u0", "init.u0_amp")?;
    let v0 = profile("init.v0", "init.v0_amp")?;

    let mut cfg = ProblemConfig::new(kernel, reaction, u0, v0);
    cfg.d1 = p.num("d1")?;
    cfg.d2 = p.num("d2")?;
    cfg.mu = p.num("mu")?;
    cfg.rho = p.num("rho")?;
    cfg.h0 = p.num("h0")?;
    cfg.horizon = p.num("T")?;
    cfg.nodes = p
        .opt_count("grid.N")?
        .ok_or_else(|| ConfigError::MissingKey("grid.N".into()))?;
    cfg.dt = match p.raw("grid.dt")? {
        "auto" => TimeStep::Auto,
        v => TimeStep::Fixed(parse_num("grid.dt", v)?),
    };
    if let Some(theta) = p.opt_num("grid.theta")? {
        cfg.theta = theta;
    }
    if let Some(tol) = p.opt_num("picard.tol")? {
        cfg.picard_tol = tol;
    }
    if let Some(max) = p.opt_count("picard.max")? {
        cfg.picard_max = max;
    }
    if let Some(s) = p.opt_count("output.snapshots")? {
        cfg.snapshots = s;
    }
    if let Some(r) = p.opt_count("run.recheck_every")? {
        cfg.recheck_every = r;
    }
    cfg.check_parameters()?;
    Ok(cfg)
}

/// Canonical key-value pairs of a configuration, in a fixed order. Numbers use the
/// shortest representation that parses back to the same value.
pub fn config_pairs(cfg: &ProblemConfig) -> Result<Vec<(&'static str, String)>, ConfigError> {
    let num = |x: f64| format!("{x:?}");
    let mut out = vec![
        ("d1", num(cfg.d1)),
        ("d2", num(cfg.d2)),
        ("mu", num(cfg.mu)),
        ("rho", num(cfg.rho)),
        ("h0", num(cfg.h0)),
        ("T", num(cfg.horizon)),
    ];
    let family = match cfg.kernel.family() {
        KernelFamily::Custom(c) => {
            return Err(ConfigError::Invalid(format!(
                "custom kernel `{}` has no file representation",
                c.name
            )))
        }
        f => f.name().to_string(),
    };
    out.push(("kernel.family", family));
    out.push(("kernel.a", num(cfg.kernel.radius())));
    if let Some(sigma) = cfg.kernel.sigma() {
        out.push(("kernel.sigma", num(sigma)));
    }
    match &cfg.reaction {
        ReactionModel::Competition { a, b, c } | ReactionModel::PreyPredator { a, b, c } => {
            out.push(("reaction.kind", cfg.reaction.kind().to_string()));
            out.push(("reaction.a", num(*a)));
            out.push(("reaction.b", num(*b)));
            out.push(("reaction.c", num(*c)));
        }
        ReactionModel::Custom(c) if c.name == "inert" => {
            out.push(("reaction.kind", "inert".into()));
        }
        ReactionModel::Custom(c) => {
            return Err(ConfigError::Invalid(format!(
                "custom reaction `{}` has no file representation",
                c.name
            )))
        }
    }
    for (key, amp_key, profile) in [
        ("init.u0", "init.u0_amp", &cfg.u0),
        ("init.v0", "init.v0_amp", &cfg.v0),
    ] {
        let Some(amp) = profile.amplitude() else {
            return Err(ConfigError::Invalid(format!(
                "custom profile `{}` has no file representation",
                profile.name()
            )));
        };
        out.push((key, profile.name().to_string()));
        out.push((amp_key, num(amp)));
    }
    out.push(("grid.N", cfg.nodes.to_string()));
    out.push((
        "grid.dt",
        match cfg.dt {
            TimeStep::Auto => "auto".into(),
            TimeStep::Fixed(dt) => num(dt),
        },
    ));
    out.push(("grid.theta", num(cfg.theta)));
    out.push(("picard.tol", num(cfg.picard_tol)));
    out.push(("picard.max", cfg.picard_max.to_string()));
    out.push(("output.snapshots", cfg.snapshots.to_string()));
    out.push(("run.recheck_every", cfg.recheck_every.to_string()));
    Ok(out)
}

/// The canonical file text of a configuration; [`parse_config`] reads it back exactly.
pub fn config_text(cfg: &ProblemConfig) -> Result<String, ConfigError> {
    let mut text = String::new();
    for (key, value) in config_pairs(cfg)? {
        writeln!(text, "{key} = {value}").expect("writing to a String");
    }
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const STANDARD: &str = "\
# standard competition run
d1 = 1
d2 = 1
mu = 1
rho = 1
h0 = 1
T = 2
kernel.family = tent
kernel.a = 1
reaction.kind = competition
reaction.a = 1
reaction.b = 1
reaction.c = 1
grid.N = 201
grid.dt = auto   # automatic step
init.u0 = bump
init.u0_amp = 0.5
init.v0 = bump
init.v0_amp = 0.5
";

    #[test]
    fn parses_the_standard_file() {
        let cfg = parse_config(STANDARD).unwrap();
        assert_eq!(cfg.nodes, 201);
        assert_eq!(cfg.dt, TimeStep::Auto);
        assert_eq!(cfg.u0.amplitude(), Some(0.5));
        assert_eq!(cfg.kernel.family().name(), "tent");
        assert_eq!(cfg.picard_max, 8);
    }

    #[test]
    fn round_trips_through_canonical_text() {
        let mut cfg = parse_config(STANDARD).unwrap();
        cfg.picard_tol = 1.0 / 3.0;
        cfg.dt = TimeStep::Fixed(0.1 + 0.2);
        let text = config_text(&cfg).unwrap();
        let back = parse_config(&text).unwrap();
        assert_eq!(config_text(&back).unwrap(), text);
        assert_eq!(back.picard_tol, 1.0 / 3.0);
        assert_eq!(back.dt, TimeStep::Fixed(0.1 + 0.2));
    }

    #[test]
    fn missing_key_is_named() {
        let text = STANDARD.replace("d1 = 1\n", "");
        assert_eq!(
            parse_config(&text).unwrap_err(),
            ConfigError::MissingKey("d1".into())
        );
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let text = format!("{STANDARD}oops\n");
        assert!(matches!(
            parse_config(&text),
            Err(ConfigError::Syntax { line: 20, .. })
        ));
        let dup = format!("{STANDARD}d1 = 2\n");
        assert!(matches!(
            parse_config(&dup),
            Err(ConfigError::Syntax { .. })
        ));
        let unknown = format!("{STANDARD}d3 = 2\n");
        assert_eq!(
            parse_config(&unknown).unwrap_err(),
            ConfigError::UnknownKey("d3".into())
        );
    }

    #[test]
    fn bad_values() {
        let text = STANDARD.replace("grid.N = 201", "grid.N = 200");
        assert!(matches!(
            parse_config(&text),
            Err(ConfigError::BadValue { .. })
        ));
        let text = STANDARD.replace("kernel.family = tent", "kernel.family = cauchy");
        assert!(matches!(
            parse_config(&text),
            Err(ConfigError::BadValue { .. })
        ));
        let text = STANDARD.replace("mu = 1", "mu = nan");
        assert!(matches!(
            parse_config(&text),
            Err(ConfigError::BadValue { .. })
        ));
    }

    #[test]
    fn inert_reaction_takes_no_coefficients() {
        let text = STANDARD
            .replace("reaction.kind = competition", "reaction.kind = inert")
            .replace("reaction.a = 1\nreaction.b = 1\nreaction.c = 1\n", "");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.reaction.kind(), "inert");
        assert_eq!(
            parse_config(&config_text(&cfg).unwrap())
                .unwrap()
                .reaction
                .kind(),
            "inert"
        );
    }
}
