//! Solver settings resolved from flags, an optional `key=value` config file
//! and profile defaults, in that order of precedence. All referenced files
//! are loaded here, before any computation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use lcdvf_core::pipeline::{DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_KAPPA};
use lcdvf_core::{
    io, BinaryMask, Circle, FieldSource, InitMode, InitSpec, ParameterSet, Point, Profile, ScalarField, SnakeConfig,
    DEFAULT_CLIP_NORM,
};

use crate::error::{CliError, CliResult};

/// Keys accepted both as `--flag` and in a config file.
pub const KEYS: [&str; 11] = [
    "profile", "field", "clip", "iters", "tau", "nodes", "resample", "alpha", "beta", "kappa", "init",
];

#[derive(Args, Debug, Clone, Default)]
pub struct SolverArgs {
    /// building (60 nodes, circumscribed, 50 iterations) or medical (100 nodes, inscribed, 10 iterations)
    #[arg(long)]
    pub profile: Option<String>,
    /// Flat key=value file with the same keys as these flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// lcdvf, dvf or energy:<map.pfm>
    #[arg(long)]
    pub field: Option<String>,
    /// Force magnitude cap in pixels, or "none"
    #[arg(long)]
    pub clip: Option<String>,
    /// Evolution steps
    #[arg(long)]
    pub iters: Option<String>,
    /// Time step
    #[arg(long)]
    pub tau: Option<String>,
    /// Contour node count
    #[arg(long)]
    pub nodes: Option<String>,
    /// Resample nodes uniformly after every step
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub resample: Option<String>,
    /// Continuity weight
    #[arg(long)]
    pub alpha: Option<String>,
    /// Curvature map: <map.pfm> or a constant
    #[arg(long)]
    pub beta: Option<String>,
    /// Balloon map: <map.pfm>, a constant, or boundary:<m> (+m on the mask, -m off it)
    #[arg(long)]
    pub kappa: Option<String>,
    /// inscribed, circumscribed, fit:inscribed, fit:circumscribed or circle:<u>,<v>,<r>
    #[arg(long)]
    pub init: Option<String>,
}

impl SolverArgs {
    fn flag(&self, key: &str) -> Option<&String> {
        match key {
            "profile" => self.profile.as_ref(),
            "field" => self.field.as_ref(),
            "clip" => self.clip.as_ref(),
            "iters" => self.iters.as_ref(),
            "tau" => self.tau.as_ref(),
            "nodes" => self.nodes.as_ref(),
            "resample" => self.resample.as_ref(),
            "alpha" => self.alpha.as_ref(),
            "beta" => self.beta.as_ref(),
            "kappa" => self.kappa.as_ref(),
            "init" => self.init.as_ref(),
            _ => None,
        }
    }
}

/// A raw setting and the directory relative paths in it resolve against.
struct Raw {
    value: String,
    base: PathBuf,
}

pub fn parse_config_file(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::from(e).at(path))?;
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("{}:{}: expected key=value", path.display(), n + 1)))?;
        let k = k.trim().trim_start_matches("--");
        if !KEYS.contains(&k) {
            return Err(CliError::usage(format!("{}:{}: unknown key {k:?}", path.display(), n + 1)));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(key: &str, s: &str) -> CliResult<T> {
    s.trim()
        .parse()
        .map_err(|_| CliError::usage(format!("invalid value for {key}: {s:?}")))
}

fn parse_bool(key: &str, s: &str) -> CliResult<bool> {
    match s.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(CliError::usage(format!("invalid value for {key}: {s:?}"))),
    }
}

fn resolve_path(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Source of a per-pixel parameter map.
#[derive(Debug, Clone, PartialEq)]
pub enum MapSpec {
    Constant(f64),
    Map(ScalarField),
    /// `+m` on the driving mask, `-m` elsewhere.
    Boundary(f64),
}

impl MapSpec {
    fn parse(key: &str, s: &str, base: &Path) -> CliResult<Self> {
        if let Some(m) = s.strip_prefix("boundary:") {
            return Ok(MapSpec::Boundary(parse_num(key, m)?));
        }
        if let Ok(c) = s.trim().parse::<f64>() {
            return Ok(MapSpec::Constant(c));
        }
        let path = resolve_path(base, s);
        Ok(MapSpec::Map(io::load_pfm(&path).map_err(|e| CliError::from(e).at(&path))?))
    }

    pub fn realize(&self, mask: &BinaryMask) -> CliResult<ScalarField> {
        let (w, h) = mask.dims();
        Ok(match self {
            MapSpec::Constant(c) => ScalarField::filled(w, h, *c)?,
            MapSpec::Map(f) => {
                mask.ensure_dims(f.dims())?;
                f.clone()
            }
            MapSpec::Boundary(m) => ScalarField::from_fn(w, h, |u, v| if mask.get(u, v) { *m } else { -*m })?,
        })
    }
}

pub fn parse_field(s: &str, base: &Path) -> CliResult<FieldSource> {
    match s {
        "lcdvf" => Ok(FieldSource::Lcdvf),
        "dvf" => Ok(FieldSource::Dvf),
        _ => match s.strip_prefix("energy:") {
            Some(p) => {
                let path = resolve_path(base, p);
                Ok(FieldSource::Energy(
                    io::load_pfm(&path).map_err(|e| CliError::from(e).at(&path))?,
                ))
            }
            None => Err(CliError::usage(format!(
                "invalid field {s:?}: expected lcdvf, dvf or energy:<map.pfm>"
            ))),
        },
    }
}

pub fn parse_init(s: &str) -> CliResult<InitSpec> {
    if let Some(rest) = s.strip_prefix("circle:") {
        let parts: Vec<f64> = rest
            .split(',')
            .map(|x| parse_num("init", x))
            .collect::<CliResult<_>>()?;
        if parts.len() != 3 {
            return Err(CliError::usage(format!("invalid circle {s:?}: expected circle:<u>,<v>,<r>")));
        }
        return Ok(InitSpec::Circle(Circle::new(Point::new(parts[0], parts[1]), parts[2])?));
    }
    if let Some(mode) = s.strip_prefix("fit:") {
        return Ok(InitSpec::Fitted(mode.parse::<InitMode>()?));
    }
    Ok(InitSpec::Exact(s.parse::<InitMode>()?))
}

/// Fully resolved solver configuration.
#[derive(Debug, Clone)]
pub struct Settings {
    pub profile: Profile,
    pub field: FieldSource,
    pub field_name: String,
    pub snake: SnakeConfig,
    pub alpha: f64,
    pub beta: MapSpec,
    pub kappa: MapSpec,
    pub init: InitSpec,
}

impl Settings {
    pub fn resolve(args: &SolverArgs) -> CliResult<Settings> {
        let cwd = PathBuf::from(".");
        let (file, file_base) = match &args.config {
            Some(p) => (
                parse_config_file(p)?,
                p.parent().map(Path::to_path_buf).unwrap_or_else(|| cwd.clone()),
            ),
            None => (BTreeMap::new(), cwd.clone()),
        };
        let get = |key: &str| -> Option<Raw> {
            args.flag(key)
                .map(|v| Raw {
                    value: v.clone(),
                    base: cwd.clone(),
                })
                .or_else(|| {
                    file.get(key).map(|v| Raw {
                        value: v.clone(),
                        base: file_base.clone(),
                    })
                })
        };

        let profile = match get("profile") {
            Some(r) => r.value.parse::<Profile>()?,
            None => Profile::Building,
        };
        let defaults = profile.config();
        let field_raw = get("field");
        let field_name = field_raw.as_ref().map_or("lcdvf".to_string(), |r| r.value.clone());
        let field = match &field_raw {
            Some(r) => parse_field(&r.value, &r.base)?,
            None => FieldSource::Lcdvf,
        };
        let clip_norm = match get("clip") {
            Some(r) if matches!(r.value.as_str(), "none" | "inf" | "off") => f64::INFINITY,
            Some(r) => parse_num("clip", &r.value)?,
            None => DEFAULT_CLIP_NORM,
        };
        let snake = SnakeConfig {
            iterations: get("iters").map_or(Ok(defaults.iterations), |r| parse_num("iters", &r.value))?,
            time_step: get("tau").map_or(Ok(defaults.time_step), |r| parse_num("tau", &r.value))?,
            node_count: get("nodes").map_or(Ok(defaults.node_count), |r| parse_num("nodes", &r.value))?,
            resample_each_step: get("resample").map_or(Ok(defaults.resample_each_step), |r| {
                parse_bool("resample", &r.value)
            })?,
            clip_norm,
        };
        snake.validate()?;
        let alpha = get("alpha").map_or(Ok(DEFAULT_ALPHA), |r| parse_num("alpha", &r.value))?;
        let beta = match get("beta") {
            Some(r) => MapSpec::parse("beta", &r.value, &r.base)?,
            None => MapSpec::Constant(DEFAULT_BETA),
        };
        let kappa = match get("kappa") {
            Some(r) => MapSpec::parse("kappa", &r.value, &r.base)?,
            None => MapSpec::Boundary(DEFAULT_KAPPA),
        };
        let init = match get("init") {
            Some(r) => parse_init(&r.value)?,
            None => InitSpec::Exact(profile.init_mode()),
        };
        Ok(Settings {
            profile,
            field,
            field_name,
            snake,
            alpha,
            beta,
            kappa,
            init,
        })
    }

    pub fn params(&self, mask: &BinaryMask) -> CliResult<ParameterSet> {
        Ok(ParameterSet::new(
            self.alpha,
            self.beta.realize(mask)?,
            self.kappa.realize(mask)?,
        )?)
    }
}
