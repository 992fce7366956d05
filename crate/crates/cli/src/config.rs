//! Run configuration: a JSON file merged with command-line overrides.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use clap::Args;
use gravicaustic_core::caustics::{launch_state, match_level, FociCurve, LevelMatch};
use gravicaustic_core::dynamics::{FlightParabola, State};
use gravicaustic_core::mirror::Mirror;
use gravicaustic_core::Vec2;
use serde::{Deserialize, Serialize};

/// `min:max:count`, as on the command line and in config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct KRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl FromStr for KRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, count] = parts[..] else {
            return Err(format!("expected min:max:count, got `{s}`"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
        let r = KRange {
            min: num(min)?,
            max: num(max)?,
            count: count.trim().parse().map_err(|e| format!("`{count}`: {e}"))?,
        };
        if r.count < 2 {
            return Err(format!("k-range count must be at least 2, got {}", r.count));
        }
        if !(r.min < r.max) {
            return Err(format!("k-range needs min < max, got {}:{}", r.min, r.max));
        }
        Ok(r)
    }
}

impl TryFrom<String> for KRange {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<KRange> for String {
    fn from(r: KRange) -> String {
        format!("{}:{}:{}", r.min, r.max, r.count)
    }
}

/// `lo:hi` mirror domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Domain(pub f64, pub f64);

impl FromStr for Domain {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
        Ok(Domain(num(lo)?, num(hi)?))
    }
}

impl TryFrom<String> for Domain {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Domain> for String {
    fn from(d: Domain) -> String {
        format!("{}:{}", d.0, d.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Every field optional so a file and the flags can each supply part of it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Mirror: `parabola:fm=<v>`, `line:alpha_deg=<deg>`, `hyperbola`, or an expression in x
    #[arg(long)]
    pub mirror: Option<String>,
    /// Mirror domain `lo:hi` (default -1e6:1e6)
    #[arg(long)]
    pub domain: Option<Domain>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub vx: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub vy: Option<f64>,
    /// Gravitational acceleration (default 1)
    #[arg(long)]
    pub g: Option<f64>,
    /// Number of bounces to simulate (default 100)
    #[arg(long)]
    pub bounces: Option<usize>,
    /// Foci-curve level (default: matched from the launch flight)
    #[arg(long = "L", allow_hyphen_values = true)]
    #[serde(rename = "L")]
    pub level: Option<f64>,
    /// Directrix height (default: from the launch energy)
    #[arg(long = "H", allow_hyphen_values = true)]
    #[serde(rename = "H")]
    pub directrix: Option<f64>,
    /// Launch from the apex of the flight whose focus is foci(k); needs L and H
    #[arg(long, allow_hyphen_values = true)]
    pub launch_k: Option<f64>,
    /// Curve parameter grid `min:max:count` (default -5:5:201)
    #[arg(long, allow_hyphen_values = true)]
    pub k_range: Option<KRange>,
    /// Output directory (default `out`)
    #[arg(long = "out")]
    #[serde(rename = "out")]
    pub out_dir: Option<PathBuf>,
    /// Output formats (default csv,json)
    #[arg(long, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merged(self, over: RunConfig) -> RunConfig {
        RunConfig {
            mirror: over.mirror.or(self.mirror),
            domain: over.domain.or(self.domain),
            x0: over.x0.or(self.x0),
            y0: over.y0.or(self.y0),
            vx: over.vx.or(self.vx),
            vy: over.vy.or(self.vy),
            g: over.g.or(self.g),
            bounces: over.bounces.or(self.bounces),
            level: over.level.or(self.level),
            directrix: over.directrix.or(self.directrix),
            launch_k: over.launch_k.or(self.launch_k),
            k_range: over.k_range.or(self.k_range),
            out_dir: over.out_dir.or(self.out_dir),
            format: over.format.or(self.format),
        }
    }

    /// Sets one numeric field by name; used by `sweep`.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "x0" => &mut self.x0,
            "y0" => &mut self.y0,
            "vx" => &mut self.vx,
            "vy" => &mut self.vy,
            "g" => &mut self.g,
            "L" => &mut self.level,
            "H" => &mut self.directrix,
            "launch_k" => &mut self.launch_k,
            "bounces" => {
                ensure!(value >= 0.0 && value.fract() == 0.0, "bounces must be a whole number, got {value}");
                self.bounces = Some(value as usize);
                return Ok(());
            }
            other => bail!("cannot sweep `{other}` (x0, y0, vx, vy, g, bounces, L, H, launch_k)"),
        };
        *slot = Some(value);
        Ok(())
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let text = self.mirror.as_deref().context("missing `mirror`")?;
        let mut mirror = Mirror::parse(text).with_context(|| format!("field `mirror`: `{text}`"))?;
        if let Some(Domain(lo, hi)) = self.domain {
            mirror = mirror.with_domain(lo, hi).context("field `domain`")?;
        }
        let gravity = self.g.unwrap_or(1.0);
        ensure!(gravity > 0.0 && gravity.is_finite(), "field `g` must be positive, got {gravity}");
        let formats = self.format.clone().unwrap_or_else(|| vec![Format::Csv, Format::Json]);
        ensure!(!formats.is_empty(), "field `format` must list at least one of csv, json, svg");

        let initial = match self.launch_k {
            Some(k) => {
                let (Some(level), Some(h)) = (self.level, self.directrix) else {
                    bail!("`launch_k` needs both `L` and `H`");
                };
                Some(
                    launch_state(&FociCurve::new(mirror.clone(), level), h, k, gravity)
                        .context("field `launch_k`")?,
                )
            }
            None => match (self.x0, self.y0, self.vx, self.vy) {
                (Some(x), Some(y), Some(vx), Some(vy)) => Some(State::new(Vec2::new(x, y), Vec2::new(vx, vy))),
                (None, None, None, None) => None,
                _ => bail!("launch state needs all of `x0`, `y0`, `vx`, `vy`"),
            },
        };

        Ok(Resolved {
            mirror,
            initial,
            gravity,
            bounces: self.bounces.unwrap_or(100),
            level: self.level,
            directrix: self.directrix,
            k_range: self.k_range.unwrap_or(KRange { min: -5.0, max: 5.0, count: 201 }),
            out_dir: self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out")),
            formats,
        })
    }
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub mirror: Mirror,
    pub initial: Option<State>,
    pub gravity: f64,
    pub bounces: usize,
    pub level: Option<f64>,
    pub directrix: Option<f64>,
    pub k_range: KRange,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Resolved {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn ks(&self) -> Vec<f64> {
        let r = self.k_range;
        gravicaustic_core::caustics::linspace(r.min, r.max, r.count)
    }

    pub fn require_initial(&self) -> Result<State> {
        self.initial.context("missing launch state: give x0, y0, vx, vy or L, H, launch_k")
    }

    fn launch_flight(&self) -> Result<FlightParabola> {
        FlightParabola::new(self.require_initial()?, self.gravity).context("launch flight")
    }

    /// `H` as given, else the launch flight's directrix.
    pub fn directrix(&self) -> Result<f64> {
        match self.directrix {
            Some(h) => Ok(h),
            None => Ok(self.launch_flight().context("`H` not given")?.directrix()),
        }
    }

    /// `L` as given (with no match), else matched from the launch focus.
    pub fn level(&self) -> Result<(f64, Option<LevelMatch>)> {
        if let Some(l) = self.level {
            return Ok((l, None));
        }
        let flight = self.launch_flight().context("`L` not given")?;
        let focus = flight.focus();
        ensure!(!focus.degenerate, "`L` not given and the launch flight is vertical, so it has no focus to match");
        let m = match_level(&self.mirror, focus.point).context("`L` not given")?;
        Ok((m.level, Some(m)))
    }
}
