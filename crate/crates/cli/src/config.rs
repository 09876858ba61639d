//! Run configuration: a TOML file whose sections mirror the subcommands,
//! overridden field by field by command-line flags.
//!
//! ```toml
//! [system]
//! form = "III"
//! alpha = "1-2*t/(1+t^2)"
//! beta = "t"
//! interval = "(-inf,inf)"
//! direction = "forward"
//!
//! [sharpness]
//! eps = 0.1
//! ```

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use serde::Deserialize;
use std::path::{Path, PathBuf};
use ulamkit::calculus::Interval;
use ulamkit::jordan::{Form, JordanSystem, NormKind};
use ulamkit::kappa::Direction;
use ulamkit::scalar::ScalarFn;

/// Fills every `None` field of `self` from `other`.
pub trait Merge {
    fn merge(self, other: Self) -> Self;
}

macro_rules! mergeable {
    ($ty:ident { $($field:ident),* $(,)? }) => {
        impl Merge for $ty {
            fn merge(self, other: Self) -> Self {
                $ty { $($field: self.$field.or(other.$field)),* }
            }
        }
    };
}

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemArgs {
    /// Jordan form: I (diagonal), II (shear) or III (rotation)
    #[arg(long)]
    pub form: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// Interval such as "(-inf,inf)", "(0,1]" or "(0,pi/2)"
    #[arg(long, allow_hyphen_values = true)]
    pub interval: Option<String>,
    /// Base point; defaults to 0, or the midpoint of a bounded interval
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    /// forward, backward, hyperbolic or auto
    #[arg(long)]
    pub direction: Option<String>,
    /// max or euclid; defaults to the form's native norm
    #[arg(long)]
    pub norm: Option<String>,
}

mergeable!(SystemArgs { form, lambda1, lambda2, lambda, mu, alpha, beta, interval, t0, direction, norm });

fn expr(name: &str, v: &Option<String>) -> Result<ScalarFn> {
    let s = v.as_deref().ok_or_else(|| anyhow!("missing --{name}"))?;
    ScalarFn::parse(s).with_context(|| format!("--{name} `{s}`"))
}

pub fn parse_interval(s: &str) -> Result<Interval> {
    s.parse::<Interval>().map_err(|e| anyhow!("{e}"))
}

/// `"lo,hi"` with each end a number.
pub fn parse_pair(name: &str, s: &str) -> Result<(f64, f64)> {
    let (a, b) = s.split_once(',').ok_or_else(|| anyhow!("--{name} expects `lo,hi`, got `{s}`"))?;
    let num = |x: &str| x.trim().parse::<f64>().with_context(|| format!("--{name}: `{}` is not a number", x.trim()));
    let (a, b) = (num(a)?, num(b)?);
    if !(a < b) {
        bail!("--{name}: need lo < hi, got {a},{b}");
    }
    Ok((a, b))
}

/// How the direction was requested.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DirectionChoice {
    Auto,
    Fixed(Direction),
}

impl SystemArgs {
    pub fn interval(&self) -> Result<Interval> {
        parse_interval(self.interval.as_deref().unwrap_or("(-inf,inf)"))
    }

    pub fn build(&self) -> Result<JordanSystem> {
        let form: Form = self
            .form
            .as_deref()
            .ok_or_else(|| anyhow!("missing --form (I, II or III)"))?
            .parse()
            .map_err(|e: String| anyhow!(e))?;
        let iv = self.interval()?;
        let t0 = self.t0.unwrap_or(if iv.is_bounded() {
            0.5 * (iv.a + iv.b)
        } else if iv.a.is_finite() {
            iv.a + 1.0
        } else if iv.b.is_finite() {
            iv.b - 1.0
        } else {
            0.0
        });
        let sys = match form {
            Form::I => JordanSystem::diagonal(expr("lambda1", &self.lambda1)?, expr("lambda2", &self.lambda2)?, iv, t0),
            Form::II => JordanSystem::shear(expr("lambda", &self.lambda)?, expr("mu", &self.mu)?, iv, t0),
            Form::III => JordanSystem::rotation(expr("alpha", &self.alpha)?, expr("beta", &self.beta)?, iv, t0),
        };
        Ok(sys?)
    }

    pub fn direction(&self) -> Result<DirectionChoice> {
        match self.direction.as_deref().map(str::trim) {
            None | Some("auto") => Ok(DirectionChoice::Auto),
            Some(d) => Ok(DirectionChoice::Fixed(d.parse().map_err(|e: String| anyhow!(e))?)),
        }
    }

    pub fn norm(&self, form: Form) -> Result<NormKind> {
        match &self.norm {
            None => Ok(ulamkit::kappa::native_norm(form)),
            Some(n) => n.parse().map_err(|e: String| anyhow!(e)),
        }
    }
}

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantArgs {
    /// Restrict the sup search to lo,hi
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Write the coarse kappa profile as CSV
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    pub json: Option<PathBuf>,
}

mergeable!(ConstantArgs { window, profile, json });

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadowArgs {
    /// First component of the approximate solution, an expression in t
    #[arg(long, allow_hyphen_values = true)]
    pub phi1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi2: Option<String>,
    /// Evaluation window lo,hi; defaults to t0 +/- 40 clipped inside the interval
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Deviation CSV (t,deviation)
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

mergeable!(ShadowArgs { phi1, phi2, window, points, csv, json });

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessArgs {
    #[arg(long)]
    pub eps: Option<f64>,
    /// Evaluation window lo,hi
    #[arg(long, allow_hyphen_values = true)]
    pub horizon: Option<String>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Ratio CSV (t,kappa_t,deviation_over_eps)
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

mergeable!(SharpnessArgs { eps, horizon, points, csv, json });

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a11: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a12: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a21: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a22: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub r11: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub r12: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub r21: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub r22: Option<String>,
    /// Number of sample times for the classification
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

mergeable!(TransformArgs { a11, a12, a21, a22, r11, r12, r21, r22, samples, json });

impl TransformArgs {
    fn entries<'a>(&'a self, name: &str, e: [&'a Option<String>; 4]) -> Result<[&'a str; 4]> {
        let mut out = [""; 4];
        for (k, v) in e.iter().enumerate() {
            out[k] = v
                .as_deref()
                .ok_or_else(|| anyhow!("missing --{name}{}{}", k / 2 + 1, k % 2 + 1))?;
        }
        Ok(out)
    }

    pub fn a(&self) -> Result<[&str; 4]> {
        self.entries("a", [&self.a11, &self.a12, &self.a21, &self.a22])
    }

    pub fn r(&self) -> Result<[&str; 4]> {
        self.entries("r", [&self.r11, &self.r12, &self.r21, &self.r22])
    }
}

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortraitArgs {
    /// saddle, node or focus
    #[arg(long)]
    pub preset: Option<String>,
    /// Size of the default pulse forcing eps*(1-2max(cos t, 0)) on the first component
    #[arg(long)]
    pub eps: Option<f64>,
    /// Forcing components, expressions in t; override the pulse
    #[arg(long, allow_hyphen_values = true)]
    pub f1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub f2: Option<String>,
    /// Number of orbits, started on the circle of radius 2
    #[arg(long)]
    pub orbits: Option<usize>,
    /// Time span lo,hi; orbits start at lo
    #[arg(long, allow_hyphen_values = true)]
    pub span: Option<String>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Orbit CSV; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

mergeable!(PortraitArgs { preset, eps, f1, f2, orbits, span, points, out });

/// The file layout; every section is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub system: SystemArgs,
    #[serde(default)]
    pub constant: ConstantArgs,
    #[serde(default)]
    pub shadow: ShadowArgs,
    #[serde(default)]
    pub sharpness: SharpnessArgs,
    #[serde(default)]
    pub transform: TransformArgs,
    #[serde(default)]
    pub portrait: PortraitArgs,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}
