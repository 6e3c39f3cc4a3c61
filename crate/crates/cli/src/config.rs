//! Plain-text run configuration: `[section]` headers followed by
//! `key = value` lines, `#` starts a comment.
//!
//! ```text
//! [time]
//! t_physical = 45
//! t_total = 50
//! n_samples = 4096
//!
//! [pulse1]
//! amplitude = 0.05
//! carrier = omega1
//! center = 23.5
//! width = 3.9
//! ```
//!
//! Model sections (`time`, `radial`, `surface1`, `surface2`, `coupling`,
//! `absorber`) are required; `pulse1`, `pulse2`, ... are numbered from 1
//! without gaps; `solver` and `output` keys fall back to defaults.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use globalprop::molecular::{
    AbsorberShape, Carrier, ModelParameters, PulseSpec, RadialGrid, SurfaceSpec, DEFAULT_DIPOLE,
};

/// Schema violation, with the 1-based line it was found on when known.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

fn err(line: impl Into<Option<usize>>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line: line.into(),
        message: message.into(),
    }
}

const TIME_KEYS: &[&str] = &["t_physical", "t_total", "n_samples"];
const RADIAL_KEYS: &[&str] = &["r_min", "r_max", "n_points", "n_keep"];
const SURFACE_KEYS: &[&str] = &["mass", "coefficients"];
const COUPLING_KEYS: &[&str] = &["dipole", "initial_v", "initial_surface"];
const PULSE_KEYS: &[&str] = &["amplitude", "carrier", "center", "width"];
const ABSORBER_KEYS: &[&str] = &["total", "shape"];
const SOLVER_KEYS: &[&str] = &["tol", "max_iter", "track", "snapshots"];
const OUTPUT_KEYS: &[&str] = &["dir"];

fn keys_for(section: &str) -> Option<&'static [&'static str]> {
    Some(match section {
        "time" => TIME_KEYS,
        "radial" => RADIAL_KEYS,
        "surface1" | "surface2" => SURFACE_KEYS,
        "coupling" => COUPLING_KEYS,
        "absorber" => ABSORBER_KEYS,
        "solver" => SOLVER_KEYS,
        "output" => OUTPUT_KEYS,
        s if pulse_number(s).is_some() => PULSE_KEYS,
        _ => return None,
    })
}

fn pulse_number(section: &str) -> Option<usize> {
    let digits = section.strip_prefix("pulse")?;
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

#[derive(Debug, Default)]
struct Section {
    line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

/// Raw sections as written, before typing.
#[derive(Debug, Default)]
struct Document {
    sections: BTreeMap<String, Section>,
}

impl Document {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut doc = Document::default();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(line, format!("malformed section header '{content}'")))?
                    .trim();
                if keys_for(name).is_none() {
                    return Err(err(line, format!("unknown section [{name}]")));
                }
                if doc.sections.contains_key(name) {
                    return Err(err(line, format!("section [{name}] appears twice")));
                }
                doc.sections.insert(
                    name.to_string(),
                    Section {
                        line,
                        entries: BTreeMap::new(),
                    },
                );
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected 'key = value', got '{content}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let section = current
                .as_deref()
                .ok_or_else(|| err(line, format!("key '{key}' outside any section")))?;
            if !keys_for(section).is_some_and(|keys| keys.contains(&key)) {
                return Err(err(line, format!("unknown key '{key}' in [{section}]")));
            }
            if value.is_empty() {
                return Err(err(line, format!("key '{key}' has no value")));
            }
            let entries = &mut doc.sections.get_mut(section).expect("current section exists").entries;
            if entries.insert(key.to_string(), (line, value.to_string())).is_some() {
                return Err(err(line, format!("key '{key}' repeated in [{section}]")));
            }
        }
        Ok(doc)
    }

    fn section(&self, name: &str) -> Result<&Section, ConfigError> {
        self.sections
            .get(name)
            .ok_or_else(|| err(None, format!("missing section [{name}]")))
    }

    fn raw<'a>(&'a self, section: &str, key: &str) -> Result<Option<(usize, &'a str)>, ConfigError> {
        Ok(self
            .sections
            .get(section)
            .and_then(|s| s.entries.get(key))
            .map(|(l, v)| (*l, v.as_str())))
    }

    fn required<'a>(&'a self, section: &str, key: &str) -> Result<(usize, &'a str), ConfigError> {
        let s = self.section(section)?;
        s.entries
            .get(key)
            .map(|(l, v)| (*l, v.as_str()))
            .ok_or_else(|| err(s.line, format!("missing key '{key}' in [{section}]")))
    }

    fn float(&self, section: &str, key: &str) -> Result<f64, ConfigError> {
        let (line, v) = self.required(section, key)?;
        parse_float(line, key, v)
    }

    fn count(&self, section: &str, key: &str) -> Result<usize, ConfigError> {
        let (line, v) = self.required(section, key)?;
        parse_count(line, key, v)
    }
}

fn parse_float(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(err(line, format!("'{key}' must be a finite number, got '{v}'"))),
    }
}

fn parse_count(line: usize, key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse::<usize>()
        .map_err(|_| err(line, format!("'{key}' must be a nonnegative integer, got '{v}'")))
}

fn parse_list<T>(
    line: usize,
    key: &str,
    v: &str,
    item: fn(usize, &str, &str) -> Result<T, ConfigError>,
) -> Result<Vec<T>, ConfigError> {
    if v == "none" {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| item(line, key, s.trim())).collect()
}

/// Solver controls and tracked output channels.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    /// Global 1-based level numbers whose time series are written.
    pub track: Vec<usize>,
    /// Iterations whose wavefunctions are kept for per-order output.
    pub snapshots: Vec<usize>,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            tol: 1e-16,
            max_iter: 25,
            track: vec![1],
            snapshots: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: ModelParameters,
    pub solver: SolverSection,
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// Built-in parameter set 1 or 2.
    pub fn example(which: u8) -> Result<Self, ConfigError> {
        let model = ModelParameters::example(which).map_err(|e| err(None, e.to_string()))?;
        Ok(Self {
            model,
            solver: SolverSection {
                track: vec![1, 37],
                snapshots: vec![2, 4, 9, 22],
                ..SolverSection::default()
            },
            output_dir: PathBuf::from(format!("out/example{which}")),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| err(None, format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let doc = Document::parse(text)?;

        let (t_physical, t_total) = (doc.float("time", "t_physical")?, doc.float("time", "t_total")?);
        let n_time = doc.count("time", "n_samples")?;
        let radial_line = doc.section("radial")?.line;
        let radial = RadialGrid::new(
            doc.float("radial", "r_min")?,
            doc.float("radial", "r_max")?,
            doc.count("radial", "n_points")?,
        )
        .map_err(|e| err(radial_line, e.to_string()))?;
        let n_keep = doc.count("radial", "n_keep")?;
        let lower = surface(&doc, "surface1")?;
        let upper = surface(&doc, "surface2")?;
        let dipole = doc.float("coupling", "dipole")?;
        let initial = (
            doc.count("coupling", "initial_v")?,
            doc.count("coupling", "initial_surface")?,
        );

        let mut numbers: Vec<(usize, usize)> = doc
            .sections
            .iter()
            .filter_map(|(name, s)| pulse_number(name).map(|k| (k, s.line)))
            .collect();
        numbers.sort();
        let mut pulses = Vec::with_capacity(numbers.len());
        for (expected, (k, line)) in numbers.iter().enumerate() {
            if *k != expected + 1 {
                return Err(err(
                    *line,
                    format!("pulse sections must be numbered 1..n without gaps, found pulse{k}"),
                ));
            }
            pulses.push(pulse(&doc, &format!("pulse{k}"))?);
        }

        let absorber_total = doc.float("absorber", "total")?;
        let absorber_shape = match doc.raw("absorber", "shape")? {
            Some((line, v)) => v.parse::<AbsorberShape>().map_err(|e| err(line, e.to_string()))?,
            None => AbsorberShape::default(),
        };

        let mut solver = SolverSection::default();
        if let Some((line, v)) = doc.raw("solver", "tol")? {
            solver.tol = parse_float(line, "tol", v)?;
        }
        if let Some((line, v)) = doc.raw("solver", "max_iter")? {
            solver.max_iter = parse_count(line, "max_iter", v)?;
        }
        if let Some((line, v)) = doc.raw("solver", "track")? {
            solver.track = parse_list(line, "track", v, parse_count)?;
            if solver.track.iter().any(|&c| c == 0 || c > 2 * n_keep) {
                return Err(err(line, format!("tracked levels must lie in 1..={}", 2 * n_keep)));
            }
        }
        if let Some((line, v)) = doc.raw("solver", "snapshots")? {
            solver.snapshots = parse_list(line, "snapshots", v, parse_count)?;
        }
        let output_dir = doc
            .raw("output", "dir")?
            .map(|(_, v)| PathBuf::from(v))
            .unwrap_or_else(|| PathBuf::from("out"));

        let model = ModelParameters {
            radial,
            lower,
            upper,
            n_keep,
            dipole,
            pulses,
            t_physical,
            t_total,
            n_time,
            absorber_total,
            absorber_shape,
            initial,
        };
        model
            .time_grid()
            .map_err(|e| err(doc.section("time").map(|s| s.line).ok(), e.to_string()))?;
        Ok(Self {
            model,
            solver,
            output_dir,
        })
    }

    /// Canonical text: fixed section and key order, shortest round-trip
    /// number formatting.
    pub fn to_text(&self) -> String {
        let m = &self.model;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "[time]\nt_physical = {}\nt_total = {}\nn_samples = {}\n",
            num(m.t_physical),
            num(m.t_total),
            m.n_time
        );
        let _ = writeln!(
            s,
            "[radial]\nr_min = {}\nr_max = {}\nn_points = {}\nn_keep = {}\n",
            num(m.radial.r_min()),
            num(m.radial.r_max()),
            m.radial.len(),
            m.n_keep
        );
        for (name, surf) in [("surface1", &m.lower), ("surface2", &m.upper)] {
            let coeffs: Vec<String> = surf.coefficients().iter().map(|&c| num(c)).collect();
            let _ = writeln!(
                s,
                "[{name}]\nmass = {}\ncoefficients = {}\n",
                num(surf.mass()),
                coeffs.join(", ")
            );
        }
        let _ = writeln!(
            s,
            "[coupling]\ndipole = {}\ninitial_v = {}\ninitial_surface = {}\n",
            num(m.dipole),
            m.initial.0,
            m.initial.1
        );
        for (k, p) in m.pulses.iter().enumerate() {
            let carrier = match p.carrier {
                Carrier::Omega1 => "omega1".to_string(),
                Carrier::Omega2 => "omega2".to_string(),
                Carrier::Fixed(w) => num(w),
            };
            let _ = writeln!(
                s,
                "[pulse{}]\namplitude = {}\ncarrier = {carrier}\ncenter = {}\nwidth = {}\n",
                k + 1,
                num(p.amplitude),
                num(p.center),
                num(p.width)
            );
        }
        let _ = writeln!(
            s,
            "[absorber]\ntotal = {}\nshape = {}\n",
            num(m.absorber_total),
            m.absorber_shape
        );
        let list = |v: &[usize]| {
            if v.is_empty() {
                "none".to_string()
            } else {
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
            }
        };
        let _ = writeln!(
            s,
            "[solver]\ntol = {}\nmax_iter = {}\ntrack = {}\nsnapshots = {}\n",
            num(self.solver.tol),
            self.solver.max_iter,
            list(&self.solver.track),
            list(&self.solver.snapshots)
        );
        let _ = writeln!(s, "[output]\ndir = {}", self.output_dir.display());
        s
    }
}

fn surface(doc: &Document, name: &str) -> Result<SurfaceSpec, ConfigError> {
    let mass = doc.float(name, "mass")?;
    let (line, v) = doc.required(name, "coefficients")?;
    let coeffs = parse_list(line, "coefficients", v, parse_float)?;
    SurfaceSpec::new(coeffs, mass).map_err(|e| err(doc.section(name).map(|s| s.line).ok(), e.to_string()))
}

fn pulse(doc: &Document, name: &str) -> Result<PulseSpec, ConfigError> {
    let (line, v) = doc.required(name, "carrier")?;
    let carrier = match v {
        "omega1" => Carrier::Omega1,
        "omega2" => Carrier::Omega2,
        other => Carrier::Fixed(parse_float(line, "carrier", other)?),
    };
    let width = doc.float(name, "width")?;
    if width <= 0.0 {
        return Err(err(doc.required(name, "width")?.0, "pulse width must be positive"));
    }
    Ok(PulseSpec {
        amplitude: doc.float(name, "amplitude")?,
        carrier,
        center: doc.float(name, "center")?,
        width,
    })
}

/// Shortest representation that parses back to the same `f64`.
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Default dipole, exposed for documentation of the built-in sets.
pub const BUILT_IN_DIPOLE: f64 = DEFAULT_DIPOLE;
