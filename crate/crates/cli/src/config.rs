//! Run configuration: a flat `key=value` text format (repeated keys build
//! lists), canonical emission that round-trips, validation, and builders
//! for the objects the verification suites operate on.

use orbitword_core::coding::{Bound, CodingWord, PartitionSpec};
use orbitword_core::numerics::gauss::{Base, GaussRat};
use orbitword_core::numerics::theta::ThetaOracle;
use orbitword_core::numerics::Prec;
use rug::Rational;

pub const SUITES: [&str; 5] = ["approx", "cf", "code", "series", "structure"];

/// One verification run: the rotation, the partition, the weights, the
/// evaluation bases, and the scan ranges. Lists keep input order.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub theta: String,
    pub bounds: Vec<String>,
    /// Interval weights (one per partition interval).
    pub values: Vec<String>,
    /// Boundary weights (one per boundary), for the boundary-indexed series.
    pub svalues: Vec<String>,
    pub bases: Vec<String>,
    pub n_from: usize,
    pub n_to: usize,
    pub w: Vec<u32>,
    pub digits: u32,
    pub horizon: u64,
    pub precision_cap: u32,
    pub depth: usize,
    pub nmax: u32,
    pub v_bound: u32,
    pub eps: String,
    pub suites: Vec<String>,
    pub out: Option<String>,
}

impl Default for RunConfig {
    /// The single-boundary golden-rotation instance with unit interval
    /// weights: every suite applies and passes at these settings.
    fn default() -> Self {
        RunConfig {
            theta: "golden".into(),
            bounds: vec!["-1,1".into()],
            values: vec!["0".into(), "1".into()],
            svalues: vec![],
            bases: vec!["2".into()],
            n_from: 2,
            n_to: 12,
            w: vec![2, 3, 4],
            digits: 120,
            horizon: 1_000_000,
            precision_cap: 1 << 16,
            depth: 30,
            nmax: 20,
            v_bound: 8,
            eps: "1/4".into(),
            suites: SUITES.iter().map(|s| s.to_string()).collect(),
            out: None,
        }
    }
}

/// A parse failure with its position in the config text.
#[derive(Clone, Debug)]
pub struct ConfigError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config line {}, column {}: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for ConfigError {}

fn err(line: usize, col: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        col,
        msg: msg.into(),
    }
}

impl RunConfig {
    /// Parse the flat `key=value` format. Unknown keys are errors; list
    /// keys (`bound`, `value`, `svalue`, `base`, `w`, `suite`) may repeat
    /// and replace the defaults on first use.
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        let mut touch = |cfg: &mut RunConfig, key: &'static str| {
            if !seen.contains(&key) {
                seen.push(key);
                match key {
                    "bound" => cfg.bounds.clear(),
                    "value" => cfg.values.clear(),
                    "svalue" => cfg.svalues.clear(),
                    "base" => cfg.bases.clear(),
                    "w" => cfg.w.clear(),
                    "suite" => cfg.suites.clear(),
                    _ => {}
                }
            }
        };
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(lineno, 1, format!("expected key=value, got {line:?}")));
            };
            let key = key.trim();
            let value = value.trim();
            // Column of the value, 1-based in the raw line.
            let vcol = raw.find('=').map(|p| p + 2).unwrap_or(1);
            let bad = |what: &str| err(lineno, vcol, format!("bad {what}: {value:?}"));
            match key {
                "theta" => cfg.theta = value.to_string(),
                "bound" => {
                    touch(&mut cfg, "bound");
                    cfg.bounds.push(value.to_string());
                }
                "value" => {
                    touch(&mut cfg, "value");
                    cfg.values.push(value.to_string());
                }
                "svalue" => {
                    touch(&mut cfg, "svalue");
                    cfg.svalues.push(value.to_string());
                }
                "base" => {
                    touch(&mut cfg, "base");
                    cfg.bases.push(value.to_string());
                }
                "n_from" => cfg.n_from = value.parse().map_err(|_| bad("n_from"))?,
                "n_to" => cfg.n_to = value.parse().map_err(|_| bad("n_to"))?,
                "w" => {
                    touch(&mut cfg, "w");
                    for piece in value.split(',') {
                        let w: u32 = piece.trim().parse().map_err(|_| bad("window"))?;
                        cfg.w.push(w);
                    }
                }
                "digits" => cfg.digits = value.parse().map_err(|_| bad("digits"))?,
                "horizon" => cfg.horizon = value.parse().map_err(|_| bad("horizon"))?,
                "precision_cap" => {
                    cfg.precision_cap = value.parse().map_err(|_| bad("precision_cap"))?
                }
                "depth" => cfg.depth = value.parse().map_err(|_| bad("depth"))?,
                "nmax" => cfg.nmax = value.parse().map_err(|_| bad("nmax"))?,
                "v_bound" => cfg.v_bound = value.parse().map_err(|_| bad("v_bound"))?,
                "eps" => cfg.eps = value.to_string(),
                "suite" => {
                    touch(&mut cfg, "suite");
                    cfg.suites.push(value.to_string());
                }
                "out" => cfg.out = Some(value.to_string()),
                _ => return Err(err(lineno, 1, format!("unknown key {key:?}"))),
            }
        }
        Ok(cfg)
    }

    /// Canonical emission: fixed key order, lists as repeated keys.
    /// `parse(emit(c)) == c` for every valid config.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("theta = {}\n", self.theta));
        for b in &self.bounds {
            out.push_str(&format!("bound = {b}\n"));
        }
        for v in &self.values {
            out.push_str(&format!("value = {v}\n"));
        }
        for v in &self.svalues {
            out.push_str(&format!("svalue = {v}\n"));
        }
        for b in &self.bases {
            out.push_str(&format!("base = {b}\n"));
        }
        out.push_str(&format!("n_from = {}\n", self.n_from));
        out.push_str(&format!("n_to = {}\n", self.n_to));
        for w in &self.w {
            out.push_str(&format!("w = {w}\n"));
        }
        out.push_str(&format!("digits = {}\n", self.digits));
        out.push_str(&format!("horizon = {}\n", self.horizon));
        out.push_str(&format!("precision_cap = {}\n", self.precision_cap));
        out.push_str(&format!("depth = {}\n", self.depth));
        out.push_str(&format!("nmax = {}\n", self.nmax));
        out.push_str(&format!("v_bound = {}\n", self.v_bound));
        out.push_str(&format!("eps = {}\n", self.eps));
        for s in &self.suites {
            out.push_str(&format!("suite = {s}\n"));
        }
        if let Some(o) = &self.out {
            out.push_str(&format!("out = {o}\n"));
        }
        out
    }

    /// Reject ill-posed settings before any computation starts.
    pub fn validate(&self) -> Result<(), String> {
        if let Some(w) = self.w.iter().find(|&&w| w < 2) {
            return Err(format!("window w = {w} is too small; every window must be at least 2"));
        }
        if self.w.is_empty() {
            return Err("at least one window is required".into());
        }
        if self.digits == 0 {
            return Err("digits must be positive".into());
        }
        if self.n_from > self.n_to {
            return Err(format!("empty level range {}..{}", self.n_from, self.n_to));
        }
        if self.horizon == 0 {
            return Err("horizon must be positive".into());
        }
        if self.precision_cap < 64 {
            return Err("precision cap below 64 bits cannot certify anything".into());
        }
        if self.depth < 2 {
            return Err("expansion depth must be at least 2".into());
        }
        if self.nmax == 0 {
            return Err("nmax must be positive".into());
        }
        if self.bounds.is_empty() {
            return Err("at least one partition boundary is required".into());
        }
        for s in &self.suites {
            if !SUITES.contains(&s.as_str()) {
                return Err(format!("unknown suite {s:?}; known: {}", SUITES.join(", ")));
            }
        }
        let eps = parse_rational(&self.eps).map_err(|e| format!("eps: {e}"))?;
        if eps <= 0u32 || eps > 1u32 {
            return Err(format!("eps = {} must lie in (0, 1]", self.eps));
        }
        self.oracle().map_err(|e| format!("theta: {e}"))?;
        self.parsed_bounds().map_err(|e| format!("bounds: {e}"))?;
        self.parsed_bases().map_err(|e| format!("base: {e}"))?;
        for v in self.values.iter().chain(self.svalues.iter()) {
            parse_gauss(v).map_err(|e| format!("weight {v:?}: {e}"))?;
        }
        Ok(())
    }

    pub fn prec(&self) -> Prec {
        Prec {
            start: 128,
            cap: self.precision_cap,
        }
    }

    pub fn oracle(&self) -> Result<ThetaOracle, orbitword_core::Error> {
        ThetaOracle::parse(&self.theta)
    }

    pub fn parsed_bounds(&self) -> Result<Vec<Bound>, orbitword_core::Error> {
        let mut out = Vec::new();
        for b in &self.bounds {
            out.extend(parse_bounds_arg(b)?);
        }
        Ok(out)
    }

    pub fn parsed_bases(&self) -> Result<Vec<Base>, orbitword_core::Error> {
        self.bases.iter().map(|b| Base::parse(b)).collect()
    }

    pub fn eps_rational(&self) -> Result<Rational, orbitword_core::Error> {
        parse_rational(&self.eps)
            .map_err(orbitword_core::Error::construction)
    }

    /// Interval weights: the configured list, or `0, 1, ..., l` when none
    /// are given.
    pub fn weights_t(&self, intervals: usize) -> Result<Vec<GaussRat>, orbitword_core::Error> {
        if self.values.is_empty() {
            return Ok((0..intervals as i64).map(GaussRat::from_i64).collect());
        }
        self.values.iter().map(|v| parse_gauss_core(v)).collect()
    }

    pub fn weights_s(&self) -> Result<Option<Vec<GaussRat>>, orbitword_core::Error> {
        if self.svalues.is_empty() {
            return Ok(None);
        }
        let ws = self
            .svalues
            .iter()
            .map(|v| parse_gauss_core(v))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Some(ws))
    }

    /// The coding word with interval weights attached (and boundary
    /// weights when configured).
    pub fn word(&self) -> Result<CodingWord, orbitword_core::Error> {
        let oracle = self.oracle()?;
        let prec = self.prec();
        let mut part = PartitionSpec::new(self.parsed_bounds()?, &oracle, prec)?;
        let intervals = part.alphabet_size();
        part = part.with_weights_t(self.weights_t(intervals)?)?;
        if let Some(ws) = self.weights_s()? {
            part = part.with_weights_s(ws)?;
        }
        Ok(CodingWord::new(oracle, part, prec))
    }
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    s.trim()
        .parse::<Rational>()
        .map_err(|_| format!("bad rational {s:?}"))
}

/// Parse a boundary list argument. A comma-separated string where every
/// piece is a boundary on its own is taken as a list (`1/4,3/4`); if any
/// piece fails but the whole string parses as a single boundary, the
/// whole string wins (`-1,1` is the single point `frac(-theta + 1)`).
/// Semicolons separate unambiguously: `1/4;-1,1`.
pub fn parse_bounds_arg(s: &str) -> Result<Vec<Bound>, orbitword_core::Error> {
    let s = s.trim();
    if s.contains(';') {
        return s
            .split(';')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(Bound::parse)
            .collect();
    }
    let pieces: Vec<&str> = s.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
    let as_list: Result<Vec<Bound>, _> = pieces.iter().map(|p| Bound::parse(p)).collect();
    match as_list {
        Ok(list) if !list.is_empty() => Ok(list),
        _ => Bound::parse(s).map(|b| vec![b]),
    }
}

/// Gaussian-rational weight syntax: `re` or `re:im`, both exact rationals.
fn parse_gauss(s: &str) -> Result<GaussRat, String> {
    parse_gauss_core(s).map_err(|e| e.to_string())
}

fn parse_gauss_core(s: &str) -> Result<GaussRat, orbitword_core::Error> {
    let s = s.trim();
    let (re, im) = match s.split_once(':') {
        Some((re, im)) => (re.trim(), Some(im.trim())),
        None => (s, None),
    };
    let re: Rational = re
        .parse()
        .map_err(|_| orbitword_core::Error::construction(format!("bad weight real part {re:?}")))?;
    let im: Rational = match im {
        Some(t) => t.parse().map_err(|_| {
            orbitword_core::Error::construction(format!("bad weight imaginary part {t:?}"))
        })?,
        None => Rational::new(),
    };
    Ok(GaussRat::new(re, im))
}

/// Canonical text for a Gaussian-rational weight, matching the parse
/// syntax.
pub fn format_gauss(g: &GaussRat) -> String {
    if g.im == 0u32 {
        format!("{}", g.re)
    } else {
        format!("{}:{}", g.re, g.im)
    }
}
