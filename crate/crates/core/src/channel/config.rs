use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// BS transmit precoding vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Precoder {
    /// `f_j = 1/sqrt(Nt)` for every antenna.
    #[default]
    EqualPower,
    Custom(Vec<Complex64>),
}

impl Precoder {
    pub fn weights(&self, n_tx: usize) -> Vec<Complex64> {
        match self {
            Precoder::EqualPower => {
                vec![Complex64::new(1.0 / (n_tx as f64).sqrt(), 0.0); n_tx]
            }
            Precoder::Custom(w) => w.clone(),
        }
    }

    /// `Σ|f_j|²`.
    pub fn power(&self, n_tx: usize) -> f64 {
        match self {
            Precoder::EqualPower if n_tx > 0 => 1.0,
            Precoder::EqualPower => 0.0,
            Precoder::Custom(w) => w.iter().map(|c| c.norm_sqr()).sum(),
        }
    }
}

/// Geometry, link budget and system parameters of the IRS-assisted downlink.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    /// BS–IRS distance (m).
    pub d1: f64,
    /// IRS–UE distance (m).
    pub d2: f64,
    pub x_irs: f64,
    pub y_irs: f64,
    /// Angle of incidence at the IRS (rad).
    pub phi_inc: f64,
    /// Linear BS antenna gain.
    pub g_t: f64,
    /// Linear UE antenna gain.
    pub g_r: f64,
    /// Transmit power (W).
    pub p_t: f64,
    /// Noise power (W).
    pub sigma2: f64,
    pub n_elems: usize,
    /// BS antennas; 1 means SISO.
    pub n_tx: usize,
    /// Bandwidth (Hz).
    pub bandwidth: f64,
    /// Slot length (s).
    pub slot: f64,
    pub precoder: Precoder,
}

impl Default for LinkConfig {
    /// Reference parameter set: 50 m hops, 1 m² surface at 30°, 10 dB
    /// antennas, 1 mW transmit power, 1 µW noise, N = 100, Nt = 10, and the
    /// normalized B = 1 Hz, T = 1 s regime.
    fn default() -> Self {
        Self {
            d1: 50.0,
            d2: 50.0,
            x_irs: 1.0,
            y_irs: 1.0,
            phi_inc: 30f64.to_radians(),
            g_t: 10.0,
            g_r: 10.0,
            p_t: 1e-3,
            sigma2: 1e-6,
            n_elems: 100,
            n_tx: 10,
            bandwidth: 1.0,
            slot: 1.0,
            precoder: Precoder::EqualPower,
        }
    }
}

/// Keys accepted by [`LinkConfig::parse`] and [`LinkConfig::set`].
pub const CONFIG_KEYS: &[&str] = &[
    "d1",
    "d2",
    "x_irs",
    "y_irs",
    "phi_inc",
    "phi_inc_deg",
    "g_t",
    "g_t_db",
    "g_r",
    "g_r_db",
    "p_t",
    "p_t_db",
    "sigma2",
    "sigma2_db",
    "n_elems",
    "n_tx",
    "bandwidth",
    "slot",
    "precoder",
];

impl LinkConfig {
    /// Reference configuration with a single BS antenna.
    pub fn siso() -> Self {
        Self {
            n_tx: 1,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("d1", self.d1),
            ("d2", self.d2),
            ("x_irs", self.x_irs),
            ("y_irs", self.y_irs),
            ("g_t", self.g_t),
            ("g_r", self.g_r),
            ("sigma2", self.sigma2),
            ("bandwidth", self.bandwidth),
            ("slot", self.slot),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        // Zero transmit power is a degenerate but well-defined model.
        if !(self.p_t >= 0.0 && self.p_t.is_finite()) {
            return Err(Error::Config(format!(
                "p_t must be nonnegative, got {}",
                self.p_t
            )));
        }
        if !(0.0..=FRAC_PI_2).contains(&self.phi_inc) {
            return Err(Error::Config(format!(
                "phi_inc must lie in [0, π/2], got {}",
                self.phi_inc
            )));
        }
        if self.n_elems == 0 {
            return Err(Error::Config("n_elems must be at least 1".into()));
        }
        if self.n_tx == 0 {
            return Err(Error::Config("n_tx must be at least 1".into()));
        }
        if let Precoder::Custom(w) = &self.precoder {
            if w.len() != self.n_tx {
                return Err(Error::Config(format!(
                    "precoder has {} weights but n_tx = {}",
                    w.len(),
                    self.n_tx
                )));
            }
            if !(self.precoder.power(self.n_tx) > 0.0) {
                return Err(Error::Config("precoder must have nonzero norm".into()));
            }
        }
        Ok(())
    }

    pub fn precoder_weights(&self) -> Vec<Complex64> {
        self.precoder.weights(self.n_tx)
    }

    pub fn precoder_power(&self) -> f64 {
        self.precoder.power(self.n_tx)
    }

    /// Sets one field from its textual config form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = || -> Result<f64> {
            value
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("{key}: cannot parse `{value}` as a number")))
        };
        let count = || -> Result<usize> {
            value
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("{key}: cannot parse `{value}` as a count")))
        };
        let db = |v: f64| 10f64.powf(v / 10.0);
        match key {
            "d1" => self.d1 = num()?,
            "d2" => self.d2 = num()?,
            "x_irs" => self.x_irs = num()?,
            "y_irs" => self.y_irs = num()?,
            "phi_inc" => self.phi_inc = num()?,
            "phi_inc_deg" => self.phi_inc = num()?.to_radians(),
            "g_t" => self.g_t = num()?,
            "g_t_db" => self.g_t = db(num()?),
            "g_r" => self.g_r = num()?,
            "g_r_db" => self.g_r = db(num()?),
            "p_t" => self.p_t = num()?,
            "p_t_db" => self.p_t = db(num()?),
            "sigma2" => self.sigma2 = num()?,
            "sigma2_db" => self.sigma2 = db(num()?),
            "n_elems" => self.n_elems = count()?,
            "n_tx" => self.n_tx = count()?,
            "bandwidth" => self.bandwidth = num()?,
            "slot" => self.slot = num()?,
            "precoder" => self.precoder = parse_precoder(value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Parses a flat `name = value` file on top of the reference defaults.
    ///
    /// `#` starts a comment. Gains and powers may be given in dB with a
    /// `_db` suffix; the angle in degrees with `phi_inc_deg`.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_over(Self::default(), text)
    }

    pub fn parse_over(mut base: Self, text: &str) -> Result<Self> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `name = value`", lineno + 1))
            })?;
            base.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        base.validate()?;
        Ok(base)
    }

    /// Serializes every field in SI units; `parse` reads it back exactly.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let fields: [(&str, f64); 12] = [
            ("d1", self.d1),
            ("d2", self.d2),
            ("x_irs", self.x_irs),
            ("y_irs", self.y_irs),
            ("phi_inc", self.phi_inc),
            ("g_t", self.g_t),
            ("g_r", self.g_r),
            ("p_t", self.p_t),
            ("sigma2", self.sigma2),
            ("bandwidth", self.bandwidth),
            ("slot", self.slot),
            ("n_elems", self.n_elems as f64),
        ];
        for (k, v) in fields {
            if k == "n_elems" {
                let _ = writeln!(s, "n_elems = {}", self.n_elems);
            } else {
                let _ = writeln!(s, "{k} = {v:?}");
            }
        }
        let _ = writeln!(s, "n_tx = {}", self.n_tx);
        match &self.precoder {
            Precoder::EqualPower => {
                let _ = writeln!(s, "precoder = equal");
            }
            Precoder::Custom(w) => {
                let parts: Vec<String> =
                    w.iter().map(|c| format!("{:?},{:?}", c.re, c.im)).collect();
                let _ = writeln!(s, "precoder = {}", parts.join("; "));
            }
        }
        s
    }
}

fn parse_precoder(value: &str) -> Result<Precoder> {
    let value = value.trim();
    if value.eq_ignore_ascii_case("equal") {
        return Ok(Precoder::EqualPower);
    }
    let mut weights = Vec::new();
    for part in value.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (re, im) = part.split_once(',').unwrap_or((part, "0"));
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("precoder: cannot parse weight `{part}`")))
        };
        weights.push(Complex64::new(parse(re)?, parse(im)?));
    }
    if weights.is_empty() {
        return Err(Error::Config("precoder: no weights given".into()));
    }
    Ok(Precoder::Custom(weights))
}
