//! System parameters and the flat `key = value` configuration format.
//!
//! Every field of [`SystemConfig`] is a key of the same name. Gains and powers may
//! alternatively be given in decibels through the suffixed keys `g_b_db`, `g_u_db`,
//! `p_max_dbm` and `n0_dbm_hz`; they are converted to linear units at load time.
//! Lines are `key = value`, `#` starts a comment, unknown keys are rejected.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the Poisson arrivals of a slot are split between the two buffers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrivalSplit {
    /// `α·A(t)` and `(1−α)·A(t)` fluid packets, exactly as the queue recursion reads.
    #[default]
    Fluid,
    /// HC arrivals drawn as `Binomial(A(t), α)`, the rest go to the LC buffer.
    Binomial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Carrier frequency, Hz.
    pub frequency: f64,
    /// Bandwidth, Hz.
    pub bandwidth: f64,
    /// Total transmit power, W.
    pub p_max: f64,
    /// Noise power spectral density, W/Hz.
    pub n0: f64,
    /// BS antenna gain, linear.
    pub g_b: f64,
    /// UE antenna gain, linear.
    pub g_u: f64,
    pub d_bu: f64,
    pub d_br: f64,
    pub d_ru: f64,
    /// Molecular absorption coefficient, 1/m.
    pub k_a: f64,
    /// Total number of RIS elements (a perfect square).
    pub n_r: u64,
    pub q_d: f64,
    pub q_r: f64,
    /// Rayleigh scale of the direct-beam pointing error, m.
    pub sigma_md: f64,
    /// Rayleigh scale of the reflected-beam pointing error, m.
    pub sigma_mr: f64,
    /// Reflected-beam radius at the UE, m.
    pub w_r: f64,
    /// Fraction of arrivals classified as high criticality.
    pub alpha: f64,
    /// Mean packet arrivals per slot.
    pub a_bar: f64,
    /// Packet size, bit.
    pub packet_size: f64,
    /// Slot duration, s.
    pub slot_duration: f64,
    pub arrival_split: ArrivalSplit,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) * 1e-3
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w * 1e3)
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            frequency: 300e9,
            bandwidth: 10e9,
            p_max: dbm_to_watts(10.0),
            n0: dbm_to_watts(-174.0),
            g_b: db_to_linear(40.0),
            g_u: db_to_linear(35.0),
            d_bu: 15.0,
            d_br: 15.8,
            d_ru: 5.0,
            k_a: 0.0012,
            n_r: 200 * 200,
            q_d: 0.3,
            q_r: 0.1,
            sigma_md: 0.1,
            sigma_mr: 0.2,
            w_r: 0.8,
            alpha: 0.5,
            a_bar: 800.0,
            packet_size: 5e6,
            slot_duration: 0.1,
            arrival_split: ArrivalSplit::Fluid,
        }
    }
}

const KEYS: &[&str] = &[
    "frequency",
    "bandwidth",
    "p_max",
    "p_max_dbm",
    "n0",
    "n0_dbm_hz",
    "g_b",
    "g_b_db",
    "g_u",
    "g_u_db",
    "d_bu",
    "d_br",
    "d_ru",
    "k_a",
    "n_r",
    "q_d",
    "q_r",
    "sigma_md",
    "sigma_mr",
    "w_r",
    "alpha",
    "a_bar",
    "packet_size",
    "slot_duration",
    "arrival_split",
];

/// Frequency range in which the molecular-absorption default is meaningful, Hz.
pub const ABSORPTION_VALID_RANGE: (f64, f64) = (100e9, 450e9);

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("frequency", self.frequency),
            ("bandwidth", self.bandwidth),
            ("p_max", self.p_max),
            ("n0", self.n0),
            ("g_b", self.g_b),
            ("g_u", self.g_u),
            ("d_bu", self.d_bu),
            ("d_br", self.d_br),
            ("d_ru", self.d_ru),
            ("sigma_md", self.sigma_md),
            ("sigma_mr", self.sigma_mr),
            ("w_r", self.w_r),
            ("packet_size", self.packet_size),
            ("slot_duration", self.slot_duration),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if !(self.k_a.is_finite() && self.k_a >= 0.0) {
            return Err(Error::Config(format!("k_a must be >= 0, got {}", self.k_a)));
        }
        if !(self.a_bar.is_finite() && self.a_bar >= 0.0) {
            return Err(Error::Config(format!("a_bar must be >= 0, got {}", self.a_bar)));
        }
        for (name, v) in [("q_d", self.q_d), ("q_r", self.q_r), ("alpha", self.alpha)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if self.n_r == 0 || self.ris_side() * self.ris_side() != self.n_r {
            return Err(Error::Config(format!(
                "n_r must be a positive perfect square, got {}",
                self.n_r
            )));
        }
        Ok(())
    }

    /// Non-fatal remarks about the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let (lo, hi) = ABSORPTION_VALID_RANGE;
        if self.frequency < lo || self.frequency > hi {
            out.push(format!(
                "frequency {} GHz is outside the {}-{} GHz range of the absorption model",
                self.frequency / 1e9,
                lo / 1e9,
                hi / 1e9
            ));
        }
        out
    }

    /// Number of RIS elements along one side.
    pub fn ris_side(&self) -> u64 {
        let s = (self.n_r as f64).sqrt().round() as u64;
        // guard against rounding for very large counts
        (s.saturating_sub(1)..=s + 1)
            .find(|k| k * k == self.n_r)
            .unwrap_or(s)
    }

    pub fn wavelength(&self) -> f64 {
        crate::SPEED_OF_LIGHT / self.frequency
    }

    pub fn noise_power(&self) -> f64 {
        self.n0 * self.bandwidth
    }

    /// Packets per slot served by one bit/s of rate, `T/M`.
    pub fn packets_per_bit_rate(&self) -> f64 {
        self.slot_duration / self.packet_size
    }

    /// Factor converting packets/slot into bit/s/Hz, `M/(T·B)`.
    pub fn spectral_efficiency_per_packet(&self) -> f64 {
        self.packet_size / (self.slot_duration * self.bandwidth)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_kv_str(&text)
    }

    /// Parses a `key = value` document on top of the defaults.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_kv_str(text)?;
        Ok(cfg)
    }

    /// Overrides the fields named in `text`, leaving the others untouched.
    pub fn apply_kv_str(&mut self, text: &str) -> Result<()> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;

        let unknown: Vec<String> = table
            .keys()
            .filter(|k| !KEYS.contains(&k.as_str()))
            .cloned()
            .collect();
        if !unknown.is_empty() {
            return Err(Error::UnknownKeys(unknown));
        }
        for (lin, db) in [
            ("p_max", "p_max_dbm"),
            ("n0", "n0_dbm_hz"),
            ("g_b", "g_b_db"),
            ("g_u", "g_u_db"),
        ] {
            if table.contains_key(lin) && table.contains_key(db) {
                return Err(Error::Config(format!("both {lin} and {db} are given")));
            }
        }

        for (key, value) in &table {
            if key == "arrival_split" {
                self.arrival_split = match value.as_str() {
                    Some("fluid") => ArrivalSplit::Fluid,
                    Some("binomial") => ArrivalSplit::Binomial,
                    _ => {
                        return Err(Error::Config(format!(
                            "arrival_split must be \"fluid\" or \"binomial\", got {value}"
                        )))
                    }
                };
                continue;
            }
            if key == "n_r" {
                self.n_r = match value {
                    toml::Value::Integer(i) if *i > 0 => *i as u64,
                    toml::Value::Float(f) if *f > 0.0 && f.fract() == 0.0 => *f as u64,
                    _ => return Err(Error::Config(format!("n_r must be a positive integer, got {value}"))),
                };
                continue;
            }
            let x = match value {
                toml::Value::Float(f) => *f,
                toml::Value::Integer(i) => *i as f64,
                _ => return Err(Error::Config(format!("{key} must be numeric, got {value}"))),
            };
            match key.as_str() {
                "frequency" => self.frequency = x,
                "bandwidth" => self.bandwidth = x,
                "p_max" => self.p_max = x,
                "p_max_dbm" => self.p_max = dbm_to_watts(x),
                "n0" => self.n0 = x,
                "n0_dbm_hz" => self.n0 = dbm_to_watts(x),
                "g_b" => self.g_b = x,
                "g_b_db" => self.g_b = db_to_linear(x),
                "g_u" => self.g_u = x,
                "g_u_db" => self.g_u = db_to_linear(x),
                "d_bu" => self.d_bu = x,
                "d_br" => self.d_br = x,
                "d_ru" => self.d_ru = x,
                "k_a" => self.k_a = x,
                "q_d" => self.q_d = x,
                "q_r" => self.q_r = x,
                "sigma_md" => self.sigma_md = x,
                "sigma_mr" => self.sigma_mr = x,
                "w_r" => self.w_r = x,
                "alpha" => self.alpha = x,
                "a_bar" => self.a_bar = x,
                "packet_size" => self.packet_size = x,
                "slot_duration" => self.slot_duration = x,
                _ => unreachable!("key list and match arms out of sync: {key}"),
            }
        }
        self.validate()
    }

    /// Renders the configuration in the file format, gains and powers in dB.
    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# carrier and bandwidth, Hz");
        let _ = writeln!(s, "frequency = {:?}", self.frequency);
        let _ = writeln!(s, "bandwidth = {:?}", self.bandwidth);
        let _ = writeln!(s, "# powers");
        let _ = writeln!(s, "p_max_dbm = {:?}", watts_to_dbm(self.p_max));
        let _ = writeln!(s, "n0_dbm_hz = {:?}", watts_to_dbm(self.n0));
        let _ = writeln!(s, "# antenna gains");
        let _ = writeln!(s, "g_b_db = {:?}", linear_to_db(self.g_b));
        let _ = writeln!(s, "g_u_db = {:?}", linear_to_db(self.g_u));
        let _ = writeln!(s, "# geometry, m");
        let _ = writeln!(s, "d_bu = {:?}", self.d_bu);
        let _ = writeln!(s, "d_br = {:?}", self.d_br);
        let _ = writeln!(s, "d_ru = {:?}", self.d_ru);
        let _ = writeln!(s, "k_a = {:?}", self.k_a);
        let _ = writeln!(s, "n_r = {}", self.n_r);
        let _ = writeln!(s, "# blockage and misalignment");
        let _ = writeln!(s, "q_d = {:?}", self.q_d);
        let _ = writeln!(s, "q_r = {:?}", self.q_r);
        let _ = writeln!(s, "sigma_md = {:?}", self.sigma_md);
        let _ = writeln!(s, "sigma_mr = {:?}", self.sigma_mr);
        let _ = writeln!(s, "w_r = {:?}", self.w_r);
        let _ = writeln!(s, "# traffic");
        let _ = writeln!(s, "alpha = {:?}", self.alpha);
        let _ = writeln!(s, "a_bar = {:?}", self.a_bar);
        let _ = writeln!(s, "packet_size = {:?}", self.packet_size);
        let _ = writeln!(s, "slot_duration = {:?}", self.slot_duration);
        let split = match self.arrival_split {
            ArrivalSplit::Fluid => "fluid",
            ArrivalSplit::Binomial => "binomial",
        };
        let _ = writeln!(s, "arrival_split = \"{split}\"");
        s
    }

    /// Same configuration with the direct/reflected pointing errors set to `σ` and `2σ`.
    pub fn with_misalignment(&self, sigma: f64) -> Self {
        Self {
            sigma_md: sigma,
            sigma_mr: 2.0 * sigma,
            ..self.clone()
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self {
            alpha,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = SystemConfig::default();
        cfg.validate().unwrap();
        assert!(cfg.warnings().is_empty());
        assert_eq!(cfg.ris_side(), 200);
        assert!((cfg.p_max - 0.01).abs() < 1e-15);
        assert!((cfg.g_b - 1e4).abs() < 1e-9);
    }

    #[test]
    fn kv_round_trip_reproduces_defaults() {
        let cfg = SystemConfig::default();
        let back = SystemConfig::from_kv_str(&cfg.to_kv_string()).unwrap();
        for (a, b) in [
            (cfg.p_max, back.p_max),
            (cfg.n0, back.n0),
            (cfg.g_b, back.g_b),
            (cfg.g_u, back.g_u),
        ] {
            assert!((a - b).abs() <= 1e-12 * a.abs(), "{a} vs {b}");
        }
        assert_eq!(cfg.frequency, back.frequency);
        assert_eq!(cfg.n_r, back.n_r);
    }

    #[test]
    fn partial_override_keeps_other_defaults() {
        let cfg = SystemConfig::from_kv_str("# comment\nq_d = 0.5 # trailing\ng_b_db = 30\n").unwrap();
        assert_eq!(cfg.q_d, 0.5);
        assert!((cfg.g_b - 1000.0).abs() < 1e-9);
        assert_eq!(cfg.d_bu, 15.0);
    }

    #[test]
    fn unknown_keys_are_all_listed() {
        let err = SystemConfig::from_kv_str("foo = 1\nq_d = 0.2\nbar = 2\n").unwrap_err();
        match err {
            Error::UnknownKeys(mut keys) => {
                keys.sort();
                assert_eq!(keys, vec!["bar".to_string(), "foo".to_string()]);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn rejects_bad_values() {
        assert!(SystemConfig::from_kv_str("n_r = 1000").is_err());
        assert!(SystemConfig::from_kv_str("q_d = 1.5").is_err());
        assert!(SystemConfig::from_kv_str("w_r = 0").is_err());
        assert!(SystemConfig::from_kv_str("g_b = 10\ng_b_db = 10").is_err());
        assert!(SystemConfig::from_kv_str("arrival_split = \"poisson\"").is_err());
    }

    #[test]
    fn q_r_above_q_d_is_allowed() {
        SystemConfig::from_kv_str("q_d = 0.1\nq_r = 0.4").unwrap();
    }

    #[test]
    fn out_of_range_frequency_only_warns() {
        let cfg = SystemConfig::from_kv_str("frequency = 600e9").unwrap();
        assert_eq!(cfg.warnings().len(), 1);
    }
}
