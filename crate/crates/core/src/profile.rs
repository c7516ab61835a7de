//! Radial kernel profiles ℓ and their weak-scaling constants.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest admissible lower scaling constant (the constant must lie in (0,1)).
pub const C_LOWER_CAP: f64 = 0.999;

/// Family of the profile together with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// ℓ(s) = s^{-β} ln²(2/s)
    PowerLogSquared { beta: f64 },
    /// ℓ(s) = s^{-β}
    PowerLaw { beta: f64 },
    /// ℓ(s) = ln(2/s)
    Log,
    /// ℓ(s) = 1
    Constant,
    /// ℓ(s) = 1 / ln(2/s)
    InverseLog,
    /// ℓ(s) = s^{-β} ln(2/s)^p, a power times a slowly varying factor.
    PowerLog { beta: f64, log_power: f64 },
    /// Samples (s_k, ℓ_k), interpolated log-log linearly.
    Tabulated { s: Vec<f64>, ell: Vec<f64> },
}

impl Family {
    /// (β, p) for the analytic families ℓ(s) = s^{-β} ln(2/s)^p.
    pub fn power_and_log(&self) -> Option<(f64, f64)> {
        match *self {
            Family::PowerLogSquared { beta } => Some((beta, 2.0)),
            Family::PowerLaw { beta } => Some((beta, 0.0)),
            Family::Log => Some((0.0, 1.0)),
            Family::Constant => Some((0.0, 0.0)),
            Family::InverseLog => Some((0.0, -1.0)),
            Family::PowerLog { beta, log_power } => Some((beta, log_power)),
            Family::Tabulated { .. } => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::PowerLogSquared { .. } => "power_log_squared",
            Family::PowerLaw { .. } => "power_law",
            Family::Log => "log",
            Family::Constant => "constant",
            Family::InverseLog => "inverse_log",
            Family::PowerLog { .. } => "power_log",
            Family::Tabulated { .. } => "tabulated",
        }
    }
}

/// Weak-scaling constants: c_L λ^{-γ} ≤ ℓ(rλ)/ℓ(r) ≤ c_U λ (d = 1 form,
/// which implies the d-dimensional upper bound), plus the index of regular
/// variation −α at zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingConstants {
    pub c_lower: f64,
    pub c_upper: f64,
    pub gamma: f64,
    pub alpha: f64,
    /// True when the constants were estimated from samples rather than derived.
    pub empirical: bool,
}

/// A radial profile ℓ on (0, R₀), optionally extended past a cutoff by
/// (s − R/2)^{-γ}.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelProfile {
    family: Family,
    r0: f64,
    tail_from: Option<f64>,
    constants: ScalingConstants,
}

impl KernelProfile {
    /// Builds a profile, validating the family and deriving its constants
    /// with the default γ.
    pub fn new(family: Family, r0: f64) -> Result<Self> {
        Self::build(family, r0, None)
    }

    /// Like [`KernelProfile::new`] with an explicit γ.
    pub fn with_gamma(family: Family, r0: f64, gamma: f64) -> Result<Self> {
        Self::build(family, r0, Some(gamma))
    }

    pub fn constant(r0: f64) -> Result<Self> {
        Self::new(Family::Constant, r0)
    }

    pub fn power_law(beta: f64, r0: f64) -> Result<Self> {
        Self::new(Family::PowerLaw { beta }, r0)
    }

    pub fn power_log_squared(beta: f64, r0: f64) -> Result<Self> {
        Self::new(Family::PowerLogSquared { beta }, r0)
    }

    pub fn log(r0: f64) -> Result<Self> {
        Self::new(Family::Log, r0)
    }

    pub fn inverse_log(r0: f64) -> Result<Self> {
        Self::new(Family::InverseLog, r0)
    }

    pub fn power_log(beta: f64, log_power: f64, r0: f64) -> Result<Self> {
        Self::new(Family::PowerLog { beta, log_power }, r0)
    }

    pub fn tabulated(s: Vec<f64>, ell: Vec<f64>, r0: Option<f64>) -> Result<Self> {
        let r0 = match r0 {
            Some(r) => r,
            None => *s.last().ok_or_else(|| Error::InvalidProfile("empty table".into()))?,
        };
        Self::new(Family::Tabulated { s, ell }, r0)
    }

    /// The five rows of the classical table of examples, all with R₀ = 1.
    pub fn table_one(beta: f64) -> Result<Vec<KernelProfile>> {
        Ok(vec![
            Self::power_log_squared(beta, 1.0)?,
            Self::power_law(beta, 1.0)?,
            Self::log(1.0)?,
            Self::constant(1.0)?,
            Self::inverse_log(1.0)?,
        ])
    }

    fn build(family: Family, r0: f64, gamma: Option<f64>) -> Result<Self> {
        if !(r0 > 0.0) {
            return Err(Error::InvalidProfile(format!("r0 must be positive, got {r0}")));
        }
        if let Some(g) = gamma {
            if !(g > 0.0 && g < 2.0) {
                return Err(Error::InvalidProfile(format!("gamma must lie in (0,2), got {g}")));
            }
        }
        let constants = match &family {
            Family::Tabulated { s, ell } => tabulated_constants(s, ell, r0, gamma)?,
            _ => {
                let (beta, p) = family.power_and_log().expect("analytic family");
                analytic_constants(&family, beta, p, r0, gamma)?
            }
        };
        Ok(KernelProfile { family, r0, tail_from: None, constants })
    }

    /// Replaces c_L and c_U without re-deriving them. Used for profiles
    /// read from documents; the `check` suites verify them.
    pub fn override_constants(mut self, c_lower: Option<f64>, c_upper: Option<f64>) -> Result<Self> {
        if let Some(c) = c_lower {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::InvalidProfile(format!("c_lower must lie in (0,1), got {c}")));
            }
            self.constants.c_lower = c;
        }
        if let Some(c) = c_upper {
            if !(c >= 1.0 && c.is_finite()) {
                return Err(Error::InvalidProfile(format!("c_upper must be ≥ 1, got {c}")));
            }
            self.constants.c_upper = c;
        }
        Ok(self)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// R₀; `f64::INFINITY` for pure power laws on (0,∞) and extended profiles.
    pub fn r0(&self) -> f64 {
        if self.tail_from.is_some() {
            f64::INFINITY
        } else {
            self.r0
        }
    }

    /// Cutoff where the extension starts, if this profile is extended.
    pub fn tail_from(&self) -> Option<f64> {
        self.tail_from
    }

    pub fn is_extended(&self) -> bool {
        self.tail_from.is_some()
    }

    pub fn constants(&self) -> ScalingConstants {
        self.constants
    }

    pub fn c_lower(&self) -> f64 {
        self.constants.c_lower
    }

    pub fn c_upper(&self) -> f64 {
        self.constants.c_upper
    }

    pub fn gamma(&self) -> f64 {
        self.constants.gamma
    }

    pub fn alpha(&self) -> f64 {
        self.constants.alpha
    }

    /// α = 0.
    pub fn is_slowly_varying(&self) -> bool {
        self.constants.alpha == 0.0
    }

    /// Short human-readable label, e.g. `power_law(beta=1)`.
    pub fn label(&self) -> String {
        let base = match &self.family {
            Family::PowerLogSquared { beta } => format!("power_log_squared(beta={beta})"),
            Family::PowerLaw { beta } => format!("power_law(beta={beta})"),
            Family::PowerLog { beta, log_power } => format!("power_log(beta={beta},p={log_power})"),
            Family::Tabulated { s, .. } => format!("tabulated(n={})", s.len()),
            f => f.name().to_string(),
        };
        match self.tail_from {
            Some(c) => format!("{base}~extended(R={c})"),
            None => base,
        }
    }

    /// ℓ(s) for s ∈ (0, R₀).
    pub fn ell(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s < self.r0()) {
            return Err(Error::domain(format!("ell({s}) outside (0, {})", self.r0())));
        }
        Ok(self.ell_unchecked(s))
    }

    /// ℓ(s) without the domain check.
    pub fn ell_unchecked(&self, s: f64) -> f64 {
        if let Some(cut) = self.tail_from {
            if s >= cut {
                return (s - 0.5 * cut).powf(-self.constants.gamma);
            }
        }
        match &self.family {
            Family::Constant => 1.0,
            Family::PowerLaw { beta } => s.powf(-beta),
            Family::Log => (2.0 / s).ln(),
            Family::InverseLog => 1.0 / (2.0 / s).ln(),
            Family::PowerLogSquared { beta } => {
                let u = (2.0 / s).ln();
                s.powf(-beta) * u * u
            }
            Family::PowerLog { beta, log_power } => {
                let u = (2.0 / s).ln();
                let pw = if *beta == 0.0 { 1.0 } else { s.powf(-beta) };
                pw * u.powf(*log_power)
            }
            Family::Tabulated { s: xs, ell } => tabulated_eval(xs, ell, s),
        }
    }

    /// The profile without its extension (identity for plain profiles).
    pub fn base(&self) -> KernelProfile {
        match self.tail_from {
            None => self.clone(),
            Some(cut) => {
                let mut p = self.clone();
                p.tail_from = None;
                p.r0 = cut;
                p.constants = self.base_constants();
                p
            }
        }
    }

    fn base_constants(&self) -> ScalingConstants {
        // Re-derive for the unextended profile; γ is shared.
        let cut = self.tail_from.unwrap_or(self.r0);
        KernelProfile::build(self.family.clone(), cut, Some(self.constants.gamma))
            .map(|p| p.constants)
            .unwrap_or(self.constants)
    }

    /// Extension ℓ̃: ℓ̃ = ℓ below R₀ and (s − R₀/2)^{-γ} above; the result
    /// has R₀ = ∞ and constants adjusted so the weak scaling bounds hold
    /// across the cutoff.
    pub fn extend(&self) -> Result<KernelProfile> {
        if self.tail_from.is_some() || !self.r0.is_finite() {
            return Err(Error::domain("extension needs a profile with finite R₀"));
        }
        let r = self.r0;
        let g = self.constants.gamma;
        let cl = self.constants.c_lower;
        let cu = self.constants.c_upper;
        let mid = self.ell_unchecked(0.5 * r);
        let m = mid * (2.0 * cu * r.powf(g)).max((0.5 * r).powf(g) / cl);
        let c_lower = cl.min(2f64.powf(-g)).min(1.0 / m).min(C_LOWER_CAP);
        let c_upper = cu
            .max((0.5 * r).powf(-g) * cu / (2.0 * mid))
            .max(4f64.powf(g) * r.powf(-g) / (cl * mid))
            .max(1.0);
        Ok(KernelProfile {
            family: self.family.clone(),
            r0: r,
            tail_from: Some(r),
            constants: ScalingConstants { c_lower, c_upper, gamma: g, alpha: self.constants.alpha, empirical: self.constants.empirical },
        })
    }

    /// Serializable description of this profile.
    pub fn to_document(&self) -> ProfileDocument {
        ProfileDocument {
            family: self.family.clone(),
            r0: self.tail_from.unwrap_or(self.r0),
            gamma: Some(self.constants.gamma),
            c_lower: Some(self.constants.c_lower),
            c_upper: Some(self.constants.c_upper),
            extended: self.tail_from.is_some(),
        }
    }

    pub fn from_document(doc: &ProfileDocument) -> Result<Self> {
        let base = Self::build(doc.family.clone(), doc.r0, doc.gamma)?;
        let p = if doc.extended { base.extend()? } else { base };
        p.override_constants(doc.c_lower, doc.c_upper)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ProfileDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("profile document serializes")
    }
}

/// JSON form of a profile:
/// `{"family": "power_law", "beta": 1.0, "r0": 1.0, "gamma": 1.0}`.
/// `r0` may be the string `"inf"`; `c_lower`, `c_upper` and `gamma`
/// override the derived constants when present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileDocument {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default = "default_r0", serialize_with = "ser_r0", deserialize_with = "de_r0")]
    pub r0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_upper: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub extended: bool,
}

fn default_r0() -> f64 {
    1.0
}

fn ser_r0<S: Serializer>(r0: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if r0.is_finite() {
        s.serialize_f64(*r0)
    } else {
        s.serialize_str("inf")
    }
}

fn de_r0<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(v) => Ok(v),
        Raw::Text(t) if matches!(t.to_ascii_lowercase().as_str(), "inf" | "infinity" | "+inf") => Ok(f64::INFINITY),
        Raw::Text(t) => Err(serde::de::Error::custom(format!("invalid r0 {t:?}"))),
    }
}

fn analytic_constants(family: &Family, beta: f64, p: f64, r0: f64, gamma: Option<f64>) -> Result<ScalingConstants> {
    let bad = |m: String| Err(Error::InvalidProfile(m));
    if !beta.is_finite() || !p.is_finite() {
        return bad("non-finite parameter".into());
    }
    if matches!(family, Family::PowerLaw { .. }) {
        if !(beta > 0.0 && beta < 2.0) {
            return bad(format!("power law exponent must lie in (0,2), got {beta}"));
        }
    } else if !(0.0..2.0).contains(&beta) {
        return bad(format!("beta must lie in [0,2), got {beta}"));
    }
    if !r0.is_finite() && !(p == 0.0 && beta > 0.0) {
        return bad("R₀ = ∞ is only admissible for pure power laws; use extend() otherwise".into());
    }
    if p != 0.0 && r0 >= 2.0 {
        return bad(format!("logarithmic families need R₀ < 2 so that ln(2/s) > 0, got {r0}"));
    }
    if beta == 0.0 && p < -1.0 {
        return bad(format!("L(0+) is finite for beta = 0 and log power {p} < -1"));
    }
    let default_gamma = if p > 0.0 {
        if beta == 0.0 {
            1.0
        } else {
            beta + (0.5f64).min((2.0 - beta) / 2.0)
        }
    } else if beta > 0.0 {
        beta
    } else {
        1.0
    };
    let gamma = gamma.unwrap_or(default_gamma);
    let delta = gamma - beta;
    let c_lower = if p > 0.0 {
        if delta <= 0.0 {
            return bad(format!("gamma {gamma} must exceed beta {beta} when the log power is positive"));
        }
        let m = (2.0 / r0).ln();
        let t_star = p / delta - m;
        if t_star > 0.0 {
            (m * delta / p).powf(p) * (p - delta * m).exp()
        } else {
            1.0
        }
    } else {
        if delta < 0.0 {
            return bad(format!("gamma {gamma} must be at least beta {beta}"));
        }
        1.0
    };
    let c_upper = if p < 0.0 {
        let q = -p;
        let m = (2.0 / r0).ln();
        let t_star = q / (1.0 + beta) - m;
        if t_star > 0.0 {
            ((q / ((1.0 + beta) * m)).powf(q) * (-(q - (1.0 + beta) * m)).exp()).max(1.0)
        } else {
            1.0
        }
    } else {
        1.0
    };
    Ok(ScalingConstants {
        c_lower: c_lower.min(C_LOWER_CAP),
        c_upper,
        gamma,
        alpha: beta,
        empirical: false,
    })
}

fn tabulated_eval(xs: &[f64], ell: &[f64], s: f64) -> f64 {
    let n = xs.len();
    let k = match xs.partition_point(|&x| x <= s) {
        0 => 0,
        i if i >= n => n - 2,
        i => i - 1,
    };
    let (x0, x1) = (xs[k].ln(), xs[k + 1].ln());
    let (y0, y1) = (ell[k].ln(), ell[k + 1].ln());
    let t = (s.ln() - x0) / (x1 - x0);
    (y0 + t * (y1 - y0)).exp()
}

fn tabulated_constants(xs: &[f64], ell: &[f64], r0: f64, gamma: Option<f64>) -> Result<ScalingConstants> {
    let bad = |m: &str| Err(Error::InvalidProfile(m.to_string()));
    if xs.len() < 2 || xs.len() != ell.len() {
        return bad("tabulated profile needs at least two (s, ell) pairs of equal length");
    }
    if xs.iter().any(|&x| !(x > 0.0 && x.is_finite())) || xs.windows(2).any(|w| w[1] <= w[0]) {
        return bad("tabulated radii must be positive and strictly increasing");
    }
    if ell.iter().any(|&y| !(y > 0.0 && y.is_finite())) {
        return bad("tabulated profile values must be positive");
    }
    if !(r0 <= xs[xs.len() - 1] * (1.0 + 1e-12)) {
        return bad("r0 beyond the last tabulated radius");
    }
    let slope = |k: usize| (ell[k + 1] / ell[k]).ln() / (xs[k + 1] / xs[k]).ln();
    let first = slope(0);
    if first > 0.0 {
        return bad("profile decreasing towards zero: L(0+) would be finite");
    }
    let used: Vec<usize> = (0..xs.len()).filter(|&k| xs[k] <= r0).collect();
    let max_decay = (0..xs.len() - 1).map(|k| -slope(k)).fold(0.0_f64, f64::max);
    let gamma = match gamma {
        Some(g) => g,
        None => max_decay.max(1e-3),
    };
    if !(gamma < 2.0) {
        return bad("tabulated profile decays faster than s^-2");
    }
    let mut c_lower = C_LOWER_CAP;
    let mut c_upper = 1.0_f64;
    for (a, &i) in used.iter().enumerate() {
        for &j in &used[a + 1..] {
            let lam = xs[j] / xs[i];
            let ratio = ell[j] / ell[i];
            c_lower = c_lower.min(ratio * lam.powf(gamma));
            c_upper = c_upper.max(ratio / lam);
        }
    }
    Ok(ScalingConstants { c_lower, c_upper, gamma, alpha: (-first).max(0.0), empirical: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        assert_eq!(KernelProfile::constant(1.0).unwrap().ell(0.5).unwrap(), 1.0);
        assert!((KernelProfile::power_law(1.0, 1.0).unwrap().ell(0.1).unwrap() - 10.0).abs() < 1e-12);
        let log = KernelProfile::log(1.0).unwrap();
        assert!((log.ell(0.2).unwrap() - 10f64.ln()).abs() < 1e-15);
        assert!(log.ell(1.0).is_err());
        assert!(log.ell(0.0).is_err());
    }

    #[test]
    fn extension_branches() {
        let p = KernelProfile::constant(1.0).unwrap().extend().unwrap();
        assert_eq!(p.ell(1.0).unwrap(), 2.0);
        assert_eq!(p.ell(0.5).unwrap(), 1.0);
        assert!(p.r0().is_infinite());
        assert!((p.c_lower() - 0.5).abs() < 1e-15);
        assert_eq!(p.base(), KernelProfile::constant(1.0).unwrap());
    }

    #[test]
    fn rejects_inadmissible() {
        assert!(KernelProfile::power_law(2.5, 1.0).is_err());
        assert!(KernelProfile::constant(f64::INFINITY).is_err());
        assert!(KernelProfile::log(3.0).is_err());
        assert!(KernelProfile::power_log(0.0, -1.5, 1.0).is_err());
        assert!(KernelProfile::tabulated(vec![0.1, 0.2], vec![1.0, 2.0], None).is_err());
    }

    #[test]
    fn document_round_trip() {
        let json = r#"{"family": "power_law", "beta": 1.0, "r0": 1.0, "gamma": 1.0}"#;
        let p = KernelProfile::from_json(json).unwrap();
        assert_eq!(p, KernelProfile::power_law(1.0, 1.0).unwrap());
        let inf = KernelProfile::from_json(r#"{"family": "power_law", "beta": 0.5, "r0": "inf"}"#).unwrap();
        assert!(inf.r0().is_infinite());
        assert_eq!(KernelProfile::from_json(&inf.to_json()).unwrap(), inf);
        let ext = KernelProfile::log(1.0).unwrap().extend().unwrap();
        assert_eq!(KernelProfile::from_json(&ext.to_json()).unwrap(), ext);
    }
}
