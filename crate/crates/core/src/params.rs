//! Model parameters in normalized form and the critical constants that
//! follow from them directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Couplings of the amplified Rabi model.
///
/// Stored in normalized form: `eta = Ω/ω₀`, `g = 2λ/√(ω₀Ω)`,
/// `gamma1 = κ₁/ω₀`, `gamma2 = κ₂η/ω₀`. `omega0` is kept explicit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFields", into = "RawFields")]
pub struct ModelParams {
    pub omega0: f64,
    pub eta: f64,
    pub mu: f64,
    pub g: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFields {
    #[serde(default = "unit")]
    omega0: f64,
    eta: f64,
    mu: f64,
    g: f64,
    gamma1: f64,
    gamma2: f64,
}

fn unit() -> f64 {
    1.0
}

impl TryFrom<RawFields> for ModelParams {
    type Error = Error;
    fn try_from(r: RawFields) -> Result<Self> {
        ModelParams::new(r.omega0, r.eta, r.mu, r.g, r.gamma1, r.gamma2)
    }
}

impl From<ModelParams> for RawFields {
    fn from(p: ModelParams) -> Self {
        RawFields {
            omega0: p.omega0,
            eta: p.eta,
            mu: p.mu,
            g: p.g,
            gamma1: p.gamma1,
            gamma2: p.gamma2,
        }
    }
}

/// Energies and rates in physical units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawRates {
    pub omega: f64,
    pub lambda: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

/// Adiabatic spin branch. `Minus` carries `s_z ≤ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Minus, Branch::Plus];

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        }
    }
}

impl ModelParams {
    pub fn new(omega0: f64, eta: f64, mu: f64, g: f64, gamma1: f64, gamma2: f64) -> Result<Self> {
        let p = ModelParams { omega0, eta, mu, g, gamma1, gamma2 };
        p.validate()?;
        Ok(p)
    }

    /// Unit frequency, everything else explicit.
    pub fn normalized(eta: f64, mu: f64, g: f64, gamma1: f64, gamma2: f64) -> Result<Self> {
        Self::new(1.0, eta, mu, g, gamma1, gamma2)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.omega0, self.eta, self.mu, self.g, self.gamma1, self.gamma2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite field".into()));
        }
        if self.omega0 <= 0.0 {
            return Err(Error::InvalidParams(format!("omega0 = {} must be > 0", self.omega0)));
        }
        if self.eta <= 0.0 {
            return Err(Error::InvalidParams(format!("eta = {} must be > 0", self.eta)));
        }
        for (name, v) in [("g", self.g), ("gamma1", self.gamma1), ("gamma2", self.gamma2)] {
            if v < 0.0 {
                return Err(Error::InvalidParams(format!("{name} = {v} must be >= 0")));
            }
        }
        Ok(())
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_gamma2(mut self, gamma2: f64) -> Self {
        self.gamma2 = gamma2;
        self
    }

    pub fn with_gamma1(mut self, gamma1: f64) -> Self {
        self.gamma1 = gamma1;
        self
    }

    /// Ω = ηω₀, λ = g√(ω₀Ω)/2, κ₁ = γ₁ω₀, κ₂ = γ₂ω₀/η.
    pub fn raw_rates(&self) -> RawRates {
        let omega = self.eta * self.omega0;
        RawRates {
            omega,
            lambda: self.g * (self.omega0 * omega).sqrt() / 2.0,
            kappa1: self.gamma1 * self.omega0,
            kappa2: self.gamma2 * self.omega0 / self.eta,
        }
    }

    /// Inverse of [`raw_rates`](Self::raw_rates).
    pub fn from_raw(omega0: f64, mu: f64, raw: RawRates) -> Result<Self> {
        let eta = raw.omega / omega0;
        Self::new(
            omega0,
            eta,
            mu,
            2.0 * raw.lambda / (omega0 * raw.omega).sqrt(),
            raw.kappa1 / omega0,
            raw.kappa2 * eta / omega0,
        )
    }

    /// μ_c = √(1+γ₁²); μ > μ_c is the inverted regime.
    pub fn critical_mu(&self) -> f64 {
        (1.0 + self.gamma1 * self.gamma1).sqrt()
    }

    pub fn is_inverted(&self) -> bool {
        self.mu > self.critical_mu()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn raw_rate_examples() {
        let p = ModelParams::new(1.0, 2500.0, 2.0, 1.0, 0.1, 44.26).unwrap();
        assert!((p.raw_rates().kappa2 - 0.017704).abs() < 1e-15);
        let p = ModelParams::new(1.0, 1.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(p.raw_rates().lambda, 0.5);
        let p = ModelParams::new(2.0, 100.0, 0.0, 0.0, 0.1, 0.0).unwrap();
        let r = p.raw_rates();
        assert!((r.kappa1 - 0.2).abs() < 1e-15);
        assert_eq!(r.omega, 200.0);
    }

    #[test]
    fn critical_mu_examples() {
        let p = ModelParams::normalized(100.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        assert!((p.critical_mu() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(p.with_gamma1(0.0).critical_mu(), 1.0);
        assert!((p.with_gamma1(0.1).critical_mu() - 1.004988).abs() < 1e-6);
    }

    #[test]
    fn rejects_invalid() {
        assert!(ModelParams::normalized(0.0, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::normalized(1.0, 0.0, -1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(-1.0, 1.0, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(serde_json::from_str::<ModelParams>(
            r#"{"omega0":1,"eta":-2,"mu":0,"g":1,"gamma1":1,"gamma2":0}"#
        )
        .is_err());
    }

    #[test]
    fn json_is_flat() {
        let p = ModelParams::normalized(250.0, 2.0, 1.5, 0.1, 44.0).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"omega0":1.0,"eta":250.0,"mu":2.0,"g":1.5,"gamma1":0.1,"gamma2":44.0}"#);
        assert_eq!(serde_json::from_str::<ModelParams>(&s).unwrap(), p);
    }

    proptest! {
        #[test]
        fn raw_round_trip(omega0 in 0.1f64..10.0, eta in 1.0f64..1e5, mu in -3.0f64..3.0,
                          g in 0.0f64..5.0, g1 in 0.0f64..5.0, g2 in 0.0f64..100.0) {
            let p = ModelParams::new(omega0, eta, mu, g, g1, g2).unwrap();
            let r = p.raw_rates();
            let back = ModelParams::from_raw(omega0, mu, r).unwrap().raw_rates();
            let rel = |a: f64, b: f64| if a == 0.0 { b.abs() } else { ((a - b) / a).abs() };
            prop_assert!(rel(r.omega, back.omega) < 1e-14);
            prop_assert!(rel(r.lambda, back.lambda) < 1e-14);
            prop_assert!(rel(r.kappa1, back.kappa1) < 1e-14);
            prop_assert!(rel(r.kappa2, back.kappa2) < 1e-14);
        }

        #[test]
        fn critical_mu_monotone(a in 0.0f64..10.0, b in 0.0f64..10.0) {
            let p = ModelParams::normalized(1.0, 0.0, 0.0, a.min(b), 0.0).unwrap();
            let q = p.with_gamma1(a.max(b));
            prop_assert!(p.critical_mu() >= 1.0);
            prop_assert!(q.critical_mu() >= p.critical_mu());
        }
    }
}
