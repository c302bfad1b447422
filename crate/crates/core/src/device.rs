//! Analytical MOSFET compact model.
//!
//! Below threshold the drain current follows the classic subthreshold
//! expression
//!
//! ```text
//! I = (W/L) · µC_sth · V_th² · exp((Vgs − Vt0 + η·Vds) / (n·V_th)) · (1 − exp(−Vds/V_th))
//! ```
//!
//! where `V_th = kT/q`. The DIBL term enters with the sign that makes leakage
//! grow with `Vds`. Above threshold an alpha-power-law current with velocity
//! saturation and channel-length modulation is added on top of the tangent
//! continuation of the exponential, so the model is C¹ across the stitch at
//! zero overdrive (`Vgs = Vt0 − η·Vds`).
//!
//! All voltages in [`BiasPoint`] are source referenced and polarity
//! normalized: for a pMOS device pass `Vsg` and `Vsd`. The terminal-level
//! entry point [`channel_current`] takes physical node voltages and handles
//! polarity and source/drain swapping.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Thermal voltage `kT/q` in volts.
pub fn thermal_voltage(temperature: f64) -> f64 {
    BOLTZMANN * temperature / ELEMENTARY_CHARGE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Nmos,
    Pmos,
}

/// Width-independent model card for one device flavour.
///
/// This is what the technology block of a config file carries; a
/// [`MosParams`] is a card instantiated with a geometry and temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCard {
    /// Threshold voltage magnitude, V.
    pub vt0: f64,
    /// Subthreshold prefactor µ·C_sth, A/V² per square.
    pub mu_csth: f64,
    /// Subthreshold slope factor n.
    pub n_slope: f64,
    /// DIBL coefficient η.
    pub eta_dibl: f64,
    /// Strong-inversion transconductance coefficient, A/V^α per square.
    pub k_sat: f64,
    /// Velocity-saturation exponent α.
    pub alpha: f64,
    /// Saturation voltage coefficient: `Vdsat = vdsat_coeff · Vov^(α/2)`.
    pub vdsat_coeff: f64,
    /// Channel-length modulation, 1/V.
    pub lambda: f64,
}

/// Per-transistor parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MosParams {
    pub polarity: Polarity,
    /// Channel width, µm.
    pub w: f64,
    /// Channel length, µm.
    pub l: f64,
    /// Temperature, K.
    pub temperature: f64,
    pub card: ModelCard,
}

impl MosParams {
    pub fn new(polarity: Polarity, w: f64, l: f64, temperature: f64, card: ModelCard) -> Self {
        Self {
            polarity,
            w,
            l,
            temperature,
            card,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let c = &self.card;
        let checks: [(&'static str, bool); 8] = [
            ("w", self.w > 0.0 && self.w.is_finite()),
            ("l", self.l > 0.0 && self.l.is_finite()),
            ("temperature", self.temperature > 0.0 && self.temperature.is_finite()),
            ("n_slope", c.n_slope >= 1.0),
            ("mu_csth", c.mu_csth >= 0.0),
            ("k_sat", c.k_sat >= 0.0),
            ("alpha", c.alpha > 1.0 && c.alpha <= 2.0),
            ("vdsat_coeff", c.vdsat_coeff > 0.0),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(ModelError::InvalidParameter(name));
            }
        }
        Ok(())
    }

    pub fn thermal_voltage(&self) -> f64 {
        thermal_voltage(self.temperature)
    }

    /// Width over length.
    pub fn aspect(&self) -> f64 {
        self.w / self.l
    }

    /// Gate area W·L in µm².
    pub fn area(&self) -> f64 {
        self.w * self.l
    }

    /// Copy with the threshold shifted by `dvt` volts (magnitude sense).
    pub fn with_vt_shift(mut self, dvt: f64) -> Self {
        self.card.vt0 += dvt;
        self
    }

    /// Continuity constant `K` at the subthreshold/strong-inversion stitch:
    /// a step `delta` across zero overdrive changes the current by at most
    /// `K·delta`. `K` is the slope of the subthreshold continuation plus the
    /// secant slope of the alpha-power term over `[0, delta]`, which tends
    /// to zero with `delta` for `alpha > 1`.
    pub fn stitch_bound(&self, vds: f64, delta: f64) -> f64 {
        let vt = self.thermal_voltage();
        let n_vt = self.card.n_slope * vt;
        let vds = vds.abs();
        let continuation = self.subthreshold_prefactor() * (1.0 - (-vds / vt).exp()) / n_vt;
        let alpha_power =
            self.card.k_sat * self.aspect() * (1.0 + self.card.lambda * vds) * delta.powf(self.card.alpha - 1.0);
        continuation + alpha_power
    }

    fn subthreshold_prefactor(&self) -> f64 {
        let vt = self.thermal_voltage();
        self.aspect() * self.card.mu_csth * vt * vt
    }
}

/// Source-referenced, polarity-normalized bias.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasPoint {
    pub vgs: f64,
    pub vds: f64,
}

impl BiasPoint {
    pub fn new(vgs: f64, vds: f64) -> Self {
        Self { vgs, vds }
    }
}

/// Drain current and its partial derivatives at a bias point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Conduction {
    pub id: f64,
    pub gm: f64,
    pub gds: f64,
}

/// Subthreshold current, evaluated verbatim for any bias.
pub fn subthreshold_current(p: &MosParams, b: BiasPoint) -> f64 {
    let vt = p.thermal_voltage();
    let c = &p.card;
    let exponent = (b.vgs - c.vt0 + c.eta_dibl * b.vds) / (c.n_slope * vt);
    p.subthreshold_prefactor() * exponent.exp() * (1.0 - (-b.vds / vt).exp())
}

/// Drain current over the full bias plane.
pub fn drain_current(p: &MosParams, b: BiasPoint) -> f64 {
    conduction(p, b).id
}

/// Drain current with analytic `gm` and `gds`.
///
/// For `Vds < 0` the roles of source and drain are exchanged, which keeps
/// the model odd in `Vds` about the channel midpoint and continuous at zero.
pub fn conduction(p: &MosParams, b: BiasPoint) -> Conduction {
    if b.vds >= 0.0 {
        forward(p, b.vgs, b.vds)
    } else {
        let f = forward(p, b.vgs - b.vds, -b.vds);
        Conduction {
            id: -f.id,
            gm: -f.gm,
            gds: f.gm + f.gds,
        }
    }
}

fn forward(p: &MosParams, vgs: f64, vds: f64) -> Conduction {
    let c = &p.card;
    let vt = p.thermal_voltage();
    let n_vt = c.n_slope * vt;
    let i0 = p.subthreshold_prefactor();
    let e_ds = (-vds / vt).exp();
    let sat = 1.0 - e_ds;
    let dsat = e_ds / vt;
    let vov = vgs - c.vt0 + c.eta_dibl * vds;

    // Partial derivatives with respect to the overdrive and to Vds at fixed
    // overdrive; gds picks up the DIBL term through the chain rule.
    let (mut id, mut d_vov, mut d_vds);
    if vov <= 0.0 {
        let ex = (vov / n_vt).exp();
        id = i0 * ex * sat;
        d_vov = id / n_vt;
        d_vds = i0 * ex * dsat;
    } else {
        let lin = 1.0 + vov / n_vt;
        id = i0 * lin * sat;
        d_vov = i0 * sat / n_vt;
        d_vds = i0 * lin * dsat;

        let k = c.k_sat * p.aspect();
        let clm = 1.0 + c.lambda * vds;
        let pow = vov.powf(c.alpha);
        let vdsat = c.vdsat_coeff * vov.powf(0.5 * c.alpha);
        let x = vds / vdsat;
        if x < 1.0 {
            let h = (2.0 - x) * x;
            id += k * pow * h * clm;
            d_vov += k * c.alpha * pow / vov * x * clm;
            d_vds += k * pow * ((2.0 - 2.0 * x) / vdsat * clm + h * c.lambda);
        } else {
            id += k * pow * clm;
            d_vov += k * c.alpha * pow / vov * clm;
            d_vds += k * pow * c.lambda;
        }
    }
    Conduction {
        id,
        gm: d_vov,
        gds: d_vov * c.eta_dibl + d_vds,
    }
}

/// Current flowing into the drain terminal for physical node voltages, with
/// derivatives with respect to each terminal voltage.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TerminalCurrent {
    pub i: f64,
    pub d_vg: f64,
    pub d_vd: f64,
    pub d_vs: f64,
}

/// Terminal-level evaluation: positive `i` flows from drain to source
/// through the channel. Handles polarity normalization.
pub fn channel_current(p: &MosParams, vg: f64, vd: f64, vs: f64) -> TerminalCurrent {
    // For pMOS both the normalized voltages and the current change sign, so
    // the terminal derivatives come out identical to the nMOS case.
    let (c, i) = match p.polarity {
        Polarity::Nmos => {
            let c = conduction(p, BiasPoint::new(vg - vs, vd - vs));
            (c, c.id)
        }
        Polarity::Pmos => {
            let c = conduction(p, BiasPoint::new(vs - vg, vs - vd));
            (c, -c.id)
        }
    };
    TerminalCurrent {
        i,
        d_vg: c.gm,
        d_vd: c.gds,
        d_vs: -c.gm - c.gds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn card() -> ModelCard {
        ModelCard {
            vt0: 0.4,
            mu_csth: 200e-6,
            n_slope: 1.4,
            eta_dibl: 0.08,
            k_sat: 400e-6,
            alpha: 1.3,
            vdsat_coeff: 0.6,
            lambda: 0.1,
        }
    }

    fn nmos(w: f64) -> MosParams {
        MosParams::new(Polarity::Nmos, w, 0.065, 300.0, card())
    }

    #[test]
    fn thermal_voltage_at_room_temperature() {
        assert!((thermal_voltage(300.0) - 0.025852).abs() < 1e-5);
    }

    #[test]
    fn zero_vds_gives_zero_current() {
        let p = nmos(0.12);
        for vgs in [-0.5, 0.0, 0.3, 0.4, 0.8, 1.2, 2.0] {
            assert_eq!(drain_current(&p, BiasPoint::new(vgs, 0.0)), 0.0);
            assert_eq!(subthreshold_current(&p, BiasPoint::new(vgs, 0.0)), 0.0);
        }
    }

    #[test]
    fn width_scales_current_linearly() {
        let b = BiasPoint::new(0.9, 0.7);
        let i1 = drain_current(&nmos(0.12), b);
        let i2 = drain_current(&nmos(0.24), b);
        assert!((i2 / i1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn golden_subthreshold_value() {
        // W/L = 1, Vgs = 0, Vds = 1.2 V, Vt0 = 0.4, n = 1.4, η = 0.08, 300 K,
        // µC_sth = 200 µA/V². Reference computed offline in double precision
        // from the closed form.
        let mut p = MosParams::new(Polarity::Nmos, 0.065, 0.065, 300.0, card());
        p.card.mu_csth = 200e-6;
        let i = subthreshold_current(&p, BiasPoint::new(0.0, 1.2));
        let golden = 3.007_314_404_987e-11;
        assert!((i / golden - 1.0).abs() < 1e-12, "{i:e}");
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let p = nmos(0.24);
        let h = 1e-7;
        for &vgs in &[0.1, 0.35, 0.39, 0.45, 0.7, 1.2] {
            for &vds in &[-0.8, -0.1, 0.02, 0.3, 0.9, 1.2] {
                let c = conduction(&p, BiasPoint::new(vgs, vds));
                let gm = (drain_current(&p, BiasPoint::new(vgs + h, vds))
                    - drain_current(&p, BiasPoint::new(vgs - h, vds)))
                    / (2.0 * h);
                let gds = (drain_current(&p, BiasPoint::new(vgs, vds + h))
                    - drain_current(&p, BiasPoint::new(vgs, vds - h)))
                    / (2.0 * h);
                let scale = c.id.abs().max(1e-12);
                assert!(
                    (c.gm - gm).abs() <= 1e-4 * scale / 1e-2 + 1e-12,
                    "gm {vgs} {vds}: {} vs {gm}",
                    c.gm
                );
                assert!(
                    (c.gds - gds).abs() <= 1e-4 * scale / 1e-2 + 1e-12,
                    "gds {vgs} {vds}: {} vs {gds}",
                    c.gds
                );
            }
        }
    }

    #[test]
    fn pmos_mirrors_nmos() {
        let n = nmos(0.12);
        let mut p = n;
        p.polarity = Polarity::Pmos;
        let tn = channel_current(&n, 0.8, 1.0, 0.0);
        let tp = channel_current(&p, 1.2 - 0.8, 1.2 - 1.0, 1.2);
        assert!((tn.i + tp.i).abs() < 1e-18);
        assert!((tn.d_vg - tp.d_vg).abs() < 1e-15);
    }
}
