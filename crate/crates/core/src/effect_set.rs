use std::fmt;

use crate::model::Contrast;
use crate::Scalar;

/// The causal odds ratios reported for a contrast.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EffectKind {
    Pnde,
    Tnie,
    Tnde,
    Pnie,
    Te,
    Cde0,
    Cde1,
}

impl EffectKind {
    /// The five natural/total effects in delta-method row order.
    pub const NATURAL: [EffectKind; 5] =
        [EffectKind::Pnde, EffectKind::Tnie, EffectKind::Tnde, EffectKind::Pnie, EffectKind::Te];

    pub fn label(self) -> &'static str {
        match self {
            Self::Pnde => "PNDE",
            Self::Tnie => "TNIE",
            Self::Tnde => "TNDE",
            Self::Pnie => "PNIE",
            Self::Te => "TE",
            Self::Cde0 => "CDE(0)",
            Self::Cde1 => "CDE(1)",
        }
    }
}

impl fmt::Display for EffectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Log odds ratios of one contrast. The odds-ratio scale is derived on
/// demand.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectSet<T> {
    pub log_pnde: T,
    pub log_tnie: T,
    pub log_tnde: T,
    pub log_pnie: T,
    pub log_te: T,
    /// Controlled direct effect with the mediator fixed at 0 and at 1.
    pub log_cde_at: [T; 2],
    pub contrast: Contrast<T>,
}

impl<T: Scalar> EffectSet<T> {
    pub fn log(&self, kind: EffectKind) -> T {
        match kind {
            EffectKind::Pnde => self.log_pnde,
            EffectKind::Tnie => self.log_tnie,
            EffectKind::Tnde => self.log_tnde,
            EffectKind::Pnie => self.log_pnie,
            EffectKind::Te => self.log_te,
            EffectKind::Cde0 => self.log_cde_at[0],
            EffectKind::Cde1 => self.log_cde_at[1],
        }
    }

    pub fn odds_ratio(&self, kind: EffectKind) -> T {
        self.log(kind).exp()
    }

    /// `(PNDE, TNIE, TNDE, PNIE, TE)` on the log scale.
    pub fn log_vector(&self) -> [T; 5] {
        EffectKind::NATURAL.map(|k| self.log(k))
    }

    pub fn log_cde(&self, w: bool) -> T {
        self.log_cde_at[usize::from(w)]
    }

    /// `log PNDE - log CDE(0)`: what the pure direct effect adds to the
    /// controlled direct effect at `w = 0`.
    pub fn log_pnde_residual(&self) -> T {
        self.log_pnde - self.log_cde_at[0]
    }

    pub fn log_tnde_residual(&self) -> T {
        self.log_tnde - self.log_cde_at[0]
    }

    /// `log TNDE + log PNIE`, the second decomposition of the total effect.
    pub fn log_te_via_total_direct(&self) -> T {
        self.log_tnde + self.log_pnie
    }

    /// Largest deviation from `TE = PNDE x TNIE = TNDE x PNIE` on the log
    /// scale.
    pub fn decomposition_residual(&self) -> T {
        let a = (self.log_te - self.log_pnde - self.log_tnie).abs();
        let b = (self.log_te - self.log_tnde - self.log_pnie).abs();
        a.max(b)
    }

    pub fn is_finite(&self) -> bool {
        self.log_vector().iter().chain(&self.log_cde_at).all(|v| v.is_finite())
    }
}
