//! Zero-order Sugeno inference over seven-term triangular partitions.
//!
//! Each universe (error `e`, error rate `ec`, output `u`) is described by four
//! gene values decoded into breakpoints `b1 < b2 < 0 < b3 < b4`. The seven term
//! centers are `b1, mid(b1, b2), b2, 0, b3, mid(b3, b4), b4`; neighbouring
//! triangles overlap so memberships always form a partition of unity, and the
//! outer terms saturate as shoulders.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, LfcError, Result};

pub const GENE_MIN: f64 = 0.01;
pub const GENE_MAX: f64 = 0.99;

/// Linguistic terms, ordered from most negative to most positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    NB,
    NM,
    NS,
    ZE,
    PS,
    PM,
    PB,
}

impl Term {
    pub const ALL: [Term; 7] = [
        Term::NB,
        Term::NM,
        Term::NS,
        Term::ZE,
        Term::PS,
        Term::PM,
        Term::PB,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Signed position in `-3..=3`.
    pub fn signed(self) -> i32 {
        self as i32 - 3
    }

    pub fn from_signed(v: i32) -> Option<Term> {
        if (-3..=3).contains(&v) {
            Some(Term::ALL[(v + 3) as usize])
        } else {
            None
        }
    }

    pub fn negate(self) -> Term {
        Term::ALL[6 - self.index()]
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Four genes shaping one universe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneQuad(pub [f64; 4]);

impl GeneQuad {
    pub fn new(genes: [f64; 4]) -> Result<Self> {
        for (i, &g) in genes.iter().enumerate() {
            if !(GENE_MIN..=GENE_MAX).contains(&g) {
                return Err(LfcError::domain(format!(
                    "gene F{} = {g} outside [{GENE_MIN}, {GENE_MAX}]",
                    i + 1
                )));
            }
        }
        Ok(GeneQuad(genes))
    }

    pub fn symmetric(&self) -> bool {
        let [f1, f2, f3, f4] = self.0;
        f1 == f3 && f2 == f4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakpointSet {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub scale: f64,
}

/// Maps a gene quad onto universe breakpoints:
/// `b1 = -(F4 + F3) s`, `b2 = -F3 s`, `b3 = F1 s`, `b4 = (F1 + F2) s`.
pub fn decode_quad(q: &GeneQuad, scale: f64) -> Result<BreakpointSet> {
    GeneQuad::new(q.0)?;
    if !(scale.is_finite() && scale > 0.0) {
        return Err(LfcError::domain(format!("universe scale {scale} must be > 0")));
    }
    let [f1, f2, f3, f4] = q.0;
    Ok(BreakpointSet {
        b1: -((f4 + f3) * scale),
        b2: -(f3 * scale),
        b3: f1 * scale,
        b4: (f1 + f2) * scale,
        scale,
    })
}

/// Seven triangular terms over one universe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipFamily {
    centers: [f64; 7],
}

pub fn build_family(b: &BreakpointSet) -> Result<MembershipFamily> {
    let BreakpointSet { b1, b2, b3, b4, .. } = *b;
    if !(b1 < b2 && b2 < 0.0 && 0.0 < b3 && b3 < b4) {
        return Err(LfcError::domain(format!(
            "breakpoints must satisfy b1 < b2 < 0 < b3 < b4, got ({b1}, {b2}, {b3}, {b4})"
        )));
    }
    MembershipFamily::from_centers([
        b1,
        0.5 * (b1 + b2),
        b2,
        0.0,
        b3,
        0.5 * (b3 + b4),
        b4,
    ])
}

impl MembershipFamily {
    pub fn from_centers(centers: [f64; 7]) -> Result<Self> {
        for c in centers {
            ensure_finite("term center", c)?;
        }
        if centers.windows(2).any(|w| w[0] >= w[1]) || centers[3] != 0.0 {
            return Err(LfcError::domain(format!(
                "term centers must be strictly increasing with ZE at 0: {centers:?}"
            )));
        }
        Ok(MembershipFamily { centers })
    }

    pub fn centers(&self) -> &[f64; 7] {
        &self.centers
    }

    pub fn center(&self, t: Term) -> f64 {
        self.centers[t.index()]
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.centers[0], self.centers[6])
    }

    /// Lower active term index `i` and its degree; term `i + 1` has `1 - degree`.
    #[inline]
    fn active(&self, x: f64) -> (usize, f64) {
        let c = &self.centers;
        if x <= c[0] {
            return (0, 1.0);
        }
        if x >= c[6] {
            return (5, 0.0);
        }
        let mut i = 0;
        while i < 5 && x >= c[i + 1] {
            i += 1;
        }
        (i, (c[i + 1] - x) / (c[i + 1] - c[i]))
    }

    /// Degrees of all seven terms at `x`.
    pub fn memberships(&self, x: f64) -> [f64; 7] {
        let mut m = [0.0; 7];
        let (i, lo) = self.active(x);
        m[i] = lo;
        m[i + 1] = 1.0 - lo;
        m
    }

    /// Mirror image holds when `centers[6 - i] == -centers[i]` for all i.
    pub fn is_symmetric(&self) -> bool {
        (0..7).all(|i| self.centers[6 - i] == -self.centers[i])
    }
}

const TABLE: [[Term; 7]; 7] = {
    use Term::*;
    [
        [NB, NB, NM, NM, NS, NS, ZE],
        [NB, NM, NM, NS, NS, ZE, PS],
        [NM, NM, NS, NS, ZE, PS, PS],
        [NM, NS, NS, ZE, PS, PS, PM],
        [NS, NS, ZE, PS, PS, PM, PM],
        [NS, ZE, PS, PS, PM, PM, PB],
        [ZE, PS, PS, PM, PM, PB, PB],
    ]
};

/// 7×7 rule table indexed by (error term, error-rate term).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleBase {
    table: [[Term; 7]; 7],
}

impl Default for RuleBase {
    fn default() -> Self {
        RuleBase { table: TABLE }
    }
}

impl RuleBase {
    pub fn consequent(&self, e: Term, ec: Term) -> Term {
        self.table[e.index()][ec.index()]
    }

    pub fn table(&self) -> &[[Term; 7]; 7] {
        &self.table
    }
}

/// Universe scale factors applied to decoded gene quads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniverseScales {
    pub e: f64,
    pub ec: f64,
    pub u: f64,
}

impl Default for UniverseScales {
    fn default() -> Self {
        UniverseScales {
            e: 0.032,
            ec: 100.0,
            u: 0.032,
        }
    }
}

/// Three membership families plus the rule base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzySystem {
    pub e: MembershipFamily,
    pub ec: MembershipFamily,
    pub u: MembershipFamily,
    pub rules: RuleBase,
}

impl FuzzySystem {
    pub fn from_quads(
        e: &GeneQuad,
        ec: &GeneQuad,
        u: &GeneQuad,
        scales: &UniverseScales,
    ) -> Result<Self> {
        Ok(FuzzySystem {
            e: build_family(&decode_quad(e, scales.e)?)?,
            ec: build_family(&decode_quad(ec, scales.ec)?)?,
            u: build_family(&decode_quad(u, scales.u)?)?,
            rules: RuleBase::default(),
        })
    }

    /// Builds from twelve genes in `e`, `ec`, `u` quad order.
    pub fn from_genes(genes: &[f64; 12], scales: &UniverseScales) -> Result<Self> {
        let quad = |k: usize| GeneQuad::new([genes[k], genes[k + 1], genes[k + 2], genes[k + 3]]);
        Self::from_quads(&quad(0)?, &quad(4)?, &quad(8)?, scales)
    }

    /// Normalized firing strengths of all 49 rules.
    pub fn rule_weights(&self, e_val: f64, ec_val: f64) -> Result<[[f64; 7]; 7]> {
        ensure_finite("e", e_val)?;
        ensure_finite("ec", ec_val)?;
        let me = self.e.memberships(e_val);
        let mec = self.ec.memberships(ec_val);
        let mut w = [[0.0; 7]; 7];
        let mut total = 0.0;
        for i in 0..7 {
            for j in 0..7 {
                w[i][j] = me[i] * mec[j];
                total += w[i][j];
            }
        }
        if total <= 0.0 {
            return Err(LfcError::domain("no rule fires"));
        }
        for row in w.iter_mut() {
            for x in row.iter_mut() {
                *x /= total;
            }
        }
        Ok(w)
    }

    /// Crisp output for one `(e, ec)` pair, in output-universe units.
    pub fn infer(&self, e_val: f64, ec_val: f64) -> Result<f64> {
        ensure_finite("e", e_val)?;
        ensure_finite("ec", ec_val)?;
        let (ei, elo) = self.e.active(e_val);
        let (ci, clo) = self.ec.active(ec_val);
        let de = [elo, 1.0 - elo];
        let dc = [clo, 1.0 - clo];
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, &ma) in de.iter().enumerate() {
            for (b, &mb) in dc.iter().enumerate() {
                let w = ma * mb;
                if w == 0.0 {
                    continue;
                }
                let out = self.rules.table[ei + a][ci + b];
                num += w * self.u.centers[out.index()];
                den += w;
            }
        }
        if den <= 0.0 {
            return Err(LfcError::domain("no rule fires"));
        }
        Ok(num / den)
    }
}
