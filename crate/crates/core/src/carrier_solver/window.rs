//! Finite configuration windows.

use serde::{Deserialize, Serialize};

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::lattice_maps::{LatticeKind, LocalMap};
use crate::rng::RngStream;

/// Contiguous block of a configuration.
///
/// Type I windows hold `x_n` for `n = offset, offset + 1, ...`. Type II
/// windows hold whole pairs `(Q_n, E_n)` (or `(I_n, J_n)`) flattened as
/// `[Q_offset, E_offset, Q_offset+1, E_offset+1, ...]`. In scalar slot
/// numbering `Q_n` sits at slot `2n - 1` and `E_n` at slot `2n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeWindow {
    pub offset: i64,
    pub kind: LatticeKind,
    pub values: Vec<f64>,
    pub model: LocalMap,
}

impl LatticeWindow {
    /// Window from flat values; type II values must hold whole pairs.
    pub fn new(model: LocalMap, offset: i64, values: Vec<f64>) -> Result<Self> {
        let kind = model
            .lattice_kind()
            .ok_or_else(|| Error::UnsupportedFamily(format!("{} does not drive a lattice", model.name())))?;
        let model = match model {
            LocalMap::UdTodaStar => LocalMap::UdToda,
            LocalMap::DTodaStar => LocalMap::DToda,
            m => m,
        };
        if values.is_empty() {
            return Err(Error::Domain("window must be nonempty".into()));
        }
        if kind == LatticeKind::TypeII && !values.len().is_multiple_of(2) {
            return Err(Error::Domain("type II window must hold whole pairs".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("window values must be finite".into()));
        }
        if model.is_positive() && values.iter().any(|&v| v <= 0.0) {
            return Err(Error::Domain(format!("{} requires positive values", model.name())));
        }
        Ok(Self { offset, kind, values, model })
    }

    /// Type II window from `(Q_n, E_n)` pairs.
    pub fn from_pairs(model: LocalMap, offset: i64, pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(model, offset, pairs.iter().flat_map(|&(q, e)| [q, e]).collect())
    }

    /// Window from a JSON array of numbers (type II also accepts `[[Q, E], ...]`).
    pub fn from_json(model: LocalMap, offset: i64, text: &str) -> Result<Self> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Domain(format!("invalid window JSON: {e}")))?;
        let arr = v.as_array().ok_or_else(|| Error::Domain("window JSON must be an array".into()))?;
        let mut out = Vec::new();
        for item in arr {
            match item {
                serde_json::Value::Array(p) => {
                    for x in p {
                        out.push(x.as_f64().ok_or_else(|| Error::Domain("non-numeric window entry".into()))?);
                    }
                }
                x => out.push(x.as_f64().ok_or_else(|| Error::Domain("non-numeric window entry".into()))?),
            }
        }
        Self::new(model, offset, out)
    }

    /// I.i.d. window: `x_n ~ mu` (type I) or `Q_n ~ mu_tilde`, `E_n ~ mu` (type II).
    pub fn sample(
        model: LocalMap,
        mu: &Distribution,
        mu_tilde: Option<&Distribution>,
        offset: i64,
        len: usize,
        rng: &mut RngStream,
    ) -> Result<Self> {
        match model.lattice_kind() {
            Some(LatticeKind::TypeI) => Self::new(model, offset, mu.sample_n(rng, len)),
            Some(LatticeKind::TypeII) => {
                let mt = mu_tilde.ok_or_else(|| Error::Domain("type II sampling needs mu_tilde".into()))?;
                let mut v = Vec::with_capacity(2 * len);
                for _ in 0..len {
                    v.push(mt.sample(rng));
                    v.push(mu.sample(rng));
                }
                Self::new(model, offset, v)
            }
            None => Err(Error::UnsupportedFamily(model.name().to_string())),
        }
    }

    /// Number of sites (type I) or pairs (type II).
    pub fn len(&self) -> usize {
        match self.kind {
            LatticeKind::TypeI => self.values.len(),
            LatticeKind::TypeII => self.values.len() / 2,
        }
    }

    /// Always false for a constructed window.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// One past the last index.
    pub fn end(&self) -> i64 {
        self.offset + self.len() as i64
    }

    /// `x_n` of a type I window.
    #[inline]
    pub fn x(&self, n: i64) -> f64 {
        self.values[(n - self.offset) as usize]
    }

    /// `(Q_n, E_n)` of a type II window.
    #[inline]
    pub fn pair(&self, n: i64) -> (f64, f64) {
        let i = 2 * (n - self.offset) as usize;
        (self.values[i], self.values[i + 1])
    }

    /// First components `Q_n` of a type II window.
    pub fn firsts(&self) -> Vec<f64> {
        self.values.iter().step_by(2).copied().collect()
    }

    /// Second components `E_n` of a type II window.
    pub fn seconds(&self) -> Vec<f64> {
        self.values.iter().skip(1).step_by(2).copied().collect()
    }

    /// Sub-window of indices `[from, to)`.
    pub fn slice(&self, from: i64, to: i64) -> Result<Self> {
        if from < self.offset || to > self.end() || from >= to {
            return Err(Error::Coverage(format!(
                "slice [{from}, {to}) outside window [{}, {})",
                self.offset,
                self.end()
            )));
        }
        let w = if self.kind == LatticeKind::TypeII { 2 } else { 1 };
        let a = w * (from - self.offset) as usize;
        let b = w * (to - self.offset) as usize;
        Ok(Self { offset: from, kind: self.kind, values: self.values[a..b].to_vec(), model: self.model })
    }

    /// Spatial reflection.
    ///
    /// Type I: `x_n ↦ x_{1-n}`. Type II: scalar slots `x_m ↦ x_{-m}`; the
    /// reflected pairs are `(Q_k, E_{k-1})` at index `1 - k`, so the window
    /// loses one pair.
    pub fn reflect(&self) -> Result<Self> {
        match self.kind {
            LatticeKind::TypeI => {
                let mut v = self.values.clone();
                v.reverse();
                Ok(Self { offset: 1 - (self.end() - 1), kind: self.kind, values: v, model: self.model })
            }
            LatticeKind::TypeII => {
                if self.len() < 2 {
                    return Err(Error::Coverage("reflection needs at least two pairs".into()));
                }
                let e = self.end() - 1;
                let mut v = Vec::with_capacity(self.values.len() - 2);
                for k in (self.offset + 1..=e).rev() {
                    v.push(self.pair(k).0);
                    v.push(self.pair(k - 1).1);
                }
                Ok(Self { offset: 1 - e, kind: self.kind, values: v, model: self.model })
            }
        }
    }
}
