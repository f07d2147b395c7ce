//! Resource recurrences for verified logical clusters.
//!
//! All quantities are generic over [`Scalar`]; with `BigRational` and unit
//! success probabilities every value is an exact integer.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytic::{self, ComputationSize};
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::scalar::Scalar;

/// Fundamental cluster types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Cluster {
    #[serde(rename = "h")]
    Hexa,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "+")]
    Plus,
}

impl Cluster {
    pub const ALL: [Cluster; 3] = [Cluster::Hexa, Cluster::Zero, Cluster::Plus];

    /// `(n^S, n^D, n^0, n^b)`.
    pub fn coefficients(self) -> [u64; 4] {
        match self {
            Cluster::Hexa => [2, 3, 6, 4],
            Cluster::Zero => [6, 7, 11, 15],
            Cluster::Plus => [5, 6, 10, 14],
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cluster::Hexa => "h",
            Cluster::Zero => "0",
            Cluster::Plus => "+",
        }
    }
}

impl FromStr for Cluster {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "h" | "hexa" => Ok(Cluster::Hexa),
            "0" | "zero" => Ok(Cluster::Zero),
            "+" | "plus" => Ok(Cluster::Plus),
            other => Err(Error::Parse {
                line: 0,
                message: format!("unknown cluster type `{other}`"),
            }),
        }
    }
}

impl fmt::Display for Cluster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    MonteCarlo,
    User,
    AsymptoticOne,
}

/// Success probabilities `p_α^(l)`. Levels 3 and above default to 1;
/// levels 1 and 2 must be given.
#[derive(Clone, Debug, PartialEq)]
pub struct SuccessTable<T: Scalar = f64> {
    entries: BTreeMap<(Cluster, u32), (T, Source)>,
}

impl<T: Scalar> Default for SuccessTable<T> {
    fn default() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }
}

/// Lowest level covered by the default of one.
pub const ASYMPTOTIC_LEVEL: u32 = 3;

impl<T: Scalar> SuccessTable<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every probability below level 3 set to one.
    pub fn unit() -> Self {
        let mut t = Self::new();
        for a in Cluster::ALL {
            for l in 1..ASYMPTOTIC_LEVEL {
                t.entries.insert((a, l), (T::one(), Source::User));
            }
        }
        t
    }

    pub fn set(&mut self, alpha: Cluster, level: u32, p: T, source: Source) -> Result<()> {
        if !(p > T::zero() && p <= T::one()) {
            return Err(Error::InvalidProbability {
                name: format!("p_{alpha}^({level})"),
                value: p.approx(),
            });
        }
        if level == 0 {
            return Err(Error::Domain("success probabilities start at level 1".into()));
        }
        self.entries.insert((alpha, level), (p, source));
        Ok(())
    }

    pub fn get(&self, alpha: Cluster, level: u32) -> Result<T> {
        self.entry(alpha, level).map(|(p, _)| p)
    }

    pub fn entry(&self, alpha: Cluster, level: u32) -> Result<(T, Source)> {
        match self.entries.get(&(alpha, level)) {
            Some(e) => Ok(e.clone()),
            None if level >= ASYMPTOTIC_LEVEL => Ok((T::one(), Source::AsymptoticOne)),
            None => Err(Error::MissingSuccess {
                alpha: alpha.symbol().into(),
                level,
            }),
        }
    }

    /// Reads `alpha,level,p[,source]` rows with a header line.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let mut t = Self::new();
        for (i, row) in rdr.records().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            let field = |k: usize| -> Result<&str> {
                row.get(k).ok_or_else(|| Error::Parse {
                    line,
                    message: "expected alpha,level,p".into(),
                })
            };
            let alpha: Cluster = field(0)?.parse().map_err(|_| Error::Parse {
                line,
                message: format!("unknown cluster type `{}`", field(0).unwrap_or("")),
            })?;
            let level: u32 = field(1)?.parse().map_err(|e| Error::Parse {
                line,
                message: format!("level: {e}"),
            })?;
            let p: f64 = field(2)?.parse().map_err(|e| Error::Parse {
                line,
                message: format!("probability: {e}"),
            })?;
            let source = match row.get(3) {
                None | Some("") | Some("user") => Source::User,
                Some("monte-carlo") => Source::MonteCarlo,
                Some("asymptotic-one") => Source::AsymptoticOne,
                Some(s) => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown source `{s}`"),
                    })
                }
            };
            let p = T::from_f64(p).ok_or_else(|| Error::Parse {
                line,
                message: "probability is not finite".into(),
            })?;
            t.set(alpha, level, p, source)?;
        }
        Ok(t)
    }
}

/// Resources of every object at one level. `r_h` is absent at level 1.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelResources<T: Scalar = f64> {
    pub level: u32,
    pub r_h: Option<T>,
    pub r_0: T,
    pub r_plus: T,
    pub r_s: T,
    pub r_d: T,
    pub r_b: T,
}

/// Resources for levels `1..=top`, indexed from level 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ResourceVector<T: Scalar = f64> {
    pub levels: Vec<LevelResources<T>>,
}

impl<T: Scalar> ResourceVector<T> {
    pub fn top(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn at(&self, level: u32) -> Result<&LevelResources<T>> {
        level
            .checked_sub(1)
            .and_then(|i| self.levels.get(i as usize))
            .ok_or(Error::IncompleteResources(level))
    }

    pub fn to_f64(&self) -> ResourceVector<f64> {
        ResourceVector {
            levels: self
                .levels
                .iter()
                .map(|l| LevelResources {
                    level: l.level,
                    r_h: l.r_h.as_ref().map(|v| v.approx()),
                    r_0: l.r_0.approx(),
                    r_plus: l.r_plus.approx(),
                    r_s: l.r_s.approx(),
                    r_d: l.r_d.approx(),
                    r_b: l.r_b.approx(),
                })
                .collect(),
        }
    }
}

pub fn block_resource<T: Scalar>(level: u32) -> T {
    T::count(7).powu(level as u64)
}

/// Level-1 resources from the success probabilities of `|0⟩` and `|+⟩`.
pub fn level1_base<T: Scalar>(p0: T, p_plus: T) -> Result<ResourceVector<T>> {
    for (name, p) in [("p_0^(1)", &p0), ("p_+^(1)", &p_plus)] {
        if !(*p > T::zero() && *p <= T::one()) {
            return Err(Error::InvalidProbability {
                name: name.into(),
                value: p.approx(),
            });
        }
    }
    let r_0 = T::count(69) / p0;
    let r_plus = T::count(72) / p_plus;
    Ok(ResourceVector {
        levels: vec![LevelResources {
            level: 1,
            r_h: None,
            r_s: T::count(21) + T::count(2) * r_0.clone(),
            r_d: T::count(63) + T::count(8) * r_0.clone(),
            r_0,
            r_plus,
            r_b: block_resource(1),
        }],
    })
}

/// Extends a vector complete at level `l` to level `l + 1`.
pub fn recurrence_step<T: Scalar>(
    l: u32,
    vec: &mut ResourceVector<T>,
    table: &SuccessTable<T>,
) -> Result<()> {
    if l == 0 || vec.top() != l {
        return Err(Error::IncompleteResources(l));
    }
    let cur = vec.at(l)?.clone();
    // at level 1 the |0⟩ term is fed by |+⟩ clusters
    let r_0_term = if l == 1 {
        cur.r_plus.clone()
    } else {
        cur.r_0.clone()
    };
    let next = |alpha: Cluster| -> Result<T> {
        let [ns, nd, n0, nb] = alpha.coefficients();
        let num = T::count(ns) * cur.r_s.clone()
            + T::count(nd) * cur.r_d.clone()
            + T::count(n0) * r_0_term.clone()
            + T::count(nb) * cur.r_b.clone();
        Ok(num / table.get(alpha, l + 1)?)
    };
    let r_h = next(Cluster::Hexa)?;
    let r_0 = next(Cluster::Zero)?;
    let r_plus = next(Cluster::Plus)?;
    let r_b: T = block_resource(l + 1);
    let shared = r_plus.clone() + r_b.clone();
    vec.levels.push(LevelResources {
        level: l + 1,
        r_s: T::count(7) * r_h.clone() + T::count(2) * shared.clone(),
        r_d: T::count(21) * r_h.clone() + T::count(8) * shared + T::count(2) * r_b.clone(),
        r_h: Some(r_h),
        r_0,
        r_plus,
        r_b,
    });
    Ok(())
}

/// Resources for levels `1..=top`.
pub fn resources_to_level<T: Scalar>(top: u32, table: &SuccessTable<T>) -> Result<ResourceVector<T>> {
    let mut v = level1_base(table.get(Cluster::Zero, 1)?, table.get(Cluster::Plus, 1)?)?;
    for l in 1..top.max(1) {
        recurrence_step(l, &mut v, table)?;
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComputationResources<T: Scalar = f64> {
    /// Level of the computation, at least 1.
    pub l_bar: u32,
    /// Smallest level meeting the accuracy target, before clamping.
    pub l_raw: u32,
    /// Levels `1..=l_bar + 1`.
    pub vector: ResourceVector<T>,
    /// `R_0^(l_bar)`.
    pub headline: T,
}

pub fn resources_for_computation<T: Scalar>(
    n: ComputationSize,
    model: &NoiseModel<f64>,
    table: &SuccessTable<T>,
) -> Result<ComputationResources<T>> {
    let p_q0 = analytic::physical_readout_error(model);
    let th = analytic::threshold(model)?;
    if model.p_e >= th.p_th {
        return Err(Error::AboveThreshold(model.p_e));
    }
    let l_raw = analytic::highest_level(n, &p_q0)?;
    let l_bar = l_raw.max(1);
    let vector = resources_to_level(l_bar + 1, table)?;
    let headline = vector.at(l_bar)?.r_0.clone();
    Ok(ComputationResources {
        l_bar,
        l_raw,
        vector,
        headline,
    })
}

/// One CSV row of a resource curve, values at level `l_bar`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceRow {
    pub p_e: f64,
    #[serde(rename = "N")]
    pub n: String,
    pub l_bar: u32,
    #[serde(rename = "R_0")]
    pub r_0: f64,
    #[serde(rename = "R_h")]
    pub r_h: Option<f64>,
    #[serde(rename = "R_plus")]
    pub r_plus: f64,
    #[serde(rename = "R_S")]
    pub r_s: f64,
    #[serde(rename = "R_D")]
    pub r_d: f64,
    /// User comparison curve at the same `N`, see [`apply_overlay`].
    #[serde(rename = "R_overlay")]
    pub r_overlay: Option<f64>,
}

/// Evaluates every `(p_e, N)` pair, `p_e` outermost.
pub fn resource_curve<T: Scalar>(
    n_grid: &[ComputationSize],
    p_e_list: &[f64],
    table: &SuccessTable<T>,
) -> Result<Vec<ResourceRow>> {
    let mut rows = Vec::with_capacity(n_grid.len() * p_e_list.len());
    for &p_e in p_e_list {
        let model = NoiseModel::depolarizing(p_e);
        for &n in n_grid {
            let r = resources_for_computation(n, &model, table)?;
            let lv = r.vector.at(r.l_bar)?;
            rows.push(ResourceRow {
                p_e,
                n: n.to_string(),
                l_bar: r.l_bar,
                r_0: lv.r_0.approx(),
                r_h: lv.r_h.as_ref().map(|v| v.approx()),
                r_plus: lv.r_plus.approx(),
                r_s: lv.r_s.approx(),
                r_d: lv.r_d.approx(),
                r_overlay: None,
            });
        }
    }
    Ok(rows)
}

/// `N = 10^k` for `k` in `lo..=hi` with `per_decade` points per decade.
pub fn log_grid(lo: i64, hi: i64, per_decade: u32) -> Result<Vec<ComputationSize>> {
    if hi < lo || per_decade == 0 {
        return Err(Error::Domain("empty N grid".into()));
    }
    let mut out = Vec::new();
    for e in lo..=hi {
        for k in 0..per_decade {
            if e == hi && k > 0 {
                break;
            }
            let m = 10f64.powf(k as f64 / per_decade as f64);
            out.push(ComputationSize::new(m, e)?);
        }
    }
    Ok(out)
}

pub fn write_curve_csv<W: Write>(rows: &[ResourceRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// A comparison curve supplied by the user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlayPoint {
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

/// Fills `r_overlay` by interpolating the overlay linearly in
/// `(log10 N, log10 R)`. Rows outside the overlay's `N` range stay empty.
pub fn apply_overlay(rows: &mut [ResourceRow], overlay: &[OverlayPoint]) -> Result<()> {
    let mut pts: Vec<(f64, f64)> = overlay
        .iter()
        .map(|p| (p.n.log10(), p.r.max(f64::MIN_POSITIVE).log10()))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    for row in rows.iter_mut() {
        let x = row.n.parse::<ComputationSize>()?.log10();
        row.r_overlay = pts.windows(2).find(|w| w[0].0 <= x && x <= w[1].0).map(|w| {
            let t = if w[1].0 > w[0].0 {
                (x - w[0].0) / (w[1].0 - w[0].0)
            } else {
                0.0
            };
            10f64.powf(w[0].1 + t * (w[1].1 - w[0].1))
        });
        if row.r_overlay.is_none() && pts.len() == 1 && (pts[0].0 - x).abs() < 1e-12 {
            row.r_overlay = Some(10f64.powf(pts[0].1));
        }
    }
    Ok(())
}

pub fn read_overlay<R: Read>(reader: R) -> Result<Vec<OverlayPoint>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize().enumerate() {
        let p: OverlayPoint = row.map_err(|e| Error::Parse {
            line: i + 2,
            message: e.to_string(),
        })?;
        if !(p.n > 0.0 && p.r >= 0.0 && p.r.is_finite()) {
            return Err(Error::Parse {
                line: i + 2,
                message: "N must be positive and R non-negative".into(),
            });
        }
        out.push(p);
    }
    Ok(out)
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::from(io),
        other => Error::Parse {
            line: 0,
            message: format!("{other:?}"),
        },
    }
}
