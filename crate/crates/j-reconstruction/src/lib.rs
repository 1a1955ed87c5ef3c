//! Coefficient reconstruction for the two-variable J-series.
//!
//! The series J(t, y, z) = Σ C_{m,n,j,γ} t^m y^n z^j 1_γ over the narrow
//! basis is pinned down by two small data sets: the nonnegative z-part of
//! the weighted I-function (the A-coefficients, one z-monomial per ghost
//! monomial) and a finite user-supplied table of negative-z coefficients
//! at y = 0 (the B-coefficients). Every other coefficient follows from
//! the regularity of the pairing of ∂_y J(z) against ∂_t J(−z): fixing a
//! t-monomial, a y-monomial, and a negative z-power turns that statement
//! into a linear equation whose pivot carries the integer factor
//! (N_0^β + 1), so each unknown is solved by one exact division. The
//! solver here is lazy and memoized; the recursion descends in the
//! y-degree, then in the z-depth, and never divides by anything except
//! that positive integer.

use std::collections::{BTreeMap, HashMap};

use fermat_weights::{Narrow, WeightSystem};
use fjrw_ifunction::LGIFunction;
use num_traits::{One, Zero};
use series_core::BigRational;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ReconstructionError {
    #[error("negative-z seed entry carries z-power {0} >= 0")]
    MalformedSeed(i64),
    #[error("label {0:?} is not a narrow element of this weight system")]
    UnknownLabel(Vec<u64>),
    #[error("required coefficient is out of reach: y-degree {needed} exceeds the I-function order {available} (entry y-index {n:?}, z^{j}, label {gamma:?})")]
    IncompleteCap { needed: u32, available: u32, n: Vec<(u32, u32)>, j: i64, gamma: u32 },
    #[error("table has not been completed; call reconstruct first")]
    NotCompleted,
}

/// A t-slot: (z-jet of the t-variable, narrow label index).
pub type TSlot = (u32, u32);
/// Multi-index over t-slots, sorted with positive multiplicities.
pub type TIndex = Vec<(TSlot, u32)>;
/// Multi-index over y-slots (one per narrow label), sorted.
pub type YIndex = Vec<(u32, u32)>;

/// Total-degree caps: |m| for t-slots, |n| for y-slots, |j| for z-powers.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Caps {
    pub m: u32,
    pub n: u32,
    pub z: u32,
}

/// Which β with N(β)_0^β > 0 anchors the pivot equation of a target.
/// The completed values must not depend on this choice.
#[derive(Clone, Copy, PartialEq, Debug, Default)]
pub enum PivotRule {
    #[default]
    FirstSupport,
    LastSupport,
}

/// One seeded negative-z coefficient B_{m,j,γ}.
#[derive(Clone, PartialEq, Debug)]
pub struct BCoefficient {
    /// t-monomial as (jet, label, multiplicity) triples.
    pub t_slots: Vec<(u32, Narrow, u32)>,
    /// Strictly negative z-power.
    pub z_power: i64,
    pub label: Narrow,
    pub value: BigRational,
}

fn index_total<S>(idx: &[(S, u32)]) -> u32 {
    idx.iter().map(|(_, c)| *c).sum()
}

fn index_add<S: Ord + Copy>(idx: &[(S, u32)], slot: S) -> Vec<(S, u32)> {
    let mut out = idx.to_vec();
    match out.binary_search_by(|(s, _)| s.cmp(&slot)) {
        Ok(p) => out[p].1 += 1,
        Err(p) => out.insert(p, (slot, 1)),
    }
    out
}

fn index_remove<S: Ord + Copy>(idx: &[(S, u32)], slot: S) -> Option<Vec<(S, u32)>> {
    let mut out = idx.to_vec();
    let p = out.binary_search_by(|(s, _)| s.cmp(&slot)).ok()?;
    if out[p].1 == 1 {
        out.remove(p);
    } else {
        out[p].1 -= 1;
    }
    Some(out)
}

/// Componentwise difference `idx − sub` when `sub ≤ idx`.
fn index_sub<S: Ord + Copy>(idx: &[(S, u32)], sub: &[(S, u32)]) -> Option<Vec<(S, u32)>> {
    let mut out = Vec::with_capacity(idx.len());
    let mut lookup: BTreeMap<S, u32> = idx.iter().cloned().collect();
    for (s, c) in sub {
        let have = lookup.get_mut(s)?;
        if *have < *c {
            return None;
        }
        *have -= *c;
    }
    for (s, c) in lookup {
        if c > 0 {
            out.push((s, c));
        }
    }
    Some(out)
}

/// All ordered splits (a, b) with a + b = idx, componentwise.
fn index_splits<S: Ord + Copy>(idx: &[(S, u32)]) -> Vec<(Vec<(S, u32)>, Vec<(S, u32)>)> {
    let mut out = vec![(Vec::new(), Vec::new())];
    for &(s, c) in idx {
        let mut next = Vec::with_capacity(out.len() * (c as usize + 1));
        for (a, b) in &out {
            for take in 0..=c {
                let mut a2 = a.clone();
                let mut b2 = b.clone();
                if take > 0 {
                    a2.push((s, take));
                }
                if take < c {
                    b2.push((s, c - take));
                }
                next.push((a2, b2));
            }
        }
        out = next;
    }
    out
}

fn sign(j: i64) -> BigRational {
    if j.rem_euclid(2) == 0 {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}

/// The coefficient table of the J-series: seeded A/B data plus every
/// negative-z entry the regularity recursion has produced so far.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    ws: WeightSystem,
    narrows: Vec<Narrow>,
    unit: u32,
    involution: Vec<u32>,
    a: HashMap<(YIndex, i64, u32), BigRational>,
    a_order: u32,
    a_zmax: i64,
    b_support: Vec<(TIndex, i64, u32, BigRational)>,
    neg: HashMap<(TIndex, YIndex, i64, u32), BigRational>,
    pivot: PivotRule,
    caps: Option<Caps>,
}

/// Builds the table from a computed I-function (the A-coefficients are
/// the z^{≥0} part of z·I − z·1) and a finite negative-z seed.
pub fn seed_table(
    ifun: &LGIFunction,
    b: &[BCoefficient],
) -> Result<CoefficientTable, ReconstructionError> {
    let ws = ifun.ws().clone();
    let narrows = ifun.narrows().to_vec();
    let label_index: HashMap<Vec<u64>, u32> = narrows
        .iter()
        .enumerate()
        .map(|(i, g)| (g.nums.clone(), i as u32))
        .collect();
    let unit = label_index[&ws.exponential_element().nums];
    let involution = narrows
        .iter()
        .map(|g| label_index[&ws.narrow_involution(g).nums])
        .collect();

    let mut a = HashMap::new();
    let mut a_zmax = 0i64;
    for (gamma, comp) in ifun.components().iter().enumerate() {
        for (exp, zl) in comp.iter() {
            let n: YIndex = exp
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(s, &c)| (s as u32, c))
                .collect();
            for (e, c) in zl.iter() {
                if c.is_zero() {
                    continue;
                }
                let j = e + 1;
                if gamma as u32 == unit && n.is_empty() && j == 1 {
                    continue; // the z·1 term is seeded separately
                }
                if j >= 0 {
                    a_zmax = a_zmax.max(j);
                    a.insert((n.clone(), j, gamma as u32), c.clone());
                }
            }
        }
    }

    let mut b_support = Vec::new();
    for entry in b {
        if entry.z_power >= 0 {
            return Err(ReconstructionError::MalformedSeed(entry.z_power));
        }
        let gamma = *label_index
            .get(&entry.label.nums)
            .ok_or_else(|| ReconstructionError::UnknownLabel(entry.label.nums.clone()))?;
        let mut m: TIndex = Vec::new();
        for (jet, label, mult) in &entry.t_slots {
            let l = *label_index
                .get(&label.nums)
                .ok_or_else(|| ReconstructionError::UnknownLabel(label.nums.clone()))?;
            for _ in 0..*mult {
                m = index_add(&m, (*jet, l));
            }
        }
        if !entry.value.is_zero() {
            b_support.push((m, entry.z_power, gamma, entry.value.clone()));
        }
    }

    Ok(CoefficientTable {
        ws,
        narrows,
        unit,
        involution,
        a,
        a_order: ifun.order(),
        a_zmax,
        b_support,
        neg: HashMap::new(),
        pivot: PivotRule::default(),
        caps: None,
    })
}

impl CoefficientTable {
    pub fn ws(&self) -> &WeightSystem {
        &self.ws
    }

    pub fn narrows(&self) -> &[Narrow] {
        &self.narrows
    }

    pub fn caps(&self) -> Option<Caps> {
        self.caps
    }

    pub fn set_pivot_rule(&mut self, rule: PivotRule) {
        self.pivot = rule;
    }

    /// Largest z-power carried by any A-coefficient.
    pub fn a_span(&self) -> i64 {
        self.a_zmax
    }

    fn b_value(&self, m: &TIndex, j: i64, gamma: u32) -> BigRational {
        self.b_support
            .iter()
            .find(|(bm, bj, bg, _)| bm == m && *bj == j && *bg == gamma)
            .map(|(_, _, _, v)| v.clone())
            .unwrap_or_else(BigRational::zero)
    }

    fn a_value(
        &self,
        n: &YIndex,
        j: i64,
        gamma: u32,
    ) -> Result<BigRational, ReconstructionError> {
        let degree = index_total(n);
        if degree > self.a_order {
            return Err(ReconstructionError::IncompleteCap {
                needed: degree,
                available: self.a_order,
                n: n.clone(),
                j,
                gamma,
            });
        }
        Ok(self
            .a
            .get(&(n.clone(), j, gamma))
            .cloned()
            .unwrap_or_else(BigRational::zero))
    }

    /// The coefficient C_{m,n,j,γ} by internal indices; computes missing
    /// negative entries on demand.
    fn value(
        &mut self,
        m: &TIndex,
        n: &YIndex,
        j: i64,
        gamma: u32,
    ) -> Result<BigRational, ReconstructionError> {
        if n.is_empty() {
            if j < 0 {
                return Ok(self.b_value(m, j, gamma));
            }
            if j == 1 && m.is_empty() && gamma == self.unit {
                return Ok(BigRational::one());
            }
            // t-line: a single slot (jet, label) matching (j, γ)
            if m.len() == 1 && m[0] == ((j as u32, gamma), 1) {
                return Ok(BigRational::one());
            }
            return Ok(BigRational::zero());
        }
        if j >= 0 {
            if !m.is_empty() {
                return Ok(BigRational::zero());
            }
            return self.a_value(n, j, gamma);
        }
        if let Some(v) = self.neg.get(&(m.clone(), n.clone(), j, gamma)) {
            return Ok(v.clone());
        }
        let v = self.solve_target(m, n, j, gamma)?;
        self.neg.insert((m.clone(), n.clone(), j, gamma), v.clone());
        Ok(v)
    }

    /// Solves C_{M,N(β),−K,γ} from the regularity equation anchored at
    /// β (taken from the target's own y-index) and α = γ's involution.
    fn solve_target(
        &mut self,
        m: &TIndex,
        n_full: &YIndex,
        j: i64,
        gamma: u32,
    ) -> Result<BigRational, ReconstructionError> {
        let k = -j;
        debug_assert!(k >= 1 && !n_full.is_empty());
        let beta = match self.pivot {
            PivotRule::FirstSupport => n_full.first().unwrap().0,
            PivotRule::LastSupport => n_full.last().unwrap().0,
        };
        let pivot_mult = n_full
            .iter()
            .find(|(s, _)| *s == beta)
            .map(|(_, c)| *c)
            .unwrap();
        assert!(pivot_mult >= 1, "pivot multiplicity must be positive");
        let n_reduced = index_remove(n_full, beta).unwrap();
        let alpha = self.involution[gamma as usize];
        let alpha_slot: TSlot = (0, alpha);

        let pivot = BigRational::from_integer(pivot_mult.into());
        let mut acc = BigRational::zero();

        // Lines 1 and 2: the second factor is a seeded B-coefficient at
        // y = 0 whose t-monomial contains the slot (0, α).
        for (bm, bj, bg, bval) in self.b_support.clone() {
            let Some(rest) = index_remove(&bm, alpha_slot) else {
                continue;
            };
            let Some(m1) = index_sub(m, &rest) else {
                continue;
            };
            let g1 = self.involution[bg as usize];
            let j1 = -k - bj;
            let weight = if rest.is_empty() {
                // line 1: second factor is B_{0(α)}, first factor keeps M
                pivot.clone()
            } else {
                let alpha_mult = bm
                    .iter()
                    .find(|(s, _)| *s == alpha_slot)
                    .map(|(_, c)| *c)
                    .unwrap();
                &pivot * BigRational::from_integer(alpha_mult.into())
            };
            let first = self.value(&m1, n_full, j1, g1)?;
            if !first.is_zero() {
                acc += weight * first * sign(bj) * bval;
            }
        }

        // Line 3: both factors carry a smaller y-degree.
        for (n1, n2) in index_splits(&n_reduced) {
            if n2.is_empty() {
                continue; // n = N is the pivot line handled above
            }
            let n1_beta = index_add(&n1, beta);
            let first_weight = n1_beta
                .iter()
                .find(|(s, _)| *s == beta)
                .map(|(_, c)| *c)
                .unwrap();
            let w1 = BigRational::from_integer(first_weight.into());
            for (m1, m2) in index_splits(m) {
                let m2_alpha = index_add(&m2, alpha_slot);
                let second_weight = m2_alpha
                    .iter()
                    .find(|(s, _)| *s == alpha_slot)
                    .map(|(_, c)| *c)
                    .unwrap();
                let w = &w1 * BigRational::from_integer(second_weight.into());
                for g in 0..self.narrows.len() as u32 {
                    let g2 = self.involution[g as usize];
                    // j1 ≥ 0 needs m1 = 0 and an A-coefficient; j1 < 0
                    // pairs two negative entries with −K < j1 < 0.
                    let lo = -k + 1;
                    let hi = if m1.is_empty() { self.a_zmax } else { -1 };
                    for j1 in lo..=hi {
                        let first = self.value(&m1, &n1_beta, j1, g)?;
                        if first.is_zero() {
                            continue;
                        }
                        let j2 = -k - j1;
                        let second = self.value(&m2_alpha, &n2, j2, g2)?;
                        if second.is_zero() {
                            continue;
                        }
                        acc += &w * first * sign(j2) * second;
                    }
                }
            }
        }

        Ok(-acc / pivot)
    }

    /// Public coefficient lookup by labels.
    pub fn coefficient(
        &mut self,
        t_slots: &[(u32, Narrow, u32)],
        y_slots: &[(Narrow, u32)],
        z_power: i64,
        label: &Narrow,
    ) -> Result<BigRational, ReconstructionError> {
        let m = self.encode_t(t_slots)?;
        let n = self.encode_y(y_slots)?;
        let gamma = self.label_id(label)?;
        self.value(&m, &n, z_power, gamma)
    }

    fn label_id(&self, label: &Narrow) -> Result<u32, ReconstructionError> {
        self.narrows
            .iter()
            .position(|g| g == label)
            .map(|i| i as u32)
            .ok_or_else(|| ReconstructionError::UnknownLabel(label.nums.clone()))
    }

    fn encode_t(
        &self,
        t_slots: &[(u32, Narrow, u32)],
    ) -> Result<TIndex, ReconstructionError> {
        let mut m: TIndex = Vec::new();
        for (jet, label, mult) in t_slots {
            let l = self.label_id(label)?;
            for _ in 0..*mult {
                m = index_add(&m, (*jet, l));
            }
        }
        Ok(m)
    }

    fn encode_y(&self, y_slots: &[(Narrow, u32)]) -> Result<YIndex, ReconstructionError> {
        let mut n: YIndex = Vec::new();
        for (label, mult) in y_slots {
            let l = self.label_id(label)?;
            for _ in 0..*mult {
                n = index_add(&n, l);
            }
        }
        Ok(n)
    }

    /// All stored negative-z entries, decoded.
    pub fn completed_entries(
        &self,
    ) -> Vec<(Vec<(u32, Narrow, u32)>, Vec<(Narrow, u32)>, i64, Narrow, BigRational)> {
        let mut keys: Vec<_> = self.neg.keys().cloned().collect();
        keys.sort();
        keys.into_iter()
            .map(|(m, n, j, g)| {
                let t = m
                    .iter()
                    .map(|((jet, l), c)| (*jet, self.narrows[*l as usize].clone(), *c))
                    .collect();
                let y = n
                    .iter()
                    .map(|(l, c)| (self.narrows[*l as usize].clone(), *c))
                    .collect();
                let v = self.neg[&(m.clone(), n.clone(), j, g)].clone();
                (t, y, j, self.narrows[g as usize].clone(), v)
            })
            .collect()
    }

    /// Overwrites one stored entry; a diagnostic hook for the residual
    /// detector, not part of the reconstruction itself.
    pub fn perturb_entry(
        &mut self,
        t_slots: &[(u32, Narrow, u32)],
        y_slots: &[(Narrow, u32)],
        z_power: i64,
        label: &Narrow,
        value: BigRational,
    ) -> Result<(), ReconstructionError> {
        let m = self.encode_t(t_slots)?;
        let n = self.encode_y(y_slots)?;
        let gamma = self.label_id(label)?;
        self.value(&m, &n, z_power, gamma)?;
        self.neg.insert((m, n, z_power, gamma), value);
        Ok(())
    }

    fn enumerate_t_indices(&self, caps: &Caps) -> Vec<TIndex> {
        let mut slots = Vec::new();
        for jet in 0..=caps.z {
            for l in 0..self.narrows.len() as u32 {
                slots.push((jet, l));
            }
        }
        let mut out = Vec::new();
        let mut cur: TIndex = Vec::new();
        enumerate_indices(&slots, caps.m, 0, &mut cur, &mut out);
        out
    }

    fn enumerate_y_indices(&self, total: u32) -> Vec<YIndex> {
        let slots: Vec<u32> = (0..self.narrows.len() as u32).collect();
        let mut out = Vec::new();
        let mut cur: YIndex = Vec::new();
        enumerate_indices(&slots, total, 0, &mut cur, &mut out);
        out
    }
}

fn enumerate_indices<S: Ord + Copy>(
    slots: &[S],
    budget: u32,
    pos: usize,
    cur: &mut Vec<(S, u32)>,
    out: &mut Vec<Vec<(S, u32)>>,
) {
    if pos == slots.len() {
        out.push(cur.clone());
        return;
    }
    for take in 0..=budget {
        if take > 0 {
            cur.push((slots[pos], take));
        }
        enumerate_indices(slots, budget - take, pos + 1, cur, out);
        if take > 0 {
            cur.pop();
        }
    }
}

/// Fills every coefficient with |m| ≤ caps.m (t-jets up to caps.z),
/// 1 ≤ |n| ≤ caps.n, and −caps.z ≤ j ≤ −1.
pub fn reconstruct(
    mut table: CoefficientTable,
    caps: Caps,
) -> Result<CoefficientTable, ReconstructionError> {
    let t_indices = table.enumerate_t_indices(&caps);
    let y_indices = table.enumerate_y_indices(caps.n);
    for n in &y_indices {
        if n.is_empty() {
            continue;
        }
        for m in &t_indices {
            for k in 1..=caps.z as i64 {
                for gamma in 0..table.narrows.len() as u32 {
                    table.value(m, n, -k, gamma)?;
                }
            }
        }
    }
    table.caps = Some(caps);
    Ok(table)
}

/// The negative-z part of η_W(∂_{y_β}J(t,y,z), ∂_{t_0^α}J(t,y,−z)),
/// reported per (t-monomial, y-monomial, z-power). Identically zero for a
/// table completed from consistent data.
#[derive(Clone, PartialEq, Debug)]
pub struct Residual {
    pub entries: BTreeMap<(TIndex, YIndex, i64), BigRational>,
}

impl Residual {
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn regularity_residual(
    table: &mut CoefficientTable,
    alpha: &Narrow,
    beta: &Narrow,
    caps: &Caps,
) -> Result<Residual, ReconstructionError> {
    let alpha_id = table.label_id(alpha)?;
    let beta_id = table.label_id(beta)?;
    let alpha_slot: TSlot = (0, alpha_id);

    let t_indices = table.enumerate_t_indices(caps);
    let y_indices = table.enumerate_y_indices(caps.n.saturating_sub(1));
    let mut entries = BTreeMap::new();
    for big_n in &y_indices {
        for big_m in &t_indices {
            for k in 1..=caps.z as i64 {
                let mut acc = BigRational::zero();
                for (n1, n2) in index_splits(big_n) {
                    let n1_beta = index_add(&n1, beta_id);
                    let w1 = n1_beta
                        .iter()
                        .find(|(s, _)| *s == beta_id)
                        .map(|(_, c)| *c)
                        .unwrap();
                    for (m1, m2) in index_splits(big_m) {
                        let m2_alpha = index_add(&m2, alpha_slot);
                        let w2 = m2_alpha
                            .iter()
                            .find(|(s, _)| *s == alpha_slot)
                            .map(|(_, c)| *c)
                            .unwrap();
                        let w = BigRational::from_integer((w1 * w2).into());
                        for g in 0..table.narrows.len() as u32 {
                            let g2 = table.involution[g as usize];
                            // The second factor always carries the t-slot
                            // (0, α), so its z-power is at most 0; the
                            // first factor is polynomial in z above a_zmax.
                            for j1 in -k..=table.a_zmax.max(0) {
                                let first = table.value(&m1, &n1_beta, j1, g)?;
                                if first.is_zero() {
                                    continue;
                                }
                                let j2 = -k - j1;
                                let second = table.value(&m2_alpha, &n2, j2, g2)?;
                                if second.is_zero() {
                                    continue;
                                }
                                acc += &w * first * sign(j2) * second;
                            }
                        }
                    }
                }
                if !acc.is_zero() {
                    entries.insert((big_m.clone(), big_n.clone(), -k), acc);
                }
            }
        }
    }
    Ok(Residual { entries })
}
