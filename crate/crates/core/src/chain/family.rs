//! The flat family driving repairs: flats whose deficit exceeds the
//! one-step slack bound, closed under intersection, plus the per-slot data
//! of the uncovered basis (fundamental cocircuits, minimal flats, targets).

use super::ChainError;

use crate::graph::{ColouredGraph, Matching};
use crate::quotient::{Flat, QuotientMatroid};

/// Per-slot data for the uncovered element vertices. Slot i holds the i-th
/// uncovered vertex (ascending); their quotient classes form a basis.
#[derive(Clone, Debug)]
pub struct UncoveredBasis {
    /// Uncovered element vertices, ascending.
    pub vertices: Vec<usize>,
    /// Quotient class of each slot.
    pub class_of_slot: Vec<usize>,
    /// Mask over classes of the whole uncovered basis.
    pub class_mask: u64,
    /// Fundamental cocircuit of each slot against the uncovered basis,
    /// as a class mask: the complement of the closure of the other slots.
    pub cocircuit: Vec<u64>,
}

impl UncoveredBasis {
    pub fn build(q: &QuotientMatroid, w: &Matching) -> Result<Self, ChainError> {
        let vertices = w.uncovered_elements();
        let class_of_slot: Vec<usize> = vertices.iter().map(|&v| q.class_of(v)).collect();
        let k = q.quotient_rank();
        if vertices.len() != k {
            return Err(ChainError::UncoveredNotBasis);
        }
        let distinct = {
            let mut c = class_of_slot.clone();
            c.sort_unstable();
            c.dedup();
            c.len() == k
        };
        if !distinct || q.rank_of_classes(&class_of_slot) != k {
            return Err(ChainError::UncoveredNotBasis);
        }
        let class_mask = class_of_slot.iter().fold(0u64, |acc, &c| acc | 1 << c);
        let all_mask = if q.class_count() == 64 {
            u64::MAX
        } else {
            (1u64 << q.class_count()) - 1
        };
        let cocircuit: Vec<u64> = (0..k)
            .map(|i| {
                let others: Vec<usize> = (0..k)
                    .filter(|&j| j != i)
                    .map(|j| class_of_slot[j])
                    .collect();
                let hyperplane = q
                    .closure_classes(&others)
                    .into_iter()
                    .fold(0u64, |acc, c| acc | 1 << c);
                all_mask & !hyperplane
            })
            .collect();
        Ok(Self {
            vertices,
            class_of_slot,
            class_mask,
            cocircuit,
        })
    }

    pub fn slot_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn slot_of_vertex(&self, v: usize) -> Option<usize> {
        self.vertices.iter().position(|&x| x == v)
    }
}

/// The family of flats relevant to repairs, with the per-slot minimal
/// members and the theoretical slack constants (kept only as diagnostics).
#[derive(Clone, Debug)]
pub struct FlatFamily {
    /// Flats whose deficit exceeds rank * (eta - 1).
    pub script: Vec<Flat>,
    /// Intersection closure of `script`, sorted by (rank, class list).
    pub frak: Vec<Flat>,
    /// Theoretical slack bounds; None when they overflow.
    pub slack_bound_family: Option<u128>,
    pub slack_bound_grouped: Option<u128>,
    pub slots: UncoveredBasis,
    /// Minimal member of `frak` containing each slot class (index into frak).
    pub min_flat_of_slot: Vec<usize>,
    /// Cocircuit part of that minimal flat, as a class mask.
    pub min_flat_cocirc: Vec<u64>,
    /// Warning-level diagnostics from the theoretical bounds.
    pub warnings: Vec<String>,
}

impl FlatFamily {
    /// Number of uncovered classes inside a flat.
    pub fn coverage(&self, flat: &Flat) -> usize {
        (self.slots.class_mask & flat.mask).count_ones() as usize
    }
}

fn theoretical_bounds(k: usize) -> (Option<u128>, Option<u128>) {
    // k * 2^(2^(2^k)) and k times that; astronomically large from k = 3 on
    if k == 0 {
        return (Some(0), Some(0));
    }
    let inner = || -> Option<(u128, u128)> {
        if k >= 7 {
            return None;
        }
        let e1: u32 = 1 << k;
        let e2: u128 = 1u128.checked_shl(e1)?;
        if e2 > 127 {
            return None;
        }
        let pow: u128 = 1u128 << (e2 as u32);
        let c0 = pow.checked_mul(k as u128)?;
        let c1 = c0.checked_mul(k as u128)?;
        Some((c0, c1))
    };
    match inner() {
        Some((c0, c1)) => (Some(c0), Some(c1)),
        None => (None, None),
    }
}

/// Builds the flat family for the current residual graph and matching.
pub fn build_flat_family(
    q: &QuotientMatroid,
    g: &ColouredGraph,
    w: &Matching,
    flats: &[Flat],
) -> Result<FlatFamily, ChainError> {
    let slots = UncoveredBasis::build(q, w)?;
    let deficits = g.deficits();
    let eta = g.eta();
    let script: Vec<Flat> = flats
        .iter()
        .filter(|f| deficits.of_flat(q, f) > f.rank * eta.saturating_sub(1))
        .cloned()
        .collect();
    // close under pairwise intersection to a fixed point
    let mut frak_masks: Vec<u64> = script.iter().map(|f| f.mask).collect();
    frak_masks.sort_unstable();
    frak_masks.dedup();
    loop {
        let mut grew = false;
        let snapshot = frak_masks.clone();
        for i in 0..snapshot.len() {
            for j in i + 1..snapshot.len() {
                let meet = snapshot[i] & snapshot[j];
                if frak_masks.binary_search(&meet).is_err() {
                    let pos = frak_masks.binary_search(&meet).unwrap_err();
                    frak_masks.insert(pos, meet);
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    let mut frak: Vec<Flat> = frak_masks
        .into_iter()
        .map(|mask| {
            flats
                .iter()
                .find(|f| f.mask == mask)
                .cloned()
                .expect("intersection of flats is a flat")
        })
        .collect();
    frak.sort_by(|a, b| (a.rank, &a.classes).cmp(&(b.rank, &b.classes)));

    let k = q.quotient_rank();
    let mut min_flat_of_slot = Vec::with_capacity(k);
    let mut min_flat_cocirc = Vec::with_capacity(k);
    for i in 0..k {
        let cls = slots.class_of_slot[i];
        let idx = frak
            .iter()
            .position(|f| f.contains_class(cls))
            .ok_or(ChainError::InvariantBroken(
                "no family member contains an uncovered class".into(),
            ))?;
        min_flat_of_slot.push(idx);
        min_flat_cocirc.push(frak[idx].mask & slots.cocircuit[i]);
    }

    let (slack_bound_family, slack_bound_grouped) = theoretical_bounds(k);
    let mut warnings = Vec::new();
    if let Some(c0) = slack_bound_family {
        let eta128 = eta as u128;
        if eta128 > c0 {
            let deficit_of_mask = |mask: u64| -> u128 {
                let elems: Vec<usize> = (0..q.class_count())
                    .filter(|&c| mask >> c & 1 == 1)
                    .flat_map(|c| q.classes()[c].members.iter().copied())
                    .collect();
                deficits.of_set(&elems) as u128
            };
            for (i, &frak_idx) in min_flat_of_slot.iter().enumerate() {
                let d = deficit_of_mask(min_flat_cocirc[i]);
                if d + c0 < eta128 {
                    warnings.push(format!(
                        "cocircuit part of slot {i} (flat rank {}) has deficit {d} below eta - c0",
                        frak[frak_idx].rank
                    ));
                }
            }
            // grouped form: slots sharing a minimal flat pool their parts
            for lead in 0..k {
                let group: Vec<usize> = (0..k)
                    .filter(|&i| min_flat_of_slot[i] == min_flat_of_slot[lead])
                    .collect();
                if group[0] != lead {
                    continue;
                }
                let union = group
                    .iter()
                    .fold(0u64, |acc, &i| acc | min_flat_cocirc[i]);
                let d = deficit_of_mask(union);
                if d + c0 < (group.len() as u128) * eta128 {
                    warnings.push(format!(
                        "pooled cocircuit parts of slots {group:?} have deficit {d} below the group bound"
                    ));
                }
            }
        }
    }

    Ok(FlatFamily {
        script,
        frak,
        slack_bound_family,
        slack_bound_grouped,
        slots,
        min_flat_of_slot,
        min_flat_cocirc,
        warnings,
    })
}

/// The lowest-rank family member whose uncovered coverage falls short of
/// its rank; ties break on the class list. None when all are saturated.
pub fn select_target_flat(fam: &FlatFamily) -> Option<Flat> {
    fam.frak
        .iter()
        .find(|f| fam.coverage(f) < f.rank)
        .cloned()
}

/// How the per-slot replacement targets were formed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TargetMode {
    /// Every slot targets its whole fundamental cocircuit.
    Full,
    /// Slots inside the target flat or with a saturated minimal flat are
    /// restricted to the cocircuit part of their minimal flat.
    FlatRepair,
}

/// Per-slot replacement targets: each slot may only be re-routed to a class
/// inside its target, which always holds the slot class itself.
#[derive(Clone, Debug)]
pub struct TargetSet {
    pub mode: TargetMode,
    /// Class mask per slot.
    pub of_slot: Vec<u64>,
    /// Slots whose minimal flat has rank at most the target flat's and is
    /// already saturated.
    pub saturated_slots: Vec<bool>,
    /// Slots outside both the target flat and the saturated set.
    pub free_slots: Vec<bool>,
    /// The target flat of a flat-repair target.
    pub flat: Option<Flat>,
}

/// Targets for the zero-deficit repair: full cocircuits everywhere.
pub fn full_target(slots: &UncoveredBasis) -> TargetSet {
    let k = slots.slot_count();
    TargetSet {
        mode: TargetMode::Full,
        of_slot: slots.cocircuit.clone(),
        saturated_slots: vec![false; k],
        free_slots: vec![true; k],
        flat: None,
    }
}

/// Targets for raising the coverage of `flat`, restricted so that slots
/// already pinned to a saturated minimal flat stay inside it.
pub fn build_target(
    q: &QuotientMatroid,
    fam: &FlatFamily,
    flat: &Flat,
) -> Result<TargetSet, ChainError> {
    let k = fam.slots.slot_count();
    let saturated_slots: Vec<bool> = (0..k)
        .map(|i| {
            let fi = &fam.frak[fam.min_flat_of_slot[i]];
            fi.rank <= flat.rank && fam.coverage(fi) == fi.rank
        })
        .collect();
    let mut of_slot = Vec::with_capacity(k);
    let mut free_slots = vec![false; k];
    for i in 0..k {
        let cls = fam.slots.class_of_slot[i];
        let in_flat = flat.contains_class(cls);
        if in_flat || saturated_slots[i] {
            of_slot.push(fam.min_flat_cocirc[i]);
        } else {
            of_slot.push(fam.slots.cocircuit[i]);
            free_slots[i] = true;
        }
    }
    let t = TargetSet {
        mode: TargetMode::FlatRepair,
        of_slot,
        saturated_slots,
        free_slots,
        flat: Some(flat.clone()),
    };
    validate_target_structure(q, fam, flat, &t)?;
    Ok(t)
}

/// Structural facts every flat-repair target must satisfy; violations mean
/// the family or target construction is buggy.
fn validate_target_structure(
    _q: &QuotientMatroid,
    fam: &FlatFamily,
    flat: &Flat,
    t: &TargetSet,
) -> Result<(), ChainError> {
    let k = fam.slots.slot_count();
    let fail = |msg: String| Err(ChainError::InvariantBroken(msg));
    let in_flat = |i: usize| flat.contains_class(fam.slots.class_of_slot[i]);
    for i in 0..k {
        let slot_bit = 1u64 << fam.slots.class_of_slot[i];
        if t.of_slot[i] & slot_bit == 0 {
            return fail(format!("target of slot {i} misses its own class"));
        }
        if t.of_slot[i] & !fam.slots.cocircuit[i] != 0 {
            return fail(format!("target of slot {i} leaves its cocircuit"));
        }
        // a slot inside an unsaturated minimum-rank flat is pinned to it
        if in_flat(i)
            && !t.saturated_slots[i]
            && fam.frak[fam.min_flat_of_slot[i]].mask != flat.mask
        {
            return fail(format!("slot {i} lies in the flat but its minimal flat differs"));
        }
    }
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let fi = &fam.frak[fam.min_flat_of_slot[i]];
            let fj = &fam.frak[fam.min_flat_of_slot[j]];
            let j_in_fi = fi.contains_class(fam.slots.class_of_slot[j]);
            if t.saturated_slots[i] && !j_in_fi && fam.slots.cocircuit[j] & t.of_slot[i] != 0 {
                return fail(format!(
                    "slot {j} cocircuit meets the pinned target of slot {i}"
                ));
            }
            if t.saturated_slots[i] && t.of_slot[i] & t.of_slot[j] != 0 {
                let same_flat = fi.mask == fj.mask;
                let overlap_ok =
                    t.of_slot[i] & fam.slots.cocircuit[j] == t.of_slot[i] & t.of_slot[j];
                if !same_flat || !t.saturated_slots[j] || !overlap_ok {
                    return fail(format!(
                        "targets of saturated slot {i} and slot {j} overlap irregularly"
                    ));
                }
            }
            if t.saturated_slots[i]
                && t.saturated_slots[j]
                && (fam.slots.cocircuit[i] & !t.of_slot[i]) & t.of_slot[j] != 0
                && !(fi.mask & fj.mask == fi.mask && fi.mask != fj.mask)
            {
                return fail(format!(
                    "leftover cocircuit of slot {i} meets slot {j} without flat nesting"
                ));
            }
            if in_flat(i)
                && in_flat(j)
                && !t.saturated_slots[i]
                && !t.saturated_slots[j]
                && fam.slots.cocircuit[i] & t.of_slot[j] != t.of_slot[i] & t.of_slot[j]
            {
                return fail(format!(
                    "cocircuit/target overlap mismatch between slots {i} and {j}"
                ));
            }
        }
    }
    Ok(())
}
