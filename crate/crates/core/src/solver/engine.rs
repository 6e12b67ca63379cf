//! Time-ordered sweep over the lattice, generic over the value representation.

use crate::lattice::{Affine, BitTable};

pub(crate) trait Rule: Sync {
    type Elem: Copy + Default + Send + Sync;
    fn f(&self, u: Self::Elem, v: Self::Elem) -> Self::Elem;
    fn g(&self, u: Self::Elem, v: Self::Elem) -> Self::Elem;
    fn add(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
}

/// One bit per cell.
pub(crate) struct BitRule {
    pub f: BitTable,
    pub g: BitTable,
}

impl Rule for BitRule {
    type Elem = u8;

    #[inline]
    fn f(&self, u: u8, v: u8) -> u8 {
        self.f.eval(u, v)
    }

    #[inline]
    fn g(&self, u: u8, v: u8) -> u8 {
        self.g.eval(u, v)
    }

    #[inline]
    fn add(&self, a: u8, b: u8) -> u8 {
        a ^ b
    }
}

pub(crate) struct PhaseRule {
    pub f: Affine,
    pub g: Affine,
}

impl Rule for PhaseRule {
    type Elem = u64;

    #[inline]
    fn f(&self, u: u64, v: u64) -> u64 {
        self.f.eval(u, v)
    }

    #[inline]
    fn g(&self, u: u64, v: u64) -> u64 {
        self.g.eval(u, v)
    }

    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        a.wrapping_add(b)
    }
}

/// 64 independent bit lattices packed into one word per cell.
pub(crate) struct LaneRule {
    pub f: BitTable,
    pub g: BitTable,
}

impl Rule for LaneRule {
    type Elem = u64;

    #[inline]
    fn f(&self, u: u64, v: u64) -> u64 {
        self.f.eval_lanes(u, v)
    }

    #[inline]
    fn g(&self, u: u64, v: u64) -> u64 {
        self.g.eval_lanes(u, v)
    }

    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        a ^ b
    }
}

/// Fills scales `1..=level` in time order.
///
/// `rows[n]` must already have its full length, `rows[n][0]` must hold the
/// initial data, `rows[0]` the boundary and `rows[level + 1]` the pinned
/// values of the first unresolved scale.
pub(crate) fn sweep<R: Rule>(rule: &R, level: u32, rows: &mut [Vec<R::Elem>]) {
    let top = level as usize;
    let steps = (rows[top].len() - 1) as u64;
    for k in 1..=steps {
        let tz = k.trailing_zeros().min(level - 1);
        for n in (level - tz) as usize..=top {
            let m = (k >> (top - n)) as usize;
            let prev_self = rows[n][m - 1];
            let prev_next = rows[n + 1][2 * (m - 1)];
            let mut v = rule.f(prev_self, prev_next);
            if m.is_multiple_of(2) {
                let parent = rows[n - 1][(m - 2) / 2];
                let prev2 = rows[n][m - 2];
                v = rule.add(v, rule.g(parent, prev2));
            }
            rows[n][m] = v;
        }
    }
}

/// Length of the row at `scale` for a horizon `numerator * 2^-horizon_level`.
pub(crate) fn row_len(numerator: u64, horizon_level: u32, scale: u32) -> Option<usize> {
    let cells = if scale >= horizon_level {
        numerator.checked_shl(scale - horizon_level).filter(|c| c >> (scale - horizon_level) == numerator)?
    } else {
        numerator >> (horizon_level - scale)
    };
    usize::try_from(cells).ok()?.checked_add(1)
}
