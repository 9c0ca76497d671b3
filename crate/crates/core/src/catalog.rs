//! Named systems and sets used throughout the tests and the CLI.

use std::sync::Arc;

use crate::counting::PointSet;
use crate::error::Result;
use crate::field::FieldSpec;
use crate::linalg::LinearSystem;
use crate::space::Space;

fn field(q: u64) -> Result<Arc<FieldSpec>> {
    Ok(Arc::new(FieldSpec::of_order(q)?))
}

/// Generators `(x1 - x3) + 2(x4 - x5)` and `(x2 - x4) + 2(x3 - x5)`.
pub const NON_AQ_ROWS: [[i64; 5]; 2] = [[1, 0, -1, 2, -2], [0, 1, 2, -1, -2]];

/// Its five shortest equations, `L_1..L_5`; `L_1`, `L_2` and `L_5` are
/// Sidorenko over every `F_p` with `p > 5`.
pub const NON_AQ_SHORTEST: [[i64; 5]; 5] = [
    [1, 0, -1, 2, -2],
    [0, 1, 2, -1, -2],
    [2, 1, 0, 3, -6],
    [1, 2, 3, 0, -6],
    [1, -1, -3, 3, 0],
];

/// Points of an 8-element subset of `F_5^2` with fewer than `8^5 / 5^4`
/// solutions to the `NON_AQ_ROWS` system.
pub const NON_AQ_WITNESS: [[u32; 2]; 8] = [[0, 0], [0, 3], [1, 2], [3, 0], [3, 3], [4, 0], [4, 1], [4, 2]];

/// Exact solution count of `NON_AQ_WITNESS`, from an independent brute force.
pub const NON_AQ_WITNESS_COUNT: u64 = 48;

/// Generators `x1 - x2 + x3 - x4` and `(x1 - x3) + 2(x2 - x5)`; the system
/// contains an additive quadruple.
pub const AQ_ROWS: [[i64; 5]; 2] = [[1, -1, 1, -1, 0], [1, 2, -1, 0, -2]];

/// Four-term arithmetic progressions `(x1, x2, x3, x4)`, written as
/// `{x2 - x1 - x3 + x4, 3x2 + x3 - 3x4 - x1}`.
pub const FOUR_AP_ROWS: [[i64; 4]; 2] = [[-1, 1, -1, 1], [-1, 3, 1, -3]];

/// A `2 x 5` system over `F_11` with exactly one Sidorenko shortest
/// equation (`x1 - x2 + 2x3 - 2x4`) and a non-coincidental partner.
pub const SINGLE_SIDORENKO_ROWS: [[i64; 5]; 2] = [[1, -1, 2, -2, 0], [0, 1, 7, 7, 7]];
pub const SINGLE_SIDORENKO_Q: u64 = 11;

fn rows<const K: usize>(r: &[[i64; K]]) -> Vec<Vec<i64>> {
    r.iter().map(|row| row.to_vec()).collect()
}

pub fn non_aq(q: u64) -> Result<LinearSystem> {
    LinearSystem::from_ints(field(q)?, &rows(&NON_AQ_ROWS))
}

pub fn non_aq_witness() -> Result<PointSet> {
    let space = Space::new(field(5)?, 2)?;
    PointSet::from_indices(space, NON_AQ_WITNESS.iter().map(|p| (p[0] * 5 + p[1]) as usize))
}

pub fn aq(q: u64) -> Result<LinearSystem> {
    LinearSystem::from_ints(field(q)?, &rows(&AQ_ROWS))
}

pub fn four_ap(q: u64) -> Result<LinearSystem> {
    LinearSystem::from_ints(field(q)?, &rows(&FOUR_AP_ROWS))
}

pub fn single_sidorenko() -> Result<LinearSystem> {
    LinearSystem::from_ints(field(SINGLE_SIDORENKO_Q)?, &rows(&SINGLE_SIDORENKO_ROWS))
}

/// A set known to have negative Sidorenko deficit for a system.
pub struct KnownWitness {
    pub name: &'static str,
    pub system: LinearSystem,
    pub set: PointSet,
}

pub fn known_witnesses() -> Vec<KnownWitness> {
    let mut out = Vec::new();
    if let (Ok(system), Ok(set)) = (non_aq(5), non_aq_witness()) {
        out.push(KnownWitness {
            name: "non-AQ example over F_5^2",
            system,
            set,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_builds() {
        assert_eq!(non_aq(7).unwrap().m(), 2);
        assert_eq!(aq(5).unwrap().m(), 2);
        assert_eq!(four_ap(5).unwrap().m(), 2);
        assert_eq!(single_sidorenko().unwrap().k(), 5);
        assert_eq!(non_aq_witness().unwrap().len(), 8);
        let sys = non_aq(5).unwrap();
        for row in NON_AQ_SHORTEST {
            let v: Vec<_> = row.iter().map(|&c| sys.field().from_integer(c)).collect();
            assert!(sys.contains(&v));
        }
    }
}
