use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldSpec};
use crate::space::Space;

/// An explicit subset of `F_q^n`.
#[derive(Clone)]
pub struct PointSet {
    space: Space,
    members: Vec<bool>,
    /// Sorted point encodings.
    points: Vec<u32>,
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointSet")
            .field("q", &self.space.q())
            .field("n", &self.space.dim())
            .field("points", &self.points)
            .finish()
    }
}

impl PartialEq for PointSet {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.points == other.points
    }
}

impl Eq for PointSet {}

impl PointSet {
    pub fn from_indices(space: Space, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members = vec![false; space.size()];
        for i in indices {
            if i >= space.size() {
                return Err(Error::TooLarge(i as u64));
            }
            members[i] = true;
        }
        Ok(Self::from_members(space, members))
    }

    pub fn from_members(space: Space, members: Vec<bool>) -> Self {
        assert_eq!(members.len(), space.size());
        let points = (0..members.len())
            .filter(|&i| members[i])
            .map(|i| i as u32)
            .collect();
        PointSet {
            space,
            members,
            points,
        }
    }

    /// Builds a set from coordinate vectors; duplicates are merged.
    pub fn from_points(space: Space, points: &[Vec<FieldElem>]) -> Result<Self> {
        let idx = points
            .iter()
            .map(|p| {
                if let Some(bad) = p.iter().find(|c| c.value() >= space.q() as u32) {
                    return Err(Error::NotAnElement(bad.value() as i64));
                }
                space.index(p)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_indices(space, idx)
    }

    pub fn empty(space: Space) -> Self {
        let n = space.size();
        Self::from_members(space, vec![false; n])
    }

    pub fn full(space: Space) -> Self {
        let n = space.size();
        Self::from_members(space, vec![true; n])
    }

    pub fn complement(&self) -> Self {
        Self::from_members(self.space.clone(), self.members.iter().map(|b| !b).collect())
    }

    /// This set without the origin.
    pub fn punctured_at_zero(&self) -> Self {
        let mut members = self.members.clone();
        members[0] = false;
        Self::from_members(self.space.clone(), members)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn field(&self) -> &Arc<FieldSpec> {
        self.space.field()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn contains(&self, idx: usize) -> bool {
        self.members[idx]
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn indices(&self) -> &[u32] {
        &self.points
    }

    pub fn coordinates(&self) -> Vec<Vec<FieldElem>> {
        self.points.iter().map(|&i| self.space.coords(i as usize)).collect()
    }

    /// `|A| / q^n`.
    pub fn density(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.points.len()),
            BigInt::from(self.space.size()),
        )
    }

    /// `A x F_q^extra` inside `F_q^(n + extra)`.
    pub fn lift(&self, extra: usize) -> Result<PointSet> {
        let space = Space::new(self.space.field().clone(), self.space.dim() + extra)?;
        let block = space.size() / self.space.size();
        let members = (0..space.size()).map(|i| self.members[i / block]).collect();
        Ok(PointSet::from_members(space, members))
    }

    /// Parses the point-set file format: one point per line as `n`
    /// space-separated integers in `[0, q)`; `#` starts a comment line.
    pub fn parse(space: Space, text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let coords = line
                .split_whitespace()
                .map(|tok| {
                    let v: u32 = tok.parse().map_err(|_| {
                        Error::Parse(format!("line {}: bad integer {tok:?}", lineno + 1))
                    })?;
                    space.field().elem(v).map_err(|_| {
                        Error::Parse(format!("line {}: {v} is not below q", lineno + 1))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if coords.len() != space.dim() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} coordinates, got {}",
                    lineno + 1,
                    space.dim(),
                    coords.len()
                )));
            }
            points.push(coords);
        }
        Self::from_points(space, &points)
    }

    pub fn to_file_string(&self) -> String {
        let mut out = format!("# {} points in F_{}^{}\n", self.len(), self.space.q(), self.dim());
        for p in self.coordinates() {
            let line: Vec<String> = p.iter().map(|c| c.value().to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(q: u64, n: usize) -> Space {
        Space::new(Arc::new(FieldSpec::of_order(q).unwrap()), n).unwrap()
    }

    #[test]
    fn parse_and_print() {
        let s = space(5, 2);
        let text = "# comment\n0 0\n0 3\n\n4 2\n0 3\n";
        let a = PointSet::parse(s.clone(), text).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a.indices(), &[0, 3, 22]);
        let again = PointSet::parse(s.clone(), &a.to_file_string()).unwrap();
        assert_eq!(a, again);
        assert!(matches!(PointSet::parse(s.clone(), "1 2 3\n"), Err(Error::Parse(_))));
        assert!(matches!(PointSet::parse(s, "1 5\n"), Err(Error::Parse(_))));
    }

    #[test]
    fn complement_and_lift() {
        let s = space(3, 1);
        let a = PointSet::from_indices(s, [1, 2]).unwrap();
        assert_eq!(a.complement().indices(), &[0]);
        let lifted = a.lift(2).unwrap();
        assert_eq!(lifted.len(), 18);
        assert_eq!(lifted.density(), a.density());
        assert!(lifted.contains(9) && !lifted.contains(8));
    }
}
