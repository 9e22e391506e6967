use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::Monomial;

/// A set of multi-exponents of fixed dimension.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExponentSet {
    elements: BTreeSet<Monomial>,
}

impl ExponentSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, m: Monomial) -> bool {
        self.elements.insert(m)
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.elements.contains(m)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Elements in ascending graded-lex order.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &Monomial> + '_ {
        self.elements.iter()
    }

    pub fn is_subset(&self, other: &ExponentSet) -> bool {
        self.elements.is_subset(&other.elements)
    }

    /// Smallest superset closed under componentwise-smaller exponents:
    /// `{ v' : v' <= v for some v in self }`.
    pub fn divisor_closure(&self) -> ExponentSet {
        let mut closed = self.elements.clone();
        let mut work: Vec<Monomial> = self.elements.iter().cloned().collect();
        while let Some(m) = work.pop() {
            for j in 0..m.nvars() {
                if let Some(lower) = m.lower(j) {
                    if closed.insert(lower.clone()) {
                        work.push(lower);
                    }
                }
            }
        }
        ExponentSet { elements: closed }
    }

    /// Every element's one-step lowerings `v - e_j` are present.
    pub fn is_divisor_closed(&self) -> bool {
        self.elements
            .iter()
            .all(|m| (0..m.nvars()).all(|j| m.lower(j).is_none_or(|l| self.elements.contains(&l))))
    }
}

impl FromIterator<Monomial> for ExponentSet {
    fn from_iter<I: IntoIterator<Item = Monomial>>(iter: I) -> Self {
        ExponentSet {
            elements: iter.into_iter().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn set(items: &[&[u32]]) -> ExponentSet {
        items.iter().map(|e| Monomial::from_exponents(e.to_vec())).collect()
    }

    #[test]
    fn closure_of_single_exponent() {
        let closed = set(&[&[2, 1]]).divisor_closure();
        assert_eq!(closed, set(&[&[0, 0], &[1, 0], &[2, 0], &[0, 1], &[1, 1], &[2, 1]]));
    }

    #[test]
    fn closure_of_empty_set() {
        assert!(ExponentSet::new().divisor_closure().is_empty());
    }

    #[test]
    fn log_polynomial_monomials_gain_only_z2() {
        // {1, z1, z3, z2 z3, z3^2, z2 z3^2}
        let mp = set(&[&[0, 0, 0], &[1, 0, 0], &[0, 0, 1], &[0, 1, 1], &[0, 0, 2], &[0, 1, 2]]);
        let closed = mp.divisor_closure();
        assert_eq!(closed.len(), mp.len() + 1);
        assert!(closed.contains(&Monomial::from_exponents(vec![0, 1, 0])));
        assert!(mp.is_subset(&closed));
    }
}
