use serde::{Deserialize, Serialize};

use super::{commutator_subgroup, Elem, FiniteGroup, Subgroup};
use crate::error::{Error, Result};

/// G = G_0 ⊇ G_1 ⊇ ... ⊇ G_{s+1} = {1} with [G_i, G_j] ⊆ G_{i+j}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filtration {
    /// G_0 through G_{s+1}.
    levels: Vec<Subgroup>,
    degree: usize,
    proper: bool,
}

impl Filtration {
    pub fn levels(&self) -> &[Subgroup] {
        &self.levels
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_proper(&self) -> bool {
        self.proper
    }

    /// G_i, which is trivial beyond the stored chain.
    pub fn level(&self, i: usize) -> &Subgroup {
        &self.levels[i.min(self.levels.len() - 1)]
    }

    /// A_0 = ... = A_s = A, A_{s+1} = {0}.
    pub fn abelian(g: &FiniteGroup, degree: usize) -> Result<Filtration> {
        let mut chain: Vec<Vec<Elem>> = vec![g.elements().collect(); degree + 1];
        chain.push(vec![g.identity()]);
        validate_filtration(g, &chain)
    }
}

/// Checks a chain given as G_0, G_1, ..., ending in the trivial group.
pub fn validate_filtration(g: &FiniteGroup, chain: &[Vec<Elem>]) -> Result<Filtration> {
    if chain.is_empty() {
        return Err(Error::InvalidInput("empty chain".into()));
    }
    let levels = chain
        .iter()
        .map(|els| Subgroup::new(g, els))
        .collect::<Result<Vec<_>>>()?;
    if levels[0].order() != g.order() {
        return Err(Error::NotSubgroup("G_0 must be the whole group".into()));
    }
    for i in 1..levels.len() {
        if !levels[i].is_subset_of(&levels[i - 1]) {
            return Err(Error::NotDescending(i));
        }
    }
    if !levels.last().unwrap().is_trivial() {
        return Err(Error::InvalidInput("chain must end in the trivial group".into()));
    }
    let level = |i: usize| &levels[i.min(levels.len() - 1)];
    let top = levels.len() - 1;
    for i in 0..=top {
        for j in i..=top {
            let target = level(i + j);
            for &a in level(i).elements() {
                for &b in level(j).elements() {
                    if !target.contains(g.commutator(a, b)) {
                        return Err(Error::BracketViolation { i, j, a, b });
                    }
                }
            }
        }
    }
    let first_trivial = levels.iter().position(|l| l.is_trivial()).unwrap();
    let degree = first_trivial.saturating_sub(1);
    let proper = levels.len() == 1 || levels[0] == levels[1];
    let mut levels = levels;
    levels.truncate(first_trivial + 1);
    if levels.len() == 1 {
        // Trivial group: G_0 = G_1 = {1}, degree 0.
        levels.push(levels[0].clone());
    }
    Ok(Filtration { levels, degree, proper })
}

/// G, [G,G], [G,[G,G]], ... up to and including the first repeated term.
pub fn lower_central_chain(g: &FiniteGroup) -> Vec<Subgroup> {
    let whole = g.whole();
    let mut chain = vec![whole.clone()];
    loop {
        let next = commutator_subgroup(g, &whole, chain.last().unwrap());
        if next == *chain.last().unwrap() {
            return chain;
        }
        chain.push(next);
    }
}

/// G_0 = G_1 = G, G_{i+1} = [G, G_i].
pub fn lower_central_series(g: &FiniteGroup) -> Result<Filtration> {
    let chain = lower_central_chain(g);
    let last = chain.last().unwrap();
    if !last.is_trivial() {
        return Err(Error::NotNilpotent { stable_order: last.order() });
    }
    let mut elems: Vec<Vec<Elem>> = vec![g.elements().collect()];
    elems.extend(chain.iter().map(|s| s.elements().to_vec()));
    validate_filtration(g, &elems)
}
