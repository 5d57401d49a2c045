//! Units of measure and the multiplicative conversion graph between them.

use std::collections::{BTreeMap, HashMap, VecDeque};

use super::OntologyError;

/// Relative tolerance for conversion-graph consistency checks.
pub const CONVERSION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unit {
    pub name: String,
    pub dimension: String,
}

/// A declared conversion: one `from` equals `factor` of `to`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conversion {
    pub from: String,
    pub to: String,
    pub factor: f64,
}

/// Composed conversion between two units, kept as a ratio so that walking a
/// declared edge backwards divides instead of multiplying by a rounded
/// reciprocal.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Ratio {
    num: f64,
    den: f64,
}

impl Ratio {
    const ONE: Ratio = Ratio { num: 1.0, den: 1.0 };

    fn apply(self, value: f64) -> f64 {
        value * self.num / self.den
    }
}

/// Units grouped by dimension, with every same-dimension pair resolvable.
#[derive(Debug, Clone)]
pub struct UnitTable {
    units: Vec<Unit>,
    by_name: HashMap<String, usize>,
    conversions: Vec<Conversion>,
    // ratios[a][b] converts a value in unit a to unit b; None across dimensions.
    ratios: Vec<Vec<Option<Ratio>>>,
}

impl UnitTable {
    pub fn new(units: Vec<Unit>, conversions: Vec<Conversion>) -> Result<Self, OntologyError> {
        let mut by_name = HashMap::with_capacity(units.len());
        for (idx, unit) in units.iter().enumerate() {
            if by_name.insert(unit.name.clone(), idx).is_some() {
                return Err(OntologyError::DuplicateUnit(unit.name.clone()));
            }
        }

        // adjacency: (neighbour, ratio to go from this unit to neighbour)
        let mut adjacency: Vec<Vec<(usize, Ratio)>> = vec![Vec::new(); units.len()];
        for conv in &conversions {
            let from = *by_name
                .get(&conv.from)
                .ok_or_else(|| OntologyError::UnknownUnit(conv.from.clone()))?;
            let to = *by_name
                .get(&conv.to)
                .ok_or_else(|| OntologyError::UnknownUnit(conv.to.clone()))?;
            if !(conv.factor.is_finite() && conv.factor > 0.0) {
                return Err(OntologyError::NonPositiveFactor {
                    from: conv.from.clone(),
                    to: conv.to.clone(),
                    factor: conv.factor,
                });
            }
            if units[from].dimension != units[to].dimension {
                return Err(OntologyError::ConversionAcrossDimensions {
                    from: conv.from.clone(),
                    to: conv.to.clone(),
                });
            }
            adjacency[from].push((
                to,
                Ratio {
                    num: conv.factor,
                    den: 1.0,
                },
            ));
            adjacency[to].push((
                from,
                Ratio {
                    num: 1.0,
                    den: conv.factor,
                },
            ));
        }

        let ratios: Vec<Vec<Option<Ratio>>> = (0..units.len())
            .map(|start| shortest_paths(start, &adjacency))
            .collect();

        let table = UnitTable {
            units,
            by_name,
            conversions,
            ratios,
        };
        table.check_connected()?;
        table.check_consistent()?;
        Ok(table)
    }

    fn check_connected(&self) -> Result<(), OntologyError> {
        let mut reference: BTreeMap<&str, usize> = BTreeMap::new();
        for (idx, unit) in self.units.iter().enumerate() {
            let root = *reference.entry(unit.dimension.as_str()).or_insert(idx);
            if self.ratios[root][idx].is_none() {
                return Err(OntologyError::DisconnectedUnit {
                    unit: unit.name.clone(),
                    reference: self.units[root].name.clone(),
                });
            }
        }
        Ok(())
    }

    /// Every declared edge must agree with the composed path between its
    /// endpoints; otherwise some cycle in the graph has a product other than 1.
    fn check_consistent(&self) -> Result<(), OntologyError> {
        for conv in &self.conversions {
            let from = self.by_name[&conv.from];
            let to = self.by_name[&conv.to];
            let back = self.ratios[to][from].expect("checked connected");
            let round_trip = back.apply(conv.factor);
            if ((round_trip - 1.0).abs()) > CONVERSION_TOLERANCE {
                return Err(OntologyError::InconsistentConversion {
                    from: conv.from.clone(),
                    to: conv.to.clone(),
                    round_trip,
                });
            }
        }
        Ok(())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.by_name.contains_key(name)
    }

    pub fn get(&self, name: &str) -> Option<&Unit> {
        self.by_name.get(name).map(|&i| &self.units[i])
    }

    pub fn dimension(&self, name: &str) -> Option<&str> {
        self.get(name).map(|u| u.dimension.as_str())
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn conversions(&self) -> &[Conversion] {
        &self.conversions
    }

    /// Converts `value` from one unit to another of the same dimension.
    pub fn convert(&self, value: f64, from: &str, to: &str) -> Result<f64, OntologyError> {
        let a = *self
            .by_name
            .get(from)
            .ok_or_else(|| OntologyError::UnknownUnit(from.to_string()))?;
        let b = *self
            .by_name
            .get(to)
            .ok_or_else(|| OntologyError::UnknownUnit(to.to_string()))?;
        if a == b {
            return Ok(value);
        }
        match self.ratios[a][b] {
            Some(ratio) => Ok(ratio.apply(value)),
            None => Err(OntologyError::DimensionMismatch {
                from: from.to_string(),
                to: to.to_string(),
            }),
        }
    }
}

// Breadth-first, so the composed ratio uses the fewest declared edges.
fn shortest_paths(start: usize, adjacency: &[Vec<(usize, Ratio)>]) -> Vec<Option<Ratio>> {
    let mut out = vec![None; adjacency.len()];
    out[start] = Some(Ratio::ONE);
    let mut queue = VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        let here = out[node].expect("queued nodes are reached");
        for &(next, step) in &adjacency[node] {
            if out[next].is_none() {
                out[next] = Some(Ratio {
                    num: here.num * step.num,
                    den: here.den * step.den,
                });
                queue.push_back(next);
            }
        }
    }
    out
}
