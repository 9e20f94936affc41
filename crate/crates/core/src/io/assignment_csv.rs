//! Assignment inputs: weights `unit,<location...>`, capacities
//! `location,capacity`, optional groups `unit,group`.

use std::collections::HashMap;
use std::path::Path;

use crate::assignment::{Assignment, AssignmentInstance};
use crate::error::{Error, Result};

use super::Table;

fn parse_f64(s: &str, line: usize, what: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::ParseError { line, message: format!("{what} {s:?} is not a number") })
}

/// Reads a weights table: returns unit labels, location labels and rows.
pub(crate) fn load_weights(path: &Path) -> Result<(Vec<String>, Vec<String>, Vec<Vec<f64>>)> {
    let t = Table::load(path)?;
    if t.header.first().map(String::as_str) != Some("unit") {
        return Err(Error::ParseError { line: 1, message: format!("{}: first column must be `unit`", path.display()) });
    }
    let locations = t.header[1..].to_vec();
    let mut units = Vec::new();
    let mut weights = Vec::new();
    for (i, row) in t.rows.iter().enumerate() {
        let line = i + 2;
        units.push(row[0].clone());
        weights.push(row[1..].iter().map(|s| parse_f64(s, line, "weight")).collect::<Result<Vec<_>>>()?);
    }
    Ok((units, locations, weights))
}

fn lookup(map: &HashMap<String, String>, key: &str, path: &Path) -> Result<String> {
    map.get(key).cloned().ok_or_else(|| Error::DimensionMismatch(format!("{}: no entry for {key:?}", path.display())))
}

fn two_column(path: &Path, first: &str, second: &str) -> Result<HashMap<String, String>> {
    let t = Table::load(path)?;
    if t.header != [first, second] {
        return Err(Error::ParseError { line: 1, message: format!("{}: header must be {first},{second}", path.display()) });
    }
    let mut out = HashMap::new();
    for (i, row) in t.rows.into_iter().enumerate() {
        let mut it = row.into_iter();
        let (k, v) = (it.next().unwrap_or_default(), it.next().unwrap_or_default());
        if out.insert(k.clone(), v).is_some() {
            return Err(Error::SchemaViolation { line: i + 2, reason: format!("{}: duplicate {first} {k:?}", path.display()) });
        }
    }
    Ok(out)
}

/// Builds an instance from the three CSVs. Without a groups file every unit
/// is its own group.
pub fn load_assignment_instance(weights: &Path, capacities: &Path, groups: Option<&Path>) -> Result<AssignmentInstance> {
    let (units, locations, w) = load_weights(weights)?;
    let caps_map = two_column(capacities, "location", "capacity")?;
    if caps_map.len() != locations.len() {
        return Err(Error::DimensionMismatch(format!("{} capacities for {} locations", caps_map.len(), locations.len())));
    }
    let caps = locations
        .iter()
        .map(|l| {
            let c = lookup(&caps_map, l, capacities)?;
            c.trim()
                .parse::<u64>()
                .map_err(|_| Error::InvalidParameter(format!("capacity {c:?} of {l:?} is not a non-negative integer")))
        })
        .collect::<Result<Vec<_>>>()?;
    let groups = match groups {
        Some(p) => {
            let g = two_column(p, "unit", "group")?;
            units.iter().map(|u| lookup(&g, u, p)).collect::<Result<Vec<_>>>()?
        }
        None => units.iter().map(|u| format!("unit:{u}")).collect(),
    };
    AssignmentInstance::labelled(units, locations, w, caps, groups)
}

/// Truth weights for `instance`, aligned by unit and location labels.
pub(crate) fn load_truth(path: &Path, instance: &AssignmentInstance) -> Result<Vec<Vec<f64>>> {
    let (units, locations, w) = load_weights(path)?;
    if units != instance.unit_labels || locations != instance.location_labels {
        return Err(Error::DimensionMismatch(format!("{}: units or locations differ from the weights file", path.display())));
    }
    Ok(w)
}

/// `unit,group,location` in unit order.
pub fn assignment_table(instance: &AssignmentInstance, a: &Assignment) -> Table {
    let mut t = Table::new(&["unit", "group", "location"]);
    for (i, &j) in a.location_of.iter().enumerate() {
        t.push(vec![instance.unit_labels[i].clone(), instance.groups[i].clone(), instance.location_labels[j].clone()]);
    }
    t
}

pub fn save_assignment(instance: &AssignmentInstance, a: &Assignment, path: &Path) -> Result<()> {
    assignment_table(instance, a).save(path)
}
