//! Instances of the socially fair (ℓp, k)-clustering problem and exact
//! evaluation of the min-max group objective.
//!
//! Points are identified by their index into the distance matrix. An instance
//! keeps its clients and candidate facilities as sorted lists of point ids, so
//! "lexicographic by id" and "lexicographic by facility index" coincide
//! everywhere in the crate.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::{binomial, Combinations};

/// Default number of k-subsets the exhaustive oracle is allowed to visit.
pub const DEFAULT_ORACLE_CAP: u128 = 2_000_000;

const METRIC_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("instance has no points")]
    EmptyInstance,
    #[error("k = {k} must satisfy 1 <= k <= |facilities| = {facilities}")]
    InvalidK { k: usize, facilities: usize },
    #[error("exponent p = {0} must be a finite real >= 1")]
    InvalidP(f64),
    #[error("instance needs at least one group")]
    NoGroups,
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("group {group} has invalid weight {weight}")]
    InvalidWeight { group: usize, weight: f64 },
    #[error("group {group} lists {ids} ids but {weights} weights")]
    WeightCount {
        group: usize,
        ids: usize,
        weights: usize,
    },
    #[error("point {0} is not a client")]
    UnknownClient(usize),
    #[error("point id {0} is out of range")]
    UnknownPoint(usize),
    #[error("distance matrix must be square over {0} points")]
    DistanceShape(usize),
    #[error("invalid distance d({a},{b}) = {value}")]
    InvalidDistance { a: usize, b: usize, value: f64 },
    #[error("distance matrix is not symmetric at ({a},{b})")]
    Asymmetric { a: usize, b: usize },
    #[error("triangle inequality fails for d({a},{c}) > d({a},{b}) + d({b},{c})")]
    TriangleViolation { a: usize, b: usize, c: usize },
    #[error("no centers")]
    NoCenters,
    #[error("point {0} is not a candidate facility")]
    NotAFacility(usize),
    #[error("instance too large for oracle: {subsets} subsets exceed cap {cap}")]
    OracleTooLarge { subsets: u128, cap: u128 },
    #[error("points must all have the same dimension")]
    RaggedPoints,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One demographic group: weighted client memberships.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    /// `(client index, weight)` pairs, sorted by client index.
    members: Vec<(usize, f64)>,
}

impl Group {
    pub fn members(&self) -> &[(usize, f64)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.members.iter().map(|&(_, w)| w).sum()
    }
}

/// Per-group costs and their maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostProfile {
    pub per_group: Vec<f64>,
    pub objective: f64,
}

impl CostProfile {
    pub fn new(per_group: Vec<f64>) -> Self {
        let objective = per_group.iter().copied().fold(0.0, f64::max);
        Self {
            per_group,
            objective,
        }
    }
}

/// A nonempty set of facility point ids, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CenterSet(Vec<usize>);

impl CenterSet {
    pub fn new(mut ids: Vec<usize>) -> Result<Self, ModelError> {
        ids.sort_unstable();
        ids.dedup();
        if ids.is_empty() {
            return Err(ModelError::NoCenters);
        }
        Ok(Self(ids))
    }

    /// Builds a center set from facility indices of `inst`.
    pub fn from_facility_indices(inst: &Instance, idx: &[usize]) -> Result<Self, ModelError> {
        Self::new(idx.iter().map(|&j| inst.facility_point(j)).collect())
    }

    pub fn ids(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    /// Facility indices of these centers in `inst`.
    pub fn facility_indices(&self, inst: &Instance) -> Result<Vec<usize>, ModelError> {
        self.0
            .iter()
            .map(|&id| inst.facility_index(id).ok_or(ModelError::NotAFacility(id)))
            .collect()
    }
}

impl std::fmt::Display for CenterSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (n, id) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{id}")?;
        }
        write!(f, "}}")
    }
}

/// A validated clustering instance. Cheap to clone: the distance matrix and
/// coordinates are shared.
#[derive(Debug, Clone)]
pub struct Instance {
    name: Option<String>,
    num_points: usize,
    dist: Arc<Vec<f64>>,
    coords: Option<Arc<Vec<Vec<f64>>>>,
    clients: Vec<usize>,
    facilities: Vec<usize>,
    client_of_point: Vec<Option<usize>>,
    facility_of_point: Vec<Option<usize>>,
    groups: Vec<Group>,
    k: usize,
    p: f64,
    /// `d(client, facility)^p`, row-major over clients.
    cost_cf: Vec<f64>,
}

/// Raw parts of an instance, checked by [`Instance::from_parts`].
#[derive(Debug, Clone)]
pub struct InstanceParts {
    pub name: Option<String>,
    pub num_points: usize,
    /// Row-major `num_points x num_points` matrix.
    pub distances: Vec<f64>,
    pub coords: Option<Vec<Vec<f64>>>,
    pub clients: Vec<usize>,
    pub facilities: Vec<usize>,
    /// Each group as `(client point id, weight)`; `None` weight means `1/|A_s|`.
    pub groups: Vec<Vec<(usize, Option<f64>)>>,
    pub k: usize,
    pub p: f64,
    pub check_metric: bool,
}

impl Instance {
    pub fn from_parts(parts: InstanceParts) -> Result<Self, ModelError> {
        let n = parts.num_points;
        if n == 0 {
            return Err(ModelError::EmptyInstance);
        }
        if parts.distances.len() != n * n {
            return Err(ModelError::DistanceShape(n));
        }
        validate_matrix(n, &parts.distances, parts.check_metric)?;
        let clients = sorted_ids(parts.clients, n)?;
        let facilities = sorted_ids(parts.facilities, n)?;
        if clients.is_empty() || facilities.is_empty() {
            return Err(ModelError::EmptyInstance);
        }
        let mut client_of_point = vec![None; n];
        for (i, &pt) in clients.iter().enumerate() {
            client_of_point[pt] = Some(i);
        }
        let mut groups = Vec::with_capacity(parts.groups.len());
        for (s, raw) in parts.groups.into_iter().enumerate() {
            if raw.is_empty() {
                return Err(ModelError::EmptyGroup(s));
            }
            let default_w = 1.0 / raw.len() as f64;
            let mut members = Vec::with_capacity(raw.len());
            for (pt, w) in raw {
                let ci = client_of_point
                    .get(pt)
                    .copied()
                    .flatten()
                    .ok_or(ModelError::UnknownClient(pt))?;
                let w = w.unwrap_or(default_w);
                if !(w.is_finite() && w >= 0.0) {
                    return Err(ModelError::InvalidWeight {
                        group: s,
                        weight: w,
                    });
                }
                members.push((ci, w));
            }
            members.sort_by_key(|&(ci, _)| ci);
            groups.push(Group { members });
        }
        if groups.is_empty() {
            return Err(ModelError::NoGroups);
        }
        let coords = match parts.coords {
            Some(c) => {
                if c.len() != n {
                    return Err(ModelError::DistanceShape(n));
                }
                Some(Arc::new(c))
            }
            None => None,
        };
        let mut inst = Self {
            name: parts.name,
            num_points: n,
            dist: Arc::new(parts.distances),
            coords,
            clients,
            facilities,
            client_of_point,
            facility_of_point: Vec::new(),
            groups,
            k: parts.k,
            p: parts.p,
            cost_cf: Vec::new(),
        };
        inst.set_p(parts.p)?;
        inst.rebuild_facility_cache()?;
        Ok(inst)
    }

    /// Euclidean instance over `coords`.
    pub fn euclidean(
        coords: Vec<Vec<f64>>,
        clients: Vec<usize>,
        facilities: Vec<usize>,
        groups: Vec<Vec<(usize, Option<f64>)>>,
        k: usize,
        p: f64,
    ) -> Result<Self, ModelError> {
        let distances = euclidean_matrix(&coords)?;
        Self::from_parts(InstanceParts {
            name: None,
            num_points: coords.len(),
            distances,
            coords: Some(coords),
            clients,
            facilities,
            groups,
            k,
            p,
            check_metric: false,
        })
    }

    fn rebuild_facility_cache(&mut self) -> Result<(), ModelError> {
        if self.k == 0 || self.k > self.facilities.len() {
            return Err(ModelError::InvalidK {
                k: self.k,
                facilities: self.facilities.len(),
            });
        }
        let mut facility_of_point = vec![None; self.num_points];
        for (j, &pt) in self.facilities.iter().enumerate() {
            facility_of_point[pt] = Some(j);
        }
        self.facility_of_point = facility_of_point;
        let f = self.facilities.len();
        let mut cost = Vec::with_capacity(self.clients.len() * f);
        for &c in &self.clients {
            for &fp in &self.facilities {
                cost.push(self.pow(self.dist(c, fp)));
            }
        }
        self.cost_cf = cost;
        Ok(())
    }

    fn set_p(&mut self, p: f64) -> Result<(), ModelError> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(ModelError::InvalidP(p));
        }
        self.p = p;
        Ok(())
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = Some(name.into());
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn num_clients(&self) -> usize {
        self.clients.len()
    }

    pub fn num_facilities(&self) -> usize {
        self.facilities.len()
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn clients(&self) -> &[usize] {
        &self.clients
    }

    pub fn facilities(&self) -> &[usize] {
        &self.facilities
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref().map(|c| c.as_slice())
    }

    pub fn client_point(&self, i: usize) -> usize {
        self.clients[i]
    }

    pub fn facility_point(&self, j: usize) -> usize {
        self.facilities[j]
    }

    pub fn facility_index(&self, point: usize) -> Option<usize> {
        self.facility_of_point.get(point).copied().flatten()
    }

    pub fn client_index(&self, point: usize) -> Option<usize> {
        self.client_of_point.get(point).copied().flatten()
    }

    /// Distance between two point ids.
    #[inline]
    pub fn dist(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.num_points + b]
    }

    /// Distance from client index `i` to facility index `j`.
    #[inline]
    pub fn dist_cf(&self, i: usize, j: usize) -> f64 {
        self.dist(self.clients[i], self.facilities[j])
    }

    /// `d(i, j)^p` for client index `i` and facility index `j`.
    #[inline]
    pub fn cost_cf(&self, i: usize, j: usize) -> f64 {
        self.cost_cf[i * self.facilities.len() + j]
    }

    #[inline]
    pub fn pow(&self, d: f64) -> f64 {
        pow_p(d, self.p)
    }

    /// Same instance with a different number of centers.
    pub fn with_k(&self, k: usize) -> Result<Self, ModelError> {
        if k == 0 || k > self.facilities.len() {
            return Err(ModelError::InvalidK {
                k,
                facilities: self.facilities.len(),
            });
        }
        let mut out = self.clone();
        out.k = k;
        Ok(out)
    }

    /// Same instance with a different exponent.
    pub fn with_p(&self, p: f64) -> Result<Self, ModelError> {
        let mut out = self.clone();
        out.set_p(p)?;
        out.rebuild_facility_cache()?;
        Ok(out)
    }

    /// Same clients and metric, facilities restricted to the given point ids.
    pub fn with_facilities(&self, facility_points: Vec<usize>) -> Result<Self, ModelError> {
        let facilities = sorted_ids(facility_points, self.num_points)?;
        if facilities.is_empty() {
            return Err(ModelError::EmptyInstance);
        }
        let mut out = self.clone();
        out.facilities = facilities;
        out.rebuild_facility_cache()?;
        Ok(out)
    }

    /// Same points and groups with every distance multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self, ModelError> {
        let mut out = self.clone();
        out.dist = Arc::new(self.dist.iter().map(|d| d * c).collect());
        out.coords = None;
        out.rebuild_facility_cache()?;
        Ok(out)
    }

    /// True when no client belongs to two groups.
    pub fn groups_disjoint(&self) -> bool {
        let mut seen = vec![false; self.clients.len()];
        for g in &self.groups {
            for &(i, _) in g.members() {
                if seen[i] {
                    return false;
                }
                seen[i] = true;
            }
        }
        true
    }

    /// Largest client-facility distance.
    pub fn client_facility_diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..self.clients.len() {
            for j in 0..self.facilities.len() {
                best = best.max(self.dist_cf(i, j));
            }
        }
        best
    }

    /// Smallest nonzero client-facility distance, if any.
    pub fn min_positive_client_facility_distance(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..self.clients.len() {
            for j in 0..self.facilities.len() {
                let d = self.dist_cf(i, j);
                if d > 0.0 {
                    best = Some(best.map_or(d, |b: f64| b.min(d)));
                }
            }
        }
        best
    }

    /// Serializable form of the instance.
    pub fn to_doc(&self) -> InstanceDoc {
        let groups = self
            .groups
            .iter()
            .map(|g| GroupDoc {
                ids: g.members.iter().map(|&(i, _)| self.clients[i]).collect(),
                weights: Some(g.members.iter().map(|&(_, w)| w).collect()),
            })
            .collect();
        let all_points = self.clients.len() == self.num_points;
        let (points, distance_matrix) = match &self.coords {
            Some(c) => (c.as_ref().clone(), None),
            None => (
                Vec::new(),
                Some(
                    self.dist
                        .chunks(self.num_points)
                        .map(|row| row.to_vec())
                        .collect(),
                ),
            ),
        };
        InstanceDoc {
            name: self.name.clone(),
            num_points: if points.is_empty() {
                Some(self.num_points)
            } else {
                None
            },
            points,
            clients: if all_points {
                None
            } else {
                Some(self.clients.clone())
            },
            facilities: self.facilities.clone(),
            groups,
            k: self.k,
            p: self.p,
            distance_matrix,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self, ModelError> {
        let doc: InstanceDoc = serde_json::from_str(s)?;
        doc.into_instance()
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> Result<String, ModelError> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }
}

#[inline]
pub(crate) fn pow_p(d: f64, p: f64) -> f64 {
    if p == 1.0 {
        d
    } else if p == 2.0 {
        d * d
    } else {
        d.powf(p)
    }
}

fn sorted_ids(mut ids: Vec<usize>, n: usize) -> Result<Vec<usize>, ModelError> {
    ids.sort_unstable();
    ids.dedup();
    if let Some(&bad) = ids.iter().find(|&&id| id >= n) {
        return Err(ModelError::UnknownPoint(bad));
    }
    Ok(ids)
}

fn validate_matrix(n: usize, d: &[f64], check_triangle: bool) -> Result<(), ModelError> {
    let mut scale: f64 = 1.0;
    for a in 0..n {
        for b in 0..n {
            let v = d[a * n + b];
            if !(v.is_finite() && v >= 0.0) || (a == b && v != 0.0) {
                return Err(ModelError::InvalidDistance { a, b, value: v });
            }
            if v != d[b * n + a] {
                return Err(ModelError::Asymmetric { a, b });
            }
            scale = scale.max(v);
        }
    }
    if check_triangle {
        let tol = METRIC_TOL * scale;
        for a in 0..n {
            for b in 0..n {
                let ab = d[a * n + b];
                for c in 0..n {
                    if d[a * n + c] > ab + d[b * n + c] + tol {
                        return Err(ModelError::TriangleViolation { a, b, c });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Row-major Euclidean distance matrix.
pub fn euclidean_matrix(coords: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
    let n = coords.len();
    if let Some(first) = coords.first() {
        if coords.iter().any(|c| c.len() != first.len()) {
            return Err(ModelError::RaggedPoints);
        }
    }
    let mut out = vec![0.0; n * n];
    for a in 0..n {
        for b in (a + 1)..n {
            let s: f64 = coords[a]
                .iter()
                .zip(&coords[b])
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            let v = s.sqrt();
            out[a * n + b] = v;
            out[b * n + a] = v;
        }
    }
    Ok(out)
}

/// Evaluates the min-max objective of `centers`.
pub fn evaluate(inst: &Instance, centers: &CenterSet) -> Result<CostProfile, ModelError> {
    if centers.is_empty() {
        return Err(ModelError::NoCenters);
    }
    let idx = centers.facility_indices(inst)?;
    Ok(evaluate_indices(inst, &idx))
}

/// Evaluates facility indices without validation. `idx` must be nonempty.
pub fn evaluate_indices(inst: &Instance, idx: &[usize]) -> CostProfile {
    let conn: Vec<f64> = (0..inst.num_clients())
        .map(|i| {
            idx.iter()
                .map(|&j| inst.cost_cf(i, j))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    group_costs(inst, &conn)
}

/// Aggregates per-client connection costs into per-group costs.
pub fn group_costs(inst: &Instance, connection: &[f64]) -> CostProfile {
    CostProfile::new(
        inst.groups()
            .iter()
            .map(|g| g.members().iter().map(|&(i, w)| w * connection[i]).sum())
            .collect(),
    )
}

/// Caps for the exhaustive oracle.
#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub max_subsets: u128,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            max_subsets: DEFAULT_ORACLE_CAP,
        }
    }
}

/// Exact optimum by enumerating every k-subset of facilities. Ties resolve to
/// the lexicographically smallest center list.
pub fn brute_force_opt(
    inst: &Instance,
    opts: &OracleOptions,
) -> Result<(CenterSet, CostProfile), ModelError> {
    let f = inst.num_facilities();
    let subsets = binomial(f, inst.k());
    if subsets > opts.max_subsets {
        return Err(ModelError::OracleTooLarge {
            subsets,
            cap: opts.max_subsets,
        });
    }
    let (idx, profile) = best_subset_of(inst, &(0..f).collect::<Vec<_>>(), inst.k())
        .expect("k <= |facilities| guarantees a subset");
    Ok((CenterSet::from_facility_indices(inst, &idx)?, profile))
}

/// Best `size`-subset of the facility indices `pool` (sorted ascending);
/// first minimum in lexicographic order wins.
pub(crate) fn best_subset_of(
    inst: &Instance,
    pool: &[usize],
    size: usize,
) -> Option<(Vec<usize>, CostProfile)> {
    let n = inst.num_clients();
    let mut best: Option<(Vec<usize>, CostProfile)> = None;
    let mut conn = vec![0.0; n];
    for combo in Combinations::new(pool.len(), size) {
        if combo.is_empty() {
            break;
        }
        for (i, c) in conn.iter_mut().enumerate() {
            *c = combo
                .iter()
                .map(|&q| inst.cost_cf(i, pool[q]))
                .fold(f64::INFINITY, f64::min);
        }
        let profile = group_costs(inst, &conn);
        let better = match &best {
            None => true,
            Some((_, b)) => profile.objective < b.objective,
        };
        if better {
            best = Some((combo.iter().map(|&q| pool[q]).collect(), profile));
        }
    }
    best
}

/// JSON interchange form of an instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<f64>>,
    /// Point count when only a distance matrix is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_points: Option<usize>,
    /// Client point ids; all points when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clients: Option<Vec<usize>>,
    pub facilities: Vec<usize>,
    pub groups: Vec<GroupDoc>,
    pub k: usize,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupDoc {
    pub ids: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl InstanceDoc {
    pub fn into_instance(self) -> Result<Instance, ModelError> {
        let (num_points, distances, check_metric) = match self.distance_matrix {
            Some(rows) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) || (!self.points.is_empty() && self.points.len() != n) {
                    return Err(ModelError::DistanceShape(n));
                }
                (n, rows.into_iter().flatten().collect(), true)
            }
            None => {
                let n = if self.points.is_empty() {
                    self.num_points.unwrap_or(0)
                } else {
                    self.points.len()
                };
                if self.points.is_empty() {
                    return Err(ModelError::EmptyInstance);
                }
                (n, euclidean_matrix(&self.points)?, false)
            }
        };
        let mut groups = Vec::with_capacity(self.groups.len());
        for (s, g) in self.groups.into_iter().enumerate() {
            match g.weights {
                Some(w) => {
                    if w.len() != g.ids.len() {
                        return Err(ModelError::WeightCount {
                            group: s,
                            ids: g.ids.len(),
                            weights: w.len(),
                        });
                    }
                    groups.push(g.ids.into_iter().zip(w.into_iter().map(Some)).collect());
                }
                None => groups.push(g.ids.into_iter().map(|id| (id, None)).collect()),
            }
        }
        Instance::from_parts(InstanceParts {
            name: self.name,
            num_points,
            distances,
            coords: if self.points.is_empty() {
                None
            } else {
                Some(self.points)
            },
            clients: self.clients.unwrap_or_else(|| (0..num_points).collect()),
            facilities: self.facilities,
            groups,
            k: self.k,
            p: self.p,
            check_metric,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_instance(positions: &[f64], clients: Vec<usize>, facilities: Vec<usize>, k: usize, p: f64) -> Instance {
        let coords = positions.iter().map(|&x| vec![x]).collect();
        let group = clients.iter().map(|&c| (c, Some(1.0))).collect();
        Instance::euclidean(coords, clients, facilities, vec![group], k, p).unwrap()
    }

    #[test]
    fn line_metric_center_in_the_middle() {
        // clients at 0 and 2, facility at 1, p = 2: 1^2 + 1^2
        let inst = line_instance(&[0.0, 2.0, 1.0], vec![0, 1], vec![2], 1, 2.0);
        let cost = evaluate(&inst, &CenterSet::new(vec![2]).unwrap()).unwrap();
        assert_eq!(cost.objective, 2.0);
        assert_eq!(cost.per_group, vec![2.0]);
    }

    #[test]
    fn co_located_clients_cost_nothing() {
        let inst = line_instance(&[3.0, 3.0, 3.0], vec![0, 1], vec![2], 1, 1.0);
        let cost = evaluate(&inst, &CenterSet::new(vec![2]).unwrap()).unwrap();
        assert_eq!(cost.objective, 0.0);
        assert!(cost.per_group.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn identical_groups_have_identical_costs() {
        let coords = vec![vec![0.0, 0.0], vec![1.0, 2.0], vec![4.0, 1.0], vec![2.0, 2.0]];
        let g = vec![(0, Some(0.5)), (1, Some(0.25)), (2, Some(0.25))];
        let inst = Instance::euclidean(coords, vec![0, 1, 2], vec![2, 3], vec![g.clone(), g], 1, 1.0).unwrap();
        let cost = evaluate(&inst, &CenterSet::new(vec![3]).unwrap()).unwrap();
        assert_eq!(cost.per_group[0], cost.per_group[1]);
    }

    #[test]
    fn empty_center_set_is_rejected() {
        assert!(matches!(CenterSet::new(vec![]), Err(ModelError::NoCenters)));
        assert_eq!(ModelError::NoCenters.to_string(), "no centers");
    }

    #[test]
    fn non_facility_center_is_rejected() {
        let inst = line_instance(&[0.0, 1.0, 2.0], vec![0, 1], vec![2], 1, 1.0);
        let err = evaluate(&inst, &CenterSet::new(vec![0]).unwrap()).unwrap_err();
        assert!(matches!(err, ModelError::NotAFacility(0)));
    }

    #[test]
    fn default_weights_are_inverse_group_size() {
        let coords = vec![vec![0.0], vec![1.0], vec![2.0], vec![5.0]];
        let inst = Instance::euclidean(
            coords,
            vec![0, 1, 2],
            vec![3],
            vec![vec![(0, None), (1, None), (2, None)], vec![(2, None)]],
            1,
            1.0,
        )
        .unwrap();
        assert!((inst.groups()[0].total_weight() - 1.0).abs() < 1e-15);
        assert_eq!(inst.groups()[1].members(), &[(2, 1.0)]);
        assert!(!inst.groups_disjoint());
    }

    #[test]
    fn construction_rejects_bad_inputs() {
        let coords = vec![vec![0.0], vec![1.0]];
        let bad_k = Instance::euclidean(coords.clone(), vec![0], vec![1], vec![vec![(0, None)]], 2, 1.0);
        assert!(matches!(bad_k, Err(ModelError::InvalidK { .. })));
        let bad_p = Instance::euclidean(coords.clone(), vec![0], vec![1], vec![vec![(0, None)]], 1, 0.5);
        assert!(matches!(bad_p, Err(ModelError::InvalidP(_))));
        let empty_group = Instance::euclidean(coords.clone(), vec![0], vec![1], vec![vec![]], 1, 1.0);
        assert!(matches!(empty_group, Err(ModelError::EmptyGroup(0))));
        let stranger = Instance::euclidean(coords.clone(), vec![0], vec![1], vec![vec![(1, None)]], 1, 1.0);
        assert!(matches!(stranger, Err(ModelError::UnknownClient(1))));
        let neg = Instance::euclidean(coords, vec![0], vec![1], vec![vec![(0, Some(-1.0))]], 1, 1.0);
        assert!(matches!(neg, Err(ModelError::InvalidWeight { .. })));
    }

    #[test]
    fn metric_violations_are_detected() {
        let base = |d: Vec<f64>, check: bool| {
            Instance::from_parts(InstanceParts {
                name: None,
                num_points: 3,
                distances: d,
                coords: None,
                clients: vec![0, 1],
                facilities: vec![2],
                groups: vec![vec![(0, None), (1, None)]],
                k: 1,
                p: 1.0,
                check_metric: check,
            })
        };
        let triangle_broken = vec![0.0, 5.0, 1.0, 5.0, 0.0, 1.0, 1.0, 1.0, 0.0];
        assert!(matches!(
            base(triangle_broken.clone(), true),
            Err(ModelError::TriangleViolation { .. })
        ));
        assert!(base(triangle_broken, false).is_ok());
        let asym = vec![0.0, 1.0, 1.0, 2.0, 0.0, 1.0, 1.0, 1.0, 0.0];
        assert!(matches!(base(asym, false), Err(ModelError::Asymmetric { .. })));
        let diag = vec![1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0];
        assert!(matches!(base(diag, false), Err(ModelError::InvalidDistance { .. })));
    }

    #[test]
    fn oracle_with_k_equal_to_facilities_takes_everything() {
        let inst = line_instance(&[0.0, 4.0, 1.0, 3.0, 9.0], vec![0, 1], vec![2, 3, 4], 3, 1.0);
        let (centers, _) = brute_force_opt(&inst, &OracleOptions::default()).unwrap();
        assert_eq!(centers.ids(), &[2, 3, 4]);
    }

    #[test]
    fn oracle_finds_zero_optimum() {
        let inst = line_instance(&[2.0, 2.0, 7.0, 2.0, -3.0], vec![0, 1], vec![2, 3, 4], 1, 1.0);
        let (centers, cost) = brute_force_opt(&inst, &OracleOptions::default()).unwrap();
        assert!(centers.contains(3));
        assert_eq!(cost.objective, 0.0);
    }

    #[test]
    fn oracle_respects_cap() {
        let inst = line_instance(&[0.0, 1.0, 2.0, 3.0, 4.0], vec![0], vec![1, 2, 3, 4], 2, 1.0);
        let err = brute_force_opt(&inst, &OracleOptions { max_subsets: 5 }).unwrap_err();
        assert!(err.to_string().starts_with("instance too large for oracle"));
    }

    #[test]
    fn oracle_ties_prefer_lexicographically_smallest() {
        // Two facilities equidistant from the only client.
        let inst = line_instance(&[0.0, -1.0, 1.0], vec![0], vec![1, 2], 1, 1.0);
        let (centers, _) = brute_force_opt(&inst, &OracleOptions::default()).unwrap();
        assert_eq!(centers.ids(), &[1]);
    }

    #[test]
    fn json_round_trip_preserves_costs() {
        let inst = line_instance(&[0.0, 4.0, 1.0, 3.0, 9.0], vec![0, 1], vec![2, 3, 4], 2, 2.0);
        let text = inst.to_json_string().unwrap();
        let back = Instance::from_json_str(&text).unwrap();
        let c = CenterSet::new(vec![2, 4]).unwrap();
        assert_eq!(evaluate(&inst, &c).unwrap(), evaluate(&back, &c).unwrap());
    }

    #[test]
    fn distance_matrix_overrides_coordinates() {
        let text = r#"{
            "points": [[0.0], [10.0], [20.0]],
            "facilities": [2],
            "clients": [0, 1],
            "groups": [{"ids": [0, 1]}],
            "k": 1, "p": 1,
            "distance_matrix": [[0, 1, 1], [1, 0, 1], [1, 1, 0]]
        }"#;
        let inst = Instance::from_json_str(text).unwrap();
        let cost = evaluate(&inst, &CenterSet::new(vec![2]).unwrap()).unwrap();
        assert!((cost.objective - 1.0).abs() < 1e-15);
    }
}
