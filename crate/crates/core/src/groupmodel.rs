//! Generative link model over a membership chart.
//!
//! A link is either innocent (probability `P_I`), in which case every slot is
//! an entity drawn uniformly from all `N_p`, or it is produced by one of the
//! `K` groups picked uniformly. In a group-produced link each slot is noise
//! with probability `P_R` (uniform over all entities) and otherwise a uniform
//! draw from the group's members. Each link is scored by its single best
//! explanation (innocent or one group), and the chart's log-likelihood is the
//! sum of those maxima.
//!
//! Two scoring paths exist. The free functions ([`entity_factor`],
//! [`link_group_log_likelihood`], [`total_log_likelihood`], ...) evaluate the
//! model slot by slot and are the reference. [`ModelState`] keeps per-link
//! group overlap counts so that a single add/remove move can be re-scored
//! without touching unaffected links.
//!
//! Impossible events score `f64::NEG_INFINITY`; it orders below every finite
//! value and absorbs finite addends.

use std::collections::BTreeSet;
use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::transform::{Link, LinkDataset};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("probability {name}={value} outside [0, 1]")]
    BadProbability { name: &'static str, value: f64 },
    #[error("invalid move {0:?}")]
    InvalidMove(Move),
    #[error("chart has {chart} entities but link dataset has {links}")]
    SizeMismatch { chart: usize, links: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkModelParams {
    /// Probability that a link is entirely random.
    pub p_innocent: f64,
    /// Probability that a slot of a group link is filled by a random entity.
    pub p_noise: f64,
}

impl LinkModelParams {
    pub fn new(p_innocent: f64, p_noise: f64) -> Result<Self, ModelError> {
        for (name, value) in [("P_I", p_innocent), ("P_R", p_noise)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ModelError::BadProbability { name, value });
            }
        }
        Ok(Self {
            p_innocent,
            p_noise,
        })
    }
}

impl Default for LinkModelParams {
    fn default() -> Self {
        Self {
            p_innocent: 0.1,
            p_noise: 0.1,
        }
    }
}

/// Binary entity-by-group membership. Groups are zero-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chart {
    k: usize,
    entity_groups: Vec<Vec<usize>>,
    group_members: Vec<BTreeSet<usize>>,
}

impl Chart {
    /// A chart with every group empty.
    pub fn empty(n_entities: usize, k: usize) -> Self {
        Self {
            k,
            entity_groups: vec![Vec::new(); n_entities],
            group_members: vec![BTreeSet::new(); k],
        }
    }

    /// Builds a chart from explicit member lists, one per group.
    pub fn from_groups(n_entities: usize, groups: &[Vec<usize>]) -> Self {
        let mut chart = Self::empty(n_entities, groups.len());
        for (g, members) in groups.iter().enumerate() {
            for &e in members {
                chart.add(e, g);
            }
        }
        chart
    }

    pub fn n_entities(&self) -> usize {
        self.entity_groups.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn contains(&self, entity: usize, group: usize) -> bool {
        self.entity_groups[entity].contains(&group)
    }

    pub fn group_size(&self, group: usize) -> usize {
        self.group_members[group].len()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.group_members.iter().map(BTreeSet::len).collect()
    }

    pub fn members(&self, group: usize) -> &BTreeSet<usize> {
        &self.group_members[group]
    }

    /// Groups the entity belongs to, ascending.
    pub fn groups_of(&self, entity: usize) -> &[usize] {
        &self.entity_groups[entity]
    }

    /// Returns false if the pair was already present.
    pub fn add(&mut self, entity: usize, group: usize) -> bool {
        let groups = &mut self.entity_groups[entity];
        match groups.binary_search(&group) {
            Ok(_) => false,
            Err(pos) => {
                groups.insert(pos, group);
                self.group_members[group].insert(entity);
                true
            }
        }
    }

    /// Returns false if the pair was absent.
    pub fn remove(&mut self, entity: usize, group: usize) -> bool {
        let groups = &mut self.entity_groups[entity];
        match groups.binary_search(&group) {
            Ok(pos) => {
                groups.remove(pos);
                self.group_members[group].remove(&entity);
                true
            }
            Err(_) => false,
        }
    }

    /// `group_index TAB comma-separated entity ids`, both one-based.
    pub fn write<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for (g, members) in self.group_members.iter().enumerate() {
            let ids: Vec<String> = members.iter().map(|e| (e + 1).to_string()).collect();
            writeln!(out, "{}\t{}", g + 1, ids.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Direction {
    Add,
    Remove,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Move {
    pub entity: usize,
    pub group: usize,
    pub direction: Direction,
}

impl Move {
    /// The move that flips the current membership of `(entity, group)`.
    pub fn toggle(chart: &Chart, entity: usize, group: usize) -> Self {
        let direction = if chart.contains(entity, group) {
            Direction::Remove
        } else {
            Direction::Add
        };
        Self {
            entity,
            group,
            direction,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Explanation {
    Innocent,
    Group(usize),
}

/// Probability that one slot of a link produced by `group` holds `entity`.
pub fn entity_factor(entity: usize, group: usize, chart: &Chart, params: &LinkModelParams) -> f64 {
    let n = chart.n_entities() as f64;
    let size = chart.group_size(group);
    let member = if size > 0 && chart.contains(entity, group) {
        (1.0 - params.p_noise) / size as f64
    } else {
        0.0
    };
    member + params.p_noise / n
}

/// Log-probability of the link's entities given that `group` produced it.
///
/// Every member of the group shares one factor and every other entity the
/// noise factor, so the sum is taken as `c·ln(member) + (m-c)·ln(noise)`.
/// Equal `(c, |g|)` pairs therefore score bit-identically, which keeps
/// group ties exact.
pub fn link_group_log_likelihood(
    link: &Link,
    group: usize,
    chart: &Chart,
    params: &LinkModelParams,
) -> f64 {
    let inside = link
        .members
        .iter()
        .filter(|&&e| chart.contains(e, group))
        .count();
    let stray = link.len() - inside;
    let mut ll = 0.0;
    for (count, factor) in [
        (
            inside,
            link.members.iter().find(|&&e| chart.contains(e, group)),
        ),
        (
            stray,
            link.members.iter().find(|&&e| !chart.contains(e, group)),
        ),
    ] {
        let Some(&e) = factor else { continue };
        let f = entity_factor(e, group, chart, params);
        if f <= 0.0 {
            return f64::NEG_INFINITY;
        }
        ll += count as f64 * f.ln();
    }
    ll
}

/// Log-probability of the link being innocent and its entities uniform.
pub fn innocent_log_likelihood(
    link_len: usize,
    n_entities: usize,
    params: &LinkModelParams,
) -> f64 {
    if params.p_innocent <= 0.0 {
        return f64::NEG_INFINITY;
    }
    params.p_innocent.ln() - link_len as f64 * (n_entities as f64).ln()
}

fn group_branch_prior(k: usize, params: &LinkModelParams) -> f64 {
    if params.p_innocent >= 1.0 {
        f64::NEG_INFINITY
    } else {
        (1.0 - params.p_innocent).ln() - (k as f64).ln()
    }
}

/// The highest-scoring explanation of one link. Ties go to the innocent
/// branch, then to the lowest group.
pub fn best_explanation(
    link: &Link,
    chart: &Chart,
    params: &LinkModelParams,
) -> (Explanation, f64) {
    let mut best = (
        Explanation::Innocent,
        innocent_log_likelihood(link.len(), chart.n_entities(), params),
    );
    let prior = group_branch_prior(chart.k(), params);
    if prior == f64::NEG_INFINITY {
        return best;
    }
    for g in 0..chart.k() {
        let ll = prior + link_group_log_likelihood(link, g, chart, params);
        if ll > best.1 {
            best = (Explanation::Group(g), ll);
        }
    }
    best
}

/// Cached per-link explanations and scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredAssignment {
    pub explanations: Vec<Explanation>,
    pub values: Vec<f64>,
    finite_sum: f64,
    impossible: usize,
}

impl ScoredAssignment {
    fn from_parts(explanations: Vec<Explanation>, values: Vec<f64>) -> Self {
        let mut s = Self {
            explanations,
            values,
            finite_sum: 0.0,
            impossible: 0,
        };
        s.resum();
        s
    }

    fn resum(&mut self) {
        self.finite_sum = self.values.iter().filter(|v| v.is_finite()).sum();
        self.impossible = self.values.iter().filter(|v| !v.is_finite()).count();
    }

    /// Total log-likelihood, `NEG_INFINITY` if any link is impossible.
    pub fn total(&self) -> f64 {
        if self.impossible > 0 {
            f64::NEG_INFINITY
        } else {
            self.finite_sum
        }
    }

    /// Number of links whose best explanation has probability zero.
    pub fn impossible_links(&self) -> usize {
        self.impossible
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Full recomputation by the reference path.
pub fn total_log_likelihood(
    links: &LinkDataset,
    chart: &Chart,
    params: &LinkModelParams,
) -> Result<ScoredAssignment, ModelError> {
    if chart.n_entities() != links.n_entities() {
        return Err(ModelError::SizeMismatch {
            chart: chart.n_entities(),
            links: links.n_entities(),
        });
    }
    let (explanations, values) = links
        .links()
        .iter()
        .map(|l| best_explanation(l, chart, params))
        .unzip();
    Ok(ScoredAssignment::from_parts(explanations, values))
}

/// Lexicographic change of (impossible links, finite sum).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Delta {
    impossible: i64,
    finite: f64,
}

impl Delta {
    fn accumulate(&mut self, old: f64, new: f64) {
        match (old.is_finite(), new.is_finite()) {
            (true, true) => self.finite += new - old,
            (true, false) => {
                self.impossible += 1;
                self.finite -= old;
            }
            (false, true) => {
                self.impossible -= 1;
                self.finite += new;
            }
            (false, false) => {}
        }
    }

    fn as_f64(self) -> f64 {
        match self.impossible.cmp(&0) {
            std::cmp::Ordering::Less => f64::INFINITY,
            std::cmp::Ordering::Greater => f64::NEG_INFINITY,
            std::cmp::Ordering::Equal => self.finite,
        }
    }
}

/// Chart plus an incrementally maintained score cache.
///
/// For every (link, group) pair the state tracks how many of the link's
/// entities belong to the group. A group-produced link with `c` members of a
/// group of size `s` scores `c·ln((1-P_R)/s + P_R/N) + (m-c)·ln(P_R/N)`, so a
/// toggle of `(e, g)` can only change the score of links that overlap `g`
/// before or after the move.
#[derive(Debug, Clone)]
pub struct ModelState<'a> {
    links: &'a LinkDataset,
    params: LinkModelParams,
    chart: Chart,
    entity_links: Vec<Vec<usize>>,
    /// Row-major `N_L x K`.
    overlap: Vec<u32>,
    scored: ScoredAssignment,
    member_log: Vec<f64>,
    noise_log: f64,
    group_prior: f64,
    innocent: Vec<f64>,
    touched: Vec<bool>,
}

impl<'a> ModelState<'a> {
    pub fn new(
        links: &'a LinkDataset,
        chart: Chart,
        params: LinkModelParams,
    ) -> Result<Self, ModelError> {
        if chart.n_entities() != links.n_entities() {
            return Err(ModelError::SizeMismatch {
                chart: chart.n_entities(),
                links: links.n_entities(),
            });
        }
        let n = links.n_entities();
        let k = chart.k();
        let nf = n as f64;
        let member_log = (0..=n)
            .map(|s| {
                if s == 0 {
                    f64::NEG_INFINITY
                } else {
                    ((1.0 - params.p_noise) / s as f64 + params.p_noise / nf).ln()
                }
            })
            .collect();
        let noise_log = (params.p_noise / nf).ln();
        let innocent = links
            .links()
            .iter()
            .map(|l| innocent_log_likelihood(l.len(), n, &params))
            .collect();
        let entity_links = links.entity_links();
        let mut overlap = vec![0u32; links.n_links() * k];
        for (li, link) in links.links().iter().enumerate() {
            for &e in &link.members {
                for &g in chart.groups_of(e) {
                    overlap[li * k + g] += 1;
                }
            }
        }
        let mut state = Self {
            links,
            params,
            chart,
            entity_links,
            overlap,
            scored: ScoredAssignment::from_parts(Vec::new(), Vec::new()),
            member_log,
            noise_log,
            group_prior: group_branch_prior(k, &params),
            innocent,
            touched: vec![false; links.n_links()],
        };
        let (explanations, values) = (0..links.n_links())
            .map(|li| state.best_for_link(li, None))
            .unzip();
        state.scored = ScoredAssignment::from_parts(explanations, values);
        Ok(state)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn scored(&self) -> &ScoredAssignment {
        &self.scored
    }

    pub fn params(&self) -> &LinkModelParams {
        &self.params
    }

    pub fn links(&self) -> &'a LinkDataset {
        self.links
    }

    pub fn total(&self) -> f64 {
        self.scored.total()
    }

    pub fn into_parts(self) -> (Chart, ScoredAssignment) {
        (self.chart, self.scored)
    }

    fn group_score(&self, link_len: usize, count: usize, size: usize) -> f64 {
        if self.group_prior == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        // Same association order as `link_group_log_likelihood` plus prior.
        let mut ll = 0.0;
        if count > 0 {
            ll += count as f64 * self.member_log[size];
        }
        let stray = link_len - count;
        if stray > 0 {
            ll += stray as f64 * self.noise_log;
        }
        self.group_prior + ll
    }

    /// Best explanation for link `li`, optionally with group `g` evaluated at
    /// a hypothetical `(count, size)`.
    fn best_for_link(
        &self,
        li: usize,
        what_if: Option<(usize, usize, usize)>,
    ) -> (Explanation, f64) {
        let k = self.chart.k();
        let m = self.links.links()[li].len();
        let mut best = (Explanation::Innocent, self.innocent[li]);
        if self.group_prior == f64::NEG_INFINITY {
            return best;
        }
        for g in 0..k {
            let (count, size) = match what_if {
                Some((wg, c, s)) if wg == g => (c, s),
                _ => (self.overlap[li * k + g] as usize, self.chart.group_size(g)),
            };
            let ll = self.group_score(m, count, size);
            if ll > best.1 {
                best = (Explanation::Group(g), ll);
            }
        }
        best
    }

    fn check(&self, mv: Move) -> Result<(), ModelError> {
        if mv.entity >= self.chart.n_entities() || mv.group >= self.chart.k() {
            return Err(ModelError::InvalidMove(mv));
        }
        let present = self.chart.contains(mv.entity, mv.group);
        match (mv.direction, present) {
            (Direction::Add, false) | (Direction::Remove, true) => Ok(()),
            _ => Err(ModelError::InvalidMove(mv)),
        }
    }

    /// Visits every link whose score may change under `mv`, passing the link,
    /// its overlap with the moved group after the move, and the new group size.
    fn for_each_affected(&mut self, mv: Move, mut f: impl FnMut(&mut Self, usize, usize, usize)) {
        let k = self.chart.k();
        let g = mv.group;
        let size = self.chart.group_size(g);
        let new_size = match mv.direction {
            Direction::Add => size + 1,
            Direction::Remove => size - 1,
        };
        let entity_links = std::mem::take(&mut self.entity_links);
        for &li in &entity_links[mv.entity] {
            self.touched[li] = true;
        }
        for li in 0..self.links.n_links() {
            let count = self.overlap[li * k + g] as usize;
            let new_count = if self.touched[li] {
                match mv.direction {
                    Direction::Add => count + 1,
                    Direction::Remove => count - 1,
                }
            } else {
                count
            };
            if count == 0 && new_count == 0 {
                continue;
            }
            f(self, li, new_count, new_size);
        }
        for &li in &entity_links[mv.entity] {
            self.touched[li] = false;
        }
        self.entity_links = entity_links;
    }

    fn delta_parts(&mut self, mv: Move) -> Delta {
        let mut delta = Delta {
            impossible: 0,
            finite: 0.0,
        };
        self.for_each_affected(mv, |state, li, count, size| {
            let (_, new) = state.best_for_link(li, Some((mv.group, count, size)));
            delta.accumulate(state.scored.values[li], new);
        });
        delta
    }

    /// Change in total log-likelihood if `mv` were applied. `+inf`/`-inf`
    /// when the move changes the number of impossible links.
    pub fn delta_for_move(&mut self, mv: Move) -> Result<f64, ModelError> {
        self.check(mv)?;
        Ok(self.delta_parts(mv).as_f64())
    }

    /// Like [`Self::delta_for_move`] but ignores the impossible-link count when
    /// it is unchanged, which lets search compare moves among impossible states.
    pub(crate) fn delta_lexicographic(&mut self, mv: Move) -> (i64, f64) {
        let d = self.delta_parts(mv);
        (d.impossible, d.finite)
    }

    /// Applies `mv` and refreshes every affected cached score.
    pub fn commit(&mut self, mv: Move) -> Result<(), ModelError> {
        self.check(mv)?;
        let mut updates = Vec::new();
        self.for_each_affected(mv, |state, li, count, size| {
            updates.push((li, state.best_for_link(li, Some((mv.group, count, size)))));
        });
        let k = self.chart.k();
        match mv.direction {
            Direction::Add => {
                self.chart.add(mv.entity, mv.group);
                for &li in &self.entity_links[mv.entity] {
                    self.overlap[li * k + mv.group] += 1;
                }
            }
            Direction::Remove => {
                self.chart.remove(mv.entity, mv.group);
                for &li in &self.entity_links[mv.entity] {
                    self.overlap[li * k + mv.group] -= 1;
                }
            }
        }
        let mut delta = Delta {
            impossible: 0,
            finite: 0.0,
        };
        for (li, (explanation, value)) in updates {
            delta.accumulate(self.scored.values[li], value);
            self.scored.explanations[li] = explanation;
            self.scored.values[li] = value;
        }
        self.scored.finite_sum += delta.finite;
        self.scored.impossible = (self.scored.impossible as i64 + delta.impossible) as usize;
        Ok(())
    }

    /// Re-adds the cached per-link values to shed accumulated rounding.
    pub fn resync(&mut self) {
        self.scored.resum();
    }
}

/// Final per-entity assignment: `Some(group)` or `None` for an outlier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusteringResult {
    pub assignment: Vec<Option<usize>>,
    pub k: usize,
    pub coverage: usize,
}

impl ClusteringResult {
    pub fn n_entities(&self) -> usize {
        self.assignment.len()
    }

    /// `entity_id TAB cluster_or_OUTLIER`, one-based.
    pub fn write<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        crate::eval::write_labels(out, &self.assignment)
    }
}

/// Collapses a chart into a hard clustering. Entities with several
/// memberships go to the group that explains the most of their links
/// (lowest group on ties); entities without membership are outliers.
pub fn resolve_chart(
    chart: &Chart,
    links: &LinkDataset,
    scored: &ScoredAssignment,
) -> ClusteringResult {
    let entity_links = links.entity_links();
    let assignment: Vec<Option<usize>> = (0..chart.n_entities())
        .map(|e| match chart.groups_of(e) {
            [] => None,
            [g] => Some(*g),
            groups => {
                let affinity = |g: usize| {
                    entity_links[e]
                        .iter()
                        .filter(|&&li| scored.explanations[li] == Explanation::Group(g))
                        .count()
                };
                let mut best = groups[0];
                let mut best_aff = affinity(best);
                for &g in &groups[1..] {
                    let a = affinity(g);
                    if a > best_aff {
                        best = g;
                        best_aff = a;
                    }
                }
                Some(best)
            }
        })
        .collect();
    let coverage = assignment.iter().filter(|a| a.is_some()).count();
    ClusteringResult {
        assignment,
        k: chart.k(),
        coverage,
    }
}
