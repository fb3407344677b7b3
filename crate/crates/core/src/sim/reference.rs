use std::cmp::Ordering;
use std::f64::consts::PI;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use super::straight::approach_speed;
use super::{max_acceleration, reorientation_rate, Decision, Observation, Planner, PlannerCommand, TrialContext};
use crate::geometry::Vec3;
use crate::scenegen::OccupancyGrid;

/// Tunables of the grid A* reference planner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceParams {
    /// Finest planning resolution, m.
    pub resolution: f64,
    /// The resolution is coarsened until the grid fits in this many cells.
    pub max_cells: usize,
    /// Extra inflation beyond the vehicle radius, m.
    pub safety_margin: f64,
    pub replan_hz: f64,
    /// Pull back toward the path per metre of cross-track error, 1/s.
    pub cross_track_gain: f64,
    /// Corner look-ahead beyond the stopping distance, m.
    pub corner_reach: f64,
    /// Share of the acceleration limit budgeted for braking into corners.
    pub braking_share: f64,
    /// Speed at a path vertex as a share of `v_max`, per unit cosine of the
    /// turn angle, never below `min_corner_share`.
    pub min_corner_share: f64,
    /// Node expansions allowed per search.
    pub max_expansions: usize,
    /// Consecutive failed searches before giving up.
    pub failure_limit: u32,
    /// Heuristic inflation; 1 gives optimal paths.
    pub heuristic_weight: f64,
    /// The vehicle must be able to stop this far inside sensing range, m.
    pub sensing_reserve: f64,
}

impl Default for ReferenceParams {
    fn default() -> Self {
        ReferenceParams {
            resolution: 0.25,
            max_cells: 1_000_000,
            safety_margin: 0.25,
            replan_hz: 5.0,
            cross_track_gain: 2.0,
            corner_reach: 1.5,
            braking_share: 0.5,
            min_corner_share: 0.15,
            max_expansions: 400_000,
            failure_limit: 3,
            heuristic_weight: 1.2,
            sensing_reserve: 1.0,
        }
    }
}

/// Grid A* over the inflated occupancy sensed so far, with unknown space
/// treated as free, followed by tangent tracking along the shortcut path.
#[derive(Debug, Clone)]
pub struct ReferencePlanner {
    params: ReferenceParams,
    trial: Option<TrialState>,
}

pub fn greedy_reference_planner(params: ReferenceParams) -> ReferencePlanner {
    ReferencePlanner { params, trial: None }
}

impl Default for ReferencePlanner {
    fn default() -> Self {
        greedy_reference_planner(ReferenceParams::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Open {
    f: f64,
    node: u32,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other.f.total_cmp(&self.f).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
struct TrialState {
    context: TrialContext,
    grid: OccupancyGrid,
    inflation: f64,
    /// Admissible cell index range per axis, inclusive.
    band: [(usize, usize); 3],
    seen: HashSet<u32>,
    map_changed: bool,
    path: Vec<Vec3>,
    progress: usize,
    failures: u32,
    replan_every: u64,
    g: Vec<f32>,
    parent: Vec<u32>,
    stamp: Vec<u32>,
    closed: Vec<u32>,
    generation: u32,
}

const NEIGHBOURS: usize = 26;

fn neighbour_offsets() -> [(i32, i32, i32, f64); NEIGHBOURS] {
    let mut out = [(0, 0, 0, 0.0); NEIGHBOURS];
    let mut n = 0;
    for dk in -1..=1 {
        for dj in -1..=1 {
            for di in -1..=1 {
                if (di, dj, dk) != (0, 0, 0) {
                    out[n] = (di, dj, dk, ((di * di + dj * dj + dk * dk) as f64).sqrt());
                    n += 1;
                }
            }
        }
    }
    out
}

impl TrialState {
    fn new(params: &ReferenceParams, context: &TrialContext) -> Self {
        let [w, l] = context.bounds;
        let volume = w * l * context.ceiling;
        let resolution = params.resolution.max((volume / params.max_cells as f64).cbrt());
        let grid = OccupancyGrid::empty(resolution, Vec3::new(w, l, context.ceiling));
        let inflation = context.task.vehicle_radius + params.safety_margin;
        let dims = grid.dims();
        let floor = context.task.vehicle_radius + 0.1;
        let top = context.ceiling - 0.2;
        let lo_hi = |lo: f64, hi: f64, n: usize| -> (usize, usize) {
            let a = ((lo / resolution) - 0.5).ceil().max(0.0) as usize;
            let b = ((hi / resolution) - 0.5).floor().min(n as f64 - 1.0).max(-1.0);
            (a, if b < 0.0 { 0 } else { b as usize }.max(a.saturating_sub(1)))
        };
        let band = [
            lo_hi(inflation, w - inflation, dims[0]),
            lo_hi(inflation, l - inflation, dims[1]),
            lo_hi(floor, top, dims[2]),
        ];
        let n = grid.len();
        let replan_every = ((1.0 / (params.replan_hz * context.task.dt)).round() as u64).max(1);
        TrialState {
            context: context.clone(),
            grid,
            inflation,
            band,
            seen: HashSet::new(),
            map_changed: false,
            path: Vec::new(),
            progress: 0,
            failures: 0,
            replan_every,
            g: vec![0.0; n],
            parent: vec![0; n],
            stamp: vec![0; n],
            closed: vec![0; n],
            generation: 0,
        }
    }

    fn flat(&self, c: [usize; 3]) -> u32 {
        let [nx, ny, _] = self.grid.dims();
        ((c[2] * ny + c[1]) * nx + c[0]) as u32
    }

    fn unflat(&self, n: u32) -> [usize; 3] {
        let [nx, ny, _] = self.grid.dims();
        let n = n as usize;
        [n % nx, (n / nx) % ny, n / (nx * ny)]
    }

    fn blocked(&self, c: [usize; 3]) -> bool {
        (0..3).any(|k| c[k] < self.band[k].0 || c[k] > self.band[k].1) || self.grid.get(c[0], c[1], c[2])
    }

    fn blocked_at(&self, p: &Vec3) -> bool {
        self.grid.cell_of(p).is_none_or(|c| self.blocked(c))
    }

    /// Occupy every cell whose box comes within the inflation radius of `p`,
    /// so that all of a free cell keeps that distance.
    fn mark_point(&mut self, p: &Vec3) {
        let res = self.grid.resolution();
        let dims = self.grid.dims();
        let r = self.inflation;
        let lo = [0, 1, 2].map(|k| ((p[k] - r) / res).floor().max(0.0) as usize);
        let hi = [0, 1, 2].map(|k| ((p[k] + r) / res).floor().min(dims[k] as f64 - 1.0));
        if hi.iter().any(|&h| h < 0.0) {
            return;
        }
        let hi = hi.map(|h| h as usize);
        let half = Vec3::repeat(0.5 * res);
        for k in lo[2]..=hi[2] {
            for j in lo[1]..=hi[1] {
                for i in lo[0]..=hi[0] {
                    if self.grid.get(i, j, k) {
                        continue;
                    }
                    let c = self.grid.centre(i, j, k);
                    let gap = ((p - c).abs() - half).map(|v| v.max(0.0));
                    if gap.norm() <= r {
                        self.grid.set(i, j, k);
                        self.map_changed = true;
                    }
                }
            }
        }
    }

    fn line_of_sight(&self, a: &Vec3, b: &Vec3) -> bool {
        let len = (b - a).norm();
        let n = (len / (0.5 * self.grid.resolution())).ceil().max(1.0) as usize;
        (0..=n).all(|s| !self.blocked_at(&(a + (b - a) * (s as f64 / n as f64))))
    }

    /// Nearest admissible cell to `p` within a few cells, for when the
    /// vehicle sits inside inflated space.
    fn escape_cell(&self, p: &Vec3) -> Option<[usize; 3]> {
        let dims = self.grid.dims();
        let res = self.grid.resolution();
        let c = [0, 1, 2].map(|k| ((p[k] / res).floor().max(0.0) as usize).min(dims[k] - 1));
        let reach = 6i64;
        let mut best: Option<(f64, [usize; 3])> = None;
        for dk in -reach..=reach {
            for dj in -reach..=reach {
                for di in -reach..=reach {
                    let q = [c[0] as i64 + di, c[1] as i64 + dj, c[2] as i64 + dk];
                    if (0..3).any(|k| q[k] < 0 || q[k] >= dims[k] as i64) {
                        continue;
                    }
                    let q = q.map(|v| v as usize);
                    if self.blocked(q) {
                        continue;
                    }
                    let d = (self.grid.centre(q[0], q[1], q[2]) - p).norm();
                    if best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, q));
                    }
                }
            }
        }
        best.map(|(_, q)| q)
    }

    fn search(&mut self, from: &Vec3, params: &ReferenceParams) -> Option<Vec<Vec3>> {
        let goal = self.context.goal;
        let goal_cell = self.grid.cell_of(&goal)?;
        if self.blocked(goal_cell) {
            return None;
        }
        let start_cell = match self.grid.cell_of(from) {
            Some(c) if !self.blocked(c) => c,
            _ => self.escape_cell(from)?,
        };

        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.fill(0);
            self.closed.fill(0);
            self.generation = 1;
        }
        let gen = self.generation;
        let res = self.grid.resolution();
        let dims = self.grid.dims();
        let offsets = neighbour_offsets();
        let goal_centre = self.grid.centre(goal_cell[0], goal_cell[1], goal_cell[2]);
        let h = |c: [usize; 3], grid: &OccupancyGrid| (grid.centre(c[0], c[1], c[2]) - goal_centre).norm();

        let s = self.flat(start_cell);
        let target = self.flat(goal_cell);
        self.stamp[s as usize] = gen;
        self.g[s as usize] = 0.0;
        self.parent[s as usize] = s;
        let mut open = BinaryHeap::new();
        open.push(Open { f: params.heuristic_weight * h(start_cell, &self.grid), node: s });
        let mut expansions = 0usize;
        let mut found = false;
        while let Some(Open { node, .. }) = open.pop() {
            if self.closed[node as usize] == gen {
                continue;
            }
            self.closed[node as usize] = gen;
            if node == target {
                found = true;
                break;
            }
            expansions += 1;
            if expansions > params.max_expansions {
                break;
            }
            let c = self.unflat(node);
            let g_here = self.g[node as usize] as f64;
            for &(di, dj, dk, step) in &offsets {
                let q = [c[0] as i64 + di as i64, c[1] as i64 + dj as i64, c[2] as i64 + dk as i64];
                if (0..3).any(|k| q[k] < 0 || q[k] >= dims[k] as i64) {
                    continue;
                }
                let q = q.map(|v| v as usize);
                if self.blocked(q) {
                    continue;
                }
                let n = self.flat(q) as usize;
                if self.closed[n] == gen {
                    continue;
                }
                let g_new = g_here + step * res;
                if self.stamp[n] != gen || g_new < self.g[n] as f64 {
                    self.stamp[n] = gen;
                    self.g[n] = g_new as f32;
                    self.parent[n] = node;
                    open.push(Open { f: g_new + params.heuristic_weight * h(q, &self.grid), node: n as u32 });
                }
            }
        }
        if !found {
            return None;
        }

        let mut cells = vec![target];
        let mut cur = target;
        while self.parent[cur as usize] != cur {
            cur = self.parent[cur as usize];
            cells.push(cur);
        }
        cells.reverse();
        let mut raw = vec![*from];
        raw.extend(cells.iter().map(|&n| {
            let c = self.unflat(n);
            self.grid.centre(c[0], c[1], c[2])
        }));
        raw.push(goal);
        Some(self.shortcut(raw))
    }

    fn shortcut(&self, raw: Vec<Vec3>) -> Vec<Vec3> {
        let mut out = vec![raw[0]];
        let mut i = 0;
        while i + 1 < raw.len() {
            let mut j = raw.len() - 1;
            while j > i + 1 && !self.line_of_sight(&raw[i], &raw[j]) {
                j -= 1;
            }
            out.push(raw[j]);
            i = j;
        }
        out
    }

    fn path_clear(&self) -> bool {
        let start = self.progress + 1;
        self.path.windows(2).skip(start).all(|w| self.line_of_sight(&w[0], &w[1]))
    }

    /// Closest point on the remaining path and its segment index.
    fn project(&self, p: &Vec3) -> (usize, Vec3, f64) {
        let mut best = (self.progress, self.path[self.progress], f64::INFINITY);
        for (i, w) in self.path.windows(2).enumerate().skip(self.progress) {
            let d = w[1] - w[0];
            let len2 = d.norm_squared();
            let t = if len2 > 0.0 { ((p - w[0]).dot(&d) / len2).clamp(0.0, 1.0) } else { 0.0 };
            let q = w[0] + d * t;
            let dist = (p - q).norm();
            if dist <= best.2 {
                best = (i, q, dist);
            }
        }
        best
    }

    /// Highest speed from which every upcoming vertex can be reached at its
    /// corner speed, braking at `braking` after a thrust swing lasting `swing`
    /// seconds, looking `reach` beyond the stopping distance. A vertex's corner
    /// speed follows the cosine of the heading change between the current
    /// segment and the segment leaving it.
    #[allow(clippy::too_many_arguments)]
    fn corner_limit(
        &self,
        segment: usize,
        from: Vec3,
        braking: f64,
        swing: f64,
        v_max: f64,
        min_share: f64,
        reach: f64,
    ) -> f64 {
        let horizon = v_max * v_max / (2.0 * braking) + v_max * swing + reach;
        let heading = self.path[segment + 1] - self.path[segment];
        if heading.norm() < 1e-9 {
            return v_max;
        }
        let heading = heading.normalize();
        let mut limit = v_max;
        let mut along = 0.0;
        let mut here = from;
        for k in segment + 1..self.path.len() {
            along += (self.path[k] - here).norm();
            here = self.path[k];
            if along > horizon {
                break;
            }
            let corner = match self.path.get(k + 1) {
                Some(next) => {
                    let out = next - self.path[k];
                    let cos = if out.norm() > 1e-9 { heading.dot(&out.normalize()) } else { 1.0 };
                    v_max * cos.max(min_share)
                }
                None => 0.0,
            };
            limit = limit.min(entry_speed(along, corner, braking, swing));
        }
        limit
    }

    /// Unit direction of the path segment starting at `segment`.
    fn tangent(&self, segment: usize) -> Option<Vec3> {
        let d = self.path[segment + 1] - self.path[segment];
        (d.norm() > 1e-9).then(|| d.normalize())
    }
}

/// Largest `v` with `v·swing + (v² − exit²)/(2·braking) ≤ distance`: the
/// vehicle coasts while the thrust swings round, then brakes down to `exit`.
fn entry_speed(distance: f64, exit: f64, braking: f64, swing: f64) -> f64 {
    let bt = braking * swing;
    -bt + (bt * bt + exit * exit + 2.0 * braking * distance.max(0.0)).sqrt()
}

impl ReferencePlanner {
    pub fn params(&self) -> &ReferenceParams {
        &self.params
    }

    /// Current planned path, if any.
    pub fn current_path(&self) -> &[Vec3] {
        self.trial.as_ref().map_or(&[], |t| t.path.as_slice())
    }
}

impl Planner for ReferencePlanner {
    fn name(&self) -> &str {
        "reference"
    }

    fn reset(&mut self, context: &TrialContext, _seed: u64) {
        self.trial = Some(TrialState::new(&self.params, context));
    }

    fn observe(&mut self, obs: &Observation<'_>) -> Decision {
        let params = self.params;
        let t = self.trial.as_mut().expect("reset before observe");
        let pos = obs.state.position;

        if obs.step.is_multiple_of(t.replan_every) {
            for id in obs.local_point_ids() {
                if t.seen.insert(id) {
                    t.mark_point(&obs.point(id));
                }
            }
            let deviated = !t.path.is_empty() && t.project(&pos).2 > 1.0;
            if t.path.is_empty() || t.map_changed || deviated || !t.path_clear() {
                t.map_changed = false;
                match t.search(&pos, &params) {
                    Some(path) => {
                        t.path = path;
                        t.progress = 0;
                        t.failures = 0;
                    }
                    None => {
                        t.path.clear();
                        t.failures += 1;
                        if t.failures >= params.failure_limit {
                            return Decision::NoPath(format!("no path to goal after {} searches", t.failures));
                        }
                    }
                }
            }
        }

        if t.path.len() < 2 {
            return Decision::Command(PlannerCommand::hover());
        }
        let (segment, foot, _) = t.project(&pos);
        t.progress = segment;
        let task = &t.context.task;
        let braking = params.braking_share * max_acceleration(&t.context.profile);
        let Some(tangent) = t.tangent(segment) else {
            return Decision::Command(PlannerCommand::hover());
        };
        let d_goal = (t.context.goal - pos).norm();
        let sensing_room = (task.sensing_radius - params.sensing_reserve).max(0.5);
        let swing = PI / reorientation_rate(&t.context.profile);
        let mut speed = approach_speed(d_goal, task.v_max, 2.0 * task.goal_radius, braking)
            .min(entry_speed(sensing_room, 0.0, braking, swing))
            .min(t.corner_limit(segment, foot, braking, swing, task.v_max, params.min_corner_share, params.corner_reach));
        if obs.state.speed() > 0.5 {
            speed *= obs.state.velocity.normalize().dot(&tangent).max(0.25);
        }
        // Along-track at `speed`, plus a correction that pulls back onto the path.
        let correction = (foot - pos) * params.cross_track_gain;
        let want = tangent * speed + correction;
        let cap = speed.max(correction.norm()).min(task.v_max);
        let dir = if want.norm() > 1e-9 { want.normalize() } else { tangent };
        let speed = want.norm().min(cap);
        Decision::Command(PlannerCommand::velocity(dir * speed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Obstacle;
    use crate::kinodyn::KinodynamicProfile;
    use crate::scenegen::{Family, Scene};
    use crate::sim::{run_trial, Outcome, TaskSpec};

    fn profile() -> KinodynamicProfile {
        KinodynamicProfile::new(2.2, 114.7, 8.4).unwrap()
    }

    fn path_length(path: &[Vec3]) -> f64 {
        path.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    #[test]
    fn empty_scene_flies_nearly_straight() {
        let scene = Scene::empty(Family::Forest, 0, 1);
        let mut planner = ReferencePlanner::default();
        let res = run_trial(&mut planner, &scene, &profile(), &TaskSpec::default(), 1).unwrap();
        assert_eq!(res.outcome, Outcome::Success);
        let straight = (scene.goal - scene.start_position()).norm();
        let flown = path_length(&res.path);
        assert!(flown < straight + 2.0 * 0.25, "{flown} vs {straight}");
        assert!(flown > straight - 2.0);
    }

    #[test]
    fn offset_pillar_is_avoided_with_lateral_deviation() {
        let mut scene = Scene::empty(Family::Forest, 0, 1);
        scene.obstacles.push(Obstacle::cylinder(Vec3::new(20.3, 30.0, 0.0), Vec3::z(), 0.6, 3.0));
        let mut planner = ReferencePlanner::default();
        let res = run_trial(&mut planner, &scene, &profile(), &TaskSpec::default(), 1).unwrap();
        assert_eq!(res.outcome, Outcome::Success, "{:?}", res.diagnostic);
        let deviation = res.path.iter().map(|p| (p.x - 20.0).abs()).fold(0.0, f64::max);
        assert!(deviation > 0.6 + 0.3 - 0.3, "{deviation}");
        assert!(res.min_clearance > 0.0);
    }

    #[test]
    fn sealed_box_gives_plan_failure() {
        let mut scene = Scene::empty(Family::Forest, 0, 1);
        let s = scene.start_position();
        let (lo, hi) = (s - Vec3::new(2.0, 2.0, 1.5), s + Vec3::new(2.0, 2.0, 1.3));
        let t = 0.2;
        let walls = [
            (Vec3::new(lo.x - t, lo.y - t, 0.0), Vec3::new(lo.x, hi.y + t, 3.0)),
            (Vec3::new(hi.x, lo.y - t, 0.0), Vec3::new(hi.x + t, hi.y + t, 3.0)),
            (Vec3::new(lo.x, lo.y - t, 0.0), Vec3::new(hi.x, lo.y, 3.0)),
            (Vec3::new(lo.x, hi.y, 0.0), Vec3::new(hi.x, hi.y + t, 3.0)),
        ];
        for (a, b) in walls {
            scene.obstacles.push(Obstacle::aabb_box(a.map(|v| v.max(0.0)), b));
        }
        scene.bounds = [40.0, 60.0];
        let mut planner = ReferencePlanner::default();
        let res = run_trial(&mut planner, &scene, &profile(), &TaskSpec::default(), 1).unwrap();
        assert_eq!(res.outcome, Outcome::PlanFailure, "{res:?}");
        assert!(res.elapsed < 2.0);
    }

    #[test]
    fn speed_respects_cap() {
        let scene = Scene::empty(Family::Urban, 0, 1);
        let mut planner = ReferencePlanner::default();
        let task = TaskSpec::default();
        let env = crate::sim::SceneEnv::new(scene);
        let opts = crate::sim::TrialOptions { path_every: 1, record_log: true };
        let res = crate::sim::run_trial_in(&mut planner, &env, &profile(), &task, 2, &opts).unwrap();
        for row in &res.log {
            let v = Vec3::new(row.vx, row.vy, row.vz).norm();
            assert!(v <= task.v_max + 1e-9);
        }
    }
}
