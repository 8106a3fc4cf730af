//! Operational task routing over the IoT → UAV-C → MEC graph, end-to-end
//! delay accounting and flow/placement constraint checks.
//!
//! Every task goes to the nearest UAV-C. An active UAV-C processes it
//! locally. An inactive one relays it to the nearest active UAV-C if the hop
//! budget allows (the UAV-C relay graph is complete, so one hop reaches any
//! of them), and otherwise forwards it to the always-on MEC.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::{link_rate, ChannelParams, LinkKind, Position};
use crate::error::{Error, Result};
use crate::scenario::{Task, Topology};

/// A vertex of the communication graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Vertex {
    Iot(usize),
    Uav(usize),
    Mec,
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Iot(i) => write!(f, "iot{i}"),
            Vertex::Uav(j) => write!(f, "uav{j}"),
            Vertex::Mec => write!(f, "mec"),
        }
    }
}

pub type Edge = (Vertex, Vertex);

/// Flow (`y`) and placement (`z`) of one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRoute {
    /// Directed edges the task traverses, in path order.
    pub edges: Vec<Edge>,
    /// Vertices that process the task. A valid route has exactly one.
    pub placements: Vec<Vertex>,
}

impl TaskRoute {
    pub fn processor(&self) -> Option<Vertex> {
        match self.placements.as_slice() {
            [v] => Some(*v),
            _ => None,
        }
    }
}

/// Decisions for one interval. `routes[k]` belongs to the `k`-th task of the
/// slice the assignment was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub interval: usize,
    pub active: Vec<bool>,
    pub routes: Vec<TaskRoute>,
}

/// Processing capacities, load-seconds per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Capacities {
    pub uav: f64,
    pub mec: f64,
}

impl Capacities {
    pub fn of(&self, v: Vertex) -> Result<f64> {
        match v {
            Vertex::Uav(_) => Ok(self.uav),
            Vertex::Mec => Ok(self.mec),
            Vertex::Iot(i) => Err(Error::Domain(format!("IoT device {i} cannot process tasks"))),
        }
    }
}

pub fn vertex_position(topology: &Topology, v: Vertex, t: usize) -> Result<Position> {
    match v {
        Vertex::Iot(i) => topology.iot_position(i),
        Vertex::Uav(j) => topology.uav_position(j, t),
        Vertex::Mec => Ok(topology.mec_position),
    }
}

pub fn link_kind(edge: Edge) -> Result<LinkKind> {
    match edge {
        (Vertex::Iot(_), Vertex::Uav(_)) => Ok(LinkKind::IotToUav),
        (Vertex::Uav(_), Vertex::Uav(_)) => Ok(LinkKind::UavToUav),
        (Vertex::Uav(_), Vertex::Mec) => Ok(LinkKind::UavToMec),
        (g, h) => Err(Error::Domain(format!("no radio link {g} -> {h}"))),
    }
}

/// Route every task of interval `t` under activations `active`.
pub fn route_tasks(
    tasks: &[Task],
    topology: &Topology,
    active: &[bool],
    t: usize,
    max_relay_hops: usize,
) -> Result<Assignment> {
    let num_uav = topology.num_uav();
    if active.len() != num_uav {
        return Err(Error::Shape(format!(
            "{} activation bits for {num_uav} UAV-Cs",
            active.len()
        )));
    }
    let mut first_hop = vec![None; topology.num_iot()];
    let mut relay_target: Vec<Option<Option<usize>>> = vec![None; num_uav];
    let mut routes = Vec::with_capacity(tasks.len());
    for task in tasks {
        let first = match first_hop.get(task.iot) {
            Some(Some(j)) => *j,
            Some(None) => {
                let j = topology.nearest_uav(&topology.iot_position(task.iot)?, t)?;
                first_hop[task.iot] = Some(j);
                j
            }
            None => {
                return Err(Error::OutOfRange {
                    what: "IoT device",
                    index: task.iot,
                    len: topology.num_iot(),
                })
            }
        };
        let mut edges = vec![(Vertex::Iot(task.iot), Vertex::Uav(first))];
        let processor = if active[first] {
            Vertex::Uav(first)
        } else {
            let target = match relay_target[first] {
                Some(target) => target,
                None => {
                    let target = if max_relay_hops >= 1 {
                        nearest_active(topology, first, active, t)?
                    } else {
                        None
                    };
                    relay_target[first] = Some(target);
                    target
                }
            };
            match target {
                Some(k) => {
                    edges.push((Vertex::Uav(first), Vertex::Uav(k)));
                    Vertex::Uav(k)
                }
                None => {
                    edges.push((Vertex::Uav(first), Vertex::Mec));
                    Vertex::Mec
                }
            }
        };
        routes.push(TaskRoute { edges, placements: vec![processor] });
    }
    Ok(Assignment { interval: t, active: active.to_vec(), routes })
}

fn nearest_active(topology: &Topology, from: usize, active: &[bool], t: usize) -> Result<Option<usize>> {
    let origin = topology.uav_position(from, t)?;
    let mut best = None;
    let mut best_d = f64::INFINITY;
    for (k, &on) in active.iter().enumerate() {
        if !on || k == from {
            continue;
        }
        let d = origin.distance(&topology.uav_position(k, t)?);
        if d < best_d {
            best_d = d;
            best = Some(k);
        }
    }
    Ok(best)
}

/// Delays of one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayReport {
    /// Aggregate link delay of every used edge: total bits over link rate.
    pub edge_delays: BTreeMap<Edge, f64>,
    /// Aggregate processing delay of every used processor: total load over capacity.
    pub node_delays: BTreeMap<Vertex, f64>,
    pub task_delays: Vec<f64>,
    pub violations: Vec<bool>,
}

impl DelayReport {
    pub fn violation_count(&self) -> usize {
        self.violations.iter().filter(|&&v| v).count()
    }
}

/// Number of distinct outgoing edges per source vertex; each source splits
/// its bandwidth equally among them.
pub fn outgoing_link_counts<'a>(edges: impl IntoIterator<Item = &'a Edge>) -> BTreeMap<Vertex, usize> {
    let mut counts = BTreeMap::new();
    for (g, _) in edges {
        *counts.entry(*g).or_insert(0) += 1;
    }
    counts
}

/// Rate of `edge` during interval `t` when its source has `share` outgoing links.
pub fn edge_rate(
    topology: &Topology,
    edge: Edge,
    t: usize,
    share: usize,
    channel: &ChannelParams,
) -> Result<f64> {
    let src = vertex_position(topology, edge.0, t)?;
    let dst = vertex_position(topology, edge.1, t)?;
    link_rate(&src, &dst, link_kind(edge)?, share, channel)
}

/// Link, processing and end-to-end delays of every task in the assignment.
pub fn compute_delays(
    assignment: &Assignment,
    tasks: &[Task],
    topology: &Topology,
    channel: &ChannelParams,
    capacities: &Capacities,
) -> Result<DelayReport> {
    if assignment.routes.len() != tasks.len() {
        return Err(Error::Shape(format!(
            "{} routes for {} tasks",
            assignment.routes.len(),
            tasks.len()
        )));
    }
    let t = assignment.interval;
    let mut bits: BTreeMap<Edge, f64> = BTreeMap::new();
    let mut loads: BTreeMap<Vertex, f64> = BTreeMap::new();
    for (task, route) in tasks.iter().zip(&assignment.routes) {
        for e in &route.edges {
            *bits.entry(*e).or_insert(0.0) += task.packet_bits;
        }
        for v in &route.placements {
            *loads.entry(*v).or_insert(0.0) += task.load;
        }
    }

    let shares = outgoing_link_counts(bits.keys());
    let mut edge_delays = BTreeMap::new();
    for (&edge, &b) in &bits {
        let rate = edge_rate(topology, edge, t, shares[&edge.0], channel)?;
        if !(rate > 0.0) {
            return Err(Error::UnreachableLink {
                from: edge.0.to_string(),
                to: edge.1.to_string(),
                rate,
            });
        }
        edge_delays.insert(edge, b / rate);
    }
    let mut node_delays = BTreeMap::new();
    for (&v, &load) in &loads {
        node_delays.insert(v, load / capacities.of(v)?);
    }

    let mut task_delays = Vec::with_capacity(tasks.len());
    let mut violations = Vec::with_capacity(tasks.len());
    for (task, route) in tasks.iter().zip(&assignment.routes) {
        let link: f64 = route.edges.iter().map(|e| edge_delays[e]).sum();
        let processing: f64 = route.placements.iter().map(|v| node_delays[v]).sum();
        let delay = link + processing;
        task_delays.push(delay);
        violations.push(delay > task.deadline_s);
    }
    Ok(DelayReport { edge_delays, node_delays, task_delays, violations })
}

/// Which vertex absorbs a task's unit of flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowSink {
    /// The task's processing vertex.
    #[default]
    Processor,
    /// Always the MEC.
    Mec,
}

/// Unit flow leaves the task's IoT device, enters its sink, and is conserved
/// everywhere else along a single simple path.
pub fn check_flow_conservation(route: &TaskRoute, task: &Task) -> bool {
    check_flow_with_sink(route, task, FlowSink::Processor)
}

pub fn check_flow_with_sink(route: &TaskRoute, task: &Task, sink: FlowSink) -> bool {
    let source = Vertex::Iot(task.iot);
    let terminal = match sink {
        FlowSink::Mec => Vertex::Mec,
        FlowSink::Processor => match route.processor() {
            Some(v) => v,
            None => return false,
        },
    };
    if source == terminal || route.edges.is_empty() {
        return false;
    }
    let mut out: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
    let mut net: BTreeMap<Vertex, i64> = BTreeMap::new();
    let mut indegree: BTreeMap<Vertex, usize> = BTreeMap::new();
    for &(g, h) in &route.edges {
        out.entry(g).or_default().push(h);
        *net.entry(g).or_insert(0) += 1;
        *net.entry(h).or_insert(0) -= 1;
        *indegree.entry(h).or_insert(0) += 1;
    }
    if out.values().any(|v| v.len() > 1) || indegree.values().any(|&d| d > 1) {
        return false;
    }
    for (&v, &flow) in &net {
        let expected = if v == source {
            1
        } else if v == terminal {
            -1
        } else {
            0
        };
        if flow != expected {
            return false;
        }
    }
    if net.get(&source) != Some(&1) || net.get(&terminal) != Some(&-1) {
        return false;
    }
    // the edges must form one path, not a path plus detached cycles
    let mut walked = 0;
    let mut at = source;
    while let Some(next) = out.get(&at) {
        at = next[0];
        walked += 1;
        if walked > route.edges.len() {
            return false;
        }
    }
    walked == route.edges.len() && at == terminal
}

/// A broken placement or activation constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConstraintViolation {
    /// The task is not processed by exactly one vertex.
    PlacementCount { task: usize, count: usize },
    /// No path edge delivers the task to its processing vertex.
    Unreached { task: usize },
    /// More tasks are processed at a UAV-C than `M^BIG · x_j` allows.
    Activation { uav: usize, tasks: usize, active: bool },
}

/// Placement, reachability and big-M activation constraints, with
/// `M^BIG` equal to the number of tasks.
pub fn validate_assignment(assignment: &Assignment) -> Vec<ConstraintViolation> {
    validate_with_big_m(assignment, assignment.routes.len() as f64)
}

pub fn validate_with_big_m(assignment: &Assignment, big_m: f64) -> Vec<ConstraintViolation> {
    let mut out = Vec::new();
    let mut per_uav: BTreeMap<usize, usize> = BTreeMap::new();
    for (k, route) in assignment.routes.iter().enumerate() {
        if route.placements.len() != 1 {
            out.push(ConstraintViolation::PlacementCount { task: k, count: route.placements.len() });
        }
        let reached = route
            .placements
            .iter()
            .map(|v| route.edges.iter().filter(|(_, h)| h == v).count())
            .sum::<usize>();
        if reached != 1 {
            out.push(ConstraintViolation::Unreached { task: k });
        }
        for v in &route.placements {
            if let Vertex::Uav(j) = v {
                *per_uav.entry(*j).or_insert(0) += 1;
            }
        }
    }
    for (&j, &count) in &per_uav {
        let on = assignment.active.get(j).copied().unwrap_or(false);
        let bound = if on { big_m } else { 0.0 };
        if count as f64 > bound {
            out.push(ConstraintViolation::Activation { uav: j, tasks: count, active: on });
        }
    }
    out
}
