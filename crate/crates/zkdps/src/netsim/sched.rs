//! Shard placement: longest-processing-time onto weighted nodes.
//!
//! Each shard's cost is its total multiply count; each node has a speed
//! weight, so a node's projected finish time after taking a shard is
//! `(load + cost) / speed`. Shards are placed in descending cost order on
//! the `redundancy` nodes with the smallest projected finish times, with
//! gpu-class nodes preferred on ties (which puts the costliest shards on
//! gpus first) and node id as the final tie-break. Comparisons are done by
//! cross-multiplication in 128-bit integers, so the schedule is exact and
//! deterministic.

use std::collections::{BTreeMap, BTreeSet};

use rand::RngCore;

use super::attest::IdentityKey;
use super::NetsimError;
use crate::algebra::CurveGroup;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NodeClass {
    Gpu,
    Cpu,
}

impl NodeClass {
    pub fn parse(s: &str) -> Option<NodeClass> {
        match s {
            "gpu" => Some(NodeClass::Gpu),
            "cpu" => Some(NodeClass::Cpu),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeClass::Gpu => "gpu",
            NodeClass::Cpu => "cpu",
        }
    }

    fn rank(self) -> u8 {
        match self {
            NodeClass::Gpu => 0,
            NodeClass::Cpu => 1,
        }
    }
}

/// A registered compute node: identity, capability class, relative speed
/// weight, and the scenario's honesty flag.
pub struct NodeDescriptor {
    pub id: u32,
    pub class: NodeClass,
    /// Relative execution speed; running a shard of cost `c` takes
    /// `ceil(c / speed)` virtual ticks.
    pub speed: u32,
    pub honest: bool,
    pub identity: IdentityKey,
}

impl NodeDescriptor {
    pub fn new(
        group: &CurveGroup,
        rng: &mut impl RngCore,
        id: u32,
        class: NodeClass,
        speed: u32,
        honest: bool,
    ) -> Self {
        NodeDescriptor {
            id,
            class,
            speed,
            honest,
            identity: IdentityKey::generate(group, rng),
        }
    }
}

/// Placement result: assigned node ids per shard (in shard order) and the
/// total raw cost placed on each node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub assignees: Vec<Vec<u32>>,
    pub loads: BTreeMap<u32, u64>,
}

/// Virtual ticks for a cost on a node of the given speed.
pub fn ticks(cost: u64, speed: u32) -> u64 {
    cost.div_ceil(speed as u64).max(1)
}

pub fn schedule_shards(
    costs: &[u64],
    nodes: &[NodeDescriptor],
    redundancy: usize,
) -> Result<Schedule, NetsimError> {
    if nodes.is_empty() {
        return Err(NetsimError::NoNodes);
    }
    if redundancy == 0 || redundancy > nodes.len() {
        return Err(NetsimError::BadScenario(format!(
            "redundancy {} must be between 1 and the node count {}",
            redundancy,
            nodes.len()
        )));
    }
    if let Some(n) = nodes.iter().find(|n| n.speed == 0) {
        return Err(NetsimError::BadScenario(format!(
            "node {} has zero speed",
            n.id
        )));
    }
    let mut seen = BTreeSet::new();
    if let Some(n) = nodes.iter().find(|n| !seen.insert(n.id)) {
        return Err(NetsimError::BadScenario(format!(
            "duplicate node id {}",
            n.id
        )));
    }

    let mut order: Vec<usize> = (0..costs.len()).collect();
    order.sort_by(|&i, &j| costs[j].cmp(&costs[i]).then(i.cmp(&j)));

    let mut loads: BTreeMap<u32, u64> = nodes.iter().map(|n| (n.id, 0)).collect();
    let mut assignees = vec![Vec::new(); costs.len()];
    for &s in &order {
        let mut ranked: Vec<&NodeDescriptor> = nodes.iter().collect();
        ranked.sort_by(|a, b| {
            // finish_a < finish_b  ⟺  (load_a + c)·speed_b < (load_b + c)·speed_a
            let fa = (loads[&a.id] + costs[s]) as u128 * b.speed as u128;
            let fb = (loads[&b.id] + costs[s]) as u128 * a.speed as u128;
            fa.cmp(&fb)
                .then(a.class.rank().cmp(&b.class.rank()))
                .then(a.id.cmp(&b.id))
        });
        for node in ranked.iter().take(redundancy) {
            assignees[s].push(node.id);
            *loads.get_mut(&node.id).expect("known id") += costs[s];
        }
    }
    Ok(Schedule { assignees, loads })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::CurveProfile;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn nodes(specs: &[(u32, NodeClass, u32)]) -> Vec<NodeDescriptor> {
        let group = CurveProfile::builtin_test().group().unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        specs
            .iter()
            .map(|&(id, class, speed)| NodeDescriptor::new(&group, &mut rng, id, class, speed, true))
            .collect()
    }

    #[test]
    fn single_node_takes_everything() {
        let ns = nodes(&[(5, NodeClass::Cpu, 1)]);
        let sched = schedule_shards(&[10, 20, 30], &ns, 1).unwrap();
        assert_eq!(sched.assignees, vec![vec![5], vec![5], vec![5]]);
        assert_eq!(sched.loads[&5], 60);
    }

    #[test]
    fn double_speed_node_carries_about_double_the_cost() {
        let ns = nodes(&[(0, NodeClass::Cpu, 1), (1, NodeClass::Cpu, 2)]);
        let costs = vec![6u64; 21];
        let sched = schedule_shards(&costs, &ns, 1).unwrap();
        let slow = sched.loads[&0] as i128;
        let fast = sched.loads[&1] as i128;
        assert_eq!(slow + fast, 6 * 21);
        assert!(
            (fast - 2 * slow).abs() <= 6,
            "fast={fast} slow={slow}: ratio should be 2 within one shard"
        );
    }

    #[test]
    fn gpu_preferred_for_the_costliest_shard() {
        // Same speeds; the cpu node has the lower id, so only class
        // preference can send the big shard to the gpu.
        let ns = nodes(&[(0, NodeClass::Cpu, 1), (1, NodeClass::Gpu, 1)]);
        let sched = schedule_shards(&[100, 10], &ns, 1).unwrap();
        assert_eq!(sched.assignees[0], vec![1], "costliest shard on the gpu");
        assert_eq!(sched.assignees[1], vec![0]);
    }

    #[test]
    fn lpt_places_descending_and_balances() {
        let ns = nodes(&[(0, NodeClass::Cpu, 1), (1, NodeClass::Cpu, 1)]);
        // LPT processes costs descending 8,7,6,5: 8→n0 (tie, lower id),
        // 7→n1, 6→n1 (7+6=13 < 8+6), 5→n0 → loads {13, 13}.
        let sched = schedule_shards(&[5, 8, 6, 7], &ns, 1).unwrap();
        assert_eq!(sched.loads[&0], 13);
        assert_eq!(sched.loads[&1], 13);
        assert_eq!(sched.assignees[1], vec![0], "cost 8 placed first on id 0");
    }

    #[test]
    fn redundant_replicas_are_distinct_nodes() {
        let ns = nodes(&[
            (0, NodeClass::Cpu, 1),
            (1, NodeClass::Cpu, 1),
            (2, NodeClass::Gpu, 2),
            (3, NodeClass::Cpu, 3),
        ]);
        let sched = schedule_shards(&[50, 40, 30], &ns, 3).unwrap();
        for replicas in &sched.assignees {
            assert_eq!(replicas.len(), 3);
            let distinct: BTreeSet<_> = replicas.iter().collect();
            assert_eq!(distinct.len(), 3, "replicas must be distinct nodes");
        }
    }

    #[test]
    fn deterministic_for_equal_inputs() {
        let ns = nodes(&[
            (3, NodeClass::Gpu, 2),
            (1, NodeClass::Cpu, 1),
            (2, NodeClass::Cpu, 3),
        ]);
        let costs = [17, 4, 99, 23, 23, 8];
        let a = schedule_shards(&costs, &ns, 2).unwrap();
        let b = schedule_shards(&costs, &ns, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_inputs_rejected() {
        assert!(matches!(
            schedule_shards(&[1], &[], 1).unwrap_err(),
            NetsimError::NoNodes
        ));
        let ns = nodes(&[(0, NodeClass::Cpu, 1)]);
        assert!(schedule_shards(&[1], &ns, 0).is_err());
        assert!(schedule_shards(&[1], &ns, 2).is_err());
        let zero_speed = nodes(&[(0, NodeClass::Cpu, 0)]);
        assert!(schedule_shards(&[1], &zero_speed, 1).is_err());
        let dup = nodes(&[(0, NodeClass::Cpu, 1), (0, NodeClass::Gpu, 1)]);
        assert!(schedule_shards(&[1], &dup, 1).is_err());
    }

    #[test]
    fn tick_model_rounds_up_and_never_returns_zero() {
        assert_eq!(ticks(10, 3), 4);
        assert_eq!(ticks(9, 3), 3);
        assert_eq!(ticks(0, 5), 1);
        assert_eq!(ticks(1, 100), 1);
    }
}
