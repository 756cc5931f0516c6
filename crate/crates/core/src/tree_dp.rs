//! Exact minimum-cost stooge selection on hierarchies (rooted out-trees).
//!
//! On an out-tree every node's equilibrium opinion depends only on its
//! children, and it is non-decreasing in each child's opinion. So for every
//! node `u`, vote count `j` and cost `k`, it suffices to keep the largest
//! opinion `u` can reach using cost exactly `k` with exactly `j` voting nodes
//! of its subtree above the threshold. Children are merged with a
//! two-dimensional knapsack over `(j, k)`.
//!
//! Leaves express their innate opinion whatever their resistance. This is
//! the fixed point of the update for a node without out-neighbors when
//! `alpha > 0`; [`TreeInstance`] sets leaf resistances to 1 so that the
//! general equilibrium solver agrees.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Instance, Network};

/// What a stooge may change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StoogeMode {
    /// Resistance set to 0 or 1.
    #[default]
    ResistanceOnly,
    /// Innate opinion set to 1, resistance kept.
    OpinionOnly,
    /// Opinion and resistance both set to 1: the node expresses 1.
    Both,
}

impl FromStr for StoogeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "resistance" | "resistance-only" => Ok(StoogeMode::ResistanceOnly),
            "opinion" | "opinion-only" => Ok(StoogeMode::OpinionOnly),
            "both" => Ok(StoogeMode::Both),
            other => Err(Error::invalid(format!("unknown stooge mode '{other}'"))),
        }
    }
}

/// The change applied to a stooge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoogeAction {
    Resistance(f64),
    Opinion,
    Both,
}

impl StoogeMode {
    fn actions(self) -> &'static [StoogeAction] {
        match self {
            StoogeMode::ResistanceOnly => &[StoogeAction::Resistance(1.0), StoogeAction::Resistance(0.0)],
            StoogeMode::OpinionOnly => &[StoogeAction::Opinion],
            StoogeMode::Both => &[StoogeAction::Both],
        }
    }
}

/// True iff the network is a rooted tree with every arc pointing away from
/// the root. Self-loops are ignored.
pub fn is_hierarchy(network: &Network) -> bool {
    root_of(network).is_some()
}

fn root_of(network: &Network) -> Option<usize> {
    let n = network.node_count();
    if n == 1 {
        return Some(0);
    }
    if !network.is_directed() {
        return None;
    }
    let mut indeg = vec![0usize; n];
    for u in 0..n {
        for (v, _) in network.out_arcs(u) {
            if v != u {
                indeg[v] += 1;
            }
        }
    }
    let mut roots = (0..n).filter(|&u| indeg[u] == 0);
    let root = roots.next()?;
    if roots.next().is_some() || indeg.iter().any(|&d| d > 1) {
        return None;
    }
    // n - 1 arcs into distinct nodes; the tree is valid iff all are reachable.
    let mut seen = vec![false; n];
    let mut stack = vec![root];
    seen[root] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for (v, _) in network.out_arcs(u) {
            if v != u && !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    (count == n).then_some(root)
}

/// A hierarchy instance with voting mask, stooge costs and stooge mode.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeInstance {
    instance: Instance,
    root: usize,
    children: Vec<Vec<(usize, f64)>>,
    self_weight: Vec<f64>,
    voting: Vec<bool>,
    costs: Vec<usize>,
    mode: StoogeMode,
}

impl TreeInstance {
    /// Wraps a hierarchy instance: every node votes, unit costs,
    /// resistance-only stooges. Leaf resistances are set to 1.
    pub fn new(instance: Instance) -> Result<Self> {
        let net = instance.network();
        let n = net.node_count();
        let root = root_of(net).ok_or_else(|| {
            Error::NotHierarchy("expected a rooted tree with arcs pointing away from the root".into())
        })?;
        let mut children = vec![Vec::new(); n];
        let mut self_weight = vec![0.0; n];
        for (u, kids) in children.iter_mut().enumerate() {
            for (v, w) in net.out_arcs(u) {
                if v == u {
                    self_weight[u] = w;
                } else {
                    kids.push((v, w));
                }
            }
        }
        let mut alpha = instance.alpha().to_vec();
        let mut normalized = 0;
        for u in 0..n {
            if children[u].is_empty() && alpha[u] != 1.0 {
                alpha[u] = 1.0;
                normalized += 1;
            }
        }
        if normalized > 0 {
            log::debug!("set the resistance of {normalized} leaves to 1");
        }
        let instance = instance.with_alpha(alpha)?;
        Ok(TreeInstance {
            instance,
            root,
            children,
            self_weight,
            voting: vec![true; n],
            costs: vec![1; n],
            mode: StoogeMode::default(),
        })
    }

    pub fn with_mode(mut self, mode: StoogeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_voting(mut self, voting: Vec<bool>) -> Result<Self> {
        if voting.len() != self.node_count() {
            return Err(Error::invalid("voting mask length differs from node count"));
        }
        self.voting = voting;
        Ok(self)
    }

    pub fn with_costs(mut self, costs: Vec<usize>) -> Result<Self> {
        if costs.len() != self.node_count() {
            return Err(Error::invalid("cost vector length differs from node count"));
        }
        if costs.contains(&0) {
            return Err(Error::invalid("stooge costs must be positive integers"));
        }
        self.costs = costs;
        Ok(self)
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.instance.node_count()
    }

    pub fn mode(&self) -> StoogeMode {
        self.mode
    }

    pub fn voting(&self) -> &[bool] {
        &self.voting
    }

    pub fn costs(&self) -> &[usize] {
        &self.costs
    }

    pub fn voting_count(&self) -> usize {
        self.voting.iter().filter(|&&v| v).count()
    }

    /// Children before parents.
    fn postorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.node_count());
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            order.push(u);
            stack.extend(self.children[u].iter().map(|&(c, _)| c));
        }
        order.reverse();
        order
    }

    /// Opinion of `u` given `sum = sum_c w_c x_c` over its children (in id order).
    fn node_opinion(&self, u: usize, action: Option<StoogeAction>, sum: f64) -> f64 {
        let s = self.instance.s()[u];
        let alpha = self.instance.alpha()[u];
        let (alpha, s) = match action {
            None => (alpha, s),
            Some(StoogeAction::Resistance(r)) => (r, s),
            Some(StoogeAction::Opinion) => (alpha, 1.0),
            Some(StoogeAction::Both) => return 1.0,
        };
        if self.children[u].is_empty() {
            return s;
        }
        let child_weight: f64 = self.children[u].iter().map(|&(_, w)| w).sum();
        let deg = child_weight + self.self_weight[u];
        let mixed = alpha * s + (1.0 - alpha) * sum / deg;
        if self.self_weight[u] > 0.0 {
            mixed / (1.0 - (1.0 - alpha) * self.self_weight[u] / deg)
        } else {
            mixed
        }
    }

    fn assignment_cost(&self, assignment: &[Option<StoogeAction>]) -> usize {
        assignment
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_some())
            .map(|(u, _)| self.costs[u])
            .sum()
    }

    fn votes_above(&self, x: &[f64], theta: f64) -> usize {
        (0..x.len()).filter(|&u| self.voting[u] && x[u] > theta).count()
    }
}

/// Equilibrium on the hierarchy with stooge actions applied, in one bottom-up pass.
pub fn evaluate_assignment(tree: &TreeInstance, assignment: &[Option<StoogeAction>]) -> Vec<f64> {
    let mut x = vec![0.0; tree.node_count()];
    for u in tree.postorder() {
        let mut sum = 0.0;
        for &(c, w) in &tree.children[u] {
            sum += w * x[c];
        }
        x[u] = tree.node_opinion(u, assignment[u], sum);
    }
    x
}

/// Equilibrium on the hierarchy for resistances `alpha` (leaves express `s`).
pub fn tree_equilibrium(tree: &TreeInstance, alpha: &[f64]) -> Result<Vec<f64>> {
    let n = tree.node_count();
    if alpha.len() != n {
        return Err(Error::invalid("resistance vector length differs from node count"));
    }
    let assignment: Vec<Option<StoogeAction>> = alpha.iter().map(|&a| Some(StoogeAction::Resistance(a))).collect();
    Ok(evaluate_assignment(tree, &assignment))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSolution {
    pub cost: usize,
    /// Per node: the stooge action, or `None` for untouched nodes.
    pub assignment: Vec<Option<StoogeAction>>,
    pub opinions: Vec<f64>,
    pub votes_above: usize,
    pub voting_nodes: usize,
}

impl TreeSolution {
    /// Resistances after applying resistance-only stooges to `alpha0`.
    pub fn resistances(&self, alpha0: &[f64]) -> Vec<f64> {
        alpha0
            .iter()
            .zip(&self.assignment)
            .map(|(&a, act)| match act {
                Some(StoogeAction::Resistance(r)) => *r,
                _ => a,
            })
            .collect()
    }

    pub fn stooges(&self) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&u| self.assignment[u].is_some()).collect()
    }
}

/// Root table of the dynamic program: `table[j][k]` is the best root opinion
/// with exactly `j` voting nodes above the threshold at cost exactly `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpCertificate {
    pub root: usize,
    pub table: Vec<Vec<Option<f64>>>,
    pub voting_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDpOutcome {
    /// `None` when no assignment reaches a strict majority.
    pub solution: Option<TreeSolution>,
    pub certificate: DpCertificate,
}

/// Dense `(j, k)` table of best opinions; `-inf` marks unreachable entries.
#[derive(Debug, Clone)]
struct Table {
    jmax: usize,
    kmax: usize,
    val: Vec<f64>,
}

impl Table {
    fn new(jmax: usize, kmax: usize) -> Self {
        Table {
            jmax,
            kmax,
            val: vec![f64::NEG_INFINITY; (jmax + 1) * (kmax + 1)],
        }
    }

    fn idx(&self, j: usize, k: usize) -> usize {
        j * (self.kmax + 1) + k
    }

    fn get(&self, j: usize, k: usize) -> f64 {
        self.val[self.idx(j, k)]
    }

    fn reachable(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..=self.jmax).flat_map(move |j| {
            (0..=self.kmax).filter_map(move |k| {
                let v = self.get(j, k);
                (v > f64::NEG_INFINITY).then_some((j, k, v))
            })
        })
    }
}

struct NodeDp {
    table: Table,
    /// For each entry: action index (0 = keep) and children vote count.
    back: Vec<(u8, usize)>,
    /// Entry `i`: the table over children `0..i`, and for child `i` the
    /// `(j', k')` taken from it at each entry of the table over `0..=i`
    /// (which is entry `i + 1`).
    splits: Vec<(Table, Vec<(usize, usize)>)>,
}

/// Votes needed for a strict majority of `voting` nodes.
pub fn majority(voting: usize) -> usize {
    voting / 2 + 1
}

/// Minimum total stooge cost for which strictly more than half of the voting
/// nodes hold an opinion above `theta`.
pub fn tree_dp_min_stooges(tree: &TreeInstance, theta: f64) -> Result<TreeDpOutcome> {
    tree_dp_min_cost(tree, theta, majority(tree.voting_count()))
}

/// Minimum total stooge cost for which at least `required` voting nodes hold
/// an opinion above `theta`. With every node voting and
/// `required = n - floor(n/2)` this is exactly "upper median above `theta`".
pub fn tree_dp_min_cost(tree: &TreeInstance, theta: f64, required: usize) -> Result<TreeDpOutcome> {
    let n = tree.node_count();
    let actions = tree.mode.actions();
    let mut dp: Vec<Option<NodeDp>> = (0..n).map(|_| None).collect();

    for u in tree.postorder() {
        // Knapsack over children in id order.
        let mut merged = Table::new(0, 0);
        merged.val[0] = 0.0;
        let mut splits = Vec::with_capacity(tree.children[u].len());
        for &(c, w) in &tree.children[u] {
            let child = &dp[c].as_ref().expect("children are processed first").table;
            let mut next = Table::new(merged.jmax + child.jmax, merged.kmax + child.kmax);
            let mut split = vec![(0, 0); next.val.len()];
            for (j, k, v) in merged.reachable() {
                for (jc, kc, vc) in child.reachable() {
                    let i = next.idx(j + jc, k + kc);
                    let cand = v + w * vc;
                    if cand > next.val[i] {
                        next.val[i] = cand;
                        split[i] = (jc, kc);
                    }
                }
            }
            splits.push((merged, split));
            merged = next;
        }

        let vote = usize::from(tree.voting[u]);
        let cost = tree.costs[u];
        let mut table = Table::new(merged.jmax + vote, merged.kmax + cost);
        let mut back = vec![(0u8, 0usize); table.val.len()];
        for (jc, kc, sum) in merged.reachable() {
            let options = std::iter::once((0u8, None, 0))
                .chain(actions.iter().enumerate().map(|(i, &a)| (i as u8 + 1, Some(a), cost)));
            for (code, action, extra) in options {
                let x = tree.node_opinion(u, action, sum);
                let j = jc + usize::from(tree.voting[u] && x > theta);
                let i = table.idx(j, kc + extra);
                if x > table.val[i] {
                    table.val[i] = x;
                    back[i] = (code, jc);
                }
            }
        }
        // Keep the final merged table so reconstruction can index the last split.
        splits.push((merged, Vec::new()));
        dp[u] = Some(NodeDp { table, back, splits });
    }

    let voting_nodes = tree.voting_count();
    let root_dp = dp[tree.root].as_ref().expect("root processed");
    let root_table = &root_dp.table;
    let certificate = DpCertificate {
        root: tree.root,
        table: (0..=root_table.jmax)
            .map(|j| {
                (0..=root_table.kmax)
                    .map(|k| {
                        let v = root_table.get(j, k);
                        (v > f64::NEG_INFINITY).then_some(v)
                    })
                    .collect()
            })
            .collect(),
        voting_nodes,
    };

    let target = (0..=root_table.kmax).find_map(|k| {
        (0..=root_table.jmax)
            .find(|&j| j >= required.max(1) && root_table.get(j, k) > f64::NEG_INFINITY)
            .map(|j| (j, k))
    });
    let Some((j_root, k_root)) = target else {
        return Ok(TreeDpOutcome {
            solution: None,
            certificate,
        });
    };

    let mut assignment = vec![None; n];
    let mut stack = vec![(tree.root, j_root, k_root)];
    while let Some((u, j, k)) = stack.pop() {
        let node = dp[u].as_ref().expect("processed");
        let (code, jc) = node.back[node.table.idx(j, k)];
        let mut kc = k;
        if code > 0 {
            let action = actions[code as usize - 1];
            assignment[u] = Some(action);
            kc -= tree.costs[u];
        }
        let mut jc = jc;
        let kids = &tree.children[u];
        for i in (0..kids.len()).rev() {
            let (prev, split) = &node.splits[i];
            let merged_here = &node.splits[i + 1].0;
            let (cj, ck) = split[merged_here.idx(jc, kc)];
            stack.push((kids[i].0, cj, ck));
            jc -= cj;
            kc -= ck;
            debug_assert!(prev.get(jc, kc) > f64::NEG_INFINITY);
        }
    }

    let opinions = evaluate_assignment(tree, &assignment);
    let votes_above = tree.votes_above(&opinions, theta);
    let cost = tree.assignment_cost(&assignment);
    debug_assert_eq!(cost, k_root);
    Ok(TreeDpOutcome {
        solution: Some(TreeSolution {
            cost,
            assignment,
            opinions,
            votes_above,
            voting_nodes,
        }),
        certificate,
    })
}

/// Exhaustive search over every stooge assignment; an oracle for the DP.
pub fn brute_force_min_stooges(tree: &TreeInstance, theta: f64, max_n: usize) -> Result<Option<TreeSolution>> {
    brute_force_min_cost(tree, theta, majority(tree.voting_count()), max_n)
}

pub fn brute_force_min_cost(
    tree: &TreeInstance,
    theta: f64,
    required: usize,
    max_n: usize,
) -> Result<Option<TreeSolution>> {
    let n = tree.node_count();
    if n > max_n {
        return Err(Error::TooLarge { n, max: max_n });
    }
    let voting_nodes = tree.voting_count();
    let actions = tree.mode.actions();
    let base = actions.len() + 1;
    let total = base.pow(n as u32);
    let mut best: Option<TreeSolution> = None;
    let mut assignment = vec![None; n];
    for code in 0..total {
        let mut rest = code;
        for slot in assignment.iter_mut() {
            let digit = rest % base;
            rest /= base;
            *slot = (digit > 0).then(|| actions[digit - 1]);
        }
        let cost = tree.assignment_cost(&assignment);
        if best.as_ref().is_some_and(|b| b.cost <= cost) {
            continue;
        }
        let x = evaluate_assignment(tree, &assignment);
        let votes = tree.votes_above(&x, theta);
        if votes >= required.max(1) {
            best = Some(TreeSolution {
                cost,
                assignment: assignment.clone(),
                opinions: x,
                votes_above: votes,
                voting_nodes,
            });
        }
    }
    Ok(best)
}
