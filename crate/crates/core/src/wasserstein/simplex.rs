//! Primal network simplex for the balanced transportation problem.
//!
//! Bipartite network: `m` supply nodes, `n` demand nodes and a root joined to
//! every node by a big-M artificial arc. Arcs have unbounded capacity. The
//! spanning tree is kept strongly feasible so degenerate pivots cannot cycle;
//! pricing is block search with deterministic arc order.

use crate::error::{Error, Result};

const EPSILON: f64 = 2.2e-15;

pub(crate) struct FlowSolution {
    /// `(i, j, flow)` for every basic real arc with positive flow.
    pub entries: Vec<(usize, usize, f64)>,
    pub artificial_flow: f64,
    pub pivots: usize,
}

/// `cost` is row-major `m x n`; `supply` and `demand` are nonnegative with
/// (numerically) equal totals.
pub(crate) fn solve(cost: &[f64], supply: &[f64], demand: &[f64]) -> Result<FlowSolution> {
    let m = supply.len();
    let n = demand.len();
    debug_assert_eq!(cost.len(), m * n);
    let node_count = m + n + 1;
    let root = m + n;
    let real_arcs = m * n;

    let max_cost = cost.iter().fold(0.0f64, |a, &c| a.max(c.abs()));
    let art_cost = (max_cost + 1.0) * node_count as f64;

    // per-node tree data; pred arc of node u is either a real arc index or
    // `real_arcs + u` for its artificial arc
    let mut parent = vec![root; node_count];
    let mut pred = vec![usize::MAX; node_count];
    let mut up = vec![false; node_count];
    let mut flow = vec![0.0; node_count];
    let mut depth = vec![1usize; node_count];
    let mut pi = vec![0.0; node_count];
    depth[root] = 0;
    parent[root] = usize::MAX;
    for u in 0..m + n {
        pred[u] = real_arcs + u;
        if u < m {
            up[u] = true;
            flow[u] = supply[u];
            pi[u] = -art_cost;
        } else {
            up[u] = false;
            flow[u] = demand[u - m];
            pi[u] = art_cost;
        }
    }
    let mut in_tree = vec![false; real_arcs];

    let endpoints = |e: usize| -> (usize, usize) {
        if e < real_arcs {
            (e / n, m + e % n)
        } else {
            let u = e - real_arcs;
            if u < m {
                (u, root)
            } else {
                (root, u)
            }
        }
    };
    let arc_cost = |e: usize| -> f64 {
        if e < real_arcs {
            cost[e]
        } else {
            art_cost
        }
    };

    let block = ((real_arcs as f64).sqrt().ceil() as usize)
        .max(10)
        .min(real_arcs.max(1));
    let mut next_arc = 0usize;
    let mut children_start = vec![0usize; node_count + 1];
    let mut children = vec![0usize; node_count];
    let mut stack = Vec::with_capacity(node_count);
    let mut pivots = 0usize;
    let pivot_cap = 50usize.saturating_mul(real_arcs).max(1_000_000);

    loop {
        // block-search pricing
        let mut entering = usize::MAX;
        let mut best = 0.0;
        let mut scanned = 0usize;
        let mut in_block = 0usize;
        let mut e = next_arc;
        while scanned < real_arcs {
            if !in_tree[e] {
                let (s, t) = (e / n, m + e % n);
                let rc = cost[e] + pi[s] - pi[t];
                if rc < best {
                    let scale = cost[e].abs().max(pi[s].abs()).max(pi[t].abs());
                    if rc < -EPSILON * scale {
                        best = rc;
                        entering = e;
                    }
                }
            }
            scanned += 1;
            in_block += 1;
            e += 1;
            if e == real_arcs {
                e = 0;
            }
            if in_block == block {
                if entering != usize::MAX {
                    break;
                }
                in_block = 0;
            }
        }
        if entering == usize::MAX {
            break;
        }
        next_arc = e;
        pivots += 1;
        if pivots > pivot_cap {
            return Err(Error::Infeasible(format!(
                "network simplex exceeded {pivot_cap} pivots"
            )));
        }

        let (first, second) = endpoints(entering);
        // join = lowest common ancestor
        let (mut a, mut b) = (first, second);
        while a != b {
            if depth[a] >= depth[b] {
                a = parent[a];
            } else {
                b = parent[b];
            }
        }
        let join = a;

        // leaving arc; ties resolved toward the second side so the new tree
        // stays strongly feasible
        let mut delta = f64::INFINITY;
        let mut u_out = usize::MAX;
        let mut side = 0u8;
        let mut u = first;
        while u != join {
            if up[u] && flow[u] < delta {
                delta = flow[u];
                u_out = u;
                side = 1;
            }
            u = parent[u];
        }
        u = second;
        while u != join {
            if !up[u] && flow[u] <= delta {
                delta = flow[u];
                u_out = u;
                side = 2;
            }
            u = parent[u];
        }
        if side == 0 {
            return Err(Error::Infeasible("unbounded transportation cycle".into()));
        }

        if delta > 0.0 {
            let mut u = first;
            while u != join {
                flow[u] += if up[u] { -delta } else { delta };
                u = parent[u];
            }
            u = second;
            while u != join {
                flow[u] += if up[u] { delta } else { -delta };
                u = parent[u];
            }
        }

        let (u_in, v_in) = if side == 1 {
            (first, second)
        } else {
            (second, first)
        };
        let out_arc = pred[u_out];
        if out_arc < real_arcs {
            in_tree[out_arc] = false;
        }
        in_tree[entering] = true;

        // re-hang the path u_in .. u_out below v_in
        let mut prev_node = v_in;
        let mut prev_arc = entering;
        let mut prev_up = u_in == first;
        let mut prev_flow = delta;
        let mut x = u_in;
        loop {
            let (next, next_arc_x, next_up, next_flow) = (parent[x], pred[x], up[x], flow[x]);
            parent[x] = prev_node;
            pred[x] = prev_arc;
            up[x] = prev_up;
            flow[x] = prev_flow;
            if x == u_out {
                break;
            }
            prev_node = x;
            prev_arc = next_arc_x;
            prev_up = !next_up;
            prev_flow = next_flow;
            x = next;
        }

        // potentials and depths of the moved subtree
        let c_in = arc_cost(entering);
        let target_pi = if up[u_in] {
            pi[v_in] - c_in
        } else {
            pi[v_in] + c_in
        };
        let sigma = target_pi - pi[u_in];
        rebuild_children(&parent, root, &mut children_start, &mut children);
        stack.clear();
        stack.push(u_in);
        while let Some(v) = stack.pop() {
            pi[v] += sigma;
            depth[v] = depth[parent[v]] + 1;
            stack.extend_from_slice(&children[children_start[v]..children_start[v + 1]]);
        }
    }

    let mut entries = Vec::new();
    let mut artificial_flow = 0.0f64;
    for u in 0..m + n {
        let e = pred[u];
        let f = flow[u].max(0.0);
        if e < real_arcs {
            if f > 0.0 {
                entries.push((e / n, e % n, f));
            }
        } else {
            artificial_flow = artificial_flow.max(f);
        }
    }
    entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    Ok(FlowSolution {
        entries,
        artificial_flow,
        pivots,
    })
}

fn rebuild_children(parent: &[usize], root: usize, start: &mut [usize], children: &mut [usize]) {
    start.iter_mut().for_each(|s| *s = 0);
    for (v, &p) in parent.iter().enumerate() {
        if v != root {
            start[p + 1] += 1;
        }
    }
    for i in 1..start.len() {
        start[i] += start[i - 1];
    }
    let mut fill = start.to_vec();
    for (v, &p) in parent.iter().enumerate() {
        if v != root {
            children[fill[p]] = v;
            fill[p] += 1;
        }
    }
}
