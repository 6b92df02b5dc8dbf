//! Nested-dissection ordering on the symmetrized sparsity graph.

use std::collections::VecDeque;

use super::CscMatrix;

const LEAF_SIZE: usize = 96;

/// Adjacency of `A + A^T` without the diagonal, in CSR form.
struct Graph {
    ptr: Vec<usize>,
    adj: Vec<usize>,
}

impl Graph {
    fn from_matrix(a: &CscMatrix) -> Self {
        let n = a.n_cols;
        let mut deg = vec![0usize; n + 1];
        for c in 0..n {
            for &r in &a.row_idx[a.col_ptr[c]..a.col_ptr[c + 1]] {
                if r != c {
                    deg[r + 1] += 1;
                    deg[c + 1] += 1;
                }
            }
        }
        for i in 0..n {
            deg[i + 1] += deg[i];
        }
        let mut next = deg.clone();
        let mut adj = vec![0usize; deg[n]];
        for c in 0..n {
            for &r in &a.row_idx[a.col_ptr[c]..a.col_ptr[c + 1]] {
                if r != c {
                    adj[next[r]] = c;
                    next[r] += 1;
                    adj[next[c]] = r;
                    next[c] += 1;
                }
            }
        }
        let mut ptr = vec![0usize; n + 1];
        let mut out = Vec::with_capacity(adj.len());
        for i in 0..n {
            let list = &mut adj[deg[i]..deg[i + 1]];
            list.sort_unstable();
            let mut last = usize::MAX;
            for &j in list.iter() {
                if j != last {
                    out.push(j);
                    last = j;
                }
            }
            ptr[i + 1] = out.len();
        }
        Self { ptr, adj: out }
    }

    fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[self.ptr[i]..self.ptr[i + 1]]
    }
}

struct Workspace {
    /// Subset id each node currently belongs to.
    owner: Vec<usize>,
    level: Vec<usize>,
    next_id: usize,
}

/// A fill-reducing elimination order (new position -> old index) for a square matrix.
pub fn nested_dissection(a: &CscMatrix) -> Vec<usize> {
    let n = a.n_cols;
    let graph = Graph::from_matrix(a);
    let mut ws = Workspace {
        owner: vec![0; n],
        level: vec![usize::MAX; n],
        next_id: 1,
    };
    let mut order = Vec::with_capacity(n);
    let mut pending = vec![Task::Split((0..n).collect())];
    while let Some(task) = pending.pop() {
        match task {
            Task::Emit(nodes) => order.extend(nodes),
            Task::Split(nodes) => {
                let parts = dissect(&graph, &mut ws, nodes);
                match parts {
                    Dissection::Leaf(nodes) => order.extend(nodes),
                    Dissection::Parts(parts, separator) => {
                        pending.push(Task::Emit(separator));
                        for p in parts.into_iter().rev() {
                            pending.push(Task::Split(p));
                        }
                    }
                }
            }
        }
    }
    debug_assert_eq!(order.len(), n);
    order
}

enum Task {
    Split(Vec<usize>),
    Emit(Vec<usize>),
}

enum Dissection {
    Leaf(Vec<usize>),
    Parts(Vec<Vec<usize>>, Vec<usize>),
}

fn claim(ws: &mut Workspace, nodes: &[usize]) -> usize {
    let id = ws.next_id;
    ws.next_id += 1;
    for &i in nodes {
        ws.owner[i] = id;
    }
    id
}

/// BFS levels from `start` restricted to the subset `id`; returns the nodes by level.
fn bfs_levels(graph: &Graph, ws: &mut Workspace, id: usize, start: usize) -> Vec<Vec<usize>> {
    let mut levels: Vec<Vec<usize>> = vec![vec![start]];
    ws.level[start] = 0;
    let mut visited = vec![start];
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        let li = ws.level[i];
        for &j in graph.neighbors(i) {
            if ws.owner[j] == id && ws.level[j] == usize::MAX {
                ws.level[j] = li + 1;
                if levels.len() <= li + 1 {
                    levels.push(Vec::new());
                }
                levels[li + 1].push(j);
                visited.push(j);
                queue.push_back(j);
            }
        }
    }
    for &i in &visited {
        ws.level[i] = usize::MAX;
    }
    levels
}

fn dissect(graph: &Graph, ws: &mut Workspace, mut nodes: Vec<usize>) -> Dissection {
    if nodes.len() <= LEAF_SIZE {
        return Dissection::Leaf(nodes);
    }
    nodes.sort_unstable();
    let id = claim(ws, &nodes);

    // Pseudo-peripheral start: restart BFS from a low-degree node of the deepest level.
    let mut levels = bfs_levels(graph, ws, id, nodes[0]);
    let reached: usize = levels.iter().map(Vec::len).sum();
    if reached < nodes.len() {
        // Disconnected: split off the component of the first node.
        let comp: Vec<usize> = levels.concat();
        let comp_id = claim(ws, &comp);
        let rest: Vec<usize> = nodes.iter().copied().filter(|&i| ws.owner[i] != comp_id).collect();
        return Dissection::Parts(vec![comp, rest], Vec::new());
    }
    for _ in 0..4 {
        let candidate = *levels
            .last()
            .unwrap()
            .iter()
            .min_by_key(|&&i| graph.neighbors(i).len())
            .unwrap();
        let next = bfs_levels(graph, ws, id, candidate);
        if next.len() <= levels.len() {
            break;
        }
        levels = next;
    }
    if levels.len() < 3 {
        return Dissection::Leaf(nodes);
    }

    // Separator level: the one where the cumulative count passes half.
    let half = nodes.len() / 2;
    let mut acc = 0;
    let mut mid = 1;
    for (l, lv) in levels.iter().enumerate() {
        acc += lv.len();
        if acc >= half {
            mid = l.clamp(1, levels.len() - 2);
            break;
        }
    }
    let upper_id = claim(ws, &levels[mid + 1..].concat());
    let mut separator = Vec::new();
    let mut lower: Vec<usize> = levels[..mid].concat();
    for &i in &levels[mid] {
        if graph.neighbors(i).iter().any(|&j| ws.owner[j] == upper_id) {
            separator.push(i);
        } else {
            lower.push(i);
        }
    }
    let upper: Vec<usize> = levels[mid + 1..].concat();
    lower.sort_unstable();
    separator.sort_unstable();
    Dissection::Parts(vec![lower, upper], separator)
}
