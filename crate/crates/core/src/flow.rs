//! Dinic max-flow on a static network with integer capacities.

pub(crate) struct Network {
    head: Vec<usize>,
    to: Vec<u32>,
    cap: Vec<i64>,
    rev: Vec<u32>,
}

/// Collects arc pairs before freezing them into adjacency arrays.
pub(crate) struct NetworkBuilder {
    nodes: usize,
    pairs: Vec<(u32, u32, i64, i64)>,
}

impl NetworkBuilder {
    pub(crate) fn new(nodes: usize, capacity_hint: usize) -> Self {
        NetworkBuilder {
            nodes,
            pairs: Vec::with_capacity(capacity_hint),
        }
    }

    /// Arc `u -> v` with capacity `forward` and `v -> u` with `backward`.
    pub(crate) fn add(&mut self, u: usize, v: usize, forward: i64, backward: i64) {
        self.pairs.push((u as u32, v as u32, forward, backward));
    }

    pub(crate) fn build(self) -> Network {
        let n = self.nodes;
        let mut head = vec![0usize; n + 1];
        for &(u, v, _, _) in &self.pairs {
            head[u as usize + 1] += 1;
            head[v as usize + 1] += 1;
        }
        for i in 0..n {
            head[i + 1] += head[i];
        }
        let m = head[n];
        let mut fill = head.clone();
        let mut to = vec![0u32; m];
        let mut cap = vec![0i64; m];
        let mut rev = vec![0u32; m];
        for &(u, v, cf, cb) in &self.pairs {
            let a = fill[u as usize];
            fill[u as usize] += 1;
            let b = fill[v as usize];
            fill[v as usize] += 1;
            to[a] = v;
            cap[a] = cf;
            rev[a] = b as u32;
            to[b] = u;
            cap[b] = cb;
            rev[b] = a as u32;
        }
        Network { head, to, cap, rev }
    }
}

impl Network {
    fn levels(&self, s: usize, t: usize, level: &mut [i32], queue: &mut Vec<usize>) -> bool {
        level.fill(-1);
        queue.clear();
        level[s] = 0;
        queue.push(s);
        let mut qi = 0;
        while qi < queue.len() {
            let u = queue[qi];
            qi += 1;
            for a in self.head[u]..self.head[u + 1] {
                let v = self.to[a] as usize;
                if self.cap[a] > 0 && level[v] < 0 {
                    level[v] = level[u] + 1;
                    queue.push(v);
                }
            }
        }
        level[t] >= 0
    }

    /// Maximum `s -> t` flow; the residual network is kept for [`Network::source_side`].
    pub(crate) fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let n = self.head.len() - 1;
        let mut level = vec![-1i32; n];
        let mut queue = Vec::with_capacity(n);
        let mut next = vec![0usize; n];
        let mut path: Vec<usize> = Vec::new();
        let mut total = 0i64;
        while self.levels(s, t, &mut level, &mut queue) {
            next.copy_from_slice(&self.head[..n]);
            // Iterative DFS: `path` holds the arcs from s to the current node.
            path.clear();
            let mut u = s;
            loop {
                if u == t {
                    let bottleneck = path.iter().map(|&a| self.cap[a]).min().unwrap_or(0);
                    total += bottleneck;
                    let mut cut = path.len();
                    for (i, &a) in path.iter().enumerate() {
                        self.cap[a] -= bottleneck;
                        self.cap[self.rev[a] as usize] += bottleneck;
                        if self.cap[a] == 0 && cut == path.len() {
                            cut = i;
                        }
                    }
                    path.truncate(cut);
                    u = match path.last() {
                        Some(&a) => self.to[a] as usize,
                        None => s,
                    };
                    continue;
                }
                let mut advanced = false;
                while next[u] < self.head[u + 1] {
                    let a = next[u];
                    let v = self.to[a] as usize;
                    if self.cap[a] > 0 && level[v] == level[u] + 1 {
                        path.push(a);
                        u = v;
                        advanced = true;
                        break;
                    }
                    next[u] += 1;
                }
                if advanced {
                    continue;
                }
                level[u] = -1;
                match path.pop() {
                    Some(a) => {
                        u = self.to[self.rev[a] as usize] as usize;
                        next[u] += 1;
                    }
                    None => break,
                }
            }
        }
        total
    }

    /// Nodes reachable from `s` in the residual network.
    pub(crate) fn source_side(&self, s: usize) -> Vec<bool> {
        let n = self.head.len() - 1;
        let mut seen = vec![false; n];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for a in self.head[u]..self.head[u + 1] {
                let v = self.to[a] as usize;
                if self.cap[a] > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}
