//! Dinic max-flow on real capacities, with the minimal source side of a
//! minimum cut.

const NIL: u32 = u32::MAX;

pub(crate) struct FlowGraph {
    head: Vec<u32>,
    next: Vec<u32>,
    to: Vec<u32>,
    cap: Vec<f64>,
    level: Vec<i32>,
    iter: Vec<u32>,
}

impl FlowGraph {
    pub fn new(n: usize) -> Self {
        FlowGraph {
            head: vec![NIL; n],
            next: vec![],
            to: vec![],
            cap: vec![],
            level: vec![0; n],
            iter: vec![0; n],
        }
    }

    pub fn with_capacity(n: usize, arcs: usize) -> Self {
        let mut g = Self::new(n);
        g.next.reserve(2 * arcs);
        g.to.reserve(2 * arcs);
        g.cap.reserve(2 * arcs);
        g
    }

    fn arc(&mut self, u: usize, v: usize, c: f64) {
        self.to.push(v as u32);
        self.cap.push(c);
        self.next.push(self.head[u]);
        self.head[u] = (self.to.len() - 1) as u32;
    }

    /// Arc `u -> v` with capacity `c_uv` and its reverse with `c_vu`.
    pub fn add(&mut self, u: usize, v: usize, c_uv: f64, c_vu: f64) {
        if c_uv <= 0.0 && c_vu <= 0.0 {
            return;
        }
        self.arc(u, v, c_uv.max(0.0));
        self.arc(v, u, c_vu.max(0.0));
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.fill(-1);
        self.level[s] = 0;
        let mut q = std::collections::VecDeque::new();
        q.push_back(s);
        while let Some(u) = q.pop_front() {
            let mut e = self.head[u];
            while e != NIL {
                let v = self.to[e as usize] as usize;
                if self.cap[e as usize] > 0.0 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    q.push_back(v);
                }
                e = self.next[e as usize];
            }
        }
        self.level[t] >= 0
    }

    /// One blocking-flow augmentation along a level path; iterative to keep
    /// deep grids off the call stack.
    fn augment(&mut self, s: usize, t: usize) -> f64 {
        let mut path: Vec<u32> = Vec::new();
        let mut u = s;
        loop {
            if u == t {
                let f = path.iter().map(|&e| self.cap[e as usize]).fold(f64::INFINITY, f64::min);
                for &e in &path {
                    self.cap[e as usize] -= f;
                    self.cap[(e ^ 1) as usize] += f;
                }
                return f;
            }
            let mut advanced = false;
            while self.iter[u] != NIL {
                let e = self.iter[u] as usize;
                let v = self.to[e] as usize;
                if self.cap[e] > 0.0 && self.level[v] == self.level[u] + 1 {
                    path.push(e as u32);
                    u = v;
                    advanced = true;
                    break;
                }
                self.iter[u] = self.next[e];
            }
            if !advanced {
                // dead end: retreat and skip the arc that led here
                self.level[u] = -1;
                match path.pop() {
                    Some(e) => {
                        u = self.to[(e ^ 1) as usize] as usize;
                        self.iter[u] = self.next[self.iter[u] as usize];
                    }
                    None => return 0.0,
                }
            }
        }
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        while self.bfs(s, t) {
            self.iter.copy_from_slice(&self.head);
            loop {
                let f = self.augment(s, t);
                if f <= 0.0 {
                    break;
                }
                total += f;
            }
        }
        total
    }

    /// Nodes reachable from `s` in the residual graph: the smallest source
    /// side among minimum cuts.
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            let mut e = self.head[u];
            while e != NIL {
                let v = self.to[e as usize] as usize;
                if self.cap[e as usize] > 0.0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
                e = self.next[e as usize];
            }
        }
        seen
    }
}
