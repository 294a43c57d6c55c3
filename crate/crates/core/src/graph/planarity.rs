//! Left-right planarity test (Brandes' formulation of de Fraysseix and
//! Rosenstiehl's criterion). Only the yes/no answer is computed, so edge
//! sides are never materialised.

const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Default)]
struct Interval {
    low: Option<usize>,
    high: Option<usize>,
}

impl Interval {
    fn is_empty(&self) -> bool {
        self.low.is_none() && self.high.is_none()
    }
}

#[derive(Clone, Copy, Default)]
struct ConflictPair {
    left: Interval,
    right: Interval,
}

impl ConflictPair {
    fn swap(&mut self) {
        std::mem::swap(&mut self.left, &mut self.right);
    }
}

struct LrState {
    adj: Vec<Vec<(usize, usize)>>,
    src: Vec<usize>,
    dst: Vec<usize>,
    oriented: Vec<bool>,
    height: Vec<usize>,
    parent_edge: Vec<usize>,
    lowpt: Vec<usize>,
    lowpt2: Vec<usize>,
    nesting_depth: Vec<usize>,
    out: Vec<Vec<usize>>,
    lowpt_edge: Vec<usize>,
    reference: Vec<usize>,
    stack_bottom: Vec<usize>,
    stack: Vec<ConflictPair>,
}

impl LrState {
    fn opt(&self, e: Option<usize>) -> usize {
        e.map_or(NONE, |e| e)
    }

    fn conflicting(&self, i: &Interval, b: usize) -> bool {
        !i.is_empty() && self.lowpt[self.opt(i.high)] > self.lowpt[b]
    }

    fn lowest(&self, p: &ConflictPair) -> usize {
        if p.left.is_empty() {
            return self.lowpt[self.opt(p.right.low)];
        }
        if p.right.is_empty() {
            return self.lowpt[self.opt(p.left.low)];
        }
        self.lowpt[self.opt(p.left.low)].min(self.lowpt[self.opt(p.right.low)])
    }

    fn orient(&mut self, v: usize) {
        let e = self.parent_edge[v];
        for idx in 0..self.adj[v].len() {
            let (w, id) = self.adj[v][idx];
            if self.oriented[id] {
                continue;
            }
            self.oriented[id] = true;
            self.src[id] = v;
            self.dst[id] = w;
            self.out[v].push(id);
            self.lowpt[id] = self.height[v];
            self.lowpt2[id] = self.height[v];
            if self.height[w] == NONE {
                self.parent_edge[w] = id;
                self.height[w] = self.height[v] + 1;
                self.orient(w);
            } else {
                self.lowpt[id] = self.height[w];
            }
            self.nesting_depth[id] = 2 * self.lowpt[id] + usize::from(self.lowpt2[id] < self.height[v]);
            if e != NONE {
                if self.lowpt[id] < self.lowpt[e] {
                    self.lowpt2[e] = self.lowpt[e].min(self.lowpt2[id]);
                    self.lowpt[e] = self.lowpt[id];
                } else if self.lowpt[id] > self.lowpt[e] {
                    self.lowpt2[e] = self.lowpt2[e].min(self.lowpt[id]);
                } else {
                    self.lowpt2[e] = self.lowpt2[e].min(self.lowpt2[id]);
                }
            }
        }
    }

    fn test(&mut self, v: usize) -> bool {
        let e = self.parent_edge[v];
        let out = std::mem::take(&mut self.out[v]);
        for (pos, &ei) in out.iter().enumerate() {
            let w = self.dst[ei];
            self.stack_bottom[ei] = self.stack.len();
            if ei == self.parent_edge[w] {
                if !self.test(w) {
                    return false;
                }
            } else {
                self.lowpt_edge[ei] = ei;
                self.stack.push(ConflictPair {
                    left: Interval::default(),
                    right: Interval { low: Some(ei), high: Some(ei) },
                });
            }
            if self.lowpt[ei] < self.height[v] {
                if pos == 0 {
                    self.lowpt_edge[e] = self.lowpt_edge[ei];
                } else if !self.add_constraints(ei, e) {
                    return false;
                }
            }
        }
        self.out[v] = out;
        if e != NONE {
            self.remove_back_edges(e);
        }
        true
    }

    fn add_constraints(&mut self, ei: usize, e: usize) -> bool {
        let mut p = ConflictPair::default();
        loop {
            let mut q = self.stack.pop().expect("return edges present");
            if !q.left.is_empty() {
                q.swap();
            }
            if !q.left.is_empty() {
                return false;
            }
            if self.lowpt[self.opt(q.right.low)] > self.lowpt[e] {
                if p.right.is_empty() {
                    p.right = q.right;
                } else {
                    let low = self.opt(p.right.low);
                    self.reference[low] = self.opt(q.right.high);
                }
                p.right.low = q.right.low;
            } else {
                let low = self.opt(q.right.low);
                self.reference[low] = self.lowpt_edge[e];
            }
            if self.stack.len() == self.stack_bottom[ei] {
                break;
            }
        }
        while let Some(top) = self.stack.last() {
            if !(self.conflicting(&top.left, ei) || self.conflicting(&top.right, ei)) {
                break;
            }
            let mut q = self.stack.pop().expect("non-empty");
            if self.conflicting(&q.right, ei) {
                q.swap();
            }
            if self.conflicting(&q.right, ei) {
                return false;
            }
            if let Some(low) = p.right.low {
                self.reference[low] = self.opt(q.right.high);
            }
            if q.right.low.is_some() {
                p.right.low = q.right.low;
            }
            if p.left.is_empty() {
                p.left = q.left;
            } else if let Some(low) = p.left.low {
                self.reference[low] = self.opt(q.left.high);
            }
            p.left.low = q.left.low;
        }
        if !(p.left.is_empty() && p.right.is_empty()) {
            self.stack.push(p);
        }
        true
    }

    fn follow(&self, e: Option<usize>) -> Option<usize> {
        e.and_then(|e| match self.reference[e] {
            NONE => None,
            r => Some(r),
        })
    }

    fn remove_back_edges(&mut self, e: usize) {
        let u = self.src[e];
        while let Some(top) = self.stack.last() {
            if self.lowest(top) != self.height[u] {
                break;
            }
            self.stack.pop();
        }
        if let Some(mut p) = self.stack.pop() {
            while p.left.high.is_some_and(|h| self.dst[h] == u) {
                p.left.high = self.follow(p.left.high);
            }
            if p.left.high.is_none() {
                if let Some(low) = p.left.low {
                    self.reference[low] = self.opt(p.right.low);
                    p.left.low = None;
                }
            }
            while p.right.high.is_some_and(|h| self.dst[h] == u) {
                p.right.high = self.follow(p.right.high);
            }
            if p.right.high.is_none() {
                if let Some(low) = p.right.low {
                    self.reference[low] = self.opt(p.left.low);
                    p.right.low = None;
                }
            }
            self.stack.push(p);
        }
        if self.lowpt[e] < self.height[u] {
            let top = self.stack.last().copied().unwrap_or_default();
            let (hl, hr) = (top.left.high, top.right.high);
            self.reference[e] = match (hl, hr) {
                (Some(l), Some(r)) if self.lowpt[l] > self.lowpt[r] => l,
                (Some(l), None) => l,
                (_, r) => self.opt(r),
            };
        }
    }
}

/// Whether the simple undirected graph on `n` vertices with the given edges
/// is planar. Self-loops and repeated edges are ignored.
pub fn is_planar(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut uniq: Vec<(usize, usize)> =
        edges.iter().filter(|(a, b)| a != b).map(|&(a, b)| (a.min(b), a.max(b))).collect();
    uniq.sort_unstable();
    uniq.dedup();
    let m = uniq.len();
    if n > 2 && m > 3 * n - 6 {
        return false;
    }
    let mut adj = vec![Vec::new(); n];
    for (id, &(a, b)) in uniq.iter().enumerate() {
        adj[a].push((b, id));
        adj[b].push((a, id));
    }
    let mut st = LrState {
        adj,
        src: vec![NONE; m],
        dst: vec![NONE; m],
        oriented: vec![false; m],
        height: vec![NONE; n],
        parent_edge: vec![NONE; n],
        lowpt: vec![0; m],
        lowpt2: vec![0; m],
        nesting_depth: vec![0; m],
        out: vec![Vec::new(); n],
        lowpt_edge: vec![NONE; m],
        reference: vec![NONE; m],
        stack_bottom: vec![0; m],
        stack: Vec::new(),
    };
    let mut roots = Vec::new();
    for v in 0..n {
        if st.height[v] == NONE {
            st.height[v] = 0;
            roots.push(v);
            st.orient(v);
        }
    }
    for v in 0..n {
        let mut out = std::mem::take(&mut st.out[v]);
        out.sort_by_key(|&e| st.nesting_depth[e]);
        st.out[v] = out;
    }
    roots.into_iter().all(|r| st.test(r))
}
