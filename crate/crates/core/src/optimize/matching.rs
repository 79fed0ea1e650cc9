//! Maximum-cardinality matching in general graphs (Edmonds' blossom algorithm).

use std::collections::VecDeque;

use crate::model::PlotGraph;

/// A maximum matching of `graph`, each edge as `(min, max)`, sorted by the
/// smaller endpoint.
pub fn maximum_matching(graph: &PlotGraph) -> Vec<(usize, usize)> {
    let n = graph.plot_count();
    let adj: Vec<Vec<usize>> = (0..n).map(|v| graph.neighbors(v).to_vec()).collect();
    let mut mate = vec![usize::MAX; n];

    // Greedy warm start; augmenting paths fix up the rest.
    for v in 0..n {
        if mate[v] == usize::MAX {
            if let Some(&w) = adj[v].iter().find(|&&w| mate[w] == usize::MAX) {
                mate[v] = w;
                mate[w] = v;
            }
        }
    }
    let mut search = Search::new(n);
    for root in 0..n {
        if mate[root] == usize::MAX {
            if let Some(end) = search.find_path(&adj, &mate, root) {
                search.augment(&mut mate, end);
            }
        }
    }

    let mut edges: Vec<_> = (0..n)
        .filter(|&v| mate[v] != usize::MAX && v < mate[v])
        .map(|v| (v, mate[v]))
        .collect();
    edges.sort_unstable();
    edges
}

const NONE: usize = usize::MAX;

struct Search {
    parent: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    blossom: Vec<bool>,
    queue: VecDeque<usize>,
}

impl Search {
    fn new(n: usize) -> Self {
        Search {
            parent: vec![NONE; n],
            base: (0..n).collect(),
            used: vec![false; n],
            blossom: vec![false; n],
            queue: VecDeque::new(),
        }
    }

    fn lca(&self, mate: &[usize], mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; mate.len()];
        loop {
            a = self.base[a];
            seen[a] = true;
            if mate[a] == NONE {
                break;
            }
            a = self.parent[mate[a]];
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            b = self.parent[mate[b]];
        }
    }

    fn mark_path(&mut self, mate: &[usize], mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.blossom[self.base[v]] = true;
            self.blossom[self.base[mate[v]]] = true;
            self.parent[v] = child;
            child = mate[v];
            v = self.parent[mate[v]];
        }
    }

    fn find_path(&mut self, adj: &[Vec<usize>], mate: &[usize], root: usize) -> Option<usize> {
        let n = mate.len();
        self.used.iter_mut().for_each(|x| *x = false);
        self.parent.iter_mut().for_each(|x| *x = NONE);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.queue.clear();
        self.used[root] = true;
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for &to in &adj[v] {
                if self.base[v] == self.base[to] || mate[v] == to {
                    continue;
                }
                if to == root || (mate[to] != NONE && self.parent[mate[to]] != NONE) {
                    let cur = self.lca(mate, v, to);
                    self.blossom.iter_mut().for_each(|x| *x = false);
                    self.mark_path(mate, v, cur, to);
                    self.mark_path(mate, to, cur, v);
                    for i in 0..n {
                        if self.blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if mate[to] == NONE {
                        return Some(to);
                    }
                    self.used[mate[to]] = true;
                    self.queue.push_back(mate[to]);
                }
            }
        }
        None
    }

    fn augment(&self, mate: &mut [usize], mut v: usize) {
        while v != NONE {
            let pv = self.parent[v];
            let ppv = mate[pv];
            mate[v] = pv;
            mate[pv] = v;
            v = ppv;
        }
    }
}
