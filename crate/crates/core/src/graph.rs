//! Multidigraph storage, degree accounting and component structure.

use serde::Serialize;

use crate::error::{Error, Result};

/// Arc `src -> dst` with multiplicity `mult >= 1`. Loops have `src == dst`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arc {
    pub src: u32,
    pub dst: u32,
    pub mult: u32,
}

/// A directed multigraph on vertices `0..n`.
///
/// Arcs are kept sorted by `(src, dst)` with one entry per ordered pair, so
/// multiplicity lookup is a binary search and iteration order is canonical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiDigraph {
    n: usize,
    arcs: Vec<Arc>,
    total: u64,
}

impl MultiDigraph {
    pub fn empty(n: usize) -> Self {
        MultiDigraph { n, arcs: Vec::new(), total: 0 }
    }

    /// Build from `(src, dst, mult)` triples in any order; repeated pairs are
    /// merged and zero multiplicities dropped.
    pub fn from_triples<I>(n: usize, triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u64)>,
    {
        let mut arcs = Vec::new();
        for (s, d, m) in triples {
            for v in [s, d] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            if m > 0 {
                let mult = u32::try_from(m).map_err(|_| {
                    Error::InvalidArgument(format!("multiplicity {m} exceeds u32"))
                })?;
                arcs.push(Arc { src: s as u32, dst: d as u32, mult });
            }
        }
        Ok(Self::from_arcs_unchecked(n, arcs))
    }

    /// Build from single arcs `(src, dst)`, each of multiplicity one.
    pub fn from_arc_list(n: usize, list: Vec<(u32, u32)>) -> Self {
        debug_assert!(list.iter().all(|&(s, d)| (s as usize) < n && (d as usize) < n));
        Self::from_arcs_unchecked(
            n,
            list.into_iter().map(|(src, dst)| Arc { src, dst, mult: 1 }).collect(),
        )
    }

    pub(crate) fn from_arcs_unchecked(n: usize, mut arcs: Vec<Arc>) -> Self {
        arcs.sort_unstable_by_key(|a| (a.src, a.dst));
        let mut merged: Vec<Arc> = Vec::with_capacity(arcs.len());
        for a in arcs {
            if a.mult == 0 {
                continue;
            }
            match merged.last_mut() {
                Some(last) if last.src == a.src && last.dst == a.dst => last.mult += a.mult,
                _ => merged.push(a),
            }
        }
        let total = merged.iter().map(|a| a.mult as u64).sum();
        MultiDigraph { n, arcs: merged, total }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Number of distinct ordered pairs carrying at least one arc.
    pub fn support_size(&self) -> usize {
        self.arcs.len()
    }

    /// Sum of all multiplicities, loops included.
    pub fn total_arcs(&self) -> u64 {
        self.total
    }

    pub fn total_loops(&self) -> u64 {
        self.arcs.iter().filter(|a| a.src == a.dst).map(|a| a.mult as u64).sum()
    }

    pub fn multiplicity(&self, v: usize, w: usize) -> u64 {
        if v >= self.n || w >= self.n {
            return 0;
        }
        self.arcs
            .binary_search_by_key(&(v as u32, w as u32), |a| (a.src, a.dst))
            .map(|i| self.arcs[i].mult as u64)
            .unwrap_or(0)
    }

    /// Superposition of two graphs on the same vertex set.
    pub fn arc_sum(&self, other: &MultiDigraph) -> Result<MultiDigraph> {
        if self.n != other.n {
            return Err(Error::InvalidArgument(format!(
                "cannot add graphs on {} and {} vertices",
                self.n, other.n
            )));
        }
        let arcs = self.arcs.iter().chain(other.arcs.iter()).copied().collect();
        Ok(Self::from_arcs_unchecked(self.n, arcs))
    }

    /// Same arcs with direction flipped.
    pub fn reversed(&self) -> MultiDigraph {
        let arcs = self.arcs.iter().map(|a| Arc { src: a.dst, dst: a.src, mult: a.mult }).collect();
        Self::from_arcs_unchecked(self.n, arcs)
    }

    fn adjacency(&self, reverse: bool) -> Csr {
        Csr::build(self.n, self.arcs.iter().filter(|a| a.src != a.dst).map(|a| {
            if reverse {
                (a.dst, a.src)
            } else {
                (a.src, a.dst)
            }
        }))
    }
}

/// Compressed adjacency lists over the arc support, loops dropped.
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Csr {
    fn build(n: usize, edges: impl Iterator<Item = (u32, u32)> + Clone) -> Csr {
        let mut offsets = vec![0usize; n + 1];
        for (s, _) in edges.clone() {
            offsets[s as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; offsets[n]];
        for (s, d) in edges {
            targets[fill[s as usize]] = d;
            fill[s as usize] += 1;
        }
        Csr { offsets, targets }
    }

    fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Per-vertex degrees. Loops count towards `total` only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct DegreeVector {
    pub d_in: u64,
    pub d_out: u64,
    pub loops: u64,
    pub total: u64,
}

pub fn degrees(g: &MultiDigraph) -> Vec<DegreeVector> {
    let mut deg = vec![DegreeVector::default(); g.n];
    for a in &g.arcs {
        let m = a.mult as u64;
        if a.src == a.dst {
            deg[a.src as usize].loops += m;
        } else {
            deg[a.src as usize].d_out += m;
            deg[a.dst as usize].d_in += m;
        }
    }
    for d in &mut deg {
        d.total = d.d_in + d.d_out + d.loops;
    }
    deg
}

fn reach(adj: &Csr, n: usize, v: usize) -> Result<Vec<usize>> {
    if v >= n {
        return Err(Error::VertexOutOfRange { vertex: v, n });
    }
    let mut seen = vec![false; n];
    let mut stack = vec![v];
    seen[v] = true;
    let mut out = Vec::new();
    while let Some(u) = stack.pop() {
        out.push(u);
        for &w in adj.neighbors(u) {
            if !seen[w as usize] {
                seen[w as usize] = true;
                stack.push(w as usize);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Vertices reachable from `v` along arcs, `v` included. Sorted.
pub fn forward_cluster(g: &MultiDigraph, v: usize) -> Result<Vec<usize>> {
    reach(&g.adjacency(false), g.n, v)
}

/// Vertices from which `v` is reachable, `v` included. Sorted.
pub fn backward_cluster(g: &MultiDigraph, v: usize) -> Result<Vec<usize>> {
    reach(&g.adjacency(true), g.n, v)
}

/// A labeling of `0..n` into classes. Labels are dense and numbered in order
/// of first appearance by vertex index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<u32>,
    sizes: Vec<usize>,
}

impl Partition {
    fn from_raw(raw: &[usize]) -> Partition {
        let mut remap = vec![u32::MAX; raw.len()];
        let mut sizes = Vec::new();
        let labels = raw
            .iter()
            .map(|&r| {
                if remap[r] == u32::MAX {
                    remap[r] = sizes.len() as u32;
                    sizes.push(0);
                }
                sizes[remap[r] as usize] += 1;
                remap[r]
            })
            .collect();
        Partition { labels, sizes }
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v] as usize
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn class_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn largest(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    pub fn members(&self, label: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&v| self.labels[v] as usize == label).collect()
    }

    /// Class sizes in decreasing order, at most `k` of them.
    pub fn top_sizes(&self, k: usize) -> Vec<usize> {
        let mut s = self.sizes.clone();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s.truncate(k);
        s
    }

    /// Whether every class of `self` lies inside a single class of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.labels.len() != coarser.labels.len() {
            return false;
        }
        let mut image = vec![u32::MAX; self.sizes.len()];
        for (v, &l) in self.labels.iter().enumerate() {
            let c = coarser.labels[v];
            let slot = &mut image[l as usize];
            if *slot == u32::MAX {
                *slot = c;
            } else if *slot != c {
                return false;
            }
        }
        true
    }
}

/// Iterative Tarjan; recursion would overflow at graph sizes of interest.
pub fn strong_partition(g: &MultiDigraph) -> Partition {
    let n = g.n;
    let adj = g.adjacency(false);
    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comp = vec![UNVISITED; n];
    let mut next_index = 0;
    let mut next_comp = 0;
    // (vertex, position in its neighbor list)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        lowlink[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let nbrs = adj.neighbors(v);
            if *pos < nbrs.len() {
                let w = nbrs[*pos] as usize;
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    lowlink[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    lowlink[parent] = lowlink[parent].min(lowlink[v]);
                }
                if lowlink[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    Partition::from_raw(&comp)
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        match self.rank[a].cmp(&self.rank[b]) {
            std::cmp::Ordering::Less => self.parent[a] = b,
            std::cmp::Ordering::Greater => self.parent[b] = a,
            std::cmp::Ordering::Equal => {
                self.parent[b] = a;
                self.rank[a] += 1;
            }
        }
    }
}

/// Connected components with arc directions ignored.
pub fn weak_partition(g: &MultiDigraph) -> Partition {
    let mut sets = DisjointSets::new(g.n);
    for a in &g.arcs {
        sets.union(a.src as usize, a.dst as usize);
    }
    let roots: Vec<usize> = (0..g.n).map(|v| sets.find(v)).collect();
    Partition::from_raw(&roots)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSummary {
    pub strong: Partition,
    pub weak: Partition,
}

impl ComponentSummary {
    pub fn largest_strong(&self) -> usize {
        self.strong.largest()
    }

    pub fn largest_weak(&self) -> usize {
        self.weak.largest()
    }

    pub fn report(&self, top_k: usize) -> ComponentReport {
        ComponentReport {
            largest_weak: self.largest_weak(),
            largest_strong: self.largest_strong(),
            weak_sizes_topk: self.weak.top_sizes(top_k),
            strong_sizes_topk: self.strong.top_sizes(top_k),
        }
    }
}

/// JSON shape of a component report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct ComponentReport {
    pub largest_weak: usize,
    pub largest_strong: usize,
    pub weak_sizes_topk: Vec<usize>,
    pub strong_sizes_topk: Vec<usize>,
}

pub fn components(g: &MultiDigraph) -> ComponentSummary {
    ComponentSummary { strong: strong_partition(g), weak: weak_partition(g) }
}

/// `max_v |F[v]|`.
///
/// `u -> v` implies `F[v] ⊆ F[u]`, so the maximum is attained on a strong
/// class with no arcs entering from other classes. One search per such class.
pub fn largest_forward_cluster(g: &MultiDigraph) -> usize {
    let n = g.n;
    if n == 0 {
        return 0;
    }
    let strong = strong_partition(g);
    let mut has_entry = vec![false; strong.class_count()];
    for a in &g.arcs {
        let (ls, ld) = (strong.label(a.src as usize), strong.label(a.dst as usize));
        if ls != ld {
            has_entry[ld] = true;
        }
    }
    let mut representative = vec![usize::MAX; strong.class_count()];
    for v in 0..n {
        let l = strong.label(v);
        if representative[l] == usize::MAX {
            representative[l] = v;
        }
    }
    let adj = g.adjacency(false);
    let mut stamp = vec![u32::MAX; n];
    let mut stack = Vec::new();
    let mut best = 0;
    for (round, (&rep, _)) in representative
        .iter()
        .zip(has_entry.iter())
        .filter(|(_, &entry)| !entry)
        .enumerate()
    {
        let round = round as u32;
        stack.clear();
        stack.push(rep);
        stamp[rep] = round;
        let mut count = 0;
        while let Some(u) = stack.pop() {
            count += 1;
            for &w in adj.neighbors(u) {
                if stamp[w as usize] != round {
                    stamp[w as usize] = round;
                    stack.push(w as usize);
                }
            }
        }
        best = best.max(count);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, arcs: &[(usize, usize, u64)]) -> MultiDigraph {
        MultiDigraph::from_triples(n, arcs.iter().copied()).unwrap()
    }

    #[test]
    fn empty_graph_degrees() {
        let g = MultiDigraph::empty(4);
        assert!(degrees(&g).iter().all(|d| *d == DegreeVector::default()));
    }

    #[test]
    fn degree_conventions() {
        // (1,2):3 and (2,2):1 in 1-based notation
        let g = graph(2, &[(0, 1, 3), (1, 1, 1)]);
        let d = degrees(&g);
        assert_eq!(d[0], DegreeVector { d_in: 0, d_out: 3, loops: 0, total: 3 });
        assert_eq!(d[1], DegreeVector { d_in: 3, d_out: 0, loops: 1, total: 4 });
    }

    #[test]
    fn triples_merge_and_validate() {
        let g = graph(3, &[(0, 1, 1), (0, 1, 2), (2, 2, 0)]);
        assert_eq!(g.multiplicity(0, 1), 3);
        assert_eq!(g.support_size(), 1);
        assert_eq!(g.total_arcs(), 3);
        assert!(MultiDigraph::from_triples(2, [(0, 2, 1)]).is_err());
    }

    #[test]
    fn path_clusters() {
        let g = graph(3, &[(0, 1, 1), (1, 2, 1)]);
        assert_eq!(forward_cluster(&g, 0).unwrap(), vec![0, 1, 2]);
        assert_eq!(backward_cluster(&g, 2).unwrap(), vec![0, 1, 2]);
        assert_eq!(forward_cluster(&g, 2).unwrap(), vec![2]);
        assert!(forward_cluster(&g, 3).is_err());
    }

    #[test]
    fn isolated_vertex_is_its_own_cluster() {
        let g = graph(3, &[(0, 1, 1)]);
        assert_eq!(forward_cluster(&g, 2).unwrap(), vec![2]);
        assert_eq!(backward_cluster(&g, 2).unwrap(), vec![2]);
    }

    #[test]
    fn two_cycle_with_tail() {
        let g = graph(3, &[(0, 1, 1), (1, 0, 1), (1, 2, 1)]);
        assert_eq!(forward_cluster(&g, 0).unwrap(), vec![0, 1, 2]);
        assert_eq!(backward_cluster(&g, 2).unwrap(), vec![0, 1, 2]);
        let s = strong_partition(&g);
        assert_eq!(s.label(0), s.label(1));
        assert_ne!(s.label(0), s.label(2));
    }

    #[test]
    fn backward_is_forward_on_reverse() {
        let g = graph(5, &[(0, 1, 1), (1, 2, 2), (3, 1, 1), (2, 4, 1), (4, 2, 1)]);
        let r = g.reversed();
        for v in 0..5 {
            assert_eq!(backward_cluster(&g, v).unwrap(), forward_cluster(&r, v).unwrap());
        }
    }

    #[test]
    fn cycle_and_dag() {
        let cycle = graph(3, &[(0, 1, 1), (1, 2, 1), (2, 0, 1)]);
        assert_eq!(strong_partition(&cycle).class_sizes(), &[3]);
        let dag = graph(4, &[(0, 1, 1), (0, 2, 1), (1, 3, 1), (2, 3, 1)]);
        let s = strong_partition(&dag);
        assert_eq!(s.class_count(), 4);
        assert_eq!(s.largest(), 1);
    }

    #[test]
    fn weak_classes() {
        let g = graph(3, &[(0, 1, 1)]);
        let w = weak_partition(&g);
        assert_eq!(w.class_count(), 2);
        assert_eq!(w.label(0), w.label(1));
        assert_eq!(w.members(w.label(2)), vec![2]);
        assert!(strong_partition(&g).refines(&w));
        assert!(!w.refines(&strong_partition(&g)));
    }

    #[test]
    fn loops_do_not_affect_components() {
        let g = graph(2, &[(0, 0, 5)]);
        assert_eq!(weak_partition(&g).class_count(), 2);
        assert_eq!(strong_partition(&g).class_count(), 2);
    }

    #[test]
    fn report_shape() {
        let g = graph(5, &[(0, 1, 1), (1, 2, 1), (2, 0, 1), (3, 4, 1)]);
        let r = components(&g).report(10);
        assert_eq!(r.largest_strong, 3);
        assert_eq!(r.largest_weak, 3);
        assert_eq!(r.weak_sizes_topk, vec![3, 2]);
        assert_eq!(r.strong_sizes_topk, vec![3, 1, 1]);
        let json = serde_json::to_value(&r).unwrap();
        for key in ["largest_weak", "largest_strong", "weak_sizes_topk", "strong_sizes_topk"] {
            assert!(json.get(key).is_some());
        }
    }

    #[test]
    fn largest_forward_matches_brute_force() {
        let g = graph(
            7,
            &[(0, 1, 1), (1, 0, 1), (1, 2, 1), (3, 2, 1), (2, 4, 1), (5, 6, 1), (4, 5, 1)],
        );
        let brute = (0..7).map(|v| forward_cluster(&g, v).unwrap().len()).max().unwrap();
        assert_eq!(largest_forward_cluster(&g), brute);
    }

    #[test]
    fn arc_sum_adds_multiplicities() {
        let a = graph(2, &[(0, 1, 1)]);
        let b = graph(2, &[(0, 1, 2), (1, 0, 1)]);
        let s = a.arc_sum(&b).unwrap();
        assert_eq!(s.multiplicity(0, 1), 3);
        assert_eq!(s.multiplicity(1, 0), 1);
        assert_eq!(s.total_arcs(), 4);
        assert!(a.arc_sum(&MultiDigraph::empty(3)).is_err());
    }
}
