//! Rectangular sample grids over the parameter domain, node masks and
//! spanning trees rooted at the base point.

use std::collections::VecDeque;

use thiserror::Error;

use crate::scalar::{cx, Cx, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least 2x2 nodes, got {nx}x{ny}")]
    TooSmall { nx: usize, ny: usize },
    #[error("empty or inverted rectangle")]
    BadRectangle,
    #[error("base point {re}{im:+}i is not a grid node")]
    BaseNotOnGrid { re: f64, im: f64 },
    #[error("base node is masked")]
    BaseMasked,
    #[error("{unreachable} unmasked nodes are not connected to the base node")]
    Disconnected { unreachable: usize },
    #[error("masked region at node ({i}, {j}) is enclosed by the domain; it is not simply connected")]
    NotSimplyConnected { i: usize, j: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeKind {
    /// Walk the base row first, then every column.
    RowFirst,
    /// Walk the base column first, then every row.
    ColumnFirst,
}

#[derive(Debug, Clone)]
pub struct DomainGrid<T> {
    x_min: T,
    x_max: T,
    y_min: T,
    y_max: T,
    nx: usize,
    ny: usize,
    base: (usize, usize),
    mask: Vec<bool>,
}

impl<T: Real> DomainGrid<T> {
    /// `nx × ny` nodes spanning the closed rectangle; `z0` must coincide with
    /// a node up to `1e-9` of the spacing.
    pub fn new(
        x_min: T,
        x_max: T,
        y_min: T,
        y_max: T,
        nx: usize,
        ny: usize,
        z0: Cx<T>,
    ) -> Result<Self, GridError> {
        if nx < 2 || ny < 2 {
            return Err(GridError::TooSmall { nx, ny });
        }
        if !(x_max > x_min && y_max > y_min) {
            return Err(GridError::BadRectangle);
        }
        let hx = (x_max - x_min) / T::of_usize(nx - 1);
        let hy = (y_max - y_min) / T::of_usize(ny - 1);
        let fi = (z0.re - x_min) / hx;
        let fj = (z0.im - y_min) / hy;
        let (ri, rj) = (fi.round(), fj.round());
        let off = T::lit(1e-9);
        let inside = ri >= T::zero()
            && rj >= T::zero()
            && ri <= T::of_usize(nx - 1)
            && rj <= T::of_usize(ny - 1);
        if !inside || (fi - ri).abs() > off || (fj - rj).abs() > off {
            return Err(GridError::BaseNotOnGrid {
                re: z0.re.to_f64_lossy(),
                im: z0.im.to_f64_lossy(),
            });
        }
        let base = (ri.to_usize().unwrap_or(0), rj.to_usize().unwrap_or(0));
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
            base,
            mask: vec![false; nx * ny],
        })
    }

    /// Square grid `[-half, half]²` centred on `0` with `n` nodes per side.
    pub fn centered_square(half: T, n: usize) -> Result<Self, GridError> {
        Self::new(-half, half, -half, half, n, n, cx(T::zero(), T::zero()))
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rect(&self) -> (T, T, T, T) {
        (self.x_min, self.x_max, self.y_min, self.y_max)
    }

    pub fn hx(&self) -> T {
        (self.x_max - self.x_min) / T::of_usize(self.nx - 1)
    }

    pub fn hy(&self) -> T {
        (self.y_max - self.y_min) / T::of_usize(self.ny - 1)
    }

    /// Largest of the two spacings.
    pub fn h(&self) -> T {
        self.hx().max(self.hy())
    }

    pub fn base(&self) -> (usize, usize) {
        self.base
    }

    pub fn base_index(&self) -> usize {
        self.index(self.base.0, self.base.1)
    }

    pub fn z0(&self) -> Cx<T> {
        self.node(self.base.0, self.base.1)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn node(&self, i: usize, j: usize) -> Cx<T> {
        cx(
            self.x_min + self.hx() * T::of_usize(i),
            self.y_min + self.hy() * T::of_usize(j),
        )
    }

    pub fn node_at(&self, k: usize) -> Cx<T> {
        let (i, j) = self.coords(k);
        self.node(i, j)
    }

    pub fn contains(&self, z: Cx<T>) -> bool {
        z.re >= self.x_min && z.re <= self.x_max && z.im >= self.y_min && z.im <= self.y_max
    }

    pub fn is_masked(&self, k: usize) -> bool {
        self.mask[k]
    }

    pub fn mask_node(&mut self, k: usize) {
        self.mask[k] = true;
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    /// Masks every node strictly closer than `radius` to `center`.
    pub fn mask_disk(&mut self, center: Cx<T>, radius: T) -> usize {
        self.mask_where(|z| (z - center).norm() < radius)
    }

    pub fn mask_where(&mut self, pred: impl Fn(Cx<T>) -> bool) -> usize {
        let mut n = 0;
        for k in 0..self.len() {
            if !self.mask[k] && pred(self.node_at(k)) {
                self.mask[k] = true;
                n += 1;
            }
        }
        n
    }

    /// Masks every node outside the closed disk.
    pub fn restrict_to_disk(&mut self, center: Cx<T>, radius: T) -> usize {
        self.mask_where(|z| (z - center).norm() > radius)
    }

    pub fn unmasked(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&k| !self.mask[k])
    }

    /// 4-neighbours of node `k` (unmasked or not).
    pub fn neighbours(&self, k: usize) -> impl Iterator<Item = usize> {
        let (i, j) = self.coords(k);
        let (nx, ny) = (self.nx, self.ny);
        let mut out = [usize::MAX; 4];
        if i > 0 {
            out[0] = k - 1;
        }
        if i + 1 < nx {
            out[1] = k + 1;
        }
        if j > 0 {
            out[2] = k - nx;
        }
        if j + 1 < ny {
            out[3] = k + nx;
        }
        out.into_iter().filter(|&v| v != usize::MAX)
    }

    /// Cells (lower-left node index) whose four corners are unmasked.
    pub fn cells(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for j in 0..self.ny - 1 {
            for i in 0..self.nx - 1 {
                let k = self.index(i, j);
                if [k, k + 1, k + self.nx, k + self.nx + 1]
                    .iter()
                    .all(|&c| !self.mask[c])
                {
                    out.push(k);
                }
            }
        }
        out
    }

    /// Verifies the base node is unmasked, every unmasked node is reachable,
    /// and no masked component is enclosed by unmasked nodes.
    pub fn check_topology(&self) -> Result<(), GridError> {
        let b = self.base_index();
        if self.mask[b] {
            return Err(GridError::BaseMasked);
        }
        let mut seen = vec![false; self.len()];
        seen[b] = true;
        let mut queue = VecDeque::from([b]);
        while let Some(k) = queue.pop_front() {
            for v in self.neighbours(k) {
                if !self.mask[v] && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        let unreachable = (0..self.len()).filter(|&k| !self.mask[k] && !seen[k]).count();
        if unreachable > 0 {
            return Err(GridError::Disconnected { unreachable });
        }
        // masked components under 8-connectivity must touch the border
        let mut comp = vec![false; self.len()];
        for start in 0..self.len() {
            if !self.mask[start] || comp[start] {
                continue;
            }
            comp[start] = true;
            let mut queue = VecDeque::from([start]);
            let mut touches = false;
            while let Some(k) = queue.pop_front() {
                let (i, j) = self.coords(k);
                if i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny {
                    touches = true;
                }
                for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        let (ii, jj) = (i as i64 + di, j as i64 + dj);
                        if ii < 0 || jj < 0 || ii >= self.nx as i64 || jj >= self.ny as i64 {
                            continue;
                        }
                        let v = self.index(ii as usize, jj as usize);
                        if self.mask[v] && !comp[v] {
                            comp[v] = true;
                            queue.push_back(v);
                        }
                    }
                }
            }
            if !touches {
                let (i, j) = self.coords(start);
                return Err(GridError::NotSimplyConnected { i, j });
            }
        }
        Ok(())
    }

    /// Spanning tree of the unmasked node graph rooted at the base node.
    pub fn spanning_tree(&self, kind: TreeKind) -> Result<SpanningTree, GridError> {
        self.check_topology()?;
        let n = self.len();
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut reached = vec![false; n];
        let root = self.base_index();
        reached[root] = true;
        let (step_a, step_b): (Box<dyn Fn(usize, i64) -> Option<usize>>, Box<dyn Fn(usize, i64) -> Option<usize>>) =
            match kind {
                TreeKind::RowFirst => (Box::new(|k, d| self.shift(k, d, 0)), Box::new(|k, d| self.shift(k, 0, d))),
                TreeKind::ColumnFirst => (Box::new(|k, d| self.shift(k, 0, d)), Box::new(|k, d| self.shift(k, d, 0))),
            };
        let walk = |from: usize,
                    dir: i64,
                    step: &dyn Fn(usize, i64) -> Option<usize>,
                    parent: &mut Vec<Option<usize>>,
                    reached: &mut Vec<bool>,
                    out: &mut Vec<usize>| {
            let mut cur = from;
            while let Some(next) = step(cur, dir) {
                if self.mask[next] || reached[next] {
                    break;
                }
                reached[next] = true;
                parent[next] = Some(cur);
                out.push(next);
                cur = next;
            }
        };
        let mut spine = vec![root];
        for dir in [-1, 1] {
            walk(root, dir, &*step_a, &mut parent, &mut reached, &mut spine);
        }
        for &s in spine.clone().iter() {
            let mut dummy = Vec::new();
            for dir in [-1, 1] {
                walk(s, dir, &*step_b, &mut parent, &mut reached, &mut dummy);
            }
        }
        // attach whatever the comb missed by breadth-first growth
        let mut queue: VecDeque<usize> = (0..n).filter(|&k| reached[k]).collect();
        while let Some(k) = queue.pop_front() {
            for v in self.neighbours(k) {
                if !self.mask[v] && !reached[v] {
                    reached[v] = true;
                    parent[v] = Some(k);
                    queue.push_back(v);
                }
            }
        }
        Ok(SpanningTree::from_parents(root, parent, &reached))
    }

    fn shift(&self, k: usize, di: i64, dj: i64) -> Option<usize> {
        let (i, j) = self.coords(k);
        let (ii, jj) = (i as i64 + di, j as i64 + dj);
        if ii < 0 || jj < 0 || ii >= self.nx as i64 || jj >= self.ny as i64 {
            None
        } else {
            Some(self.index(ii as usize, jj as usize))
        }
    }
}

/// Rooted spanning tree, stored as parent links plus breadth levels so that
/// every node appears after its parent and nodes in one level are independent.
#[derive(Debug, Clone)]
pub struct SpanningTree {
    root: usize,
    parent: Vec<Option<usize>>,
    levels: Vec<Vec<usize>>,
}

impl SpanningTree {
    fn from_parents(root: usize, parent: Vec<Option<usize>>, reached: &[bool]) -> Self {
        let n = parent.len();
        let mut children = vec![Vec::new(); n];
        for k in 0..n {
            if let Some(p) = parent[k] {
                children[p].push(k);
            }
        }
        let mut levels = vec![vec![root]];
        loop {
            let next: Vec<usize> = levels
                .last()
                .map(|l| l.iter().flat_map(|&k| children[k].iter().copied()).collect())
                .unwrap_or_default();
            if next.is_empty() {
                break;
            }
            levels.push(next);
        }
        debug_assert_eq!(
            levels.iter().map(Vec::len).sum::<usize>(),
            reached.iter().filter(|r| **r).count()
        );
        Self {
            root,
            parent,
            levels,
        }
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, k: usize) -> Option<usize> {
        self.parent[k]
    }

    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }
}

/// Per-node samples; masked nodes hold `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<V> {
    nx: usize,
    ny: usize,
    data: Vec<Option<V>>,
}

impl<V> Field<V> {
    pub fn empty(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            ny,
            data: (0..nx * ny).map(|_| None).collect(),
        }
    }

    pub fn from_vec(nx: usize, ny: usize, data: Vec<Option<V>>) -> Self {
        assert_eq!(data.len(), nx * ny, "field size mismatch");
        Self { nx, ny, data }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn get(&self, k: usize) -> Option<&V> {
        self.data.get(k).and_then(Option::as_ref)
    }

    pub fn at(&self, i: usize, j: usize) -> Option<&V> {
        if i >= self.nx || j >= self.ny {
            return None;
        }
        self.get(j * self.nx + i)
    }

    pub fn set(&mut self, k: usize, v: V) {
        self.data[k] = Some(v);
    }

    pub fn clear(&mut self, k: usize) {
        self.data[k] = None;
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &V)> {
        self.data
            .iter()
            .enumerate()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k, v)))
    }

    pub fn map<U>(&self, f: impl Fn(&V) -> U) -> Field<U> {
        Field {
            nx: self.nx,
            ny: self.ny,
            data: self.data.iter().map(|v| v.as_ref().map(&f)).collect(),
        }
    }

    pub fn raw(&self) -> &[Option<V>] {
        &self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> DomainGrid<f64> {
        DomainGrid::centered_square(1.0, n).unwrap()
    }

    #[test]
    fn base_snaps_to_node() {
        let g = grid(5);
        assert_eq!(g.base(), (2, 2));
        assert!(DomainGrid::new(-1.0, 1.0, -1.0, 1.0, 5, 5, cx(0.1, 0.0)).is_err());
    }

    #[test]
    fn trees_reach_every_unmasked_node() {
        let mut g = grid(21);
        g.mask_where(|z| z.re > 0.45 && z.im.abs() < 0.3);
        for kind in [TreeKind::RowFirst, TreeKind::ColumnFirst] {
            let t = g.spanning_tree(kind).unwrap();
            assert_eq!(t.node_count(), g.unmasked().count());
            for k in g.unmasked() {
                if k != t.root() {
                    let p = t.parent(k).unwrap();
                    assert!(g.neighbours(k).any(|v| v == p));
                }
            }
        }
    }

    #[test]
    fn interior_hole_is_refused() {
        let mut g = grid(21);
        g.mask_disk(cx(0.5, 0.5), 0.2);
        assert!(matches!(
            g.spanning_tree(TreeKind::RowFirst),
            Err(GridError::NotSimplyConnected { .. })
        ));
    }

    #[test]
    fn disconnected_region_is_refused() {
        let mut g = grid(21);
        g.mask_where(|z| z.re.abs() < 0.15 && z.im > 0.0 || (z.re.abs() < 0.15 && z.im < -0.05));
        g.mask_where(|z| z.re.abs() < 0.15 && z.im.abs() <= 0.05 && z.re.abs() > 0.0);
        assert!(g.check_topology().is_err());
    }
}
