use std::collections::VecDeque;

use rand::Rng;

/// Perfect maze on a `cols × rows` cell grid, carved with an iterative
/// recursive-backtracker. Passages form a spanning tree of the cell graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerfectMaze {
    cols: usize,
    rows: usize,
    /// `open_east[r * cols + c]`: passage between (c, r) and (c + 1, r).
    open_east: Vec<bool>,
    /// `open_north[r * cols + c]`: passage between (c, r) and (c, r + 1).
    open_north: Vec<bool>,
}

impl PerfectMaze {
    pub fn carve<R: Rng>(cols: usize, rows: usize, start: (usize, usize), rng: &mut R) -> PerfectMaze {
        assert!(cols > 0 && rows > 0 && start.0 < cols && start.1 < rows);
        let mut maze = PerfectMaze {
            cols,
            rows,
            open_east: vec![false; cols * rows],
            open_north: vec![false; cols * rows],
        };
        let mut visited = vec![false; cols * rows];
        let mut stack = vec![start];
        visited[start.1 * cols + start.0] = true;
        while let Some(&(c, r)) = stack.last() {
            let mut options = [(0usize, 0usize); 4];
            let mut n = 0;
            for (dc, dr) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                let nc = c as i64 + dc;
                let nr = r as i64 + dr;
                if nc < 0 || nr < 0 || nc >= cols as i64 || nr >= rows as i64 {
                    continue;
                }
                let (nc, nr) = (nc as usize, nr as usize);
                if !visited[nr * cols + nc] {
                    options[n] = (nc, nr);
                    n += 1;
                }
            }
            if n == 0 {
                stack.pop();
                continue;
            }
            let next = options[rng.random_range(0..n)];
            maze.open(c, r, next.0, next.1);
            visited[next.1 * cols + next.0] = true;
            stack.push(next);
        }
        maze
    }

    fn open(&mut self, c0: usize, r0: usize, c1: usize, r1: usize) {
        if r0 == r1 {
            let c = c0.min(c1);
            self.open_east[r0 * self.cols + c] = true;
        } else {
            let r = r0.min(r1);
            self.open_north[r * self.cols + c0] = true;
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn is_open_east(&self, c: usize, r: usize) -> bool {
        c + 1 < self.cols && self.open_east[r * self.cols + c]
    }

    pub fn is_open_north(&self, c: usize, r: usize) -> bool {
        r + 1 < self.rows && self.open_north[r * self.cols + c]
    }

    pub fn passage_count(&self) -> usize {
        self.open_east.iter().chain(&self.open_north).filter(|&&b| b).count()
    }

    pub fn neighbours(&self, c: usize, r: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(4);
        if self.is_open_east(c, r) {
            out.push((c + 1, r));
        }
        if c > 0 && self.is_open_east(c - 1, r) {
            out.push((c - 1, r));
        }
        if self.is_open_north(c, r) {
            out.push((c, r + 1));
        }
        if r > 0 && self.is_open_north(c, r - 1) {
            out.push((c, r - 1));
        }
        out
    }

    /// BFS cell path between two cells, if connected.
    pub fn path(&self, from: (usize, usize), to: (usize, usize)) -> Option<Vec<(usize, usize)>> {
        let idx = |c: usize, r: usize| r * self.cols + c;
        let mut prev = vec![usize::MAX; self.cols * self.rows];
        let mut queue = VecDeque::from([from]);
        prev[idx(from.0, from.1)] = idx(from.0, from.1);
        while let Some((c, r)) = queue.pop_front() {
            if (c, r) == to {
                let mut path = vec![to];
                let mut cur = idx(c, r);
                while cur != idx(from.0, from.1) {
                    cur = prev[cur];
                    path.push((cur % self.cols, cur / self.cols));
                }
                path.reverse();
                return Some(path);
            }
            for (nc, nr) in self.neighbours(c, r) {
                if prev[idx(nc, nr)] == usize::MAX {
                    prev[idx(nc, nr)] = idx(c, r);
                    queue.push_back((nc, nr));
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn carved_maze_is_spanning_tree() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = PerfectMaze::carve(10, 16, (4, 0), &mut rng);
            assert_eq!(m.passage_count(), 10 * 16 - 1);
            for c in 0..10 {
                for r in 0..16 {
                    assert!(m.path((0, 0), (c, r)).is_some());
                }
            }
        }
    }
}
