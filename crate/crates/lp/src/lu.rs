//! Sparse LU factorization of simplex bases with product-form updates.
//!
//! Columns are eliminated left-looking (Gilbert–Peierls) in ascending
//! order of their nonzero count. Each column picks its pivot by threshold
//! partial pivoting, preferring rows with few static nonzeros. Basis changes
//! between refactorizations are applied as eta columns.

/// Column-compressed view of the basis matrix, one column per basis position.
pub(crate) struct BasisColumns {
    pub start: Vec<usize>,
    pub rows: Vec<usize>,
    pub vals: Vec<f64>,
}

impl BasisColumns {
    pub fn with_capacity(m: usize) -> Self {
        BasisColumns {
            start: Vec::with_capacity(m + 1),
            rows: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn clear(&mut self) {
        self.start.clear();
        self.rows.clear();
        self.vals.clear();
        self.start.push(0);
    }

    pub fn push(&mut self, rows: &[usize], vals: &[f64]) {
        self.rows.extend_from_slice(rows);
        self.vals.extend_from_slice(vals);
        self.start.push(self.rows.len());
    }

    pub fn push_single(&mut self, row: usize, val: f64) {
        self.rows.push(row);
        self.vals.push(val);
        self.start.push(self.rows.len());
    }

    fn col(&self, p: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.start[p], self.start[p + 1]);
        (&self.rows[a..b], &self.vals[a..b])
    }
}

#[derive(Debug)]
pub(crate) struct Singular {
    /// Basis positions whose column could not be pivoted.
    pub positions: Vec<usize>,
    /// Rows left without a pivot, same length as `positions`.
    pub rows: Vec<usize>,
}

const SINGULAR_TOL: f64 = 1e-11;
const THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone)]
struct Eta {
    pos: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub(crate) struct Factor {
    m: usize,
    pivot_row: Vec<usize>,
    col_pos: Vec<usize>,
    l_start: Vec<usize>,
    l_row: Vec<usize>,
    l_val: Vec<f64>,
    u_start: Vec<usize>,
    u_step: Vec<usize>,
    u_val: Vec<f64>,
    u_diag: Vec<f64>,
    etas: Vec<Eta>,
    eta_nnz: usize,
    work: Vec<f64>,
}

impl Factor {
    pub fn factorize(m: usize, cols: &BasisColumns) -> Result<Factor, Singular> {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&p| (cols.start[p + 1] - cols.start[p], p));
        let mut row_count = vec![0usize; m];
        for &i in &cols.rows {
            row_count[i] += 1;
        }

        const NONE: usize = usize::MAX;
        let mut row_step = vec![NONE; m];
        let mut f = Factor {
            m,
            pivot_row: Vec::with_capacity(m),
            col_pos: Vec::with_capacity(m),
            l_start: vec![0],
            l_row: Vec::new(),
            l_val: Vec::new(),
            u_start: vec![0],
            u_step: Vec::new(),
            u_val: Vec::new(),
            u_diag: Vec::with_capacity(m),
            etas: Vec::new(),
            eta_nnz: 0,
            work: vec![0.0; m],
        };

        let mut z = vec![0.0; m];
        let mut touched: Vec<usize> = Vec::new();
        let mut in_touched = vec![false; m];
        let mut visited = vec![usize::MAX; m];
        let mut topo: Vec<usize> = Vec::new();
        let mut stack: Vec<(usize, usize)> = Vec::new();
        let mut bad_positions = Vec::new();

        for (round, &pos) in order.iter().enumerate() {
            let (rows, vals) = cols.col(pos);
            touched.clear();
            topo.clear();
            for (&i, &v) in rows.iter().zip(vals) {
                z[i] += v;
                if !in_touched[i] {
                    in_touched[i] = true;
                    touched.push(i);
                }
            }
            // Steps reachable from the column pattern through L, in postorder.
            for &i in rows {
                let s = row_step[i];
                if s == NONE || visited[s] == round {
                    continue;
                }
                visited[s] = round;
                stack.push((s, f.l_start[s]));
                while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                    let end = f.l_start[node + 1];
                    let mut descended = false;
                    while *next < end {
                        let r = f.l_row[*next];
                        *next += 1;
                        let child = row_step[r];
                        if child != NONE && visited[child] != round {
                            visited[child] = round;
                            stack.push((child, f.l_start[child]));
                            descended = true;
                            break;
                        }
                    }
                    if !descended {
                        topo.push(node);
                        stack.pop();
                    }
                }
            }
            for &s in topo.iter().rev() {
                let v = z[f.pivot_row[s]];
                if v == 0.0 {
                    continue;
                }
                for e in f.l_start[s]..f.l_start[s + 1] {
                    let i = f.l_row[e];
                    z[i] -= f.l_val[e] * v;
                    if !in_touched[i] {
                        in_touched[i] = true;
                        touched.push(i);
                    }
                }
            }

            let mut max_abs: f64 = 0.0;
            for &i in &touched {
                if row_step[i] == NONE {
                    max_abs = max_abs.max(z[i].abs());
                }
            }
            if max_abs <= SINGULAR_TOL {
                bad_positions.push(pos);
                for &i in &touched {
                    z[i] = 0.0;
                    in_touched[i] = false;
                }
                continue;
            }
            let mut pivot = NONE;
            let mut best = (usize::MAX, usize::MAX);
            for &i in &touched {
                if row_step[i] == NONE && z[i].abs() >= THRESHOLD * max_abs {
                    let key = (row_count[i], i);
                    if key < best {
                        best = key;
                        pivot = i;
                    }
                }
            }
            let k = f.pivot_row.len();
            let piv = z[pivot];
            let mut u_entries: Vec<(usize, f64)> = topo
                .iter()
                .filter_map(|&s| {
                    let v = z[f.pivot_row[s]];
                    (v != 0.0).then_some((s, v))
                })
                .collect();
            u_entries.sort_unstable_by_key(|e| e.0);
            for (s, v) in u_entries {
                f.u_step.push(s);
                f.u_val.push(v);
            }
            f.u_start.push(f.u_step.len());
            f.u_diag.push(piv);
            let mut l_entries: Vec<usize> = touched
                .iter()
                .copied()
                .filter(|&i| i != pivot && row_step[i] == NONE && z[i] != 0.0)
                .collect();
            l_entries.sort_unstable();
            for i in l_entries {
                f.l_row.push(i);
                f.l_val.push(z[i] / piv);
            }
            f.l_start.push(f.l_row.len());
            f.pivot_row.push(pivot);
            f.col_pos.push(pos);
            row_step[pivot] = k;
            for &i in &touched {
                z[i] = 0.0;
                in_touched[i] = false;
            }
        }

        if !bad_positions.is_empty() {
            let rows: Vec<usize> = (0..m).filter(|&i| row_step[i] == NONE).collect();
            bad_positions.sort_unstable();
            return Err(Singular {
                positions: bad_positions,
                rows,
            });
        }
        Ok(f)
    }

    pub fn num_etas(&self) -> usize {
        self.etas.len()
    }

    pub fn eta_nnz(&self) -> usize {
        self.eta_nnz
    }

    /// Solves `B x = b` in place; `b` is indexed by row on entry and by
    /// basis position on return.
    pub fn ftran(&mut self, b: &mut [f64]) {
        let m = self.m;
        let v = &mut self.work;
        for k in 0..m {
            let val = b[self.pivot_row[k]];
            v[k] = val;
            if val != 0.0 {
                for e in self.l_start[k]..self.l_start[k + 1] {
                    b[self.l_row[e]] -= self.l_val[e] * val;
                }
            }
        }
        for k in (0..m).rev() {
            let w = v[k] / self.u_diag[k];
            v[k] = w;
            if w != 0.0 {
                for e in self.u_start[k]..self.u_start[k + 1] {
                    v[self.u_step[e]] -= self.u_val[e] * w;
                }
            }
        }
        for k in 0..m {
            b[self.col_pos[k]] = v[k];
        }
        for eta in &self.etas {
            let xp = b[eta.pos] / eta.pivot;
            b[eta.pos] = xp;
            if xp != 0.0 {
                for &(i, a) in &eta.entries {
                    b[i] -= a * xp;
                }
            }
        }
    }

    /// Solves `Bᵀ y = c` in place; `c` is indexed by basis position on entry
    /// and by row on return.
    pub fn btran(&mut self, c: &mut [f64]) {
        let m = self.m;
        for eta in self.etas.iter().rev() {
            let mut s = c[eta.pos];
            for &(i, a) in &eta.entries {
                s -= a * c[i];
            }
            c[eta.pos] = s / eta.pivot;
        }
        let t = &mut self.work;
        for k in 0..m {
            let mut s = c[self.col_pos[k]];
            for e in self.u_start[k]..self.u_start[k + 1] {
                s -= self.u_val[e] * t[self.u_step[e]];
            }
            t[k] = s / self.u_diag[k];
        }
        for k in (0..m).rev() {
            let mut s = t[k];
            for e in self.l_start[k]..self.l_start[k + 1] {
                s -= self.l_val[e] * c[self.l_row[e]];
            }
            c[self.pivot_row[k]] = s;
        }
    }

    /// Records the replacement of the column at `pos` by a column whose
    /// ftran image is `alpha` (indexed by basis position).
    pub fn push_eta(&mut self, pos: usize, alpha: &[f64]) {
        let entries: Vec<(usize, f64)> = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != pos && a != 0.0)
            .map(|(i, &a)| (i, a))
            .collect();
        self.eta_nnz += entries.len();
        self.etas.push(Eta {
            pos,
            pivot: alpha[pos],
            entries,
        });
    }
}
