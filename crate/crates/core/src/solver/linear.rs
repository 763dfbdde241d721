use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Square sparse matrix kept as a list of (row, col, value) entries;
/// repeated entries are summed.
#[derive(Debug, Clone, Default)]
pub struct SparseMatrix {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n && col < self.n);
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Sorts entries and merges duplicates.
    pub fn compress(&mut self) {
        self.entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for &(r, c, v) in &self.entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        self.entries = merged;
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.n);
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    /// Entry `(row, col)`; linear scan, intended for tests.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries
            .iter()
            .filter(|&&(r, c, _)| r == row && c == col)
            .map(|e| e.2)
            .sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// Solves `self x = rhs` with a sparse LU factorization.
    pub fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        if rhs.len() != self.n {
            return Err(Error::Mismatch(format!("right-hand side of length {} for dimension {}", rhs.len(), self.n)));
        }
        let mut merged = self.clone();
        merged.compress();
        let factorization = Factorization::new(&merged)?;
        let mut x = factorization.apply(rhs);
        if factorization.low_rank.is_some() {
            x = gmres(&merged, &factorization, rhs, x, 1e-14, 40);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular { what: "global" });
        }
        Ok(x)
    }
}

/// Sparse LU of a matrix whose dense rows and columns are split off.
///
/// Dense rows and columns make the sparse LU fill in completely. Each one is
/// reduced to its largest entry and the remainder is restored through a
/// low-rank (Woodbury) correction `K = K0 + U V^T`.
struct Factorization {
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    n: usize,
    low_rank: Option<LowRank>,
}

struct LowRank {
    vt: DMatrix<f64>,
    z: DMatrix<f64>,
    capacitance: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Factorization {
    fn new(a: &SparseMatrix) -> Result<Self> {
        let n = a.n;
        let threshold = 64usize.max((8.0 * (n as f64).sqrt()) as usize);
        let mut row_count = vec![0usize; n];
        let mut col_count = vec![0usize; n];
        for &(r, c, _) in &a.entries {
            row_count[r] += 1;
            col_count[c] += 1;
        }
        let dense: Vec<usize> = (0..n).filter(|&i| row_count[i] > threshold || col_count[i] > threshold).collect();
        if dense.is_empty() {
            return Ok(Self { lu: sparse_lu(n, &a.entries)?, n, low_rank: None });
        }

        let mut slot = vec![usize::MAX; n];
        for (i, &d) in dense.iter().enumerate() {
            slot[d] = i;
        }
        let mut row_rest: Vec<DVector<f64>> = dense.iter().map(|_| DVector::zeros(n)).collect();
        let mut col_rest: Vec<DVector<f64>> = dense.iter().map(|_| DVector::zeros(n)).collect();
        let mut base = Vec::with_capacity(a.entries.len());
        for &(r, c, v) in &a.entries {
            if slot[r] != usize::MAX {
                row_rest[slot[r]][c] += v;
            } else if slot[c] != usize::MAX {
                col_rest[slot[c]][r] += v;
            } else {
                base.push((r, c, v));
            }
        }
        // anchor each dense unknown at an index where both its row and its
        // column are large, so that K0 keeps the constraint it enforces
        for (i, &d) in dense.iter().enumerate() {
            let row_scale = row_rest[i].amax();
            let col_scale = col_rest[i].amax();
            let score = |j: usize| {
                let r = row_rest[i][j].abs() / row_scale;
                let c = if col_scale > 0.0 { col_rest[i][j].abs() / col_scale } else { 1.0 };
                r * c
            };
            let j = (0..n).max_by(|&a, &b| score(a).total_cmp(&score(b))).unwrap_or(d);
            base.push((d, j, row_rest[i][j]));
            row_rest[i][j] = 0.0;
            if col_rest[i][j] != 0.0 {
                base.push((j, d, col_rest[i][j]));
                col_rest[i][j] = 0.0;
            }
        }
        let lu = sparse_lu(n, &base)?;

        let m = dense.len();
        let mut u = DMatrix::zeros(n, 2 * m);
        let mut vt = DMatrix::zeros(2 * m, n);
        for (i, &d) in dense.iter().enumerate() {
            u[(d, 2 * i)] = 1.0;
            vt.row_mut(2 * i).copy_from(&row_rest[i].transpose());
            u.column_mut(2 * i + 1).copy_from(&col_rest[i]);
            vt[(2 * i + 1, d)] = 1.0;
        }
        let z = lu_apply(&lu, &u);
        let capacitance = (DMatrix::identity(2 * m, 2 * m) + &vt * &z).lu();
        if !capacitance.is_invertible() {
            return Err(Error::Singular { what: "capacitance" });
        }
        Ok(Self { lu, n, low_rank: Some(LowRank { vt, z, capacitance }) })
    }

    fn apply(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let y = lu_apply(&self.lu, &DMatrix::from_column_slice(self.n, 1, rhs.as_slice())).column(0).into_owned();
        match &self.low_rank {
            None => y,
            Some(lr) => {
                let w = lr.capacitance.solve(&(&lr.vt * &y)).unwrap_or_else(|| DVector::from_element(lr.vt.nrows(), f64::NAN));
                y - &lr.z * w
            }
        }
    }
}

/// Right-preconditioned GMRES started from `x0`; returns the best iterate.
fn gmres(a: &SparseMatrix, precond: &Factorization, rhs: &DVector<f64>, x0: DVector<f64>, rtol: f64, max_iter: usize)
    -> DVector<f64> {
    let target = rtol * rhs.norm();
    let r0 = rhs - a.mul_vec(&x0);
    let beta = r0.norm();
    if beta <= target || beta == 0.0 {
        return x0;
    }
    let mut basis = vec![r0 / beta];
    let mut hessenberg = DMatrix::<f64>::zeros(max_iter + 1, max_iter);
    let mut best = (beta, DVector::zeros(0));
    for j in 0..max_iter {
        let w0 = a.mul_vec(&precond.apply(&basis[j]));
        let mut w = w0;
        for (i, v) in basis.iter().enumerate() {
            let h = v.dot(&w);
            hessenberg[(i, j)] = h;
            w.axpy(-h, v, 1.0);
        }
        let norm = w.norm();
        hessenberg[(j + 1, j)] = norm;
        let h = hessenberg.view((0, 0), (j + 2, j + 1)).into_owned();
        let mut g = DVector::zeros(j + 2);
        g[0] = beta;
        let y = h.clone().svd(true, true).solve(&g, 1e-300).unwrap_or_else(|_| DVector::zeros(j + 1));
        let res = (&g - &h * &y).norm();
        if res < best.0 {
            best = (res, y);
        }
        if res <= target || norm <= 1e-300 {
            break;
        }
        basis.push(w / norm);
    }
    let y = best.1;
    if y.is_empty() {
        return x0;
    }
    let mut z = DVector::zeros(rhs.len());
    for (i, yi) in y.iter().enumerate() {
        z.axpy(*yi, &basis[i], 1.0);
    }
    x0 + precond.apply(&z)
}

fn sparse_lu(n: usize, entries: &[(usize, usize, f64)]) -> Result<faer::sparse::linalg::solvers::Lu<usize, f64>> {
    let triplets: Vec<Triplet<usize, usize, f64>> = entries.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
    a.sp_lu().map_err(|e| Error::LinearSolver(format!("{e:?}")))
}

fn lu_apply(lu: &faer::sparse::linalg::solvers::Lu<usize, f64>, rhs: &DMatrix<f64>) -> DMatrix<f64> {
    let mut b = Mat::<f64>::from_fn(rhs.nrows(), rhs.ncols(), |i, j| rhs[(i, j)]);
    lu.solve_in_place(b.as_mut());
    DMatrix::from_fn(rhs.nrows(), rhs.ncols(), |i, j| b[(i, j)])
}

/// Dimensions seen by a condensed solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CondensationStats {
    pub full_dim: usize,
    pub condensed_dim: usize,
}

#[derive(Clone, Copy)]
enum Slot {
    Interior { block: usize, local: usize },
    Skeleton(usize),
}

/// Solves `a x = rhs` by eliminating each interior block through its dense
/// Schur complement and solving the remaining skeleton system.
///
/// Interior blocks must be disjoint and must not couple with each other.
pub fn static_condense_solve(
    a: &SparseMatrix,
    rhs: &DVector<f64>,
    blocks: &[Vec<usize>],
) -> Result<(DVector<f64>, CondensationStats)> {
    let n = a.dim();
    if rhs.len() != n {
        return Err(Error::Mismatch(format!("right-hand side of length {} for dimension {n}", rhs.len())));
    }
    let mut slot: Vec<Option<Slot>> = vec![None; n];
    for (b, block) in blocks.iter().enumerate() {
        for (l, &i) in block.iter().enumerate() {
            if slot[i].is_some() {
                return Err(Error::Mismatch(format!("unknown {i} listed in two interior blocks")));
            }
            slot[i] = Some(Slot::Interior { block: b, local: l });
        }
    }
    let mut skeleton_of = Vec::new();
    let slot: Vec<Slot> = slot
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            s.unwrap_or_else(|| {
                skeleton_of.push(i);
                Slot::Skeleton(skeleton_of.len() - 1)
            })
        })
        .collect();
    let ns = skeleton_of.len();

    // skeleton unknowns touched by each block
    let mut touched: Vec<Vec<usize>> = vec![Vec::new(); blocks.len()];
    for &(r, c, _) in a.entries() {
        match (slot[r], slot[c]) {
            (Slot::Interior { block, .. }, Slot::Skeleton(s)) | (Slot::Skeleton(s), Slot::Interior { block, .. }) => {
                touched[block].push(s)
            }
            (Slot::Interior { block: b1, .. }, Slot::Interior { block: b2, .. }) if b1 != b2 => {
                return Err(Error::Mismatch(format!("interior blocks {b1} and {b2} are coupled")));
            }
            _ => {}
        }
    }
    let mut local_index: Vec<std::collections::HashMap<usize, usize>> = Vec::with_capacity(blocks.len());
    for t in touched.iter_mut() {
        t.sort_unstable();
        t.dedup();
        local_index.push(t.iter().enumerate().map(|(i, &s)| (s, i)).collect());
    }

    let mut a_ii: Vec<DMatrix<f64>> = blocks.iter().map(|b| DMatrix::zeros(b.len(), b.len())).collect();
    let mut a_is: Vec<DMatrix<f64>> = blocks.iter().zip(&touched).map(|(b, t)| DMatrix::zeros(b.len(), t.len())).collect();
    let mut a_si: Vec<DMatrix<f64>> = blocks.iter().zip(&touched).map(|(b, t)| DMatrix::zeros(t.len(), b.len())).collect();
    let mut skeleton = SparseMatrix::new(ns);
    for &(r, c, v) in a.entries() {
        match (slot[r], slot[c]) {
            (Slot::Interior { block, local: i }, Slot::Interior { local: j, .. }) => a_ii[block][(i, j)] += v,
            (Slot::Interior { block, local: i }, Slot::Skeleton(s)) => a_is[block][(i, local_index[block][&s])] += v,
            (Slot::Skeleton(s), Slot::Interior { block, local: j }) => a_si[block][(local_index[block][&s], j)] += v,
            (Slot::Skeleton(s), Slot::Skeleton(t)) => skeleton.push(s, t, v),
        }
    }

    let mut rhs_s = DVector::from_fn(ns, |s, _| rhs[skeleton_of[s]]);
    let mut eliminated = Vec::with_capacity(blocks.len());
    for (b, block) in blocks.iter().enumerate() {
        let lu = a_ii[b].clone().lu();
        let rhs_i = DVector::from_fn(block.len(), |i, _| rhs[block[i]]);
        let x = lu.solve(&a_is[b]).ok_or(Error::Singular { what: "interior block" })?;
        let y = lu.solve(&rhs_i).ok_or(Error::Singular { what: "interior block" })?;
        let schur = &a_si[b] * &x;
        let ry = &a_si[b] * &y;
        let t = &touched[b];
        for (i, &si) in t.iter().enumerate() {
            rhs_s[si] -= ry[i];
            for (j, &sj) in t.iter().enumerate() {
                skeleton.push(si, sj, -schur[(i, j)]);
            }
        }
        eliminated.push((x, y));
    }

    let xs = skeleton.solve(&rhs_s)?;
    let mut out = DVector::zeros(n);
    for (s, &i) in skeleton_of.iter().enumerate() {
        out[i] = xs[s];
    }
    for (b, block) in blocks.iter().enumerate() {
        let (x, y) = &eliminated[b];
        let local_s = DVector::from_fn(touched[b].len(), |i, _| xs[touched[b][i]]);
        let xi = y - x * local_s;
        for (l, &i) in block.iter().enumerate() {
            out[i] = xi[l];
        }
    }
    Ok((out, CondensationStats { full_dim: n, condensed_dim: ns }))
}
