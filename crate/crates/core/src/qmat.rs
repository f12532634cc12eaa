//! Dense complex matrices and the tensor-product bookkeeping used everywhere else.
//!
//! Index convention: for a layout `[(A, dA), (B, dB), ...]` the composite index is
//! row-major with the leftmost label slowest-varying, so `|a, b⟩` sits at `a * dB + b`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Max-entry asymmetry accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_vec(nrows, ncols, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Column vector (n × 1).
    pub fn column_vector(v: &[C64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// `|v⟩⟨w|`
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        Self::from_fn(v.len(), w.len(), |r, c| v[r] * w[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix applied to a length-{} vector",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max entry of `|m - m†|`; infinite for non-square input.
    pub fn hermitian_asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// `(m + m†)/2`
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self[(r, c)] + self[(c, r)].conj()) * 0.5
        })
    }

    /// Determinant by partial-pivoting LU.
    pub fn determinant(&self) -> Result<C64> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = C64::new(1.0, 0.0);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm()))
                .unwrap_or(col);
            if a[(pivot, col)].norm() == 0.0 {
                return Ok(C64::new(0.0, 0.0));
            }
            if pivot != col {
                for c in 0..n {
                    a.data.swap(pivot * n + c, col * n + c);
                }
                det = -det;
            }
            let p = a[(col, col)];
            det *= p;
            for r in col + 1..n {
                let f = a[(r, col)] / p;
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in col..n {
                    let v = a[(col, c)];
                    a[(r, c)] -= f * v;
                }
            }
        }
        Ok(det)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("shape mismatch in mul")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let x = a[(ar, ac)];
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            for br in 0..b.rows {
                for bc in 0..b.cols {
                    out[(ar * b.rows + br, ac * b.cols + bc)] = x * b[(br, bc)];
                }
            }
        }
    }
    out
}

/// Ordered, labelled tensor factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsystemLayout {
    parts: Vec<(String, usize)>,
}

impl SubsystemLayout {
    pub fn new<S: Into<String>>(parts: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let parts: Vec<(String, usize)> = parts.into_iter().map(|(l, d)| (l.into(), d)).collect();
        if parts.is_empty() {
            return Err(Error::InvalidLayout("layout has no subsystems".into()));
        }
        for (i, (label, dim)) in parts.iter().enumerate() {
            if label.is_empty() {
                return Err(Error::InvalidLayout("empty subsystem label".into()));
            }
            if *dim == 0 {
                return Err(Error::InvalidLayout(format!("subsystem `{label}` has dimension 0")));
            }
            if parts[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::LabelCollision(label.clone()));
            }
        }
        Ok(Self { parts })
    }

    /// Two-qubit `A ⊗ B`.
    pub fn qubits(labels: &[&str]) -> Self {
        Self::new(labels.iter().map(|l| (*l, 2))).expect("valid qubit layout")
    }

    pub fn parts(&self) -> &[(String, usize)] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.parts.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.parts.iter().map(|(_, d)| *d).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.parts.iter().map(|(_, d)| d).product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.parts
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.parts[self.position(label)?].1)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.parts.iter().any(|(l, _)| l == label)
    }

    /// Appends a new factor on the right.
    pub fn with_part(&self, label: &str, dim: usize) -> Result<Self> {
        if self.contains(label) {
            return Err(Error::LabelCollision(label.to_string()));
        }
        let mut parts = self.parts.clone();
        parts.push((label.to_string(), dim));
        Self::new(parts)
    }

    /// Sub-layout of the given labels, in layout order.
    pub fn restrict(&self, keep: &[&str]) -> Result<Self> {
        for l in keep {
            self.position(l)?;
        }
        Self::new(
            self.parts
                .iter()
                .filter(|(l, _)| keep.contains(&l.as_str()))
                .cloned(),
        )
    }

    /// Labels not in `drop`, in layout order.
    pub fn complement(&self, drop: &[&str]) -> Vec<&str> {
        self.labels().into_iter().filter(|l| !drop.contains(l)).collect()
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        let pos = self.position(from)?;
        let mut parts = self.parts.clone();
        parts[pos].0 = to.to_string();
        Self::new(parts)
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.parts.len()];
        for i in (0..self.parts.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.parts[i + 1].1;
        }
        strides
    }

    /// Composite-index offsets of every multi-index over the given factor positions.
    fn offsets(&self, positions: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut offs = vec![0usize];
        for &p in positions {
            let d = self.parts[p].1;
            let stride = strides[p];
            offs = offs
                .iter()
                .flat_map(|&o| (0..d).map(move |k| o + k * stride))
                .collect();
        }
        offs
    }
}

impl fmt::Display for SubsystemLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(|(l, d)| format!("{l}({d})")).collect();
        write!(f, "{}", parts.join("⊗"))
    }
}

fn check_square_on(m: &ComplexMatrix, layout: &SubsystemLayout) -> Result<()> {
    if !m.is_square() || m.rows() != layout.total_dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix does not match layout {layout} of total dimension {}",
            m.rows(),
            m.cols(),
            layout.total_dim()
        )));
    }
    Ok(())
}

/// Traces out every factor not listed in `keep`; kept factors stay in layout order.
pub fn partial_trace(
    rho: &ComplexMatrix,
    layout: &SubsystemLayout,
    keep: &[&str],
) -> Result<ComplexMatrix> {
    check_square_on(rho, layout)?;
    if keep.is_empty() {
        return Err(Error::InvalidLayout("partial trace must keep at least one label".into()));
    }
    let mut keep_pos = Vec::with_capacity(keep.len());
    for l in keep {
        keep_pos.push(layout.position(l)?);
    }
    keep_pos.sort_unstable();
    keep_pos.dedup();
    let trace_pos: Vec<usize> = (0..layout.len()).filter(|p| !keep_pos.contains(p)).collect();

    let keep_off = layout.offsets(&keep_pos);
    let trace_off = layout.offsets(&trace_pos);
    let n = keep_off.len();
    let mut out = ComplexMatrix::zeros(n, n);
    for (i, &ki) in keep_off.iter().enumerate() {
        for (j, &kj) in keep_off.iter().enumerate() {
            out[(i, j)] = trace_off.iter().map(|&t| rho[(ki + t, kj + t)]).sum();
        }
    }
    Ok(out)
}

/// Reorders tensor factors so that the result follows `order`.
pub fn permute_factors(
    m: &ComplexMatrix,
    layout: &SubsystemLayout,
    order: &[&str],
) -> Result<(ComplexMatrix, SubsystemLayout)> {
    check_square_on(m, layout)?;
    if order.len() != layout.len() {
        return Err(Error::InvalidLayout(format!(
            "permutation {order:?} does not cover layout {layout}"
        )));
    }
    let positions = order
        .iter()
        .map(|l| layout.position(l))
        .collect::<Result<Vec<_>>>()?;
    let new_layout = SubsystemLayout::new(positions.iter().map(|&p| layout.parts()[p].clone()))?;
    // offsets() enumerates multi-indices slowest-first over `positions`, which is exactly
    // the new composite ordering.
    let map = layout.offsets(&positions);
    let n = map.len();
    let out = ComplexMatrix::from_fn(n, n, |r, c| m[(map[r], map[c])]);
    Ok((out, new_layout))
}

/// Same as [`permute_factors`] for a state vector.
pub fn permute_vector(
    v: &[C64],
    layout: &SubsystemLayout,
    order: &[&str],
) -> Result<(Vec<C64>, SubsystemLayout)> {
    if v.len() != layout.total_dim() || order.len() != layout.len() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} / order {order:?} vs layout {layout}",
            v.len()
        )));
    }
    let positions = order
        .iter()
        .map(|l| layout.position(l))
        .collect::<Result<Vec<_>>>()?;
    let new_layout = SubsystemLayout::new(positions.iter().map(|&p| layout.parts()[p].clone()))?;
    let map = layout.offsets(&positions);
    Ok((map.iter().map(|&i| v[i]).collect(), new_layout))
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` acting on `label`.
pub fn embed_local(
    op: &ComplexMatrix,
    layout: &SubsystemLayout,
    label: &str,
) -> Result<ComplexMatrix> {
    let pos = layout.position(label)?;
    let d = layout.parts()[pos].1;
    if op.rows() != d || op.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator on `{label}` of dimension {d}",
            op.rows(),
            op.cols()
        )));
    }
    let left: usize = layout.dims()[..pos].iter().product();
    let right: usize = layout.dims()[pos + 1..].iter().product();
    Ok(kron(
        &kron(&ComplexMatrix::identity(left), op),
        &ComplexMatrix::identity(right),
    ))
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// `V diag(f(λ)) V†`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        let fl: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |r, c| {
            (0..n).map(|k| v[(r, k)] * fl[k] * v[(c, k)].conj()).sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| C64::new(l, 0.0))
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Inputs within [`HERMITIAN_TOL`] of Hermitian are symmetrized first.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    let asym = m.hermitian_asymmetry();
    if !(asym <= HERMITIAN_TOL) {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);

    let scale = a.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let threshold = (f64::EPSILON * scale).powi(2);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[(r, c)].norm_sqr())
            .sum();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, descending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if m.rows() == 2 && m.cols() == 2 {
        // closed form for the 2x2 case, which dominates the discord objective
        let asym = m.hermitian_asymmetry();
        if !(asym <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
        let mean = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        return Ok(vec![mean + rad, mean - rad]);
    }
    Ok(hermitian_eig(m)?.eigenvalues)
}

/// Zeroes `a[p][q]` with the unitary `V = D R`, where `D = diag(1, e^{-iφ})` removes the
/// phase of `a[p][q]` and `R` is the real Jacobi rotation of the resulting symmetric block.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let phase = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let ph_conj = phase.conj();
    // 2x2 block of V acting on (p, q)
    let v00 = C64::new(c, 0.0);
    let v01 = C64::new(s, 0.0);
    let v10 = ph_conj * (-s);
    let v11 = ph_conj * c;
    let n = a.rows();

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * v00 + akq * v10;
        a[(k, q)] = akp * v01 + akq * v11;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = v00.conj() * apk + v10.conj() * aqk;
        a[(q, k)] = v01.conj() * apk + v11.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * v00 + vkq * v10;
        v[(k, q)] = vkp * v01 + vkq * v11;
    }
}

/// `exp(i h)` for Hermitian `h`.
pub fn unitary_from_generator(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    Ok(eig.reconstruct_with(|l| C64::new(0.0, l).exp()))
}
