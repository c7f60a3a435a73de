"""Dense real linear algebra at arbitrary precision.

Multiplication, Cholesky, inversion, a cyclic-Jacobi symmetric
eigensolver, and matrix functional calculus, all over ``gmpy2.mpfr``
entries bound to one :class:`~modkernel.precision.PrecisionContext`.
Matrices are immutable after construction and every operation is
sequential and deterministic: two runs with identical inputs and context
produce bit-identical results.

Sizes here are a few hundred at most; accuracy and reproducibility matter
more than asymptotic speed, which is why the eigensolver is plain
row-cyclic Jacobi rather than QR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
from gmpy2 import fma

from .errors import (
    DimensionError,
    DomainError,
    NoConvergence,
    NotPositiveDefinite,
    SingularMatrix,
)
from .precision import PrecisionContext, Real

__all__ = [
    "MatrixMP",
    "SymEigen",
    "multiply",
    "cholesky",
    "invert",
    "invert_lower",
    "solve_lower",
    "solve_cholesky",
    "sym_eigen",
    "matrix_function",
    "congruence",
]


class MatrixMP:
    """Dense real matrix with mpfr entries in row-major lists.

    The ``symmetric`` flag is an exact structural assertion: builders that
    set it symmetrize entries first, so ``A[j][k] == A[k][j]`` holds
    bit-for-bit.
    """

    __slots__ = ("rows", "cols", "data", "ctx", "symmetric")

    def __init__(self, ctx: PrecisionContext, data, symmetric: bool = False):
        self.ctx = ctx
        self.data = data
        self.rows = len(data)
        self.cols = len(data[0]) if data else 0
        if any(len(r) != self.cols for r in data):
            raise DimensionError("ragged rows")
        self.symmetric = symmetric

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_rows(cls, ctx, rows, symmetric=False):
        with ctx.activate():
            data = [[ctx.real(v) for v in row] for row in rows]
            m = cls(ctx, data, symmetric=False)
            if symmetric:
                if m.rows != m.cols:
                    raise DimensionError("symmetric matrix must be square")
                m = m.symmetrized()
            return m

    @classmethod
    def zeros(cls, ctx, rows, cols=None, symmetric=False):
        cols = rows if cols is None else cols
        z = ctx.real(0)
        return cls(ctx, [[z] * cols for _ in range(rows)],
                   symmetric=symmetric and rows == cols)

    @classmethod
    def identity(cls, ctx, n):
        m = cls.zeros(ctx, n, n, symmetric=True)
        one = ctx.real(1)
        for i in range(n):
            m.data[i][i] = one
        return m

    @classmethod
    def diagonal(cls, ctx, values):
        with ctx.activate():
            vals = [ctx.real(v) for v in values]
        m = cls.zeros(ctx, len(vals), len(vals), symmetric=True)
        for i, v in enumerate(vals):
            m.data[i][i] = v
        return m

    # -- basics --------------------------------------------------------------

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def copy(self):
        return MatrixMP(self.ctx, [row[:] for row in self.data], self.symmetric)

    def transpose(self):
        data = [[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)]
        return MatrixMP(self.ctx, data, self.symmetric)

    def symmetrized(self):
        """(A + A^T)/2 with the symmetric flag set."""
        if self.rows != self.cols:
            raise DimensionError("cannot symmetrize a non-square matrix")
        d = self.data
        with self.ctx.activate():
            half = self.ctx.real(1) / 2
            out = [row[:] for row in d]
            for i in range(self.rows):
                for j in range(i + 1, self.cols):
                    v = (d[i][j] + d[j][i]) * half
                    out[i][j] = v
                    out[j][i] = v
        return MatrixMP(self.ctx, out, symmetric=True)

    def add(self, other):
        _check_same_shape(self, other)
        with self.ctx.activate():
            data = [[a + b for a, b in zip(ra, rb)]
                    for ra, rb in zip(self.data, other.data)]
        return MatrixMP(self.ctx, data, self.symmetric and other.symmetric)

    def sub(self, other):
        _check_same_shape(self, other)
        with self.ctx.activate():
            data = [[a - b for a, b in zip(ra, rb)]
                    for ra, rb in zip(self.data, other.data)]
        return MatrixMP(self.ctx, data, self.symmetric and other.symmetric)

    def scale(self, c):
        with self.ctx.activate():
            c = self.ctx.real(c)
            data = [[c * a for a in row] for row in self.data]
        return MatrixMP(self.ctx, data, self.symmetric)

    def __matmul__(self, other):
        return multiply(self, other)

    def max_abs(self) -> Real:
        with self.ctx.activate():
            m = self.ctx.real(0)
            for row in self.data:
                for a in row:
                    aa = abs(a)
                    if aa > m:
                        m = aa
            return m

    def frobenius(self) -> Real:
        with self.ctx.activate():
            s = self.ctx.real(0)
            for row in self.data:
                for a in row:
                    s = fma(a, a, s)
            return gmpy2.sqrt(s)

    def trace(self) -> Real:
        if self.rows != self.cols:
            raise DimensionError("trace of a non-square matrix")
        with self.ctx.activate():
            s = self.ctx.real(0)
            for i in range(self.rows):
                s += self.data[i][i]
            return s

    def mul_vector(self, v):
        if len(v) != self.cols:
            raise DimensionError("vector length mismatch")
        with self.ctx.activate():
            zero = self.ctx.real(0)
            out = []
            for row in self.data:
                s = zero
                for a, x in zip(row, v):
                    s = fma(a, x, s)
                out.append(s)
            return out

    # -- serialization --------------------------------------------------------

    def to_csv(self, fileobj, digits=None):
        """Matrix dump: `#` headers with dimensions and context digits,
        then one row per line, full-precision decimal entries."""
        ctx = self.ctx
        digits = digits or ctx.decimal_digits
        fileobj.write("# modkernel-matrix\n")
        fileobj.write(
            f"# rows={self.rows} cols={self.cols} digits={digits} "
            f"symmetric={int(self.symmetric)}\n"
        )
        for row in self.data:
            fileobj.write(",".join(ctx.to_str(a, digits) for a in row) + "\n")

    @classmethod
    def from_csv(cls, fileobj, ctx=None):
        header = {}
        rows = []
        for line in fileobj:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    if "=" in tok:
                        k, v = tok.split("=", 1)
                        header[k] = v
                continue
            rows.append(line.split(","))
        if ctx is None:
            ctx = PrecisionContext(int(header.get("digits", 30)))
        data = [[ctx.parse(v) for v in row] for row in rows]
        m = cls(ctx, data, symmetric=header.get("symmetric") == "1")
        if "rows" in header and (m.rows, m.cols) != (
            int(header["rows"]), int(header["cols"])
        ):
            raise DimensionError("CSV body does not match its header dimensions")
        return m


def _check_same_shape(a, b):
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    if a.ctx != b.ctx:
        raise DimensionError("operands bound to different precision contexts")


def multiply(a: MatrixMP, b: MatrixMP) -> MatrixMP:
    """Exact product at working precision."""
    if a.cols != b.rows:
        raise DimensionError(f"inner dimensions {a.cols} vs {b.rows}")
    if a.ctx != b.ctx:
        raise DimensionError("operands bound to different precision contexts")
    ctx = a.ctx
    with ctx.activate():
        zero = ctx.real(0)
        bd = b.data
        out = []
        for i in range(a.rows):
            arow = a.data[i]
            crow = [zero] * b.cols
            for k in range(a.cols):
                aik = arow[k]
                if aik:
                    brow = bd[k]
                    for j in range(b.cols):
                        crow[j] = fma(aik, brow[j], crow[j])
            out.append(crow)
    return MatrixMP(ctx, out)


def cholesky(g: MatrixMP) -> MatrixMP:
    """Lower-triangular L with G = L L^T; raises NotPositiveDefinite."""
    if g.rows != g.cols:
        raise DimensionError("cholesky needs a square matrix")
    n = g.rows
    ctx = g.ctx
    with ctx.activate():
        zero = ctx.real(0)
        L = [[zero] * n for _ in range(n)]
        for j in range(n):
            s = g.data[j][j]
            Lj = L[j]
            for k in range(j):
                s = fma(-Lj[k], Lj[k], s)
            if s <= 0:
                raise NotPositiveDefinite(j, s)
            d = gmpy2.sqrt(s)
            Lj[j] = d
            for i in range(j + 1, n):
                Li = L[i]
                t = g.data[i][j]
                for k in range(j):
                    t = fma(-Li[k], Lj[k], t)
                Li[j] = t / d
    return MatrixMP(ctx, L)


def invert_lower(L: MatrixMP) -> MatrixMP:
    """Inverse of a lower-triangular matrix."""
    n = L.rows
    ctx = L.ctx
    with ctx.activate():
        zero = ctx.real(0)
        X = [[zero] * n for _ in range(n)]
        for j in range(n):
            X[j][j] = 1 / L.data[j][j]
            for i in range(j + 1, n):
                s = zero
                Li = L.data[i]
                for k in range(j, i):
                    s = fma(Li[k], X[k][j], s)
                X[i][j] = -s / Li[i]
    return MatrixMP(ctx, X)


def solve_lower(L: MatrixMP, b):
    """Forward substitution L x = b for a vector b."""
    n = L.rows
    ctx = L.ctx
    with ctx.activate():
        x = []
        for i in range(n):
            s = b[i]
            Li = L.data[i]
            for k in range(i):
                s = fma(-Li[k], x[k], s)
            x.append(s / Li[i])
        return x


def solve_upper_t(L: MatrixMP, b):
    """Back substitution L^T x = b (L lower-triangular)."""
    n = L.rows
    ctx = L.ctx
    with ctx.activate():
        x = [None] * n
        for i in range(n - 1, -1, -1):
            s = b[i]
            for k in range(i + 1, n):
                s = fma(-L.data[k][i], x[k], s)
            x[i] = s / L.data[i][i]
        return x


def solve_cholesky(L: MatrixMP, b):
    """Solve (L L^T) x = b."""
    return solve_upper_t(L, solve_lower(L, b))


def invert(a: MatrixMP) -> MatrixMP:
    """A^-1 via Cholesky when symmetric positive definite, else LU.

    Pivots at or below 10^-(digits/2) raise SingularMatrix.
    """
    if a.rows != a.cols:
        raise DimensionError("invert needs a square matrix")
    ctx = a.ctx
    if a.symmetric:
        try:
            L = cholesky(a)
        except NotPositiveDefinite:
            pass
        else:
            Linv = invert_lower(L)
            with ctx.activate():
                pivot_floor = ctx.real(10) ** (-(ctx.decimal_digits // 2))
                for j in range(a.rows):
                    if abs(L.data[j][j]) <= pivot_floor:
                        raise SingularMatrix(j, abs(L.data[j][j]))
            out = multiply(Linv.transpose(), Linv)
            return out.symmetrized()
    return _invert_lu(a)


def _invert_lu(a: MatrixMP) -> MatrixMP:
    n = a.rows
    ctx = a.ctx
    with ctx.activate():
        zero = ctx.real(0)
        one = ctx.real(1)
        pivot_floor = ctx.real(10) ** (-(ctx.decimal_digits // 2))
        # augmented Gauss-Jordan with partial pivoting
        M = [row[:] + [one if i == j else zero for j in range(n)]
             for i, row in enumerate(a.data)]
        for col in range(n):
            p, best = col, abs(M[col][col])
            for r in range(col + 1, n):
                v = abs(M[r][col])
                if v > best:
                    p, best = r, v
            if best <= pivot_floor:
                raise SingularMatrix(col, best)
            if p != col:
                M[col], M[p] = M[p], M[col]
            piv = M[col][col]
            Mc = M[col]
            inv_piv = 1 / piv
            for j in range(col, 2 * n):
                Mc[j] = Mc[j] * inv_piv
            for r in range(n):
                if r == col:
                    continue
                f = M[r][col]
                if f:
                    Mr = M[r]
                    nf = -f
                    for j in range(col, 2 * n):
                        Mr[j] = fma(nf, Mc[j], Mr[j])
        out = [row[n:] for row in M]
    return MatrixMP(ctx, out)


@dataclass
class SymEigen:
    """Spectral decomposition A = U diag(eigenvalues) U^T.

    eigenvalues ascend; eigenvectors are the columns of U; residual is
    max|A U - U diag|.
    """

    eigenvalues: list
    eigenvectors: MatrixMP
    residual: Real

    @property
    def ctx(self):
        return self.eigenvectors.ctx


def sym_eigen(a: MatrixMP, max_sweeps: int | None = None) -> SymEigen:
    """Row-cyclic Jacobi eigendecomposition of a symmetric matrix.

    Sweeps rotate pairs (p,q) in fixed row-major order until the
    off-diagonal Frobenius mass falls below 10^-(digits-guard) * ||A||_F.
    The sweep order is part of the contract: results are reproducible
    bit-for-bit across runs.
    """
    if not a.symmetric:
        raise DomainError("sym_eigen requires a matrix built as symmetric")
    n = a.rows
    ctx = a.ctx
    if max_sweeps is None:
        max_sweeps = int(100 * math.log10(max(ctx.decimal_digits, 10)))
    with ctx.activate():
        one = ctx.real(1)
        zero = ctx.real(0)
        W = [row[:] for row in a.data]
        V = [[one if i == j else zero for j in range(n)] for i in range(n)]
        fro = a.frobenius()
        if fro == 0:
            lam = [zero] * n
            return SymEigen(lam, MatrixMP.identity(ctx, n), zero)
        tol_off = (ctx.real(10) ** (-(ctx.decimal_digits - ctx.guard_digits))) * fro
        skip = tol_off / (2 * n * n)
        converged = False
        for _sweep in range(max_sweeps):
            off2 = zero
            for p in range(n):
                Wp = W[p]
                for q in range(p + 1, n):
                    off2 = fma(Wp[q], Wp[q], off2)
            if gmpy2.sqrt(2 * off2) <= tol_off:
                converged = True
                break
            for p in range(n):
                for q in range(p + 1, n):
                    Wp = W[p]
                    Wq = W[q]
                    apq = Wp[q]
                    if abs(apq) <= skip:
                        continue
                    theta = (Wq[q] - Wp[p]) / (2 * apq)
                    t = 1 / (abs(theta) + gmpy2.sqrt(fma(theta, theta, one)))
                    if theta < 0:
                        t = -t
                    c = 1 / gmpy2.sqrt(fma(t, t, one))
                    s = t * c
                    tau = s / (1 + c)
                    # diagonal and pivot updates
                    Wp[p] = Wp[p] - t * apq
                    Wq[q] = Wq[q] + t * apq
                    Wp[q] = zero
                    Wq[p] = zero
                    for k in range(n):
                        if k == p or k == q:
                            continue
                        Wk = W[k]
                        akp = Wk[p]
                        akq = Wk[q]
                        vp = akp - s * (akq + tau * akp)
                        vq = akq + s * (akp - tau * akq)
                        Wk[p] = vp
                        Wk[q] = vq
                        W[p][k] = vp
                        W[q][k] = vq
                    for k in range(n):
                        Vk = V[k]
                        vkp = Vk[p]
                        vkq = Vk[q]
                        Vk[p] = vkp - s * (vkq + tau * vkp)
                        Vk[q] = vkq + s * (vkp - tau * vkq)
        if not converged:
            raise NoConvergence(
                f"Jacobi did not converge in {max_sweeps} sweeps"
            )
        lam = [W[i][i] for i in range(n)]
        order = sorted(range(n), key=lambda i: lam[i])
        lam = [lam[i] for i in order]
        U = [[V[r][order[c]] for c in range(n)] for r in range(n)]
        # canonical signs: largest-|entry| component of each column positive
        for c in range(n):
            imax, vmax = 0, abs(U[0][c])
            for r in range(1, n):
                v = abs(U[r][c])
                if v > vmax:
                    imax, vmax = r, v
            if U[imax][c] < 0:
                for r in range(n):
                    U[r][c] = -U[r][c]
        Um = MatrixMP(ctx, U)
        # residual max|A U - U diag|
        AU = multiply(a, Um)
        res = zero
        for r in range(n):
            for c in range(n):
                d = abs(fma(-lam[c], U[r][c], AU.data[r][c]))
                if d > res:
                    res = d
    return SymEigen(lam, Um, res)


def matrix_function(f, eig: SymEigen) -> MatrixMP:
    """U f(Lambda) U^T, symmetrized; f must be defined on every eigenvalue.

    U may be rectangular (a spectral subset); the result is then the
    functional calculus restricted to those dyads.
    """
    ctx = eig.ctx
    n = eig.eigenvectors.rows
    k = len(eig.eigenvalues)
    with ctx.activate():
        fvals = []
        for i, lam in enumerate(eig.eigenvalues):
            try:
                fvals.append(ctx.real(f(lam)))
            except DomainError as e:
                raise DomainError(
                    f"matrix_function: eigenvalue {i} = {lam} outside the "
                    f"domain of the scalar function: {e}"
                ) from e
        U = eig.eigenvectors.data
        zero = ctx.real(0)
        out = [[zero] * n for _ in range(n)]
        for c in range(k):
            fv = fvals[c]
            if not fv:
                continue
            col = [U[r][c] for r in range(n)]
            for i in range(n):
                w = fv * col[i]
                row = out[i]
                for j in range(i, n):
                    row[j] = fma(w, col[j], row[j])
        for i in range(n):
            for j in range(i + 1, n):
                out[j][i] = out[i][j]
    return MatrixMP(ctx, out, symmetric=True)


def congruence(l_inv: MatrixMP, x: MatrixMP) -> MatrixMP:
    """L^-1 X L^-T given the already-inverted factor; symmetric in, out."""
    if l_inv.cols != x.rows or x.cols != l_inv.cols:
        raise DimensionError(
            f"congruence dimensions {l_inv.shape} vs {x.shape}"
        )
    out = multiply(multiply(l_inv, x), l_inv.transpose())
    return out.symmetrized() if x.symmetric else out
