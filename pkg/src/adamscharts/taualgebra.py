"""Exact algebra over F2[tau]: polynomials, Smith normal form, homology.

Polynomials live in plain ints, bit i holding the coefficient of tau^i, so
addition is xor and the zero polynomial is 0.  F2[tau] is a Euclidean
domain; its only unit is 1, which keeps every normal form free of unit
fudging.

Modules are finite direct sums of cyclic pieces: a full copy of F2[tau]
(order None) or the torsion quotient by tau^k (order k).  Torsion is fed to
the matrix algorithms as extra presentation rows, so free and torsion
summands go through one code path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .model import ChartError

TauPoly = int

ZERO: TauPoly = 0
ONE: TauPoly = 1
TAU: TauPoly = 2


class CompositionError(ChartError):
    """d_out following d_in is nonzero: the chart data is inconsistent."""


class UngradableError(ChartError):
    """An invariant factor is not a tau power, so the data cannot come
    from a weight-graded chart."""


def tau_power(k: int) -> TauPoly:
    return 1 << k


def poly_deg(a: TauPoly) -> int:
    """Degree, with deg(0) = -1."""
    return a.bit_length() - 1


def poly_add(a: TauPoly, b: TauPoly) -> TauPoly:
    return a ^ b


def poly_mul(a: TauPoly, b: TauPoly) -> TauPoly:
    out = 0
    while a:
        if a & 1:
            out ^= b
        a >>= 1
        b <<= 1
    return out


def poly_divmod(a: TauPoly, b: TauPoly) -> tuple[TauPoly, TauPoly]:
    if b == 0:
        raise ZeroDivisionError("polynomial division by zero")
    q = 0
    db = b.bit_length()
    while a.bit_length() >= db:
        shift = a.bit_length() - db
        q ^= 1 << shift
        a ^= b << shift
    return q, a


def poly_mod(a: TauPoly, b: TauPoly) -> TauPoly:
    return poly_divmod(a, b)[1]


def poly_divides(a: TauPoly, b: TauPoly) -> bool:
    """Whether a divides b; everything divides 0."""
    if b == 0:
        return True
    if a == 0:
        return False
    return poly_mod(b, a) == 0


def poly_gcd(a: TauPoly, b: TauPoly) -> TauPoly:
    """Greatest common divisor; monic automatically, gcd(0,0) = 0."""
    while b:
        a, b = b, poly_mod(a, b)
    return a


def is_tau_power(a: TauPoly) -> bool:
    return a != 0 and a & (a - 1) == 0


@dataclass(frozen=True)
class PolyMatrix:
    """An immutable rows x cols matrix of F2[tau] entries.

    Columns are images: the matrix of a map A -> B has one column per
    generator of A, written in B's generators.
    """

    rows: int
    cols: int
    cells: tuple[tuple[TauPoly, ...], ...]

    def __post_init__(self):
        if len(self.cells) != self.rows or any(len(r) != self.cols for r in self.cells):
            raise ChartError(
                f"matrix cells do not match shape {self.rows}x{self.cols}"
            )

    @staticmethod
    def from_rows(rows: Sequence[Sequence[TauPoly]], cols: Optional[int] = None) -> "PolyMatrix":
        n = len(rows)
        m = cols if cols is not None else (len(rows[0]) if rows else 0)
        return PolyMatrix(n, m, tuple(tuple(r) for r in rows))

    @staticmethod
    def zero(rows: int, cols: int) -> "PolyMatrix":
        return PolyMatrix(rows, cols, tuple((0,) * cols for _ in range(rows)))

    @staticmethod
    def identity(n: int) -> "PolyMatrix":
        return PolyMatrix(
            n, n, tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))
        )

    def mul(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.cols != other.rows:
            raise ChartError("matrix shapes do not compose")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = 0
                for k in range(self.cols):
                    acc ^= poly_mul(self.cells[i][k], other.cells[k][j])
                row.append(acc)
            out.append(tuple(row))
        return PolyMatrix(self.rows, other.cols, tuple(out))

    def hstack(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.rows != other.rows:
            raise ChartError("matrix heights differ")
        return PolyMatrix(
            self.rows,
            self.cols + other.cols,
            tuple(a + b for a, b in zip(self.cells, other.cells)),
        )

    def column(self, j: int) -> tuple[TauPoly, ...]:
        return tuple(self.cells[i][j] for i in range(self.rows))

    def is_zero(self) -> bool:
        return all(all(e == 0 for e in row) for row in self.cells)


def other_cols_range(m: PolyMatrix) -> range:
    return range(m.cols)


@dataclass(frozen=True)
class SNFResult:
    diagonal: tuple[TauPoly, ...]
    left: PolyMatrix
    right: PolyMatrix


def snf(m: PolyMatrix) -> SNFResult:
    """Smith normal form: left * m * right is diagonal with d1 | d2 | ...

    The transforms are invertible over F2[tau] (their determinant is the
    unit 1).  The diagonal has min(rows, cols) entries, zeros included.
    """
    a = [list(row) for row in m.cells]
    rows, cols = m.rows, m.cols
    left = [list(row) for row in PolyMatrix.identity(rows).cells]
    right = [list(row) for row in PolyMatrix.identity(cols).cells]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        left[i], left[j] = left[j], left[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in right:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, q):  # row dst += q * row src
        if q == 0:
            return
        for k in range(cols):
            a[dst][k] ^= poly_mul(q, a[src][k])
        for k in range(rows):
            left[dst][k] ^= poly_mul(q, left[src][k])

    def add_col(dst, src, q):
        if q == 0:
            return
        for r in a:
            r[dst] ^= poly_mul(q, r[src])
        for r in right:
            r[dst] ^= poly_mul(q, r[src])

    t = 0
    limit = min(rows, cols)
    while t < limit:
        # pick the entry of least degree in the remaining submatrix
        pivot = None
        for i in range(t, rows):
            for j in range(t, cols):
                if a[i][j] and (pivot is None or poly_deg(a[i][j]) < pivot[0]):
                    pivot = (poly_deg(a[i][j]), i, j)
        if pivot is None:
            break
        _, pi, pj = pivot
        swap_rows(t, pi)
        swap_cols(t, pj)
        dirty = True
        while dirty:
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t]:
                    q, r = poly_divmod(a[i][t], a[t][t])
                    add_row(i, t, q)
                    if r:
                        swap_rows(t, i)
                        dirty = True
            for j in range(t + 1, cols):
                if a[t][j]:
                    q, r = poly_divmod(a[t][j], a[t][t])
                    add_col(j, t, q)
                    if r:
                        swap_cols(t, j)
                        dirty = True
        # the pivot must divide everything that remains
        fixed = True
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if a[i][j] and poly_mod(a[i][j], a[t][t]):
                    add_row(t, i, 1)
                    fixed = False
                    break
            if not fixed:
                break
        if fixed:
            t += 1
    diagonal = tuple(a[i][i] for i in range(limit))
    return SNFResult(
        diagonal=diagonal,
        left=PolyMatrix.from_rows(left, rows),
        right=PolyMatrix.from_rows(right, cols),
    )


def poly_det(m: PolyMatrix) -> TauPoly:
    """Determinant by fraction-free elimination (exact in a domain)."""
    if m.rows != m.cols:
        raise ChartError("determinant of a non-square matrix")
    n = m.rows
    if n == 0:
        return 1
    a = [list(row) for row in m.cells]
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]  # sign is moot over F2
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = poly_mul(a[i][j], a[k][k]) ^ poly_mul(a[i][k], a[k][j])
                a[i][j] = poly_divmod(num, prev)[0]
            a[i][k] = 0
        prev = a[k][k]
    return a[n - 1][n - 1]


def column_basis(m: PolyMatrix) -> PolyMatrix:
    """An independent set of columns spanning the column space of m."""
    res = snf(m)
    inv_left = solve(res.left, PolyMatrix.identity(m.rows))
    assert inv_left is not None  # the transform is unimodular
    cols = []
    for i, d in enumerate(res.diagonal):
        if d:
            cols.append(tuple(poly_mul(inv_left.cells[r][i], d) for r in range(m.rows)))
    return PolyMatrix(m.rows, len(cols), tuple(
        tuple(c[i] for c in cols) for i in range(m.rows)
    ))


def kernel(m: PolyMatrix) -> PolyMatrix:
    """A basis of ker(m), one column per basis vector (free module)."""
    res = snf(m)
    cols = []
    for j in range(m.cols):
        d = res.diagonal[j] if j < len(res.diagonal) else 0
        if d == 0:
            cols.append(res.right.column(j))
    return PolyMatrix(
        m.cols, len(cols), tuple(tuple(c[i] for c in cols) for i in range(m.cols))
    )


def solve(m: PolyMatrix, rhs: PolyMatrix) -> Optional[PolyMatrix]:
    """Solve m * x = rhs exactly; None when any column has no solution."""
    if m.rows != rhs.rows:
        raise ChartError("solve shapes do not match")
    res = snf(m)
    lb = res.left.mul(rhs)
    xs = []
    for j in range(rhs.cols):
        y = [0] * m.cols
        good = True
        for i in range(m.rows):
            v = lb.cells[i][j]
            d = res.diagonal[i] if i < len(res.diagonal) else 0
            if d == 0:
                if v != 0:
                    good = False
                    break
            else:
                q, r = poly_divmod(v, d)
                if r:
                    good = False
                    break
                if i < m.cols:
                    y[i] = q
        if not good:
            return None
        xs.append(y)
    yt = PolyMatrix(
        m.cols, rhs.cols, tuple(tuple(xs[j][i] for j in range(rhs.cols)) for i in range(m.cols))
    )
    return res.right.mul(yt)


@dataclass(frozen=True)
class PresentedModule:
    """A direct sum of cyclic modules; None is free, k is tau^k torsion.

    Canonical form sorts free summands first, then torsion by descending
    order, so equal modules compare equal.
    """

    orders: tuple[Optional[int], ...]

    @staticmethod
    def of(orders: Iterable[Optional[int]]) -> "PresentedModule":
        canon = sorted(orders, key=lambda k: (k is not None, -(k or 0)))
        return PresentedModule(tuple(canon))

    @property
    def generators(self) -> int:
        return len(self.orders)

    def free_rank(self) -> int:
        return sum(1 for k in self.orders if k is None)

    def torsion_orders(self) -> tuple[int, ...]:
        return tuple(k for k in self.orders if k is not None)

    def relation_columns(self) -> PolyMatrix:
        """Torsion relations tau^k g = 0 as columns of a presentation block."""
        cols = [
            tuple(tau_power(k) if j == i else 0 for j in range(len(self.orders)))
            for i, k in enumerate(self.orders)
            if k is not None
        ]
        return PolyMatrix(
            len(self.orders),
            len(cols),
            tuple(tuple(c[i] for c in cols) for i in range(len(self.orders))),
        )


def _check_composition(
    d_in: PolyMatrix, d_out: PolyMatrix, target: PresentedModule
) -> None:
    comp = d_out.mul(d_in)
    for i in range(comp.rows):
        ann = target.orders[i]
        for j in range(comp.cols):
            v = comp.cells[i][j]
            if v == 0:
                continue
            if ann is None or not poly_divides(tau_power(ann), v):
                raise CompositionError(
                    f"d_out . d_in is nonzero at entry ({i},{j}): {v:#x}"
                )


def _check_well_defined(
    mat: PolyMatrix, source: PresentedModule, target: PresentedModule, what: str
) -> None:
    for j, k in enumerate(source.orders):
        if k is None:
            continue
        for i in range(mat.rows):
            v = poly_mul(tau_power(k), mat.cells[i][j])
            if v == 0:
                continue
            ann = target.orders[i]
            if ann is None or not poly_divides(tau_power(ann), v):
                raise CompositionError(
                    f"{what} is not defined on tau^{k}-torsion generator {j}"
                )


def homology(
    m: PresentedModule,
    d_in: PolyMatrix,
    d_out: PolyMatrix,
    *,
    source: Optional[PresentedModule] = None,
    target: Optional[PresentedModule] = None,
) -> PresentedModule:
    """ker(d_out) / im(d_in) at the middle module of a three-term complex.

    d_in maps a source module into m (one column per source generator);
    d_out maps m onwards (one column per generator of m).  source and
    target supply the torsion of the outer modules; omitted they default
    to free modules of the matching rank.  Raises CompositionError when
    the maps do not compose to zero modulo torsion, and UngradableError
    when an invariant factor is not a tau power.
    """
    n = m.generators
    if d_in.rows != n or d_out.cols != n:
        raise ChartError("differential shapes do not match the module")
    src = source if source is not None else PresentedModule((None,) * d_in.cols)
    tgt = target if target is not None else PresentedModule((None,) * d_out.rows)
    if src.generators != d_in.cols or tgt.generators != d_out.rows:
        raise ChartError("outer module sizes do not match the differentials")
    _check_well_defined(d_in, src, m, "d_in")
    _check_well_defined(d_out, m, tgt, "d_out")
    _check_composition(d_in, d_out, tgt)

    # kernel of the induced map m -> target: columns b with d_out b in the
    # span of the target's torsion relations
    rel_t = tgt.relation_columns()
    big = d_out.hstack(rel_t)
    ker_big = kernel(big)
    kmat = PolyMatrix(
        n, ker_big.cols, tuple(ker_big.cells[i] for i in range(n))
    )
    # boundaries plus m's own torsion relations, expressed inside the kernel
    sub = d_in.hstack(m.relation_columns())
    coords = solve(kmat, sub)
    if coords is None:
        raise CompositionError("boundaries do not lie in the kernel")
    res = snf(coords)
    orders: list[Optional[int]] = []
    for i in range(kmat.cols):
        d = res.diagonal[i] if i < len(res.diagonal) else 0
        if d == 0:
            orders.append(None)
        elif d == 1:
            continue
        elif is_tau_power(d):
            orders.append(poly_deg(d))
        else:
            raise UngradableError(f"invariant factor {d:#x} is not a tau power")
    return PresentedModule.of(orders)
