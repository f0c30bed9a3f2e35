"""Bulk evaluation paths for the prover's polynomial construction.

Building the proof means evaluating the row-sum polynomial at roughly
(degree+1) points, each a weighted sum over all grid columns.  That is the
only super-linear work in a run, so it gets a compiled path: Montgomery
arithmetic over 32-bit limbs inside numba kernels (a 59-bit modulus needs
128-bit products, which neither numpy nor LLVM's i64 give directly).

Every entry point has a pure-Python twin.  The twins are the reference:
tests drive both paths on the same inputs and require identical output.
Set AVS_NO_NUMBA=1 to force the Python path everywhere.
"""

from __future__ import annotations

import os

import numpy as np

from . import lde
from .field import PrimeField, lagrange_row_weights, poly_eval
from .streams import ShapeParams

try:  # pragma: no cover - exercised implicitly by every fast-path test
    if os.environ.get("AVS_NO_NUMBA"):
        raise ImportError("numba disabled via AVS_NO_NUMBA")
    import numba
    from numba import int64, njit, prange, uint64

    numba.config.THREADING_LAYER = "workqueue"
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

# Kernel limb layout assumes the modulus fits 61 bits; the scheme layer
# stays far below this at desk scale.
_KERNEL_MAX_Q_BITS = 61
_I64_BUDGET = 1 << 62


def _mont_params(q: int) -> tuple[int, int, int, int]:
    """(qinv, r2, t30m, one_m) for Montgomery arithmetic with R = 2**64."""
    r = 1 << 64
    qinv = (-pow(q, -1, r)) % r
    r2 = r * r % q
    t30m = (1 << 30) * r % q
    one_m = r % q
    return qinv, r2, t30m, one_m


def _weight_arrays(npoints: int, d1: int, field: PrimeField):
    """Basis-weight rows L_x(t) for t = 0..npoints-1 as numpy arrays:
    full residues plus a 30-bit hi/lo split for overflow-free int64 MACs."""
    wq = np.empty((npoints, d1), dtype=np.uint64)
    for t in range(npoints):
        wq[t, :] = lagrange_row_weights(t, d1, field)
    whi = (wq >> np.uint64(30)).astype(np.int64)
    wlo = (wq & np.uint64((1 << 30) - 1)).astype(np.int64)
    return wq, whi, wlo


def _fast_ok(field: PrimeField, d1: int, max_abs_f: int) -> bool:
    if not HAVE_NUMBA:
        return False
    bits = field.bits_per_elem
    if bits > _KERNEL_MAX_Q_BITS:
        return False
    # int64 accumulator head-room for the hi/lo matmul halves.
    hi_limb = 1 << max(bits - 30, 0)
    return d1 * max(max_abs_f, 1) * max(hi_limb, 1 << 30) < _I64_BUDGET


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(uint64(uint64, uint64, uint64, uint64), inline="always", cache=True)
    def _montmul(a, b, q, qinv):
        # 64x64 -> 128 product via 32-bit limbs, then Montgomery reduction.
        mask = uint64(0xFFFFFFFF)
        a0 = a & mask
        a1 = a >> uint64(32)
        b0 = b & mask
        b1 = b >> uint64(32)
        ll = a0 * b0
        mid = a0 * b1 + a1 * b0  # < 2**62 for q < 2**61
        hh = a1 * b1
        t_lo = ll + (mid << uint64(32))
        carry = uint64(1) if t_lo < ll else uint64(0)
        t_hi = hh + (mid >> uint64(32)) + carry
        m = t_lo * qinv
        m0 = m & mask
        m1 = m >> uint64(32)
        q0 = q & mask
        q1 = q >> uint64(32)
        mll = m0 * q0
        mmid = m0 * q1 + m1 * q0
        mhh = m1 * q1
        mq_lo = mll + (mmid << uint64(32))
        mcarry = uint64(1) if mq_lo < mll else uint64(0)
        mq_hi = mhh + (mmid >> uint64(32)) + mcarry
        u_lo = t_lo + mq_lo
        ucarry = uint64(1) if u_lo < t_lo else uint64(0)
        out = t_hi + mq_hi + ucarry
        if out >= q:
            out -= q
        return out

    @njit(parallel=True, cache=True)
    def _sum_poly_kernel(whi, wlo, wq, grid, colptr, colrow, g_desc_m, q, qinv, t30m, r2, out):
        npoints, d1 = whi.shape
        d2 = grid.shape[1]
        ng = g_desc_m.shape[0]
        qs = int64(q)
        for t in prange(npoints):
            total = uint64(0)
            for y in range(d2):
                hi = int64(0)
                lo = int64(0)
                for x in range(d1):
                    fv = grid[x, y]
                    hi += whi[t, x] * fv
                    lo += wlo[t, x] * fv
                hi %= qs
                if hi < 0:
                    hi += qs
                lo %= qs
                if lo < 0:
                    lo += qs
                v = _montmul(uint64(hi), t30m, q, qinv) + uint64(lo)
                if v >= q:
                    v -= q
                h = uint64(1)
                for i in range(colptr[y], colptr[y + 1]):
                    w = wq[t, colrow[i]]
                    if h >= w:
                        h -= w
                    else:
                        h += q - w
                vm = _montmul(v, r2, q, qinv)
                acc = g_desc_m[0]
                for k in range(1, ng):
                    acc = _montmul(acc, vm, q, qinv) + g_desc_m[k]
                    if acc >= q:
                        acc -= q
                term = _montmul(acc, h, q, qinv)
                total += term
                if total >= q:
                    total -= q
            out[t] = total

    @njit(parallel=True, cache=True)
    def _check_kernel(vhi, vlo, phi, plo, omh, q, qinv, t30m, r2, out):
        npoints, d2 = vhi.shape
        for t in prange(npoints):
            total = uint64(0)
            for y in range(d2):
                v = _montmul(vhi[t, y], t30m, q, qinv) + vlo[t, y]
                if v >= q:
                    v -= q
                p = _montmul(phi[t, y], t30m, q, qinv) + plo[t, y]
                if p >= q:
                    p -= q
                d = v - p if v >= p else v + q - p
                dm = _montmul(d, r2, q, qinv)
                sqm = _montmul(dm, dm, q, qinv)
                term = _montmul(sqm, omh[t, y], q, qinv)
                total += term
                if total >= q:
                    total -= q
            out[t] = total

    @njit(cache=True)
    def _newton_kernel(dd, inv_m, r2, q, qinv, coeffs):
        npts = dd.shape[0]
        # forward divided differences; consecutive nodes make every layer-j
        # denominator equal to j, so inverses arrive precomputed
        for j in range(1, npts):
            for i in range(npts - 1, j - 1, -1):
                diff = dd[i] - dd[i - 1] if dd[i] >= dd[i - 1] else dd[i] + q - dd[i - 1]
                dd[i] = _montmul(diff, inv_m[j], q, qinv)
        # expand Newton form to monomial coefficients
        coeffs[0] = dd[npts - 1]
        deg = 0
        for k in range(npts - 2, -1, -1):
            km = _montmul(uint64(k % q), r2, q, qinv)
            for i in range(deg + 1, 0, -1):
                prod = _montmul(coeffs[i], km, q, qinv)
                lower = coeffs[i - 1]
                coeffs[i] = lower - prod if lower >= prod else lower + q - prod
            prod = _montmul(coeffs[0], km, q, qinv)
            base = dd[k]
            coeffs[0] = base - prod if base >= prod else base + q - prod
            deg += 1


# ---------------------------------------------------------------------------
# public entry points (numba path + pure-Python reference twin)
# ---------------------------------------------------------------------------


def sum_poly_evals(
    grid: np.ndarray,
    claim_cells: list[tuple[int, int]],
    g_coeffs: list[int],
    npoints: int,
    field: PrimeField,
) -> list[int]:
    """Evaluate sum_y g~(f~(t, y)) * h~(t, y) for t = 0..npoints-1.

    `grid` is the signed d1 x d2 frequency array, `claim_cells` the 1-based
    grid cells of the claimed set (defining the unclaimed indicator h),
    `g_coeffs` the banded extension of g in ascending order.
    """
    if npoints > field.q:
        raise ValueError("more evaluation points than field elements")
    d1 = grid.shape[0]
    max_abs = int(np.abs(grid).max()) if grid.size else 0
    if _fast_ok(field, d1, max_abs):
        return _sum_poly_evals_fast(grid, claim_cells, g_coeffs, npoints, field)
    return _sum_poly_evals_py(grid, claim_cells, g_coeffs, npoints, field)


def _sum_poly_evals_fast(grid, claim_cells, g_coeffs, npoints, field):
    q = field.q
    qinv, r2, t30m, _ = _mont_params(q)
    d1, d2 = grid.shape
    wq, whi, wlo = _weight_arrays(npoints, d1, field)
    by_col: list[list[int]] = [[] for _ in range(d2)]
    for x, y in claim_cells:
        by_col[y - 1].append(x - 1)
    colptr = np.zeros(d2 + 1, dtype=np.int64)
    for y in range(d2):
        colptr[y + 1] = colptr[y] + len(by_col[y])
    colrow = np.fromiter(
        (x for rows in by_col for x in rows), dtype=np.int64, count=int(colptr[-1])
    )
    r = 1 << 64
    g_desc_m = np.array([c * r % q for c in reversed(g_coeffs)], dtype=np.uint64)
    out = np.zeros(npoints, dtype=np.uint64)
    _sum_poly_kernel(
        whi, wlo, wq, np.ascontiguousarray(grid, dtype=np.int64),
        colptr, colrow, g_desc_m,
        np.uint64(q), np.uint64(qinv), np.uint64(t30m), np.uint64(r2), out,
    )
    return [int(v) for v in out]


def _sum_poly_evals_py(grid, claim_cells, g_coeffs, npoints, field):
    """Reference path built from the streaming-side primitives."""
    q = field.q
    d1, d2 = grid.shape
    shape = ShapeParams(n=d1 * d2, d1=d1, d2=d2)
    freqs = {
        (x - 1) * d2 + y: int(grid[x - 1, y - 1])
        for x in range(1, d1 + 1)
        for y in range(1, d2 + 1)
        if grid[x - 1, y - 1]
    }
    claimed = [(x - 1) * d2 + y for x, y in claim_cells]
    out = []
    for t in range(npoints):
        vrow = lde.offline_row_at(freqs, t, shape, field)
        hrow = lde.indicator_row(claimed, t, shape, field)
        s = 0
        for v, h in zip(vrow, hrow):
            s = (s + poly_eval(g_coeffs, v, field) * h) % q
        out.append(s)
    return out


def check_poly_evals(
    grid: np.ndarray,
    claims_cells: list[tuple[int, int, int]],
    npoints: int,
    field: PrimeField,
) -> list[int]:
    """Evaluate sum_y (f~(t,y) - f~'(t,y))**2 * (1 - h~(t,y)) for
    t = 0..npoints-1, where f~' extends the claimed values (signed ints)
    given as (x, y, value) grid cells."""
    if npoints > field.q:
        raise ValueError("more evaluation points than field elements")
    d1 = grid.shape[0]
    max_abs = int(np.abs(grid).max()) if grid.size else 0
    max_claim = max((abs(v) for _, _, v in claims_cells), default=0)
    if _fast_ok(field, d1, max(max_abs, max_claim)):
        return _check_poly_evals_fast(grid, claims_cells, npoints, field)
    return _check_poly_evals_py(grid, claims_cells, npoints, field)


def _check_poly_evals_fast(grid, claims_cells, npoints, field):
    q = field.q
    qinv, r2, t30m, _ = _mont_params(q)
    d1, d2 = grid.shape
    wq, whi, wlo = _weight_arrays(npoints, d1, field)
    g64 = np.ascontiguousarray(grid, dtype=np.int64)
    vhi = (whi @ g64) % q
    vlo = (wlo @ g64) % q
    phi = np.zeros((npoints, d2), dtype=np.int64)
    plo = np.zeros((npoints, d2), dtype=np.int64)
    omh = np.zeros((npoints, d2), dtype=np.uint64)
    for x, y, v in claims_cells:
        phi[:, y - 1] = (phi[:, y - 1] + v * whi[:, x - 1]) % q
        plo[:, y - 1] = (plo[:, y - 1] + v * wlo[:, x - 1]) % q
        omh[:, y - 1] = (omh[:, y - 1] + wq[:, x - 1]) % np.uint64(q)
    out = np.zeros(npoints, dtype=np.uint64)
    _check_kernel(
        vhi.astype(np.uint64), vlo.astype(np.uint64),
        phi.astype(np.uint64), plo.astype(np.uint64), omh,
        np.uint64(q), np.uint64(qinv), np.uint64(t30m), np.uint64(r2), out,
    )
    return [int(v) for v in out]


def _check_poly_evals_py(grid, claims_cells, npoints, field):
    q = field.q
    d1, d2 = grid.shape
    shape = ShapeParams(n=d1 * d2, d1=d1, d2=d2)
    freqs = {
        (x - 1) * d2 + y: int(grid[x - 1, y - 1])
        for x in range(1, d1 + 1)
        for y in range(1, d2 + 1)
        if grid[x - 1, y - 1]
    }
    claims = [((x - 1) * d2 + y, v) for x, y, v in claims_cells]
    claimed = [j for j, _ in claims]
    out = []
    for t in range(npoints):
        vrow = lde.offline_row_at(freqs, t, shape, field)
        prow = lde.claims_row(claims, t, shape, field)
        hrow = lde.indicator_row(claimed, t, shape, field)
        s = 0
        for v, p, h in zip(vrow, prow, hrow):
            s = (s + (v - p) * (v - p) % q * (1 - h)) % q
        out.append(s)
    return out


def newton_coeffs(evals: list[int], field: PrimeField) -> list[int]:
    """Coefficients of the unique polynomial with p(t) = evals[t] for
    t = 0..len(evals)-1."""
    npts = len(evals)
    if npts == 0:
        return [0]
    if npts > field.q:
        raise ValueError("more evaluation points than field elements")
    if HAVE_NUMBA and field.bits_per_elem <= _KERNEL_MAX_Q_BITS and npts > 96:
        q = field.q
        qinv, r2, _, _ = _mont_params(q)
        r = 1 << 64
        inv_m = np.zeros(npts, dtype=np.uint64)
        from .field import batch_inverse

        if npts > 1:
            invs = batch_inverse(list(range(1, npts)), field)
            for j, iv in enumerate(invs, start=1):
                inv_m[j] = iv * r % q
        dd = np.array([e % q for e in evals], dtype=np.uint64)
        coeffs = np.zeros(npts, dtype=np.uint64)
        _newton_kernel(dd, inv_m, np.uint64(r2), np.uint64(q), np.uint64(qinv), coeffs)
        return [int(c) for c in coeffs]
    return _newton_coeffs_py(evals, field)


def _newton_coeffs_py(evals: list[int], field: PrimeField) -> list[int]:
    q = field.q
    npts = len(evals)
    if npts == 0:
        return [0]
    dd = [e % q for e in evals]
    for j in range(1, npts):
        inv_j = field.inv(j)
        for i in range(npts - 1, j - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) * inv_j % q
    coeffs = [0] * npts
    coeffs[0] = dd[npts - 1]
    deg = 0
    for k in range(npts - 2, -1, -1):
        for i in range(deg + 1, 0, -1):
            coeffs[i] = (coeffs[i - 1] - k * coeffs[i]) % q
        coeffs[0] = (dd[k] - k * coeffs[0]) % q
        deg += 1
    return coeffs
