"""Exact sparse linear algebra over Z, Q and F_p.

Sparse matrices are ``dict[row] -> dict[col] -> value`` with no stored
zeros.  Dense matrices are lists of lists.
"""

from __future__ import annotations

from fractions import Fraction


def _field_one(ring):
    return ring.one


def sparse_rank(rows, ring) -> int:
    """Rank over a field (for Z, the rank over Q)."""
    return len(_echelon(rows, ring))


def _echelon(rows, ring):
    conv = ring if ring.is_field else (lambda x: Fraction(x))
    pivots = {}
    for row in (rows.values() if isinstance(rows, dict) else rows):
        r = {c: conv(v) for c, v in row.items() if v}
        while r:
            c = min(r)
            p = pivots.get(c)
            if p is None:
                inv = 1 / r[c]
                pivots[c] = {k: v * inv for k, v in r.items()}
                break
            f = r[c]
            for k, v in p.items():
                nv = r.get(k, 0) - f * v
                if nv:
                    r[k] = nv
                else:
                    r.pop(k, None)
    return pivots


def transpose(rows):
    out = {}
    for i, row in rows.items():
        for j, v in row.items():
            out.setdefault(j, {})[i] = v
    return out


# ---------------------------------------------------------------------------
# Smith normal form over Z

def smith_normal_form(A):
    """Dense SNF with transforms: returns ``(U, D, V)`` with ``U A V = D``,
    U and V unimodular, D diagonal with d_1 | d_2 | ... (nonnegative)."""
    m = len(A)
    n = len(A[0]) if m else 0
    D = [list(map(int, row)) for row in A]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(M, i, j):
        M[i], M[j] = M[j], M[i]

    def swap_cols(M, i, j):
        for row in M:
            row[i], row[j] = row[j], row[i]

    def add_row(M, src, dst, f):  # row dst += f * row src
        if f:
            rs, rd = M[src], M[dst]
            for k in range(len(rd)):
                rd[k] += f * rs[k]

    def add_col(M, src, dst, f):  # col dst += f * col src
        if f:
            for row in M:
                row[dst] += f * row[src]

    t = 0
    while t < min(m, n):
        # pick the smallest nonzero entry in the trailing block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = D[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        swap_rows(D, t, i)
        swap_rows(U, t, i)
        swap_cols(D, t, j)
        swap_cols(V, t, j)
        while True:
            done = True
            p = D[t][t]
            for i in range(t + 1, m):
                if D[i][t]:
                    q = D[i][t] // p
                    add_row(D, t, i, -q)
                    add_row(U, t, i, -q)
                    if D[i][t]:
                        done = False
            for j in range(t + 1, n):
                if D[t][j]:
                    q = D[t][j] // p
                    add_col(D, t, j, -q)
                    add_col(V, t, j, -q)
                    if D[t][j]:
                        done = False
            if done:
                # divisibility of the trailing block
                bad = None
                for i in range(t + 1, m):
                    for j in range(t + 1, n):
                        if D[i][j] % p:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                add_row(D, bad, t, 1)
                add_row(U, bad, t, 1)
                continue
            # move the smallest entry of row/column t to the pivot
            best = (abs(D[t][t]), t, t)
            for i in range(t + 1, m):
                if D[i][t] and abs(D[i][t]) < best[0]:
                    best = (abs(D[i][t]), i, t)
            for j in range(t + 1, n):
                if D[t][j] and abs(D[t][j]) < best[0]:
                    best = (abs(D[t][j]), t, j)
            _, i, j = best
            if i != t:
                swap_rows(D, t, i)
                swap_rows(U, t, i)
            if j != t:
                swap_cols(D, t, j)
                swap_cols(V, t, j)
        if D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return U, D, V


def elementary_divisors(rows, nrows=None, ncols=None):
    """Nonzero invariant factors of a sparse integer matrix.

    Unit pivots are eliminated sparsely first; the remainder goes through
    the dense SNF.
    """
    R = {i: {j: int(v) for j, v in row.items() if v} for i, row in rows.items()}
    R = {i: r for i, r in R.items() if r}
    cols = transpose(R)
    units = 0
    while True:
        pick = None
        best = None
        for i, r in R.items():
            for j, v in r.items():
                if v in (1, -1):
                    cost = (len(r) - 1) * (len(cols[j]) - 1)
                    if best is None or cost < best:
                        best, pick = cost, (i, j)
                        if cost == 0:
                            break
            if best == 0:
                break
        if pick is None:
            break
        i, j = pick
        prow = R.pop(i)
        pv = prow[j]
        for k in list(cols[j]):
            if k == i:
                continue
            r = R[k]
            f = r[j] * pv  # pv = +-1 so r[j]/pv = r[j]*pv
            for c, v in prow.items():
                nv = r.get(c, 0) - f * v
                if nv:
                    if c not in r:
                        cols.setdefault(c, {})[k] = True
                    r[c] = nv
                else:
                    r.pop(c, None)
                    cols.get(c, {}).pop(k, None)
            if not r:
                R.pop(k)
        for c in prow:
            cols.get(c, {}).pop(i, None)
        cols.pop(j, None)
        units += 1
    divisors = [1] * units
    if R:
        rk = sorted(R)
        ck = sorted({c for r in R.values() for c in r})
        dense = [[R[i].get(c, 0) for c in ck] for i in rk]
        _, D, _ = smith_normal_form(dense)
        for t in range(min(len(rk), len(ck))):
            if D[t][t]:
                divisors.append(abs(D[t][t]))
    return sorted(divisors)


# ---------------------------------------------------------------------------
# solving

def solve(rows, rhs, ring, ncols=None):
    """Find x with ``A x = rhs``; ``rows``: list of sparse rows (dict col->v),
    ``rhs``: list of values.  Returns a dict col -> value (free variables 0)
    or None when inconsistent.  Over Z an integral solution is sought."""
    if ring.is_field:
        return _solve_field(rows, rhs, ring)
    return _solve_integer(rows, rhs)


def _solve_field(rows, rhs, ring):
    """Gauss-Jordan with a sparsest-row-first, rarest-column pivot choice."""
    import heapq

    R, B, colidx = {}, {}, {}
    for n, (row, b) in enumerate(zip(rows, rhs)):
        r = {c: ring(v) for c, v in row.items() if v}
        b = ring(b)
        if not r:
            if b:
                return None
            continue
        R[n], B[n] = r, b
        for c in r:
            colidx.setdefault(c, set()).add(n)
    pivots = {}
    active = set(R)
    heap = [(len(r), n) for n, r in R.items()]
    heapq.heapify(heap)
    while heap:
        ln, n = heapq.heappop(heap)
        if n not in active:
            continue
        r = R[n]
        if len(r) != ln:
            heapq.heappush(heap, (len(r), n))
            continue
        active.discard(n)
        if not r:
            if B[n]:
                return None
            continue
        c = min(r, key=lambda k: (len(colidx[k]), repr(k)))
        inv = ring.inv(r[c])
        r = {k: v * inv for k, v in r.items()}
        R[n] = r
        B[n] = B[n] * inv
        pivots[c] = n
        for m in list(colidx[c]):
            if m == n:
                continue
            rm = R[m]
            f = rm[c]
            for k, v in r.items():
                nv = rm.get(k, 0) - f * v
                if nv:
                    if k not in rm:
                        colidx[k].add(m)
                    rm[k] = nv
                else:
                    rm.pop(k, None)
                    colidx[k].discard(m)
            B[m] = B[m] - f * B[n]
            if m in active:
                heapq.heappush(heap, (len(rm), m))
    return {c: B[n] for c, n in pivots.items() if B[n]}


def _solve_integer(rows, rhs):
    cols = sorted({c for r in rows for c in r})
    if not cols:
        return {} if all(not b for b in rhs) else None
    idx = {c: k for k, c in enumerate(cols)}
    A = [[0] * len(cols) for _ in rows]
    for i, r in enumerate(rows):
        for c, v in r.items():
            A[i][idx[c]] = int(v)
    U, D, V = smith_normal_form(A)
    ub = [sum(U[i][k] * int(rhs[k]) for k in range(len(rows))) for i in range(len(rows))]
    y = [0] * len(cols)
    for i in range(len(rows)):
        d = D[i][i] if i < len(cols) else 0
        if d:
            if ub[i] % d:
                return None
            y[i] = ub[i] // d
        elif ub[i]:
            return None
    x = {}
    for j, c in enumerate(cols):
        val = sum(V[j][k] * y[k] for k in range(len(cols)))
        if val:
            x[c] = val
    return x


def kernel_basis(rows, ncols_keys, ring):
    """Basis of the right kernel of a sparse matrix over a field, as sparse
    vectors keyed by column."""
    piv = _echelon_rref(rows, ring)
    pivot_cols = set(piv)
    out = []
    for f in ncols_keys:
        if f in pivot_cols:
            continue
        vec = {f: ring.one}
        for c, row in piv.items():
            v = row.get(f)
            if v:
                vec[c] = -v
        out.append(vec)
    return out


def _echelon_rref(rows, ring):
    piv = _echelon(rows, ring)
    # full reduction
    for c in sorted(piv, reverse=True):
        row = piv[c]
        for c2, row2 in piv.items():
            if c2 != c and row2.get(c):
                f = row2[c]
                for k, v in row.items():
                    nv = row2.get(k, 0) - f * v
                    if nv:
                        row2[k] = nv
                    else:
                        row2.pop(k, None)
    return piv
