"""Pure NumPy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` exactly (same starts, same update rule,
same stopping test) and are used when the compiled extension is missing
or ``LPRECON_PURE_PYTHON=1`` is set.
"""
import numpy as np


def _dualize(v, r):
    """Map each column of ``v`` to the unit vector of the dual space norming it in l^r."""
    a = np.abs(v)
    scale = a.max(axis=0)
    scale[scale == 0] = 1.0
    a = a / scale
    # angle() stays finite for subnormal entries where v / |v| overflows
    phase = np.where(a > 0, np.exp(1j * np.angle(v)), 0)
    mag = a ** (r - 1.0)
    norm = np.sum(a ** r, axis=0) ** ((r - 1.0) / r)
    norm[norm == 0] = 1.0
    return phase * mag / norm


def _pnorms(v, p):
    a = np.abs(v)
    scale = a.max(axis=0)
    safe = np.where(scale > 0, scale, 1.0)
    return scale * np.sum((a / safe) ** p, axis=0) ** (1.0 / p)


def boyd_pnorm(M, p, starts, max_iter, tol):
    """Boyd's nonlinear power iteration for ``max ||Mx||_p / ||x||_p``.

    ``starts`` is an ``(n, R)`` complex array of initial vectors, one per
    restart. Returns ``(value, witness, iterations, converged)`` where
    ``value`` is the best ratio seen over all restarts and iterates (a
    certified lower bound), ``witness`` the vector attaining it,
    ``iterations`` the largest iteration count used by any restart and
    ``converged`` whether every restart met the stopping test.
    """
    M = np.asarray(M, dtype=np.complex128)
    MH = M.conj().T
    q = p / (p - 1.0)
    x = np.array(starts, dtype=np.complex128, copy=True)
    x = x / np.where(_pnorms(x, p) > 0, _pnorms(x, p), 1.0)
    R = x.shape[1]
    y = M @ x
    val = _pnorms(y, p)
    best = val.copy()
    best_x = x.copy()
    active = val > 0
    done = ~active
    iters = 0
    for it in range(1, max_iter + 1):
        if done.all():
            break
        iters = it
        z = _dualize(y, p)
        w = MH @ z
        x_new = _dualize(w, q)
        y_new = M @ x_new
        val_new = _pnorms(y_new, p)
        upd = ~done
        x[:, upd] = x_new[:, upd]
        y[:, upd] = y_new[:, upd]
        improved = upd & (val_new > best)
        best[improved] = val_new[improved]
        best_x[:, improved] = x_new[:, improved]
        stop = upd & (np.abs(val_new - val) <= tol * np.maximum(1.0, val_new))
        val[upd] = val_new[upd]
        done |= stop
    k = int(np.argmax(best)) if R else 0
    return float(best[k]), best_x[:, k].copy(), iters, bool(done.all())


def enumerate_bisection_masks(source, range_, limit):
    """All bitmasks of arrow subsets on which source and range are injective.

    Depth-first over arrows in index order, pruning as soon as a source or
    range collision appears. Raises ``OverflowError`` past ``limit`` results.
    """
    n = len(source)
    src = [int(s) for s in source]
    rng = [int(r) for r in range_]
    out = []

    def rec(i, mask, used_s, used_r):
        if i == n:
            out.append(mask)
            if len(out) > limit:
                raise OverflowError("bisection count exceeds limit")
            return
        rec(i + 1, mask, used_s, used_r)
        bs, br = 1 << src[i], 1 << rng[i]
        if not (used_s & bs) and not (used_r & br):
            rec(i + 1, mask | (1 << i), used_s | bs, used_r | br)

    rec(0, 0, 0, 0)
    return out
