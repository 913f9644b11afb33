"""Distance functions D(x, p) between choice vectors, with solver hooks.

Every distance evaluates a value and a subgradient in ``x``.  The three plain
norms additionally expose the machinery the dual (regret-minimization) solver
needs: their conjugate is linear on the unit ball of the dual norm, so each
norm carries its dual ball ``Y`` (projection, dual-norm check, Euclidean set
width).  Only the squared Euclidean distance has finite curvature and is
eligible for the Frank-Wolfe solver; the plain norms and the weighted KL
divergence are not (their curvature probe diverges as the step size shrinks).

Masks: operations accept an optional flat boolean ``mask`` of length ``N``;
masked-out coordinates contribute nothing to values and get zero subgradient.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

DISTANCE_KINDS = ("l1", "l2", "linf", "sql2", "wkl")

_DUAL_TOL = 1e-9


def _diff(x, p, mask):
    d = np.asarray(x, dtype=np.float64) - np.asarray(p, dtype=np.float64)
    if d.ndim != 1 or np.asarray(x).shape != np.asarray(p).shape:
        raise ValueError("x and p must be flat vectors of equal length")
    if mask is not None:
        d = np.where(np.asarray(mask, dtype=bool), d, 0.0)
    return d


class Distance:
    """Common interface: ``value(x, p, mask)`` and ``subgradient(x, p, mask)``."""

    kind: str = ""
    supports_fw: bool = False
    supports_dual: bool = False

    def value(self, x, p, mask=None) -> float:
        raise NotImplementedError

    def subgradient(self, x, p, mask=None) -> NDArray[np.float64]:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class NormDistance(Distance):
    """A plain norm ``D(x, p) = ||x - p||`` with its unit dual ball.

    Subclasses define the norm, its dual norm, and the Euclidean projection
    onto the unit dual-norm ball.
    """

    supports_dual = True

    def norm(self, v: NDArray[np.float64]) -> float:
        raise NotImplementedError

    def dual_norm(self, y: NDArray[np.float64]) -> float:
        raise NotImplementedError

    def project_dual(self, y: NDArray[np.float64]) -> NDArray[np.float64]:
        """Euclidean projection of ``y`` onto the unit dual-norm ball."""
        raise NotImplementedError

    def set_width(self, N: int) -> float:
        """Max of (1/2)||y||_2^2 over the unit dual-norm ball in R^N."""
        raise NotImplementedError

    def value(self, x, p, mask=None) -> float:
        return self.norm(_diff(x, p, mask))

    def conjugate(self, y, p, mask=None) -> float:
        """Conjugate value <y, p> for y in the unit dual ball (else ValueError)."""
        dn = self.dual_norm(np.asarray(y, dtype=np.float64))
        if dn > 1.0 + _DUAL_TOL:
            raise ValueError(f"dual norm {dn} exceeds 1; y is outside the dual ball")
        yp = np.asarray(y, dtype=np.float64) * np.asarray(p, dtype=np.float64)
        if mask is not None:
            yp = yp[np.asarray(mask, dtype=bool)]
        return float(yp.sum())


class L1Distance(NormDistance):
    kind = "l1"

    def norm(self, v):
        return float(np.abs(v).sum())

    def dual_norm(self, y):
        return float(np.abs(y).max()) if y.size else 0.0

    def project_dual(self, y):
        return np.clip(y, -1.0, 1.0)

    def set_width(self, N):
        return N / 2.0

    def subgradient(self, x, p, mask=None):
        return np.sign(_diff(x, p, mask))


class L2Distance(NormDistance):
    kind = "l2"

    def norm(self, v):
        return float(np.linalg.norm(v))

    def dual_norm(self, y):
        return float(np.linalg.norm(y))

    def project_dual(self, y):
        nrm = np.linalg.norm(y)
        return y / nrm if nrm > 1.0 else np.array(y, dtype=np.float64, copy=True)

    def set_width(self, N):
        return 0.5

    def subgradient(self, x, p, mask=None):
        d = _diff(x, p, mask)
        nrm = np.linalg.norm(d)
        return d / nrm if nrm > 0 else d


def project_l1_ball(y: NDArray[np.float64], radius: float = 1.0) -> NDArray[np.float64]:
    """Euclidean projection onto the l1 ball via the sorted-cumsum threshold.

    Soft-thresholds the magnitudes by the unique theta >= 0 such that
    ``sum(max(|y| - theta, 0)) = radius`` whenever ``y`` lies outside.
    """
    y = np.asarray(y, dtype=np.float64)
    a = np.abs(y)
    if a.sum() <= radius:
        return y.copy()
    u = np.sort(a)[::-1]
    cssv = np.cumsum(u) - radius
    k = np.arange(1, y.size + 1)
    rho = np.nonzero(u * k > cssv)[0][-1]
    theta = cssv[rho] / (rho + 1.0)
    return np.sign(y) * np.maximum(a - theta, 0.0)


class LinfDistance(NormDistance):
    kind = "linf"

    def norm(self, v):
        return float(np.abs(v).max()) if v.size else 0.0

    def dual_norm(self, y):
        return float(np.abs(y).sum())

    def project_dual(self, y):
        return project_l1_ball(y, radius=1.0)

    def set_width(self, N):
        return 0.5

    def subgradient(self, x, p, mask=None):
        d = _diff(x, p, mask)
        g = np.zeros_like(d)
        if d.size:
            k = int(np.argmax(np.abs(d)))
            if d[k] != 0.0:
                g[k] = np.sign(d[k])
        return g


class SquaredL2Distance(Distance):
    """D(x, p) = (1/2)||x - p||_2^2 -- the smooth, finite-curvature distance."""

    kind = "sql2"
    supports_fw = True

    def value(self, x, p, mask=None) -> float:
        d = _diff(x, p, mask)
        return 0.5 * float(d @ d)

    def subgradient(self, x, p, mask=None):
        return _diff(x, p, mask)


class WeightedKLDivergence(Distance):
    """Assortment-weighted KL divergence of the data from the model.

    ``D(x, p) = sum_j w_j * sum_{i in A_j} p_ij log(p_ij / x_ij)`` with the
    ``0 log 0 = 0`` convention.  The value is ``+inf`` when ``x`` is zero on a
    coordinate where ``p`` is positive; the (sub)gradient does not exist
    there and requesting it raises.  Weights are renormalized over masked-in
    assortments when a mask is supplied.
    """

    kind = "wkl"

    def __init__(self, inst, weights: NDArray[np.float64] | None = None):
        self.inst = inst
        if weights is None:
            weights = np.full(inst.m, 1.0 / inst.m)
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (inst.m,) or np.any(weights < 0) or weights.sum() <= 0:
            raise ValueError("weights must be m non-negative numbers, not all zero")
        self.weights = weights / weights.sum()

    def __repr__(self) -> str:
        return f"WeightedKLDivergence(m={self.inst.m})"

    def _coord_weights(self, mask):
        w = self.weights
        if mask is not None:
            block_in = np.zeros(self.inst.m, dtype=bool)
            np.logical_or.at(block_in, self.inst.assort_of, np.asarray(mask, dtype=bool))
            total = w[block_in].sum()
            if total <= 0:
                raise ValueError("mask leaves no weighted assortments")
            w = np.where(block_in, w / total, 0.0)
        wc = w[self.inst.assort_of]
        if mask is not None:
            wc = np.where(np.asarray(mask, dtype=bool), wc, 0.0)
        return wc

    def value(self, x, p, mask=None) -> float:
        x = np.asarray(x, dtype=np.float64)
        p = np.asarray(p, dtype=np.float64)
        if x.shape != (self.inst.N,) or p.shape != (self.inst.N,):
            raise ValueError(f"vectors must have length N={self.inst.N}")
        wc = self._coord_weights(mask)
        pos = (p > 0) & (wc > 0)
        if np.any(x[pos] <= 0):
            return float("inf")
        terms = p[pos] * np.log(p[pos] / x[pos])
        return float((wc[pos] * terms).sum())

    def subgradient(self, x, p, mask=None):
        x = np.asarray(x, dtype=np.float64)
        p = np.asarray(p, dtype=np.float64)
        wc = self._coord_weights(mask)
        pos = (p > 0) & (wc > 0)
        if np.any(x[pos] <= 0):
            raise ValueError("gradient undefined: x is zero where p is positive")
        g = np.zeros_like(x)
        g[pos] = -wc[pos] * p[pos] / x[pos]
        return g


def make_distance(kind: str, inst=None, weights=None) -> Distance:
    """Build a distance by CLI name: l1, l2, linf, sql2, or wkl.

    ``wkl`` needs the instance (for its block structure) and accepts optional
    per-assortment weights, defaulting to uniform.
    """
    kind = kind.lower()
    if kind == "l1":
        return L1Distance()
    if kind == "l2":
        return L2Distance()
    if kind == "linf":
        return LinfDistance()
    if kind == "sql2":
        return SquaredL2Distance()
    if kind == "wkl":
        if inst is None:
            raise ValueError("wkl distance needs the instance")
        return WeightedKLDivergence(inst, weights)
    raise ValueError(f"unknown distance kind {kind!r}; choose from {DISTANCE_KINDS}")


def curvature_probe(
    dist: Distance,
    p: NDArray[np.float64],
    s: NDArray[np.float64],
    alphas,
    selection: NDArray[np.float64] | None = None,
) -> NDArray[np.float64]:
    """Second-order difference ratios of ``D`` along the segment from ``p`` to ``s``.

    For each step size ``alpha`` returns

        (D(p + alpha (s - p), p) - D(p, p) - alpha <g, s - p>) / alpha**2

    with ``g`` a subgradient of ``D(., p)`` at ``p`` (``selection`` overrides
    the canonical choice).  Bounded ratios as ``alpha -> 0`` indicate finite
    curvature; ratios growing like ``1/alpha`` indicate none.
    """
    p = np.asarray(p, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    g = dist.subgradient(p, p) if selection is None else np.asarray(selection, dtype=np.float64)
    base = dist.value(p, p)
    d = s - p
    out = []
    for alpha in alphas:
        alpha = float(alpha)
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
        val = dist.value(p + alpha * d, p)
        out.append((val - base - alpha * float(g @ d)) / alpha**2)
    return np.asarray(out)
