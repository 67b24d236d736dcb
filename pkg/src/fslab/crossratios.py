"""Cross-ratios of isotropic configurations and their genericity strata.

A configuration is a tuple of isotropic projective points in a formed space.
For 4-tuples there are three projective cross-ratios built from pairings,

    cr0 = w02*w13 / (w03*w12),
    cr1 = w13*w20 / (w10*w23),
    cr2 = w21*w03 / (w23*w01),        w_ij = omega(v_i, v_j),

satisfying cr0 * cr1^{-1} * cr2 = eps.  For 5-tuples the cross-ratios of the
faces (drop one point) obey a web of identities; the face parameters

    a_j = cr_j(drop 4),  b_j = cr_j(drop 3),  g_j = cr_j(drop 2)

reduce to five independent coordinates (a1, a2, b1, b2, g1).

The helper functions ``gamma_lin``, ``delta_disc``, ``delta_sqrt``,
``phi_eta`` and ``psi_eta`` package the algebra shared by the canonical
reduction formulas.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .forms import (
    RANK_RTOL,
    TOL_GENERIC,
    FormedSpace,
    GroupElement,
    ProjPoint,
    normalize_projective,
    principal_sqrt,
    random_isotropic,
)

__all__ = [
    "GenericityError",
    "ConfigTuple",
    "GenericityCertificate",
    "gamma_lin",
    "delta_disc",
    "delta_sqrt",
    "phi_eta",
    "psi_eta",
    "derived_c2",
    "cross_ratios4",
    "cross_ratios5",
    "genericity",
    "pi3",
    "pi4",
    "perm4_identity_residuals",
    "quint_identity_residuals",
    "random_generic_tuple",
]


class GenericityError(ValueError):
    """A configuration violates the genericity required by an operation."""

    def __init__(self, message: str, failing: str):
        super().__init__(message)
        self.failing = failing


_TRIU: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _triu_cache(k: int) -> tuple[np.ndarray, np.ndarray]:
    if k not in _TRIU:
        _TRIU[k] = np.triu_indices(k, k=1)
    return _TRIU[k]


# ----------------------------------------------------------------------
# Scalar helpers shared with the reduction formulas
# ----------------------------------------------------------------------

def gamma_lin(z1, z2):
    """Gamma(z1, z2) = 1 - z1 - z2."""
    return 1.0 - z1 - z2


def delta_disc(z1, z2, eps: int):
    """Delta(z1, z2) = Gamma^2 - 2(1+eps) z1 z2 (so Delta = Gamma^2 if eps=-1)."""
    g = gamma_lin(z1, z2)
    return g * g - 2.0 * (1 + eps) * z1 * z2


def delta_sqrt(z1, z2, eps: int):
    """The square root of Delta used everywhere: Gamma itself when eps = -1,
    otherwise the principal branch."""
    if eps == -1:
        return gamma_lin(z1, z2)
    return principal_sqrt(delta_disc(z1, z2, eps))


def phi_eta(z1, z2, eps: int, eta: int):
    """phi_eta = (Delta^{1/2} + eta * Gamma) / 2 for eta = +-1.

    The two values multiply to -(1+eps) z1 z2 / 2.
    """
    if eta not in (+1, -1):
        raise ValueError("eta must be +-1")
    return (delta_sqrt(z1, z2, eps) + eta * gamma_lin(z1, z2)) / 2.0


def psi_eta(a, b, c, eps: int, eta: int):
    """psi_eta(a, b, c) = eta * phi_eta(a) * Gamma(b) + (a2 b1 / c1) Gamma(c)."""
    a1, a2 = a
    b1, b2 = b
    c1, c2 = c
    return eta * phi_eta(a1, a2, eps, eta) * gamma_lin(b1, b2) + (a2 * b1 / c1) * gamma_lin(c1, c2)


def derived_c2(a, b, c1, eps: int):
    """The dependent fifth-face coordinate: c2 = eps * a1 b2 c1 / (a2 b1)."""
    a1, a2 = a
    b1, b2 = b
    return eps * (a1 * b2 * c1) / (a2 * b1)


# ----------------------------------------------------------------------
# Configurations
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ConfigTuple:
    """An ordered tuple of isotropic points with cached pairings."""

    space: FormedSpace
    vectors: np.ndarray = field(repr=False)   # shape (k, n), projectively normalized rows
    pairings: np.ndarray = field(repr=False)  # shape (k, k), pairings[i, j] = omega(v_i, v_j)
    norms: np.ndarray = field(repr=False)     # shape (k,), row 2-norms

    @classmethod
    def from_vectors(cls, space: FormedSpace, vectors: Sequence[np.ndarray], *,
                     tol: float = TOL_GENERIC, check_isotropy: bool = True,
                     normalized: bool = False) -> "ConfigTuple":
        if normalized:
            rows = np.asarray(vectors, dtype=complex)
        else:
            rows = np.array([normalize_projective(np.asarray(v, dtype=complex)) for v in vectors])
        pair = rows @ space.J @ rows.T
        norms = np.linalg.norm(rows, axis=1)
        if check_isotropy:
            bad = np.abs(np.diagonal(pair)) > tol * norms ** 2
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                raise ValueError(f"point {i} is not isotropic: |q(v_{i})| = {abs(pair[i, i]):.3e}")
        return cls(space=space, vectors=rows, pairings=pair, norms=norms)

    @classmethod
    def from_points(cls, space: FormedSpace, points: Sequence[ProjPoint]) -> "ConfigTuple":
        return cls.from_vectors(space, [p.vec for p in points],
                                check_isotropy=False, normalized=True)

    @property
    def k(self) -> int:
        return self.vectors.shape[0]

    def vector(self, i: int) -> np.ndarray:
        return self.vectors[i]

    def point(self, i: int) -> ProjPoint:
        return ProjPoint(vec=self.vectors[i])

    def apply(self, g: GroupElement) -> "ConfigTuple":
        moved = self.vectors @ g.m.T
        return ConfigTuple.from_vectors(self.space, list(moved), check_isotropy=False)

    def permute(self, perm: Sequence[int]) -> "ConfigTuple":
        idx = np.asarray(perm, dtype=int)
        return ConfigTuple(space=self.space, vectors=self.vectors[idx],
                           pairings=self.pairings[np.ix_(idx, idx)], norms=self.norms[idx])

    def transpose(self, i: int, j: int) -> "ConfigTuple":
        perm = list(range(self.k))
        perm[i], perm[j] = perm[j], perm[i]
        return self.permute(perm)

    def face(self, i: int) -> "ConfigTuple":
        """Drop point i (the i-th boundary face)."""
        return self.permute([j for j in range(self.k) if j != i])

    def rel_pairing(self, i: int, j: int) -> float:
        return float(abs(self.pairings[i, j]) / (self.norms[i] * self.norms[j]))

    def min_rel_pairing(self) -> tuple[float, tuple[int, int]]:
        rel = np.abs(self.pairings) / np.outer(self.norms, self.norms)
        iu = _triu_cache(self.k)
        flat = rel[iu]
        a = int(np.argmin(flat))
        return float(flat[a]), (int(iu[0][a]), int(iu[1][a]))


def _require_pairings(t: ConfigTuple, tol: float) -> None:
    worst, (i, j) = t.min_rel_pairing()
    if worst <= tol:
        raise GenericityError(
            f"pairing omega(v_{i}, v_{j}) vanishes (relative size {worst:.3e} <= {tol:.1e})",
            failing=f"pairing({i},{j})")


# ----------------------------------------------------------------------
# Cross-ratios
# ----------------------------------------------------------------------

def _cr_of(w: np.ndarray, p: int, q: int, r: int, s: int) -> tuple[complex, complex, complex]:
    """Cross-ratios of the sub-tuple (p, q, r, s) straight off a pairing matrix."""
    cr0 = w[p, r] * w[q, s] / (w[p, s] * w[q, r])
    cr1 = w[q, s] * w[r, p] / (w[q, p] * w[r, s])
    cr2 = w[r, q] * w[p, s] / (w[r, s] * w[p, q])
    return complex(cr0), complex(cr1), complex(cr2)


def cross_ratios4(t: ConfigTuple, *, tol: float = TOL_GENERIC) -> tuple[complex, complex, complex]:
    """The three cross-ratios (cr0, cr1, cr2) of a pairing-generic 4-tuple."""
    if t.k != 4:
        raise ValueError(f"cross_ratios4 needs a 4-tuple, got k={t.k}")
    _require_pairings(t, tol)
    return _cr_of(t.pairings, 0, 1, 2, 3)


def cross_ratios5(t: ConfigTuple, *, tol: float = TOL_GENERIC):
    """Face cross-ratios of a 5-tuple.

    Returns three triples (a, b, g): the cross-ratios of the faces obtained
    by dropping point 4, point 3 and point 2, respectively.
    """
    if t.k != 5:
        raise ValueError(f"cross_ratios5 needs a 5-tuple, got k={t.k}")
    _require_pairings(t, tol)
    w = t.pairings
    return _cr_of(w, 0, 1, 2, 3), _cr_of(w, 0, 1, 2, 4), _cr_of(w, 0, 1, 3, 4)


# ----------------------------------------------------------------------
# Genericity certificate
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class GenericityCertificate:
    """Where a tuple sits in the genericity hierarchy.

    The strata, from weakest to strongest:

    - ``pairings``:         all pairwise pairings nonzero
    - ``general-position``: additionally every subset of size <= min(k, n)
                            is linearly independent
    - ``cr-generic``:       additionally the cross-ratio discriminant Delta
                            is nonzero (for k=4), or every 4-point face is
                            cr-generic (for k=5)
    """

    k: int
    level: str                     # "degenerate" | "pairings" | "general-position" | "cr-generic"
    failing: str | None            # first violated condition, if any
    min_pairing: float             # min relative |omega(v_i, v_j)|, i < j
    min_subset_sv: float           # min relative singular value over checked subsets
    deltas: dict = field(default_factory=dict)  # label -> Delta value

    @property
    def pairings_nonzero(self) -> bool:
        return self.level != "degenerate"

    @property
    def general_position(self) -> bool:
        return self.level in ("general-position", "cr-generic")

    @property
    def cr_generic(self) -> bool:
        return self.level == "cr-generic"


def _subset_min_sv(t: ConfigTuple) -> float:
    """Smallest relative singular value over all subsets of size min(k, n)."""
    k, n = t.k, t.space.n
    size = min(k, n)
    worst = np.inf
    subsets = [tuple(range(k))] if k <= n else list(combinations(range(k), size))
    for sub in subsets:
        m = t.vectors[list(sub)]
        s = np.linalg.svd(m, compute_uv=False)
        worst = min(worst, float(s[-1] / s[0]) if s[0] > 0 else 0.0)
    return worst


_FACE_LABELS = {4: "0123", 3: "0124", 2: "0134", 1: "0234", 0: "1234"}


def genericity(t: ConfigTuple, *, tol: float = TOL_GENERIC, rank_rtol: float = RANK_RTOL) -> GenericityCertificate:
    """Classify a tuple in the genericity hierarchy (never raises)."""
    k = t.k
    min_pairing, _ = t.min_rel_pairing()
    deltas: dict[str, complex] = {}
    if min_pairing <= tol:
        return GenericityCertificate(k=k, level="degenerate", failing="pairing",
                                     min_pairing=min_pairing, min_subset_sv=0.0)
    min_sv = _subset_min_sv(t)
    if min_sv <= rank_rtol:
        return GenericityCertificate(k=k, level="pairings", failing="general-position",
                                     min_pairing=min_pairing, min_subset_sv=min_sv)
    if k not in (4, 5):
        # No discriminant stratum defined; general position is the top level.
        return GenericityCertificate(k=k, level="general-position", failing=None,
                                     min_pairing=min_pairing, min_subset_sv=min_sv)
    failing = None
    w = t.pairings
    if k == 4:
        _, a1, a2 = _cr_of(w, 0, 1, 2, 3)
        deltas[""] = complex(delta_disc(a1, a2, t.space.eps))
        if abs(deltas[""]) <= tol:
            failing = "delta"
    else:
        for i in (4, 3, 2, 1, 0):
            sub = [j for j in range(5) if j != i]
            _, a1, a2 = _cr_of(w, *sub)
            label = _FACE_LABELS[i]
            deltas[label] = complex(delta_disc(a1, a2, t.space.eps))
            if abs(deltas[label]) <= tol and failing is None:
                failing = f"delta({label})"
    level = "cr-generic" if failing is None else "general-position"
    return GenericityCertificate(k=k, level=level, failing=failing,
                                 min_pairing=min_pairing, min_subset_sv=min_sv, deltas=deltas)


def _require_cr_generic(t: ConfigTuple, tol: float) -> GenericityCertificate:
    cert = genericity(t, tol=tol)
    if not cert.cr_generic:
        raise GenericityError(
            f"tuple is not cr-generic (level={cert.level}, failing={cert.failing})",
            failing=cert.failing or cert.level)
    return cert


# ----------------------------------------------------------------------
# Cross-ratio coordinates
# ----------------------------------------------------------------------

def pi3(t: ConfigTuple, *, tol: float = TOL_GENERIC) -> tuple[complex, complex]:
    """Coordinates (a1, a2) = (cr1, cr2) of a cr-generic 4-tuple."""
    if t.k != 4:
        raise ValueError("pi3 needs a 4-tuple")
    _require_cr_generic(t, tol)
    _, a1, a2 = cross_ratios4(t, tol=tol)
    return a1, a2


def pi4(t: ConfigTuple, *, tol: float = TOL_GENERIC) -> tuple[complex, complex, complex, complex, complex]:
    """Coordinates (a1, a2, b1, b2, c1) of a cr-generic 5-tuple."""
    if t.k != 5:
        raise ValueError("pi4 needs a 5-tuple")
    _require_cr_generic(t, tol)
    a, b, g = cross_ratios5(t, tol=tol)
    return a[1], a[2], b[1], b[2], g[1]


# ----------------------------------------------------------------------
# Identity residuals (the verification payload)
# ----------------------------------------------------------------------

def _rel_err(lhs: complex, rhs: complex) -> float:
    return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))


def perm4_identity_residuals(t: ConfigTuple, *, tol: float = TOL_GENERIC) -> dict[str, float]:
    """Residuals of the 13 transposition identities of a 4-tuple.

    Swapping points inside a 4-tuple permutes/inverts the cross-ratios:
    six swaps turn cr0 into its inverse (two directly, four through cr1 or
    cr2), four relate cr1 and cr2 similarly, two fix cr2 up to inversion,
    and the product cr0 * cr1^{-1} * cr2 equals eps.
    """
    eps = t.space.eps
    if t.k != 4:
        raise ValueError("perm4_identity_residuals needs a 4-tuple")
    _require_pairings(t, tol)
    w = t.pairings
    cr0, cr1, cr2 = _cr_of(w, 0, 1, 2, 3)

    def crs(i, j):
        idx = [0, 1, 2, 3]
        idx[i], idx[j] = idx[j], idx[i]
        return _cr_of(w, *idx)

    out: dict[str, float] = {}
    inv0, inv1, inv2 = 1 / cr0, 1 / cr1, 1 / cr2
    out["cr0(01)=cr0^-1"] = _rel_err(crs(0, 1)[0], inv0)
    out["cr0(23)=cr0^-1"] = _rel_err(crs(2, 3)[0], inv0)
    out["cr1(02)^-1=cr0^-1"] = _rel_err(1 / crs(0, 2)[1], inv0)
    out["cr1(13)^-1=cr0^-1"] = _rel_err(1 / crs(1, 3)[1], inv0)
    out["cr2(12)=cr0^-1"] = _rel_err(crs(1, 2)[2], inv0)
    out["cr2(03)=cr0^-1"] = _rel_err(crs(0, 3)[2], inv0)
    out["cr1(12)=cr1^-1"] = _rel_err(crs(1, 2)[1], inv1)
    out["cr1(03)=cr1^-1"] = _rel_err(crs(0, 3)[1], inv1)
    out["cr2(01)^-1=cr1^-1"] = _rel_err(1 / crs(0, 1)[2], inv1)
    out["cr2(23)^-1=cr1^-1"] = _rel_err(1 / crs(2, 3)[2], inv1)
    out["cr2(02)=cr2^-1"] = _rel_err(crs(0, 2)[2], inv2)
    out["cr2(13)=cr2^-1"] = _rel_err(crs(1, 3)[2], inv2)
    out["cr0/cr1*cr2=eps"] = _rel_err(cr0 * inv1 * cr2, eps)
    return out


def quint_identity_residuals(t: ConfigTuple, *, tol: float = TOL_GENERIC) -> dict[str, float]:
    """Residuals of the seven face identities of a 5-tuple.

    With a, b, g the cross-ratios of the faces dropping points 4, 3, 2, the
    cross-ratios of the remaining two faces are determined:

        cr0(drop 1) = a2/b2          cr0(drop 0) = a1/b1
        cr1(drop 1) = g1/b1          cr1(drop 0) = eps*a1*g1/(a2*b1)
        cr2(drop 1) = eps*b2*g1/(a2*b1)   cr2(drop 0) = g1/a2

    and the first coordinates satisfy a0 * g0 = b0.
    """
    eps = t.space.eps
    a, b, g = cross_ratios5(t, tol=tol)
    w = t.pairings
    d1 = _cr_of(w, 0, 2, 3, 4)
    d0 = _cr_of(w, 1, 2, 3, 4)
    out: dict[str, float] = {}
    out["cr0(d1)=a2/b2"] = _rel_err(d1[0], a[2] / b[2])
    out["cr1(d1)=g1/b1"] = _rel_err(d1[1], g[1] / b[1])
    out["cr2(d1)=eps*b2*g1/(a2*b1)"] = _rel_err(d1[2], eps * b[2] * g[1] / (a[2] * b[1]))
    out["cr0(d0)=a1/b1"] = _rel_err(d0[0], a[1] / b[1])
    out["cr1(d0)=eps*a1*g1/(a2*b1)"] = _rel_err(d0[1], eps * a[1] * g[1] / (a[2] * b[1]))
    out["cr2(d0)=g1/a2"] = _rel_err(d0[2], g[1] / a[2])
    out["a0*g0=b0"] = _rel_err(a[0] * g[0], b[0])
    return out


# ----------------------------------------------------------------------
# Random generic tuples (test/verification plumbing)
# ----------------------------------------------------------------------

def random_generic_tuple(space: FormedSpace, k: int, rng: np.random.Generator, *,
                         min_pairing: float = 1e-4, min_delta: float = 1e-6,
                         min_subset_sv: float = 1e-6, max_tries: int = 500) -> ConfigTuple:
    """Draw a k-tuple of isotropic points with comfortable genericity margins.

    Margins are intentionally wider than the genericity tolerances so that
    downstream identity checks are exercised away from their blow-up loci.
    """
    for _ in range(max_tries):
        pts = [random_isotropic(space, rng) for _ in range(k)]
        t = ConfigTuple.from_points(space, pts)
        cert = genericity(t)
        if cert.min_pairing <= min_pairing or cert.min_subset_sv <= min_subset_sv:
            continue
        if k in (4, 5):
            if not cert.cr_generic:
                continue
            if min(abs(v) for v in cert.deltas.values()) <= min_delta:
                continue
        elif not cert.general_position:
            continue
        return t
    raise RuntimeError(f"failed to draw a generic {k}-tuple after {max_tries} tries")
