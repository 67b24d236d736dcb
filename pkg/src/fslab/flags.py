"""Complete affine flags in C^n and the volume cocycle B_n.

A 4-tuple of flags determines, for each index tuple J, a quotient
configuration of four lines (the sigma_3 class); when that quotient is a
plane, the four lines have an ideal-tetrahedron volume.  B_n sums these
volumes over all J.  It is alternating, GL_n(C)-invariant, bounded, and a
strict cocycle on 5-tuples of flags in general position.

The second half of the module specializes n = 4 to the rank-2 even
orthogonal space: boundary points are pairs of ruling planes (l+_a, l-_b),
each pair determines a flag, and the restricted cocycle has the closed form
B_4(F_inf, F_0, F_1, F_(a,b)) = 2 (D(a) + D(b)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import product
from typing import Sequence

import numpy as np

from .forms import RANK_RTOL, FormedSpace, GroupElement, make_space, normalize_projective
from .dilog import bloch_wigner, vol_p1, vol_p1_batch

_RANK_CUT = 1e-8  # relative singular-value threshold for all rank decisions


# ----------------------------------------------------------------------
# Flags
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class AffineFlag:
    """A complete affine flag: ordered vectors v^1..v^n whose prefixes span
    the flag subspaces F^j = span(v^1, ..., v^j)."""

    vecs: np.ndarray = field(repr=False)  # (n, n), columns are v^1..v^n

    @classmethod
    def create(cls, vectors, *, rtol: float = RANK_RTOL) -> "AffineFlag":
        m = np.asarray(vectors, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"a flag on C^n needs an n x n matrix, got {m.shape}")
        sv = np.linalg.svd(m, compute_uv=False)
        if sv[0] == 0 or sv[-1] <= rtol * sv[0]:
            raise ValueError(
                f"flag vectors are not independent (relative smallest singular "
                f"value {0.0 if sv[0] == 0 else sv[-1] / sv[0]:.3e})")
        return cls(vecs=m)

    @property
    def n(self) -> int:
        return self.vecs.shape[0]

    @cached_property
    def ortho(self) -> np.ndarray:
        """Orthonormal basis whose first j columns span F^j, for every j."""
        q, _ = np.linalg.qr(self.vecs)
        return q

    def prefix(self, j: int) -> np.ndarray:
        """Orthonormal basis of F^j (an (n, j) block)."""
        return self.ortho[:, :j]

    def vector(self, j: int) -> np.ndarray:
        """The chain vector v^{j+1} extending F^j to F^{j+1} (0-indexed j)."""
        return self.vecs[:, j]

    def __repr__(self) -> str:
        return f"AffineFlag(n={self.n})"


def random_flag(n: int, rng: np.random.Generator) -> AffineFlag:
    """A Gaussian random flag (independent with probability one)."""
    for _ in range(50):
        m = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
        try:
            return AffineFlag.create(m)
        except ValueError:
            continue
    raise RuntimeError("could not draw an independent flag basis")


def general_position(flags: Sequence[AffineFlag], *, rtol: float = _RANK_CUT) -> bool:
    """Whether every sum of flag subspaces has the maximal dimension.

    True iff dim(F_0^{j_0} + ... + F_{k-1}^{j_{k-1}}) = j_0 + ... + j_{k-1}
    for all index tuples with sum <= n, by numerical rank.
    """
    flags = list(flags)
    n = flags[0].n
    if any(f.n != n for f in flags):
        raise ValueError("flags must share the same dimension")
    for J in product(range(n + 1), repeat=len(flags)):
        s = sum(J)
        if s == 0 or s > n:
            continue
        stack = np.concatenate([f.prefix(j) for f, j in zip(flags, J)], axis=1)
        sv = np.linalg.svd(stack, compute_uv=False)
        if sv[-1] <= rtol * sv[0]:
            return False
    return True


def random_flag_tuple(n: int, k: int, rng: np.random.Generator, *,
                      max_tries: int = 60) -> tuple[AffineFlag, ...]:
    """k random flags in general position."""
    for _ in range(max_tries):
        flags = tuple(random_flag(n, rng) for _ in range(k))
        if general_position(flags):
            return flags
    raise RuntimeError("could not draw flags in general position")


# ----------------------------------------------------------------------
# The sigma_3 class and the cocycle B_n
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Sigma3Class:
    """The quotient configuration attached to four flags and an index tuple.

    ``m`` is the dimension of the quotient (sum of the (j_i+1)-prefixes
    modulo the sum of the j_i-prefixes) and ``images`` holds the coordinates
    of the four chain vectors in an orthonormal basis of that quotient,
    as an (m, 4) block whose columns span C^m.  ``scale`` is the magnitude of
    the chain vectors before projection — the reference for deciding which
    image components are numerically zero.
    """

    m: int
    images: np.ndarray = field(repr=False)  # (m, 4)
    scale: float = 1.0

    def nonzero_images(self, *, rtol: float = _RANK_CUT) -> bool:
        if self.m == 0:
            return False
        norms = np.linalg.norm(self.images, axis=0)
        return bool(norms.min() > rtol * max(self.scale, 1e-300))


def t_j(flags: Sequence[AffineFlag], J: Sequence[int]) -> Sigma3Class:
    """The sigma_3 class of four flags at the index tuple J in {0..n-1}^4.

    The quotient (F_0^{j_0+1} + ...) / (F_0^{j_0} + ...) is realized on the
    orthogonal complement of the denominator span; the images are the chain
    vectors v_i^{j_i+1} projected there.  Because the numerator is the
    denominator plus the span of those chain vectors, the projections span
    the whole quotient.
    """
    flags = list(flags)
    if len(flags) != 4:
        raise ValueError("t_j takes exactly four flags")
    n = flags[0].n
    J = tuple(int(j) for j in J)
    if len(J) != 4 or any(j < 0 or j >= n for j in J):
        raise ValueError(f"index tuple must lie in {{0..{n - 1}}}^4, got {J}")
    raw = np.column_stack([f.vector(j) for f, j in zip(flags, J)])  # (n, 4)
    scale = float(np.linalg.norm(raw))
    s = sum(J)
    if s:
        den = np.concatenate([f.prefix(j) for f, j in zip(flags, J)], axis=1)
        u, sv, _ = np.linalg.svd(den, full_matrices=False)
        rank = int(np.count_nonzero(sv > _RANK_CUT * sv[0])) if sv[0] > 0 else 0
        basis = u[:, :rank]
        proj = raw - basis @ (basis.conj().T @ raw)
    else:
        proj = raw
    uw, sw, _ = np.linalg.svd(proj, full_matrices=False)
    # Rank relative to the chain vectors' own magnitude: when the projection
    # annihilates them (numerator = denominator) the residue is rounding noise
    # and must count as rank zero, not as a full-rank spray of noise.
    m = int(np.count_nonzero(sw > _RANK_CUT * scale)) if scale > 0 else 0
    images = uw[:, :m].conj().T @ proj  # (m, 4)
    return Sigma3Class(m=m, images=images, scale=scale)


def vol_sigma3(c: Sigma3Class) -> float:
    """Ideal volume of a sigma_3 class: vol_p1 of the four image lines when
    the quotient is a plane and no image vanishes, else 0."""
    if c.m != 2 or not c.nonzero_images():
        return 0.0
    w = c.images
    return vol_p1(w[:, 0], w[:, 1], w[:, 2], w[:, 3])


def b_n_j(flags: Sequence[AffineFlag], J: Sequence[int]) -> float:
    """The single-J contribution to B_n."""
    return vol_sigma3(t_j(flags, J))


def b_n(flags: Sequence[AffineFlag]) -> float:
    """The volume cocycle: sum of vol_sigma3 over all J in {0..n-1}^4.

    Alternating and GL_n(C)-invariant; for flags in general position only the
    index tuples with |J| = n-2 contribute.
    """
    flags = list(flags)
    if len(flags) != 4:
        raise ValueError("b_n takes exactly four flags")
    n = flags[0].n
    total = 0.0
    for J in product(range(n), repeat=4):
        total += vol_sigma3(t_j(flags, J))
    return total


def contributing_j(flags: Sequence[AffineFlag]) -> list[tuple[int, ...]]:
    """Index tuples whose sigma_3 class is structurally nontrivial (quotient
    a plane, all images nonzero) — exactly n(n^2-1)/6 in general position."""
    flags = list(flags)
    n = flags[0].n
    out = []
    for J in product(range(n), repeat=4):
        c = t_j(flags, J)
        if c.m == 2 and c.nonzero_images():
            out.append(J)
    return out


def cocycle_residual(flags: Sequence[AffineFlag]) -> float:
    """The alternating face sum of B_n over a 5-tuple of flags (vanishes on
    general-position tuples: B_n is a strict cocycle)."""
    flags = list(flags)
    if len(flags) != 5:
        raise ValueError("cocycle_residual takes exactly five flags")
    for i in range(5):
        face = [f for j, f in enumerate(flags) if j != i]
        if not general_position(face):
            raise ValueError(f"face {i} is not in general position")
    total = 0.0
    for i in range(5):
        face = [f for j, f in enumerate(flags) if j != i]
        total += (-1.0) ** i * b_n(face)
    return total


# ----------------------------------------------------------------------
# The rank-2 even orthogonal boundary: ruling planes and their flags
# ----------------------------------------------------------------------

def so4_space() -> FormedSpace:
    """The rank-2 even orthogonal formed space, basis (e2, e1, f1, f2)."""
    return make_space(+1, 0, 2)


@dataclass(frozen=True)
class BoundaryPoint:
    """A boundary point of the rank-2 even orthogonal space: the parameters
    (a, b) of a pair of ruling planes (l+_a, l-_b)."""

    a: complex
    b: complex

    def lines(self) -> tuple[np.ndarray, np.ndarray]:
        return boundary_lines(self.a, self.b)

    def vector(self) -> np.ndarray:
        """The intersection line l+_a ∩ l-_b (an isotropic vector)."""
        a, b = self.a, self.b
        return np.array([b, 1.0, a * b, -a], dtype=complex)

    def flag(self, *, variant: str = "plus") -> AffineFlag:
        lplus, lminus = self.lines()
        first, second = (lplus, lminus) if variant == "plus" else (lminus, lplus)
        chain = [self.vector()]  # the intersection line, in closed form
        eye = np.eye(4, dtype=complex)
        chain.append(_extend_chain(chain, [first, second, eye]))
        chain.append(_extend_chain(chain, [second, first, eye]))
        chain.append(_extend_chain(chain, [eye]))
        return AffineFlag.create(np.column_stack(chain))


def boundary_lines(a: complex, b: complex) -> tuple[np.ndarray, np.ndarray]:
    """Bases of the two ruling planes through the boundary point (a, b):
    l+_a = <e1 - a f2, e2 + a f1> and l-_b = <e1 + b e2, b f1 - f2>, each
    totally isotropic, as (4, 2) column blocks in the basis (e2, e1, f1, f2)."""
    a = complex(a)
    b = complex(b)
    lplus = np.array([[0, 1], [1, 0], [0, a], [-a, 0]], dtype=complex)
    lminus = np.array([[b, 0], [1, 0], [0, b], [0, -1]], dtype=complex)
    return lplus, lminus


def infinity_lines() -> tuple[np.ndarray, np.ndarray]:
    """The ruling planes at infinity: l+ = <f1, f2>, l- = <e2, f1>."""
    lplus = np.zeros((4, 2), dtype=complex)
    lplus[2, 0] = 1  # f1
    lplus[3, 1] = 1  # f2
    lminus = np.zeros((4, 2), dtype=complex)
    lminus[0, 0] = 1  # e2
    lminus[2, 1] = 1  # f1
    return lplus, lminus


def _extend_chain(chain: list[np.ndarray], pools: Sequence[np.ndarray]) -> np.ndarray:
    """First pool vector extending the chain span, by relative residual; the
    later pools are deterministic fallbacks."""
    q, _ = np.linalg.qr(np.column_stack(chain))
    best = None
    best_res = 0.0
    for pool in pools:
        for cand in pool.T:
            nc = np.linalg.norm(cand)
            if nc == 0:
                continue
            res = np.linalg.norm(cand - q @ (q.conj().T @ cand)) / nc
            if res > 1e-6:
                return cand
            if res > best_res:
                best, best_res = cand, res
    if best is None or best_res <= 1e-12:
        raise ValueError("could not extend the flag chain (degenerate planes)")
    return best


def rho_flag(lplus: np.ndarray, lminus: np.ndarray, *, variant: str = "plus") -> AffineFlag:
    """The flag of a pair of transverse ruling planes:

        <l+ ∩ l->  ⊂  l+  ⊂  l+ + l-  ⊂  C^4

    (``variant="minus"`` puts l- second instead).  Generators are chosen
    deterministically from the plane bases, falling back to alternates and
    finally to standard basis vectors when a candidate fails to extend."""
    if variant not in ("plus", "minus"):
        raise ValueError("variant must be 'plus' or 'minus'")
    first, second = (lplus, lminus) if variant == "plus" else (lminus, lplus)
    first = np.asarray(first, dtype=complex)
    second = np.asarray(second, dtype=complex)
    # Intersection line: null combination of the stacked bases.
    stack = np.concatenate([first, -second], axis=1)
    _, sv, vh = np.linalg.svd(stack)
    if sv[-1] > _RANK_CUT * sv[0]:
        raise ValueError("the two planes do not intersect in a line")
    coef = vh[-1].conj()
    cand1 = first @ coef[:2]
    cand2 = second @ coef[2:]
    v1 = cand1 if np.linalg.norm(cand1) >= np.linalg.norm(cand2) else cand2
    if np.linalg.norm(v1) < 1e-12:
        raise ValueError("degenerate plane bases")
    chain = [normalize_projective(v1)]
    eye = np.eye(4, dtype=complex)
    chain.append(_extend_chain(chain, [first, second, eye]))
    chain.append(_extend_chain(chain, [second, first, eye]))
    chain.append(_extend_chain(chain, [eye]))
    return AffineFlag.create(np.column_stack(chain))


def flag_infinity() -> AffineFlag:
    """The flag at infinity: <f1> ⊂ <f1, f2> ⊂ <f1, f2, e2> ⊂ C^4."""
    return rho_flag(*infinity_lines())


def standard_flags_so4(a: complex, b: complex) -> AffineFlag:
    """The flag of the boundary point (a, b):

        <phi_ab>  ⊂  <phi_ab, e1 - a f2>  ⊂  <phi_ab, e1 - a f2, e1 + b e2>  ⊂  C^4

    with phi_ab = e1 + b e2 - a f2 + a b f1, falling back to the alternate
    plane generators whenever a displayed generator fails to extend (for
    example at a = 0 or b = 0).  Defined for all finite (a, b); the flag at
    infinity is ``flag_infinity()``.
    """
    return BoundaryPoint(complex(a), complex(b)).flag()


def flip_to_special(g: GroupElement, *, tol: float = 1e-6) -> GroupElement:
    """Force determinant +1 by composing with the swap e1 <-> f1 when needed.

    Elements of determinant -1 exchange the two ruling families; composing
    with the swap (itself an isometry of determinant -1) lands back in the
    special group, which preserves each family.
    """
    det = g.det()
    if abs(det - 1) <= tol:
        return g
    if abs(det + 1) > tol:
        raise ValueError(f"determinant {det:.6g} is not +-1; not an isometry?")
    space = g.space
    if (space.eps, space.d) != (+1, 0):
        raise ValueError("the ruling swap lives in the even orthogonal case")
    swap = np.eye(space.n, dtype=complex)
    i, j = space.e_index(1), space.f_index(1)
    swap[[i, j]] = swap[[j, i]]
    return GroupElement.create(space, g.m @ swap)


# ----------------------------------------------------------------------
# The restricted cocycle and its batched evaluator
# ----------------------------------------------------------------------

_REF_AB = (0.3172 + 0.4418j, -0.6131 + 0.2212j)


@lru_cache(maxsize=1)
def _so4_fixed() -> tuple[AffineFlag, AffineFlag, AffineFlag]:
    return flag_infinity(), standard_flags_so4(0, 0), standard_flags_so4(1, 1)


@lru_cache(maxsize=1)
def _so4_contributing() -> tuple[tuple[int, ...], ...]:
    """The index tuples contributing to the restricted cocycle, computed once
    on a reference generic boundary point."""
    f_inf, f0, f1 = _so4_fixed()
    flags = [f_inf, f0, f1, standard_flags_so4(*_REF_AB)]
    return tuple(contributing_j(flags))


def b4_so4(a: complex, b: complex) -> float:
    """B_4 on (F_inf, F_0, F_1, F_(a,b)) — closed form 2 (D(a) + D(b))."""
    f_inf, f0, f1 = _so4_fixed()
    return b_n([f_inf, f0, f1, standard_flags_so4(a, b)])


def _batched_orthobasis(cols: np.ndarray, ranks_cut: float = _RANK_CUT):
    """Batched SVD orthobasis with per-row rank masking.

    cols: (B, n, s) -> (u, mask) where u is (B, n, min(n, s)) and mask[i, k]
    flags the columns of u that belong to the row's numerical column space.
    """
    u, sv, _ = np.linalg.svd(cols, full_matrices=False)
    top = sv[..., :1]
    mask = sv > ranks_cut * np.maximum(top, 1e-300)
    return u, mask


def _project_off(u: np.ndarray, mask: np.ndarray, w: np.ndarray) -> np.ndarray:
    """w - P w for the masked-rank projector P = u diag(mask) u^H (batched)."""
    coeff = np.einsum("bnk,bn->bk", u.conj(), w) * mask
    return w - np.einsum("bnk,bk->bn", u, coeff)


def _pick_extension(cands: list[np.ndarray], span: np.ndarray, span_mask: np.ndarray) -> np.ndarray:
    """Batched chain extension: first candidate with residual > 1e-6 of its
    norm, else the residual argmax (mirrors the scalar fallback rule)."""
    b = cands[0].shape[0]
    res = np.empty((len(cands), b))
    for i, c in enumerate(cands):
        r = _project_off(span, span_mask, c)
        res[i] = np.linalg.norm(r, axis=1) / np.maximum(np.linalg.norm(c, axis=1), 1e-300)
    good = res > 1e-6
    # index of the first good candidate, falling back to the argmax
    first = np.where(good.any(axis=0), good.argmax(axis=0), res.argmax(axis=0))
    stacked = np.stack(cands, axis=0)  # (c, B, 4)
    return np.take_along_axis(stacked, first[None, :, None], axis=0)[0]


def b4_so4_batch(a, b) -> np.ndarray:
    """Vectorized b4_so4 over arrays of boundary parameters.

    Evaluates the same quotient construction as ``b_n`` but only over the
    contributing index tuples, with batched linear algebra; degenerate rows
    fall back to 0 exactly as in the scalar path.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    a, b = np.broadcast_arrays(a, b)
    shape = a.shape
    a = a.ravel()
    b = b.ravel()
    nb = a.size
    one = np.ones(nb, dtype=complex)
    zero = np.zeros(nb, dtype=complex)

    # Chain vectors of F_(a,b), batched, mirroring standard_flags_so4.
    phi = np.stack([b, one, a * b, -a], axis=1)            # (B, 4)
    g1p = np.stack([zero, one, zero, -a], axis=1)          # e1 - a f2
    g2p = np.stack([one, zero, a, zero], axis=1)           # e2 + a f1
    g1m = np.stack([b, one, zero, zero], axis=1)           # e1 + b e2
    g2m = np.stack([zero, zero, b, -one], axis=1)          # b f1 - f2
    eye = [np.broadcast_to(np.eye(4, dtype=complex)[k], (nb, 4)) for k in range(4)]

    chain = np.empty((nb, 4, 4), dtype=complex)
    chain[:, :, 0] = phi
    u1, m1 = _batched_orthobasis(chain[:, :, :1])
    chain[:, :, 1] = _pick_extension([g1p, g2p, g1m, g2m] + eye, u1, m1)
    u2, m2 = _batched_orthobasis(chain[:, :, :2])
    chain[:, :, 2] = _pick_extension([g1m, g2m, g1p, g2p] + eye, u2, m2)
    u3, m3 = _batched_orthobasis(chain[:, :, :3])
    chain[:, :, 3] = _pick_extension(eye, u3, m3)

    # Batched orthonormal prefixes of the varying flag.
    q_var, _ = np.linalg.qr(chain)

    f_inf, f0, f1 = _so4_fixed()
    fixed = [f_inf, f0, f1]
    total = np.zeros(nb)
    for J in _so4_contributing():
        j4 = J[3]
        blocks = [np.broadcast_to(f.prefix(j), (nb, 4, j)) for f, j in zip(fixed, J[:3])]
        blocks.append(q_var[:, :, :j4])
        raws = [np.broadcast_to(f.vector(j), (nb, 4)) for f, j in zip(fixed, J[:3])]
        raws.append(chain[:, :, j4])
        raw_stack = np.stack(raws, axis=2)                    # (B, 4, 4)
        rscale = np.maximum(np.linalg.norm(raw_stack, axis=(1, 2)), 1e-300)
        s = sum(J)
        if s:
            den = np.concatenate(blocks, axis=2)
            u, mask = _batched_orthobasis(den)
            imgs = np.stack([_project_off(u, mask, w) for w in raws], axis=2)  # (B, 4, 4)
        else:
            imgs = raw_stack
        uw, sw, _ = np.linalg.svd(imgs)
        # Rank relative to the chain vectors' magnitude, as in t_j: a projection
        # that annihilates them must read as rank 0, not as noise rank.
        rank = (sw > _RANK_CUT * rscale[:, None]).sum(axis=1)
        u2c = uw[:, :, :2]
        coords = np.einsum("bnk,bnj->bkj", u2c.conj(), imgs)  # (B, 2, 4)
        norms = np.linalg.norm(coords, axis=1)                # (B, 4)
        ok = (rank == 2) & (norms.min(axis=1) > _RANK_CUT * rscale)
        vols = vol_p1_batch(coords.swapaxes(1, 2))            # points as rows
        total += np.where(ok, vols, 0.0)
    return total.reshape(shape)
