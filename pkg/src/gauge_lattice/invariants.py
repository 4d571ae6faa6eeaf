"""Topological invariants: loop windings, Berry curvature, Chern numbers,
gap-label windings, and winding maps over parametric momenta."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .errors import ConfigError, GapClosingError, NumericalError
from .models import BlochModel, NodalParams, nodal_bloch, ssh_dloop

GAP_GUARD = 1e-12


# ---------------------------------------------------------------------------
# 1D loop winding
# ---------------------------------------------------------------------------

@dataclass
class DLoop:
    """Closed planar loop sampled on a uniform grid over [0, 2pi).

    ``samples`` is an (n, 3) array of d-vectors; the winding is taken in the
    (d_x, d_y) plane.  Loops whose planar norm dips below ``guard`` sit at a
    critical point and have no winding.
    """

    samples: np.ndarray
    guard: float = GAP_GUARD

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 2 or self.samples.shape[1] != 3 or len(self.samples) < 16:
            raise ConfigError("DLoop: need an (n >= 16, 3) sample array")

    def planar_norms(self) -> np.ndarray:
        return np.hypot(self.samples[:, 0], self.samples[:, 1])


def winding_number(loop: DLoop) -> int:
    """Signed number of times the planar loop encircles the origin.

    Accumulates principal-value increments of the planar angle between
    consecutive samples (loop closure included); the sum must land on an
    integer within 0.01 or the sampling is considered insufficient.
    """
    if np.min(loop.planar_norms()) < loop.guard:
        raise GapClosingError("winding_number: loop touches the origin (gap closed)")
    ang = np.arctan2(loop.samples[:, 1], loop.samples[:, 0])
    inc = np.diff(np.concatenate([ang, ang[:1]]))
    inc = (inc + np.pi) % (2 * np.pi) - np.pi
    total = float(inc.sum() / (2 * np.pi))
    w = int(round(total))
    if abs(total - w) > 0.01:
        raise NumericalError(f"winding_number: non-integer accumulation {total:.4f}; "
                             "refine the loop sampling")
    return w


def ssh_winding(g_a: float, g_b: float, n_points: int = 256) -> int:
    """0 or 1 from the winding of the chain's d-loop (not a parameter branch)."""
    if abs(abs(g_a) - abs(g_b)) < 1e-12:
        raise GapClosingError("ssh_winding: |g_a| = |g_b| is the critical point")
    return winding_number(DLoop(ssh_dloop(g_a, g_b, n_points)))


# ---------------------------------------------------------------------------
# Two-band Berry curvature on a d-vector grid
# ---------------------------------------------------------------------------

@dataclass
class BerryGrid:
    """Curvature data of one band on an nk1 x nk2 momentum grid.

    ``curvature`` holds the central-difference field (1/2) n . (d_kx n x d_ky n)
    at the grid points; ``plaquette_flux`` holds the solid angle subtended by
    each grid plaquette on the Bloch sphere divided by the plaquette area -- a
    discretization whose total is exactly quantized, used for the Chern number.
    """

    nk1: int
    nk2: int
    band_index: int
    curvature: np.ndarray
    plaquette_flux: np.ndarray
    min_gap: float

    @property
    def chern(self) -> int:
        return int(round(self.chern_sum()))

    def chern_sum(self) -> float:
        area = (2 * np.pi / self.nk1) * (2 * np.pi / self.nk2)
        return float(self.plaquette_flux.sum() * area / (2 * np.pi))

    def chern_residual(self) -> float:
        s = self.chern_sum()
        return abs(s - round(s))

    def curvature_integral(self) -> float:
        """BZ integral of the central-difference field over 2 pi."""
        area = (2 * np.pi / self.nk1) * (2 * np.pi / self.nk2)
        return float(self.curvature.sum() * area / (2 * np.pi))


def _solid_angle(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    num = np.einsum("...k,...k->...", a, np.cross(b, c))
    den = (1.0 + np.einsum("...k,...k->...", a, b)
           + np.einsum("...k,...k->...", b, c)
           + np.einsum("...k,...k->...", c, a))
    return 2.0 * np.arctan2(num, den)


def berry_curvature_two_band(dfield: np.ndarray, band_index: int = 0,
                             guard: float = 1e-9) -> BerryGrid:
    """Berry curvature of the lower band of H = d . sigma on a periodic grid.

    ``dfield`` is (nk1, nk2, 3) sampled on a uniform [0,2pi)^2 grid.  The
    pointwise field uses central differences of the unit vector n = d/|d|;
    the per-plaquette field uses the exact spherical solid angle, so that the
    Chern sum is an integer to machine precision for any gapped field.
    """
    d = np.asarray(dfield, dtype=float)
    if d.ndim != 3 or d.shape[2] != 3:
        raise ConfigError("berry_curvature_two_band: dfield must be (nk1, nk2, 3)")
    norms = np.linalg.norm(d, axis=2)
    min_gap = float(norms.min())
    if min_gap < guard:
        raise GapClosingError(f"berry_curvature_two_band: |d| fell to {min_gap:.2e}")
    n = d / norms[..., None]
    if band_index not in (0, 1):
        raise ConfigError("berry_curvature_two_band: band_index must be 0 (lower) or 1")
    if band_index == 1:
        n = -n  # upper band sees the opposite unit vector
    nk1, nk2 = n.shape[0], n.shape[1]
    h1, h2 = 2 * np.pi / nk1, 2 * np.pi / nk2
    d1 = (np.roll(n, -1, axis=0) - np.roll(n, 1, axis=0)) / (2 * h1)
    d2 = (np.roll(n, -1, axis=1) - np.roll(n, 1, axis=1)) / (2 * h2)
    curvature = 0.5 * np.einsum("ijk,ijk->ij", n, np.cross(d1, d2))
    # plaquette (i,j): corners n(i,j), n(i+1,j), n(i+1,j+1), n(i,j+1)
    n2 = np.roll(n, -1, axis=0)
    n3 = np.roll(n2, -1, axis=1)
    n4 = np.roll(n, -1, axis=1)
    omega = _solid_angle(n, n2, n3) + _solid_angle(n, n3, n4)
    plaquette = 0.5 * omega / (h1 * h2)
    return BerryGrid(nk1=nk1, nk2=nk2, band_index=band_index,
                     curvature=curvature, plaquette_flux=plaquette, min_gap=min_gap)


# ---------------------------------------------------------------------------
# Chern numbers of Bloch models (gauge-invariant plaquette products)
# ---------------------------------------------------------------------------

def chern_number(bloch: BlochModel, bands: int | list[int], nk: int = 24,
                 gap_tol: float = 1e-8) -> int:
    """Chern number of one band (or a set of bands, via overlap determinants).

    Uses the gauge-invariant plaquette link-product discretization on an
    nk x nk grid of the Brillouin zone; the result is integer-exact once the
    grid resolves the curvature.  The requested bands must stay separated
    from their complement by more than ``gap_tol`` everywhere on the grid.
    """
    band_list = [bands] if isinstance(bands, (int, np.integer)) else sorted(bands)
    nb = bloch.n_bands
    if any(b < 0 or b >= nb for b in band_list):
        raise ConfigError(f"chern_number: band indices must lie in 0..{nb - 1}")
    ks = 2 * np.pi * np.arange(nk) / nk
    vecs = np.empty((nk, nk, nb, len(band_list)), dtype=complex)
    for i, kx in enumerate(ks):
        for j, ky in enumerate(ks):
            evals, evecs = np.linalg.eigh(bloch(kx, ky))
            lo = band_list[0]
            hi = band_list[-1]
            below = evals[lo] - evals[lo - 1] if lo > 0 else np.inf
            above = evals[hi + 1] - evals[hi] if hi + 1 < nb else np.inf
            if min(below, above) < gap_tol:
                raise GapClosingError(
                    f"chern_number: bands {band_list} touch their complement at "
                    f"k=({kx:.3f},{ky:.3f}) (separation {min(below, above):.2e})")
            vecs[i, j] = evecs[:, band_list]

    def link(a: np.ndarray, b: np.ndarray) -> complex:
        det = np.linalg.det(a.conj().T @ b)
        if abs(det) < 1e-12:
            raise NumericalError("chern_number: vanishing overlap determinant; refine grid")
        return det / abs(det)

    # plaquette loop oriented to match the two-band curvature convention
    # (1/2) n . (d_kx n x d_ky n), so Chern numbers compose with the
    # gap-label windings as C_h = w_h - w_{h-1}
    total = 0.0
    for i in range(nk):
        for j in range(nk):
            u1 = link(vecs[i, j], vecs[(i + 1) % nk, j])
            u2 = link(vecs[(i + 1) % nk, j], vecs[(i + 1) % nk, (j + 1) % nk])
            u3 = link(vecs[i, (j + 1) % nk], vecs[(i + 1) % nk, (j + 1) % nk])
            u4 = link(vecs[i, j], vecs[i, (j + 1) % nk])
            total += np.angle(u3 * u4 / (u1 * u2))
    c = total / (2 * np.pi)
    ci = int(round(c))
    if abs(c - ci) > 1e-6:
        raise NumericalError(f"chern_number: non-integer plaquette sum {c:.4f}")
    return ci


# ---------------------------------------------------------------------------
# Gap-label windings (flux p/q) and the Chern numbers they imply
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GapWinding:
    h: int
    w: int
    s: int
    ambiguous: bool = False
    alternate: tuple[int, int] | None = None  # (w, s) of the mirror solution


@dataclass
class DiophantineResult:
    p: int
    q: int
    gaps: list[GapWinding] = field(default_factory=list)

    def winding(self, h: int) -> GapWinding:
        for g in self.gaps:
            if g.h == h:
                return g
        raise ConfigError(f"no gap with index {h}")


def diophantine_windings(p: int, q: int) -> DiophantineResult:
    """Solve h = s q + w p with |w| <= q/2 for every gap h = 1..q-1.

    At |w| = q/2 exactly (even q, middle gap) both signs solve the constraint;
    the gap is flagged ambiguous and carries the alternate solution.
    """
    if not (0 < p < q):
        raise ConfigError("diophantine_windings: need 0 < p < q")
    if gcd(p, q) != 1:
        raise ConfigError("diophantine_windings: p, q must be coprime")
    result = DiophantineResult(p=p, q=q)
    p_inv = pow(p, -1, q)
    for h in range(1, q):
        w0 = (h * p_inv) % q          # representative in 0..q-1
        w_neg = w0 - q                # representative in -q..-1
        candidates = [w for w in (w0, w_neg) if 2 * abs(w) <= q]
        primary = min(candidates, key=abs)
        s = (h - primary * p) // q
        amb = len(candidates) == 2 and abs(candidates[0]) == abs(candidates[1])
        alt = None
        if amb:
            other = candidates[1] if candidates[0] == primary else candidates[0]
            alt = (other, (h - other * p) // q)
        result.gaps.append(GapWinding(h=h, w=int(primary), s=int(s), ambiguous=amb, alternate=alt))
    return result


def chern_from_windings(d: DiophantineResult,
                        resolve: dict[int, int] | None = None) -> list[int]:
    """Band Chern numbers C_h = w_h - w_{h-1} (h = 1..q, with w_0 = w_q = 0).

    Ambiguous gaps must be resolved by the caller through ``resolve``
    (gap index -> chosen w); otherwise an error is raised.
    """
    resolve = resolve or {}
    w = [0]
    for g in d.gaps:
        if g.ambiguous:
            if g.h not in resolve:
                raise ConfigError(f"gap {g.h} has |w| = q/2; pass resolve={{{g.h}: w}}")
            choice = resolve[g.h]
            valid = {g.w, g.alternate[0] if g.alternate else g.w}
            if choice not in valid:
                raise ConfigError(f"gap {g.h}: resolution {choice} not in {valid}")
            w.append(choice)
        else:
            w.append(g.w)
    w.append(0)
    return [w[h] - w[h - 1] for h in range(1, d.q + 1)]


# ---------------------------------------------------------------------------
# Winding maps over parametric momenta
# ---------------------------------------------------------------------------

NODAL = -128  # sentinel marking a gapless grid point in a winding map


def nodal_winding_map(params: NodalParams, ky_grid: np.ndarray, kz_grid: np.ndarray,
                      n_kx: int = 128, gap_tol: float = 1e-8) -> np.ndarray:
    """1D winding of the chain's d-loop at each (ky, kz); gapless points marked.

    The loop is taken in the plane actually traced by the chain's d-vector
    (components (d_z, d_y), oriented so the topological region reports w = +1).
    Returns an integer array of shape (len(ky_grid), len(kz_grid)) with
    ``NODAL`` wherever the loop touches the origin within ``gap_tol``.
    """
    ks = 2 * np.pi * np.arange(n_kx) / n_kx
    out = np.empty((len(ky_grid), len(kz_grid)), dtype=int)
    for i, ky in enumerate(ky_grid):
        for j, kz in enumerate(kz_grid):
            local = NodalParams(n_cells=params.n_cells, t0p=params.t0p,
                                M=params.M, d=params.d, ky=float(ky), kz=float(kz))
            d = np.array([nodal_bloch(k, local) for k in ks])
            samples = np.stack([d[:, 2], d[:, 1], np.zeros(len(ks))], axis=1)
            loop = DLoop(samples, guard=gap_tol)
            if np.min(loop.planar_norms()) < gap_tol:
                out[i, j] = NODAL
            else:
                out[i, j] = winding_number(loop)
    return out


def torus_regions(mask: np.ndarray) -> int:
    """Number of connected components of a boolean mask on the torus (4-neighbor)."""
    mask = np.asarray(mask, dtype=bool)
    n1, n2 = mask.shape
    seen = np.zeros_like(mask)
    count = 0
    for i0 in range(n1):
        for j0 in range(n2):
            if not mask[i0, j0] or seen[i0, j0]:
                continue
            count += 1
            stack = [(i0, j0)]
            seen[i0, j0] = True
            while stack:
                i, j = stack.pop()
                for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    a, b = (i + di) % n1, (j + dj) % n2
                    if mask[a, b] and not seen[a, b]:
                        seen[a, b] = True
                        stack.append((a, b))
    return count
