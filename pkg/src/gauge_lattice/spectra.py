"""Open-boundary spectra, edge-mode detection, and flux-pumping sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ConfigError, LatticeError, NumericalError
from .lattice import FluxSpec, LatticeGraph, assemble_hamiltonian, insert_vacancy_flux
from .models import AnnulusParams, hofstadter_annulus, hofstadter_bloch

HERMITICITY_TOL = 1e-10


# ---------------------------------------------------------------------------
# Geometry: boundary distances used for edge metrics
# ---------------------------------------------------------------------------

@dataclass
class Geometry:
    """Boundary bookkeeping for a lattice.

    ``dist_outer[i]`` is the number of lattice steps from site i to the outer
    boundary (0 on the boundary ring); ``dist_inner`` is the analogue for the
    hole boundary of an annulus, None otherwise.  ``decay_coord`` is the
    coordinate used for envelope fits (unit cells from the nearest end for
    chains, outer-boundary distance for 2D lattices).
    """

    kind: str
    n_sites: int
    dim: int
    dist_outer: np.ndarray
    dist_inner: np.ndarray | None = None
    cell_of: np.ndarray | None = None
    left_half: np.ndarray | None = None  # bool mask, chains/ladders only

    @property
    def decay_coord(self) -> np.ndarray:
        if self.kind in ("chain", "ladder") and self.cell_of is not None:
            n_cells = int(self.cell_of.max()) + 1
            return np.minimum(self.cell_of, n_cells - 1 - self.cell_of)
        return self.dist_outer

    def boundary_mask(self, depth: int = 1, which: str = "any") -> np.ndarray:
        if which not in ("outer", "inner", "any"):
            raise ConfigError(f"unknown boundary selector {which!r}")
        outer = self.dist_outer < depth
        if which == "outer":
            return outer
        if self.dist_inner is None:
            if which == "inner":
                raise ConfigError("geometry has no inner boundary")
            return outer
        inner = self.dist_inner < depth
        return inner if which == "inner" else (outer | inner)


def geometry_from_graph(graph: LatticeGraph) -> Geometry:
    """Build a Geometry from the constructor metadata of a graph."""
    kind = graph.meta.get("kind")
    n = graph.n_sites
    if kind == "chain":
        spc = int(graph.meta.get("sites_per_cell", 1))
        idx = np.arange(n)
        cells = idx // spc
        dist = np.minimum(idx, n - 1 - idx)
        return Geometry(kind="chain", n_sites=n, dim=graph.dim, dist_outer=dist,
                        cell_of=cells, left_half=idx < n / 2)
    if kind == "ladder":
        rung = np.arange(n) // 2
        n_rungs = int(graph.meta["n_rungs"])
        dist = np.minimum(rung, n_rungs - 1 - rung)
        return Geometry(kind="ladder", n_sites=n, dim=graph.dim, dist_outer=dist,
                        cell_of=rung, left_half=rung < n_rungs / 2)
    if kind in ("grid", "annulus"):
        pos = graph.positions()
        nx = int(graph.meta["nx"])
        ny = int(graph.meta["ny"])
        x, y = pos[:, 0], pos[:, 1]
        dist_outer = np.minimum.reduce([x, nx - 1 - x, y, ny - 1 - y]).astype(int)
        dist_inner = None
        if kind == "annulus":
            x0, x1, y0, y1 = graph.meta["hole"]
            dx = np.maximum.reduce([x0 - x, x - x1, np.zeros(n)])
            dy = np.maximum.reduce([y0 - y, y - y1, np.zeros(n)])
            dist_inner = (np.maximum(dx, dy) - 1).astype(int)
        return Geometry(kind=kind, n_sites=n, dim=graph.dim,
                        dist_outer=dist_outer, dist_inner=dist_inner)
    raise ConfigError(f"no geometry rule for lattice kind {kind!r}")


def site_populations(state: np.ndarray, dim: int) -> np.ndarray:
    """Fold internal components: per-site probability weights of a state."""
    psi = np.asarray(state)
    if psi.size % dim:
        raise ConfigError("state length is not a multiple of the internal dimension")
    return (np.abs(psi) ** 2).reshape(-1, dim).sum(axis=1)


# ---------------------------------------------------------------------------
# Diagonalization with localization metadata
# ---------------------------------------------------------------------------

@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    ipr: np.ndarray
    edge_weight: np.ndarray | None = None
    geometry: Geometry | None = None
    dim: int = 1

    def state(self, n: int) -> np.ndarray:
        return self.eigenvectors[:, n]


def diagonalize(H: np.ndarray, geometry: Geometry | None = None,
                edge_depth: int = 1) -> SpectrumResult:
    """Dense Hermitian eigensolve with per-state IPR and edge weight."""
    H = np.asarray(H)
    scale = max(1.0, float(np.max(np.abs(H))))
    if np.max(np.abs(H - H.conj().T)) > HERMITICITY_TOL * scale:
        raise LatticeError("diagonalize: matrix is not Hermitian")
    evals, evecs = np.linalg.eigh(H)
    dim = geometry.dim if geometry is not None else 1
    pops = (np.abs(evecs) ** 2).reshape(-1, dim, evecs.shape[1]).sum(axis=1)  # (n_sites, n_states)
    ipr = (pops ** 2).sum(axis=0)
    edge_weight = None
    if geometry is not None:
        mask = geometry.boundary_mask(edge_depth, "any")
        edge_weight = pops[mask].sum(axis=0)
    return SpectrumResult(eigenvalues=evals, eigenvectors=evecs, ipr=ipr,
                          edge_weight=edge_weight, geometry=geometry, dim=dim)


@dataclass(frozen=True)
class LocalizationMetrics:
    edge_weight: float
    ipr: float
    decay_length: float


def localization_metrics(state: np.ndarray, geometry: Geometry,
                         edge_depth: int = 1) -> LocalizationMetrics:
    """Edge weight, inverse participation ratio, and envelope decay length.

    The decay length comes from a log-linear fit of the per-shell amplitude
    sqrt(P(shell)) against the decay coordinate (unit cells from the nearest
    end for chains); an essentially flat or growing envelope reports inf.
    """
    psi = np.asarray(state, dtype=complex)
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise ConfigError("localization_metrics: zero state")
    pops = site_populations(psi / nrm, geometry.dim)
    ipr = float((pops ** 2).sum())
    edge_weight = float(pops[geometry.boundary_mask(edge_depth, "any")].sum())

    coord = geometry.decay_coord
    nbins = int(coord.max()) + 1
    binned = np.zeros(nbins)
    np.add.at(binned, coord.astype(int), pops)
    valid = binned > 1e-22
    xs = np.arange(nbins)[valid]
    ys = 0.5 * np.log(binned[valid])  # log amplitude
    if len(xs) < 3:
        return LocalizationMetrics(edge_weight, ipr, float("inf"))
    slope = np.polyfit(xs, ys, 1)[0]
    decay = float(-1.0 / slope) if slope < -1e-12 else float("inf")
    return LocalizationMetrics(edge_weight, ipr, decay)


# ---------------------------------------------------------------------------
# Edge-mode detection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EdgeMode:
    index: int
    energy: float
    edge_weight: float
    tag: str  # 'left'/'right' for chains, 'inner'/'outer' for annuli
    state: np.ndarray


def _localizing_rotation(vectors: np.ndarray, indicator: np.ndarray) -> np.ndarray:
    """Rotate a (quasi)degenerate set to extremal weight on an indicator mask."""
    M = vectors.conj().T @ (indicator[:, None] * vectors)
    _, rot = np.linalg.eigh(M)
    return vectors @ rot


def detect_edge_modes(spectrum: SpectrumResult, geometry: Geometry,
                      gap_window: tuple[float, float], edge_depth: int = 1,
                      weight_threshold: float = 0.5,
                      localize_degenerate: bool = True,
                      cluster_tol: float = 1e-6) -> list[EdgeMode]:
    """In-gap states with enough weight near a boundary, tagged by side.

    Near-degenerate in-gap multiplets are rotated to the combination that is
    maximally localized on one boundary before measuring weights, so that the
    hybridized +/- pairs of long chains report as left/right (or inner/outer)
    modes rather than half-and-half mixtures.
    """
    lo, hi = gap_window
    evals = spectrum.eigenvalues
    if lo >= hi:
        raise ConfigError("detect_edge_modes: empty gap window")
    if lo < evals[0] - 1e-9 and hi > evals[-1] + 1e-9:
        raise ConfigError("detect_edge_modes: window spans the entire spectrum")
    sel = np.where((evals > lo) & (evals < hi))[0]
    if len(sel) == 0:
        return []

    if geometry.kind in ("chain", "ladder"):
        indicator = geometry.left_half.astype(float)
        tags = ("right", "left")  # ascending indicator weight -> right first
    elif geometry.kind == "annulus":
        indicator = geometry.boundary_mask(edge_depth, "outer").astype(float)
        tags = ("inner", "outer")
    else:
        indicator = geometry.boundary_mask(edge_depth, "outer").astype(float)
        tags = ("bulk", "outer")
    ind_full = np.repeat(indicator, spectrum.dim)

    # group consecutive quasi-degenerate levels
    groups: list[list[int]] = [[sel[0]]]
    for idx in sel[1:]:
        if evals[idx] - evals[groups[-1][-1]] <= cluster_tol:
            groups[-1].append(idx)
        else:
            groups.append([idx])

    out: list[EdgeMode] = []
    any_mask = geometry.boundary_mask(edge_depth, "any")
    for grp in groups:
        vecs = spectrum.eigenvectors[:, grp]
        if localize_degenerate and len(grp) > 1:
            vecs = _localizing_rotation(vecs, ind_full)
        for col, idx in enumerate(grp):
            v = vecs[:, col]
            pops = site_populations(v, spectrum.dim)
            w = float(pops[any_mask].sum())
            if w < weight_threshold:
                continue
            score = float(pops @ indicator)
            tag = tags[1] if score > 0.5 * w else tags[0]
            out.append(EdgeMode(index=int(idx), energy=float(evals[idx]),
                                edge_weight=w, tag=tag, state=v))
    return out


# ---------------------------------------------------------------------------
# Bulk gap windows of the flux lattice
# ---------------------------------------------------------------------------

def hofstadter_gap_windows(p: int, q: int, t: float = 1.0, nk: int = 48,
                           closed_tol: float = 1e-9) -> list[tuple[float, float]]:
    """(lo, hi) of every bulk band gap h = 1..q-1 at flux 2pi p/q; closed gaps
    come back as empty windows (lo >= hi)."""
    model = hofstadter_bloch(p, q, t)
    ks = 2 * np.pi * np.arange(nk) / nk
    evs = np.array([[np.linalg.eigvalsh(model(kx, ky)) for ky in ks] for kx in ks])
    evs = evs.reshape(-1, q)
    lo = evs.max(axis=0)
    hi = evs.min(axis=0)
    return [(float(lo[h - 1]), float(hi[h])) for h in range(1, q)]


# ---------------------------------------------------------------------------
# Flux pumping through the annulus
# ---------------------------------------------------------------------------

@dataclass
class PumpSweep:
    """Spectra of the annulus versus the vacancy flux alpha over [0, 2pi]."""

    params: AnnulusParams
    alphas: np.ndarray
    energies: np.ndarray          # (n_alpha, n_states)
    vectors: list[np.ndarray] = field(repr=False, default_factory=list)
    outer_weight: np.ndarray | None = None
    inner_weight: np.ndarray | None = None
    gap_windows: list[tuple[float, float]] = field(default_factory=list)
    geometry: Geometry | None = None
    edge_depth: int = 1
    _base_graph: LatticeGraph | None = field(repr=False, default=None)

    def solve(self, alpha: float) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(energies, vectors, outer weights, inner weights) at one alpha."""
        cut = self._base_graph.meta["branch_cut"]
        g = insert_vacancy_flux(self._base_graph,
                                FluxSpec(self.params.flux.phi, float(alpha), cut))
        H = assemble_hamiltonian(g)
        evals, evecs = np.linalg.eigh(H)
        pops = np.abs(evecs) ** 2
        ow = pops[self.geometry.boundary_mask(self.edge_depth, "outer")].sum(axis=0)
        iw = pops[self.geometry.boundary_mask(self.edge_depth, "inner")].sum(axis=0)
        return evals, evecs, ow, iw


def laughlin_pump_sweep(params: AnnulusParams, alphas: Sequence[float],
                        edge_depth: int = 1) -> PumpSweep:
    """Diagonalize the annulus on an alpha grid covering [0, 2pi].

    The spectrum at alpha = 2pi must reproduce the one at alpha = 0 (the
    threaded flux is periodic); this is checked to 1e-9.
    """
    alphas = np.asarray(alphas, dtype=float)
    if alphas[0] > 1e-12 or alphas[-1] < 2 * np.pi - 1e-12:
        raise ConfigError("laughlin_pump_sweep: alpha grid must cover [0, 2pi]")
    frac = params.flux_fraction()
    base = hofstadter_annulus(AnnulusParams(params.nx, params.ny, params.hole_nx,
                                            params.hole_ny, FluxSpec(params.flux.phi)))
    geometry = geometry_from_graph(base)
    sweep = PumpSweep(params=params, alphas=alphas, energies=np.empty(0),
                      geometry=geometry, edge_depth=edge_depth, _base_graph=base)
    energies, vectors, ows, iws = [], [], [], []
    for a in alphas:
        evals, evecs, ow, iw = sweep.solve(a)
        energies.append(evals)
        vectors.append(evecs)
        ows.append(ow)
        iws.append(iw)
    sweep.energies = np.array(energies)
    sweep.vectors = vectors
    sweep.outer_weight = np.array(ows)
    sweep.inner_weight = np.array(iws)
    if frac.numerator > 0:
        sweep.gap_windows = hofstadter_gap_windows(frac.numerator, frac.denominator)
    period_err = float(np.max(np.abs(sweep.energies[-1] - sweep.energies[0])))
    if period_err > 1e-9:
        raise NumericalError(f"pump sweep breaks 2pi flux periodicity ({period_err:.2e})")
    return sweep


def count_spectral_flow(sweep: PumpSweep, gap: int, edge: str,
                        overlap_min: float = 0.7, max_depth: int = 8) -> int:
    """Net signed midline crossings of edge branches in one gap over a period.

    A branch is followed between alpha points by eigenvector overlap
    assignment (adaptively bisecting whenever the best overlap drops below
    ``overlap_min``); an upward midline crossing counts +1, downward -1;
    each crossing is attributed to the edge its state lives on.  Inner and
    outer totals are equal and opposite.
    """
    if edge not in ("outer", "inner"):
        raise ConfigError("edge must be 'outer' or 'inner'")
    if not (1 <= gap <= len(sweep.gap_windows)):
        raise ConfigError(f"gap must lie in 1..{len(sweep.gap_windows)}")
    lo, hi = sweep.gap_windows[gap - 1]
    if hi - lo < 1e-6:
        raise NumericalError(f"gap {gap} is closed in the bulk")
    mid = 0.5 * (lo + hi)
    half = 0.75 * (hi - lo)  # selection window around the midline

    def crossings(Ea, Va, owa, iwa, Eb, Vb, owb, iwb, alpha_a, alpha_b, depth) -> float:
        sa = np.where(np.abs(Ea - mid) < half)[0]
        sb = np.where(np.abs(Eb - mid) < half)[0]
        if len(sa) == 0 or len(sb) == 0:
            return 0.0
        O = np.abs(Va[:, sa].conj().T @ Vb[:, sb])
        rows, cols = linear_sum_assignment(-O)
        worst = O[rows, cols].min() if len(rows) else 1.0
        if worst < overlap_min and depth < max_depth:
            am = 0.5 * (alpha_a + alpha_b)
            Em, Vm, owm, iwm = sweep.solve(am)
            return (crossings(Ea, Va, owa, iwa, Em, Vm, owm, iwm, alpha_a, am, depth + 1)
                    + crossings(Em, Vm, owm, iwm, Eb, Vb, owb, iwb, am, alpha_b, depth + 1))
        total = 0.0
        for r, c in zip(rows, cols):
            ia, ib = sa[r], sb[c]
            ea, eb = Ea[ia], Eb[ib]
            if (ea - mid) * (eb - mid) < 0:
                sign = 1.0 if eb > ea else -1.0
                ow = 0.5 * (owa[ia] + owb[ib])
                iw = 0.5 * (iwa[ia] + iwb[ib])
                tag = "outer" if ow >= iw else "inner"
                if tag == edge:
                    total += sign
        return total

    count = 0.0
    for i in range(len(sweep.alphas) - 1):
        count += crossings(sweep.energies[i], sweep.vectors[i],
                           sweep.outer_weight[i], sweep.inner_weight[i],
                           sweep.energies[i + 1], sweep.vectors[i + 1],
                           sweep.outer_weight[i + 1], sweep.inner_weight[i + 1],
                           sweep.alphas[i], sweep.alphas[i + 1], 0)
    return int(round(count))


def track_branches(sweep: PumpSweep) -> np.ndarray:
    """Branch ids (n_alpha, n_states) from sequential overlap assignment."""
    n_alpha, n_states = sweep.energies.shape
    ids = np.empty((n_alpha, n_states), dtype=int)
    ids[0] = np.arange(n_states)
    for i in range(n_alpha - 1):
        O = np.abs(sweep.vectors[i].conj().T @ sweep.vectors[i + 1])
        rows, cols = linear_sum_assignment(-O)
        nxt = np.empty(n_states, dtype=int)
        nxt[cols] = ids[i][rows]
        ids[i + 1] = nxt
    return ids
