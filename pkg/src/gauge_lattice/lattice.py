"""Real-space lattice graphs with U(N) link variables and their Hamiltonians.

A lattice is a collection of sites (each carrying a d x d Hermitian on-site
block and a loss rate) and directed links.  A link stores one physical bond,
in the creation/annihilation subscript order of its Hamiltonian term:

    Link(src, dst, amplitude=J, phase=theta, matrix=U)

contributes  J e^{i theta} U  a^dag_src a_dst + h.c., i.e. the assembled
Hamiltonian carries the block

    H[src, dst] = J e^{i theta} U,      H[dst, src] = J e^{-i theta} U^dag.

The reverse term is implicit and never stored.  Loop phases accumulate the
stored phase when a cycle step runs src -> dst along a stored link and minus
the phase against it; with the three-mode loop stored as (1->2, theta12),
(2->3, theta23), (3->1, theta31) the cycle [1,2,3] therefore carries the flux
theta12 + theta23 + theta31, and a counterclockwise unit plaquette of the
Landau-gauge square lattice carries the plaquette field.

Parallel links between the same ordered pair are permitted: hop processes that
are driven by separate parametric tones (e.g. a spin-preserving and a
spin-flipping branch) appear as separate unitary link variables whose blocks
add.  Cycle/holonomy operations require the traversed bonds to be simple.
"""

from __future__ import annotations

import cmath
import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix

from .errors import LatticeError

UNITARITY_TOL = 1e-12
HERMITICITY_TOL = 1e-12


# ---------------------------------------------------------------------------
# Core data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Site:
    """Lattice site: integer id, 2D position, on-site block, loss rate."""

    index: int
    position: tuple[float, float]
    onsite: np.ndarray | float = 0.0
    loss_rate: float = 0.0
    label: str | None = None

    def onsite_block(self, dim: int) -> np.ndarray:
        block = np.asarray(self.onsite, dtype=complex)
        if block.ndim == 0:
            block = block * np.eye(dim)
        if block.shape != (dim, dim):
            raise LatticeError(f"site {self.index}: onsite block shape {block.shape}, expected ({dim},{dim})")
        return block


@dataclass(frozen=True, eq=False)
class Link:
    """One stored bond: the term J e^{i phase} U a^dag_src a_dst + h.c."""

    src: int
    dst: int
    amplitude: float = 1.0
    phase: float = 0.0
    matrix: np.ndarray | None = None

    def unitary(self, dim: int) -> np.ndarray:
        if self.matrix is None:
            return np.eye(dim, dtype=complex)
        U = np.asarray(self.matrix, dtype=complex)
        if U.shape != (dim, dim):
            raise LatticeError(f"link {self.src}->{self.dst}: matrix shape {U.shape}, expected ({dim},{dim})")
        return U

    def block(self, dim: int) -> np.ndarray:
        return self.amplitude * cmath.exp(1j * self.phase) * self.unitary(dim)


@dataclass
class LatticeGraph:
    """Sites plus directed links; ``dim`` is the internal (spin) dimension."""

    sites: list[Site]
    links: list[Link]
    dim: int = 1
    meta: dict = field(default_factory=dict)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def size(self) -> int:
        return self.n_sites * self.dim

    def positions(self) -> np.ndarray:
        return np.array([s.position for s in self.sites], dtype=float)

    def loss_vector(self) -> np.ndarray:
        """Per-site loss rates kappa, in the order of ``sites``."""
        return np.array([s.loss_rate for s in self.sites], dtype=float)

    def validate(self) -> None:
        """Check the structural invariants; raise LatticeError on violation."""
        indices = [s.index for s in self.sites]
        if indices != list(range(self.n_sites)):
            raise LatticeError("site indices must be 0..n_sites-1 in order")
        for s in self.sites:
            if s.loss_rate < 0:
                raise LatticeError(f"site {s.index}: negative loss rate")
            block = s.onsite_block(self.dim)
            if np.max(np.abs(block - block.conj().T)) > HERMITICITY_TOL:
                raise LatticeError(f"site {s.index}: onsite block is not Hermitian")
        seen: list[tuple[int, int]] = []
        for ln in self.links:
            if ln.src == ln.dst:
                raise LatticeError(f"self-link at site {ln.src}")
            if not (0 <= ln.src < self.n_sites and 0 <= ln.dst < self.n_sites):
                raise LatticeError(f"link {ln.src}->{ln.dst}: unknown site")
            if ln.amplitude < 0:
                raise LatticeError(f"link {ln.src}->{ln.dst}: negative amplitude")
            U = ln.unitary(self.dim)
            if np.max(np.abs(U.conj().T @ U - np.eye(self.dim))) > UNITARITY_TOL:
                raise LatticeError(f"link {ln.src}->{ln.dst}: matrix is not unitary")
            seen.append((ln.src, ln.dst))
        if not self.meta.get("parallel_links", False):
            # each physical bond is stored once, in one direction
            pairs = set(seen)
            if len(pairs) < len(seen):
                raise LatticeError("duplicate (src, dst) links")
            for a, b in pairs:
                if (b, a) in pairs:
                    raise LatticeError(f"bond {a}<->{b} stored in both directions")

    def link_lookup(self) -> dict[tuple[int, int], list[Link]]:
        table: dict[tuple[int, int], list[Link]] = {}
        for ln in self.links:
            table.setdefault((ln.src, ln.dst), []).append(ln)
        return table


# ---------------------------------------------------------------------------
# Hamiltonian assembly
# ---------------------------------------------------------------------------

def assemble_hamiltonian(graph: LatticeGraph) -> np.ndarray:
    """Dense Hermitian Hamiltonian of size n_sites*dim, built from the links.

    Each stored link contributes J e^{i theta} U at block (src, dst) plus the
    conjugate transpose at (dst, src); on-site blocks sit on the diagonal.
    """
    graph.validate()
    d = graph.dim
    H = np.zeros((graph.size, graph.size), dtype=complex)
    for s in graph.sites:
        i = s.index * d
        H[i:i + d, i:i + d] += s.onsite_block(d)
    for ln in graph.links:
        blk = ln.block(d)
        i, j = ln.src * d, ln.dst * d
        H[i:i + d, j:j + d] += blk
        H[j:j + d, i:i + d] += blk.conj().T
    return H


def sparse_triplets(graph: LatticeGraph) -> coo_matrix:
    """Sparse (COO) export of the Hamiltonian, for graphs past the dense scale."""
    graph.validate()
    d = graph.dim
    rows: list[int] = []
    cols: list[int] = []
    vals: list[complex] = []

    def put(block: np.ndarray, bi: int, bj: int) -> None:
        for a in range(d):
            for b in range(d):
                if block[a, b] != 0:
                    rows.append(bi * d + a)
                    cols.append(bj * d + b)
                    vals.append(block[a, b])

    for s in graph.sites:
        put(s.onsite_block(d), s.index, s.index)
    for ln in graph.links:
        blk = ln.block(d)
        put(blk, ln.src, ln.dst)
        put(blk.conj().T, ln.dst, ln.src)
    return coo_matrix((vals, (rows, cols)), shape=(graph.size, graph.size))


# ---------------------------------------------------------------------------
# Peierls phases (Landau gauge) and loop quantities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LandauGauge:
    """Vector potential A = [0, phi * x, 0] for a uniform plaquette flux phi."""

    phi: float

    def a_y(self, x: float) -> float:
        return self.phi * x


def peierls_phase(path: Sequence[Sequence[float]], gauge: LandauGauge) -> float:
    """Line integral of the gauge field along an axis-aligned lattice path.

    x-directed segments pick up nothing; a y-directed segment at column x
    contributes phi * x * dy.
    """
    pts = np.asarray(path, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise LatticeError("path must be a sequence of >= 2 planar points")
    total = 0.0
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        dx, dy = x1 - x0, y1 - y0
        if dx != 0.0 and dy != 0.0:
            raise LatticeError(f"path segment ({x0},{y0})->({x1},{y1}) is not axis-aligned")
        if dy != 0.0:
            total += gauge.a_y(x0) * dy
    return total


def _cycle_links(graph: LatticeGraph, cycle: Sequence[int]) -> list[tuple[Link, bool]]:
    """Resolve the directed bonds of a site cycle; bool = traversed along storage."""
    table = graph.link_lookup()
    out: list[tuple[Link, bool]] = []
    n = len(cycle)
    for k in range(n):
        a, b = cycle[k], cycle[(k + 1) % n]
        fwd = table.get((a, b), [])
        bwd = table.get((b, a), [])
        if len(fwd) + len(bwd) == 0:
            raise LatticeError(f"cycle step {a}->{b}: no link between these sites")
        if len(fwd) + len(bwd) > 1:
            raise LatticeError(f"cycle step {a}->{b}: parallel links make the loop phase ambiguous")
        if fwd:
            out.append((fwd[0], True))
        else:
            out.append((bwd[0], False))
    return out


def plaquette_flux(graph: LatticeGraph, cycle: Sequence[int]) -> float:
    """Directed sum of link phases around a site cycle, reduced to [0, 2pi).

    Traversing a link along its stored direction adds the stored phase,
    against it subtracts.  For dim > 1 this is the Abelian phase part only;
    use :func:`link_product` for the matrix holonomy.
    """
    total = 0.0
    for ln, along in _cycle_links(graph, cycle):
        total += ln.phase if along else -ln.phase
    return float(total % (2 * np.pi))


def link_product(graph: LatticeGraph, path: Sequence[int]) -> np.ndarray:
    """Ordered product of link matrices along an open directed site path.

    The result is U_n ... U_2 U_1 for hops path[0] -> path[1] -> ... with
    U_k the stored matrix (or its adjoint when traversed against storage);
    phases are not included.
    """
    table = graph.link_lookup()
    prod = np.eye(graph.dim, dtype=complex)
    for a, b in zip(path[:-1], path[1:]):
        fwd = table.get((a, b), [])
        bwd = table.get((b, a), [])
        if len(fwd) + len(bwd) != 1:
            raise LatticeError(f"path step {a}->{b}: need exactly one link")
        U = fwd[0].unitary(graph.dim) if fwd else bwd[0].unitary(graph.dim).conj().T
        prod = U @ prod
    return prod


# ---------------------------------------------------------------------------
# Flux threading through a vacancy
# ---------------------------------------------------------------------------

@dataclass
class FluxSpec:
    """Uniform plaquette flux phi plus an extra flux alpha through the vacancy.

    ``branch_cut`` lists ordered (src, dst) site pairs: the links crossed by a
    dual path running from the vacancy to the outer boundary.  Each one gets
    its phase shifted by +alpha, which threads alpha through the hole while
    leaving every elementary plaquette flux untouched.
    """

    phi: float = 0.0
    alpha: float = 0.0
    branch_cut: list[tuple[int, int]] = field(default_factory=list)


def insert_vacancy_flux(graph: LatticeGraph, flux: FluxSpec) -> LatticeGraph:
    """Return a copy of ``graph`` with flux.alpha added along the branch cut."""
    if flux.alpha == 0.0 or not flux.branch_cut:
        if flux.alpha != 0.0:
            raise LatticeError("alpha != 0 requires a branch cut")
        return graph
    cut = set()
    for pair in flux.branch_cut:
        pair = (int(pair[0]), int(pair[1]))
        if pair in cut:
            raise LatticeError(f"branch cut repeats link {pair}")
        cut.add(pair)
    table = graph.link_lookup()
    for pair in cut:
        if pair not in table:
            raise LatticeError(f"branch cut link {pair[0]}->{pair[1]} does not exist "
                               "(cut may not cross the vacancy interior)")
    new_links = []
    for ln in graph.links:
        if (ln.src, ln.dst) in cut:
            new_links.append(replace(ln, phase=ln.phase + flux.alpha))
        else:
            new_links.append(ln)
    return LatticeGraph(sites=list(graph.sites), links=new_links, dim=graph.dim,
                        meta=dict(graph.meta))


# ---------------------------------------------------------------------------
# Disorder, defects, gauge transformations
# ---------------------------------------------------------------------------

def apply_disorder(graph: LatticeGraph, sigma_onsite: float, sigma_hop: float,
                   defect: tuple[Iterable[int], float] | None = None,
                   seed: int = 0) -> LatticeGraph:
    """Gaussian on-site and hopping-amplitude disorder, plus an optional defect.

    On-site energies get independent N(0, sigma_onsite) scalar shifts, link
    amplitudes independent N(0, sigma_hop) shifts; link matrices and phases
    are untouched.  ``defect`` = (site indices, strength) shifts those on-site
    energies by exactly the strength.  Deterministic under a fixed seed.
    """
    if sigma_onsite < 0 or sigma_hop < 0:
        raise LatticeError("disorder widths must be non-negative")
    rng = np.random.default_rng(seed)
    eye = np.eye(graph.dim)
    d_on = rng.normal(0.0, sigma_onsite, size=graph.n_sites) if sigma_onsite > 0 else np.zeros(graph.n_sites)
    d_hop = rng.normal(0.0, sigma_hop, size=len(graph.links)) if sigma_hop > 0 else np.zeros(len(graph.links))

    new_sites = []
    defect_sites: set[int] = set()
    strength = 0.0
    if defect is not None:
        defect_sites, strength = set(int(i) for i in defect[0]), float(defect[1])
    for s in graph.sites:
        shift = d_on[s.index] + (strength if s.index in defect_sites else 0.0)
        if shift == 0.0:
            new_sites.append(s)
        else:
            new_sites.append(replace(s, onsite=s.onsite_block(graph.dim) + shift * eye))

    new_links = []
    for k, ln in enumerate(graph.links):
        amp = ln.amplitude + d_hop[k]
        if amp >= 0:
            new_links.append(replace(ln, amplitude=amp))
        else:
            # keep amplitudes non-negative; a sign flip is a pi phase
            new_links.append(replace(ln, amplitude=-amp, phase=ln.phase + np.pi))
    return LatticeGraph(sites=new_sites, links=new_links, dim=graph.dim, meta=dict(graph.meta))


def gauge_transform(graph: LatticeGraph, site_phases: Sequence[float]) -> LatticeGraph:
    """Conjugate by the diagonal unitary diag(e^{i chi_i} x 1_d).

    Link phases change by chi_src - chi_dst; spectra and loop fluxes do not.
    """
    chi = np.asarray(site_phases, dtype=float)
    if chi.shape != (graph.n_sites,):
        raise LatticeError("need one phase per site")
    new_links = [replace(ln, phase=ln.phase + chi[ln.src] - chi[ln.dst]) for ln in graph.links]
    return LatticeGraph(sites=list(graph.sites), links=new_links, dim=graph.dim, meta=dict(graph.meta))


# ---------------------------------------------------------------------------
# JSON import/export
# ---------------------------------------------------------------------------

def _complex_pairs(arr: np.ndarray) -> list:
    flat = np.asarray(arr, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def _from_pairs(pairs: list, dim: int) -> np.ndarray:
    flat = np.array([complex(re, im) for re, im in pairs])
    return flat.reshape(dim, dim)


def graph_to_json(graph: LatticeGraph) -> dict:
    """Serializable document: complex numbers as [re, im], blocks row-major."""
    d = graph.dim
    return {
        "dim": d,
        "sites": [
            {
                "index": s.index,
                "label": s.label,
                "position": [float(s.position[0]), float(s.position[1])],
                "onsite": _complex_pairs(s.onsite_block(d)),
                "loss": float(s.loss_rate),
            }
            for s in graph.sites
        ],
        "links": [
            {
                "from": ln.src,
                "to": ln.dst,
                "amplitude": float(ln.amplitude),
                "phase": float(ln.phase),
                "matrix": _complex_pairs(ln.unitary(d)),
            }
            for ln in graph.links
        ],
    }


def graph_from_json(doc: dict) -> LatticeGraph:
    d = int(doc["dim"])
    sites = [
        Site(index=int(s["index"]), position=tuple(s["position"]),
             onsite=_from_pairs(s["onsite"], d), loss_rate=float(s.get("loss", 0.0)),
             label=s.get("label"))
        for s in doc["sites"]
    ]
    links = [
        Link(src=int(l["from"]), dst=int(l["to"]), amplitude=float(l["amplitude"]),
             phase=float(l["phase"]), matrix=_from_pairs(l["matrix"], d))
        for l in doc["links"]
    ]
    graph = LatticeGraph(sites=sites, links=links, dim=d, meta={"parallel_links": True})
    graph.validate()
    return graph


def graph_to_json_str(graph: LatticeGraph) -> str:
    return json.dumps(graph_to_json(graph), sort_keys=True)


def graph_from_json_str(text: str) -> LatticeGraph:
    return graph_from_json(json.loads(text))
