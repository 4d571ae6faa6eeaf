"""Constructors for the lattice families studied in the package.

Every builder returns a :class:`~gauge_lattice.lattice.LatticeGraph` whose
``meta`` records the geometry (kind, extents, cell structure) used downstream
for edge detection and observables.  Momentum-space evaluators live here too.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, LatticeError
from .lattice import FluxSpec, LandauGauge, LatticeGraph, Link, Site, peierls_phase

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def _amp_phase(value: float, phase: float = 0.0) -> tuple[float, float]:
    """Fold a signed amplitude into (non-negative amplitude, phase)."""
    if value >= 0:
        return float(value), float(phase)
    return float(-value), float(phase + np.pi)


# ---------------------------------------------------------------------------
# SSH chain
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SshParams:
    n_cells: int
    g_a: float
    g_b: float
    boundary: str = "open"

    def __post_init__(self) -> None:
        if self.n_cells < 1:
            raise ConfigError("SshParams: n_cells must be >= 1")
        if self.boundary not in ("open", "periodic"):
            raise ConfigError("SshParams: boundary must be 'open' or 'periodic'")


def ssh_chain(p: SshParams) -> LatticeGraph:
    """Two-site-cell chain with alternating intra/inter-cell hoppings g_a, g_b."""
    sites = []
    for n in range(p.n_cells):
        sites.append(Site(index=2 * n, position=(float(n), 0.0), label="A"))
        sites.append(Site(index=2 * n + 1, position=(n + 0.5, 0.0), label="B"))
    links = []
    amp_a, ph_a = _amp_phase(p.g_a)
    amp_b, ph_b = _amp_phase(p.g_b)
    for n in range(p.n_cells):
        links.append(Link(2 * n, 2 * n + 1, amplitude=amp_a, phase=ph_a))
        if n + 1 < p.n_cells:
            links.append(Link(2 * n + 1, 2 * n + 2, amplitude=amp_b, phase=ph_b))
    if p.boundary == "periodic" and p.n_cells > 1:
        links.append(Link(2 * p.n_cells - 1, 0, amplitude=amp_b, phase=ph_b))
    meta = {"kind": "chain", "n_cells": p.n_cells, "sites_per_cell": 2,
            "model": "ssh", "g_a": p.g_a, "g_b": p.g_b, "boundary": p.boundary}
    return LatticeGraph(sites=sites, links=links, dim=1, meta=meta)


def ssh_bloch(k: float, g_a: float, g_b: float) -> np.ndarray:
    """Planar d-vector of the two-band chain: (g_a + g_b cos k, g_b sin k, 0).

    The overall sign convention drops out of any winding computed from it.
    """
    return np.array([g_a + g_b * np.cos(k), g_b * np.sin(k), 0.0])


def ssh_dloop(g_a: float, g_b: float, n_points: int = 256) -> np.ndarray:
    ks = 2 * np.pi * np.arange(n_points) / n_points
    return np.stack([g_a + g_b * np.cos(ks), g_b * np.sin(ks), np.zeros_like(ks)], axis=1)


# ---------------------------------------------------------------------------
# Three-mode necklace
# ---------------------------------------------------------------------------

def necklace3(J: float, theta12: float, theta23: float, theta31: float,
              kappa: float = 0.0) -> LatticeGraph:
    """Three modes on a loop; hop m -> m+1 adopts the phase theta_{m,m+1}.

    The loop flux (cycle 1->2->3->1) is theta12 + theta23 + theta31, and its
    sign sets the circulation direction of an initially localized excitation.
    """
    if J <= 0:
        raise ConfigError("necklace3: J must be positive")
    if kappa < 0:
        raise ConfigError("necklace3: kappa must be non-negative")
    ang = [np.pi / 2, np.pi / 2 + 2 * np.pi / 3, np.pi / 2 + 4 * np.pi / 3]
    sites = [Site(index=m, position=(float(np.cos(a)), float(np.sin(a))),
                  loss_rate=kappa, label=f"TLR{m + 1}") for m, a in enumerate(ang)]
    links = [
        Link(0, 1, amplitude=J, phase=theta12),
        Link(1, 2, amplitude=J, phase=theta23),
        Link(2, 0, amplitude=J, phase=theta31),
    ]
    meta = {"kind": "necklace", "model": "necklace3",
            "theta_sum": theta12 + theta23 + theta31}
    return LatticeGraph(sites=sites, links=links, dim=1, meta=meta)


# ---------------------------------------------------------------------------
# Hofstadter annulus (square lattice with a centered rectangular vacancy)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnnulusParams:
    nx: int
    ny: int
    hole_nx: int
    hole_ny: int
    flux: FluxSpec = field(default_factory=FluxSpec)

    def __post_init__(self) -> None:
        if self.nx < 3 or self.ny < 3:
            raise ConfigError("AnnulusParams: lattice extents must be >= 3")
        if not (1 <= self.hole_nx <= self.nx - 2 and 1 <= self.hole_ny <= self.ny - 2):
            raise ConfigError("AnnulusParams: hole must be strictly interior")
        if (self.nx - self.hole_nx) % 2 or (self.ny - self.hole_ny) % 2:
            raise ConfigError("AnnulusParams: hole must be centered (even margins)")

    @property
    def hole_bounds(self) -> tuple[int, int, int, int]:
        """(x0, x1, y0, y1), inclusive bounds of the removed block."""
        x0 = (self.nx - self.hole_nx) // 2
        y0 = (self.ny - self.hole_ny) // 2
        return x0, x0 + self.hole_nx - 1, y0, y0 + self.hole_ny - 1

    def flux_fraction(self) -> Fraction:
        """phi / 2pi as an exact rational p/q (denominator <= 512)."""
        frac = Fraction(self.flux.phi / (2 * np.pi)).limit_denominator(512)
        if abs(float(frac) - self.flux.phi / (2 * np.pi)) > 1e-9:
            raise ConfigError("AnnulusParams: flux phi must be a rational multiple of 2pi")
        return frac


def hofstadter_annulus(p: AnnulusParams) -> LatticeGraph:
    """Square lattice minus a centered hole, in the Landau gauge A=[0, phi x, 0].

    x-directed hops carry no phase, the hop (x,y) -> (x,y+1) adopts phi*x, so
    every elementary plaquette (counterclockwise) carries flux phi.  The extra
    vacancy flux alpha is threaded along a default branch cut -- the column of
    x-links crossed by a dual line running from the hole's top edge to the
    outer boundary -- unless the FluxSpec supplies its own.
    """
    x0, x1, y0, y1 = p.hole_bounds
    gauge = LandauGauge(p.flux.phi)
    in_hole = lambda x, y: x0 <= x <= x1 and y0 <= y <= y1
    coords = [(x, y) for y in range(p.ny) for x in range(p.nx) if not in_hole(x, y)]
    index = {c: i for i, c in enumerate(coords)}
    sites = [Site(index=i, position=(float(x), float(y))) for i, (x, y) in enumerate(coords)]
    links = []
    for (x, y), i in index.items():
        if (x + 1, y) in index:
            links.append(Link(i, index[(x + 1, y)], amplitude=1.0, phase=0.0))
        if (x, y + 1) in index:
            theta = peierls_phase([(x, y), (x, y + 1)], gauge)
            links.append(Link(i, index[(x, y + 1)], amplitude=1.0, phase=theta))

    cut = list(p.flux.branch_cut)
    if not cut:
        xc = p.nx // 2
        cut = [(index[(xc - 1, y)], index[(xc, y)]) for y in range(y1 + 1, p.ny)]
    meta = {"kind": "annulus", "nx": p.nx, "ny": p.ny, "hole": (x0, x1, y0, y1),
            "model": "hofstadter_annulus", "phi": p.flux.phi, "alpha": p.flux.alpha,
            "branch_cut": cut, "coords": coords}
    graph = LatticeGraph(sites=sites, links=links, dim=1, meta=meta)
    if p.flux.alpha != 0.0:
        from .lattice import insert_vacancy_flux
        graph = insert_vacancy_flux(graph, FluxSpec(p.flux.phi, p.flux.alpha, cut))
    return graph


# ---------------------------------------------------------------------------
# Rhombic chain with U(N) link variables (flux/interference caging)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CageConfig:
    """Rhombic chain of n_cells A-spine sites; rhombus n sits between A_n, A_{n+1}.

    u1..u4 are the link variables on the bonds (A_n - B_n), (B_n - A_{n+1}),
    (C_n - A_{n+1}), (A_n - C_n) in the labelling u1: A-B, u2: B-A', u3: C-A',
    u4: A-C.  The interference matrix is I = (u2 u1 + u4 u3)/2; the rightward
    two-step propagator realized on the lattice is its adjoint, which is what
    reproduces the documented asymmetric motion.
    """

    n_cells: int
    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray
    u4: np.ndarray
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if self.n_cells < 2:
            raise ConfigError("CageConfig: need at least 2 cells")
        if self.amplitude <= 0:
            raise ConfigError("CageConfig: amplitude must be positive")
        for name in ("u1", "u2", "u3", "u4"):
            U = np.asarray(getattr(self, name), dtype=complex)
            if U.ndim != 2 or U.shape[0] != U.shape[1]:
                raise ConfigError(f"CageConfig: {name} must be square")
            if np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) > 1e-12:
                raise ConfigError(f"CageConfig: {name} is not unitary")
        dims = {np.asarray(getattr(self, n)).shape[0] for n in ("u1", "u2", "u3", "u4")}
        if len(dims) != 1:
            raise ConfigError("CageConfig: link matrices must share one dimension")

    @property
    def dim(self) -> int:
        return int(np.asarray(self.u1).shape[0])


def interference_matrix(c: CageConfig) -> np.ndarray:
    """I = (u2 u1 + u4 u3) / 2; caging occurs when I is nilpotent (or zero)."""
    u1, u2, u3, u4 = (np.asarray(getattr(c, n), dtype=complex) for n in ("u1", "u2", "u3", "u4"))
    return (u2 @ u1 + u4 @ u3) / 2.0


STANDARD_CAGE_LINKS = {
    "u1": np.eye(2, dtype=complex),
    "u2": SIGMA_X.copy(),
    "u3": np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex),
    "u4": np.eye(2, dtype=complex),
}
"""The minimal two-component link set whose interference matrix is [[0,1],[0,0]]."""


def standard_cage(n_cells: int, amplitude: float = 1.0) -> CageConfig:
    return CageConfig(n_cells=n_cells, amplitude=amplitude, **STANDARD_CAGE_LINKS)


def abelian_pi_cage(n_cells: int, amplitude: float = 1.0) -> CageConfig:
    """Scalar rhombic chain with flux pi per rhombus (interference scalar 0)."""
    m = np.ones((1, 1), dtype=complex)
    return CageConfig(n_cells=n_cells, amplitude=amplitude,
                      u1=m, u2=m, u3=-m, u4=m)


def rhombic_abcage(c: CageConfig) -> LatticeGraph:
    """Rhombic chain. Site ids: A_n = n (n < n_cells); rhombus n holds B_n, C_n.

    Bonds are stored as (A_n -> B_n, u1), (B_n -> A_{n+1}, u2),
    (A_n -> C_n, u4), (C_n -> A_{n+1}, u3); the physical rightward
    A_n -> A_{n+1} two-step amplitude is then (u1 u2 + u4 u3)^dag, which for
    the standard link set equals the adjoint interference matrix: an
    excitation in component 1 of A_n reaches only component 2 of A_{n+1},
    and component 2 only component 1 of A_{n-1}.
    """
    nA = c.n_cells
    nR = nA - 1
    d = c.dim

    def a_id(n: int) -> int:
        return n

    def b_id(n: int) -> int:
        return nA + 2 * n

    def c_id(n: int) -> int:
        return nA + 2 * n + 1

    sites = [Site(index=a_id(n), position=(float(n), 0.0), label=f"A{n}") for n in range(nA)]
    for n in range(nR):
        sites.append(Site(index=b_id(n), position=(n + 0.5, 1.0), label=f"B{n}"))
        sites.append(Site(index=c_id(n), position=(n + 0.5, -1.0), label=f"C{n}"))
    sites.sort(key=lambda s: s.index)

    J = c.amplitude
    links = []
    for n in range(nR):
        links.append(Link(a_id(n), b_id(n), amplitude=J, matrix=np.asarray(c.u1, complex)))
        links.append(Link(b_id(n), a_id(n + 1), amplitude=J, matrix=np.asarray(c.u2, complex)))
        links.append(Link(a_id(n), c_id(n), amplitude=J, matrix=np.asarray(c.u4, complex)))
        links.append(Link(c_id(n), a_id(n + 1), amplitude=J, matrix=np.asarray(c.u3, complex)))
    meta = {"kind": "cage", "model": "rhombic_abcage", "n_cells": nA,
            "a_sites": [a_id(n) for n in range(nA)],
            "b_sites": [b_id(n) for n in range(nR)],
            "c_sites": [c_id(n) for n in range(nR)]}
    return LatticeGraph(sites=sites, links=links, dim=d, meta=meta)


# ---------------------------------------------------------------------------
# Two-leg flux ladder
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LadderParams:
    n_rungs: int
    t0: float
    phi: float
    # optional per-bond overrides; uniform reduction when None
    t_leg_a: Sequence[float] | None = None
    t_leg_b: Sequence[float] | None = None
    t_rung: Sequence[float] | None = None

    def __post_init__(self) -> None:
        if self.n_rungs < 2:
            raise ConfigError("LadderParams: need at least 2 rungs")
        for name, n_expected in (("t_leg_a", self.n_rungs - 1),
                                 ("t_leg_b", self.n_rungs - 1),
                                 ("t_rung", self.n_rungs)):
            arr = getattr(self, name)
            if arr is not None and len(arr) != n_expected:
                raise ConfigError(f"LadderParams: {name} must have length {n_expected}")


def ladder_site(leg: str, j: int) -> int:
    """Site id of rung j on leg 'A' (bottom) or 'B' (top)."""
    return 2 * j + (0 if leg == "A" else 1)


def two_leg_ladder(p: LadderParams) -> LatticeGraph:
    """Two coupled chains with flux phi per plaquette.

    Stored leg bonds (j -> j+1) carry phase +phi/2 on leg A and -phi/2 on
    leg B, rungs are real, so the plaquette cycle (A_j, A_{j+1}, B_{j+1}, B_j)
    accumulates exactly phi.
    """
    N = p.n_rungs
    sites = []
    for j in range(N):
        sites.append(Site(index=ladder_site("A", j), position=(float(j), 0.0), label="A"))
        sites.append(Site(index=ladder_site("B", j), position=(float(j), 1.0), label="B"))
    t_a = p.t_leg_a if p.t_leg_a is not None else [p.t0] * (N - 1)
    t_b = p.t_leg_b if p.t_leg_b is not None else [p.t0] * (N - 1)
    t_r = p.t_rung if p.t_rung is not None else [p.t0] * N
    links = []
    for j in range(N - 1):
        amp, ph = _amp_phase(t_a[j], +p.phi / 2)
        links.append(Link(ladder_site("A", j), ladder_site("A", j + 1), amplitude=amp, phase=ph))
        amp, ph = _amp_phase(t_b[j], -p.phi / 2)
        links.append(Link(ladder_site("B", j), ladder_site("B", j + 1), amplitude=amp, phase=ph))
    for j in range(N):
        amp, ph = _amp_phase(t_r[j])
        links.append(Link(ladder_site("A", j), ladder_site("B", j), amplitude=amp, phase=ph))
    meta = {"kind": "ladder", "model": "two_leg_ladder", "n_rungs": N,
            "t0": p.t0, "phi": p.phi}
    return LatticeGraph(sites=sites, links=links, dim=1, meta=meta)


# ---------------------------------------------------------------------------
# Spin-orbit-coupled chain
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SocChainParams:
    n_cells: int
    t_z: float
    h_z: float
    delta0: float
    boundary: str = "open"

    def __post_init__(self) -> None:
        if self.n_cells < 2:
            raise ConfigError("SocChainParams: need at least 2 cells")
        if self.boundary not in ("open", "periodic"):
            raise ConfigError("SocChainParams: boundary must be 'open' or 'periodic'")


def soc_chain(p: SocChainParams) -> LatticeGraph:
    """Spin-1/2 chain: spin-diagonal hops +/- t_z, antisymmetric spin flips
    i*delta0, Zeeman splitting h_z.

    The bond block <l|H|l+1> equals t_z sigma_z - i delta0 sigma_x.  Its two
    singular values |t_z +/- delta0| differ, so the bond is stored as two
    parallel unitary link processes (spin-preserving and spin-flipping), the
    way the two are driven by separate modulation tones.
    """
    sites = [Site(index=l, position=(float(l), 0.0), onsite=p.h_z * SIGMA_Z)
             for l in range(p.n_cells)]
    links = []
    amp_t, ph_t = _amp_phase(p.t_z)
    amp_d, ph_d = _amp_phase(p.delta0, -np.pi / 2)
    bonds = [(l, l + 1) for l in range(p.n_cells - 1)]
    if p.boundary == "periodic":
        bonds.append((p.n_cells - 1, 0))
    for l, m in bonds:
        if amp_t:
            links.append(Link(l, m, amplitude=amp_t, phase=ph_t, matrix=SIGMA_Z.copy()))
        if amp_d:
            links.append(Link(l, m, amplitude=amp_d, phase=ph_d, matrix=SIGMA_X.copy()))
    meta = {"kind": "chain", "model": "soc_chain", "n_cells": p.n_cells,
            "sites_per_cell": 1, "parallel_links": True,
            "t_z": p.t_z, "h_z": p.h_z, "delta0": p.delta0}
    return LatticeGraph(sites=sites, links=links, dim=2, meta=meta)


def soc_bloch(k: float, p: SocChainParams) -> np.ndarray:
    """Bulk d-vector (d_x, d_y, d_z) of the chain at momentum k."""
    return np.array([-2 * p.delta0 * np.sin(k), 0.0, p.h_z + 2 * p.t_z * np.cos(k)])


# ---------------------------------------------------------------------------
# Nodal-loop chain (two parametric momenta)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NodalParams:
    n_cells: int
    t0p: float
    M: float
    d: float
    ky: float = 0.0
    kz: float = 0.0

    def __post_init__(self) -> None:
        if self.n_cells < 2:
            raise ConfigError("NodalParams: need at least 2 cells")

    def zeeman(self) -> float:
        """m'(ky, kz) = M + 2 d (cos ky + cos kz)."""
        return self.M + 2 * self.d * (np.cos(self.ky) + np.cos(self.kz))


def nodal_loop_chain(p: NodalParams) -> LatticeGraph:
    """Chain realizing the parametric-momentum family with Zeeman m'(ky,kz).

    Bond block <l|H|l+1> = i t0p (sigma_z + i sigma_y), stored as two parallel
    unitary links; on-site term m'(ky, kz) sigma_z.
    """
    mp = p.zeeman()
    sites = [Site(index=l, position=(float(l), 0.0), onsite=mp * SIGMA_Z)
             for l in range(p.n_cells)]
    links = []
    amp, _ = _amp_phase(p.t0p)
    sgn = 0.0 if p.t0p >= 0 else np.pi
    for l in range(p.n_cells - 1):
        if amp:
            links.append(Link(l, l + 1, amplitude=amp, phase=np.pi / 2 + sgn, matrix=SIGMA_Z.copy()))
            links.append(Link(l, l + 1, amplitude=amp, phase=np.pi + sgn, matrix=SIGMA_Y.copy()))
    meta = {"kind": "chain", "model": "nodal_loop_chain", "n_cells": p.n_cells,
            "sites_per_cell": 1, "parallel_links": True,
            "t0p": p.t0p, "M": p.M, "d": p.d, "ky": p.ky, "kz": p.kz}
    return LatticeGraph(sites=sites, links=links, dim=2, meta=meta)


def nodal_bloch(k: float, p: NodalParams) -> np.ndarray:
    """Bulk d-vector (d_x, d_y, d_z) at chain momentum k."""
    return np.array([0.0, -2 * p.t0p * np.cos(k), p.zeeman() + 2 * p.t0p * np.sin(k)])


# ---------------------------------------------------------------------------
# Two-component square lattice with opposite-flux spin sectors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QshParams:
    nx: int
    ny: int
    t0: float
    j_flux: float
    k_mix: float
    chi: float = 0.0

    def __post_init__(self) -> None:
        if self.nx < 2 or self.ny < 2:
            raise ConfigError("QshParams: extents must be >= 2")


def qsh_lattice(p: QshParams) -> LatticeGraph:
    """Square lattice of spin-1/2 sites; x-hops carry e^{i 2pi j y sigma_z},
    y-hops e^{i 2pi k sigma_x}, on-site staggered potential (-1)^n chi.

    With k_mix = 0 the spin sectors decouple into two scalar lattices with
    fluxes -/+ 2pi j (up/down).
    """
    def sid(m: int, n: int) -> int:
        return n * p.nx + m

    sites = [Site(index=sid(m, n), position=(float(m), float(n)),
                  onsite=((-1) ** n) * p.chi * np.eye(2))
             for n in range(p.ny) for m in range(p.nx)]
    amp, ph = _amp_phase(-p.t0)
    cy, sy = np.cos(2 * np.pi * p.k_mix), np.sin(2 * np.pi * p.k_mix)
    Uy = np.array([[cy, 1j * sy], [1j * sy, cy]], dtype=complex)  # e^{i 2 pi k sigma_x}
    links = []
    for n in range(p.ny):
        for m in range(p.nx):
            if m + 1 < p.nx:
                thy = 2 * np.pi * p.j_flux * n
                Ux = np.diag([np.exp(1j * thy), np.exp(-1j * thy)])
                links.append(Link(sid(m, n), sid(m + 1, n), amplitude=amp, phase=ph, matrix=Ux))
            if n + 1 < p.ny:
                links.append(Link(sid(m, n), sid(m, n + 1), amplitude=amp, phase=ph, matrix=Uy.copy()))
    meta = {"kind": "grid", "model": "qsh_lattice", "nx": p.nx, "ny": p.ny,
            "t0": p.t0, "j_flux": p.j_flux, "k_mix": p.k_mix, "chi": p.chi}
    return LatticeGraph(sites=sites, links=links, dim=2, meta=meta)


def hofstadter_grid(nx: int, ny: int, t0: float, flux_frac: float, sign: int = 1) -> LatticeGraph:
    """Scalar square lattice with flux sign*2pi*flux_frac per plaquette.

    The gauge matches the spin-up (sign=+1) / spin-down (sign=-1) sector of
    :func:`qsh_lattice`: x-hops at row n adopt sign*2pi*flux_frac*n, y-hops
    are real, both with amplitude -t0.
    """
    def sid(m: int, n: int) -> int:
        return n * nx + m

    sites = [Site(index=sid(m, n), position=(float(m), float(n)))
             for n in range(ny) for m in range(nx)]
    amp, ph = _amp_phase(-t0)
    links = []
    for n in range(ny):
        for m in range(nx):
            if m + 1 < nx:
                links.append(Link(sid(m, n), sid(m + 1, n), amplitude=amp,
                                  phase=ph + sign * 2 * np.pi * flux_frac * n))
            if n + 1 < ny:
                links.append(Link(sid(m, n), sid(m, n + 1), amplitude=amp, phase=ph))
    meta = {"kind": "grid", "model": "hofstadter_grid", "nx": nx, "ny": ny}
    return LatticeGraph(sites=sites, links=links, dim=1, meta=meta)


# ---------------------------------------------------------------------------
# Dressed-state (qubit + resonator) block energies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JcParams:
    omega_r: float
    delta: float  # omega_r - omega_a
    g: float

    def __post_init__(self) -> None:
        if self.g < 0:
            raise ConfigError("JcParams: g must be non-negative")


def jc_dressed_energies(n: int, p: JcParams) -> tuple[float, float, float]:
    """Energies (E_minus, E_plus) and mixing angle alpha_n of the n-excitation
    doublet: E_{n,+/-} = n omega_r + (delta +/- sqrt(delta^2 + 4 n g^2))/2,
    tan(2 alpha_n) = 2 g sqrt(n) / delta.
    """
    if n < 1:
        raise ConfigError("jc_dressed_energies: n must be >= 1")
    root = np.sqrt(p.delta ** 2 + 4 * n * p.g ** 2)
    e_minus = n * p.omega_r + (p.delta - root) / 2
    e_plus = n * p.omega_r + (p.delta + root) / 2
    alpha = 0.5 * np.arctan2(2 * p.g * np.sqrt(n), p.delta)
    return float(e_minus), float(e_plus), float(alpha)


# ---------------------------------------------------------------------------
# Momentum-space evaluators
# ---------------------------------------------------------------------------

class BlochModel:
    """Hamiltonian evaluator on the 2-torus: (kx, ky) -> Hermitian matrix."""

    def __init__(self, fn: Callable[[float, float], np.ndarray], n_bands: int):
        self._fn = fn
        self.n_bands = n_bands

    def __call__(self, kx: float, ky: float = 0.0) -> np.ndarray:
        return self._fn(kx, ky)


class TwoBandModel(BlochModel):
    """Two-band specialization H(k) = d(k) . sigma from a d-vector field."""

    def __init__(self, d_fn: Callable[[float, float], np.ndarray]):
        self.d_fn = d_fn
        super().__init__(self._h, 2)

    def _h(self, kx: float, ky: float = 0.0) -> np.ndarray:
        dx, dy, dz = self.d_fn(kx, ky)
        return np.array([[dz, dx - 1j * dy], [dx + 1j * dy, -dz]], dtype=complex)

    def d_field(self, nk1: int, nk2: int) -> np.ndarray:
        ks1 = 2 * np.pi * np.arange(nk1) / nk1
        ks2 = 2 * np.pi * np.arange(nk2) / nk2
        out = np.empty((nk1, nk2, 3))
        for i, kx in enumerate(ks1):
            for j, ky in enumerate(ks2):
                out[i, j] = self.d_fn(kx, ky)
        return out


def hofstadter_bloch(p: int, q: int, t: float = 1.0) -> BlochModel:
    """Magnetic Bloch Hamiltonian at flux 2pi p/q on the q x 1 supercell.

    Basis index j = column inside the supercell; the diagonal carries
    2 t cos(ky - 2pi p/q * j), internal x-hops are t, and the supercell wrap
    carries the Bloch factor e^{i kx}.  Matches the real-space annulus gauge.
    """
    if q < 1 or not (0 < p < q) or np.gcd(p, q) != 1:
        raise ConfigError("hofstadter_bloch: need coprime 0 < p < q")
    phi = 2 * np.pi * p / q

    def h(kx: float, ky: float = 0.0) -> np.ndarray:
        H = np.zeros((q, q), dtype=complex)
        for j in range(q):
            H[j, j] = 2 * t * np.cos(ky - phi * j)
        for j in range(q - 1):
            H[j + 1, j] += t
            H[j, j + 1] += t
        H[0, q - 1] += t * np.exp(1j * kx)
        H[q - 1, 0] += t * np.exp(-1j * kx)
        return H

    return BlochModel(h, q)
