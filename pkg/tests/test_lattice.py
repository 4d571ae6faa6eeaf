"""Graph construction, Hamiltonian assembly, fluxes, disorder, serialization."""

import numpy as np
import pytest

from gauge_lattice import (
    FluxSpec,
    LandauGauge,
    LatticeError,
    LatticeGraph,
    Link,
    Site,
    apply_disorder,
    assemble_hamiltonian,
    gauge_transform,
    graph_from_json,
    graph_to_json,
    hofstadter_annulus,
    insert_vacancy_flux,
    link_product,
    necklace3,
    peierls_phase,
    plaquette_flux,
    sparse_triplets,
    ssh_chain,
    standard_cage,
    rhombic_abcage,
    two_leg_ladder,
)
from gauge_lattice.models import AnnulusParams, LadderParams, SshParams


def random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_u2_graph(seed, n_sites=6, n_links=9):
    rng = np.random.default_rng(seed)
    links = []
    pairs = set()
    while len(links) < n_links:
        a, b = rng.integers(0, n_sites, size=2)
        if a == b or (a, b) in pairs or (b, a) in pairs:
            continue
        pairs.add((int(a), int(b)))
        links.append(Link(int(a), int(b), amplitude=float(rng.uniform(0.2, 2.0)),
                          phase=float(rng.uniform(0, 2 * np.pi)),
                          matrix=random_unitary(rng, 2)))
    onsites = []
    for i in range(n_sites):
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        onsites.append(m + m.conj().T)
    sites = [Site(index=i, position=(float(i), 0.0), onsite=onsites[i])
             for i in range(n_sites)]
    return LatticeGraph(sites=sites, links=links, dim=2)


class TestAssemble:
    def test_single_real_bond(self):
        g = LatticeGraph(sites=[Site(0, (0, 0)), Site(1, (1, 0))],
                         links=[Link(0, 1, amplitude=1.0)])
        H = assemble_hamiltonian(g)
        assert np.allclose(H, [[0, 1], [1, 0]])

    def test_necklace_hermitian_with_flux(self):
        g = necklace3(1.0, np.pi / 6, np.pi / 6, np.pi / 6)
        H = assemble_hamiltonian(g)
        assert np.max(np.abs(H - H.conj().T)) < 1e-12
        assert plaquette_flux(g, [0, 1, 2]) == pytest.approx(np.pi / 2)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_u2_graph_hermitian(self, seed):
        H = assemble_hamiltonian(random_u2_graph(seed))
        assert np.max(np.abs(H - H.conj().T)) < 1e-12

    def test_block_convention(self):
        # link (src, dst) carries J e^{i theta} U at H[src, dst]
        U = np.array([[0, 1], [1, 0]], dtype=complex)
        g = LatticeGraph(sites=[Site(0, (0, 0)), Site(1, (1, 0))],
                         links=[Link(0, 1, amplitude=2.0, phase=0.3, matrix=U)],
                         dim=2)
        H = assemble_hamiltonian(g)
        assert np.allclose(H[0:2, 2:4], 2.0 * np.exp(0.3j) * U)
        assert np.allclose(H[2:4, 0:2], 2.0 * np.exp(-0.3j) * U.conj().T)

    def test_nonunitary_link_rejected_with_link_name(self):
        bad = np.array([[1.0, 0.1], [0.0, 1.0]], dtype=complex)
        g = LatticeGraph(sites=[Site(0, (0, 0)), Site(1, (1, 0))],
                         links=[Link(0, 1, matrix=bad)], dim=2)
        with pytest.raises(LatticeError, match="0->1"):
            assemble_hamiltonian(g)

    def test_structural_validation(self):
        with pytest.raises(LatticeError, match="self-link"):
            LatticeGraph(sites=[Site(0, (0, 0))], links=[Link(0, 0)]).validate()
        g = LatticeGraph(sites=[Site(0, (0, 0)), Site(1, (1, 0))],
                         links=[Link(0, 1), Link(1, 0)])
        with pytest.raises(LatticeError, match="both directions"):
            g.validate()
        g2 = LatticeGraph(sites=[Site(0, (0, 0), onsite=np.array([[0, 1j], [1j, 0]]))],
                          links=[], dim=2)
        with pytest.raises(LatticeError, match="Hermitian"):
            g2.validate()

    def test_sparse_matches_dense(self):
        g = random_u2_graph(3)
        assert np.allclose(sparse_triplets(g).toarray(), assemble_hamiltonian(g))


class TestPeierls:
    def test_x_hop_free(self):
        assert peierls_phase([(3, 2), (4, 2)], LandauGauge(0.7)) == 0.0

    def test_y_hop_at_column(self):
        # A_y = phi * x with phi = pi/2 at x = 3
        assert peierls_phase([(3, 0), (3, 1)], LandauGauge(np.pi / 2)) == pytest.approx(3 * np.pi / 2)

    def test_closed_plaquette_accumulates_phi(self):
        phi = 0.37
        path = [(0, 0), (1, 0), (1, 1), (0, 1), (0, 0)]
        # independent oracle: sum of the four signed segment integrals
        expected = 0.0 + phi * 1 * 1 + 0.0 + phi * 0 * (-1)
        assert peierls_phase(path, LandauGauge(phi)) == pytest.approx(expected)
        assert expected == pytest.approx(phi)

    def test_diagonal_segment_rejected(self):
        with pytest.raises(LatticeError, match="axis-aligned"):
            peierls_phase([(0, 0), (1, 1)], LandauGauge(1.0))


class TestPlaquette:
    def test_zero_phases(self):
        g = necklace3(1.0, 0.0, 0.0, 0.0)
        assert plaquette_flux(g, [0, 1, 2]) == 0.0

    def test_missing_link(self):
        g = ssh_chain(SshParams(3, 1.0, 1.0))
        with pytest.raises(LatticeError, match="no link"):
            plaquette_flux(g, [0, 1, 4])

    def test_cage_path_products(self):
        cfg = standard_cage(4)
        g = rhombic_abcage(cfg)
        a, b, c = g.meta["a_sites"], g.meta["b_sites"], g.meta["c_sites"]
        up = link_product(g, [a[1], b[1], a[2]])
        dn = link_product(g, [a[1], c[1], a[2]])
        assert np.allclose(up, cfg.u2 @ cfg.u1)
        assert np.allclose(dn, cfg.u4 @ cfg.u3)

    def test_ladder_plaquette(self):
        phi = 0.83
        g = two_leg_ladder(LadderParams(4, 1.0, phi))
        for j in range(3):
            cyc = [2 * j, 2 * (j + 1), 2 * (j + 1) + 1, 2 * j + 1]
            assert plaquette_flux(g, cyc) == pytest.approx(phi)


def annulus_plaquettes(params):
    """All elementary 4-cycles of the annulus, counterclockwise."""
    x0, x1, y0, y1 = params.hole_bounds
    g = hofstadter_annulus(params)
    index = {c: i for i, c in enumerate(g.meta["coords"])}
    cycles = []
    for x in range(params.nx - 1):
        for y in range(params.ny - 1):
            quad = [(x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)]
            if all(c in index for c in quad):
                if x0 <= x < x1 and y0 <= y < y1:
                    continue  # inside the hole
                cycles.append([index[c] for c in quad])
    return g, cycles


class TestVacancyFlux:
    def test_alpha_zero_identity(self):
        p = AnnulusParams(8, 8, 2, 2, FluxSpec(phi=np.pi / 3))
        g = hofstadter_annulus(p)
        assert insert_vacancy_flux(g, FluxSpec(np.pi / 3, 0.0, [])) is g

    def test_alpha_2pi_same_hamiltonian(self):
        base = AnnulusParams(8, 8, 2, 2, FluxSpec(phi=np.pi / 2))
        g0 = hofstadter_annulus(base)
        g1 = hofstadter_annulus(AnnulusParams(8, 8, 2, 2,
                                              FluxSpec(phi=np.pi / 2, alpha=2 * np.pi)))
        assert np.allclose(assemble_hamiltonian(g0), assemble_hamiltonian(g1), atol=1e-12)

    def test_alpha_shifts_only_the_hole_loop(self):
        phi, alpha = np.pi / 2, np.pi / 2
        p0 = AnnulusParams(8, 8, 2, 2, FluxSpec(phi=phi))
        g0, cycles = annulus_plaquettes(p0)
        g1 = hofstadter_annulus(AnnulusParams(8, 8, 2, 2, FluxSpec(phi=phi, alpha=alpha)))
        for cyc in cycles:
            f0 = plaquette_flux(g0, cyc)
            f1 = plaquette_flux(g1, cyc)
            assert abs((f1 - f0) % (2 * np.pi)) < 1e-12
        # ring around the hole: its flux gains exactly alpha (measured with the
        # orientation in which the threaded vacancy flux counts positively,
        # i.e. opposite to the plaquette orientation above)
        index = {c: i for i, c in enumerate(g0.meta["coords"])}
        x0, x1, y0, y1 = p0.hole_bounds
        ring = []
        for x in range(x0 - 1, x1 + 2):
            ring.append((x, y0 - 1))
        for y in range(y0, y1 + 2):
            ring.append((x1 + 1, y))
        for x in range(x1, x0 - 2, -1):
            ring.append((x, y1 + 1))
        for y in range(y1, y0 - 2, -1):
            ring.append((x0 - 1, y))
        ring = [index[c] for c in dict.fromkeys(ring)][::-1]
        f0 = plaquette_flux(g0, ring)
        f1 = plaquette_flux(g1, ring)
        d = ((f1 - f0) - alpha) % (2 * np.pi)
        assert min(d, 2 * np.pi - d) < 1e-12

    def test_flux_bookkeeping(self):
        # sum of elementary plaquettes + hole loop = outer boundary loop (mod 2pi)
        phi, alpha = 2 * np.pi / 4, 1.1
        p = AnnulusParams(8, 8, 2, 2, FluxSpec(phi=phi, alpha=alpha))
        g, cycles = annulus_plaquettes(p)
        g = hofstadter_annulus(p)
        index = {c: i for i, c in enumerate(g.meta["coords"])}
        total = sum(plaquette_flux(g, cyc) for cyc in cycles)
        x0, x1, y0, y1 = p.hole_bounds
        hole_ring = []
        for x in range(x0 - 1, x1 + 2):
            hole_ring.append((x, y0 - 1))
        for y in range(y0, y1 + 2):
            hole_ring.append((x1 + 1, y))
        for x in range(x1, x0 - 2, -1):
            hole_ring.append((x, y1 + 1))
        for y in range(y1, y0 - 2, -1):
            hole_ring.append((x0 - 1, y))
        hole_ring = [index[c] for c in dict.fromkeys(hole_ring)]
        total += plaquette_flux(g, hole_ring)
        outer = []
        for x in range(p.nx):
            outer.append((x, 0))
        for y in range(1, p.ny):
            outer.append((p.nx - 1, y))
        for x in range(p.nx - 2, -1, -1):
            outer.append((x, p.ny - 1))
        for y in range(p.ny - 2, 0, -1):
            outer.append((0, y))
        outer = [index[c] for c in dict.fromkeys(outer)]
        boundary = plaquette_flux(g, outer)
        d = (total - boundary) % (2 * np.pi)
        assert min(d, 2 * np.pi - d) < 1e-9

    def test_cut_through_missing_site_rejected(self):
        p = AnnulusParams(8, 8, 2, 2, FluxSpec(phi=0.0))
        g = hofstadter_annulus(p)
        with pytest.raises(LatticeError, match="does not exist"):
            insert_vacancy_flux(g, FluxSpec(0.0, 1.0, [(0, 999)]))


class TestDisorder:
    def test_zero_sigma_identity(self):
        g = ssh_chain(SshParams(4, 1.0, 2.0))
        g2 = apply_disorder(g, 0.0, 0.0, seed=5)
        assert np.allclose(assemble_hamiltonian(g), assemble_hamiltonian(g2))

    def test_reproducible_and_statistics(self):
        g = hofstadter_annulus(AnnulusParams(8, 8, 2, 2, FluxSpec()))
        a = apply_disorder(g, 0.05, 0.05, seed=11)
        b = apply_disorder(g, 0.05, 0.05, seed=11)
        assert np.allclose(assemble_hamiltonian(a), assemble_hamiltonian(b))
        draws = []
        for seed in range(100):
            gd = apply_disorder(g, 0.05, 0.0, seed=seed)
            draws.extend(np.real(s.onsite_block(1)[0, 0]) for s in gd.sites)
        std = np.std(draws)
        assert abs(std - 0.05) < 0.2 * 0.05

    def test_defect_shift_exact(self):
        g = hofstadter_annulus(AnnulusParams(8, 8, 2, 2, FluxSpec()))
        sites = [0, 1, 8, 9]
        gd = apply_disorder(g, 0.0, 0.0, defect=(sites, 30.0), seed=0)
        H0 = assemble_hamiltonian(g)
        H1 = assemble_hamiltonian(gd)
        diff = np.diag(H1 - H0)
        for s in sites:
            assert diff[s] == pytest.approx(30.0)
        assert np.count_nonzero(np.abs(diff) > 1e-12) == len(sites)

    def test_link_matrices_untouched(self):
        g = random_u2_graph(7)
        g.meta["parallel_links"] = False
        gd = apply_disorder(g, 0.1, 0.1, seed=2)
        for ln0, ln1 in zip(g.links, gd.links):
            assert np.allclose(ln0.unitary(2), ln1.unitary(2))
            assert ln1.amplitude >= 0

    def test_negative_sigma_rejected(self):
        g = ssh_chain(SshParams(2, 1.0, 1.0))
        with pytest.raises(LatticeError):
            apply_disorder(g, -0.1, 0.0)


class TestGaugeInvariance:
    @pytest.mark.parametrize("seed", range(3))
    def test_spectrum_and_flux_invariant(self, seed):
        rng = np.random.default_rng(seed)
        p = AnnulusParams(8, 8, 2, 2, FluxSpec(phi=2 * np.pi / 4, alpha=0.7))
        g = hofstadter_annulus(p)
        chi = rng.uniform(0, 2 * np.pi, size=g.n_sites)
        g2 = gauge_transform(g, chi)
        e1 = np.linalg.eigvalsh(assemble_hamiltonian(g))
        e2 = np.linalg.eigvalsh(assemble_hamiltonian(g2))
        assert np.max(np.abs(e1 - e2)) < 1e-10
        _, cycles = annulus_plaquettes(AnnulusParams(8, 8, 2, 2, FluxSpec(phi=2 * np.pi / 4)))
        for cyc in cycles[:20]:
            d = (plaquette_flux(g, cyc) - plaquette_flux(g2, cyc)) % (2 * np.pi)
            assert min(d, 2 * np.pi - d) < 1e-10


class TestJsonSchema:
    def test_round_trip(self):
        g = random_u2_graph(1)
        doc = graph_to_json(g)
        assert set(doc) == {"dim", "sites", "links"}
        assert set(doc["sites"][0]) == {"index", "label", "position", "onsite", "loss"}
        assert set(doc["links"][0]) == {"from", "to", "amplitude", "phase", "matrix"}
        # complex numbers serialized as [re, im] pairs
        assert isinstance(doc["links"][0]["matrix"][0], list)
        g2 = graph_from_json(doc)
        assert np.allclose(assemble_hamiltonian(g), assemble_hamiltonian(g2))

    def test_loss_and_labels_survive(self):
        g = necklace3(1.0, 0.1, 0.2, 0.3, kappa=0.5)
        g2 = graph_from_json(graph_to_json(g))
        assert np.allclose(g2.loss_vector(), 0.5)
        assert [s.label for s in g2.sites] == ["TLR1", "TLR2", "TLR3"]
