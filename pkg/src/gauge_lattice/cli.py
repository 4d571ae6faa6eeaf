"""Config-driven scenario runner and the ``gauge-lattice`` command line.

A scenario config is a JSON document::

    {"model": {"name": ..., "params": {...}},
     "task": "spectrum" | "pump-sweep" | "evolve" | "invariant" | "sweep",
     "task_params": {...},
     "seed": 0}

Every run writes machine-readable CSV/JSON outputs into the chosen directory
and finishes with ``manifest.json`` (config echo, version, wall time, sha256
checksums) as the atomic completion marker.  Identical config + seed gives
byte-identical outputs.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, NumericalError
from .lattice import FluxSpec, apply_disorder, assemble_hamiltonian
from . import models
from .models import (AnnulusParams, LadderParams, NodalParams, QshParams,
                     SocChainParams, SshParams, abelian_pi_cage, hofstadter_annulus,
                     hofstadter_grid, necklace3, qsh_lattice, rhombic_abcage,
                     soc_bloch, soc_chain, ssh_chain, standard_cage, two_leg_ladder)
from .invariants import (NODAL, chern_from_windings, chern_number,
                         diophantine_windings, nodal_winding_map, ssh_winding,
                         torus_regions)
from .spectra import (count_spectral_flow, detect_edge_modes, diagonalize,
                      geometry_from_graph, hofstadter_gap_windows,
                      laughlin_pump_sweep, track_branches)
from .dynamics import (DriveProtocol, ab_caging_dynamics, bond_current_map,
                       chevron_scan, chiral_current_ground_state,
                       chiral_displacement_series, driven_steady_flow,
                       evolve_lossy, first_maximum_times, kirchhoff_residual,
                       pfc_full_vs_effective)
from .presets import get_preset, list_presets
from scipy.special import j1

TASKS = ("spectrum", "pump-sweep", "evolve", "invariant", "sweep")


# ---------------------------------------------------------------------------
# Deterministic writers
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(x) for x in row) + "\n")


def to_builtin(obj):
    if isinstance(obj, dict):
        return {str(k): to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_builtin(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(to_builtin(obj), f, indent=2, sort_keys=True)
        f.write("\n")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Model registry
# ---------------------------------------------------------------------------

def _annulus_params(p: dict) -> tuple[AnnulusParams, float]:
    phi = 2 * np.pi * float(p["phi_over_2pi"])
    alpha = 2 * np.pi * float(p.get("alpha_over_2pi", 0.0))
    params = AnnulusParams(int(p["nx"]), int(p["ny"]), int(p["hole_nx"]),
                           int(p["hole_ny"]), FluxSpec(phi=phi, alpha=alpha))
    return params, float(p.get("loss", 0.0))


def build_model(model_cfg: dict):
    """Instantiate the configured lattice (or return the raw params for the
    purely parametric two-body models)."""
    name = model_cfg.get("name")
    p = dict(model_cfg.get("params", {}))
    try:
        if name == "ssh_chain":
            return ssh_chain(SshParams(int(p["n_cells"]), float(p["g_a"]),
                                       float(p["g_b"]), p.get("boundary", "open")))
        if name == "necklace3":
            th = p.get("theta_sum", 0.0) / 3.0
            return necklace3(float(p["J"]), p.get("theta12", th), p.get("theta23", th),
                             p.get("theta31", th), float(p.get("kappa", 0.0)))
        if name == "hofstadter_annulus":
            params, loss = _annulus_params(p)
            graph = hofstadter_annulus(params)
            if loss:
                sites = [type(s)(index=s.index, position=s.position, onsite=s.onsite,
                                 loss_rate=loss, label=s.label) for s in graph.sites]
                graph.sites = sites
            return graph
        if name == "rhombic_abcage":
            kind = p.get("links", "standard")
            amp = float(p.get("amplitude", 1.0))
            if kind == "standard":
                return rhombic_abcage(standard_cage(int(p["n_cells"]), amp))
            if kind == "abelian-pi":
                return rhombic_abcage(abelian_pi_cage(int(p["n_cells"]), amp))
            raise ConfigError(f"rhombic_abcage: unknown link set {kind!r}")
        if name == "two_leg_ladder":
            return two_leg_ladder(LadderParams(int(p["n_rungs"]), float(p["t0"]),
                                               float(p["phi"])))
        if name == "soc_chain":
            return soc_chain(SocChainParams(int(p["n_cells"]), float(p["t_z"]),
                                            float(p["h_z"]), float(p["delta0"]),
                                            p.get("boundary", "open")))
        if name == "nodal_loop_chain":
            return models.nodal_loop_chain(NodalParams(int(p["n_cells"]), float(p["t0p"]),
                                                       float(p["M"]), float(p["d"]),
                                                       float(p.get("ky", 0.0)),
                                                       float(p.get("kz", 0.0))))
        if name == "qsh_lattice":
            return qsh_lattice(QshParams(int(p["nx"]), int(p["ny"]), float(p["t0"]),
                                         float(p["j_flux"]), float(p["k_mix"]),
                                         float(p.get("chi", 0.0))))
        if name in ("modulated-pair", "pfc-pair"):
            return p  # parametric models carry no lattice
    except KeyError as exc:
        raise ConfigError(f"model {name!r}: missing parameter {exc}") from None
    registered = ("ssh_chain, necklace3, hofstadter_annulus, rhombic_abcage, "
                  "two_leg_ladder, soc_chain, nodal_loop_chain, qsh_lattice, "
                  "modulated-pair, pfc-pair")
    raise ConfigError(f"unknown model {name!r}; registered models: {registered}")


def _auto_gap_windows(model_cfg: dict, fraction: float) -> list[tuple[float, float]]:
    """Mid-gap detection windows derived from the bulk spectrum of the model."""
    name = model_cfg["name"]
    p = model_cfg.get("params", {})
    if name in ("ssh_chain",):
        half = abs(abs(p["g_a"]) - abs(p["g_b"]))
        return [(-fraction * half, fraction * half)]
    if name == "soc_chain":
        params = SocChainParams(int(p["n_cells"]), float(p["t_z"]), float(p["h_z"]),
                                float(p["delta0"]))
        ks = np.linspace(0, 2 * np.pi, 721)
        half = min(np.linalg.norm(soc_bloch(k, params)) for k in ks)
        return [(-fraction * half, fraction * half)]
    if name == "qsh_lattice":
        from fractions import Fraction
        frac = Fraction(float(p["j_flux"])).limit_denominator(64)
        windows = hofstadter_gap_windows(frac.numerator, frac.denominator,
                                         t=float(p["t0"]))
        out = []
        for lo, hi in windows:
            if hi - lo < 1e-9:
                continue
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
            out.append((mid - fraction * half, mid + fraction * half))
        return out
    raise ConfigError(f"no automatic gap window rule for model {name!r}")


# ---------------------------------------------------------------------------
# Task: spectrum
# ---------------------------------------------------------------------------

def run_spectrum(cfg: dict, out: Path) -> list[Path]:
    graph = build_model(cfg["model"])
    geometry = geometry_from_graph(graph)
    tp = cfg.get("task_params", {})
    spectrum = diagonalize(assemble_hamiltonian(graph), geometry,
                           edge_depth=int(tp.get("edge_depth", 1)))
    files = []
    path = out / "spectrum.csv"
    rows = [(n, spectrum.eigenvalues[n], spectrum.ipr[n],
             spectrum.edge_weight[n] if spectrum.edge_weight is not None else "")
            for n in range(len(spectrum.eigenvalues))]
    write_csv(path, ["index", "energy", "ipr", "edge_weight"], rows)
    files.append(path)

    summary: dict = {"model": cfg["model"], "n_states": len(spectrum.eigenvalues)}
    det = tp.get("detect_edge_modes")
    if det:
        windows = ([tuple(det["gap_window"])] if "gap_window" in det
                   else _auto_gap_windows(cfg["model"], float(det.get("gap_fraction", 0.5))))
        modes = []
        for win in windows:
            found = detect_edge_modes(spectrum, geometry, win,
                                      edge_depth=int(det.get("edge_depth", 1)),
                                      weight_threshold=float(det.get("weight_threshold", 0.5)))
            modes.extend({"index": m.index, "energy": m.energy, "tag": m.tag,
                          "edge_weight": m.edge_weight, "gap_window": list(win)}
                         for m in found)
        summary["edge_modes"] = modes
        mode_rows = [(m["index"], m["energy"], m["tag"], m["edge_weight"]) for m in modes]
        mpath = out / "edge-modes.csv"
        write_csv(mpath, ["index", "energy", "tag", "edge_weight"], mode_rows)
        files.append(mpath)
    if tp.get("compare_decoupled"):
        p = cfg["model"]["params"]
        ref = qsh_lattice(QshParams(int(p["nx"]), int(p["ny"]), float(p["t0"]),
                                    float(p["j_flux"]), 0.0, 0.0))
        e_ref = np.linalg.eigvalsh(assemble_hamiltonian(ref))
        up = hofstadter_grid(int(p["nx"]), int(p["ny"]), float(p["t0"]),
                             float(p["j_flux"]), +1)
        dn = hofstadter_grid(int(p["nx"]), int(p["ny"]), float(p["t0"]),
                             float(p["j_flux"]), -1)
        e_split = np.sort(np.concatenate([np.linalg.eigvalsh(assemble_hamiltonian(up)),
                                          np.linalg.eigvalsh(assemble_hamiltonian(dn))]))
        summary["decoupled_spectrum_deviation"] = float(np.max(np.abs(e_ref - e_split)))
        summary["kramers_pair_splitting"] = float(np.max(np.abs(e_ref[0::2] - e_ref[1::2])))
    spath = out / "summary.json"
    write_json(spath, summary)
    files.append(spath)
    return files


# ---------------------------------------------------------------------------
# Task: invariant
# ---------------------------------------------------------------------------

def run_invariant(cfg: dict, out: Path) -> list[Path]:
    tp = cfg.get("task_params", {})
    kind = tp.get("kind")
    files: list[Path] = []
    result: dict = {"invariant": kind, "ambiguous": []}
    if kind == "ssh-winding":
        if "grid" in tp:
            g = tp["grid"]
            vals = np.linspace(float(g["min"]), float(g["max"]), int(g["n"]))
            rows = []
            for ga in vals:
                for gb in vals:
                    if abs(abs(ga) - abs(gb)) < 1e-9:
                        continue
                    rows.append((ga, gb, ssh_winding(ga, gb)))
            path = out / "ssh-winding.csv"
            write_csv(path, ["g_a", "g_b", "winding"], rows)
            files.append(path)
            result["grid"] = {"min": g["min"], "max": g["max"], "n": g["n"]}
            result["value"] = None
        else:
            result["value"] = ssh_winding(float(tp["g_a"]), float(tp["g_b"]))
        result["residual"] = 0.0
    elif kind == "chern":
        p, q = int(tp["p"]), int(tp["q"])
        nk = int(tp.get("nk", 24))
        model = models.hofstadter_bloch(p, q)
        groups = tp.get("bands") or [[b] for b in range(q)]
        values = [chern_number(model, list(grp), nk=nk) for grp in groups]
        result.update({"value": values, "bands": groups, "residual": 0.0,
                       "grid": {"nk": nk}})
    elif kind == "diophantine":
        d = diophantine_windings(int(tp["p"]), int(tp["q"]))
        result["value"] = [{"gap": g.h, "w": g.w, "s": g.s, "ambiguous": g.ambiguous}
                           for g in d.gaps]
        result["ambiguous"] = [g.h for g in d.gaps if g.ambiguous]
        if not result["ambiguous"]:
            result["chern"] = chern_from_windings(d)
        result["residual"] = 0.0
    elif kind == "nodal-map":
        mp = cfg["model"]["params"]
        n_grid = int(tp.get("n_grid", 41))
        kgrid = 2 * np.pi * np.arange(n_grid) / n_grid
        points = tp.get("points", {"point": [float(mp["M"]), float(mp["d"])]})
        summary_pts = {}
        for label, (M, d) in sorted(points.items()):
            params = NodalParams(int(mp["n_cells"]), float(mp["t0p"]), float(M), float(d))
            wmap = nodal_winding_map(params, kgrid, kgrid, n_kx=int(tp.get("n_kx", 128)))
            rows = [(kgrid[i], kgrid[j], int(wmap[i, j]))
                    for i in range(n_grid) for j in range(n_grid)]
            path = out / f"nodal-map-{label}.csv"
            write_csv(path, ["ky", "kz", "winding"], rows)
            files.append(path)
            summary_pts[label] = {
                "M": M, "d": d,
                "regions_w1": torus_regions(wmap == 1),
                "regions_w0": torus_regions(wmap == 0),
                "n_nodal_points": int((wmap == NODAL).sum()),
                "windings_present": sorted(int(v) for v in np.unique(wmap) if v != NODAL),
            }
        result["value"] = summary_pts
        result["grid"] = {"n_grid": n_grid}
        result["residual"] = 0.0
    else:
        raise ConfigError(f"unknown invariant kind {kind!r}; "
                          "use ssh-winding, chern, diophantine or nodal-map")
    path = out / "invariant.json"
    write_json(path, result)
    files.append(path)
    return files


# ---------------------------------------------------------------------------
# Task: pump-sweep
# ---------------------------------------------------------------------------

def run_pump_sweep(cfg: dict, out: Path, workers: int = 1) -> list[Path]:
    name = cfg["model"]["name"]
    if name != "hofstadter_annulus":
        raise ConfigError("pump-sweep requires the hofstadter_annulus model")
    params, _ = _annulus_params(cfg["model"]["params"])
    tp = cfg.get("task_params", {})
    n_alpha = int(tp.get("n_alpha", 101))
    alphas = np.linspace(0.0, 2 * np.pi, n_alpha)
    sweep = laughlin_pump_sweep(params, alphas, edge_depth=int(tp.get("edge_depth", 1)))
    branch = track_branches(sweep)
    rows = []
    for i, a in enumerate(sweep.alphas):
        for n in range(sweep.energies.shape[1]):
            ow, iw = sweep.outer_weight[i, n], sweep.inner_weight[i, n]
            tag = "outer" if ow > 0.5 else ("inner" if iw > 0.5 else "bulk")
            rows.append((a, sweep.energies[i, n], tag, branch[i, n]))
    cpath = out / "pump-sweep.csv"
    write_csv(cpath, ["alpha", "eigenvalue", "edge_tag", "branch_id"], rows)

    gaps = tp.get("gaps") or list(range(1, len(sweep.gap_windows) + 1))
    flows = {}
    for h in gaps:
        lo, hi = sweep.gap_windows[h - 1]
        if hi - lo < 1e-6:
            flows[f"gap{h}"] = {"closed": True}
            continue
        flows[f"gap{h}"] = {"outer": count_spectral_flow(sweep, h, "outer"),
                            "inner": count_spectral_flow(sweep, h, "inner"),
                            "window": [lo, hi]}
    spath = out / "flow-counts.json"
    write_json(spath, {"flows": flows, "n_alpha": n_alpha,
                       "phi_over_2pi": float(params.flux_fraction())})
    return [cpath, spath]


# ---------------------------------------------------------------------------
# Task: evolve (scenario dispatch)
# ---------------------------------------------------------------------------

def _evolve_necklace(cfg: dict, out: Path) -> tuple[list[Path], dict]:
    p = cfg["model"]["params"]
    tp = cfg["task_params"]
    t = np.linspace(0.0, float(tp.get("t_final", 12.0)), int(tp.get("n_times", 2401)))
    files, summary = [], {"cases": []}
    for k, ts in enumerate(tp["theta_sums"]):
        g = necklace3(float(p["J"]), ts / 3, ts / 3, ts / 3, float(p.get("kappa", 0.0)))
        H = assemble_hamiltonian(g)
        psi0 = np.zeros(3, dtype=complex)
        psi0[0] = 1.0
        traj = evolve_lossy(H, g.loss_vector(), psi0, t)
        pops = traj.populations()
        path = out / f"necklace-theta{k + 1}.csv"
        write_csv(path, ["t", "P1", "P2", "P3", "norm"],
                  zip(t, pops[:, 0], pops[:, 1], pops[:, 2], traj.norms ** 2))
        files.append(path)
        tmax = first_maximum_times(traj)
        order = [int(i) + 1 for i in np.argsort(tmax, kind="stable")]
        summary["cases"].append({
            "theta_sum": ts,
            "first_max_times": list(tmax),
            "ordering": order,
            "max_P2_P3_asymmetry": float(np.max(np.abs(pops[:, 1] - pops[:, 2]))),
            "circulation": "1->2->3" if order == [1, 2, 3]
                           else ("1->3->2" if order == [1, 3, 2] else "symmetric"),
        })
    return files, summary


def _evolve_cage(cfg: dict, out: Path) -> tuple[list[Path], dict]:
    p = cfg["model"]["params"]
    tp = cfg["task_params"]
    t = np.linspace(0.0, float(tp.get("t_final", 50.0)), int(tp.get("n_times", 501)))
    n_cells = int(p["n_cells"])
    files, summary = [], {"starts": []}
    graph = build_model(cfg["model"])
    for start in tp.get("starts", [[n_cells // 2 - 1, "A", 0]]):
        cell, label, comp = int(start[0]), str(start[1]), int(start[2])
        res = ab_caging_dynamics(graph, (cell, label, comp), t)
        pops = res.trajectory.populations()
        path = out / f"cage-start-{cell}{label}{comp}.csv"
        write_csv(path, ["t"] + [f"P{s}" for s in range(graph.n_sites)],
                  (np.column_stack([t, pops])))
        files.append(path)
        a_sites = graph.meta["a_sites"]
        summary["starts"].append({
            "start": [cell, label, comp],
            "a_reach": res.a_reach,
            "a_site_max_population": [float(res.max_population[s]) for s in a_sites],
        })
    if tp.get("include_abelian"):
        ab = rhombic_abcage(abelian_pi_cage(n_cells, float(p.get("amplitude", 1.0))))
        res = ab_caging_dynamics(ab, (n_cells // 2 - 1, "A", 0), t)
        summary["abelian"] = {"a_reach": res.a_reach,
                              "a_site_max_population":
                                  [float(res.max_population[s]) for s in ab.meta["a_sites"]]}
    return files, summary


def _evolve_chevron(cfg: dict, out: Path) -> tuple[list[Path], dict]:
    p = cfg["model"]["params"]
    tp = cfg["task_params"]
    g, delta = float(p["g"]), float(p["delta"])
    omega0 = float(p.get("omega0", 3 * delta))
    eta = float(tp["eta"])
    gp = abs(g * j1(eta))
    halfwidth = float(tp.get("nu_halfwidth_g", 3.0)) * max(gp, 0.1 * g)
    nus = np.linspace(delta - halfwidth, delta + halfwidth, int(tp.get("n_nu", 9)))
    scan = chevron_scan(g, delta, eta * delta, nus, omega0=omega0,
                        n_periods=float(tp.get("n_periods", 4.0)))
    rows = [(nu, t, scan.transfer_map[i, k])
            for i, nu in enumerate(scan.nus) for k, t in enumerate(scan.times)]
    path = out / "chevron-map.csv"
    write_csv(path, ["nu", "t", "P_transfer"], rows)
    summary = {"eta": eta, "g": g, "delta": delta,
               "g_predicted": gp, "g_extracted": scan.g_extracted,
               "resonance_nu": scan.resonance_nu,
               "relative_error": abs(scan.g_extracted - gp) / gp if gp else None}
    return [path], summary


def _evolve_rwa(cfg: dict, out: Path) -> tuple[list[Path], dict]:
    p = cfg["model"]["params"]
    tp = cfg["task_params"]
    files, maxima = [], []
    for k, j_eff in enumerate(tp["j_eff_values"]):
        cmp_ = pfc_full_vs_effective(float(p["omega1"]), float(p["omega2"]), float(j_eff),
                                     theta=float(p.get("theta", 0.0)),
                                     n_max=int(tp.get("n_max", 2)),
                                     n_times=int(tp.get("n_times", 161)))
        path = out / f"rwa-infidelity-{k + 1}.csv"
        write_csv(path, ["t", "infidelity", "P_transfer_full", "P_transfer_effective"],
                  zip(cmp_.times, cmp_.infidelity, cmp_.transfer_full, cmp_.transfer_effective))
        files.append(path)
        maxima.append(cmp_.max_infidelity)
    base = pfc_full_vs_effective(float(p["omega1"]), float(p["omega2"]),
                                 float(tp["j_eff_values"][0]),
                                 theta=float(p.get("theta", 0.0)), n_max=4,
                                 n_times=int(tp.get("n_times", 161)))
    summary = {"j_eff_values": list(tp["j_eff_values"]),
               "max_infidelity": maxima,
               "monotone_decreasing": bool(all(b < a for a, b in zip(maxima, maxima[1:]))),
               "truncation_nmax4_max_infidelity": base.max_infidelity}
    return files, summary


def _evolve_driven_flow(cfg: dict, out: Path, seed: int) -> tuple[list[Path], dict]:
    tp = cfg["task_params"]
    params, loss = _annulus_params(cfg["model"]["params"])
    if loss <= 0:
        raise ConfigError("driven-flow: the model needs a positive 'loss'")
    graph = build_model(cfg["model"])
    frac = params.flux_fraction()
    windows = hofstadter_gap_windows(frac.numerator, frac.denominator)
    disorder = tp.get("disorder")
    if disorder:
        nx, ny = params.nx, params.ny
        block = [(nx // 2, ny - 1), (nx // 2 + 1, ny - 1),
                 (nx // 2, ny - 2), (nx // 2 + 1, ny - 2)]
        coords = graph.meta["coords"]
        index = {c: i for i, c in enumerate(coords)}
        defect_sites = [index[c] for c in block]
        graph = apply_disorder(graph, float(disorder["sigma_onsite"]),
                               float(disorder["sigma_hop"]),
                               defect=(defect_sites, float(disorder["defect_strength"])),
                               seed=seed)
    coords = graph.meta["coords"]
    index = {c: i for i, c in enumerate(coords)}
    pump = index[(0, params.ny // 2)]  # mid-left outer edge
    geometry = geometry_from_graph(graph)
    t = np.linspace(0.0, float(tp.get("t_final", 120.0)), int(tp.get("n_times", 121)))
    files, cases = [], []
    for k, freq in enumerate(tp["frequencies"]):
        drive = DriveProtocol(pump_site=pump, amplitude=float(tp.get("amplitude", 0.1)),
                              frequency=float(freq))
        flow = driven_steady_flow(graph, drive, t, geometry, gap_windows=windows)
        path = out / f"flow-{k + 1}.csv"
        write_csv(path, ["t"] + [f"I{s}" for s in range(graph.n_sites)],
                  np.column_stack([t, flow.intensity]))
        files.append(path)
        cases.append({"frequency": freq,
                      "gap_label": tp.get("gap_labels", [None] * len(tp["frequencies"]))[k],
                      "circulation": flow.circulation,
                      "angular_velocity": flow.angular_velocity})
    return files, {"cases": cases, "pump_site": pump,
                   "disordered": bool(disorder)}


def _evolve_displacement(cfg: dict, out: Path) -> tuple[list[Path], dict]:
    tp = cfg["task_params"]
    files, cases = [], []
    for k, (ga, gb) in enumerate(tp["cases"]):
        graph = ssh_chain(SshParams(2, float(ga), float(gb), "open"))
        psi0 = np.zeros(4, dtype=complex)
        psi0[int(tp.get("excited_site", 1))] = 1.0
        res = chiral_displacement_series(graph, psi0)
        path = out / f"displacement-{k + 1}.csv"
        write_csv(path, ["t", "P_d"], zip(res.times, res.series))
        files.append(path)
        cases.append({"g_a": ga, "g_b": gb,
                      "winding_estimate": res.winding_estimate,
                      "window": list(res.window),
                      "oscillation_band": list(res.oscillation_band)})
    return files, {"cases": cases}


def _evolve_ladder(cfg: dict, out: Path, workers: int) -> tuple[list[Path], dict]:
    p = cfg["model"]["params"]
    tp = cfg["task_params"]
    n, t0 = int(p["n_rungs"]), float(p["t0"])
    phis = [float(x) for x in tp["phi_values"]]

    def one(phi: float) -> tuple[float, float, bool]:
        res = chiral_current_ground_state(LadderParams(n, t0, phi))
        return phi, res.value, res.degenerate

    with ThreadPoolExecutor(max_workers=max(1, workers)) as ex:
        rows = list(ex.map(one, phis))
    cpath = out / "ladder-current.csv"
    write_csv(cpath, ["phi", "j_c", "degenerate"], rows)
    files = [cpath]
    maps = []
    for k, phi in enumerate(tp.get("bond_map_phis", [])):
        graph = two_leg_ladder(LadderParams(n, t0, float(phi)))
        H = assemble_hamiltonian(graph)
        _, evecs = np.linalg.eigh(H)
        gs = evecs[:, 0]
        bonds = bond_current_map(graph, gs)
        path = out / f"ladder-bonds-{k + 1}.csv"
        write_csv(path, ["src", "dst", "current"],
                  [(b.src, b.dst, b.current) for b in bonds])
        files.append(path)
        maps.append({"phi": float(phi),
                     "kirchhoff_residual": kirchhoff_residual(graph, gs)})
    values = [r[1] for r in rows]
    imax = int(np.argmax(values))
    summary = {"phi_values": phis, "j_c": values,
               "max_at_phi": phis[imax], "bond_maps": maps}
    return files, summary


def run_evolve(cfg: dict, out: Path, workers: int = 1, seed: int = 0) -> list[Path]:
    tp = cfg.get("task_params", {})
    scenario = tp.get("scenario")
    runners = {
        "necklace-chiral": lambda: _evolve_necklace(cfg, out),
        "cage": lambda: _evolve_cage(cfg, out),
        "chevron": lambda: _evolve_chevron(cfg, out),
        "rwa": lambda: _evolve_rwa(cfg, out),
        "driven-flow": lambda: _evolve_driven_flow(cfg, out, seed),
        "chiral-displacement": lambda: _evolve_displacement(cfg, out),
        "ladder-current": lambda: _evolve_ladder(cfg, out, workers),
    }
    if scenario not in runners:
        raise ConfigError(f"unknown evolve scenario {scenario!r}; "
                          f"available: {', '.join(sorted(runners))}")
    files, summary = runners[scenario]()
    spath = out / "summary.json"
    write_json(spath, {"scenario": scenario, **summary})
    return files + [spath]


# ---------------------------------------------------------------------------
# Task: sweep (generic parameter scan)
# ---------------------------------------------------------------------------

def _sweep_observable(model_cfg: dict, observable: str, parameter: str, value: float) -> float:
    p = dict(model_cfg.get("params", {}))
    p[parameter] = value
    name = model_cfg["name"]
    if observable == "chiral_current":
        if name != "two_leg_ladder":
            raise ConfigError("chiral_current requires the two_leg_ladder model")
        return chiral_current_ground_state(
            LadderParams(int(p["n_rungs"]), float(p["t0"]), float(p["phi"]))).value
    if observable == "min_abs_energy":
        graph = build_model({"name": name, "params": p})
        evals = np.linalg.eigvalsh(assemble_hamiltonian(graph))
        return float(np.min(np.abs(evals)))
    if observable == "ground_energy":
        graph = build_model({"name": name, "params": p})
        return float(np.linalg.eigvalsh(assemble_hamiltonian(graph))[0])
    raise ConfigError(f"unknown observable {observable!r}; "
                      "use chiral_current, min_abs_energy or ground_energy")


def run_sweep(cfg: dict, out: Path, workers: int = 1) -> list[Path]:
    tp = cfg.get("task_params", {})
    parameter = tp.get("parameter")
    values = tp.get("values")
    observable = tp.get("observable")
    if not parameter or values is None or not observable:
        raise ConfigError("sweep needs task_params: parameter, values, observable")

    def one(v: float) -> float:
        return _sweep_observable(cfg["model"], observable, parameter, float(v))

    with ThreadPoolExecutor(max_workers=max(1, workers)) as ex:
        results = list(ex.map(one, values))
    cpath = out / "sweep.csv"
    write_csv(cpath, [parameter, observable], zip(values, results))
    idx_min = int(np.argmin(results))
    idx_max = int(np.argmax(results))
    spath = out / "summary.json"
    write_json(spath, {"parameter": parameter, "observable": observable,
                       "n_points": len(values),
                       "argmin": float(values[idx_min]), "min": results[idx_min],
                       "argmax": float(values[idx_max]), "max": results[idx_max]})
    return [cpath, spath]


# ---------------------------------------------------------------------------
# Scenario runner and manifest
# ---------------------------------------------------------------------------

def validate_config(cfg: dict) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if "model" not in cfg or "name" not in cfg.get("model", {}):
        raise ConfigError("config needs model.name")
    task = cfg.get("task")
    if task not in TASKS:
        raise ConfigError(f"config task must be one of {', '.join(TASKS)}")
    for key, val in cfg.get("model", {}).get("params", {}).items():
        if isinstance(val, (int, float)) and not np.isfinite(val):
            raise ConfigError(f"model parameter {key} is not finite")


def run_scenario(cfg: dict, out_dir: str | Path, workers: int = 1) -> dict:
    """Execute one scenario; write outputs plus a trailing manifest.json."""
    validate_config(cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = int(cfg.get("seed", 0))
    start = time.perf_counter()
    task = cfg["task"]
    if task == "spectrum":
        files = run_spectrum(cfg, out)
    elif task == "invariant":
        files = run_invariant(cfg, out)
    elif task == "pump-sweep":
        files = run_pump_sweep(cfg, out, workers)
    elif task == "evolve":
        files = run_evolve(cfg, out, workers, seed)
    else:
        files = run_sweep(cfg, out, workers)
    wall = time.perf_counter() - start
    manifest = {
        "config": cfg,
        "version": __version__,
        "wall_time_s": wall,
        "outputs": {f.name: _sha256(f) for f in sorted(files)},
    }
    write_json(out / "manifest.json", manifest)
    return manifest


# ---------------------------------------------------------------------------
# Command line
# ---------------------------------------------------------------------------

def _load_config(args) -> dict:
    if getattr(args, "preset", None):
        cfg = get_preset(args.preset)
    elif getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
    else:
        raise ConfigError("provide --config FILE or --preset NAME")
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    return cfg


def _add_run_flags(sub) -> None:
    sub.add_argument("--config", help="scenario config JSON file")
    sub.add_argument("--preset", help="named preset scenario")
    sub.add_argument("--out", default=None, help="output directory")
    sub.add_argument("--workers", type=int, default=4, help="sweep worker threads")
    sub.add_argument("--seed", type=int, default=None, help="override the config seed")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="gauge-lattice",
        description="Synthetic gauge-field lattice simulator: spectra, invariants, "
                    "flux pumping, and driven dynamics.")
    subs = parser.add_subparsers(dest="command", required=True)
    for task in TASKS + ("run",):
        sub = subs.add_parser(task, help=f"run a {task} scenario" if task != "run"
                              else "run any scenario or preset")
        _add_run_flags(sub)
    subs.add_parser("list-presets", help="print the preset catalog")

    args = parser.parse_args(argv)
    try:
        if args.command == "list-presets":
            for row in list_presets():
                print(f"{row['name']:26s} task={row['task']:10s} model={row['model']:20s} "
                      f"budget={row['budget_seconds']}s")
            return 0
        cfg = _load_config(args)
        if args.command != "run" and cfg.get("task") != args.command:
            raise ConfigError(f"config task {cfg.get('task')!r} does not match "
                              f"subcommand {args.command!r}")
        out = args.out or f"out/{cfg.get('name', cfg['task'])}"
        manifest = run_scenario(cfg, out, workers=args.workers)
        print(f"wrote {len(manifest['outputs'])} outputs to {out} "
              f"({manifest['wall_time_s']:.2f} s)")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
