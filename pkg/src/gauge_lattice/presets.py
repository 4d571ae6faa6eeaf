"""Scenario presets: one ready-to-run configuration per studied effect.

Each preset is a plain scenario config (model + task + parameters) with a
declared desk-scale runtime budget; ``gauge-lattice run --preset NAME`` (or
the matching task subcommand) executes it.
"""

from __future__ import annotations

import math

from .errors import ConfigError

_PI = math.pi


PRESETS: dict[str, dict] = {
    "fig4-chiral-necklace": {
        "model": {"name": "necklace3",
                  "params": {"J": 1.0, "kappa": 0.0125}},
        "task": "evolve",
        "task_params": {"scenario": "necklace-chiral",
                        "theta_sums": [_PI / 2, _PI, 3 * _PI / 2],
                        "t_final": 12.0, "n_times": 2401},
        "seed": 0,
        "budget_seconds": 30,
    },
    "fig5-chevron": {
        "model": {"name": "modulated-pair",
                  "params": {"g": 1.0, "delta": 40.0, "omega0": 120.0}},
        "task": "evolve",
        "task_params": {"scenario": "chevron", "eta": 0.8, "n_nu": 9,
                        "nu_halfwidth_g": 3.0, "n_periods": 4.0},
        "seed": 0,
        "budget_seconds": 120,
    },
    "cage-dynamics": {
        "model": {"name": "rhombic_abcage",
                  "params": {"n_cells": 9, "links": "standard", "amplitude": 1.0}},
        "task": "evolve",
        "task_params": {"scenario": "cage", "t_final": 50.0, "n_times": 501,
                        "starts": [[3, "A", 0], [3, "A", 1]], "include_abelian": True},
        "seed": 0,
        "budget_seconds": 60,
    },
    "fig8-laughlin-pump": {
        "model": {"name": "hofstadter_annulus",
                  "params": {"nx": 12, "ny": 12, "hole_nx": 4, "hole_ny": 4,
                             "phi_over_2pi": 0.25}},
        "task": "pump-sweep",
        "task_params": {"n_alpha": 101, "gaps": [1, 3], "edge_depth": 1},
        "seed": 0,
        "budget_seconds": 240,
    },
    "fig9-chiral-flow": {
        "model": {"name": "hofstadter_annulus",
                  "params": {"nx": 12, "ny": 12, "hole_nx": 4, "hole_ny": 4,
                             "phi_over_2pi": 0.25, "loss": 0.02}},
        "task": "evolve",
        "task_params": {"scenario": "driven-flow", "amplitude": 0.1,
                        "frequencies": [-1.76, 1.47], "gap_labels": [1, 3],
                        "t_final": 120.0, "n_times": 121},
        "seed": 0,
        "budget_seconds": 60,
    },
    "fig9-disorder-defect": {
        "model": {"name": "hofstadter_annulus",
                  "params": {"nx": 12, "ny": 12, "hole_nx": 4, "hole_ny": 4,
                             "phi_over_2pi": 0.25, "loss": 0.02}},
        "task": "evolve",
        "task_params": {"scenario": "driven-flow", "amplitude": 0.1,
                        "frequencies": [-1.75], "gap_labels": [1],
                        "t_final": 120.0, "n_times": 121,
                        "disorder": {"sigma_onsite": 0.05, "sigma_hop": 0.05,
                                     "defect_strength": 30.0}},
        "seed": 7,
        "budget_seconds": 60,
    },
    "fig10-ladder-currents": {
        "model": {"name": "two_leg_ladder",
                  "params": {"n_rungs": 50, "t0": 1.0, "phi": 0.1 * _PI}},
        "task": "evolve",
        "task_params": {"scenario": "ladder-current",
                        "phi_values": [round(0.05 * _PI * k, 12) for k in range(1, 20)],
                        "bond_map_phis": [0.1 * _PI, 0.9 * _PI]},
        "seed": 0,
        "budget_seconds": 60,
    },
    "fig11-soc-chain": {
        "model": {"name": "soc_chain",
                  "params": {"n_cells": 16, "t_z": 1.0, "h_z": 0.3, "delta0": 0.99}},
        "task": "spectrum",
        "task_params": {"detect_edge_modes": {"gap_fraction": 0.5, "edge_depth": 3,
                                              "weight_threshold": 0.5}},
        "seed": 0,
        "budget_seconds": 30,
    },
    "fig12-nodal-winding": {
        "model": {"name": "nodal_loop_chain",
                  "params": {"n_cells": 8, "t0p": 1.0, "M": 0.0, "d": 1.0}},
        "task": "invariant",
        "task_params": {"kind": "nodal-map", "n_grid": 41, "n_kx": 128,
                        "points": {"A": [-2.5, 0.5], "B": [0.0, 1.0], "C": [2.5, 0.5]}},
        "seed": 0,
        "budget_seconds": 120,
    },
    "fig14-chiral-displacement": {
        "model": {"name": "ssh_chain",
                  "params": {"n_cells": 2, "g_a": 5.0, "g_b": 1.0, "boundary": "open"}},
        "task": "evolve",
        "task_params": {"scenario": "chiral-displacement",
                        "cases": [[5.0, 1.0], [1.0, 5.0]], "excited_site": 1},
        "seed": 0,
        "budget_seconds": 30,
    },
    "fig15-qsh": {
        "model": {"name": "qsh_lattice",
                  "params": {"nx": 6, "ny": 6, "t0": 1.0, "j_flux": 0.25,
                             "k_mix": 0.125, "chi": 0.0}},
        "task": "spectrum",
        "task_params": {"detect_edge_modes": {"gap_fraction": 0.5, "edge_depth": 1,
                                              "weight_threshold": 0.5},
                        "compare_decoupled": True},
        "seed": 0,
        "budget_seconds": 30,
    },
    "rwa-validation": {
        "model": {"name": "pfc-pair",
                  "params": {"omega1": 100.0, "omega2": 60.0, "theta": 0.7}},
        "task": "evolve",
        "task_params": {"scenario": "rwa", "j_eff_values": [1.0, 0.5, 0.25],
                        "n_max": 2, "n_times": 161},
        "seed": 0,
        "budget_seconds": 120,
    },
}


def get_preset(name: str) -> dict:
    if name not in PRESETS:
        known = ", ".join(sorted(PRESETS))
        raise ConfigError(f"unknown preset {name!r}; available: {known}")
    import copy

    cfg = copy.deepcopy(PRESETS[name])
    cfg["name"] = name
    return cfg


def list_presets() -> list[dict]:
    """Catalog rows: name, task, model, declared budget."""
    return [{"name": name, "task": cfg["task"], "model": cfg["model"]["name"],
             "budget_seconds": cfg["budget_seconds"]}
            for name, cfg in sorted(PRESETS.items())]
