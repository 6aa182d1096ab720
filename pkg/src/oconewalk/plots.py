"""Matplotlib figure rendering for CLI reports.

Every report-producing subcommand can render a figure next to its delimited
output; all functions save PNG files into a caller-chosen directory and
return the written path.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, outdir, name: str) -> str:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / f"{name}.png"
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return str(path)


def plot_paths(paths, outdir, name: str, title: str = "", highlight=None) -> str:
    """Step plot of integer paths (optionally one highlighted)."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for p in paths:
        ax.step(range(len(p.values)), p.values, where="post", alpha=0.55, lw=1.2)
    if highlight is not None:
        ax.step(range(len(highlight.values)), highlight.values, where="post",
                color="black", lw=2.0, label="witness")
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel("step")
    ax.set_ylabel("value")
    if title:
        ax.set_title(title, fontsize=10)
    ax.grid(alpha=0.3)
    return _save(fig, outdir, name)


def plot_law_masses(rows, outdir, name: str, title: str = "") -> str:
    """Stem plot of a law's support masses in path order."""
    fig, ax = plt.subplots(figsize=(6, 3.0))
    masses = [r["num"] / r["den"] for r in rows]
    ax.stem(range(len(masses)), masses)
    ax.set_xticks(range(len(masses)))
    ax.set_xticklabels([r["path"] for r in rows], rotation=90, fontsize=6)
    ax.set_ylabel("mass")
    if title:
        ax.set_title(title, fontsize=10)
    return _save(fig, outdir, name)


def plot_census(rows, outdir, name: str = "orbit_census") -> str:
    """Components (and diameters when present) against the horizon."""
    fig, ax = plt.subplots(figsize=(6, 3.0))
    ms = [r["m"] for r in rows]
    ax.plot(ms, [r["n_components"] for r in rows], "o-", label="components")
    diams = [r.get("max_component_diameter") for r in rows]
    if all(d is not None for d in diams):
        ax.plot(ms, diams, "s--", label="max diameter")
    ax.set_xlabel("horizon m")
    ax.set_ylabel("count")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    return _save(fig, outdir, name)


def plot_lattice_overlay(path, lattice, outdir, name: str = "discretization") -> str:
    """Sampled path with its mesh discretization stepped on top."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(path.times, path.values, lw=0.8, alpha=0.8, label="path")
    jt = np.concatenate([[0.0], np.asarray(lattice.jump_times), [lattice.t_end]])
    lv = np.concatenate([[0.0], lattice.mesh * np.cumsum(lattice.jump_signs)])
    lv = np.append(lv, lv[-1])
    ax.step(jt, lv, where="post", color="crimson", lw=1.5,
            label=f"lattice (mesh {lattice.mesh:g})")
    ax.set_xlabel("t")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    return _save(fig, outdir, name)


def plot_cf_comparison(report_obj: dict, outdir, name: str = "cf_check") -> str:
    """Characteristic-function comparison in the complex plane."""
    fig, ax = plt.subplots(figsize=(4.2, 4.2))
    lhs = report_obj["lhs"]
    rhs = report_obj["rhs"]
    ax.plot([lhs[0]], [lhs[1]], "o", label="E exp(i ∫ h dM)")
    ax.plot([rhs], [0.0], "x", ms=10, label="E exp(-½ ∫ h² dQV)")
    r = report_obj["z"] * report_obj["stderr"]
    circle = plt.Circle((rhs, 0.0), r, fill=False, ls=":", color="gray")
    ax.add_patch(circle)
    ax.set_aspect("equal")
    ax.legend(fontsize=8, loc="upper left")
    ax.set_title("pass" if report_obj["passed"] else "fail", fontsize=10)
    ax.grid(alpha=0.3)
    return _save(fig, outdir, name)


def plot_test_cells(report_obj: dict, outdir, name: str = "test_report") -> str:
    """Observed-vs-expected bars for a test report's witness cells."""
    cells = report_obj.get("witness_cells", [])
    fig, ax = plt.subplots(figsize=(6, 3.0))
    labels = []
    for i, cell in enumerate(cells):
        obs = cell["observed"]
        exp = cell["expected"]
        obs = obs if isinstance(obs, list) else [obs]
        exp = exp if isinstance(exp, list) else [exp]
        width = 0.8 / (len(obs) + len(exp))
        for k, (o, e) in enumerate(zip(obs, exp)):
            ax.bar(i + k * 2 * width, o, width, color="steelblue")
            ax.bar(i + (k * 2 + 1) * width, e, width, color="orange")
        labels.append("\n".join(cell.get("cells", [str(i)]))
                      if "cells" in cell else cell.get("walk_prefix", str(i)))
    ax.set_xticks(range(len(cells)))
    ax.set_xticklabels(labels, fontsize=7)
    ax.set_ylabel("count (blue observed / orange expected)")
    ax.set_title(
        f"{report_obj.get('test', '')}: p={report_obj.get('p_value', float('nan')):.3g}",
        fontsize=10,
    )
    return _save(fig, outdir, name)
