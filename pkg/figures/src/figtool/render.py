"""Render paper-style figures from graphscatter CSV/JSON outputs.

Driven by a JSON spec file:

    {"figure": "transmission" | "heatmap" | "xsec",
     "inputs": {"csv": "path.csv"},
     "output": "figure.png",
     "options": {"cube_root": true, ...}}

Overlay curves (incoming-momentum dashes, the on-shell energy
conservation curve) are reconstructed from the sidecar params JSON, not
recomputed from physics.  Rendering is deterministic: fixed size, fixed
dpi, metadata suppressed.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

FIGURES = {}


class SchemaError(ValueError):
    """Input file does not match the documented column schema."""


def register(name):
    def deco(fn):
        FIGURES[name] = fn
        return fn
    return deco


def load_csv(path, expected_columns):
    with open(path) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        missing = [c for c in expected_columns if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}")
        rows = [[float(x) for x in row] for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    data = np.asarray(rows)
    index = {c: header.index(c) for c in expected_columns}
    return {c: data[:, index[c]] for c in expected_columns}


def load_sidecar(path):
    base, _ = os.path.splitext(path)
    candidate = base + ".params.json"
    if os.path.exists(candidate):
        with open(candidate) as fh:
            return json.load(fh)
    return {}


def _finish(fig, output):
    fig.savefig(output, dpi=110, metadata={"Software": None})
    plt.close(fig)


@register("transmission")
def fig_transmission(spec):
    """Two panels: |t|^2 and |r|^2 against energy (Figs. 2/5 style)."""
    cols = load_csv(spec["inputs"]["csv"], ["E", "m", "n", "abs_t2"])
    e = cols["E"]
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.2), sharey=True)
    for ax, m, label in ((axes[0], 2, "$|t(E)|^2$"), (axes[1], 1, "$|r(E)|^2$")):
        sel = (cols["m"] == m) & (cols["n"] == 1)
        order = np.argsort(e[sel])
        ax.plot(e[sel][order], cols["abs_t2"][sel][order], lw=1.2)
        ax.set_xlabel("E")
        ax.set_title(label)
        ax.set_ylim(-0.02, 1.02)
        ax.grid(alpha=0.25, lw=0.4)
    fig.tight_layout()
    _finish(fig, spec["output"])


@register("heatmap")
def fig_heatmap(spec):
    """Re R over outgoing momenta with dashed p-lines and on-shell curve."""
    cols = load_csv(spec["inputs"]["csv"], ["k1", "k2", "ReR"])
    k1 = np.unique(cols["k1"])
    k2 = np.unique(cols["k2"])
    grid = cols["ReR"].reshape(k1.size, k2.size)
    options = spec.get("options", {})
    shade = np.cbrt(grid) if options.get("cube_root", True) else grid
    params = load_sidecar(spec["inputs"]["csv"])
    fig, ax = plt.subplots(figsize=(4.6, 4.2))
    vmax = np.abs(shade).max()
    mesh = ax.pcolormesh(k1, k2, shade.T, cmap="RdBu_r", vmin=-vmax,
                         vmax=vmax, shading="nearest")
    fig.colorbar(mesh, ax=ax, label=(r"$\sqrt[3]{\mathrm{Re}\,R}$"
                                     if options.get("cube_root", True)
                                     else r"$\mathrm{Re}\,R$"))
    p1, p2 = params.get("p1"), params.get("p2")
    if p1 is not None and p2 is not None:
        ax.axvline(p1, color="k", ls="--", lw=0.7)
        ax.axhline(p2, color="k", ls="--", lw=0.7)
        e_tot = 2 * np.cos(p1) + 2 * np.cos(p2)
        ks = np.linspace(k1.min(), k1.max(), 600)
        with np.errstate(invalid="ignore"):
            arg = (e_tot - 2 * np.cos(ks)) / 2.0
            kc = np.arccos(np.clip(arg, -1, 1))
            kc[np.abs(arg) > 1] = np.nan
        for sign in (1, -1):
            ax.plot(ks, sign * kc, color="k", lw=0.9)
    ax.set_xlim(k1.min(), k1.max())
    ax.set_ylim(k2.min(), k2.max())
    ax.set_xlabel("$k_1$")
    ax.set_ylabel("$k_2$")
    fig.tight_layout()
    _finish(fig, spec["output"])


@register("xsec")
def fig_xsec(spec):
    """Cross section against packet half-width delta (Figs. 11/12 style)."""
    cols = load_csv(spec["inputs"]["csv"],
                    ["delta", "sigma_counter", "sigma_co"])
    order = np.argsort(cols["delta"])
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    ax.plot(cols["delta"][order], cols["sigma_counter"][order], "o-",
            label="counter-propagating", lw=1.2, ms=3.5)
    ax.plot(cols["delta"][order], cols["sigma_co"][order], "s-",
            label="co-propagating", lw=1.2, ms=3.5)
    ax.set_xlabel(r"$\delta$")
    ax.set_ylabel(r"$\Sigma_\delta$")
    ax.legend(frameon=False)
    ax.grid(alpha=0.25, lw=0.4)
    fig.tight_layout()
    _finish(fig, spec["output"])


def render(spec_path):
    with open(spec_path) as fh:
        spec = json.load(fh)
    kind = spec.get("figure")
    if kind not in FIGURES:
        raise SchemaError(f"unknown figure kind {kind!r}; "
                          f"known: {sorted(FIGURES)}")
    for key, path in spec.get("inputs", {}).items():
        if not os.path.exists(path):
            raise SchemaError(f"input {key} does not exist: {path}")
    FIGURES[kind](spec)
    return spec["output"]


def main(argv=None):
    ap = argparse.ArgumentParser(prog="figures")
    ap.add_argument("spec", help="JSON figure spec")
    args = ap.parse_args(argv)
    try:
        out = render(args.spec)
    except SchemaError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
