"""CSV/JSON emitters shared by the command-line front end.

CSV cells carry full double precision (17 significant digits); every
emitted file gets a sidecar JSON that reconstructs the run.
"""
from __future__ import annotations

import json
import os


def fmt(x) -> str:
    if isinstance(x, (int,)):
        return str(x)
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def sidecar_path(path) -> str:
    base, _ = os.path.splitext(path)
    return base + ".params.json"


def write_with_sidecar(path, header, rows, params):
    write_csv(path, header, rows)
    write_json(sidecar_path(path), params)
