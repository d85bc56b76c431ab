"""CSV serialization of fields and tables, and the per-run JSON manifest.

Floats are written with ``repr`` (shortest round-trip decimal), so reading a
file back reproduces every coefficient bitwise.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from datetime import datetime, timezone

import numpy as np

from .spectral import ModeSet, VelocityField

FIELD_HEADER = ["kx", "ky", "re_ux", "im_ux", "re_uy", "im_uy"]
MANIFEST = "manifest.json"


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _open_w(path):
    try:
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def write_field_csv(u, path):
    """One row per representative mode; a batch of shape ``(M,)`` adds a leading ``path`` column."""
    c = u.coeffs
    if c.ndim > 3:
        raise ValueError("only single fields or one batch axis (solution slices) are supported")
    kx, ky = u.modes.kx, u.modes.ky
    with _open_w(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        if c.ndim == 2:
            w.writerow(FIELD_HEADER)
            for j in range(u.modes.size):
                w.writerow([_fmt(kx[j]), _fmt(ky[j]), _fmt(c[j, 0].real), _fmt(c[j, 0].imag),
                            _fmt(c[j, 1].real), _fmt(c[j, 1].imag)])
        else:
            w.writerow(["path"] + FIELD_HEADER)
            for p in range(c.shape[0]):
                for j in range(u.modes.size):
                    w.writerow([str(p), _fmt(kx[j]), _fmt(ky[j]), _fmt(c[p, j, 0].real),
                                _fmt(c[p, j, 0].imag), _fmt(c[p, j, 1].real), _fmt(c[p, j, 1].imag)])
    return path


def read_field_csv(path, period=2.0 * np.pi):
    """Inverse of ``write_field_csv``; returns a VelocityField (batched for slices)."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    header, body = rows[0], rows[1:]
    sliced = header[0] == "path"
    if (header[1:] if sliced else header) != FIELD_HEADER:
        raise ValueError(f"{path}: unexpected header {header}")
    if sliced:
        paths = np.array([int(r[0]) for r in body])
        body = [r[1:] for r in body]
    kx = np.array([int(r[0]) for r in body])
    ky = np.array([int(r[1]) for r in body])
    vals = np.array([[float(x) for x in r[2:]] for r in body]).reshape(-1, 2, 2)
    coeffs = vals[..., 0] + 1j * vals[..., 1]
    if sliced:
        n = int(paths.max()) + 1
        size = len(body) // n
        kx, ky = kx[:size], ky[:size]
        coeffs = coeffs.reshape(n, size, 2)
    modes = ModeSet(kx, ky, period)
    order = np.array([modes.index_of(a, b)[0] for a, b in zip(kx, ky)])
    out = np.empty_like(coeffs)
    out[..., order, :] = coeffs
    return VelocityField(modes, out)


def write_table_csv(path, header, rows):
    with _open_w(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
    return path


def read_table_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def utc_now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_manifest(out_dir, version, command, config, seed, started, files, extra=None):
    """Single ``manifest.json`` in ``out_dir`` with config, seed, timestamps and file digests."""
    digests = {os.path.basename(f): sha256_file(f) for f in sorted(files)}
    manifest = {"tool": "bsnse", "version": version, "command": command, "seed": seed,
                "config": {k: list(v) if isinstance(v, tuple) else v for k, v in config.items()},
                "started": started, "finished": utc_now(), "outputs": digests}
    if extra:
        manifest["extra"] = extra
    path = os.path.join(out_dir, MANIFEST)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_manifest(path):
    if os.path.isdir(path):
        path = os.path.join(path, MANIFEST)
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
