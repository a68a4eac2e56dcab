"""
File formats for spectra, tables and synthetic counting data.

CSV files start with ``#``-prefixed metadata lines (``# key: <json>``)
followed by a header row, so ``pandas.read_csv(path, comment="#")`` reads
them directly.
Floats are written with ``repr`` so that files round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from . import __version__
from .spectra import EnergyGrid, ModelTag, Spectrum

FORMAT_VERSION = 1

SPECTRUM_COLUMNS = ("energy_keV", "value", "model_tag", "atom", "flags")
SYNTH_COLUMNS = ("bin_center_keV", "bin_width_keV", "counts", "efficiency", "background_rate")


def _num(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _jsonable(obj):
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, ModelTag):
        return obj.value
    return obj


def dumps_json(doc) -> str:
    return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"


def _header_lines(kind: str, meta: Mapping | None) -> list[str]:
    lines = [f"# format: collapse-radiance/{kind}", f"# format_version: {FORMAT_VERSION}",
             f"# tool_version: {json.dumps(__version__)}"]
    for key, value in (meta or {}).items():
        lines.append(f"# {key}: {json.dumps(_jsonable(value), separators=(',', ':'))}")
    return lines


def write_table_csv(columns: Mapping[str, Iterable], kind: str, meta: Mapping | None = None) -> str:
    """Render named columns as CSV text with a metadata header."""
    names = list(columns)
    cols = [list(columns[n]) for n in names]
    buf = io.StringIO()
    for line in _header_lines(kind, meta):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for row in zip(*cols):
        writer.writerow([_num(v) if isinstance(v, (int, float, np.number)) and not isinstance(v, bool) else v
                         for v in row])
    return buf.getvalue()


def read_csv_with_meta(text: str):
    """Split a metadata-headed CSV into ``(meta, rows)``; rows are dicts of strings."""
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            value = value.strip()
            try:
                meta[key.strip()] = json.loads(value)
            except json.JSONDecodeError:
                meta[key.strip()] = value
        elif line.strip():
            body.append(line)
    rows = list(csv.DictReader(body))
    return meta, rows


# -- spectra ----------------------------------------------------------------

def _row_flags(energy, value) -> str:
    flags = []
    if value < 0:
        flags.append("negative")
    if energy < 1.0:
        flags.append("sub_kev")
    return "|".join(flags)


def spectrum_meta(spectrum: Spectrum) -> dict:
    return {
        "model_tag": spectrum.model_tag.value,
        "noise": spectrum.noise,
        "atom": spectrum.atom_symbol,
        "units": spectrum.units,
        "normalized": spectrum.normalized,
        "negativity_flag": spectrum.negativity_flag,
        "sub_kev_flag": spectrum.sub_kev_flag,
        "grid_spacing": spectrum.grid.spacing,
        "params_echo": spectrum.params_echo,
    }


def spectrum_to_csv(spectrum: Spectrum, extra_meta: Mapping | None = None) -> str:
    e = spectrum.grid.points
    v = spectrum.values
    n = len(e)
    columns = {
        "energy_keV": e.tolist(),
        "value": v.tolist(),
        "model_tag": [spectrum.model_tag.value] * n,
        "atom": [spectrum.atom_symbol] * n,
        "flags": [_row_flags(ei, vi) for ei, vi in zip(e, v)],
    }
    meta = dict(spectrum_meta(spectrum))
    meta.update(extra_meta or {})
    return write_table_csv(columns, "spectrum", meta)


def spectrum_to_json(spectrum: Spectrum, extra_meta: Mapping | None = None) -> str:
    doc = {"format": "collapse-radiance/spectrum", "format_version": FORMAT_VERSION, "tool_version": __version__}
    doc.update(spectrum_meta(spectrum))
    doc.update(extra_meta or {})
    doc["energy_keV"] = spectrum.grid.points
    doc["values"] = spectrum.values
    return dumps_json(doc)


def _spectrum_from_parts(meta, energies, values) -> Spectrum:
    vals = np.array(values, dtype=float)
    vals.setflags(write=False)
    return Spectrum(
        grid=EnergyGrid(energies, meta.get("grid_spacing", "custom")),
        values=vals,
        model_tag=ModelTag.parse(meta["model_tag"]),
        atom_symbol=meta["atom"],
        params_echo=meta["params_echo"],
        noise=meta.get("noise", "markovian"),
        negativity_flag=bool(meta.get("negativity_flag", False)),
        sub_kev_flag=bool(meta.get("sub_kev_flag", False)),
        normalized=bool(meta.get("normalized", False)),
    )


def spectrum_from_csv(text: str) -> Spectrum:
    meta, rows = read_csv_with_meta(text)
    return _spectrum_from_parts(meta, [float(r["energy_keV"]) for r in rows], [float(r["value"]) for r in rows])


def spectrum_from_json(text: str) -> Spectrum:
    doc = json.loads(text)
    return _spectrum_from_parts(doc, doc["energy_keV"], doc["values"])


# -- synthetic counting data ------------------------------------------------

def synthetic_to_csv(data) -> str:
    columns = {
        "bin_center_keV": data.grid.points.tolist(),
        "bin_width_keV": data.bin_width.tolist(),
        "counts": [int(c) for c in data.counts],
        "efficiency": data.efficiency.tolist(),
        "background_rate": data.background_rate.tolist(),
    }
    return write_table_csv(columns, "synthetic-spectrum", {"grid_spacing": data.grid.spacing})


def synthetic_sidecar(data, extra: Mapping | None = None) -> dict:
    doc = {
        "format": "collapse-radiance/synthetic-spectrum",
        "format_version": FORMAT_VERSION,
        "tool_version": __version__,
        "exposure_s": data.exposure,
        "seed": data.seed,
        "clamped_flag": data.clamped_flag,
        "truth": data.truth,
    }
    doc.update(extra or {})
    return doc


def sidecar_path(csv_path: str | Path) -> Path:
    return Path(csv_path).with_suffix(".json")


def read_synthetic(csv_path: str | Path, sidecar: str | Path | None = None):
    from .inference import SyntheticSpectrum

    csv_path = Path(csv_path)
    meta, rows = read_csv_with_meta(csv_path.read_text(encoding="utf-8"))
    missing = [c for c in SYNTH_COLUMNS if rows and c not in rows[0]]
    if not rows or missing:
        raise ValueError(f"{csv_path}: not a synthetic spectrum file (missing columns {missing})")
    side = json.loads(Path(sidecar or sidecar_path(csv_path)).read_text(encoding="utf-8"))
    col = {c: [r[c] for r in rows] for c in SYNTH_COLUMNS}
    return SyntheticSpectrum(
        grid=EnergyGrid([float(x) for x in col["bin_center_keV"]], meta.get("grid_spacing", "custom")),
        bin_width=np.array(col["bin_width_keV"], dtype=float),
        counts=np.array([int(x) for x in col["counts"]], dtype=np.int64),
        exposure=float(side["exposure_s"]),
        efficiency=np.array(col["efficiency"], dtype=float),
        background_rate=np.array(col["background_rate"], dtype=float),
        seed=side.get("seed"),
        truth=side.get("truth", {}),
        clamped_flag=bool(side.get("clamped_flag", False)),
    )
