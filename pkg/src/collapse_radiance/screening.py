"""
Screened-hydrogenic mean orbital radii (generator for the shipped atom data).

Mean radii follow the hydrogenic expectation value

    <r>_nl = a0 * (3 n^2 - l (l + 1)) / (2 Z_eff)

with ``Z_eff`` from Slater's screening rules. These are rough estimates meant
to make the shipped Ge / Xe files self-contained; substitute all-electron DFT
radii through the atom JSON schema for quantitative work.

Run ``python -m collapse_radiance.screening [outdir]`` to regenerate
``data/atoms/*.json`` and ``manifest.json``.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from .atoms import Atom, Shell, atom_to_document, parse_subshell_label
from .constants import BOHR_RADIUS

PROVENANCE = "screened-hydrogenic estimate"

# Madelung filling order, enough for Z <= 86.
_AUFBAU = ["1s", "2s", "2p", "3s", "3p", "4s", "3d", "4p", "5s", "4d", "5p", "6s", "4f", "5d", "6p"]

ELEMENTS = {"H": 1, "He": 2, "Li": 3, "Be": 4, "C": 6, "Ne": 10, "Ar": 18, "Ge": 32, "Kr": 36, "Xe": 54}

SHIPPED = ("Ge", "Xe")


def ground_state_configuration(z: int) -> list[tuple[str, int]]:
    """Aufbau configuration, ordered by (n, l). No exceptional fillings."""
    config = []
    remaining = z
    for label in _AUFBAU:
        if remaining == 0:
            break
        _, l = parse_subshell_label(label)
        occ = min(remaining, 2 * (2 * l + 1))
        config.append((label, occ))
        remaining -= occ
    if remaining:
        raise ValueError(f"Z = {z} beyond supported filling order")
    return sorted(config, key=lambda item: parse_subshell_label(item[0]))


def _slater_group(label: str) -> tuple[int, int]:
    # Slater groups [1s] [2s2p] [3s3p] [3d] [4s4p] [4d] [4f] [5s5p]; tuple order is group order
    n, l = parse_subshell_label(label)
    return (n, 0 if l <= 1 else l)


def slater_zeff(config: list[tuple[str, int]], label: str, z: int) -> float:
    """Effective charge felt by one electron of subshell ``label``."""
    n, l = parse_subshell_label(label)
    group = _slater_group(label)
    shielding = 0.0
    for other, count in config:
        ogroup = _slater_group(other)
        on, _ = parse_subshell_label(other)
        if ogroup == group:
            same = count - 1 if other == label else count
            shielding += same * (0.30 if group == (1, 0) else 0.35)
        elif ogroup < group:
            if l <= 1:
                if on == n - 1:
                    shielding += 0.85 * count
                elif on < n - 1:
                    shielding += 1.00 * count
            else:
                shielding += 1.00 * count
    return z - shielding


def hydrogenic_mean_radius(n: int, l: int, z_eff: float) -> float:
    return BOHR_RADIUS * (3 * n * n - l * (l + 1)) / (2.0 * z_eff)


def screened_hydrogenic_atom(symbol: str, z: int | None = None) -> Atom:
    z = ELEMENTS[symbol] if z is None else z
    config = ground_state_configuration(z)
    shells = []
    for label, occ in config:
        n, l = parse_subshell_label(label)
        shells.append(Shell(label, occ, hydrogenic_mean_radius(n, l, slater_zeff(config, label, z))))
    return Atom(symbol=symbol, n_protons=z, shells=tuple(shells), radii_provenance=PROVENANCE)


def write_data(outdir: Path, symbols=SHIPPED) -> dict:
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "generator": "collapse_radiance.screening",
        "method": "<r>_nl = a0 (3n^2 - l(l+1)) / (2 Z_eff), Slater-rule Z_eff",
        "bohr_radius_m": BOHR_RADIUS,
        "files": {},
    }
    for symbol in symbols:
        doc = atom_to_document(screened_hydrogenic_atom(symbol))
        name = f"{symbol.lower()}.json"
        (outdir / name).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        manifest["files"][name] = {"symbol": symbol, "Z": doc["Z"], "n_shells": len(doc["shells"])}
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest


if __name__ == "__main__":
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent / "data" / "atoms"
    write_data(target)
