"""
Atomic shell model and charged-pair enumeration.

An atom is a point-like nucleus of ``Z`` protons surrounded by electron
subshells, each described by its occupancy and mean orbital radius. The rate
formulas never need electron positions, only pair distances, which are
parametrized from the mean radii:

* proton-proton pairs sit at distance 0,
* a proton and an electron of shell o sit at ``rho_o``,
* two electrons of shell o sit at ``alpha * rho_o``,
* electrons of shells o and o' sit at ``beta * |rho_o - rho_o'|``.
"""

from __future__ import annotations

import json
import math
import os
import re
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from pathlib import Path
from typing import Any, Mapping

from .errors import (
    InvalidRadiusError,
    MalformedAtomError,
    OccupancyMismatchError,
    UnknownAtomError,
)

__all__ = [
    "Shell",
    "Atom",
    "PairGeometry",
    "PairKind",
    "PairTerm",
    "parse_atom",
    "load_atom",
    "atom_to_document",
    "builtin_atom",
    "builtin_symbols",
    "resolve_atom",
    "enumerate_pairs",
    "parse_subshell_label",
    "DATA_ENV_VAR",
]

DATA_ENV_VAR = "COLLAPSE_RADIANCE_DATA"
_BUILTIN_DIR = Path(__file__).parent / "data" / "atoms"

_L_LETTERS = "spdfghi"
_LABEL_RE = re.compile(r"^([1-9][0-9]*)([spdfghi])$")


def parse_subshell_label(label: str):
    """Return ``(n, l)`` for a standard subshell label like ``"3d"``, else None."""
    m = _LABEL_RE.match(label.strip())
    if m is None:
        return None
    n = int(m.group(1))
    l = _L_LETTERS.index(m.group(2))
    if l >= n:
        return None
    return n, l


@dataclass(frozen=True)
class Shell:
    label: str
    occupancy: int
    mean_radius: float  # m
    alpha_override: float | None = None

    def __post_init__(self):
        if isinstance(self.occupancy, bool) or not isinstance(self.occupancy, int):
            raise MalformedAtomError(f"shell {self.label!r}: occupancy must be an integer")
        if self.occupancy < 1:
            raise MalformedAtomError(f"shell {self.label!r}: occupancy must be >= 1")
        nl = parse_subshell_label(self.label)
        if nl is not None and self.occupancy > 2 * (2 * nl[1] + 1):
            raise MalformedAtomError(
                f"shell {self.label!r}: occupancy {self.occupancy} exceeds subshell capacity {2 * (2 * nl[1] + 1)}"
            )
        r = self.mean_radius
        if not isinstance(r, (int, float)) or isinstance(r, bool) or not math.isfinite(r) or r <= 0:
            raise InvalidRadiusError(f"shell {self.label!r}: mean radius must be positive and finite, got {r!r}")
        if self.alpha_override is not None and not (math.isfinite(self.alpha_override) and self.alpha_override > 0):
            raise MalformedAtomError(f"shell {self.label!r}: alpha_override must be positive")


@dataclass(frozen=True)
class Atom:
    symbol: str
    n_protons: int
    shells: tuple[Shell, ...]
    radii_provenance: str = "unspecified"
    neutral: bool = True

    def __post_init__(self):
        object.__setattr__(self, "shells", tuple(self.shells))
        if isinstance(self.n_protons, bool) or not isinstance(self.n_protons, int) or self.n_protons < 1:
            raise MalformedAtomError(f"{self.symbol}: proton number must be a positive integer")
        if not self.shells:
            raise MalformedAtomError(f"{self.symbol}: at least one shell is required")
        labels = [s.label for s in self.shells]
        if len(set(labels)) != len(labels):
            raise MalformedAtomError(f"{self.symbol}: duplicate shell labels in {labels}")
        if self.neutral and self.n_electrons != self.n_protons:
            raise OccupancyMismatchError(
                f"{self.symbol}: occupancies sum to {self.n_electrons} but Z = {self.n_protons} for a neutral atom"
            )

    @property
    def n_electrons(self) -> int:
        return sum(s.occupancy for s in self.shells)

    @property
    def net_charge(self) -> int:
        """Net charge in units of e."""
        return self.n_protons - self.n_electrons


@dataclass(frozen=True)
class PairGeometry:
    """Inter-electron distance coefficients.

    ``alpha`` scales same-shell distances, ``beta`` cross-shell ones. The
    defaults are the middle of the 1.0-1.5 band for alpha and the lithium /
    beryllium 1s-2s intracule value for beta.
    """

    alpha: float = 1.25
    beta: float = 1.04

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")


class PairKind(str, Enum):
    PROTON_PROTON = "proton_proton"
    PROTON_ELECTRON = "proton_electron"
    ELECTRON_SAME_SHELL = "electron_same_shell"
    ELECTRON_CROSS_SHELL = "electron_cross_shell"
    ELECTRON_SELF = "electron_self"


@dataclass(frozen=True)
class PairTerm:
    kind: PairKind
    distance: float  # m
    multiplicity: int
    shells: tuple[str, ...] = field(default=())

    @property
    def charge_sign(self) -> int:
        """Sign of q_i q_j in units of e^2."""
        return -1 if self.kind is PairKind.PROTON_ELECTRON else 1


def enumerate_pairs(atom: Atom, geom: PairGeometry | None = None) -> list[PairTerm]:
    """Group the ordered particle pairs of ``atom`` by distance.

    The summation order is fixed: proton-proton, electron self-pairs, then per
    shell the proton-electron and same-shell terms, then cross-shell terms in
    shell-list order.
    """
    geom = geom or PairGeometry()
    n_p = atom.n_protons
    terms = [
        PairTerm(PairKind.PROTON_PROTON, 0.0, n_p * n_p),
        PairTerm(PairKind.ELECTRON_SELF, 0.0, atom.n_electrons),
    ]
    for shell in atom.shells:
        n_o = shell.occupancy
        terms.append(PairTerm(PairKind.PROTON_ELECTRON, shell.mean_radius, 2 * n_p * n_o, (shell.label,)))
        if n_o >= 2:
            alpha = shell.alpha_override if shell.alpha_override is not None else geom.alpha
            terms.append(
                PairTerm(PairKind.ELECTRON_SAME_SHELL, alpha * shell.mean_radius, n_o * (n_o - 1), (shell.label,))
            )
    for a, b in combinations(atom.shells, 2):
        terms.append(
            PairTerm(
                PairKind.ELECTRON_CROSS_SHELL,
                geom.beta * abs(a.mean_radius - b.mean_radius),
                2 * a.occupancy * b.occupancy,
                (a.label, b.label),
            )
        )
    return terms


# -- ingestion ---------------------------------------------------------------

def _require(doc: Mapping[str, Any], key: str, types, where: str):
    if key not in doc:
        raise MalformedAtomError(f"{where}: missing key {key!r}")
    value = doc[key]
    if isinstance(value, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
        raise MalformedAtomError(f"{where}: key {key!r} has wrong type")
    if not isinstance(value, types):
        raise MalformedAtomError(f"{where}: key {key!r} has wrong type {type(value).__name__}")
    return value


def parse_atom(document: str | bytes | Mapping[str, Any]) -> Atom:
    """Build a validated :class:`Atom` from a JSON string or decoded mapping.

    Raises
    ------
    MalformedAtomError
        Missing keys, wrong types, duplicate labels, over-full subshells.
    InvalidRadiusError
        Zero, negative or non-finite mean radius.
    OccupancyMismatchError
        Occupancies do not sum to Z for an atom flagged neutral.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise MalformedAtomError(f"atom document is not valid JSON: {exc}") from None
    if not isinstance(document, Mapping):
        raise MalformedAtomError("atom document must be a JSON object")

    symbol = _require(document, "symbol", str, "atom")
    z = _require(document, "Z", int, symbol)
    neutral = document.get("neutral", True)
    if not isinstance(neutral, bool):
        raise MalformedAtomError(f"{symbol}: 'neutral' must be a boolean")
    provenance = document.get("radii_provenance", "unspecified")
    if not isinstance(provenance, str):
        raise MalformedAtomError(f"{symbol}: 'radii_provenance' must be a string")
    raw_shells = _require(document, "shells", list, symbol)

    shells = []
    for i, raw in enumerate(raw_shells):
        where = f"{symbol} shell #{i}"
        if not isinstance(raw, Mapping):
            raise MalformedAtomError(f"{where}: must be an object")
        label = _require(raw, "label", str, where)
        occupancy = _require(raw, "occupancy", int, where)
        radius = _require(raw, "mean_radius_m", (int, float), where)
        alpha = raw.get("alpha_override")
        if alpha is not None and (isinstance(alpha, bool) or not isinstance(alpha, (int, float))):
            raise MalformedAtomError(f"{where}: alpha_override must be a number")
        shells.append(Shell(label, occupancy, float(radius), None if alpha is None else float(alpha)))

    return Atom(symbol=symbol, n_protons=z, shells=tuple(shells), radii_provenance=provenance, neutral=neutral)


def atom_to_document(atom: Atom) -> dict:
    shells = []
    for s in atom.shells:
        d = {"label": s.label, "occupancy": s.occupancy, "mean_radius_m": s.mean_radius}
        if s.alpha_override is not None:
            d["alpha_override"] = s.alpha_override
        shells.append(d)
    return {
        "symbol": atom.symbol,
        "Z": atom.n_protons,
        "neutral": atom.neutral,
        "radii_provenance": atom.radii_provenance,
        "shells": shells,
    }


def load_atom(path: str | os.PathLike) -> Atom:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UnknownAtomError(f"cannot read atom file {path}: {exc.strerror}") from None
    return parse_atom(text)


def _data_dir() -> Path:
    override = os.environ.get(DATA_ENV_VAR)
    return Path(override) if override else _BUILTIN_DIR


def builtin_symbols() -> list[str]:
    return sorted(p.stem.capitalize() for p in _data_dir().glob("*.json") if p.stem != "manifest")


def builtin_atom(symbol: str) -> Atom:
    """Return a shipped atom (``"Ge"``, ``"Xe"``, ...).

    The data directory can be replaced through the ``COLLAPSE_RADIANCE_DATA``
    environment variable; files are looked up as ``<symbol lowercase>.json``.
    """
    path = _data_dir() / f"{symbol.strip().lower()}.json"
    if not path.is_file():
        raise UnknownAtomError(f"no atom data for {symbol!r} in {_data_dir()}")
    return load_atom(path)


def resolve_atom(ref: str) -> Atom:
    """Interpret ``ref`` as a file path if it exists or ends in .json, else as a symbol."""
    if ref.endswith(".json") or os.path.sep in ref or Path(ref).is_file():
        return load_atom(ref)
    return builtin_atom(ref)

