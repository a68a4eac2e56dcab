"""
Command-line interface.

    collapse-radiance spectrum --atom Ge --model csl-general --rc 1.15e-8 --out ge.csv
    collapse-radiance compare  --atom Xe --model dp-general --r0 0.54e-10
    collapse-radiance band     --atom Ge --model csl-general --rc 1.15e-8 --alpha-lo 1 --alpha-hi 1.5
    collapse-radiance zsurvey  --atoms Ge,Xe --energy 500 --model csl-simple --rc 1.15e-8
    collapse-radiance synth    --atom Ge --model csl-general --rc 1.15e-8 --lambda 1e-9 --exposure 1e35 --out d.csv
    collapse-radiance fit      --data d.csv --prior 3.45e-8

Every option may also come from a TOML file given with ``--config``; keys are
the long option names with dashes or underscores (``lambda`` or
``lambda_rate`` for ``--lambda``). Command-line flags override the file. The
fully resolved configuration is echoed into each output, and feeding that
echo back through ``--config`` reproduces the output byte for byte.

Exit status: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .atoms import PairGeometry, resolve_atom
from .csl import CslParams
from .dp import DpParams
from .errors import CollapseRadianceError
from .formats import (
    dumps_json,
    read_synthetic,
    sidecar_path,
    spectrum_to_csv,
    spectrum_to_json,
    synthetic_sidecar,
    synthetic_to_csv,
    write_table_csv,
)
from .spectra import EnergyGrid, ModelTag, alpha_band, compute_spectrum, convergence_energy, normalize_shape, z_survey

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

_MODEL_DEFAULTS = {"format": "csv", "lambda_rate": 1.0, "g_scale": 1.0, "alpha": 1.25, "beta": 1.04}
_GRID_DEFAULTS = {"emin": 1.0, "emax": 1000.0, "points": 512, "spacing": "log"}

COMMAND_DEFAULTS = {
    "spectrum": {**_MODEL_DEFAULTS, **_GRID_DEFAULTS, "normalize": False},
    "compare": {**_MODEL_DEFAULTS, **_GRID_DEFAULTS, "rel_tol": 0.05},
    "band": {**_MODEL_DEFAULTS, **_GRID_DEFAULTS, "alpha_lo": 1.0, "alpha_hi": 1.5, "samples": 11},
    "zsurvey": dict(_MODEL_DEFAULTS),
    "synth": {**_MODEL_DEFAULTS, **_GRID_DEFAULTS, "model": "csl-general", "points": 100,
              "efficiency": 1.0, "background": 0.0, "seed": 0},
    "fit": {"format": "json", "alpha": 1.25, "beta": 1.04, "rel_tol": 1e-3, "max_iter": 50},
}

_KEY_ALIASES = {"lambda": "lambda_rate", "r_c": "rc", "ecutoff": "ecut"}


class UsageError(Exception):
    pass


# -- argument parsing -------------------------------------------------------

def _model_options(p):
    g = p.add_argument_group("model")
    g.add_argument("--atom", help="builtin symbol (Ge, Xe) or path to an atom JSON file")
    g.add_argument("--model", help="csl-general | csl-simple | csl-longwave | dp-general | dp-simple")
    g.add_argument("--rc", type=float, help="CSL correlation length r_C [m]")
    g.add_argument("--r0", type=float, help="DP resolution length R0 [m]")
    g.add_argument("--lambda", dest="lambda_rate", type=float, help="CSL collapse rate [1/s] (default 1)")
    g.add_argument("--g-scale", dest="g_scale", type=float, help="multiplier of G for DP (default 1)")
    g.add_argument("--ecut", type=float, help="colored-noise cutoff E_c [keV]; omit for white noise")
    g.add_argument("--alpha", type=float, help="same-shell distance coefficient (default 1.25)")
    g.add_argument("--beta", type=float, help="cross-shell distance coefficient (default 1.04)")


def _grid_options(p):
    g = p.add_argument_group("energy grid")
    g.add_argument("--emin", type=float, help="lowest energy [keV]")
    g.add_argument("--emax", type=float, help="highest energy [keV]")
    g.add_argument("--points", type=int, help="number of grid points")
    g.add_argument("--spacing", choices=("log", "linear"))


def _io_options(p):
    g = p.add_argument_group("input/output")
    g.add_argument("--config", help="TOML configuration file")
    g.add_argument("--out", help="output file (default: stdout)")
    g.add_argument("--format", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="collapse-radiance", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    kw = {"argument_default": argparse.SUPPRESS}

    p = sub.add_parser("spectrum", help="rate spectrum of one model", **kw)
    _model_options(p), _grid_options(p), _io_options(p)
    p.add_argument("--normalize", action="store_true", help="divide out the constant prefactor")

    p = sub.add_parser("compare", help="normalized general vs simple shapes", **kw)
    _model_options(p), _grid_options(p), _io_options(p)
    p.add_argument("--reference", help="model to compare against (default: simple rate of the same family)")
    p.add_argument("--rel-tol", dest="rel_tol", type=float, help="convergence tolerance (default 0.05)")

    p = sub.add_parser("band", help="alpha-band envelope", **kw)
    _model_options(p), _grid_options(p), _io_options(p)
    p.add_argument("--alpha-lo", dest="alpha_lo", type=float)
    p.add_argument("--alpha-hi", dest="alpha_hi", type=float)
    p.add_argument("--samples", type=int)

    p = sub.add_parser("zsurvey", help="rates across atoms at one energy", **kw)
    _model_options(p), _io_options(p)
    p.add_argument("--atoms", help="comma-separated symbols or paths")
    p.add_argument("--energy", type=float, help="photon energy [keV]")

    p = sub.add_parser("synth", help="synthetic Poisson counting spectrum", **kw)
    _model_options(p), _grid_options(p), _io_options(p)
    p.add_argument("--exposure", type=float, help="exposure [atom s]")
    p.add_argument("--efficiency", type=float)
    p.add_argument("--background", type=float, help="background per unit exposure [counts/(atom s keV)]")
    p.add_argument("--bin-width", dest="bin_width", type=float, help="[keV]; default: contiguous bins")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("fit", help="iterative correlation-length fit of a synthetic spectrum", **kw)
    _io_options(p)
    p.add_argument("--data", help="synthetic spectrum CSV (sidecar JSON alongside)")
    p.add_argument("--atom")
    p.add_argument("--family", choices=("csl", "dp"))
    p.add_argument("--prior", type=float, help="prior correlation length [m]")
    p.add_argument("--ecut", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--rel-tol", dest="rel_tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    return parser


def load_config(path: str) -> dict:
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    cfg = {}
    for key, value in raw.items():
        k = key.replace("-", "_")
        cfg[_KEY_ALIASES.get(k, k)] = value
    return cfg


def resolve_config(args: argparse.Namespace) -> dict:
    explicit = {k: v for k, v in vars(args).items() if k != "command"}
    cfg = dict(COMMAND_DEFAULTS[args.command])
    if explicit.get("config"):
        cfg.update(load_config(explicit["config"]))
    cfg.update(explicit)
    cfg.pop("config", None)
    cfg.pop("command", None)
    return dict(sorted(cfg.items()))


def format_config_toml(cfg: dict) -> str:
    """Serialize a flat resolved configuration as TOML."""
    lines = []
    for key, value in cfg.items():
        if value is None:
            continue
        lines.append(f"{key} = {_toml_value(value)}")
    return "\n".join(lines) + "\n"


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    return json.dumps(str(v))


# -- helpers -----------------------------------------------------------------

def _echo(cfg: dict) -> dict:
    return {k: v for k, v in cfg.items() if k != "out"}


def _need(cfg, key, what):
    if cfg.get(key) is None:
        raise UsageError(f"--{key.replace('_', '-')} is required {what}")
    return cfg[key]


def _tag(name) -> ModelTag:
    try:
        return ModelTag.parse(name)
    except CollapseRadianceError as exc:
        raise UsageError(str(exc)) from None


def _params(cfg: dict, tag: ModelTag):
    if tag.family == "csl":
        rc = _need(cfg, "rc", f"for {tag.value}")
        return CslParams(float(cfg["lambda_rate"]), float(rc), cfg.get("ecut"))
    r0 = _need(cfg, "r0", f"for {tag.value}")
    return DpParams(float(r0), cfg.get("ecut"), float(cfg["g_scale"]))


def _geom(cfg) -> PairGeometry:
    return PairGeometry(float(cfg["alpha"]), float(cfg["beta"]))


def _grid(cfg) -> EnergyGrid:
    emin, emax, n = float(cfg["emin"]), float(cfg["emax"]), int(cfg["points"])
    if cfg["spacing"] == "linear":
        return EnergyGrid.linear(emin, emax, n)
    return EnergyGrid.log(emin, emax, n)


def _emit(text: str, cfg: dict) -> None:
    out = cfg.get("out")
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _warn_sub_kev(grid: EnergyGrid) -> None:
    n = int((grid.points < 1.0).sum())
    if n:
        print(f"warning: {n} grid point(s) below 1 keV, where the semiclassical rates are not valid",
              file=sys.stderr)


def _meta(cfg) -> dict:
    return {"config": _echo(cfg)}


def _table(columns: dict, kind: str, meta: dict, fmt: str) -> str:
    if fmt == "json":
        doc = {"format": f"collapse-radiance/{kind}", "format_version": 1, "tool_version": __version__}
        doc.update(meta)
        doc["columns"] = columns
        return dumps_json(doc)
    return write_table_csv(columns, kind, meta)


# -- commands ----------------------------------------------------------------

def cmd_spectrum(cfg: dict) -> int:
    tag = _tag(_need(cfg, "model", "for spectrum"))
    params = _params(cfg, tag)
    atom = resolve_atom(str(_need(cfg, "atom", "for spectrum")))
    grid = _grid(cfg)
    spec = compute_spectrum(tag, atom, params, _geom(cfg), grid)
    if cfg.get("normalize"):
        spec = normalize_shape(spec)
    _warn_sub_kev(grid)
    render = spectrum_to_json if cfg["format"] == "json" else spectrum_to_csv
    _emit(render(spec, _meta(cfg)), cfg)
    return 0


def _simple_counterpart(tag: ModelTag) -> ModelTag:
    return ModelTag.CSL_SIMPLE if tag.family == "csl" else ModelTag.DP_SIMPLE


def cmd_compare(cfg: dict) -> int:
    tag = _tag(_need(cfg, "model", "for compare"))
    ref = _tag(cfg["reference"]) if cfg.get("reference") else _simple_counterpart(tag)
    atom = resolve_atom(str(_need(cfg, "atom", "for compare")))
    grid = _grid(cfg)
    geom = _geom(cfg)
    a = normalize_shape(compute_spectrum(tag, atom, _params(cfg, tag), geom, grid))
    b = normalize_shape(compute_spectrum(ref, atom, _params(cfg, ref), geom, grid))
    rel_tol = float(cfg["rel_tol"])
    e_star = convergence_energy(a, b, rel_tol)
    ratio = (a.values / b.values).tolist()
    _warn_sub_kev(grid)
    meta = _meta(cfg)
    meta.update({
        "model": tag.value,
        "reference": ref.value,
        "atom": atom.symbol,
        "units": a.units,
        "rel_tol": rel_tol,
        "convergence_energy_keV": e_star,
    })
    columns = {
        "energy_keV": grid.points.tolist(),
        "shape": a.values.tolist(),
        "reference_shape": b.values.tolist(),
        "ratio": ratio,
    }
    _emit(_table(columns, "compare", meta, cfg["format"]), cfg)
    return 0


def cmd_band(cfg: dict) -> int:
    tag = _tag(_need(cfg, "model", "for band"))
    params = _params(cfg, tag)
    atom = resolve_atom(str(_need(cfg, "atom", "for band")))
    grid = _grid(cfg)
    band = alpha_band(tag, atom, params, grid, (float(cfg["alpha_lo"]), float(cfg["alpha_hi"])),
                      int(cfg["samples"]), float(cfg["beta"]))
    _warn_sub_kev(grid)
    meta = _meta(cfg)
    meta.update({"model": tag.value, "atom": atom.symbol, "units": band.mid.units, "alphas": list(band.alphas),
                 "params_echo": band.mid.params_echo})
    columns = {
        "energy_keV": grid.points.tolist(),
        "lower": band.lower.values.tolist(),
        "mid": band.mid.values.tolist(),
        "upper": band.upper.values.tolist(),
    }
    _emit(_table(columns, "band", meta, cfg["format"]), cfg)
    return 0


def _atom_list(value):
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    return [resolve_atom(str(v).strip()) for v in value]


def cmd_zsurvey(cfg: dict) -> int:
    tag = _tag(_need(cfg, "model", "for zsurvey"))
    params = _params(cfg, tag)
    atoms = _atom_list(_need(cfg, "atoms", "for zsurvey"))
    if not atoms:
        raise UsageError("--atoms must name at least one atom")
    energy = float(_need(cfg, "energy", "for zsurvey"))
    rows = z_survey(atoms, energy, tag, params, _geom(cfg))
    meta = _meta(cfg)
    meta.update({"model": tag.value, "energy_keV": energy, "units": "1/(s keV)"})
    columns = {
        "symbol": [r.symbol for r in rows],
        "Z": [r.z for r in rows],
        "rate": [r.rate for r in rows],
        "cancellation_factor": [r.cancellation_factor for r in rows],
    }
    _emit(_table(columns, "zsurvey", meta, cfg["format"]), cfg)
    return 0


def cmd_synth(cfg: dict) -> int:
    from .inference import bin_widths, synth_counts

    tag = _tag(cfg["model"])
    params = _params(cfg, tag)
    atom = resolve_atom(str(_need(cfg, "atom", "for synth")))
    exposure = float(_need(cfg, "exposure", "for synth"))
    grid = _grid(cfg)
    width = cfg.get("bin_width")
    width = bin_widths(grid) if width is None else float(width)
    data = synth_counts(tag, atom, params, _geom(cfg), grid, width, exposure,
                        float(cfg["efficiency"]), float(cfg["background"]), int(cfg["seed"]))
    _warn_sub_kev(grid)
    side = synthetic_sidecar(data, _meta(cfg))
    if cfg["format"] == "json":
        doc = dict(side)
        doc["bins"] = {
            "bin_center_keV": data.grid.points,
            "bin_width_keV": data.bin_width,
            "counts": data.counts,
            "efficiency": data.efficiency,
            "background_rate": data.background_rate,
        }
        _emit(dumps_json(doc), cfg)
        return 0
    out = cfg.get("out")
    if out in (None, "-"):
        raise UsageError("synth with --format csv needs --out (the JSON sidecar is written next to it)")
    Path(out).write_text(synthetic_to_csv(data), encoding="utf-8")
    sidecar_path(out).write_text(dumps_json(side), encoding="utf-8")
    return 0


def cmd_fit(cfg: dict) -> int:
    from .inference import iterate_corr_length

    data_path = _need(cfg, "data", "for fit")
    data = read_synthetic(data_path)
    truth = data.truth or {}
    family = cfg.get("family") or str(truth.get("model_tag", "csl_general")).split("_")[0]
    atom_ref = cfg.get("atom") or truth.get("atom")
    if atom_ref is None:
        raise UsageError("--atom is required when the data sidecar does not name the atom")
    atom = resolve_atom(str(atom_ref))
    prior = float(_need(cfg, "prior", "for fit"))
    result = iterate_corr_length(data, family, atom, _geom(cfg), prior, rel_tol=float(cfg["rel_tol"]),
                                 max_iter=int(cfg["max_iter"]), e_cutoff=cfg.get("ecut"))
    doc = {"format": "collapse-radiance/fit-result", "format_version": 1, "tool_version": __version__}
    doc.update(_meta(cfg))
    doc["atom"] = atom.symbol
    doc["truth"] = truth
    doc.update(result.to_dict())
    if cfg["format"] == "csv":
        columns = {
            "iteration": list(range(len(result.iterations))),
            "prior_m": [p for p, _ in result.iterations],
            "posterior_m": [q for _, q in result.iterations],
        }
        meta = {k: v for k, v in doc.items() if k not in ("format", "format_version", "tool_version", "iterations")}
        _emit(write_table_csv(columns, "fit-result", meta), cfg)
    else:
        _emit(dumps_json(doc), cfg)
    return 0


COMMANDS = {
    "spectrum": cmd_spectrum,
    "compare": cmd_compare,
    "band": cmd_band,
    "zsurvey": cmd_zsurvey,
    "synth": cmd_synth,
    "fit": cmd_fit,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        parser.error(f"cannot read config: {exc}")
    try:
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        parser.error(str(exc))
    except (CollapseRadianceError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"collapse-radiance: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
