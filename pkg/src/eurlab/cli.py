"""Command-line front end.

Usage: ``eurlab SUBCOMMAND [--config FILE] [--key value ...] [--set key=value ...]``.
Config files hold ``key = value`` lines, optionally grouped under ``[section]``
headers; sections only organize the file. Flags override file values and
``EURLAB_SEED`` overrides any seed.

Exit codes: 0 success, 1 I/O or configuration error, 2 validation failure,
3 bound violation found by the falsifier.
"""
from __future__ import annotations

import argparse
import configparser
import difflib
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .bounds import BoundInput, SmoothParams, eur_modified, eur_modified_smooth, eur_unmodified
from .continuous_povm import analytic_overlap, slepian_overlap_oracle
from .operators import validate_povm
from .povm_io import read_povm
from .scenarios.config import DEFAULT_SEED, time_frequency_config
from .scenarios.output import fmt, write_csv, write_json
from .states import ChannelModel, GaussianBiphoton, TmsvSpec, angular_frequency

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_VIOLATION = 0, 1, 2, 3


class ConfigError(Exception):
    pass


def _opt_float(text):
    return None if str(text).lower() in ("none", "") else float(text)


def _bool(text):
    t = str(text).lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _dims(text):
    out = []
    for part in str(text).split(","):
        d = tuple(int(v) for v in part.strip().lower().split("x"))
        if len(d) != 3:
            raise ValueError(f"dims entry {part!r} is not AxBxE")
        out.append(d)
    return tuple(out)


_SOURCE = {
    "sigma_coh": (float, 6e-9),
    "sigma_cor": (float, 2e-12),
    "center_wavelength": (float, 1550e-9),
    "time_std_convention": (str, "paper_calibrated"),
    "time_bin": (float, 20e-12),
    "freq_bin": (_opt_float, None),
    "c_target": (float, 1e-3),
    "rep_rate": (float, 55.6e6),
    "wavelength_lo": (float, 1520e-9),
    "wavelength_hi": (float, 1610e-9),
    "time_window": (_opt_float, None),
    "loss_db_per_km": (float, 0.2),
    "c_less_override": (_opt_float, None),
    "seed": (int, DEFAULT_SEED),
}

SCHEMAS = {
    "bound": {
        "p_z_null": (float, 0.0),
        "p_x_null": (float, 0.0),
        "c_less": (float, 1e-3),
        "h_max": (float, 1.0),
        "epsilon": (float, 0.0),
    },
    "overlap": {
        "delta_omega": (float, None),
        "delta_t": (float, None),
        "oracle": (_bool, False),
    },
    "contour": {
        "c_less": (float, 1e-3),
        "h_max": (float, 1.0),
        "grid": (int, 101),
        "frontier_p_z": (float, 1e-3),
    },
    "tf-scan": {
        **_SOURCE,
        "d_min": (float, 0.0),
        "d_max": (float, 5.0),
        "d_step": (float, 0.1),
        "epsilon": (float, 0.0),
    },
    "cv-sat": {
        "antisqueezing_db": (float, 19.3),
        "vacuum_variance_convention": (str, "half_variance"),
        "range_lo": (float, -61.6),
        "range_hi": (float, 61.6),
        "bin_width": (float, 0.08),
        "h_max": (float, 1.0),
        "mean_shift": (float, 0.0),
        "target_p_sat": (_opt_float, None),
    },
    "attack-sim": {
        **_SOURCE,
        "distance_km": (float, 0.0),
        "eve_bin_width": (_opt_float, 1e5),
        "n_trials": (int, 20_000),
        "attack_fraction": (float, 0.999),
        "n_batches": (int, 20),
    },
    "falsify": {
        "n_states": (int, 1000),
        "n_measurements": (int, 1),
        "dims": (_dims, ((2, 2, 2),)),
        "seed": (int, DEFAULT_SEED),
        "lemma_trials": (int, 200),
        "hmax_iters": (int, 300),
        "eve_iters": (int, 200),
    },
    "check-povm": {
        "path": (str, None),
        "tol_herm": (float, 1e-9),
        "tol_sum": (float, 1e-9),
        "tol_psd": (float, 1e-9),
    },
}

OUTPUT_NAMES = {
    "bound": ("bound.json", None),
    "overlap": ("overlap.json", None),
    "contour": ("fig2_contour.json", "fig2_contour.csv"),
    "tf-scan": ("tf_keyrate.json", "tf_keyrate.csv"),
    "cv-sat": ("cv_saturation.json", None),
    "attack-sim": ("nunn_attack.json", None),
    "falsify": ("falsifier.json", "falsifier_groups.csv"),
    "check-povm": ("povm_check.json", None),
}


@dataclass
class CliConfig:
    subcommand: str
    config_path: str | None = None
    overrides: list = field(default_factory=list)
    output_dir: str = "."
    format: str = "both"


def _unknown(key: str, valid) -> ConfigError:
    near = difflib.get_close_matches(key, list(valid), n=1, cutoff=0.0)
    hint = f"; nearest valid key is {near[0]!r}" if near else ""
    return ConfigError(f"unknown key {key!r}{hint}")


def read_config_file(path) -> dict:
    """Flatten a ``key = value`` file; keys may precede any section header."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[__top__]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"bad config {path}: {exc}") from None
    out = {}
    for section in parser.sections():
        for k, v in parser[section].items():
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def resolve(cfg: CliConfig) -> dict:
    """Merge defaults, file values and overrides into typed parameters."""
    schema = SCHEMAS[cfg.subcommand]
    raw = {}
    if cfg.config_path:
        raw.update(read_config_file(cfg.config_path))
    for k, v in cfg.overrides:
        raw[k.replace("-", "_")] = v
    if "seed" in schema and os.environ.get("EURLAB_SEED"):
        raw["seed"] = os.environ["EURLAB_SEED"]
    params = {k: default for k, (_, default) in schema.items()}
    for k, v in raw.items():
        if k not in schema:
            raise _unknown(k, schema)
        conv = schema[k][0]
        try:
            params[k] = conv(v)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {k!r}: {exc}") from None
    missing = [k for k, v in params.items() if v is None and schema[k][1] is None and schema[k][0] is not _opt_float]
    if missing:
        raise ConfigError(f"missing required parameter(s): {', '.join(missing)}")
    return params


# Subcommands -------------------------------------------------------------------


def _tf_config(p: dict, distances):
    src = GaussianBiphoton(
        p["sigma_coh"],
        p["sigma_cor"],
        angular_frequency(p["center_wavelength"]),
        p["time_std_convention"],
    )
    return time_frequency_config(
        time_bin=p["time_bin"],
        freq_bin=p["freq_bin"],
        c_target=p["c_target"],
        rep_rate=p["rep_rate"],
        wavelengths=(p["wavelength_lo"], p["wavelength_hi"]),
        time_window=p["time_window"],
        source=src,
        channel=ChannelModel(p["loss_db_per_km"]),
        distances_km=distances,
        c_less_override=p["c_less_override"],
        seed=p["seed"],
        smoothing=SmoothParams(p.get("epsilon", 0.0)),
    )


def _run_bound(p):
    inp = BoundInput(p["p_z_null"], p["p_x_null"], p["c_less"], p["h_max"])
    res = eur_modified_smooth(inp, SmoothParams(p["epsilon"])) if p["epsilon"] else eur_modified(inp)
    print(f"raw bound: {fmt(res.raw_bound)} bits")
    print(f"clamped bound: {fmt(res.clamped_bound)} bits (clamped={res.clamped}, dominant={res.dominant_term})")
    out = dict(res.to_dict(), unmodified_bound_bits=eur_unmodified(p["c_less"], p["h_max"]))
    return EXIT_OK, out, None


def _run_overlap(p):
    val = analytic_overlap(p["delta_omega"], p["delta_t"])
    out = {"overlap": val, "product_over_2pi": p["delta_omega"] * p["delta_t"] / (2 * math.pi)}
    print(f"overlap: {fmt(val)}")
    if p["oracle"]:
        out["oracle"] = slepian_overlap_oracle(p["delta_omega"], p["delta_t"])
        print(f"oracle: {fmt(out['oracle'])}")
    return EXIT_OK, out, None


def _run_contour(p):
    from .scenarios.contour import HEADER, fig2_contour

    res = fig2_contour(p["c_less"], p["h_max"], p["grid"], p["frontier_p_z"])
    print(f"equal-null zero crossing: {fmt(res.equal_null_crossing)}")
    print(f"p_x frontier at p_z={fmt(res.frontier_p_z)}: {fmt(res.frontier_p_x)}")
    return EXIT_OK, res.summary(), (HEADER, res.rows)


def _run_tf_scan(p):
    import numpy as np

    from .scenarios.keyrate import HEADER, tf_keyrate_scan

    n = int(round((p["d_max"] - p["d_min"]) / p["d_step"])) + 1
    distances = tuple(float(x) for x in np.round(p["d_min"] + p["d_step"] * np.arange(n), 12))
    scan = tf_keyrate_scan(_tf_config(p, distances))
    s = scan.summary()
    print(f"key rate at {fmt(distances[0])} km: {fmt(s['rate_at_first_distance'])} bits")
    print(f"zero-rate onset: {fmt(s['zero_rate_onset_km'])} km")
    return EXIT_OK, s, (HEADER, scan.rows)


def _run_cv_sat(p):
    from .scenarios.saturation import cv_saturation_report, shift_for_saturation

    spec = TmsvSpec(p["antisqueezing_db"], p["vacuum_variance_convention"])
    shift = p["mean_shift"]
    if p["target_p_sat"] is not None:
        shift = shift_for_saturation(spec, p["range_lo"], p["range_hi"], p["target_p_sat"])
    rep = cv_saturation_report(spec, p["range_lo"], p["range_hi"], p["bin_width"], p["h_max"], shift)
    print(f"p_sat: x={fmt(rep.p_sat_x)} p={fmt(rep.p_sat_p)}; bound {fmt(rep.bound.clamped_bound)} bits; abort={rep.abort}")
    return EXIT_OK, rep.to_dict(), None


def _run_attack(p):
    from .scenarios.attack import nunn_attack_sim

    cfg = _tf_config(p, (p["distance_km"],))
    rep = nunn_attack_sim(cfg, p["eve_bin_width"], p["n_trials"], p["attack_fraction"], p["n_batches"])
    d = rep.to_dict()
    print(f"naive bound: {fmt(d['naive_bound_bits'])} bits; null-aware bound: {fmt(d['modified_bound']['clamped_bound_bits'])} bits")
    return EXIT_OK, d, None


def _run_falsify(p):
    from .scenarios.falsifier import bound_falsifier

    rep = bound_falsifier(
        p["n_states"], p["dims"], p["n_measurements"], p["seed"],
        hmax_iters=p["hmax_iters"], eve_iters=p["eve_iters"], lemma_trials=p["lemma_trials"],
    )
    d = rep.to_dict()
    print(f"instances: {rep.n_instances}; violations: {rep.n_violations}; max excess: {fmt(rep.max_excess)}")
    header = ("dims", "family", "z_outcomes", "x_outcomes", "n_instances", "max_excess", "max_search_gap")
    rows = [("x".join(map(str, g["dims"])),) + tuple(g[h] for h in header[1:]) for g in d["groups"]]
    return (EXIT_OK if rep.passed else EXIT_VIOLATION), d, (header, rows)


def _run_check_povm(p):
    from .operators import Tolerances

    povm = read_povm(p["path"])
    tol = Tolerances(herm=p["tol_herm"], sum=p["tol_sum"], psd=p["tol_psd"])
    rep = validate_povm(povm, tol)
    print(rep.describe())
    out = {
        "path": p["path"],
        "passed": rep.passed,
        "violations": [{"invariant": v.invariant, "magnitude": v.magnitude, "tolerance": v.tolerance} for v in rep.violations],
        "worst_hermiticity": rep.worst_hermiticity,
        "min_eigenvalue": rep.min_eigenvalue,
        "worst_completeness": rep.worst_completeness,
    }
    return (EXIT_OK if rep.passed else EXIT_INVALID), out, None


RUNNERS = {
    "bound": _run_bound,
    "overlap": _run_overlap,
    "contour": _run_contour,
    "tf-scan": _run_tf_scan,
    "cv-sat": _run_cv_sat,
    "attack-sim": _run_attack,
    "falsify": _run_falsify,
    "check-povm": _run_check_povm,
}


def run(cfg: CliConfig) -> int:
    if cfg.subcommand not in RUNNERS:
        print(f"error: unknown subcommand {cfg.subcommand!r}", file=sys.stderr)
        return EXIT_IO
    try:
        params = resolve(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"command: {cfg.subcommand}")
    for k in sorted(params):
        v = params[k]
        print(f"  {k} = {fmt(v) if not isinstance(v, tuple) else v}")
    print(f"seed: {params.get('seed', 'none')}")
    try:
        code, summary, table = RUNNERS[cfg.subcommand](params)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        out_dir = Path(cfg.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        json_name, csv_name = OUTPUT_NAMES[cfg.subcommand]
        envelope = {"command": cfg.subcommand, "parameters": params, "seed": params.get("seed"), "results": summary}
        if cfg.format in ("json", "both"):
            write_json(out_dir / json_name, envelope)
        if csv_name and table and cfg.format in ("csv", "both"):
            write_csv(out_dir / csv_name, *table)
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _split_overrides(tokens: list) -> list:
    pairs, i = [], 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
            i += 1
        elif i + 1 < len(tokens):
            val = tokens[i + 1]
            i += 2
        else:
            raise ConfigError(f"flag {tok} needs a value")
        pairs.append((key, val))
    return pairs


def parse_args(argv) -> CliConfig:
    parser = _Parser(prog="eurlab", description="Null-aware entropic uncertainty bounds.")
    parser.add_argument("subcommand", choices=sorted(RUNNERS))
    parser.add_argument("path", nargs="?", help="POVM file for check-povm")
    parser.add_argument("--config", dest="config_path")
    parser.add_argument("--output-dir", default=".")
    parser.add_argument("--format", choices=("csv", "json", "both"), default="both")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    ns, rest = parser.parse_known_args(argv)
    overrides = []
    for item in ns.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        overrides.append(tuple(item.split("=", 1)))
    overrides += _split_overrides(rest)
    if ns.path is not None:
        if ns.subcommand != "check-povm":
            raise ConfigError(f"unexpected argument {ns.path!r}")
        overrides.append(("path", ns.path))
    if ns.subcommand == "contour":
        overrides = [("grid" if k == "grid-n" else k, v) for k, v in overrides]
    return CliConfig(ns.subcommand, ns.config_path, overrides, ns.output_dir, ns.format)


def main(argv=None) -> int:
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
