"""Command-line front end: reproducible runs of the checks and probes.

Every subcommand resolves its settings in one pass (flag beats config file
beats built-in default), echoes the effective configuration into the JSON
report it writes, and drops a rendered PNG next to the delimited output.
Exit codes are a stable contract: 0 for a clean pass, 2 when a gated
quantity misses its tolerance, 1 for usage or runtime errors. Re-running a
command with the same effective configuration reproduces every report byte
for byte except the timestamp field.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .asymptotics import cif_check, cwikel_probe, l2_blowup_probe
from .errors import (
    BuildFailureError,
    ContractViolationError,
    InvalidFunctionError,
    InvalidParameterError,
    UnsupportedDimensionError,
)
from .figures import (
    render_cif_figure,
    render_lemmas_figure,
    render_norms_figure,
    render_probe_figure,
    render_spectrum_figure,
)
from .lemmalab import DEFAULT_SEED, SUITE_NAMES, run_suite
from .orlicz import MEMBERSHIP_LADDER, TorusFunction, membership_report
from .torusop import (
    LatticeBasis,
    build_asymmetric,
    build_commutator,
    build_multiplication,
    build_symmetric,
    save_matrix,
    singvals,
    spectrum_csv,
)

__all__ = ["main"]

_FAMILIES = (
    "constant",
    "cosine_mode",
    "shifted_cosine",
    "box_indicator",
    "radial_logspike",
    "custom",
)

_ERRORS = (
    InvalidParameterError,
    InvalidFunctionError,
    ContractViolationError,
    BuildFailureError,
    UnsupportedDimensionError,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; the contract here reserves
    # 2 for quantitative failures, so usage problems are rerouted to 1
    def error(self, message):
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# option plumbing


def _parse_floats(text):
    try:
        values = tuple(float(tok) for tok in str(text).split(",") if tok.strip())
    except ValueError:
        raise InvalidParameterError(f"could not parse number list {text!r}")
    if not values:
        raise InvalidParameterError(f"empty number list {text!r}")
    return values


def _parse_ints(text):
    return tuple(int(v) for v in _parse_floats(text))


def _parse_seed(text):
    try:
        return int(str(text), 0)
    except ValueError:
        raise InvalidParameterError(f"could not parse seed {text!r} (decimal or 0x hex)")


def _parse_params(pairs):
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise InvalidParameterError(f"--param expects key=value, got {pair!r}")
        key, _, raw = pair.partition("=")
        try:
            out[key.strip()] = float(raw)
        except ValueError:
            out[key.strip()] = raw.strip()
    return out


_CONVERTERS = {
    "d": int,
    "jobs": int,
    "oversample": int,
    "value": float,
    "shift": float,
    "cap": float,
    "cutoff": float,
    "tolerance": float,
    "weight_exponent": float,
    "magnitude": float,
    "schedule": _parse_floats,
    "ladder": _parse_ints,
    "mode": _parse_ints,
    "seed": _parse_seed,
    "fast_diagonal": bool,
}

_BOOL_KEYS = ("fast_diagonal",)


def _load_config_file(path):
    if path is None:
        return {}
    parser = configparser.ConfigParser()
    loaded = parser.read(path)
    if not loaded:
        raise InvalidParameterError(f"config file not found or unreadable: {path}")
    return {section: dict(parser.items(section)) for section in parser.sections()}


def _resolve(args, command, defaults):
    """Flag > config-file section (with [global] fallback) > built-in default."""
    sections = _load_config_file(getattr(args, "config", None))
    merged = dict(defaults)
    for section in ("global", command):
        for key, raw in sections.get(section, {}).items():
            key = key.replace("-", "_")
            if key not in merged:
                raise InvalidParameterError(f"unknown config key {key!r} in [{section}]")
            if key in _BOOL_KEYS:
                merged[key] = raw.strip().lower() in ("1", "true", "yes", "on")
            elif key in _CONVERTERS:
                merged[key] = _CONVERTERS[key](raw)
            else:
                merged[key] = raw
    for key in defaults:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    merged["command"] = command
    return merged


def _echo(cfg):
    out = {}
    for key, value in sorted(cfg.items()):
        if isinstance(value, tuple):
            out[key] = list(value)
        elif isinstance(value, Path):
            out[key] = str(value)
        else:
            out[key] = value
    return out


def _out_dir(cfg) -> Path:
    path = Path(cfg.get("out") or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(payload, path: Path):
    path.write_text(json.dumps(payload, sort_keys=True, indent=2, default=_jsonable) + "\n")


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not serializable: {type(obj)!r}")


def _write_csv(header, rows, path: Path):
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, float):
                cells.append(repr(cell))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")


def _report_payload(cfg, body: dict) -> dict:
    return {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "effective_config": _echo(cfg),
        **body,
    }


# ---------------------------------------------------------------------------
# function construction


def _compile_expression(expr, d):
    code = compile(str(expr), "<expression>", "eval")
    names = ("x", "y", "z")[:d]

    def fn(*coords):
        env = {"np": np, "pi": math.pi, "e": math.e}
        env.update(zip(names, coords))
        # non-finite results are caught downstream with a clear message,
        # so numpy's own warning would only duplicate it
        with np.errstate(all="ignore"):
            return eval(code, {"__builtins__": {}}, env)

    return fn


def _make_function(cfg) -> TorusFunction:
    family = cfg.get("family")
    if not family:
        raise InvalidParameterError("--family is required (or set it in the config file)")
    if family not in _FAMILIES:
        raise InvalidParameterError(
            f"unknown family {family!r}; options: {', '.join(_FAMILIES)}")
    d = int(cfg.get("d") or 1)
    extra = _parse_params(cfg.get("param"))
    if family == "constant":
        value = cfg.get("value")
        return TorusFunction.constant(1.0 if value is None else float(value), d=d)
    if family == "cosine_mode":
        mode = cfg.get("mode") or (1,) + (0,) * (d - 1)
        return TorusFunction.cosine_mode(tuple(mode), d=d)
    if family == "shifted_cosine":
        shift = cfg.get("shift")
        if shift is None:
            raise InvalidParameterError("shifted_cosine needs --shift")
        mode = cfg.get("mode")
        return TorusFunction.shifted_cosine(float(shift), d=d,
                                            mode=None if mode is None else tuple(mode))
    if family == "box_indicator":
        return TorusFunction.box_indicator(d=d)
    if family == "radial_logspike":
        cap = float(cfg.get("cap") or extra.get("cap", 1.0e6))
        exponent = float(extra.get("exponent", 1.0))
        return TorusFunction.radial_logspike(cap=cap, exponent=exponent, d=d)
    expr = cfg.get("expression")
    if not expr:
        raise InvalidParameterError("custom family needs --expression")
    return TorusFunction.custom_grid(_compile_expression(expr, d), d=d,
                                     params={"expression": str(expr)})


# ---------------------------------------------------------------------------
# subcommands


def _cmd_cif(cfg) -> int:
    f = _make_function(cfg)
    report = cif_check(
        f,
        int(cfg.get("d") or 1),
        cfg["schedule"],
        tolerance=cfg.get("tolerance"),
        fast_diagonal=cfg.get("fast_diagonal"),
        oversample=int(cfg.get("oversample") or 4),
    )
    out = _out_dir(cfg)
    fmt = cfg.get("format", "both")
    if fmt in ("json", "both"):
        _write_json(_report_payload(cfg, report.as_dict()), out / "cif_report.json")
    if fmt in ("csv", "both"):
        rows = [
            (r.R, r.dim, r.keep_pos, r.keep_neg,
             r.est_pos.alpha_hat, r.est_neg.alpha_hat,
             r.est_pos.residual, r.est_neg.residual)
            for r in report.rungs
        ]
        _write_csv(
            ("R", "dim", "keep_pos", "keep_neg", "est_pos", "est_neg",
             "residual_pos", "residual_neg"),
            rows, out / "cif_rungs.csv")
    render_cif_figure(report, out / "cif_report.png")
    for part, extr, target, ok in (
        ("positive", report.extrapolated_pos, report.target_pos, report.verdict_pos),
        ("negative", report.extrapolated_neg, report.target_neg, report.verdict_neg),
    ):
        state = "ok" if ok else "MISS"
        print(f"cif {part}: extrapolated {extr:.6f} target {target:.6f} [{state}]")
    print(f"cif verdict: {'pass' if report.passed else 'fail'} "
          f"(tolerance {report.tolerance:g}, reports in {out})")
    return 0 if report.passed else 2


def _selected_suites(cfg):
    only = cfg.get("only")
    if not only:
        return SUITE_NAMES
    names = tuple(tok.strip() for tok in str(only).split(",") if tok.strip())
    for name in names:
        if name not in SUITE_NAMES:
            raise InvalidParameterError(
                f"unknown suite {name!r}; options: {', '.join(SUITE_NAMES)}")
    return names


def _cmd_lemmas(cfg) -> int:
    names = _selected_suites(cfg)
    seed = cfg.get("seed", DEFAULT_SEED)
    jobs = max(1, int(cfg.get("jobs") or 1))
    if jobs > 1:
        # suites are independent; assembly keeps the requested order
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            verdicts = list(pool.map(lambda name: run_suite(name, seed), names))
    else:
        verdicts = [run_suite(name, seed) for name in names]
    out = _out_dir(cfg)
    fmt = cfg.get("format", "both")
    if fmt in ("json", "both"):
        _write_json(_report_payload(cfg, {"verdicts": verdicts}), out / "lemmas_report.json")
    if fmt in ("csv", "both"):
        rows = [(v["test"], v["worst_case"], v["threshold"], v["pass"]) for v in verdicts]
        _write_csv(("test", "worst_case", "threshold", "pass"), rows,
                   out / "lemmas_summary.csv")
    render_lemmas_figure(verdicts, out / "lemmas_report.png")
    for v in verdicts:
        state = "pass" if v["pass"] else "FAIL"
        print(f"{v['test']}: worst {v['worst_case']:.3e} vs threshold "
              f"{v['threshold']:.3e} [{state}]")
    return 0 if all(v["pass"] for v in verdicts) else 2


def _cmd_norms(cfg) -> int:
    f = _make_function(cfg)
    report = membership_report(f, cfg.get("ladder") or MEMBERSHIP_LADDER)
    out = _out_dir(cfg)
    fmt = cfg.get("format", "both")
    if fmt in ("json", "both"):
        _write_json(_report_payload(cfg, report), out / "norms_report.json")
    if fmt in ("csv", "both"):
        rows = [(row["res"], row["l2"], row["lm"]) for row in report["ladder"]]
        _write_csv(("res", "l2", "lm"), rows, out / "norms_ladder.csv")
    render_norms_figure(report, out / "norms_report.png")
    for row in report["ladder"]:
        print(f"res {row['res']:>5}: l2 {row['l2']:.6f}  lm {row['lm']:.6f}")
    print(f"membership: in_L2={report['in_L2']} in_LM={report['in_LM']}")
    return 0


def _cmd_probe(cfg) -> int:
    kind = cfg.get("kind")
    if kind not in ("cwikel", "blowup"):
        raise InvalidParameterError("--kind must be cwikel or blowup")
    out = _out_dir(cfg)
    fmt = cfg.get("format", "both")
    if kind == "cwikel":
        f = _make_function(cfg)
        report = cwikel_probe(f, int(cfg.get("d") or 1), cfg["schedule"])
        rows = [(r["R"], r["dim"], r["quasinorm"], r["ratio"]) for r in report["rows"]]
        header = ("R", "dim", "quasinorm", "ratio")
        for r in report["rows"]:
            print(f"R {r['R']:>7g}: dim {r['dim']:>6} ratio {r['ratio']:.6f}")
    else:
        report = l2_blowup_probe(int(cfg.get("d") or 2),
                                 float(cfg.get("cap") or 1.0e6),
                                 cfg["schedule"])
        header = ("R", "dim", "hs", "growth", "control_hs", "control_growth")
        rows = []
        for spike_row, ctrl_row in zip(report["rows"], report["control_rows"]):
            rows.append((
                spike_row["R"], spike_row["dim"], spike_row["hs"],
                "" if spike_row["growth"] is None else spike_row["growth"],
                ctrl_row["hs"],
                "" if ctrl_row["growth"] is None else ctrl_row["growth"],
            ))
            growth = spike_row["growth"]
            shown = "" if growth is None else f" growth {growth:+.4f}"
            print(f"R {spike_row['R']:>5g}: hs {spike_row['hs']:.6f}{shown}")
        print(f"strictly increasing: {report['strictly_increasing']}; "
              f"control converging: {report['control_converging']}")
    if fmt in ("json", "both"):
        _write_json(_report_payload(cfg, report), out / "probe_report.json")
    if fmt in ("csv", "both"):
        _write_csv(header, rows, out / "probe_rows.csv")
    render_probe_figure(report, out / "probe_report.png")
    return 0


_BUILDERS = {
    "symmetric": build_symmetric,
    "asymmetric": build_asymmetric,
    "multiplication": build_multiplication,
    "commutator": build_commutator,
}


def _cmd_spectrum(cfg) -> int:
    f = _make_function(cfg)
    build = cfg.get("build") or "symmetric"
    if build not in _BUILDERS:
        raise InvalidParameterError(
            f"unknown build {build!r}; options: {', '.join(sorted(_BUILDERS))}")
    basis = LatticeBasis(f.d, float(cfg.get("cutoff") or 32.0))
    kwargs = {}
    if build == "asymmetric" and cfg.get("weight_exponent") is not None:
        kwargs["weight_exponent"] = float(cfg["weight_exponent"])
    op = _BUILDERS[build](f, basis, **kwargs)
    seq = singvals(op)
    values = seq.values
    out = _out_dir(cfg)
    fmt = cfg.get("format", "both")
    if fmt in ("json", "both"):
        body = {
            "build": build,
            "dim": basis.size,
            "top": [float(v) for v in values[:16]],
            "hs_norm": float(np.linalg.norm(values)),
        }
        _write_json(_report_payload(cfg, body), out / "spectrum_report.json")
    if fmt in ("csv", "both"):
        spectrum_csv(seq, out / "spectrum.csv")
    if cfg.get("save_matrix"):
        save_matrix(op, cfg["save_matrix"])
    render_spectrum_figure(values, out / "spectrum_report.png",
                           title=f"{build} build of {f.family}, dim {basis.size}")
    print(f"spectrum: dim {basis.size}, top value {values[0]:.6f}, reports in {out}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_common(sub):
    sub.add_argument("--config", help="INI file with [global] and per-command sections")
    sub.add_argument("--jobs", type=int, help="parallel workers where trials allow")
    sub.add_argument("--out", help="output directory (default: current)")
    sub.add_argument("--format", choices=("json", "csv", "both"), dest="format")
    sub.add_argument("--seed", type=_parse_seed, help="decimal or 0x hex seed")


def _add_function_flags(sub):
    sub.add_argument("--d", type=int, help="torus dimension (1, 2 or 3)")
    sub.add_argument("--family", choices=_FAMILIES)
    sub.add_argument("--value", type=float, help="constant family value")
    sub.add_argument("--shift", type=float, help="shifted_cosine offset")
    sub.add_argument("--mode", type=_parse_ints, help="cosine mode, e.g. 1,0")
    sub.add_argument("--cap", type=float, help="radial_logspike cap")
    sub.add_argument("--expression", help="custom family formula in x[,y,z]")
    sub.add_argument("--param", action="append",
                     help="extra family parameter key=value (repeatable)")


def _build_parser() -> _Parser:
    parser = _Parser(prog="ciflab",
                     description="Spectral limit checks on the flat torus")
    commands = parser.add_subparsers(dest="command", required=True)

    cif = commands.add_parser("cif", help="run the limit check",
                              prog="ciflab cif")
    _add_common(cif)
    _add_function_flags(cif)
    cif.add_argument("--schedule", type=_parse_floats, help="cutoffs, e.g. 256,512,1024")
    cif.add_argument("--tolerance", type=float)
    cif.add_argument("--oversample", type=int)
    cif.add_argument("--fast-diagonal", dest="fast_diagonal",
                     action="store_true", default=None,
                     help="force the diagonal route (constant family only)")

    lemmas = commands.add_parser("lemmas", help="run the seeded lemma suites",
                                 prog="ciflab lemmas")
    _add_common(lemmas)
    lemmas.add_argument("--only", help="comma list of suites "
                                       f"({', '.join(SUITE_NAMES)})")

    norms = commands.add_parser("norms", help="membership ladder for a function",
                                prog="ciflab norms")
    _add_common(norms)
    _add_function_flags(norms)
    norms.add_argument("--ladder", type=_parse_ints, help="resolutions, e.g. 128,256,512,1024")

    probe = commands.add_parser("probe", help="bound-constant or blow-up probe",
                                prog="ciflab probe")
    _add_common(probe)
    _add_function_flags(probe)
    probe.add_argument("--kind", choices=("cwikel", "blowup"))
    probe.add_argument("--schedule", type=_parse_floats)

    spectrum = commands.add_parser("spectrum", help="raw spectrum dump",
                                   prog="ciflab spectrum")
    _add_common(spectrum)
    _add_function_flags(spectrum)
    spectrum.add_argument("--build",
                          choices=("symmetric", "asymmetric", "multiplication", "commutator"))
    spectrum.add_argument("--cutoff", type=float)
    spectrum.add_argument("--weight-exponent", dest="weight_exponent", type=float)
    spectrum.add_argument("--save-matrix", dest="save_matrix",
                          help="also write the binary matrix container here")
    return parser


_DEFAULTS = {
    "cif": {
        "config": None, "jobs": 1, "out": ".", "format": "both", "seed": DEFAULT_SEED,
        "d": 1, "family": None, "value": None, "shift": None, "mode": None,
        "cap": None, "expression": None, "param": None,
        "schedule": (256.0, 512.0, 1024.0, 2048.0), "tolerance": None,
        "oversample": 4, "fast_diagonal": None,
    },
    "lemmas": {
        "config": None, "jobs": 1, "out": ".", "format": "both", "seed": DEFAULT_SEED,
        "only": None,
    },
    "norms": {
        "config": None, "jobs": 1, "out": ".", "format": "both", "seed": DEFAULT_SEED,
        "d": 1, "family": None, "value": None, "shift": None, "mode": None,
        "cap": None, "expression": None, "param": None, "ladder": None,
    },
    "probe": {
        "config": None, "jobs": 1, "out": ".", "format": "both", "seed": DEFAULT_SEED,
        "d": None, "family": None, "value": None, "shift": None, "mode": None,
        "cap": None, "expression": None, "param": None,
        "kind": None, "schedule": None,
    },
    "spectrum": {
        "config": None, "jobs": 1, "out": ".", "format": "both", "seed": DEFAULT_SEED,
        "d": 1, "family": None, "value": None, "shift": None, "mode": None,
        "cap": None, "expression": None, "param": None,
        "build": None, "cutoff": None, "weight_exponent": None, "save_matrix": None,
    },
}

_HANDLERS = {
    "cif": _cmd_cif,
    "lemmas": _cmd_lemmas,
    "norms": _cmd_norms,
    "probe": _cmd_probe,
    "spectrum": _cmd_spectrum,
}


def _probe_defaults(cfg):
    if cfg.get("kind") == "blowup":
        if cfg.get("d") is None:
            cfg["d"] = 2
        if cfg.get("schedule") is None:
            cfg["schedule"] = (16.0, 24.0, 32.0)
    else:
        if cfg.get("d") is None:
            cfg["d"] = 1
        if cfg.get("schedule") is None:
            cfg["schedule"] = (256.0, 512.0, 1024.0, 2048.0)
    return cfg


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _resolve(args, args.command, _DEFAULTS[args.command])
        if args.command == "probe":
            cfg = _probe_defaults(cfg)
        return _HANDLERS[args.command](cfg)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
