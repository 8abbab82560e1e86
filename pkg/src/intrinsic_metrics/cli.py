"""Command-line front end.

Settings come from flags, an optional ``key=value`` file (``--config``) and
built-in defaults, in that order of precedence.  Exit codes: 0 success,
2 configuration error, 3 I/O error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field

from . import constants as _c
from . import experiments as _x
from .errors import NumericalError, ParameterError
from .metrics import MetricConfig

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL = 0, 2, 3, 4
COMMANDS = ("validate", "theorem1", "rate", "optimize", "constants", "appendixB")


class ConfigError(Exception):
    pass


def _int(text):
    return int(text)


def _int_list(text):
    items = [s for s in str(text).replace(" ", "").split(",") if s]
    if not items:
        raise ValueError("empty list")
    return tuple(int(s) for s in items)


def _float(text):
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("not finite")
    return v


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return v


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true/false")


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return parse


# key -> (parser, default, help)
KEYS = {
    "n": (_int, None, "ambient dimension"),
    "j": (_int, None, "index of the intrinsic volume"),
    "N": (_int_list, None, "vertex count(s), comma separated"),
    "reps": (_int, 100, "replicates per N"),
    "seed": (_seed, 0, "master seed (64-bit)"),
    "beta": (_float, 0.0, "beta parameter"),
    "scaling": (_choice(*_x.SCALING_MODES), "asymptotic", "scaling mode"),
    "subspaces": (_int, 64, "Grassmannian samples per estimate"),
    "volume_samples": (_int, 2000, "inner Monte Carlo samples per subspace"),
    "exact_low_dim": (_bool, True, "use exact low-dimensional paths"),
    "budget": (_int, 200, "optimizer steps"),
    "samples": (_int, 100_000, "samples per validation check"),
    "trend": (_int_list, None, "dimensions for the large-n constant trend"),
    "threads": (_int, None, "worker threads (default: $INTRINSIC_METRICS_THREADS or all cores)"),
    "output": (str, None, "output path (default: stdout)"),
    "format": (_choice("csv", "json"), "csv", "output format"),
}

REQUIRED = {
    "validate": (),
    "theorem1": ("n", "j", "N"),
    "rate": ("n", "j", "N"),
    "optimize": ("n", "j", "N"),
    "constants": ("n",),
    "appendixB": ("N",),
}


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)

    @property
    def output_path(self):
        return self.params.get("output")

    @property
    def format(self):
        return self.params["format"]

    @property
    def seed(self):
        return self.params["seed"]

    def metric_config(self):
        p = self.params
        return MetricConfig(p["subspaces"], p["volume_samples"], exact_low_dim=p["exact_low_dim"])

    def spec(self):
        p = self.params
        return _x.ExperimentSpec(p["n"], p["j"], p["N"], p["reps"], p["seed"], self.metric_config(), p["scaling"])


def _convert(key, raw, origin):
    if key not in KEYS:
        raise ConfigError(f"unknown key {key!r} in {origin}; valid keys: {', '.join(KEYS)}")
    try:
        return KEYS[key][0](raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r} in {origin}: {raw!r} ({exc})") from None


def parse_config_text(text, origin="config file"):
    """``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin} line {lineno}: expected key=value")
        key, raw = (s.strip() for s in line.split("=", 1))
        out[key] = _convert(key, raw, f"{origin} line {lineno}")
    return out


def _build_parser():
    parser = argparse.ArgumentParser(prog="intrinsic-metrics", description="Intrinsic volume metric experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key=value file; flags override it")
        for key, (_, _, helptext) in KEYS.items():
            p.add_argument(f"--{key}", dest=key, default=None, help=helptext)
    return parser


def parse_config(argv, file_text=None):
    """Resolve flags, file values and defaults into a :class:`RunConfig`.

    ``file_text`` replaces reading ``--config`` from disk (for tests).
    """
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        if exc.code == 0:
            raise
        raise ConfigError("invalid command line") from None
    params = {k: d for k, (_, d, _) in KEYS.items()}
    if file_text is None and args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config!r}: {exc}") from None
    if file_text is not None:
        params.update(parse_config_text(file_text))
    for key in KEYS:
        raw = getattr(args, key)
        if raw is not None:
            params[key] = _convert(key, raw, f"--{key}")
    missing = [k for k in REQUIRED[args.command] if params.get(k) is None]
    if missing:
        raise ConfigError(f"{args.command} requires: {', '.join('--' + k for k in missing)}")
    cfg = RunConfig(args.command, params)
    _validate(cfg)
    return cfg


def _validate(cfg):
    """Per-command checks that must pass before any computation."""
    p = cfg.params
    try:
        if cfg.command in ("theorem1", "rate"):
            cfg.spec()
        elif cfg.command == "optimize":
            cfg.metric_config()
            if len(p["N"]) != 1:
                raise ParameterError("optimize takes a single N")
            _x._check_dims(p["n"], p["j"], p["N"][0])
            if p["budget"] < 0:
                raise ParameterError("budget must be >= 0")
        elif cfg.command == "constants":
            if p["n"] < 1:
                raise ParameterError("n must be >= 1")
            if p["j"] is not None and not 1 <= p["j"] <= p["n"]:
                raise ParameterError("need 1 <= j <= n")
        elif cfg.command == "appendixB":
            if min(p["N"]) < 1 or not p["beta"] > -1:
                raise ParameterError("need N >= 1 and beta > -1")
        elif cfg.command == "validate" and p["samples"] < 2:
            raise ParameterError("samples must be >= 2")
        if p["threads"] is not None and p["threads"] < 1:
            raise ParameterError("threads must be >= 1")
        if p["threads"] is None:
            _x.default_workers()
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None


# ------------------------------------------------------------------ runs

@dataclass
class Table:
    header: tuple
    rows: list
    meta: dict


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _run(cfg):
    p = cfg.params
    workers = p["threads"] if p["threads"] is not None else _x.default_workers()
    meta = {"command": cfg.command, "parameters": {k: (list(v) if isinstance(v, tuple) else v) for k, v in p.items()}}
    if cfg.command in ("theorem1", "rate"):
        res = _x.theorem1_run(cfg.spec(), workers=workers, compare_unscaled=cfg.command == "rate")
        meta.update(slope=res.slope, slope_stderr=res.slope_stderr, target_slope=-2.0 / (p["n"] - 1), flags=list(res.flags))
        header = ("N", "mean", "stderr", "bound", "ratio")
        rows = [(r.N, r.mean, r.stderr, r.bound, r.ratio) for r in res.rows]
        if cfg.command == "rate":
            header += ("unscaled", "improvement", "improvement_stderr")
            rows = [row + (c.unscaled, c.improvement, c.stderr) for row, c in zip(rows, res.comparison)]
        return Table(header, rows, meta)
    if cfg.command == "validate":
        report = _x.lemma_validation_suite(p["seed"], p["samples"])
        meta["all_passed"] = all(r.passed for r in report)
        return Table(("check", "params", "statistic", "threshold", "passed", "detail"),
                     [(r.name, r.params, r.statistic, r.threshold, r.passed, r.detail) for r in report], meta)
    if cfg.command == "optimize":
        n, j, N = p["n"], p["j"], p["N"][0]
        trace = []
        poly, est = _x.best_approx_search(n, j, N, p["budget"], cfg.metric_config(), p["seed"], trace)
        meta.update(objective=est.value, objective_stderr=est.std_error, accepted=len(trace) - 1,
                    start_objective=trace[0])
        return Table(tuple(f"x{i + 1}" for i in range(n)), [tuple(map(float, v)) for v in poly.vertices], meta)
    if cfg.command == "constants":
        if p["trend"] is not None:
            rows = _c.appendix_a_trend(p["trend"], p["beta"])
            meta["max_bounded_constant"] = max(r[2] for r in rows)
            return Table(("n", "ratio", "bounded_constant"), rows, meta)
        return Table(("name", "value"), _constant_rows(p["n"], p["beta"], p["j"]), meta)
    rows = []
    for N in p["N"]:
        value = _x.appendixB_expectation(N, p["beta"])
        closed = 2.0 * (N - 1) / (N + 1) if p["beta"] == 0 else ""
        rows.append((N, p["beta"], value, closed))
    return Table(("N", "beta", "expectation", "closed_form"), rows, meta)


def _constant_rows(n, beta, j):
    rows = []

    def add(name, fn):
        try:
            rows.append((name, fn()))
        except ParameterError:
            pass

    add("omega_n", lambda: _c.omega(n))
    add("kappa_n", lambda: _c.kappa(n))
    add("d", lambda: _c.d_const(n, beta))
    add("A", lambda: _c.affentranger_A(n, beta))
    add("A_over_omega", lambda: _c.gamma_ratio(n, beta))
    if j is not None:
        add("flag", lambda: _c.flag_coefficient(n, j))
        add("V_j_ball", lambda: _c.ball_intrinsic_volume(n, j))
        add("chern_l1", lambda: _c.chern_constant(n, j, 1))
    return rows


def emit(table, cfg, stdout=None):
    """Write CSV (plus a sidecar ``.json`` spec when writing a file) or one JSON document."""
    stdout = sys.stdout if stdout is None else stdout
    path = cfg.output_path
    if cfg.format == "json":
        doc = {"spec": table.meta, "columns": list(table.header),
               "rows": [dict(zip(table.header, (_json_value(v) for v in r))) for r in table.rows]}
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        _write(path, text, stdout)
        return
    buf = io.StringIO()
    buf.write(",".join(table.header) + "\n")
    for r in table.rows:
        buf.write(",".join(_csv_field(_fmt(v)) for v in r) + "\n")
    _write(path, buf.getvalue(), stdout)
    if path is not None:
        _write(path + ".json", json.dumps(table.meta, indent=2, sort_keys=True) + "\n", stdout)


def _csv_field(s):
    if any(c in s for c in ',"\n'):
        return '"' + s.replace('"', '""') + '"'
    return s


def _json_value(v):
    if isinstance(v, float):
        return float(f"{v:.10g}") if math.isfinite(v) else None
    return v


def _write(path, text, stdout):
    if path is None:
        stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        table = _run(cfg)
    except NumericalError as exc:
        print(f"numerical failure: {exc} {getattr(exc, 'diagnostics', '')}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        emit(table, cfg)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    if cfg.command == "validate" and not table.meta["all_passed"]:
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
