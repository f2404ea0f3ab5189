"""Command-line experiment runner.

Every subcommand takes its parameters as flags or from a flat ``key = value``
file given with ``--config``; flags win.  Each run prints a JSON summary on
stdout and writes it, together with plot-ready CSVs, to ``--out``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError, NumericalError, RefusalError, StructuralError
from .gaussian_processes import (
    BrownianKernel,
    FractionalBrownianKernel,
    OrnsteinUhlenbeckKernel,
    SeedSpec,
    load_tabulated_kernel,
    sample_process,
    uniform_grid,
)
from .lab import constants as C
from .lab.borell import borell_check, parse_set
from .lab.experiments import norm_samples, rho_variation_estimate, worker_count
from .lab.tails import compare_to_constant, estimate_tail, exp_moment
from .lab.translation import DEFAULT_C, check_translation_inequality
from .path_norms import (
    RHO_EXHAUSTIVE_MAX_INTERVALS,
    DiscretePath,
    covariance_2d_rho_var,
    hoelder_levels,
    homogeneous_pvar,
    psi_variation,
    psi_variation_norm,
)
from .rough_lift import (
    LiftConfig,
    dyadic_convergence_diagnostic,
    lift_piecewise_linear,
    read_rough_path_csv,
    write_rough_path_csv,
)
from .tensor_algebra import MAX_DEPTH

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in str(text).split(",") if v.strip())


# name: (parser, default, help)
PARAMS = {
    "kernel": (str, "bm", "covariance: bm | fbm | ou | tabulated"),
    "hurst": (float, 0.4, "fBM Hurst parameter"),
    "ou_theta": (float, 1.0, "OU mean-reversion rate"),
    "ou_sigma": (float, 1.0, "OU volatility"),
    "kernel_file": (str, None, "CSV covariance table for --kernel tabulated"),
    "T": (float, 1.0, "time horizon"),
    "grid": (int, 1024, "number of grid intervals"),
    "dim": (int, 2, "path dimension d"),
    "depth": (int, 2, "truncation level N"),
    "p": (float, 2.5, "variation / Hölder exponent"),
    "norm": (str, "frobenius", "tensor norm: frobenius | max_entry"),
    "paths": (int, 1, "number of sample paths"),
    "seed": (int, 0, "root seed"),
    "input": (str, None, "rough path CSV (norms); sampled from the kernel when absent"),
    "psi": (int, 0, "also compute psi-variation of level 1 (0/1)"),
    "rho_grid": (int, 0, "intervals for the covariance rho-variation (0 = skip)"),
    "rho": (float, None, "rho for kernels without a natural value"),
    "statistic": (str, "hoelder", "tail statistic: hoelder | pvar"),
    "window": (_floats, (0.95, 0.999), "quantile fit window lo,hi"),
    "thresholds": (int, 40, "number of fit thresholds"),
    "bootstrap": (int, 200, "bootstrap resamples for the SE of eta"),
    "factor": (float, 0.8, "pass if eta_hat >= factor * eta0 / (1 + eps)^2"),
    "eps": (float, 0.0, "threshold slack epsilon"),
    "moment_factor": (float, 0.9, "exp moment evaluated at moment_factor * eta0"),
    "interpretation": (str, "literal_2.4", "base of c_uv: literal_2.4 | two_times_4"),
    "family": (str, "bm", "constant family: generic | bm | gaussian | banach"),
    "c": (float, None, "translation constant c (generic, check-translation)"),
    "sigma": (float, 1.0, "sigma"),
    "r_rho_var": (float, 1.0, "|R|_{rho-var} for the gaussian family"),
    "set": (str, "halfspace:0.0", "halfspace:a | ball:r[:c1,..] | box:w | polytope:k:offset"),
    "r": (_floats, (0.0, 0.5, 1.0, 2.0), "enlargement radii"),
    "samples": (int, 100000, "Monte Carlo sample count"),
    "shifts": (int, 10, "Cameron-Martin shifts per path"),
    "scales": (_floats, (0.5, 1.0, 2.0, 4.0), "Cameron-Martin norms of the shifts"),
    "max_level": (int, 10, "finest dyadic level"),
}

KERNEL_KEYS = ("kernel", "hurst", "ou_theta", "ou_sigma", "kernel_file")

COMMANDS = {
    "simulate": ("sample paths and write their lifts", KERNEL_KEYS + ("T", "grid", "dim", "depth", "paths", "seed")),
    "norms": (
        "Hölder, p-variation and related norms of one path",
        KERNEL_KEYS + ("input", "T", "grid", "dim", "depth", "p", "norm", "seed", "psi", "rho_grid", "rho"),
    ),
    "tail": (
        "Monte Carlo Gauss-tail fit of a norm statistic",
        KERNEL_KEYS
        + ("T", "grid", "dim", "p", "norm", "paths", "seed", "statistic", "window", "thresholds", "bootstrap",
           "factor", "eps", "moment_factor", "interpretation", "rho", "rho_grid"),
    ),
    "constants": ("closed-form eta0 constants", ("family", "c", "sigma", "T", "p", "rho", "r_rho_var", "interpretation")),
    "borell": ("Gaussian isoperimetry check in R^n", ("dim", "set", "r", "samples", "seed")),
    "check-translation": (
        "translation inequality sweep for Brownian lifts",
        ("grid", "p", "c", "sigma", "dim", "paths", "shifts", "scales", "seed"),
    ),
    "convergence": (
        "dyadic lift convergence diagnostic",
        KERNEL_KEYS + ("T", "dim", "depth", "max_level", "p", "norm", "seed"),
    ),
}

COMMAND_DEFAULTS = {
    "simulate": {"grid": 256},
    "norms": {"grid": 256},
    "tail": {"paths": 20000},
    "constants": {"p": None},
    "borell": {"dim": 2, "seed": 0},
    "check-translation": {"grid": 512, "paths": 1000},
    "convergence": {"p": 2.5},
}


class ConfigError(DomainError):
    pass


# ---------------------------------------------------------------------------
# configuration


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _key(raw: str) -> str:
    return raw.strip().replace("-", "_")


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        k, v = line.split("=", 1)
        out[_key(k)] = v.strip()
    return out


def resolve_config(command: str, flags: dict, file_values: dict | None = None) -> dict:
    """Merge built-in defaults, config-file values and flags (in increasing priority)."""
    keys = COMMANDS[command][1]
    cfg = {}
    for k in keys:
        default = COMMAND_DEFAULTS.get(command, {}).get(k, PARAMS[k][1])
        cfg[k] = default
    for k, v in (file_values or {}).items():
        if k not in keys:
            raise ConfigError(f"unknown key {k!r} for {command}")
        try:
            cfg[k] = PARAMS[k][0](v)
        except ValueError:
            raise ConfigError(f"bad value {v!r} for {k}") from None
    for k, v in flags.items():
        if v is not None:
            cfg[k] = v
    return cfg


def _kernel(cfg: dict):
    kind = cfg["kernel"]
    if kind == "bm":
        return BrownianKernel()
    if kind == "fbm":
        return FractionalBrownianKernel(cfg["hurst"])
    if kind == "ou":
        return OrnsteinUhlenbeckKernel(cfg["ou_theta"], cfg["ou_sigma"])
    if kind == "tabulated":
        if not cfg.get("kernel_file"):
            raise ConfigError("--kernel tabulated needs --kernel-file")
        try:
            return load_tabulated_kernel(cfg["kernel_file"])
        except OSError as exc:
            raise ConfigError(f"cannot read kernel file: {exc}") from None
    raise ConfigError(f"unknown kernel {kind!r}")


def _kernel_rho(cfg: dict) -> float | None:
    if cfg["kernel"] == "bm":
        return 1.0
    if cfg["kernel"] == "fbm":
        # H >= 1/2 covariances have finite 1-variation
        return max(1.0, 1.0 / (2.0 * cfg["hurst"]))
    return cfg.get("rho")


def validate(command: str, cfg: dict) -> list[str]:
    """All precondition violations of a resolved configuration, without running anything."""
    v = []

    def need(cond, msg):
        if not cond:
            v.append(msg)

    def positive(name):
        if name in cfg and cfg[name] is not None:
            need(cfg[name] > 0, f"{name} > 0 required")

    if "kernel" in cfg and not (command == "norms" and cfg.get("input")):
        kind = cfg["kernel"]
        need(kind in ("bm", "fbm", "ou", "tabulated"), f"unknown kernel {kind!r}")
        if kind == "fbm":
            H = cfg["hurst"]
            if not 0 < H < 1:
                v.append("Hurst parameter in (0, 1) required")
            else:
                need(1.0 / (2.0 * H) < 2, f"rho < 2 required (fBM rho = 1/(2H) = {1.0 / (2.0 * H)!r})")
        if kind == "ou":
            positive("ou_theta")
            positive("ou_sigma")
        if kind == "tabulated":
            need(bool(cfg.get("kernel_file")), "kernel_file required for the tabulated kernel")
    for name in ("T", "grid", "dim", "paths", "samples", "shifts", "thresholds", "sigma", "r_rho_var"):
        positive(name)
    if "depth" in cfg:
        need(2 <= cfg["depth"] <= MAX_DEPTH, f"depth in [2, {MAX_DEPTH}] required")
    if "norm" in cfg:
        need(cfg["norm"] in ("frobenius", "max_entry"), "norm must be frobenius or max_entry")
    if "interpretation" in cfg:
        need(cfg["interpretation"] in C.INTERPRETATIONS, f"interpretation must be one of {C.INTERPRETATIONS}")
    if command in ("norms", "convergence") and cfg.get("p") is not None:
        need(cfg["p"] >= cfg["depth"], "p >= N required")
    if command == "convergence":
        need(1 <= cfg["max_level"] <= 14, "max_level in [1, 14] required")
    if command == "norms":
        need(cfg["rho_grid"] >= 0, "rho_grid >= 0 required")
        if cfg["rho_grid"] > 0 and not cfg.get("input") and cfg["kernel"] not in ("bm", "fbm"):
            need(cfg.get("rho") is not None, "rho required for the covariance rho-variation of this kernel")
    if command == "tail":
        need(cfg["statistic"] in ("hoelder", "pvar"), "statistic must be hoelder or pvar")
        need(cfg["p"] >= 2, "p >= N required")
        w = cfg["window"]
        need(len(w) == 2 and 0.5 < w[0] < w[1] <= 0.9999, "window lo,hi with 0.5 < lo < hi <= 0.9999 required")
        need(cfg["paths"] >= 1000, "paths >= 1000 required for the tail fit")
        need(cfg["bootstrap"] >= 0, "bootstrap >= 0 required")
        need(cfg["eps"] >= 0, "eps >= 0 required")
        positive("factor")
        positive("moment_factor")
        if cfg["statistic"] == "hoelder" and cfg["kernel"] == "bm":
            need(cfg["p"] > 2, "p > 2 required")
        if cfg["statistic"] == "pvar":
            rho = _kernel_rho(cfg)
            if rho is None:
                v.append("rho required for the gaussian constant of this kernel")
            else:
                v.extend(C.check_gaussian_params(rho, cfg["p"]))
    if command == "constants":
        fam = cfg["family"]
        if fam == "generic":
            need(cfg["c"] is not None and cfg["c"] > 0, "c > 0 required")
        elif fam == "bm":
            if cfg["p"] is not None:
                need(cfg["p"] > 2, "p > 2 required")
        elif fam == "gaussian":
            if cfg["rho"] is None or cfg["p"] is None:
                v.append("rho and p required for the gaussian family")
            else:
                v.extend(C.check_gaussian_params(cfg["rho"], cfg["p"]))
        elif fam == "banach":
            need(cfg["p"] is not None and cfg["p"] >= 2, "p >= 2 required")
        else:
            v.append(f"unknown family {fam!r}")
    if command == "borell":
        r = cfg["r"]
        need(len(r) > 0 and all(x >= 0 and math.isfinite(x) for x in r), "r values must be finite and nonnegative")
        need(cfg["samples"] >= 2, "samples >= 2 required")
        try:
            parse_set(cfg["set"], cfg["dim"])
        except DomainError as exc:
            v.append(str(exc))
    if command == "check-translation":
        need(cfg["p"] > 2, "p > 2 required")
        need(cfg["c"] is None or cfg["c"] > 0, "c > 0 required")
        need(all(s >= 0 for s in cfg["scales"]), "scales must be nonnegative")
    return v


# ---------------------------------------------------------------------------
# outputs


def build_id() -> str:
    """Package version plus a content hash of the installed sources."""
    h = hashlib.sha256()
    root = Path(__file__).resolve().parent
    for f in sorted(root.rglob("*.py")):
        h.update(f.relative_to(root).as_posix().encode())
        h.update(f.read_bytes())
    return f"{__version__}+{h.hexdigest()[:12]}"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format(x, ".17g") if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


class Output:
    def __init__(self, out_dir):
        self.dir = Path(out_dir) if out_dir else None
        self.files = []

    def write(self, name: str, text: str) -> None:
        if self.dir is None:
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        (self.dir / name).write_text(text)
        self.files.append(name)

    def csv(self, name: str, header, rows) -> None:
        self.write(name, _csv_text(header, rows))


def _interpretation_record(cfg: dict) -> dict:
    chosen = cfg.get("interpretation", "literal_2.4")
    return {"chosen": chosen, "alternative": [i for i in C.INTERPRETATIONS if i != chosen][0]}


# ---------------------------------------------------------------------------
# commands


def _grid(cfg):
    return uniform_grid(cfg["T"], cfg["grid"])


def cmd_simulate(cfg, out: Output) -> dict:
    kernel = _kernel(cfg)
    grid = _grid(cfg)
    root = SeedSpec(cfg["seed"])
    lcfg = LiftConfig(depth=cfg["depth"])
    endpoints = []
    for i in range(cfg["paths"]):
        X = lift_piecewise_linear(sample_process(kernel, grid, cfg["dim"], root.child(i)), lcfg)
        buf = io.StringIO()
        write_rough_path_csv(X, buf)
        out.write(f"path_{i:05d}.csv", buf.getvalue())
        endpoints.append(X.levels[0][-1].tolist())
    return {"kernel": kernel.describe(), "n_paths": cfg["paths"], "level1_endpoints": endpoints}


def cmd_norms(cfg, out: Output) -> dict:
    if cfg.get("input"):
        try:
            X = read_rough_path_csv(cfg["input"])
        except OSError as exc:
            raise ConfigError(f"cannot read input: {exc}") from None
        if X.depth < 2:
            raise StructuralError("input must have depth >= 2")
        source = {"input": Path(cfg["input"]).name}
    else:
        kernel = _kernel(cfg)
        x = sample_process(kernel, _grid(cfg), cfg["dim"], SeedSpec(cfg["seed"]))
        X = lift_piecewise_linear(x, LiftConfig(depth=cfg["depth"]))
        source = {"kernel": kernel.describe()}
    p, norm = cfg["p"], cfg["norm"]
    if p < X.depth:
        raise DomainError(f"p >= N required (p={p}, N={X.depth})")
    pv = homogeneous_pvar(X, p, norm)
    res = {
        "source": source,
        "depth": X.depth,
        "n_points": X.n_points,
        "homogeneous_pvar": pv.value,
        "pvar_levels": {str(k): v for k, v in pv.level_values.items()},
        "hoelder_levels": hoelder_levels(X, p, norm),
    }
    res["hoelder"] = max(res["hoelder_levels"])
    out.csv("pvar_partition.csv", ["index", "time"], [(int(i), float(X.times[i])) for i in pv.optimal_partition])
    if cfg["psi"]:
        x1 = DiscretePath(X.times, X.levels[0])
        pv_psi = psi_variation(x1)
        res["psi_variation"] = {"value": pv_psi.value, "certified": pv_psi.certified,
                                "luxemburg_norm": psi_variation_norm(x1)}
    if cfg["rho_grid"] > 0 and not cfg.get("input"):
        rho = _kernel_rho(cfg)
        mode = "exhaustive" if cfg["rho_grid"] <= RHO_EXHAUSTIVE_MAX_INTERVALS else "greedy"
        res["covariance_rho_var"] = {
            "rho": rho,
            "mode": mode,
            "grid": cfg["rho_grid"],
            "value": covariance_2d_rho_var(_kernel(cfg), uniform_grid(cfg["T"], cfg["rho_grid"]), rho, mode),
        }
    return res


def cmd_tail(cfg, out: Output) -> dict:
    kernel = _kernel(cfg)
    p, T = cfg["p"], cfg["T"]
    Y = norm_samples(kernel, T, cfg["grid"], cfg["paths"], SeedSpec(cfg["seed"]), cfg["statistic"], p,
                     d=cfg["dim"], norm=cfg["norm"])
    constants = {}
    chosen = None
    scale = 1.0
    if cfg["statistic"] == "hoelder" and cfg["kernel"] == "bm":
        chosen = C.eta0_bm(T, p)
        constants["bm"] = chosen.to_dict()
        scale = chosen.threshold_scale
    elif cfg["statistic"] == "pvar":
        rho = _kernel_rho(cfg)
        r_var = rho_variation_estimate(kernel, T, rho, cfg["rho_grid"] or 64)
        for interp in C.INTERPRETATIONS:
            k = C.eta0_gaussian(rho, p, r_var, interpretation=interp)
            constants[interp] = k.to_dict()
            if interp == cfg["interpretation"]:
                chosen = k
        scale = chosen.threshold_scale
    Z = Y * math.sqrt(scale)
    est = estimate_tail(Z, tuple(cfg["window"]), cfg["thresholds"], cfg["bootstrap"], seed=cfg["seed"])
    res = {
        "kernel": kernel.describe(),
        "statistic": cfg["statistic"],
        "threshold_scale": scale,
        "normalised_statistic": "Y * sqrt(threshold_scale)",
        "fit": est.summary(),
        "constants": constants,
        "sample_mean": float(np.mean(Y)),
        "sample_max": float(np.max(Y)),
        "all_finite": bool(np.all(np.isfinite(Y))),
    }
    if chosen is not None:
        res["comparison"] = compare_to_constant(est, chosen.value, cfg["factor"], cfg["eps"])
        if cfg["statistic"] == "pvar":
            smaller = min(v["eta0"] for v in constants.values())
            res["comparison_smaller_interpretation"] = compare_to_constant(est, smaller, 1.0, cfg["eps"])
        mom = exp_moment(Z, cfg["moment_factor"] * chosen.value)
        res["exp_moment"] = {"eta": cfg["moment_factor"] * chosen.value, **mom._asdict()}
    out.csv("tail.csv", ["x", "survival", "neg_log_survival"],
            zip(est.thresholds, est.survival, est.neg_log_survival))
    out.csv("samples.csv", ["index", "statistic"], ((i, float(y)) for i, y in enumerate(Y)))
    return res


def cmd_constants(cfg, out: Output) -> dict:
    fam = cfg["family"]
    if fam == "generic":
        k = C.eta0_generic(cfg["c"], cfg["sigma"])
    elif fam == "bm":
        k = C.eta0_bm(cfg["T"], cfg["p"])
    elif fam == "banach":
        k = C.eta0_banach(cfg["p"])
    elif fam == "gaussian":
        both = {i: C.eta0_gaussian(cfg["rho"], cfg["p"], cfg["r_rho_var"], interpretation=i).to_dict()
                for i in C.INTERPRETATIONS}
        k = C.eta0_gaussian(cfg["rho"], cfg["p"], cfg["r_rho_var"], interpretation=cfg["interpretation"])
        res = {"eta0": k.value, "constant": k.to_dict(), "all_interpretations": both}
        out.csv("constants.csv", ["interpretation", "eta0"], [(i, v["eta0"]) for i, v in both.items()])
        return res
    else:
        raise ConfigError(f"unknown family {fam!r}")
    out.csv("constants.csv", ["family", "eta0"], [(fam, k.value)])
    return {"eta0": k.value, "constant": k.to_dict()}


def cmd_borell(cfg, out: Output) -> dict:
    gset = parse_set(cfg["set"], cfg["dim"])
    rep = borell_check(cfg["dim"], gset, cfg["r"], cfg["samples"], SeedSpec(cfg["seed"]))
    out.csv("borell.csv", ["r", "mu_enlarged", "bound", "margin", "se"],
            zip(rep.r_grid, rep.mu_enlarged, rep.bound, rep.margin, rep.se))
    return {"report": rep.to_dict(), "min_margin_in_se": rep.min_margin_in_se()}


def cmd_check_translation(cfg, out: Output) -> dict:
    c = DEFAULT_C if cfg["c"] is None else cfg["c"]
    grid = uniform_grid(1.0, cfg["grid"])
    rep = check_translation_inequality(grid, cfg["p"], c, cfg["paths"], cfg["shifts"], cfg["scales"],
                                       SeedSpec(cfg["seed"]), cfg["dim"], cfg["sigma"])
    out.csv("translation.csv", ["scale", "max_ratio"], sorted(rep.max_ratio_by_scale.items()))
    return rep.to_dict()


def cmd_convergence(cfg, out: Output) -> dict:
    kernel = _kernel(cfg)
    rows = dyadic_convergence_diagnostic(kernel, cfg["T"], cfg["dim"], cfg["depth"], cfg["max_level"], cfg["p"],
                                         SeedSpec(cfg["seed"]), cfg["norm"])
    out.csv("convergence.csv", ["level", "distance"], rows)
    return {"kernel": kernel.describe(), "distances": [[k, d] for k, d in rows]}


HANDLERS = {
    "simulate": cmd_simulate,
    "norms": cmd_norms,
    "tail": cmd_tail,
    "constants": cmd_constants,
    "borell": cmd_borell,
    "check-translation": cmd_check_translation,
    "convergence": cmd_convergence,
}


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fernique", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=build_id())
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (helptext, keys) in COMMANDS.items():
        sp = sub.add_parser(name, help=helptext, description=helptext)
        sp.add_argument("--config", help="key = value file; flags override it")
        sp.add_argument("--out", help="output directory (nothing written when absent)")
        sp.add_argument("--validate", action="store_true", help="report precondition violations and exit")
        for k in keys:
            typ, _, h = PARAMS[k]
            default = COMMAND_DEFAULTS.get(name, {}).get(k, PARAMS[k][1])
            if isinstance(default, tuple):
                default = ",".join(repr(x) for x in default)
            sp.add_argument(_flag(k), dest=k, type=typ, default=None, help=f"{h} (default: {default})")
    return parser


def _emit(summary: dict, out: Output) -> None:
    text = json.dumps(_clean(summary), indent=2, sort_keys=True) + "\n"
    out.write("summary.json", text)
    sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    keys = COMMANDS[command][1]
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = resolve_config(command, {k: getattr(args, k) for k in keys}, file_values)
        worker_count()
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    violations = validate(command, cfg)
    if args.validate:
        sys.stdout.write(json.dumps({"command": command, "violations": violations}, indent=2) + "\n")
        return EXIT_OK if not violations else EXIT_CONFIG
    if violations:
        for v in violations:
            print(f"error: {v}", file=sys.stderr)
        return EXIT_CONFIG
    out = Output(args.out)
    try:
        result = HANDLERS[command](cfg, out)
    except (DomainError, StructuralError, RefusalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    summary = {
        "command": command,
        "config": cfg,
        "seed": cfg.get("seed"),
        "build": build_id(),
        "interpretation": _interpretation_record(cfg),
        "result": result,
        "files": sorted(out.files + (["summary.json"] if out.dir else [])),
    }
    _emit(summary, out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
