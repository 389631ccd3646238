"""Command-line entry point: ``qftprice <command> [options]``.

Settings come from three layers, later ones winning:

1. built-in defaults (Black-Scholes S0=100, r=0.05, sigma=0.3, T=0.5 on the
   n=10, alpha=2.5 grid with dk=1/sqrt(N), k0=ln S0 - N*dk/2), used only when
   no ``--config`` is given;
2. the YAML file passed with ``--config`` (``model`` and ``grid.n`` /
   ``grid.alpha`` are then required);
3. command-line flags.

Exit codes: 0 success, 1 internal error, 2 invalid configuration, 3 numerical
domain error (e.g. alpha outside the model's strip).
"""
from __future__ import annotations

import argparse
import copy
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from . import analysis, kernels
from .carr_madan import GridSpec, _atomic_write, build_x_vector, make_grid, price_fft
from .exceptions import ArgumentError, ModelDomainError
from .models import BlackScholes, Heston, MarketParams, ModelSpec, VarianceGamma
from .qcircuit import Circuit, build_inverse_qft_circuit, build_state_prep_circuit, decompose, metrics
from .qsim import inverse_qft, normalize, prepare_state, price_from_amplitudes, price_from_shots, sample

log = logging.getLogger("qftprice")

OUTPUT_ENV = "QFTPRICE_OUTPUT_DIR"
DEFAULT_OUTPUT = "qftprice_out"

EXIT_OK, EXIT_INTERNAL, EXIT_CONFIG, EXIT_DOMAIN = 0, 1, 2, 3

MODEL_KEYS = {
    "black_scholes": ("sigma",),
    "heston": ("v0", "kappa", "theta", "xi", "rho"),
    "variance_gamma": ("sigma", "nu", "theta"),
}

DEFAULTS = {
    "model": {"type": "black_scholes", "spot": 100.0, "rate": 0.05, "maturity": 0.5, "sigma": 0.3},
    "grid": {"n": 10, "dk": "auto", "k0": "auto", "alpha": 2.5},
    "price_qft": {"mode": "exact", "shots": 10_000_000, "seed": 0},
    "resources": {"m_min": 1, "m_max": 10, "iqft_only": False},
    "study": {
        "n_values": [6, 8, 10],
        "alphas": [round(0.25 * i, 2) for i in range(2, 25)],
        "strike_window": None,
        "shot_counts": [1000, 100000, 10000000],
        "num_seeds": 20,
        "base_seed": 0,
    },
}


class ConfigError(ArgumentError):
    pass


# --------------------------------------------------------------------------- config


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    return data


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def effective_config(args) -> dict:
    if args.config:
        user = load_config(args.config)
        for section, keys in (("model", ("type",)), ("grid", ("n", "alpha"))):
            for key in keys:
                if key not in (user.get(section) or {}):
                    raise ConfigError(f"config is missing required key {section}.{key}")
        mtype = user["model"]["type"]
        if mtype not in MODEL_KEYS:
            raise ConfigError(f"model.type must be one of {sorted(MODEL_KEYS)}, got {mtype!r}")
        for key in ("spot", "rate", "maturity", *MODEL_KEYS[mtype]):
            if key not in user["model"]:
                raise ConfigError(f"config is missing required key model.{key}")
        base = {k: v for k, v in DEFAULTS.items() if k not in ("model", "grid")}
        base["grid"] = {"dk": "auto", "k0": "auto"}
        cfg = _merge(base, user)
    else:
        cfg = copy.deepcopy(DEFAULTS)

    model = cfg["model"]
    if args.model is not None:
        model["type"] = args.model
    for key in ("spot", "rate", "maturity", "sigma", "v0", "kappa", "theta", "xi", "rho", "nu"):
        val = getattr(args, key, None)
        if val is not None:
            model[key] = val
    grid = cfg["grid"]
    for key in ("n", "dk", "k0", "alpha"):
        val = getattr(args, key, None)
        if val is not None:
            grid[key] = val
    if args.output_dir is not None:
        cfg["output_dir"] = args.output_dir
    cfg.setdefault("output_dir", os.environ.get(OUTPUT_ENV, DEFAULT_OUTPUT))
    return cfg


def model_from_config(cfg: dict) -> ModelSpec:
    m = cfg.get("model") or {}
    mtype = m.get("type")
    if mtype not in MODEL_KEYS:
        raise ConfigError(f"model.type must be one of {sorted(MODEL_KEYS)}, got {mtype!r}")
    try:
        market = MarketParams(_num(m, "spot"), _num(m, "rate"), _num(m, "maturity"))
        params = [_num(m, k) for k in MODEL_KEYS[mtype]]
        variant = {"black_scholes": BlackScholes, "heston": Heston, "variance_gamma": VarianceGamma}[mtype](*params)
    except ArgumentError as exc:
        raise ConfigError(f"invalid model: {exc}") from None
    return ModelSpec(market, variant)


def _num(section: dict, key: str) -> float:
    if key not in section:
        raise ConfigError(f"missing model parameter {key!r}")
    try:
        return float(section[key])
    except (TypeError, ValueError):
        raise ConfigError(f"parameter {key!r} must be a number, got {section[key]!r}") from None


def grid_from_config(cfg: dict, market: MarketParams, n=None, allow_zero=False) -> GridSpec:
    g = cfg.get("grid") or {}
    if "alpha" not in g or g["alpha"] is None:
        raise ConfigError("grid.alpha is required")
    try:
        n = int(g["n"] if n is None else n)
        alpha = float(g["alpha"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"grid.n and grid.alpha must be numbers ({exc})") from None
    N = 1 << max(n, 0)
    dk = g.get("dk", "auto")
    dk = 1.0 / math.sqrt(N) if dk in (None, "auto") else float(dk)
    k0 = g.get("k0", "auto")
    k0 = math.log(market.spot) - N * dk / 2.0 if k0 in (None, "auto") else float(k0)
    try:
        if allow_zero and n == 0:
            return GridSpec(0, dk, k0, alpha)
        return make_grid(n, dk, k0, alpha)
    except ArgumentError as exc:
        raise ConfigError(f"invalid grid: {exc}") from None


# --------------------------------------------------------------------------- output


class Output:
    """Names and writes result files for one command invocation."""

    def __init__(self, cfg: dict, args):
        self.dir = Path(cfg["output_dir"])
        self.dir.mkdir(parents=True, exist_ok=True)
        self.fixed = args.fixed_name
        self.stamp = time.strftime("%Y%m%dT%H%M%S")
        self.model = cfg["model"]["type"]
        self.gnuplot = args.gnuplot_stub
        self.written = []

    def path(self, study: str, ext: str) -> Path:
        stem = f"{study}_{self.model}" if self.fixed else f"{study}_{self.model}_{self.stamp}"
        return self.dir / f"{stem}.{ext}"

    def write(self, study: str, ext: str, text: str, plot=None) -> Path:
        p = self.path(study, ext)
        _atomic_write(p, text)
        self.written.append(p)
        if self.gnuplot and plot:
            xcol, ycol, title, logscale = plot
            lines = [
                "set datafile separator ','",
                "set datafile commentschars '#'",
                "set key autotitle columnhead",
                f"set title '{title}'",
            ]
            if logscale:
                lines.append(f"set logscale {logscale}")
            lines.append(f"plot '{p.name}' using {xcol}:{ycol} with linespoints")
            _atomic_write(p.with_suffix(".gp"), "\n".join(lines) + "\n")
        return p

    def echo_config(self, cfg: dict) -> None:
        _atomic_write(self.dir / "effective_config.yaml", yaml.safe_dump(cfg, sort_keys=True))


def _resolved(cfg: dict, grid: GridSpec) -> dict:
    out = copy.deepcopy(cfg)
    out["grid"] = {"n": int(grid.n), "dk": grid.dk, "k0": grid.k0, "alpha": grid.alpha}
    return out


# --------------------------------------------------------------------------- commands


def cmd_price_fft(cfg: dict, args) -> int:
    model = model_from_config(cfg)
    grid = grid_from_config(cfg, model.market)
    out = Output(cfg, args)
    curve = price_fft(grid, model)
    out.write("price_fft", "csv", curve.to_csv(), (1, 2, "FFT call prices", None))
    out.echo_config(_resolved(cfg, grid))
    _print_summary(curve, model, grid)
    return EXIT_OK


def _print_summary(curve, model, grid):
    atm = analysis.atm_index(grid, model.market.spot)
    lo, hi = analysis.default_window(model.market.spot)
    inside = (curve.strikes >= lo) & (curve.strikes <= hi)
    window_resid = np.max(np.abs(curve.imag_residual[inside])) if inside.any() else math.nan
    print(
        f"atm_strike={curve.strikes[atm]:.10g} atm_price={curve.prices[atm]:.10g} "
        f"max_abs_imag_residual={np.max(np.abs(curve.imag_residual)):.3e} "
        f"max_abs_imag_residual_window={window_resid:.3e} rows={len(curve)}"
    )


def cmd_price_qft(cfg: dict, args) -> int:
    model = model_from_config(cfg)
    grid = grid_from_config(cfg, model.market)
    opts = cfg["price_qft"]
    if args.mode is not None:
        opts["mode"] = args.mode
    if args.shots is not None:
        opts["shots"] = args.shots
    if args.seed is not None:
        opts["seed"] = args.seed
    mode = opts["mode"]
    if mode not in ("exact", "shots"):
        raise ConfigError(f"price_qft.mode must be 'exact' or 'shots', got {mode!r}")
    out = Output(cfg, args)
    inp = normalize(build_x_vector(grid, model))
    y = inverse_qft(prepare_state(inp))
    if mode == "exact":
        curve = price_from_amplitudes(y, inp.norm, grid)
        out.write("price_qft_exact", "csv", curve.to_csv(), (1, 2, "QFT call prices (exact amplitudes)", None))
    else:
        shots, seed = int(opts["shots"]), int(opts["seed"])
        if shots < 1:
            raise ConfigError(f"shots must be >= 1, got {shots}")
        result = sample(y, shots, seed)
        curve = price_from_shots(result, inp.norm, grid)
        out.write("price_qft_shots", "csv", curve.to_csv(), (1, 2, f"QFT call prices ({shots} shots)", None))
        out.write("counts", "csv", result.to_csv())
    out.echo_config(_resolved(cfg, grid))
    _print_summary(curve, model, grid)
    return EXIT_OK


def resource_rows(cfg: dict, model: ModelSpec, m_values, iqft_only: bool):
    for m in m_values:
        iq = decompose(build_inverse_qft_circuit(m))
        iq_stats = metrics(iq)
        if iqft_only:
            row = dict(iq_stats)
            row["m"] = m
            yield row, None
            continue
        grid = grid_from_config(cfg, model.market, n=m - 1, allow_zero=True)
        sp = decompose(build_state_prep_circuit(normalize(build_x_vector(grid, model)).tilde_x))
        total = Circuit(sp.width, list(sp.gates), sp.global_phase)
        total.extend(iq)
        row = dict(metrics(total))
        row.update(m=m, state_prep=metrics(sp), inverse_qft=iq_stats)
        yield row, total


def cmd_resources(cfg: dict, args) -> int:
    model = model_from_config(cfg)
    opts = cfg["resources"]
    for key in ("m_min", "m_max"):
        if getattr(args, key) is not None:
            opts[key] = getattr(args, key)
    if args.iqft_only:
        opts["iqft_only"] = True
    m_min, m_max = int(opts["m_min"]), int(opts["m_max"])
    if not 1 <= m_min <= m_max:
        raise ConfigError(f"need 1 <= m_min <= m_max, got {m_min}, {m_max}")
    out = Output(cfg, args)
    lines = []
    for row, circ in resource_rows(cfg, model, range(m_min, m_max + 1), bool(opts["iqft_only"])):
        lines.append(json.dumps(row, sort_keys=True))
        if args.emit_circuits and circ is not None:
            out.write(f"circuit_m{row['m']}", "txt", circ.to_text())
    out.write("resources", "jsonl", "\n".join(lines) + "\n")
    out.echo_config(cfg)
    last = json.loads(lines[-1])
    print(f"m={last['m']} depth={last['depth']} cx_count={last['cx_count']} total_gates={last['total_gates']}")
    return EXIT_OK


def cmd_study(cfg: dict, args) -> int:
    model = model_from_config(cfg)
    opts = cfg["study"]
    for key in ("n_values", "alphas", "shot_counts", "num_seeds", "base_seed"):
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    if args.strike_window is not None:
        opts["strike_window"] = list(args.strike_window)
    window = opts.get("strike_window")
    grid = grid_from_config(cfg, model.market)
    out = Output(cfg, args)
    workers = args.workers
    kind = args.kind
    if kind == "convergence":
        window = tuple(window) if window else analysis.default_window(model.market.spot)
        rows = analysis.convergence_study(model, grid.alpha, [int(n) for n in opts["n_values"]], window, workers=workers)
        out.write("convergence", "csv", analysis.rows_to_csv(("n", "mse", "points"), rows), (1, 2, "MSE vs n", "y"))
        print(" ".join(f"mse[n={r.n}]={r.mse:.3e}" for r in rows) + f" final_mse={rows[-1].mse:.3e}")
    elif kind == "shots":
        seeds = [int(opts["base_seed"]) + i for i in range(int(opts["num_seeds"]))]
        if not seeds:
            raise ConfigError("num_seeds must be >= 1")
        rows = analysis.shot_study(model, grid, [int(s) for s in opts["shot_counts"]], seeds, workers=workers)
        out.write(
            "shots",
            "csv",
            analysis.rows_to_csv(("shots", "mean_abs_error", "std_abs_error", "seeds"), rows),
            (1, 2, "ATM error vs shots", "xy"),
        )
        slope = analysis.loglog_slope([r.shots for r in rows], [r.mean_abs_error for r in rows]) if len(rows) > 1 else math.nan
        print(f"final_mean_abs_error={rows[-1].mean_abs_error:.3e} loglog_slope={slope:.3f}")
    else:
        window = tuple(window) if window else (0.7 * model.market.spot, 1.3 * model.market.spot)
        surface = analysis.alpha_sweep(model, [float(a) for a in opts["alphas"]], window, grid, workers=workers)
        if not surface.rows:
            raise ModelDomainError("every alpha in the sweep lies outside the model's strip")
        out.write("alpha", "csv", surface.to_csv(), (2, 3, "error factor vs alpha", "y"))
        best, worst = analysis.sweet_spot(surface)
        print(f"best_alpha={best:g} max_factor={worst:.4g} skipped={len(surface.skipped)}")
    out.echo_config(_resolved(cfg, grid))
    return EXIT_OK


# --------------------------------------------------------------------------- parser

_CSV_HELP = {
    "price-fft": "Writes price_fft_<model>[_<timestamp>].csv with columns strike,price,imag_residual.",
    "price-qft": (
        "Writes price_qft_exact_*.csv or price_qft_shots_*.csv (columns strike,price,imag_residual;"
        " shots mode adds '# shots=.. seed=..' comment lines) and, in shots mode, counts_*.csv"
        " with columns index,count."
    ),
    "resources": (
        "Writes resources_*.jsonl: one JSON object per qubit count m with keys m, width, depth,"
        " cx_count, total_gates (whole decomposed circuit) and nested state_prep / inverse_qft metrics."
    ),
    "study": (
        "convergence -> convergence_*.csv (n,mse,points); shots -> shots_*.csv"
        " (shots,mean_abs_error,std_abs_error,seeds); alpha -> alpha_*.csv (strike,alpha,factor)."
    ),
}


def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("configuration (flags override the config file)")
    g.add_argument("--config", help="YAML config file")
    g.add_argument("--model", choices=sorted(MODEL_KEYS))
    for key in ("spot", "rate", "maturity", "sigma", "v0", "kappa", "theta", "xi", "rho", "nu"):
        g.add_argument(f"--{key}", type=float)
    g.add_argument("--n", type=int, help="qubits per half range (N = 2**n)")
    g.add_argument("--dk", type=float, help="log-strike step (default 1/sqrt(N))")
    g.add_argument("--k0", type=float, help="lowest log-strike (default ln S0 - N*dk/2)")
    g.add_argument("--alpha", type=float, help="dampening factor")
    o = p.add_argument_group("output")
    o.add_argument("--output-dir", help=f"output directory (default ${OUTPUT_ENV} or ./{DEFAULT_OUTPUT})")
    o.add_argument("--fixed-name", action="store_true", help="omit the timestamp from output file names")
    o.add_argument("--gnuplot-stub", action="store_true", help="also write a gnuplot script per CSV")
    o.add_argument("--workers", type=int, default=1, help="threads for study sweeps")
    o.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qftprice",
        description=__doc__.split("\n\n")[0],
        epilog="Precedence: flags > --config file > built-in defaults. Exit codes: 0 ok, 1 internal, 2 config, 3 domain.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s (kernels: {kernels.BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("price-fft", help="classical FFT price curve", epilog=_CSV_HELP["price-fft"])
    _common(p)
    p.set_defaults(func=cmd_price_fft)

    p = sub.add_parser("price-qft", help="simulated QFT price curve", epilog=_CSV_HELP["price-qft"])
    _common(p)
    p.add_argument("--mode", choices=("exact", "shots"))
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_price_qft)

    p = sub.add_parser("resources", help="gate counts and depth per qubit count", epilog=_CSV_HELP["resources"])
    _common(p)
    p.add_argument("--m-min", dest="m_min", type=int)
    p.add_argument("--m-max", dest="m_max", type=int)
    p.add_argument("--iqft-only", action="store_true", help="report the inverse QFT alone")
    p.add_argument("--emit-circuits", action="store_true", help="write each decomposed circuit as text")
    p.set_defaults(func=cmd_resources)

    p = sub.add_parser("study", help="convergence, shot-noise, or alpha studies", epilog=_CSV_HELP["study"])
    _common(p)
    p.add_argument("kind", choices=("convergence", "shots", "alpha"))
    p.add_argument("--n-values", dest="n_values", type=int, nargs="+")
    p.add_argument("--alphas", type=float, nargs="+")
    p.add_argument("--strike-window", dest="strike_window", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--shot-counts", dest="shot_counts", type=int, nargs="+")
    p.add_argument("--num-seeds", dest="num_seeds", type=int)
    p.add_argument("--base-seed", dest="base_seed", type=int)
    p.set_defaults(func=cmd_study)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = effective_config(args)
        return args.func(cfg, args)
    except ModelDomainError as exc:
        print(f"qftprice: model domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ArgumentError as exc:
        print(f"qftprice: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to exit code 1
        log.debug("internal error", exc_info=True)
        print(f"qftprice: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
