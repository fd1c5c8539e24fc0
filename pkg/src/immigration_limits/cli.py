"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime or
resource error, 3 acceptance failures present.
"""
from __future__ import annotations

import argparse
import inspect
import json
import os
import sys
from pathlib import Path
from typing import Optional

from . import __version__
from .acceptance import CRITERIA, AcceptanceConfig, run_acceptance_suite
from .asymptotics import lemma_ladder, write_lemma_csv
from .errors import NumericalError, OutOfRangeError, ParameterError, ResourceError, UnsupportedScenarioError
from .immigration import Scenario, normalized_fdd_sample
from .lab import convergence_study
from .limits import DEFAULT_STEPS, LimitFddSpec, sample_limit_fdd
from .renewal import IncrementLaw
from .responses import MODELS, CovarianceModel, instantiate
from .rng import StreamSeed

OUT_ENV = "IMMLIM_OUT"
LAW_KEYS = {"exponential": ("rate",), "pareto": ("alpha", "x_min"), "lognormal": ("m", "s"),
            "deterministic": ("value",)}
SCENARIO_KEYS = {"case", "u_grid", "t", "reps", "seed", "variance_scale", "budget"}


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def parse_law(text: str) -> IncrementLaw:
    """``kind:p1,p2`` such as ``pareto:0.5,1`` or ``exponential:1``."""
    kind, _, rest = text.partition(":")
    params = tuple(float(x) for x in rest.split(",")) if rest else ()
    return IncrementLaw(kind.strip(), params)


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{n}: expected key = value")
        out[key.strip()] = value.strip()
    return out


def _number(text: str):
    try:
        return float(text)
    except ValueError:
        return text


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in str(text).split(",") if x.strip())


def build_scenario(cfg: dict) -> Scenario:
    cfg = dict(cfg)
    kind = cfg.pop("law.kind", None)
    if kind not in LAW_KEYS:
        raise ConfigError(f"law.kind must be one of {sorted(LAW_KEYS)}")
    law = IncrementLaw(kind, tuple(float(cfg.pop(f"law.{k}")) for k in LAW_KEYS[kind] if f"law.{k}" in cfg))
    model_id = cfg.pop("model.id", None)
    if model_id not in MODELS:
        raise ConfigError(f"model.id must be one of {sorted(MODELS)}")
    allowed = set(inspect.signature(MODELS[model_id].__init__).parameters) - {"self", "xi_law", "eta_law"}
    if "eta_law" in inspect.signature(MODELS[model_id].__init__).parameters:
        allowed.add("eta")
    params = {}
    for key in [k for k in cfg if k.startswith("model.")]:
        name = key[len("model."):]
        if name not in allowed:
            raise ConfigError(f"unknown key {key!r} for model {model_id}; allowed: {sorted(allowed)}")
        value = cfg.pop(key)
        if name == "eta":
            params["eta_law"] = parse_law(value)
        else:
            params[name] = _number(value)
    if params.get("coupling") == "scaled":
        params["xi_law"] = law
    unknown = set(cfg) - SCENARIO_KEYS
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")
    for key in ("case", "u_grid", "t", "seed"):
        if key not in cfg:
            raise ConfigError(f"missing key {key!r}")
    return Scenario(law, instantiate(model_id, **params), cfg["case"], _floats(cfg["u_grid"]), float(cfg["t"]),
                    int(float(cfg.get("reps", 1000))), StreamSeed(int(cfg["seed"])),
                    cfg.get("variance_scale", "integral"), float(cfg.get("budget", 5e6)))


def _resolve_config(args) -> dict:
    cfg = read_config(args.scenario) if args.scenario else {}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        cfg[key.strip()] = value.strip()
    for key, flag in (("t", args.t), ("reps", args.reps), ("seed", args.seed), ("u_grid", args.u)):
        if flag is not None:
            cfg[key] = str(flag)
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV, "runs"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _manifest(out: Path, argv, config: dict, seed, outputs) -> None:
    data = {"argv": list(argv), "config": config, "seed": seed, "version": __version__, "outputs": outputs}
    (out / "manifest.json").write_text(json.dumps(data, indent=2, sort_keys=True, default=str) + "\n")


def cmd_simulate(args, argv) -> int:
    cfg = _resolve_config(args)
    sc = build_scenario(cfg)
    sample = normalized_fdd_sample(sc, args.jobs)
    out = _out_dir(args)
    name = f"fdd_{sc.case}_t{sc.t:g}.csv"
    sample.to_csv(out / name)
    _manifest(out, argv, {"input": cfg, "scenario": sc.describe(), "normalization": sample.normalization},
              sc.seed.root, [name])
    return 0


def cmd_limit_sample(args, argv) -> int:
    u = _floats(args.u)
    C = None
    if args.beta is not None:
        C = CovarianceModel(args.cov_form, args.beta)
    rho = args.rho
    if rho is None and args.case == "thm22_mix" and args.q is not None and 0 < args.q < 1 and args.beta is not None:
        rho = (args.beta - args.alpha) / 2
    spec = LimitFddSpec(args.case, u, alpha=args.alpha, beta=args.beta, rho=rho, p=args.p, q=args.q, mu=args.mu, C=C)
    sample = sample_limit_fdd(spec, args.reps, StreamSeed(args.seed), args.n_steps)
    out = _out_dir(args)
    name = f"limit_{args.case}.csv"
    sample.to_csv(out / name)
    config = {k: v for k, v in vars(args).items() if k not in ("func",)}
    _manifest(out, argv, config, args.seed, [name])
    return 0


def cmd_renewal_calc(args, argv) -> int:
    checks = lemma_ladder(_floats(args.t_list), args.reps, StreamSeed(args.seed))
    out = _out_dir(args)
    write_lemma_csv(checks, out / "lemmas.csv")
    _manifest(out, argv, {"t_list": args.t_list, "reps": args.reps}, args.seed, ["lemmas.csv"])
    return 0


def cmd_study(args, argv) -> int:
    cfg = _resolve_config(args)
    sc = build_scenario(cfg)
    trend = convergence_study(sc, _floats(args.t_list), ref_reps=args.ref_reps, stream=StreamSeed(sc.seed.root, (1,)),
                              jobs=args.jobs)
    out = _out_dir(args)
    trend.to_csv(out / "trend.csv")
    reports = {f"{t:g}": json.loads(r.to_json()) for t, r in trend.reports.items()}
    (out / "reports.json").write_text(json.dumps(reports, indent=2) + "\n")
    for t, r in trend.reports.items():
        print(f"t = {t:g}\n{r.to_text()}\n")
    print(f"trend {'ok' if trend.trend_ok else 'NOT ok'}, final {'ok' if trend.final_ok else 'NOT ok'}")
    _manifest(out, argv, {"input": cfg, "scenario": sc.describe()}, sc.seed.root, ["trend.csv", "reports.json"])
    return 0


def cmd_verify(args, argv) -> int:
    if args.seed is None:
        raise ConfigError("verify needs --seed")
    only = None
    if args.suite != "all":
        only = tuple(int(x) for x in args.suite.split(","))
        bad = [n for n in only if n not in CRITERIA]
        if bad:
            raise ConfigError(f"unknown criteria {bad}; expected numbers in {sorted(CRITERIA)}")
    summary = run_acceptance_suite(AcceptanceConfig(args.seed, only), echo=print)
    out = _out_dir(args)
    (out / "acceptance.json").write_text(json.dumps(summary, indent=2, default=float) + "\n")
    _manifest(out, argv, {"suite": args.suite}, args.seed, ["acceptance.json"])
    return 0 if summary["all_passed"] else 3


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="immlim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed_required=False):
        sp.add_argument("--seed", type=int, required=seed_required)
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./runs)")
        sp.add_argument("--jobs", type=int, default=os.cpu_count() or 1)

    def scenario_flags(sp):
        sp.add_argument("--scenario", help="flat key = value scenario file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a scenario key")
        sp.add_argument("--t", type=float)
        sp.add_argument("--reps", type=int)
        sp.add_argument("--u", help="comma-separated grid, overrides u_grid")

    sp = sub.add_parser("simulate", help="normalized fdd sample of a scenario")
    scenario_flags(sp)
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("limit-sample", help="sample a limit process on a grid")
    sp.add_argument("--case", required=True, choices=("V_beta", "Z", "frac_stable", "frac_inverse", "thm21_mix",
                                                        "thm22_mix"))
    for name in ("alpha", "beta", "rho", "p", "q", "mu"):
        sp.add_argument(f"--{name}", type=float)
    sp.add_argument("--cov-form", default="max_power", choices=("max_power", "product_power", "flat", "fictitious"))
    sp.add_argument("--u", required=True)
    sp.add_argument("--reps", type=int, default=1000)
    sp.add_argument("--n-steps", type=int, default=DEFAULT_STEPS)
    common(sp, seed_required=True)
    sp.set_defaults(func=cmd_limit_sample)

    sp = sub.add_parser("renewal-calc", help="regular-variation and renewal lemma checks")
    sp.add_argument("--t-list", default="100,1000,10000")
    sp.add_argument("--reps", type=int, default=1000)
    common(sp, seed_required=True)
    sp.set_defaults(func=cmd_renewal_calc)

    sp = sub.add_parser("study", help="convergence study along a t-ladder")
    scenario_flags(sp)
    sp.add_argument("--t-list", required=True)
    sp.add_argument("--ref-reps", type=int)
    common(sp)
    sp.set_defaults(func=cmd_study)

    sp = sub.add_parser("verify", help="run the acceptance suite")
    sp.add_argument("--suite", default="all", help="'all' or comma-separated criterion numbers")
    common(sp)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[list] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = make_parser().parse_args(argv)
        return args.func(args, argv)
    except (ConfigError, ParameterError, UnsupportedScenarioError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ResourceError, NumericalError, OutOfRangeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
