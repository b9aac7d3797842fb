"""Command-line front end.

Subcommands: values, thresholds, simulate, sigma2, coupling, clt, verify,
closeness.  Each command is a pure function of (config, cache state):
identical inputs produce byte-identical reports, whatever --threads says.

Exit codes: 0 success, 1 invalid configuration, 2 I/O failure,
3 embedded acceptance check failed.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import sys
from dataclasses import replace

import numpy as np

from . import chain as chain_mod
from . import estimators as est_mod
from . import verify as verify_mod
from .bellman import (
    ASYMPTOTIC_RATE,
    CacheError,
    compute_derivatives,
    compute_thresholds,
    converge_xi,
    load_or_compute_values,
    stationary_selection_rate,
    write_threshold_csv,
)
from .config import ConfigError, RunConfig, load_config_file
from .numerics import GridSpec
from .policies import PolicyKind, mean_selection_check, sample_selection_counts
from .rng import POLICY
from .stats import ks_critical

log = logging.getLogger("altsel")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_CHECK = 3


# ---------------------------------------------------------------------------
# plumbing


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _render(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(payload, sort_keys=True, indent=2,
                          default=_json_default) + "\n"
    lines = [f"command: {payload['command']}"]
    for key, value in payload.items():
        if key in ("command", "config"):
            continue
        if isinstance(value, dict):
            lines.append(f"{key}:")
            lines.extend(f"  {k} = {_fmt(v)}" for k, v in sorted(value.items()))
        elif isinstance(value, list):
            lines.append(f"{key}:")
            lines.extend(f"  {_fmt(v)}" for v in value)
        else:
            lines.append(f"{key} = {_fmt(value)}")
    cfg = payload["config"]
    lines.append("config: " + " ".join(f"{k}={cfg[k]}" for k in sorted(cfg)))
    return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, dict):
        return "{" + ", ".join(f"{k}={_fmt(v)}" for k, v in sorted(value.items())) + "}"
    return str(value)


def _payload(cfg: RunConfig, command: str, **body) -> dict:
    return {"command": command, "config": cfg.as_dict(), **body}


def _grid(cfg: RunConfig) -> GridSpec:
    return GridSpec.from_step(cfg.grid_h)


def _tables(cfg: RunConfig, horizon: int | None = None):
    n = cfg.horizon if horizon is None else horizon
    vt, hit = load_or_compute_values(_grid(cfg), n, cfg.cache_dir)
    log.info("value table h=%g n=%d: %s", cfg.grid_h, n,
             "cache hit" if hit else "computed")
    return vt


def _policy_from_flag(cfg: RunConfig, name: str, fixed_c: float,
                      horizon: int):
    if name == "optimal":
        vt = _tables(cfg, horizon)
        tf = compute_thresholds(vt, cfg.tol_xi)
        return PolicyKind.optimal(tf, horizon), vt, tf
    xi, _ = converge_xi(_grid(cfg), cfg.tol_xi)
    if name == "limit":
        return PolicyKind.limit(xi), None, None
    return PolicyKind.fixed_threshold(fixed_c), None, None


# ---------------------------------------------------------------------------
# subcommands


def cmd_values(cfg: RunConfig, args) -> int:
    vt = _tables(cfg)
    v_n0 = vt.at_zero(cfg.horizon)
    payload = _payload(
        cfg, "values",
        horizon=cfg.horizon,
        v_n_at_0=v_n0,
        centered_gap=v_n0 - ASYMPTOTIC_RATE * cfg.horizon,
        asymptotic_rate=float(ASYMPTOTIC_RATE),
    )
    _emit(_render(payload, "json" if cfg.output_format == "json" else "text"),
          args.out)
    return EXIT_OK


def cmd_thresholds(cfg: RunConfig, args) -> int:
    vt = _tables(cfg, max(cfg.horizon, 10))
    tf = compute_thresholds(vt, cfg.tol_xi)
    y_max = None if args.full_range else 0.35
    xi_rows = [(k, float(tf.xi[k])) for k in range(1, min(10, tf.horizon) + 1)]
    if cfg.output_format == "json":
        x = tf.grid.x
        keep = slice(None) if y_max is None else x <= y_max + 1e-12
        payload = _payload(
            cfg, "thresholds",
            xi={str(k): v for k, v in xi_rows},
            xi_limit=tf.xi_limit,
            y=[float(v) for v in x[keep]],
            curves={f"g_{k}": [float(v) for v in tf.matrix[k][keep]]
                    for k in range(1, min(10, tf.horizon) + 1)},
        )
        _emit(_render(payload, "json"), args.out)
        return EXIT_OK
    buf = io.StringIO()
    write_threshold_csv(tf, buf, y_max=y_max)
    buf.write("\r\n")
    buf.write("k,xi_k\r\n")
    for k, v in xi_rows:
        buf.write(f"{k},{v:.12g}\r\n")
    buf.write(f"inf,{tf.xi_limit:.12g}\r\n")
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, args) -> int:
    policy, vt, tf = _policy_from_flag(cfg, args.policy, args.fixed_c,
                                       cfg.horizon)
    if policy.tag == "optimal":
        report = mean_selection_check(tf, cfg.horizon, cfg.reps, cfg.seed, vt)
        ok = abs(report.diagnostics["gap"]) <= 3.0 * report.std_error
    else:
        counts = sample_selection_counts(policy, cfg.horizon, cfg.reps,
                                         cfg.seed, domain=POLICY)
        mean = float(counts.sum()) / cfg.reps
        se = float(np.std(counts, ddof=1)) / np.sqrt(cfg.reps)
        level = policy.level()
        target = stationary_selection_rate(level) * cfg.horizon
        # the chain starts at Y = 0, so allow an O(1) transient offset
        ok = abs(mean - target) <= 3.0 * se + 1.0
        report = est_mod.EstimatorReport(
            "replication", mean, se, (mean - 1.96 * se, mean + 1.96 * se),
            cfg.reps, {"stationary_mean": target, "threshold": level},
        )
    payload = _payload(
        cfg, "simulate",
        policy=args.policy,
        report=est_mod.report_json_dict(report, {"n": cfg.horizon}),
        check_passed=ok,
    )
    _emit(_render(payload, "json" if cfg.output_format == "json" else "text"),
          args.out)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_sigma2(cfg: RunConfig, args) -> int:
    xi, _ = converge_xi(_grid(cfg), cfg.tol_xi)
    if args.method == "replication":
        policy, _, _ = _policy_from_flag(cfg, args.policy, args.fixed_c,
                                         cfg.horizon)
        report = est_mod.estimate_sigma2_replication(cfg.horizon, cfg.reps,
                                                     policy, cfg.seed)
    elif args.method == "regenerative":
        report = est_mod.estimate_sigma2_regenerative(
            cfg.horizon, PolicyKind.limit(xi), xi, cfg.seed)
    else:
        report = est_mod.estimate_sigma2_series(xi, cfg.max_lag, cfg.reps,
                                                cfg.seed)
    ok = report.estimate - 3.0 * report.std_error > 0.0
    payload = _payload(
        cfg, "sigma2",
        method=args.method,
        xi=xi,
        report=est_mod.report_json_dict(
            report, {"n": cfg.horizon, "reps": cfg.reps,
                     "max_lag": cfg.max_lag}),
        positive=ok,
    )
    _emit(_render(payload, "json" if cfg.output_format == "json" else "text"),
          args.out)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_coupling(cfg: RunConfig, args) -> int:
    xi, _ = converge_xi(_grid(cfg), cfg.tol_xi)
    report = chain_mod.coupling_experiment(
        chain_mod.ChainState(0.0, 0.0), cfg.reps, xi, cfg.seed)
    body = chain_mod.coupling_report_dict(report)
    in_band = all(abs(t["empirical"] - t["theoretical"]) <= t["band"]
                  for t in body["tail"])
    ok = in_band and body["pathwise_violations"] == 0
    payload = _payload(cfg, "coupling", check_passed=ok, **body)
    _emit(_render(payload, "json" if cfg.output_format == "json" else "text"),
          args.out)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_clt(cfg: RunConfig, args) -> int:
    xi, _ = converge_xi(_grid(cfg), cfg.tol_xi)
    sigma2 = args.sigma2
    if sigma2 is None:
        sigma2 = est_mod.estimate_sigma2_series(xi, cfg.max_lag, 200_000,
                                                cfg.seed).estimate
    center = args.center or ("dp_value" if args.policy == "optimal"
                             else "asymptotic")
    policy, vt, _ = _policy_from_flag(cfg, args.policy, args.fixed_c,
                                      cfg.horizon)
    dp_value = vt.at_zero(cfg.horizon) if vt is not None else None
    if center == "dp_value" and dp_value is None:
        dp_value = _tables(cfg).at_zero(cfg.horizon)
    diag = est_mod.clt_diagnostic(cfg.horizon, cfg.reps, policy, center,
                                  sigma2, cfg.seed, dp_value=dp_value)
    critical = ks_critical(cfg.reps, 0.01)
    ok = diag.ks_to_normal < critical
    if cfg.output_format == "csv":
        buf = io.StringIO()
        est_mod.write_standardized_csv(diag, buf)
        _emit(buf.getvalue(), args.out)
        return EXIT_OK if ok else EXIT_CHECK
    payload = _payload(
        cfg, "clt",
        policy=args.policy,
        center=center,
        sigma2=sigma2,
        ks_to_normal=diag.ks_to_normal,
        ks_critical_1pct=critical,
        skew=diag.skew,
        excess_kurtosis=diag.excess_kurtosis,
        check_passed=ok,
    )
    _emit(_render(payload, "json" if cfg.output_format == "json" else "text"),
          args.out)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_verify(cfg: RunConfig, args) -> int:
    vt = _tables(cfg)
    tf = compute_thresholds(vt, cfg.tol_xi)
    dt = compute_derivatives(vt, tf)
    reports = verify_mod.certify_all(vt, tf, dt)
    if tf.horizon >= 10:
        reports = sorted(reports + [verify_mod.certify_figure1(tf)],
                         key=lambda r: r.lemma_id)
    ok = all(r.passed for r in reports)
    if cfg.output_format == "json":
        _emit(verify_mod.reports_json(reports) + "\n", args.out)
    else:
        _emit(verify_mod.render_text(reports) + "\n", args.out)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_closeness(cfg: RunConfig, args) -> int:
    rungs = sorted(int(r) for r in args.rungs.split(","))
    vt = _tables(cfg, max(rungs))
    tf = compute_thresholds(vt, cfg.tol_xi)
    ladder = est_mod.l2_closeness(rungs, cfg.reps, tf, tf.xi_limit, cfg.seed)
    ok = True
    for a, b in zip(ladder, ladder[1:]):
        band = 2.0 * np.hypot(a.std_error, b.std_error)
        if b.var_delta_over_n > a.var_delta_over_n + band:
            ok = False
    payload = _payload(
        cfg, "closeness",
        xi=tf.xi_limit,
        ladder=[{"n": r.n, "var_delta_over_n": r.var_delta_over_n,
                 "std_error": r.std_error, "reps": r.reps} for r in ladder],
        decreasing=ok,
    )
    _emit(_render(payload, "json" if cfg.output_format == "json" else "text"),
          args.out)
    return EXIT_OK if ok else EXIT_CHECK


# ---------------------------------------------------------------------------
# argument wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="altsel",
        description="Dynamic programming and Monte Carlo for on-line "
                    "alternating-subsequence selection.",
    )
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--grid-h", type=float, dest="grid_h")
    parser.add_argument("--horizon", "-n", type=int, dest="horizon")
    parser.add_argument("--reps", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--tol-xi", type=float, dest="tol_xi")
    parser.add_argument("--max-lag", type=int, dest="max_lag")
    parser.add_argument("--cache-dir", dest="cache_dir")
    parser.add_argument("--format", dest="output_format",
                        choices=["json", "csv", "text"])
    parser.add_argument("--threads", type=int)
    parser.add_argument("--out", help="write the report here (default stdout)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("values", help="compute/cache v_k and print v_n(0)") \
        .set_defaults(func=cmd_values)
    p = sub.add_parser("thresholds", help="emit threshold-curve CSV")
    p.add_argument("--full-range", action="store_true")
    p.set_defaults(func=cmd_thresholds)
    p = sub.add_parser("simulate", help="Monte Carlo mean selections")
    p.add_argument("--policy", choices=["optimal", "limit", "fixed"],
                   default="optimal")
    p.add_argument("--fixed-c", type=float, default=0.25)
    p.set_defaults(func=cmd_simulate)
    p = sub.add_parser("sigma2", help="estimate the variance constant")
    p.add_argument("--method", choices=["replication", "regenerative",
                                        "series"], default="replication")
    p.add_argument("--policy", choices=["optimal", "limit", "fixed"],
                   default="limit")
    p.add_argument("--fixed-c", type=float, default=0.25)
    p.set_defaults(func=cmd_sigma2)
    sub.add_parser("coupling", help="chain coupling-time experiment") \
        .set_defaults(func=cmd_coupling)
    p = sub.add_parser("clt", help="normality diagnostic of scaled counts")
    p.add_argument("--policy", choices=["optimal", "limit"], default="limit")
    p.add_argument("--center", choices=["dp_value", "asymptotic"])
    p.add_argument("--sigma2", type=float)
    p.add_argument("--fixed-c", type=float, default=0.25)
    p.set_defaults(func=cmd_clt)
    sub.add_parser("verify", help="certify the structural lemmas") \
        .set_defaults(func=cmd_verify)
    p = sub.add_parser("closeness", help="coupled-policy variance ladder")
    p.add_argument("--rungs", default="100,1000,10000")
    p.set_defaults(func=cmd_closeness)
    return parser


def _config_from_args(args) -> RunConfig:
    cfg = load_config_file(args.config) if args.config else RunConfig()
    overrides = {
        name: getattr(args, name)
        for name in ("grid_h", "horizon", "reps", "seed", "tol_xi",
                     "max_lag", "cache_dir", "output_format")
        if getattr(args, name, None) is not None
    }
    return replace(cfg, **overrides).validate()


def _apply_threads(threads: int | None) -> None:
    # caps the kernel worker count; results are identical at any setting
    if threads:
        if threads < 0:
            raise ConfigError(f"threads must be positive, got {threads}")
        import numba

        numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
    )
    try:
        cfg = _config_from_args(args)
        _apply_threads(args.threads)
        return args.func(cfg, args)
    except (ConfigError, ValueError) as exc:
        print(f"altsel: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CacheError, OSError) as exc:
        print(f"altsel: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
