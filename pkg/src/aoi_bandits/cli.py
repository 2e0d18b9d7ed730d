"""Command-line front end: inspect instances, run regret experiments, and
evaluate the regret bounds.

Arm numbering on every user-facing surface (inspect output, CSV ``arm``
columns, ``--divergence`` flags) is 1-based; the library API is 0-based.
CSV numeric fields use full round-trip decimal formatting and files are
written atomically.  Worker count for ensembles can be overridden with the
``AOI_BANDITS_WORKERS`` environment variable.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from aoi_bandits.bounds import BOUND_KINDS, BoundParams, evaluate_bounds
from aoi_bandits.instance import (
    BanditInstance,
    InstanceError,
    builtin_instance,
    classify_arms,
    load_instance,
)
from aoi_bandits.policies import POLICY_KINDS, PolicyConfig
from aoi_bandits.simulator import BaselineMode, SimConfig, run_ensemble

__all__ = ["main"]

_BUILTIN_NAMES = ("i1", "i2")

_PRESET_BENCHMARK = {
    "instances": list(_BUILTIN_NAMES),
    "policies": [kind for kind in POLICY_KINDS] + [f"aoi_{kind}" for kind in POLICY_KINDS],
    "horizon": 100_000,
    "runs": 1000,
}


def _fmt(x: float) -> str:
    """Round-trip decimal formatting for CSV values."""
    return repr(float(x))


def _display(x: float) -> str:
    return f"{float(x):.12g}"


def _load_instance_ref(ref: str) -> BanditInstance:
    if ref in _BUILTIN_NAMES:
        return builtin_instance(ref)
    path = Path(ref)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InstanceError(f"cannot read instance file {ref!r}: {exc}") from exc
    return load_instance(text)


def _write_csv_atomic(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    os.replace(tmp, path)


def _parse_policy_token(token: str, beta: float, aoi_c: float) -> PolicyConfig:
    token = token.strip()
    aoi = token.startswith("aoi_")
    kind = token[4:] if aoi else token
    if kind not in POLICY_KINDS:
        raise ValueError(
            f"unknown policy {token!r}; expected one of "
            + ", ".join(list(POLICY_KINDS) + [f"aoi_{k}" for k in POLICY_KINDS])
        )
    return PolicyConfig(policy=kind, aoi_aware=aoi, beta=beta, aoi_threshold_c=aoi_c)


def _policy_configs(entries, beta: float, aoi_c: float) -> tuple[PolicyConfig, ...]:
    configs = []
    for item in entries:
        if isinstance(item, str):
            configs.append(_parse_policy_token(item, beta, aoi_c))
        elif isinstance(item, dict):
            configs.append(
                PolicyConfig(
                    policy=item["policy"],
                    aoi_aware=bool(item.get("aoi_aware", False)),
                    beta=float(item.get("beta", beta)),
                    aoi_threshold_c=float(item.get("aoi_threshold_c", aoi_c)),
                )
            )
        else:
            raise ValueError(f"policy entries must be strings or objects, got {item!r}")
    return tuple(configs)


# ---------------------------------------------------------------------------
# inspect
# ---------------------------------------------------------------------------

def _cmd_inspect(args: argparse.Namespace) -> int:
    inst = _load_instance_ref(args.instance)
    summary = classify_arms(inst)
    k_star = summary.optimal_arm
    lines = [f"instance {inst.name}: {inst.n_arms} arms, {inst.n_states} states", ""]
    lines.append("arm  mean          gap           pseudo-gap    class")
    for k in range(inst.n_arms):
        if k == k_star:
            cls = "optimal"
        elif k in summary.strictly_competitive:
            cls = "competitive (strict)"
        elif k in summary.competitive_suboptimal:
            cls = "competitive"
        else:
            cls = "non-competitive"
        lines.append(
            f"{k + 1:<4} {_display(summary.means[k]):<13} {_display(summary.gaps[k]):<13} "
            f"{_display(summary.pseudo_gaps[k]):<13} {cls}"
        )
    lines.append("")
    lines.append(f"optimal arm: {k_star + 1} (mean {_display(summary.optimal_mean)})")
    lines.append(f"mu_min: {_display(summary.mu_min)}")
    comp = ", ".join(str(k + 1) for k in sorted(summary.competitive_suboptimal)) or "none"
    strict = ", ".join(str(k + 1) for k in sorted(summary.strictly_competitive)) or "none"
    lines.append(f"competitive sub-optimal arms: {comp}")
    lines.append(f"strictly competitive arms: {strict}")
    lines.append(f"C = {summary.n_competitive}")
    lines.append("")
    lines.append("expected pseudo-rewards (row: arm whose reward is inferred, col: arm played)")
    for ell in range(inst.n_arms):
        row = "  ".join(f"{_display(summary.expected_pseudo[ell, k]):>8}" for k in range(inst.n_arms))
        lines.append(f"arm {ell + 1}: {row}")
    print("\n".join(lines))
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _regret_rows(result) -> list[list]:
    rows = []
    for label in sorted(result.curves):
        curve = result.curves[label]
        for i, cp in enumerate(curve.checkpoints):
            rows.append(
                [
                    label,
                    cp,
                    _fmt(curve.mean_regret[i]),
                    _fmt(curve.stderr[i]),
                    curve.n_runs,
                    curve.baseline_mode.value,
                ]
            )
    return rows


def _pull_rows(result) -> list[list]:
    rows = []
    for label in sorted(result.pulls):
        stats = result.pulls[label]
        for arm in range(stats.mean.size):
            rows.append([label, arm + 1, _fmt(stats.mean[arm]), _fmt(stats.stderr[arm])])
    return rows


def _plot_regret_csv(csv_path: Path, png_path: Path) -> None:
    """Render mean regret vs horizon with stderr bands, from the CSV alone."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series: dict[str, list[tuple[int, float, float]]] = {}
    with open(csv_path, newline="") as fh:
        for row in csv.DictReader(fh):
            series.setdefault(row["policy"], []).append(
                (int(row["checkpoint"]), float(row["mean_regret"]), float(row["stderr"]))
            )
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label in sorted(series):
        points = sorted(series[label])
        cps = np.array([p[0] for p in points], dtype=float)
        mean = np.array([p[1] for p in points])
        err = np.array([p[2] for p in points])
        ax.plot(cps, mean, label=label)
        ax.fill_between(cps, mean - err, mean + err, alpha=0.25, linewidth=0)
    ax.set_xscale("log")
    ax.set_xlabel("slots")
    ax.set_ylabel("mean AoI regret")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)


def _simulate_instance(
    inst: BanditInstance,
    sim: SimConfig,
    out_dir: Path,
    suffix: str,
    plot: bool,
) -> list[Path]:
    result = run_ensemble(sim, inst)
    regret_path = out_dir / f"regret{suffix}.csv"
    pulls_path = out_dir / f"pulls{suffix}.csv"
    _write_csv_atomic(
        regret_path,
        ["policy", "checkpoint", "mean_regret", "stderr", "n_runs", "baseline_mode"],
        _regret_rows(result),
    )
    _write_csv_atomic(
        pulls_path, ["policy", "arm", "mean_pulls", "stderr"], _pull_rows(result)
    )
    written = [regret_path, pulls_path]
    if plot:
        png = out_dir / f"regret{suffix}.png"
        _plot_regret_csv(regret_path, png)
        written.append(png)
    return written


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = dict(json.loads(Path(args.config).read_text())) if args.config else {}

    def setting(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        return cfg.get(key, default)

    preset = setting(args.preset, "preset", None)
    preset_cfg = _PRESET_BENCHMARK if preset == "benchmark" else {}
    if preset is not None and preset != "benchmark":
        raise ValueError(f"unknown preset {preset!r}; available: benchmark")

    horizon = int(setting(args.horizon, "horizon", preset_cfg.get("horizon", 10_000)))
    runs = int(setting(args.runs, "runs", preset_cfg.get("runs", 200)))
    seed = int(setting(args.seed, "seed", 0))
    beta = float(setting(args.beta, "beta", 1.5))
    aoi_c = float(setting(args.aoi_threshold_c, "aoi_threshold_c", 4.0))
    baseline = BaselineMode(setting(args.baseline, "baseline", "coupled_oracle"))
    plot = bool(setting(args.plot or None, "plot", False))
    out_dir = Path(setting(args.out_dir, "out_dir", "."))

    checkpoints = setting(args.checkpoints, "checkpoints", None)
    if isinstance(checkpoints, str):
        checkpoints = tuple(int(c) for c in checkpoints.split(",") if c.strip())
    elif checkpoints is not None:
        checkpoints = tuple(int(c) for c in checkpoints)

    policy_spec = setting(
        args.policies, "policies", preset_cfg.get("policies", ["ucb", "ts_beta", "cucb", "cts_beta"])
    )
    if isinstance(policy_spec, str):
        policy_spec = [p for p in policy_spec.split(",") if p.strip()]
    policies = _policy_configs(policy_spec, beta, aoi_c)

    if preset_cfg:
        instance_refs = preset_cfg["instances"]
    else:
        instance_refs = [setting(args.instance, "instance", "i1")]

    sim = SimConfig(
        horizon=horizon,
        n_runs=runs,
        master_seed=seed,
        checkpoints=checkpoints,
        baseline_mode=baseline,
        policies=policies,
    )
    written: list[Path] = []
    for ref in instance_refs:
        inst = _load_instance_ref(ref)
        suffix = f"_{inst.name}" if len(instance_refs) > 1 else ""
        written.extend(_simulate_instance(inst, sim, out_dir, suffix, plot))
    for path in written:
        print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

def _parse_divergences(pairs: list[str]) -> dict[int, float]:
    out: dict[int, float] = {}
    for pair in pairs or []:
        arm_text, _, value_text = pair.partition("=")
        try:
            arm = int(arm_text)
            value = float(value_text)
        except ValueError:
            raise ValueError(f"--divergence expects ARM=VALUE, got {pair!r}") from None
        if arm < 1:
            raise ValueError(f"--divergence arm numbers are 1-based, got {arm}")
        out[arm - 1] = value
    return out


def _cmd_bounds(args: argparse.Namespace) -> int:
    inst = _load_instance_ref(args.instance)
    summary = classify_arms(inst)
    kinds = tuple(k.strip() for k in args.kinds.split(",") if k.strip())
    divergences = _parse_divergences(args.divergence)
    if "lower" in kinds:
        missing = sorted(k for k in summary.strictly_competitive if k not in divergences)
        if missing:
            raise ValueError(
                "lower bound requested but --divergence missing for strictly "
                "competitive arm(s): " + ", ".join(str(k + 1) for k in missing)
            )
    params = BoundParams(
        alpha=args.alpha,
        consistency_m=args.consistency_m,
        divergences=divergences,
        beta=args.beta,
        search_cap=args.search_cap,
    )
    horizons = tuple(int(h) for h in args.horizons.split(",") if h.strip())
    report = evaluate_bounds(summary, params, horizons, kinds)

    def threshold_text(value: int | None) -> str:
        return "infeasible" if value is None else str(value)

    rows = [
        [kind, horizon, _fmt(value), threshold_text(report.t0), threshold_text(report.tb),
         _fmt(report.beta), _fmt(report.alpha), _fmt(report.consistency_m)]
        for (kind, horizon, value, _, _, _, _, _) in report.rows()
    ]
    out_path = Path(args.out_dir) / "bounds.csv"
    _write_csv_atomic(out_path, ["kind", "T", "value", "t0", "tb", "beta", "alpha", "M"], rows)
    print(f"t0 = {threshold_text(report.t0)}, tb = {threshold_text(report.tb)}")
    print(f"wrote {out_path}")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aoi-bandits",
        description="Correlated-channel AoI scheduling: instances, experiments, bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_inspect = sub.add_parser("inspect", help="print derived quantities of an instance")
    p_inspect.add_argument("instance", help="builtin name (i1, i2) or path to a JSON document")
    p_inspect.set_defaults(func=_cmd_inspect)

    p_sim = sub.add_parser("simulate", help="run a seeded Monte-Carlo regret experiment")
    p_sim.add_argument("--instance", help="builtin name (i1, i2) or path (default i1)")
    p_sim.add_argument("--out-dir", help="output directory (default .)")
    p_sim.add_argument("--seed", type=int, help="master seed (default 0)")
    p_sim.add_argument("--horizon", type=int, help="slots per episode (default 10000)")
    p_sim.add_argument("--runs", type=int, help="episodes per policy (default 200)")
    p_sim.add_argument("--policies", help="comma list, e.g. ucb,cucb,aoi_cts_beta")
    p_sim.add_argument("--checkpoints", help="comma list of slots (default: 50 log-spaced)")
    p_sim.add_argument(
        "--baseline", choices=[m.value for m in BaselineMode], help="regret baseline"
    )
    p_sim.add_argument("--beta", type=float, help="Gaussian posterior variance scale (> 1)")
    p_sim.add_argument("--aoi-threshold-c", dest="aoi_threshold_c", type=float,
                       help="AoI-aware trigger constant c in c*ln(t+1)")
    p_sim.add_argument("--plot", action="store_true", default=False,
                       help="render regret curves from the CSV (requires matplotlib)")
    p_sim.add_argument("--config", help="JSON config file; flags override its values")
    p_sim.add_argument("--preset", help="experiment preset: benchmark "
                   "(both builtins, all twelve policy variants, horizon 1e5, 1000 runs)")
    p_sim.set_defaults(func=_cmd_simulate)

    p_bounds = sub.add_parser("bounds", help="evaluate regret bounds over a horizon grid")
    p_bounds.add_argument("--instance", required=True)
    p_bounds.add_argument("--out-dir", default=".")
    p_bounds.add_argument("--horizons", default="100,1000,10000,100000",
                          help="comma list of horizons")
    p_bounds.add_argument("--alpha", type=float, default=0.5, help="consistency exponent in (0,1)")
    p_bounds.add_argument("--consistency-m", dest="consistency_m", type=float, default=1.0,
                          help="consistency constant M > 0")
    p_bounds.add_argument("--divergence", action="append", metavar="ARM=VALUE",
                          help="divergence for a strictly competitive arm (1-based), repeatable")
    p_bounds.add_argument("--beta", type=float, default=1.5)
    p_bounds.add_argument("--search-cap", dest="search_cap", type=int, default=10**8)
    p_bounds.add_argument("--kinds", default=",".join(BOUND_KINDS),
                          help="comma subset of lower,upper_cucb,upper_cts")
    p_bounds.set_defaults(func=_cmd_bounds)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InstanceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
