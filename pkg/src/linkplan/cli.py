"""Command-line tool: scenario configs in, CSV sweep tables / reports out.

Subcommands:
  outage-sweep   outage vs sweep variable for every configured evaluator
  rate-sweep     ergodic achievable rate vs sweep variable
  min-antennas   smallest RF antenna count meeting the route's rate target
  validate       analytic evaluators vs Monte Carlo on the configured grid

Exit codes: 0 ok; 1 validate-tolerance failures; 2 config rejected;
3 evaluator errors (rows carry NaN plus an error message).
"""
from __future__ import annotations

import argparse
import math
import os
import sys

from . import __version__
from .analysis import (
    FSO_CLT,
    FSO_PRODUCT_BOUND,
    MONTE_CARLO,
    RF_JENSEN_LOWER,
    RF_JENSEN_UPPER,
    RF_LINEARIZED,
    fso_ergodic_rate,
    min_rf_antennas,
)
from .config import RF_TAGS, ConfigError, ScenarioConfig, load_config
from .network import mesh_outage, route_ergodic_rate, route_limiting_hop
from .simulate import McConfig, simulate_mesh

_Z95 = 1.959963984540054


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _sanitize(msg: str) -> str:
    return str(msg).replace(",", ";").replace("\n", " ")


def _provenance(cfg: ScenarioConfig, seed: int):
    return [
        f"# linkplan {__version__}",
        f"# config_sha256: {cfg.sha256}",
        f"# seed: {seed}",
    ]


def _materialize_kwargs(cfg: ScenarioConfig, grid_value):
    if cfg.sweep_variable == "snr_db":
        return {"snr_db": float(grid_value)}
    if cfg.sweep_variable == "N":
        return {"n_override": int(grid_value)}
    if cfg.sweep_variable == "M":
        return {"m_override": int(grid_value)}
    return {"n_routes": int(grid_value)}


def cmd_outage_sweep(cfg: ScenarioConfig, mc: McConfig):
    """Rows: sweep_var,method,outage,ci_halfwidth,error."""
    lines = _provenance(cfg, mc.seed)
    lines.append("sweep_var,method,outage,ci_halfwidth,error")
    had_error = False
    for g in cfg.sweep_grid:
        try:
            _, _, mesh = cfg.materialize(**_materialize_kwargs(cfg, g))
            build_error = None
        except Exception as exc:
            mesh, build_error = None, exc
        for tag in cfg.evaluators:
            if build_error is not None:
                lines.append(f"{_fmt(g)},{tag},nan,nan,{_sanitize(build_error)}")
                had_error = True
                continue
            try:
                if tag == MONTE_CARLO:
                    est = simulate_mesh(mesh, mc)
                elif tag in RF_TAGS:
                    est = mesh_outage(mesh, rf_method=tag, fso_method=FSO_CLT,
                                      theta=cfg.theta)
                else:
                    est = mesh_outage(mesh, rf_method=RF_LINEARIZED, fso_method=tag,
                                      theta=cfg.theta)
                lines.append(f"{_fmt(g)},{tag},{_fmt(est.value)},"
                             f"{_fmt(est.ci_halfwidth)},")
            except Exception as exc:
                lines.append(f"{_fmt(g)},{tag},nan,nan,{_sanitize(exc)}")
                had_error = True
    return lines, (3 if had_error else 0)


def cmd_rate_sweep(cfg: ScenarioConfig, mc: McConfig):
    """Rows: sweep_var,rate_npcu,limiting_hop."""
    lines = _provenance(cfg, mc.seed)
    lines.append("sweep_var,rate_npcu,limiting_hop")
    had_error = False
    for g in cfg.sweep_grid:
        try:
            _, _, mesh = cfg.materialize(**_materialize_kwargs(cfg, g))
            rates = [route_ergodic_rate(r) for r in mesh.routes]
            best = max(range(len(rates)), key=rates.__getitem__)
            hop_pos = route_limiting_hop(mesh.routes[best])
            kind, idx = cfg.routes[best][hop_pos]
            lines.append(f"{_fmt(g)},{_fmt(rates[best])},{kind}:{idx}")
        except Exception as exc:
            lines.append(f"{_fmt(g)},nan,error:{_sanitize(exc)}")
            had_error = True
    return lines, (3 if had_error else 0)


def cmd_min_antennas(cfg: ScenarioConfig, mc: McConfig):
    """Rows: sweep_var,hop,epsilon,n_antennas,error.

    The rate target for each RF hop is the slowest FSO hop's ergodic rate
    (the antenna count at which the RF hop stops limiting the route); with no
    FSO hops the hop's own code rate R is the target.  FSO transmit powers
    must be explicit here: the default N-coupled power would depend on the
    antenna count being solved for.
    """
    if cfg.sweep_variable != "snr_db":
        raise ConfigError("sweep.variable: min-antennas requires 'snr_db'")
    for i, s in enumerate(cfg.fso_hops):
        if s.p_tx is None:
            raise ConfigError(f"fso_hops[{i}].p_tx_db: min-antennas requires an "
                              "explicit transmit power")
    lines = _provenance(cfg, mc.seed)
    lines.append("sweep_var,hop,epsilon,n_antennas,error")
    had_error = False
    for g in cfg.sweep_grid:
        for i, spec in enumerate(cfg.rf_hops):
            try:
                rf, fso, _ = cfg.materialize(snr_db=float(g))
                if fso:
                    target = min(fso_ergodic_rate(h) for h in fso)
                else:
                    target = spec.R
                hop = rf[i]
                n = min_rf_antennas(spec.K, spec.omega, hop.pa, target)
                lines.append(f"{_fmt(g)},rf:{i},{_fmt(spec.epsilon)},{n},")
            except Exception as exc:
                lines.append(f"{_fmt(g)},rf:{i},{_fmt(spec.epsilon)},nan,"
                             f"{_sanitize(exc)}")
                had_error = True
    return lines, (3 if had_error else 0)


def cmd_validate(cfg: ScenarioConfig, mc: McConfig):
    """Analytic evaluators vs MC at every grid point, per tolerance class:

    CLT methods: within factor 1.5 of MC wherever MC is in [1e-3, 0.5]
    (SKIP outside); lower/upper bounds: correct side of MC within 3 sigma.
    """
    lines = _provenance(cfg, mc.seed)
    checked = passed = failed = skipped = 0
    had_error = False
    analytic = [t for t in cfg.evaluators if t != MONTE_CARLO]
    for g in cfg.sweep_grid:
        try:
            _, _, mesh = cfg.materialize(**_materialize_kwargs(cfg, g))
            ref = simulate_mesh(mesh, mc)
        except Exception as exc:
            lines.append(f"point={_fmt(g)} status=ERROR detail={_sanitize(exc)}")
            had_error = True
            continue
        sigma3 = 3.0 * ref.ci_halfwidth / _Z95
        for tag in analytic:
            checked += 1
            try:
                if tag in RF_TAGS:
                    est = mesh_outage(mesh, rf_method=tag, fso_method=FSO_CLT,
                                      theta=cfg.theta)
                else:
                    est = mesh_outage(mesh, rf_method=RF_LINEARIZED, fso_method=tag,
                                      theta=cfg.theta)
            except Exception as exc:
                lines.append(f"point={_fmt(g)} method={tag} status=ERROR "
                             f"detail={_sanitize(exc)}")
                had_error = True
                checked -= 1
                continue
            head = (f"point={_fmt(g)} method={tag} mc={_fmt(ref.value)} "
                    f"mc_ci={_fmt(ref.ci_halfwidth)} value={_fmt(est.value)}")
            if tag == RF_JENSEN_LOWER:
                ok = est.value <= ref.value + sigma3
                verdict = "PASS" if ok else "FAIL"
                lines.append(f"{head} status={verdict} class=lower_bound")
            elif tag in (RF_JENSEN_UPPER, FSO_PRODUCT_BOUND):
                ok = ref.value <= est.value + sigma3
                verdict = "PASS" if ok else "FAIL"
                lines.append(f"{head} status={verdict} class=upper_bound")
            else:
                if not 1e-3 <= ref.value <= 0.5:
                    lines.append(f"{head} status=SKIP class=clt_factor_1.5 "
                                 f"detail=mc_outside_[1e-3,0.5]")
                    skipped += 1
                    continue
                factor = max(est.value / ref.value, ref.value / max(est.value, 1e-300))
                ok = factor <= 1.5
                verdict = "PASS" if ok else "FAIL"
                lines.append(f"{head} status={verdict} class=clt_factor_1.5 "
                             f"factor={_fmt(factor)}")
            if ok:
                passed += 1
            else:
                failed += 1
    lines.append(f"summary: checked={checked} passed={passed} failed={failed} "
                 f"skipped={skipped}")
    if had_error:
        return lines, 3
    return lines, (1 if failed else 0)


def _build_mc(cfg: ScenarioConfig, args) -> McConfig:
    trials = args.trials if args.trials is not None else cfg.mc_trials
    seed = args.seed if args.seed is not None else cfg.mc_seed
    workers = cfg.mc_workers
    env = os.environ.get("LINKPLAN_WORKERS")
    if env is not None:
        try:
            workers = int(env)
        except ValueError:
            raise ConfigError(f"LINKPLAN_WORKERS: expected an integer, got {env!r}")
    if args.workers is not None:
        workers = args.workers
    try:
        return McConfig(trials, seed, workers, cfg.mc_target_ci)
    except ValueError as exc:
        raise ConfigError(f"mc: {exc}") from exc


_COMMANDS = {
    "outage-sweep": cmd_outage_sweep,
    "rate-sweep": cmd_rate_sweep,
    "min-antennas": cmd_min_antennas,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="linkplan",
        description="Outage / rate analysis of HARQ-assisted RF-FSO networks.")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="scenario YAML path")
    parser.add_argument("--out", default=None, help="output path (default stdout)")
    parser.add_argument("--seed", type=int, default=None, help="override mc.seed")
    parser.add_argument("--trials", type=int, default=None, help="override mc.trials")
    parser.add_argument("--workers", type=int, default=None, help="override mc.workers")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        mc = _build_mc(cfg, args)
        lines, code = _COMMANDS[args.command](cfg, mc)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
