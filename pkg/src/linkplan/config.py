"""Scenario configuration: YAML document -> validated parameter objects.

All dB <-> linear conversions happen here (and in the CLI); the core modules
only ever see linear noise-normalized powers.  Unless a `p_tx_db` is given,
an FSO hop's transmit power is coupled to its same-index RF hop as
P_tx = N * P_cons, so an `snr_db` sweep moves both link types coherently.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import yaml

from .analysis import (
    FSO_CLT,
    FSO_PRODUCT_BOUND,
    MONTE_CARLO,
    RF_JENSEN_LOWER,
    RF_JENSEN_UPPER,
    RF_LINEARIZED,
    RF_LOW_SNR,
    RF_PIECEWISE,
    RF_SINGLE_SHOT,
    FsoHopParams,
    RfHopParams,
)
from .channel import FsoExponential, FsoGammaGamma, RicianFading
from .hardware import PaConfig, SaturationError
from .network import MeshNetwork, Route

RF_TAGS = (RF_LOW_SNR, RF_PIECEWISE, RF_LINEARIZED, RF_SINGLE_SHOT,
           RF_JENSEN_LOWER, RF_JENSEN_UPPER)
FSO_TAGS = (FSO_CLT, FSO_PRODUCT_BOUND)
KNOWN_TAGS = RF_TAGS + FSO_TAGS + (MONTE_CARLO,)

SWEEP_VARIABLES = ("snr_db", "N", "M", "routes")


class ConfigError(ValueError):
    """Configuration rejected; message carries the offending field path."""


def _db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def _require(cond: bool, path: str, msg: str):
    if not cond:
        raise ConfigError(f"{path}: {msg}")


def _get_number(d: dict, key: str, path: str, default=None, required=False):
    if key not in d:
        _require(not required, f"{path}.{key}", "required field missing")
        return default
    v = d[key]
    _require(isinstance(v, (int, float)) and not isinstance(v, bool),
             f"{path}.{key}", f"expected a number, got {v!r}")
    return float(v)


def _get_int(d: dict, key: str, path: str, default=None, required=False):
    if key not in d:
        _require(not required, f"{path}.{key}", "required field missing")
        return default
    v = d[key]
    _require(isinstance(v, int) and not isinstance(v, bool),
             f"{path}.{key}", f"expected an integer, got {v!r}")
    return v


@dataclass
class RfHopSpec:
    K: float        # Rician factor
    omega: float    # mean per-antenna gain
    N: int          # transmit antennas
    M: int          # HARQ rounds
    C: int          # channel realizations per round
    R: float        # initial code rate, npcu
    epsilon: float  # PA peak efficiency
    theta_pa: float # PA class exponent
    p_max: float    # linear max output power (inf = ideal)
    p_cons: float   # linear consumed power per antenna


@dataclass
class FsoHopSpec:
    model: str            # "exponential" | "gamma_gamma"
    lam: float | None     # exponential rate
    a: float | None       # gamma_gamma shape
    b: float | None
    M: int
    C_tilde: int
    R: float
    p_tx: float | None    # linear transmit power; None = coupled N*P_cons
    coupled_rf: int       # index of the RF hop supplying the coupling


@dataclass
class ScenarioConfig:
    rf_hops: list
    fso_hops: list
    routes: list          # list of list of ("rf"|"fso", index)
    sweep_variable: str
    sweep_grid: list
    evaluators: list
    mc_trials: int
    mc_seed: int
    mc_workers: int
    mc_target_ci: float | None
    theta: float          # tangent anchor for the piecewise RF evaluator
    sha256: str = ""
    source: str = ""

    # ---- materialization -------------------------------------------------

    def _rf_params(self, spec: RfHopSpec, snr_delta_db: float,
                   n_override, m_override) -> RfHopParams:
        n = n_override if n_override is not None else spec.N
        m = m_override if m_override is not None else spec.M
        p_cons = spec.p_cons * _db_to_linear(snr_delta_db)
        pa = PaConfig(spec.epsilon, spec.theta_pa, spec.p_max, p_cons)
        return RfHopParams(RicianFading(spec.K, spec.omega, n), pa,
                           m, spec.C, spec.R)

    def _fso_params(self, spec: FsoHopSpec, snr_delta_db: float,
                    n_override, m_override, rf_hops) -> FsoHopParams:
        m = m_override if m_override is not None else spec.M
        if spec.model == "exponential":
            model = FsoExponential(spec.lam)
        else:
            model = FsoGammaGamma(spec.a, spec.b)
        if spec.p_tx is not None:
            p_tx = spec.p_tx * _db_to_linear(snr_delta_db)
        else:
            partner = rf_hops[spec.coupled_rf]
            p_tx = partner.fading.N * partner.pa.p_cons
        return FsoHopParams(model, p_tx, m, spec.C_tilde, spec.R)

    def anchor_db(self) -> float:
        """Reference drive (dB) that an snr_db grid value replaces."""
        if self.rf_hops:
            return 10.0 * math.log10(self.rf_hops[0].p_cons)
        return 10.0 * math.log10(self.fso_hops[0].p_tx)

    def materialize(self, snr_db: float | None = None, n_override: int | None = None,
                    m_override: int | None = None, n_routes: int | None = None):
        """Build (rf_hop_params, fso_hop_params, mesh) for one sweep point.

        snr_db values are absolute for the anchor hop; every other hop keeps
        its configured dB offset (a single global shift).
        """
        delta = 0.0 if snr_db is None else snr_db - self.anchor_db()
        rf = [self._rf_params(s, delta, n_override, m_override) for s in self.rf_hops]
        fso = [self._fso_params(s, delta, n_override, m_override, rf)
               for s in self.fso_hops]
        routes = self.routes if n_routes is None else self.routes[:n_routes]
        built = []
        for refs in routes:
            hops = [rf[i] if kind == "rf" else fso[i] for kind, i in refs]
            built.append(Route(tuple(hops)))
        return rf, fso, MeshNetwork(tuple(built))


def _parse_rf_hop(d, path) -> RfHopSpec:
    _require(isinstance(d, dict), path, "expected a mapping")
    K = _get_number(d, "K", path, required=True)
    _require(K >= 0.0, f"{path}.K", "must be >= 0")
    omega = _get_number(d, "omega", path, default=1.0)
    _require(omega > 0.0, f"{path}.omega", "must be > 0")
    N = _get_int(d, "N", path, required=True)
    _require(N >= 1, f"{path}.N", "must be >= 1")
    M = _get_int(d, "M", path, default=1)
    _require(M >= 1, f"{path}.M", "must be >= 1")
    C = _get_int(d, "C", path, default=1)
    _require(C >= 1, f"{path}.C", "must be >= 1")
    R = _get_number(d, "R", path, required=True)
    _require(R > 0.0, f"{path}.R", "must be > 0")
    pa = d.get("pa")
    _require(isinstance(pa, dict), f"{path}.pa", "required mapping missing")
    eps = _get_number(pa, "epsilon", f"{path}.pa", default=1.0)
    _require(0.0 <= eps <= 1.0, f"{path}.pa.epsilon", "must be in [0,1]")
    th = _get_number(pa, "theta_pa", f"{path}.pa", default=0.0)
    _require(0.0 <= th < 1.0, f"{path}.pa.theta_pa", "must be in [0,1)")
    p_cons_db = _get_number(pa, "p_cons_db", f"{path}.pa", required=True)
    _require(math.isfinite(p_cons_db), f"{path}.pa.p_cons_db", "must be finite")
    if "p_max_db" in pa:
        p_max_db = _get_number(pa, "p_max_db", f"{path}.pa")
        _require(math.isfinite(p_max_db), f"{path}.pa.p_max_db", "must be finite")
        p_max = _db_to_linear(p_max_db)
    else:
        p_max = math.inf
    spec = RfHopSpec(K, omega, N, M, C, R, eps, th, p_max, _db_to_linear(p_cons_db))
    try:
        PaConfig(eps, th, p_max, spec.p_cons)
    except SaturationError as exc:
        raise ConfigError(f"{path}.pa: {exc}") from exc
    return spec


def _parse_fso_hop(d, path, idx, n_rf) -> FsoHopSpec:
    _require(isinstance(d, dict), path, "expected a mapping")
    model = d.get("model")
    _require(model in ("exponential", "gamma_gamma"),
             f"{path}.model", "must be 'exponential' or 'gamma_gamma'")
    lam = a = b = None
    if model == "exponential":
        lam = _get_number(d, "lambda", path, required=True)
        _require(lam > 0.0, f"{path}.lambda", "must be > 0")
    else:
        a = _get_number(d, "a", path, required=True)
        _require(a > 0.0, f"{path}.a", "must be > 0")
        b = _get_number(d, "b", path, required=True)
        _require(b > 0.0, f"{path}.b", "must be > 0")
    M = _get_int(d, "M", path, default=1)
    _require(M >= 1, f"{path}.M", "must be >= 1")
    Ct = _get_int(d, "C_tilde", path, default=1)
    _require(Ct >= 1, f"{path}.C_tilde", "must be >= 1")
    R = _get_number(d, "R", path, required=True)
    _require(R > 0.0, f"{path}.R", "must be > 0")
    p_tx = None
    if "p_tx_db" in d:
        p_tx_db = _get_number(d, "p_tx_db", path)
        _require(math.isfinite(p_tx_db), f"{path}.p_tx_db", "must be finite")
        p_tx = _db_to_linear(p_tx_db)
    else:
        _require(n_rf > 0, f"{path}.p_tx_db",
                 "required when there is no RF hop to couple to")
    coupled = min(idx, n_rf - 1) if n_rf > 0 else -1
    return FsoHopSpec(model, lam, a, b, M, Ct, R, p_tx, coupled)


def _parse_route_ref(ref, path, n_rf, n_fso):
    _require(isinstance(ref, str), path, f"expected 'rf:<i>' or 'fso:<i>', got {ref!r}")
    kind, _, idx_s = ref.partition(":")
    _require(kind in ("rf", "fso") and idx_s.isdigit(), path,
             f"expected 'rf:<i>' or 'fso:<i>', got {ref!r}")
    idx = int(idx_s)
    limit = n_rf if kind == "rf" else n_fso
    _require(idx < limit, path, f"hop {ref!r} does not exist")
    return kind, idx


def parse_config(doc: dict, source: str = "", sha256: str = "") -> ScenarioConfig:
    _require(isinstance(doc, dict), "<root>", "config must be a mapping")
    known = {"rf_hops", "fso_hops", "routes", "sweep", "evaluators", "mc", "analysis"}
    for key in doc:
        _require(key in known, str(key), "unknown section")

    rf_raw = doc.get("rf_hops", [])
    fso_raw = doc.get("fso_hops", [])
    _require(isinstance(rf_raw, list), "rf_hops", "expected a list")
    _require(isinstance(fso_raw, list), "fso_hops", "expected a list")
    rf = [_parse_rf_hop(h, f"rf_hops[{i}]") for i, h in enumerate(rf_raw)]
    fso = [_parse_fso_hop(h, f"fso_hops[{i}]", i, len(rf))
           for i, h in enumerate(fso_raw)]
    _require(len(rf) + len(fso) > 0, "rf_hops", "at least one hop required")

    routes_raw = doc.get("routes")
    if routes_raw is None:
        # default: one route spanning all hops, RF first
        routes = [[("rf", i) for i in range(len(rf))]
                  + [("fso", i) for i in range(len(fso))]]
    else:
        _require(isinstance(routes_raw, list) and routes_raw,
                 "routes", "expected a nonempty list")
        routes = []
        for i, r in enumerate(routes_raw):
            _require(isinstance(r, list) and r,
                     f"routes[{i}]", "expected a nonempty list of hop references")
            routes.append([_parse_route_ref(ref, f"routes[{i}][{j}]", len(rf), len(fso))
                           for j, ref in enumerate(r)])

    sweep = doc.get("sweep")
    _require(isinstance(sweep, dict), "sweep", "required mapping missing")
    variable = sweep.get("variable")
    _require(variable in SWEEP_VARIABLES,
             "sweep.variable", f"must be one of {', '.join(SWEEP_VARIABLES)}")
    grid = sweep.get("grid")
    _require(isinstance(grid, list) and grid, "sweep.grid", "must be a nonempty list")
    for i, g in enumerate(grid):
        _require(isinstance(g, (int, float)) and not isinstance(g, bool)
                 and math.isfinite(g), f"sweep.grid[{i}]", f"expected a finite number, got {g!r}")
    _require(all(grid[i] < grid[i + 1] for i in range(len(grid) - 1)),
             "sweep.grid", "must be strictly increasing")
    if variable in ("N", "M", "routes"):
        for i, g in enumerate(grid):
            _require(isinstance(g, int) and g >= 1,
                     f"sweep.grid[{i}]", "must be a positive integer")
        if variable == "routes":
            _require(grid[-1] <= len(routes), "sweep.grid",
                     f"grid exceeds the {len(routes)} configured routes")

    evaluators = doc.get("evaluators", [RF_LINEARIZED, FSO_CLT])
    _require(isinstance(evaluators, list) and evaluators,
             "evaluators", "expected a nonempty list")
    for i, tag in enumerate(evaluators):
        _require(tag in KNOWN_TAGS, f"evaluators[{i}]",
                 f"unknown method tag {tag!r} (known: {', '.join(KNOWN_TAGS)})")

    mc = doc.get("mc", {})
    _require(isinstance(mc, dict), "mc", "expected a mapping")
    trials = _get_int(mc, "trials", "mc", default=1_000_000)
    _require(trials >= 1_000, "mc.trials", "must be >= 1000")
    seed = _get_int(mc, "seed", "mc", default=0)
    _require(seed >= 0, "mc.seed", "must be >= 0")
    workers = _get_int(mc, "workers", "mc", default=1)
    _require(workers >= 1, "mc.workers", "must be >= 1")
    target_ci = _get_number(mc, "target_ci", "mc", default=None)
    if target_ci is not None:
        _require(0.0 < target_ci < 1.0, "mc.target_ci", "must be in (0,1)")

    analysis = doc.get("analysis", {})
    _require(isinstance(analysis, dict), "analysis", "expected a mapping")
    theta = _get_number(analysis, "theta", "analysis", default=1.0)
    _require(theta > 0.0, "analysis.theta", "must be > 0")

    return ScenarioConfig(rf, fso, routes, variable, list(grid), list(evaluators),
                          trials, seed, workers, target_ci, theta,
                          sha256=sha256, source=source)


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"<file>: cannot read {path}: {exc}") from exc
    digest = hashlib.sha256(raw).hexdigest()
    try:
        doc = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"<file>: not parseable YAML: {exc}") from exc
    return parse_config(doc, source=path, sha256=digest)
