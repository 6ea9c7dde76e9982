"""Route / mesh composition of per-hop outage and ergodic rate.

A route is an ordered chain of decode-and-forward hops: the message gets
through only if every hop decodes, so the route outage is
1 - prod_i (1 - phi_i) and hop order is irrelevant.  A mesh is a set of
non-overlapping routes from source to destination; it is in outage only
when all routes fail, so the mesh outage is the product of route outages
and the mesh rate is the rate of the best route.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .analysis import (
    FSO_CLT,
    RF_LINEARIZED,
    FsoHopParams,
    OutageEstimate,
    RfHopParams,
    hop_ergodic_rate,
    hop_outage,
)


@dataclass(frozen=True)
class Route:
    """Ordered decode-and-forward chain of RF and/or FSO hops."""

    hops: tuple  # tuple of RfHopParams | FsoHopParams

    def __post_init__(self):
        object.__setattr__(self, "hops", tuple(self.hops))
        if len(self.hops) == 0:
            raise ValueError("route must contain at least one hop")
        for j, hop in enumerate(self.hops):
            if not isinstance(hop, (RfHopParams, FsoHopParams)):
                raise ValueError(f"hop {j}: unsupported hop type {type(hop).__name__}")


@dataclass(frozen=True)
class MeshNetwork:
    """Parallel non-overlapping routes; delivery succeeds if any route does."""

    routes: tuple  # tuple of Route

    def __post_init__(self):
        object.__setattr__(self, "routes", tuple(self.routes))
        if len(self.routes) == 0:
            raise ValueError("mesh must contain at least one route")
        for j, r in enumerate(self.routes):
            if not isinstance(r, Route):
                raise ValueError(f"route {j}: expected Route, got {type(r).__name__}")


def _combine_serial(estimates):
    """1 - prod(1-phi_i) with first-order half-width propagation.

    d/dphi_i [1 - prod(1-phi_j)] = prod_{j != i} (1 - phi_j), so independent
    hop half-widths combine in quadrature with those partial products.
    """
    survive = 1.0
    for e in estimates:
        survive *= 1.0 - e.value
    var = 0.0
    for i, e in enumerate(estimates):
        partial = 1.0
        for j, other in enumerate(estimates):
            if j != i:
                partial *= 1.0 - other.value
        var += (partial * e.ci_halfwidth) ** 2
    return 1.0 - survive, math.sqrt(var)


def _method_label(estimates):
    tags = []
    for e in estimates:
        if e.method not in tags:
            tags.append(e.method)
    return tags[0] if len(tags) == 1 else "+".join(tags)


def route_outage(route: Route, rf_method: str = RF_LINEARIZED,
                 fso_method: str = FSO_CLT, theta: float = 1.0) -> OutageEstimate:
    """Analytic route outage: evaluate each hop, compose serially."""
    ests = []
    for j, hop in enumerate(route.hops):
        try:
            ests.append(hop_outage(hop, rf_method, fso_method, theta))
        except Exception as exc:
            raise type(exc)(f"hop {j}: {exc}") from exc
    value, hw = _combine_serial(ests)
    return OutageEstimate(value, _method_label(ests), hw)


def mesh_outage(mesh: MeshNetwork, rf_method: str = RF_LINEARIZED,
                fso_method: str = FSO_CLT, theta: float = 1.0) -> OutageEstimate:
    """Mesh (all-routes-fail) outage: product over route outages."""
    ests = []
    for j, r in enumerate(mesh.routes):
        try:
            ests.append(route_outage(r, rf_method, fso_method, theta))
        except Exception as exc:
            raise type(exc)(f"route {j}: {exc}") from exc
    value = 1.0
    for e in ests:
        value *= e.value
    var = 0.0
    for i, e in enumerate(ests):
        partial = 1.0
        for j, other in enumerate(ests):
            if j != i:
                partial *= other.value
        var += (partial * e.ci_halfwidth) ** 2
    return OutageEstimate(value, _method_label(ests), math.sqrt(var))


def route_ergodic_rate(route: Route) -> float:
    """A decode-and-forward chain runs at its slowest hop."""
    return min(hop_ergodic_rate(h) for h in route.hops)


def route_limiting_hop(route: Route) -> int:
    """Index of the hop whose ergodic rate limits the route."""
    rates = [hop_ergodic_rate(h) for h in route.hops]
    return min(range(len(rates)), key=rates.__getitem__)


def mesh_ergodic_rate(mesh: MeshNetwork) -> float:
    """The mesh delivers at the rate of its best route."""
    return max(route_ergodic_rate(r) for r in mesh.routes)
