"""Parameter estimation: the degree-scale constant and the locality exponent
for GIRGs (alternating binary searches), plus the baseline models.

The average degree responds monotonically to the constant c and the mean
local clustering coefficient to the exponent alpha, so each gets a binary
search; the two searches alternate until both iterates settle. For max-norm
torus GIRGs the c-search probes a closed-form expected average degree
instead of sampling; everything else samples one graph per probe with a
fixed probe seed, which makes the probe function (nearly) deterministic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .features import local_clustering_coefficients
from .geometry import DistanceSpec, Topology, is_pure, parse_distance_spec, spec_to_string
from .graphs import Graph, largest_connected_component
from .samplers import (
    GirgParams,
    sample_barabasi_albert,
    sample_boolean_girg,
    sample_chung_lu,
    sample_erdos_renyi,
)
from .seeds import derive_rng
from .weights import PowerLawFit, WeightSequence, fit_power_law_tail, sample_power_law_weights

logger = logging.getLogger(__name__)

__all__ = [
    "FitTargets",
    "FittedModel",
    "GirgModelSpec",
    "fit_targets_from_graph",
    "clip_tau",
    "expected_avg_degree_tgirg",
    "expected_avg_degree_chung_lu",
    "fit_c",
    "fit_alpha",
    "fit_girg",
    "fit_baselines",
    "mean_local_clustering",
]

TAU_CLIP = (2.05, 2.95)
ALPHA_RANGE = (1.0 + 1e-3, 32.0)
C_LOG2_RANGE = (-20.0, 20.0)
MAX_BRACKET_DOUBLINGS = 60
C_RELATIVE_TOL = 0.01
CLUSTERING_TOL = 0.01
ALPHA_STEP_TOL = 0.05
MAX_OUTER_ROUNDS = 10
DEGREE_CONVERGENCE_REL = 0.05
CLUSTERING_CONVERGENCE_ABS = 0.02


@dataclass(frozen=True)
class FitTargets:
    """Statistics of the target network's largest connected component."""

    n: int
    avg_degree: float
    mean_local_clustering: float
    tau_fit: PowerLawFit
    degree_sequence: np.ndarray

    def __post_init__(self):
        if not (0.0 <= self.mean_local_clustering <= 1.0):
            raise ValueError("clustering must lie in [0, 1]")


@dataclass(frozen=True)
class GirgModelSpec:
    """A GIRG model family entry: geometry plus the weight mode."""

    model_id: str
    d: int
    topology: Topology
    spec: DistanceSpec
    weight_mode: str  # "powerlaw" | "degrees"

    def __post_init__(self):
        if self.weight_mode not in ("powerlaw", "degrees"):
            raise ValueError("weight_mode must be 'powerlaw' or 'degrees'")


@dataclass
class FittedModel:
    """Model id plus estimated parameters and fitting diagnostics."""

    model_id: str
    kind: str  # girg | er | ba | chung_lu
    params: dict
    diagnostics: dict

    def to_text(self) -> str:
        lines = [f"model_id = {self.model_id}", f"kind = {self.kind}"]
        for k in sorted(self.params):
            lines.append(f"param.{k} = {self.params[k]}")
        for k in sorted(self.diagnostics):
            lines.append(f"diag.{k} = {self.diagnostics[k]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FittedModel":
        fields = {}
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            fields[key.strip()] = value.strip()
        params = {}
        diagnostics = {}
        for k, v in fields.items():
            if k.startswith("param."):
                params[k[6:]] = _parse_value(v)
            elif k.startswith("diag."):
                diagnostics[k[5:]] = _parse_value(v)
        return cls(
            model_id=fields["model_id"],
            kind=fields["kind"],
            params=params,
            diagnostics=diagnostics,
        )


def _parse_value(v: str):
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    if v in ("True", "False"):
        return v == "True"
    return v


def mean_local_clustering(graph: Graph) -> float:
    return float(local_clustering_coefficients(graph).mean())


def fit_targets_from_graph(lcc: Graph) -> FitTargets:
    """Fit targets from a graph that is already its largest component."""
    deg = lcc.degrees()
    return FitTargets(
        n=lcc.n,
        avg_degree=2.0 * lcc.m / lcc.n,
        mean_local_clustering=mean_local_clustering(lcc),
        tau_fit=fit_power_law_tail(deg.astype(float)),
        degree_sequence=deg.copy(),
    )


def clip_tau(tau: float) -> tuple[float, bool]:
    """Clamp the fitted exponent into the valid open interval; flag if clipped."""
    clipped = min(max(tau, TAU_CLIP[0]), TAU_CLIP[1])
    return clipped, clipped != tau


# ---------------------------------------------------------------------------
# closed-form expected average degrees
# ---------------------------------------------------------------------------


def expected_avg_degree_tgirg(params: GirgParams, weights: WeightSequence) -> float:
    """Expected average degree of a max-norm torus GIRG given the weights.

    For the max-norm on the torus the ball volume at the pairwise distance is
    uniform on [0, 1], so the pair probability integrates in closed form:
    saturated pairs (w_u w_v c^(1/alpha) >= W) contribute 1, the rest
    contribute A*(w_u w_v / W) + B*(w_u w_v / W)^alpha with
    A = c^(1/alpha) * alpha/(alpha-1) and B = -c/(alpha-1). Sorting plus
    prefix sums evaluates the pair sum in O(n log n).
    """
    if params.topology is not Topology.TORUS or not is_pure(params.spec, "max"):
        raise ValueError("closed form requires a max-norm torus GIRG")
    w = np.sort(weights.weights)
    W = weights.total
    n = w.size
    alpha, c = params.alpha, params.c
    theta = W * c ** (-1.0 / alpha)
    a_coef = c ** (1.0 / alpha) * alpha / (alpha - 1.0)
    b_coef = -c / (alpha - 1.0)
    prefix_w = np.concatenate([[0.0], np.cumsum(w)])
    prefix_wa = np.concatenate([[0.0], np.cumsum(w**alpha)])
    k = np.searchsorted(w, theta / w)
    unsat = a_coef * (w / W) * prefix_w[k] + b_coef * (w / W) ** alpha * prefix_wa[k]
    total = float(unsat.sum() + (n - k).sum())
    self_sat = w * w >= theta
    total -= float(self_sat.sum())
    self_ratio = w[~self_sat] ** 2 / W
    total -= float((a_coef * self_ratio + b_coef * self_ratio**alpha).sum())
    return total / n


def expected_avg_degree_chung_lu(weights: WeightSequence, c: float) -> float:
    """Expected average degree sum(min(1, c w_u w_v / W)) / n in O(n log n)."""
    w = np.sort(weights.weights)
    W = weights.total
    n = w.size
    theta = W / c
    prefix_w = np.concatenate([[0.0], np.cumsum(w)])
    k = np.searchsorted(w, theta / w)
    unsat = (c / W) * w * prefix_w[k]
    total = float(unsat.sum() + (n - k).sum())
    self_sat = w * w >= theta
    total -= float(self_sat.sum())
    total -= float((c / W) * (w[~self_sat] ** 2).sum())
    return total / n


# ---------------------------------------------------------------------------
# binary searches
# ---------------------------------------------------------------------------


def _sample_for_probe(params: GirgParams, weights: WeightSequence, seed_parts) -> Graph:
    emb = sample_boolean_girg(params, weights, derive_rng(*seed_parts))
    lcc, _ = largest_connected_component(emb.graph)
    return lcc


def _analytic_applicable(params: GirgParams) -> bool:
    return params.topology is Topology.TORUS and is_pure(params.spec, "max")


def fit_c(
    params: GirgParams,
    weights: WeightSequence,
    target_avg_degree: float,
    alpha: float,
    probe_seed: int = 0,
    use_analytic: bool | None = None,
) -> float:
    """Binary search for c matching the average degree within 1% relative.

    Uses the closed form for max-norm torus models (unless use_analytic is
    False); otherwise samples one graph per probe with the fixed probe seed
    and measures its largest component. The bracket starts at [2^-20, 2^20]
    and doubles outward when the target is not straddled.
    """
    n = len(weights)
    if not (0.0 < target_avg_degree < n - 1):
        raise ValueError("target average degree must lie in (0, n-1)")
    analytic = _analytic_applicable(params) if use_analytic is None else use_analytic
    if analytic and not _analytic_applicable(params):
        raise ValueError("closed form requires a max-norm torus GIRG")

    def probe(c: float) -> float:
        p = replace(params, c=c, alpha=alpha)
        if analytic:
            return expected_avg_degree_tgirg(p, weights)
        lcc = _sample_for_probe(p, weights, (probe_seed, "c-probe"))
        return 2.0 * lcc.m / lcc.n if lcc.n else 0.0

    lo, hi = C_LOG2_RANGE
    doublings = 0
    while probe(2.0**hi) < target_avg_degree:
        hi *= 2
        doublings += 1
        if doublings > MAX_BRACKET_DOUBLINGS or not np.isfinite(2.0**hi):
            raise ValueError("bracket exhaustion: target degree unreachable from above")
    while probe(2.0**lo) > target_avg_degree:
        lo *= 2
        doublings += 1
        if doublings > MAX_BRACKET_DOUBLINGS or 2.0**lo == 0.0:
            raise ValueError("bracket exhaustion: target degree unreachable from below")
    mid = 0.5 * (lo + hi)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        value = probe(2.0**mid)
        if abs(value - target_avg_degree) <= C_RELATIVE_TOL * target_avg_degree:
            break
        if value < target_avg_degree:
            lo = mid
        else:
            hi = mid
    return 2.0**mid


def fit_alpha(
    params: GirgParams,
    weights: WeightSequence,
    target_clustering: float,
    c: float,
    probe_seed: int = 0,
    alpha_range: tuple[float, float] = ALPHA_RANGE,
) -> tuple[float, bool]:
    """Binary search for alpha matching mean local clustering within 0.01.

    Every probe samples one graph with the fixed probe seed and measures the
    clustering of its largest component. A target unattainable within the
    range returns the boundary value with converged=False.
    """
    if not (0.0 < target_clustering < 1.0):
        raise ValueError("target clustering must lie in (0, 1)")

    def probe(alpha: float) -> float:
        p = replace(params, c=c, alpha=alpha)
        lcc = _sample_for_probe(p, weights, (probe_seed, "alpha-probe"))
        return mean_local_clustering(lcc) if lcc.n else 0.0

    lo, hi = alpha_range
    hi_val = probe(hi)
    if hi_val < target_clustering:
        return hi, False
    lo_val = probe(lo)
    if lo_val > target_clustering:
        return lo, False
    mid = 0.5 * (lo + hi)
    for _ in range(25):
        mid = 0.5 * (lo + hi)
        value = probe(mid)
        if abs(value - target_clustering) <= CLUSTERING_TOL:
            return mid, True
        if value < target_clustering:
            lo = mid
        else:
            hi = mid
    return mid, False


# ---------------------------------------------------------------------------
# whole-model fits
# ---------------------------------------------------------------------------


def _weights_for_model(model: GirgModelSpec, targets: FitTargets, master_seed) -> tuple:
    tau, clipped = clip_tau(targets.tau_fit.tau)
    if model.weight_mode == "degrees":
        ws = WeightSequence.from_values(targets.degree_sequence.astype(float))
    else:
        ws = sample_power_law_weights(
            targets.n, tau, 1.0, derive_rng(master_seed, model.model_id, "weights")
        )
    return ws, tau, clipped


def fit_girg(targets: FitTargets, model: GirgModelSpec, master_seed: int = 0) -> FittedModel:
    """Alternating alpha/c search against the target degree and clustering.

    Starts from alpha=1.5, c=1; stops when successive alpha values move at
    most 0.05 and c at most 1% relative, or after 10 rounds. Never raises on
    non-convergence; the diagnostics carry the verdict.
    """
    ws, tau, tau_clipped = _weights_for_model(model, targets, master_seed)
    base = GirgParams(
        d=model.d, tau=tau, alpha=1.5, c=1.0, topology=model.topology, spec=model.spec
    )
    probe_seed = (master_seed, model.model_id)
    analytic = _analytic_applicable(base)
    alpha, c = 1.5, 1.0
    rounds = 0
    loop_converged = False
    alpha_bounded = False
    for rounds in range(1, MAX_OUTER_ROUNDS + 1):
        # the clustering response flattens at large alpha, so an unrestricted
        # search can ping-pong between branches; a per-round trust region
        # around the previous iterate keeps the alternation on one branch and
        # still reaches the full range through repeated expansion
        bracket = (max(ALPHA_RANGE[0], 0.5 * alpha), min(ALPHA_RANGE[1], 2.0 * alpha))
        new_alpha, alpha_ok = fit_alpha(
            base, ws, targets.mean_local_clustering, c, probe_seed=probe_seed,
            alpha_range=bracket,
        )
        alpha_bounded = not alpha_ok and (
            new_alpha >= ALPHA_RANGE[1] or new_alpha <= ALPHA_RANGE[0]
        )
        hit_trust_edge = not alpha_ok and not alpha_bounded
        # half-step damping: the two searches cross-influence strongly enough
        # at low dimension that the undamped alternation cycles with period 2
        new_alpha = alpha + 0.5 * (new_alpha - alpha)
        if analytic:
            # the closed form expects the whole vertex set, the target refers
            # to the largest component; rescale by the measured ratio
            probe_lcc = _sample_for_probe(
                replace(base, alpha=new_alpha, c=c), ws, (probe_seed, "ratio-probe")
            )
            lcc_deg = 2.0 * probe_lcc.m / probe_lcc.n if probe_lcc.n else 0.0
            whole = expected_avg_degree_tgirg(replace(base, alpha=new_alpha, c=c), ws)
            ratio = lcc_deg / whole if whole > 0 and lcc_deg > 0 else 1.0
            new_c = fit_c(
                base, ws, targets.avg_degree / ratio, new_alpha, probe_seed=probe_seed
            )
        else:
            new_c = fit_c(base, ws, targets.avg_degree, new_alpha, probe_seed=probe_seed)
        moved_alpha = abs(new_alpha - alpha)
        moved_c = abs(new_c - c) / c
        alpha, c = new_alpha, new_c
        if moved_alpha <= ALPHA_STEP_TOL and moved_c <= C_RELATIVE_TOL and not hit_trust_edge:
            loop_converged = True
            break

    if analytic:
        # final touch: match the component-level degree directly
        c = fit_c(base, ws, targets.avg_degree, alpha, probe_seed=probe_seed, use_analytic=False)
    final = replace(base, alpha=alpha, c=c)
    emb = sample_boolean_girg(final, ws, derive_rng(master_seed, model.model_id, "diagnostics"))
    lcc, _ = largest_connected_component(emb.graph)
    achieved_deg = 2.0 * lcc.m / lcc.n if lcc.n else 0.0
    achieved_clust = mean_local_clustering(lcc) if lcc.n else 0.0
    deg_ok = abs(achieved_deg - targets.avg_degree) <= DEGREE_CONVERGENCE_REL * targets.avg_degree
    clust_ok = (
        abs(achieved_clust - targets.mean_local_clustering) <= CLUSTERING_CONVERGENCE_ABS
    )
    converged = loop_converged and deg_ok and clust_ok and not alpha_bounded
    return FittedModel(
        model_id=model.model_id,
        kind="girg",
        params={
            "n": targets.n,
            "d": model.d,
            "tau": tau,
            "raw_tau": targets.tau_fit.tau,
            "tau_clipped": tau_clipped,
            "alpha": alpha,
            "c": c,
            "topology": model.topology.value,
            "distance": spec_to_string(model.spec),
            "weight_mode": model.weight_mode,
        },
        diagnostics={
            "iterations": rounds,
            "achieved_avg_degree": achieved_deg,
            "achieved_clustering": achieved_clust,
            "target_avg_degree": targets.avg_degree,
            "target_clustering": targets.mean_local_clustering,
            "alpha_at_boundary": alpha_bounded,
            "converged": converged,
        },
    )


def _fit_chung_lu_c(weights: WeightSequence, target_avg_degree: float) -> float:
    lo, hi = C_LOG2_RANGE
    doublings = 0
    while expected_avg_degree_chung_lu(weights, 2.0**hi) < target_avg_degree:
        hi *= 2
        doublings += 1
        if doublings > MAX_BRACKET_DOUBLINGS:
            raise ValueError("bracket exhaustion for the Chung-Lu constant")
    while expected_avg_degree_chung_lu(weights, 2.0**lo) > target_avg_degree:
        lo *= 2
        doublings += 1
        if doublings > MAX_BRACKET_DOUBLINGS or 2.0**lo == 0.0:
            raise ValueError("bracket exhaustion for the Chung-Lu constant")
    mid = 0.5 * (lo + hi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        value = expected_avg_degree_chung_lu(weights, 2.0**mid)
        if abs(value - target_avg_degree) <= 1e-6 * target_avg_degree:
            break
        if value < target_avg_degree:
            lo = mid
        else:
            hi = mid
    return 2.0**mid


def fit_baselines(targets: FitTargets, master_seed: int = 0) -> list[FittedModel]:
    """ER, BA, and both Chung-Lu weight modes fitted to the targets."""
    n = targets.n
    m = targets.avg_degree * n / 2.0
    models = []
    p = 2.0 * m / (n * (n - 1))
    models.append(
        FittedModel(
            model_id="ER",
            kind="er",
            params={"n": n, "p": p},
            diagnostics={"converged": True},
        )
    )
    k = max(1, int(round(targets.avg_degree / 2.0)))
    models.append(
        FittedModel(
            model_id="BA",
            kind="ba",
            params={"n": n, "k": k},
            diagnostics={"converged": True},
        )
    )
    tau, tau_clipped = clip_tau(targets.tau_fit.tau)
    for model_id, mode in (("CL", "powerlaw"), ("CL-c", "degrees")):
        if mode == "degrees":
            ws = WeightSequence.from_values(targets.degree_sequence.astype(float))
        else:
            ws = sample_power_law_weights(n, tau, 1.0, derive_rng(master_seed, model_id, "weights"))
        c = _fit_chung_lu_c(ws, targets.avg_degree)
        models.append(
            FittedModel(
                model_id=model_id,
                kind="chung_lu",
                params={
                    "n": n,
                    "c": c,
                    "tau": tau,
                    "raw_tau": targets.tau_fit.tau,
                    "tau_clipped": tau_clipped,
                    "weight_mode": mode,
                },
                diagnostics={
                    "expected_avg_degree": expected_avg_degree_chung_lu(ws, c),
                    "converged": True,
                },
            )
        )
    return models


def generate_from_fitted(
    fitted: FittedModel, targets: FitTargets, master_seed: int = 0, replicate: int = 0
) -> Graph:
    """Sample one synthetic graph from fitted parameters.

    Weight draws reuse the model's fitting seed so the calibrated constants
    apply to the weights actually used.
    """
    rng = derive_rng(master_seed, fitted.model_id, "generate", replicate)
    if fitted.kind == "er":
        return sample_erdos_renyi(int(fitted.params["n"]), float(fitted.params["p"]), rng)
    if fitted.kind == "ba":
        return sample_barabasi_albert(int(fitted.params["n"]), int(fitted.params["k"]), rng)
    if fitted.kind == "chung_lu":
        ws = _generation_weights(fitted, targets, master_seed)
        return sample_chung_lu(ws, float(fitted.params["c"]), rng)
    if fitted.kind == "girg":
        ws = _generation_weights(fitted, targets, master_seed)
        params = GirgParams(
            d=int(fitted.params["d"]),
            tau=float(fitted.params["tau"]),
            alpha=float(fitted.params["alpha"]),
            c=float(fitted.params["c"]),
            topology=Topology(fitted.params["topology"]),
            spec=parse_distance_spec(fitted.params["distance"], int(fitted.params["d"])),
        )
        return sample_boolean_girg(params, ws, rng).graph
    raise ValueError(f"unknown model kind {fitted.kind!r}")


def _generation_weights(fitted: FittedModel, targets: FitTargets, master_seed) -> WeightSequence:
    if fitted.params.get("weight_mode") == "degrees":
        return WeightSequence.from_values(targets.degree_sequence.astype(float))
    return sample_power_law_weights(
        int(fitted.params["n"]),
        float(fitted.params["tau"]),
        1.0,
        derive_rng(master_seed, fitted.model_id, "weights"),
    )
