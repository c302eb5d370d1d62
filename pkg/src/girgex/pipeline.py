"""End-to-end orchestration: read networks, fit models, generate synthetic
graphs, extract features, clean, classify.

Every intermediate artifact (fit targets, fitted parameters, synthetic edge
lists, feature rows, cleaning reports, the results table) is persisted under
the output directory and reused on rerun, so interrupted runs resume without
recomputation and reruns are byte-identical. Per-item failures are recorded
and skipped; they never abort the run.

Random streams derive from blake2b hashes of
(master seed, network id, model id, replicate, purpose), so no two stages
share a stream.
"""

from __future__ import annotations

import configparser
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classifier import misclassification_rate
from .cleaning import (
    CORRELATION_THRESHOLD,
    VARIATION_THRESHOLD,
    FeatureMatrix,
    correlation_group,
    numerical_clean,
    variation_clean,
)
from .features import (
    DISTRIBUTION_KEYS,
    FEATURE_KEYS,
    SUMMARY_KEYS,
    FeatureVector,
    extract_feature_vector,
)
from .fitting import (
    FitTargets,
    FittedModel,
    GirgModelSpec,
    fit_baselines,
    fit_girg,
    fit_targets_from_graph,
    generate_from_fitted,
)
from .geometry import Topology, max_norm_spec, parse_distance_spec, spec_to_string
from .graphs import Graph, largest_connected_component
from .samplers import GirgParams, sample_boolean_girg
from .seeds import derive_rng, derive_seed
from .weights import PowerLawFit, fit_power_law_tail, sample_power_law_weights

logger = logging.getLogger(__name__)

__all__ = [
    "ModelEntry",
    "RunConfig",
    "PipelineResult",
    "read_edge_list",
    "write_edge_list",
    "parse_config",
    "write_config",
    "run_pipeline",
    "make_self_test_inputs",
    "DEFAULT_PRIORITY",
    "DEFAULT_SUBSETS",
    "GEOMETRIC_SUBSETS",
]

# cleaning priority: single values first, then distribution summaries with the
# degree distribution ahead of the centrality-style ones
DEFAULT_PRIORITY = ["n", "m", "tau", "diam", "eff-diam"] + [
    f"{d}_{s}"
    for d in ["degree", "k-core", "LCC", "Katz", "betw", "close"]
    for s in SUMMARY_KEYS
]

DEFAULT_SUBSETS = [
    ["LCC_mean"],
    ["close_mean"],
    ["betw_mean"],
    ["Katz_mean"],
    ["degree_mean"],
    ["k-core_mean"],
    ["tau"],
    ["n", "m", "diam"],
    ["diam", "eff-diam"],
]

GEOMETRIC_SUBSETS = [["LCC_mean"], ["close_mean"], ["betw_mean"]]


@dataclass(frozen=True)
class ModelEntry:
    """One roster entry; GIRG entries carry geometry, baselines only a kind."""

    model_id: str
    kind: str  # girg | er | ba | chung_lu
    d: int = 1
    topology: str = "torus"
    distance: str = ""
    weight_mode: str = "powerlaw"

    def girg_spec(self) -> GirgModelSpec:
        return GirgModelSpec(
            model_id=self.model_id,
            d=self.d,
            topology=Topology(self.topology),
            spec=parse_distance_spec(self.distance, self.d),
            weight_mode=self.weight_mode,
        )


@dataclass
class RunConfig:
    input_dir: Path
    output_dir: Path
    master_seed: int = 0
    folds: int = 10
    models: list = field(default_factory=list)
    feature_subsets: list = field(default_factory=lambda: [list(s) for s in DEFAULT_SUBSETS])
    priority: list = field(default_factory=lambda: list(DEFAULT_PRIORITY))
    variation_threshold: float = VARIATION_THRESHOLD
    correlation_threshold: float = CORRELATION_THRESHOLD
    svm_c_grid: list | None = None
    svm_gamma_grid: list | None = None

    def validate(self):
        ids = [m.model_id for m in self.models]
        if len(ids) != len(set(ids)):
            raise ValueError("model ids must be unique")
        for m in self.models:
            if m.kind == "girg":
                m.girg_spec()  # parses and checks the distance DSL against d
        for subset in self.feature_subsets:
            for key in subset:
                if key not in FEATURE_KEYS:
                    raise ValueError(f"unknown feature key {key!r}")


# ---------------------------------------------------------------------------
# edge-list I/O
# ---------------------------------------------------------------------------


def read_edge_list(path) -> Graph:
    """Parse whitespace-separated integer pairs into a graph.

    Comment lines ('%' or '#') and blank lines are skipped; tokens past the
    first two are ignored; labels map to 0..n-1 in first-seen order;
    self-loops and duplicates are dropped with a counted warning.
    """
    path = Path(path)
    remap: dict[int, int] = {}
    edges = []
    dropped = 0
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("%") or line.startswith("#"):
                continue
            tokens = line.split()
            if len(tokens) < 2:
                raise ValueError(f"{path}:{lineno}: expected two integer tokens")
            try:
                a, b = int(tokens[0]), int(tokens[1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed token") from exc
            if a < 0 or b < 0:
                raise ValueError(f"{path}:{lineno}: vertex labels must be nonnegative")
            for lbl in (a, b):
                if lbl not in remap:
                    remap[lbl] = len(remap)
            if a == b:
                dropped += 1
                continue
            edges.append((remap[a], remap[b]))
    if not edges:
        raise ValueError(f"{path}: empty graph")
    arr = np.asarray(edges, dtype=np.int64)
    g = Graph(len(remap), arr)
    dropped += len(edges) - g.m
    if dropped:
        logger.warning("%s: dropped %d self-loops/duplicate edges", path, dropped)
    return g


def write_edge_list(graph: Graph, path) -> None:
    """One 'u v' line per edge, u < v, ascending; edgeless graphs record n."""
    path = Path(path)
    with path.open("w") as fh:
        if graph.m == 0:
            fh.write(f"# n={graph.n}\n")
            return
        for u, v in graph.edges:
            fh.write(f"{u} {v}\n")


# ---------------------------------------------------------------------------
# config file
# ---------------------------------------------------------------------------


def parse_config(path) -> RunConfig:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    with Path(path).open() as fh:
        parser.read_file(fh)
    if "run" not in parser:
        raise ValueError("config needs a [run] section")
    run = parser["run"]
    base = Path(path).parent
    cfg = RunConfig(
        input_dir=_resolve(base, run.get("input_dir", "networks")),
        output_dir=_resolve(base, run.get("output_dir", "out")),
        master_seed=run.getint("master_seed", 0),
        folds=run.getint("folds", 10),
        variation_threshold=run.getfloat("variation_threshold", VARIATION_THRESHOLD),
        correlation_threshold=run.getfloat("correlation_threshold", CORRELATION_THRESHOLD),
    )
    if "feature_subsets" in run:
        cfg.feature_subsets = [
            [k.strip() for k in part.replace(",", " ").split()]
            for part in run["feature_subsets"].split("|")
            if part.strip()
        ]
    if "priority" in run:
        cfg.priority = [k.strip() for k in run["priority"].replace(",", " ").split()]
    if "svm_c_grid" in run:
        cfg.svm_c_grid = [float(x) for x in run["svm_c_grid"].split(",")]
    if "svm_gamma_grid" in run:
        cfg.svm_gamma_grid = [float(x) for x in run["svm_gamma_grid"].split(",")]
    for section in parser.sections():
        if not section.startswith("model "):
            continue
        model_id = section[6:].strip()
        sec = parser[section]
        kind = sec.get("kind", "girg")
        d = sec.getint("d", 1)
        entry = ModelEntry(
            model_id=model_id,
            kind=kind,
            d=d,
            topology=sec.get("topology", "torus"),
            distance=sec.get("distance", spec_to_string(max_norm_spec(d))),
            weight_mode=sec.get("weights", "powerlaw"),
        )
        cfg.models.append(entry)
    cfg.validate()
    return cfg


def _resolve(base: Path, value: str) -> Path:
    p = Path(value)
    return p if p.is_absolute() else base / p


def write_config(cfg: RunConfig, path) -> None:
    lines = [
        "[run]",
        f"input_dir = {cfg.input_dir}",
        f"output_dir = {cfg.output_dir}",
        f"master_seed = {cfg.master_seed}",
        f"folds = {cfg.folds}",
        f"variation_threshold = {cfg.variation_threshold}",
        f"correlation_threshold = {cfg.correlation_threshold}",
        "feature_subsets = " + " | ".join(", ".join(s) for s in cfg.feature_subsets),
    ]
    if cfg.svm_c_grid:
        lines.append("svm_c_grid = " + ", ".join(str(v) for v in cfg.svm_c_grid))
    if cfg.svm_gamma_grid:
        lines.append("svm_gamma_grid = " + ", ".join(str(v) for v in cfg.svm_gamma_grid))
    for m in cfg.models:
        lines += ["", f"[model {m.model_id}]", f"kind = {m.kind}"]
        if m.kind == "girg":
            lines += [
                f"d = {m.d}",
                f"topology = {m.topology}",
                f"distance = {m.distance}",
                f"weights = {m.weight_mode}",
            ]
        elif m.kind == "chung_lu":
            lines.append(f"weights = {m.weight_mode}")
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# artifacts
# ---------------------------------------------------------------------------


class _Paths:
    def __init__(self, out: Path):
        self.out = out
        self.targets = out / "targets"
        self.fitted = out / "fitted"
        self.synthetic = out / "synthetic"
        self.features = out / "features"
        self.cleaning = out / "cleaning"
        for p in (self.targets, self.fitted, self.synthetic, self.features, self.cleaning):
            p.mkdir(parents=True, exist_ok=True)

    def targets_file(self, net):
        return self.targets / f"{net}.targets"

    def fitted_file(self, net, model):
        return self.fitted / f"{net}__{model}.params"

    def synthetic_file(self, net, model):
        return self.synthetic / f"{net}__{model}.edges"

    def feature_file(self, collection, net):
        d = self.features / collection
        d.mkdir(exist_ok=True)
        return d / f"{net}.csv"

    def matrix_file(self, collection):
        return self.features / f"{collection}.csv"

    def cleaning_report(self, model):
        return self.cleaning / f"{model}.txt"

    def results_file(self):
        return self.out / "results.csv"

    def failures_file(self):
        return self.out / "failures.txt"


def _save_targets(t: FitTargets, path: Path):
    lines = [
        f"n = {t.n}",
        f"avg_degree = {t.avg_degree!r}",
        f"mean_local_clustering = {t.mean_local_clustering!r}",
        f"tau = {t.tau_fit.tau!r}",
        f"x_min = {t.tau_fit.x_min!r}",
        f"ks_distance = {t.tau_fit.ks_distance!r}",
        f"tail_size = {t.tau_fit.tail_size}",
        "degrees = " + " ".join(str(int(d)) for d in t.degree_sequence),
    ]
    path.write_text("\n".join(lines) + "\n")


def _load_targets(path: Path) -> FitTargets:
    fields = {}
    for line in path.read_text().splitlines():
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    return FitTargets(
        n=int(fields["n"]),
        avg_degree=float(fields["avg_degree"]),
        mean_local_clustering=float(fields["mean_local_clustering"]),
        tau_fit=PowerLawFit(
            tau=float(fields["tau"]),
            x_min=float(fields["x_min"]),
            ks_distance=float(fields["ks_distance"]),
            tail_size=int(fields["tail_size"]),
        ),
        degree_sequence=np.array([int(x) for x in fields["degrees"].split()], dtype=np.int64),
    )


def _save_feature_row(net: str, fv: FeatureVector, path: Path):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["graph"] + FEATURE_KEYS)
        w.writerow([net] + [repr(fv.values[k]) for k in FEATURE_KEYS])


def _load_feature_row(path: Path):
    with path.open() as fh:
        rows = list(csv.reader(fh))
    if len(rows) != 2 or rows[0] != ["graph"] + FEATURE_KEYS:
        raise ValueError(f"{path}: not a feature row")
    return rows[1][0], np.array([float(x) for x in rows[1][1:]])


def _feature_matrix(rows: list[tuple[str, np.ndarray]]) -> FeatureMatrix:
    labels = [r[0] for r in rows]
    values = np.vstack([r[1] for r in rows])
    return FeatureMatrix(row_labels=labels, columns=list(FEATURE_KEYS), values=values)


def _write_matrix_csv(matrix: FeatureMatrix, path: Path):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["graph"] + matrix.columns)
        for label, row in zip(matrix.row_labels, matrix.values):
            w.writerow([label] + [repr(float(v)) for v in row])


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


@dataclass
class PipelineResult:
    results: dict  # (model_id, subset_label) -> rate
    failures: list  # (item, stage, message)
    output_dir: Path

    @property
    def ok(self) -> bool:
        return not self.failures


def _subset_label(subset: list[str]) -> str:
    return "+".join(subset)


def run_pipeline(cfg: RunConfig, stage: str = "classify") -> PipelineResult:
    """Run (or resume) the pipeline up to the given stage.

    Stages in order: fit, generate, features, clean, classify. Existing valid
    artifacts are reused; failures are recorded per item and skipped.
    """
    order = ["fit", "generate", "features", "clean", "classify"]
    if stage not in order:
        raise ValueError(f"unknown stage {stage!r}")
    depth = order.index(stage)
    paths = _Paths(cfg.output_dir)
    failures: list[tuple[str, str, str]] = []
    results: dict = {}

    networks = sorted(p for p in cfg.input_dir.iterdir() if p.is_file())
    if not networks:
        raise ValueError(f"no input networks in {cfg.input_dir}")

    targets: dict[str, FitTargets] = {}
    real_rows: dict[str, tuple[str, np.ndarray]] = {}
    for net_path in networks:
        net = net_path.stem
        try:
            targets[net] = _ensure_targets(paths, net, net_path)
            real_rows[net] = _ensure_features_for_real(paths, net, net_path)
        except Exception as exc:  # noqa: BLE001 - per-item failures are recorded
            logger.warning("network %s failed: %s", net, exc)
            failures.append((net, "targets", str(exc)))

    live_nets = sorted(targets)
    fitted: dict[tuple[str, str], FittedModel] = {}
    if depth >= 0:
        for net in live_nets:
            for entry in cfg.models:
                try:
                    fitted[(net, entry.model_id)] = _ensure_fitted(
                        paths, cfg, net, entry, targets[net]
                    )
                except Exception as exc:  # noqa: BLE001
                    logger.warning("fit %s/%s failed: %s", net, entry.model_id, exc)
                    failures.append((f"{net}/{entry.model_id}", "fit", str(exc)))

    synth_rows: dict[str, dict[str, tuple[str, np.ndarray]]] = {m.model_id: {} for m in cfg.models}
    if depth >= 1:
        for (net, model_id), fm in sorted(fitted.items()):
            try:
                path = _ensure_synthetic(paths, cfg, net, model_id, fm, targets[net])
                if depth >= 2:
                    synth_rows[model_id][net] = _ensure_features_for_synthetic(
                        paths, net, model_id, path
                    )
            except Exception as exc:  # noqa: BLE001
                logger.warning("generate %s/%s failed: %s", net, model_id, exc)
                failures.append((f"{net}/{model_id}", "generate/features", str(exc)))

    if depth >= 2 and real_rows:
        _write_matrix_csv(_feature_matrix([real_rows[n] for n in sorted(real_rows)]),
                          paths.matrix_file("real"))

    if depth >= 3:
        for entry in cfg.models:
            model_id = entry.model_id
            nets = sorted(set(real_rows) & set(synth_rows[model_id]))
            if len(nets) < 2:
                failures.append((model_id, "clean", "fewer than 2 complete network rows"))
                continue
            real_m = _feature_matrix([real_rows[n] for n in nets])
            synth_m = _feature_matrix([synth_rows[model_id][n] for n in nets])
            _write_matrix_csv(synth_m, paths.matrix_file(model_id))
            try:
                survivors = _clean_stage(cfg, paths, model_id, real_m, synth_m)
            except Exception as exc:  # noqa: BLE001
                failures.append((model_id, "clean", str(exc)))
                continue
            if depth >= 4:
                _classify_stage(
                    cfg, paths, model_id, real_m, synth_m, survivors, results, failures
                )

    if depth >= 4:
        _write_results(cfg, paths, results)
    _write_failures(paths, failures)
    return PipelineResult(results=results, failures=failures, output_dir=cfg.output_dir)


def _ensure_targets(paths: _Paths, net: str, net_path: Path) -> FitTargets:
    f = paths.targets_file(net)
    if f.exists():
        try:
            return _load_targets(f)
        except Exception:  # noqa: BLE001 - rebuild corrupt artifacts
            logger.warning("rebuilding corrupt targets file %s", f)
    graph = read_edge_list(net_path)
    lcc, _ = largest_connected_component(graph)
    t = fit_targets_from_graph(lcc)
    _save_targets(t, f)
    return t


def _ensure_features_for_real(paths: _Paths, net: str, net_path: Path):
    f = paths.feature_file("real", net)
    if f.exists():
        try:
            return _load_feature_row(f)
        except Exception:  # noqa: BLE001
            logger.warning("rebuilding corrupt feature row %s", f)
    graph = read_edge_list(net_path)
    lcc, _ = largest_connected_component(graph)
    fv = extract_feature_vector(lcc, fit_power_law_tail(lcc.degrees().astype(float)))
    _save_feature_row(net, fv, f)
    return _load_feature_row(f)


def _ensure_fitted(paths: _Paths, cfg: RunConfig, net, entry: ModelEntry, t: FitTargets):
    f = paths.fitted_file(net, entry.model_id)
    if f.exists():
        try:
            return FittedModel.from_text(f.read_text())
        except Exception:  # noqa: BLE001
            logger.warning("rebuilding corrupt fitted params %s", f)
    seed = derive_seed(cfg.master_seed, net)
    if entry.kind == "girg":
        fm = fit_girg(t, entry.girg_spec(), master_seed=seed)
    else:
        candidates = {m.model_id: m for m in fit_baselines(t, master_seed=seed)}
        table = {"er": "ER", "ba": "BA"}
        if entry.kind in table:
            fm = candidates[table[entry.kind]]
        elif entry.kind == "chung_lu":
            fm = candidates["CL-c" if entry.weight_mode == "degrees" else "CL"]
        else:
            raise ValueError(f"unknown model kind {entry.kind!r}")
        fm.model_id = entry.model_id
    f.write_text(fm.to_text())
    return fm


def _ensure_synthetic(paths, cfg, net, model_id, fm: FittedModel, t: FitTargets) -> Path:
    f = paths.synthetic_file(net, model_id)
    if f.exists():
        return f
    seed = derive_seed(cfg.master_seed, net)
    graph = generate_from_fitted(fm, t, master_seed=seed, replicate=0)
    write_edge_list(graph, f)
    return f


def _ensure_features_for_synthetic(paths, net, model_id, edge_path: Path):
    f = paths.feature_file(model_id, net)
    if f.exists():
        try:
            return _load_feature_row(f)
        except Exception:  # noqa: BLE001
            logger.warning("rebuilding corrupt feature row %s", f)
    graph = read_edge_list(edge_path)
    lcc, _ = largest_connected_component(graph)
    fv = extract_feature_vector(lcc, fit_power_law_tail(lcc.degrees().astype(float)))
    _save_feature_row(net, fv, f)
    return _load_feature_row(f)


def _clean_stage(cfg, paths, model_id, real_m, synth_m) -> list[str]:
    report: list = []
    combined = real_m.vstack(synth_m)
    cleaned = numerical_clean(combined, report=report)
    cleaned = variation_clean(cleaned, threshold=cfg.variation_threshold, report=report)
    cleaned = correlation_group(
        cleaned, priority=cfg.priority, threshold=cfg.correlation_threshold, report=report
    )
    lines = [str(r) for r in report] + ["kept: " + " ".join(cleaned.columns)]
    paths.cleaning_report(model_id).write_text("\n".join(lines) + "\n")
    return cleaned.columns


def _classify_stage(cfg, paths, model_id, real_m, synth_m, survivors, results, failures):
    for subset in cfg.feature_subsets:
        label = _subset_label(subset)
        usable = [k for k in subset if k in survivors]
        if not usable:
            failures.append((f"{model_id}/{label}", "classify", "no surviving features"))
            continue
        rng = derive_rng(cfg.master_seed, "classify", model_id, label)
        try:
            rate = misclassification_rate(
                real_m,
                synth_m,
                usable,
                rng,
                folds=cfg.folds,
                C_grid=cfg.svm_c_grid,
                gamma_grid=cfg.svm_gamma_grid,
            )
        except Exception as exc:  # noqa: BLE001
            failures.append((f"{model_id}/{label}", "classify", str(exc)))
            continue
        results[(model_id, label)] = rate


def _write_results(cfg, paths, results):
    labels = [_subset_label(s) for s in cfg.feature_subsets]
    with paths.results_file().open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["model"] + labels)
        for entry in cfg.models:
            row = [entry.model_id]
            for label in labels:
                value = results.get((entry.model_id, label))
                row.append("" if value is None else repr(value))
            w.writerow(row)


def _write_failures(paths, failures):
    if failures:
        lines = [f"{item}\t{stage}\t{msg}" for item, stage, msg in failures]
        paths.failures_file().write_text("\n".join(lines) + "\n")
    elif paths.failures_file().exists():
        paths.failures_file().unlink()


# ---------------------------------------------------------------------------
# self test
# ---------------------------------------------------------------------------


def make_self_test_inputs(
    out_dir, n_networks: int = 20, seed: int = 71, n_range=(1200, 2600)
) -> Path:
    """Write GIRG-sampled target networks plus a same-family config.

    Targets come from 2-d max-norm torus GIRGs with varied size, density, and
    locality, so the same-family fit should be near-indistinguishable while
    baselines stay separable.
    """
    out_dir = Path(out_dir)
    networks = out_dir / "networks"
    networks.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    for i in range(n_networks):
        n = int(rng.integers(*n_range))
        alpha = float(rng.uniform(1.8, 3.2))
        c = float(rng.uniform(0.7, 1.6))
        params = GirgParams(
            d=2, tau=2.5, alpha=alpha, c=c, topology=Topology.TORUS, spec=max_norm_spec(2)
        )
        ws = sample_power_law_weights(n, 2.5, 1.0, derive_rng(seed, "target", i, "weights"))
        emb = sample_boolean_girg(params, ws, derive_rng(seed, "target", i, "edges"))
        lcc, _ = largest_connected_component(emb.graph)
        write_edge_list(lcc, networks / f"target{i:03d}.edges")
    cfg = RunConfig(
        input_dir=networks,
        output_dir=out_dir / "out",
        master_seed=seed,
        folds=10,
        models=[
            ModelEntry(model_id="2d", kind="girg", d=2, topology="torus",
                       distance="max(x0, x1)", weight_mode="powerlaw"),
            ModelEntry(model_id="ER", kind="er"),
        ],
        feature_subsets=[list(s) for s in GEOMETRIC_SUBSETS] + [["degree_mean"], ["tau"]],
        svm_c_grid=[2.0**e for e in range(-3, 8, 2)],
        svm_gamma_grid=[2.0**e for e in range(-7, 2, 2)],
    )
    config_path = out_dir / "selftest.cfg"
    write_config(cfg, config_path)
    return config_path
