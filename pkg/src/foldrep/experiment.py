"""End-to-end classification experiments over the available representations.

One config drives load, split, representation-specific kernel building,
training, and evaluation; every run writes a report CSV (per-class error
counts and rates plus the global rate), model artifacts, and a manifest
(seeds, versions, input hashes) from which the run can be replayed
byte-identically. All randomness flows from the single root seed through
:func:`derive_seed`.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import os
import platform
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from . import svm
from .complexity import DEFAULT_BUDGET, complexity_features
from .datamodel import (
    Label,
    file_sha256,
    assemble_datasets,
    chemphys_components,
    normalize_solubility,
    parse_descriptor_csv,
    parse_fasta,
    parse_pdb_ca,
    parse_solubility_csv,
    split_dataset,
)
from .errors import ConfigError, DataError, FoldrepError
from .evolve import (
    GaConfig,
    decode_cost_matrix,
    make_control_fitness,
    make_control_set,
    run as run_ga,
)
from .kernel import center_to_kernel, gaussian_kernel, gaussian_rows, kernel_rows
from .graphcore import transition_view
from .pam120 import PAM120
from .seqdist import (
    DistanceMatrix,
    MatrixScheme,
    UnitScheme,
    VectorScheme,
    distance_fn,
    pairwise_distances,
    pam_to_costs,
    write_cost_matrix,
)

log = logging.getLogger(__name__)

try:
    from importlib.metadata import PackageNotFoundError, version
    PACKAGE_VERSION = version("foldrep")
except PackageNotFoundError:  # pragma: no cover - not installed
    PACKAGE_VERSION = "0+unknown"

REPRESENTATIONS = (
    "seq",
    "seq-pam",
    "seq-learned",
    "graph-direct",
    "seriated",
    "complexity",
)

#: Representations that need coordinates and descriptor attributes.
GRAPH_REPRESENTATIONS = ("graph-direct", "seriated", "complexity")

GRAPH_DIRECT_NOTE = (
    "graph-direct substitutes an eigenvalue-spectrum dissimilarity between "
    "weighted transition operators for an external graph kernel"
)


def derive_seed(root: int, label: str) -> int:
    """Per-stage seed: the first 8 little-endian bytes of
    sha256(root || NUL || label), masked to 63 bits."""
    digest = hashlib.sha256(("%d\x00%s" % (root, label)).encode()).digest()
    return int.from_bytes(digest[:8], "little") & (2 ** 63 - 1)


@dataclass
class ExperimentConfig:
    solubility: str
    fasta: str
    representation: str = "seq"
    pdb_dir: str | None = None
    descriptors: str | None = None
    svm_c: float = 2.0
    indel_cost: float = 1.0
    vector_scale: float = 1.0
    gaussian_sigma: float = 1.0
    r_min: float = 4.0
    r_max: float = 8.0
    attr_components: int = 3
    train_fraction: float | None = None
    train_counts: dict | None = None
    search_budget: int = DEFAULT_BUDGET
    symmetrize_costs: bool = False
    seed: int = 0
    out_dir: str = "experiment-out"
    ga: GaConfig = field(default_factory=GaConfig)

    def __post_init__(self):
        if self.representation not in REPRESENTATIONS:
            raise ConfigError(
                "unknown representation %r (choose from %s)"
                % (self.representation, ", ".join(REPRESENTATIONS))
            )
        if self.train_fraction is not None and self.train_counts is not None:
            raise ConfigError("give at most one of train_fraction/train_counts")
        if self.train_fraction is None and self.train_counts is None:
            self.train_fraction = 0.7
        if self.train_counts is not None:
            bad = set(self.train_counts) - {l.value for l in Label}
            if bad:
                raise ConfigError("train_counts has unknown classes: %s"
                                  % sorted(bad))
        for name in ("svm_c", "indel_cost", "vector_scale", "gaussian_sigma"):
            if not getattr(self, name) > 0:
                raise ConfigError("%s must be strictly positive" % name)
        if isinstance(self.ga, dict):
            try:
                self.ga = GaConfig(**self.ga)
            except TypeError as exc:
                raise ConfigError("bad ga options: %s" % exc) from None


def validate_inputs(config: ExperimentConfig) -> None:
    """Check that every file the representation needs exists."""
    for name, path in (("solubility", config.solubility),
                       ("fasta", config.fasta)):
        if not os.path.isfile(path):
            raise ConfigError("%s file does not exist: %s" % (name, path))
    if config.representation in GRAPH_REPRESENTATIONS:
        if config.pdb_dir is None or not os.path.isdir(config.pdb_dir):
            raise ConfigError(
                "representation %r needs an existing pdb_dir"
                % config.representation
            )
        if config.descriptors is None or not os.path.isfile(config.descriptors):
            raise ConfigError(
                "representation %r needs an existing descriptor table"
                % config.representation
            )
    elif config.descriptors is not None and not os.path.isfile(config.descriptors):
        raise ConfigError("descriptor table does not exist: %s"
                          % config.descriptors)


_CONFIG_KEYS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def _config_from_mapping(payload: dict) -> ExperimentConfig:
    unknown = set(payload) - _CONFIG_KEYS
    if unknown:
        raise ConfigError("unknown config keys: %s" % ", ".join(sorted(unknown)))
    try:
        return ExperimentConfig(**payload)
    except TypeError as exc:
        raise ConfigError("bad config: %s" % exc) from None


def load_config(path) -> ExperimentConfig:
    """Read an experiment config from a TOML or JSON file."""
    try:
        import tomllib
    except ImportError:  # python < 3.11
        import tomli as tomllib
    name = str(path)
    try:
        if name.endswith(".json"):
            with open(path) as fh:
                payload = json.load(fh)
        else:
            with open(path, "rb") as fh:
                payload = tomllib.load(fh)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError("%s: %s" % (path, exc)) from None
    except OSError as exc:
        raise ConfigError("cannot read config %s: %s" % (path, exc)) from None
    if not isinstance(payload, dict):
        raise ConfigError("%s: config root must be a table/object" % path)
    return _config_from_mapping(payload)


@contextmanager
def _stage(name: str):
    """Prefix pipeline errors with the stage that raised them."""
    try:
        yield
    except FoldrepError as exc:
        exc.args = ("stage %s: %s" % (name, exc),)
        raise


def label_sign(label: Label) -> float:
    return 1.0 if label is Label.SOLUBLE else -1.0


@dataclass
class LoadedData:
    bundle: object
    input_hashes: dict


def load_inputs(config: ExperimentConfig) -> LoadedData:
    """Parse every referenced file and assemble the dataset views."""
    validate_inputs(config)
    hashes = {}
    with _stage("load"):
        hashes[config.solubility] = file_sha256(config.solubility)
        records = normalize_solubility(parse_solubility_csv(config.solubility))
        hashes[config.fasta] = file_sha256(config.fasta)
        sequences = parse_fasta(config.fasta)
        coordinates = None
        scores = None
        if config.representation in GRAPH_REPRESENTATIONS:
            coordinates = {}
            for entry in sorted(os.listdir(config.pdb_dir)):
                if not entry.endswith(".pdb"):
                    continue
                path = os.path.join(config.pdb_dir, entry)
                hashes[path] = file_sha256(path)
                coordinates[entry[:-4]] = parse_pdb_ca(path)
            hashes[config.descriptors] = file_sha256(config.descriptors)
            table = parse_descriptor_csv(config.descriptors)
            scores, _ = chemphys_components(table, k=config.attr_components)
        bundle = assemble_datasets(records, sequences, coordinates, scores,
                                   r_min=config.r_min, r_max=config.r_max)
    return LoadedData(bundle=bundle, input_hashes=hashes)


def graph_spectrum(graph) -> np.ndarray:
    """Eigenvalues of the symmetrized weighted walk operator, descending."""
    transition_view(graph, edge_weighted=True)  # isolated-vertex validation
    w = graph.weight_matrix()
    deg = w.sum(axis=1)
    sym = w / np.sqrt(np.outer(deg, deg))
    return np.sort(np.linalg.eigvalsh(sym))[::-1]


def spectral_distance(a: np.ndarray, b: np.ndarray) -> float:
    n = max(a.size, b.size)
    pa = np.zeros(n)
    pa[:a.size] = a
    pb = np.zeros(n)
    pb[:b.size] = b
    return float(np.sqrt(((pa - pb) ** 2).sum()))


def spectral_distance_matrix(spectra, ids) -> DistanceMatrix:
    n = len(spectra)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = spectral_distance(spectra[i], spectra[j])
            out[i, j] = d
            out[j, i] = d
    return DistanceMatrix(values=out, ids=list(ids))


@dataclass
class PipelineOutcome:
    representation: str
    split: object
    train_report: svm.ErrorReport
    test_report: svm.ErrorReport
    model: svm.SvmModel
    note: str = ""
    artifacts: dict = field(default_factory=dict)


def select_view(config: ExperimentConfig, bundle):
    if config.representation in ("seq", "seq-pam", "seq-learned"):
        return bundle.sequences
    if config.representation == "seriated":
        return bundle.seriated
    return bundle.graphs


def _run_pipeline(config: ExperimentConfig, data: LoadedData,
                  shuffle_seed: int | None = None,
                  checkpoint_dir=None) -> PipelineOutcome:
    view = select_view(config, data.bundle)
    if len(view) < 4:
        raise DataError("dataset too small after assembly: %d usable proteins"
                        % len(view))
    with _stage("split"):
        split = split_dataset(view.ids, view.labels,
                              train_fraction=config.train_fraction,
                              train_counts=config.train_counts,
                              seed=derive_seed(config.seed, "split"))
    index = {pid: k for k, pid in enumerate(view.ids)}
    train_idx = [index[pid] for pid in split.train_ids]
    test_idx = [index[pid] for pid in split.test_ids]
    y_train = np.array([label_sign(view.labels[k]) for k in train_idx])
    y_test = np.array([label_sign(view.labels[k]) for k in test_idx])
    if shuffle_seed is not None:
        rng = np.random.default_rng(shuffle_seed)
        y_train = y_train[rng.permutation(y_train.size)]

    note = ""
    artifacts: dict = {}
    rep = config.representation
    if rep == "complexity":
        with _stage("features"):
            feats, summary = complexity_features(
                view.graphs, view.labels,
                search_budget=config.search_budget,
                seed=derive_seed(config.seed, "ambiguity"),
            )
        artifacts["complexity_summary"] = summary
        artifacts["complexity_features"] = {
            pid: feats[k].tolist() for pid, k in index.items()
        }
        with _stage("kernel"):
            kernel = gaussian_kernel(feats[train_idx], config.gaussian_sigma)
        with _stage("predict-rows"):
            rows = gaussian_rows(feats[test_idx], feats[train_idx],
                                 config.gaussian_sigma)
    elif rep == "graph-direct":
        note = GRAPH_DIRECT_NOTE
        with _stage("spectra"):
            spectra = [graph_spectrum(g) for g in view.graphs]
        with _stage("distances"):
            dm = spectral_distance_matrix([spectra[k] for k in train_idx],
                                           list(split.train_ids))
        with _stage("kernel"):
            kernel = center_to_kernel(dm)
        with _stage("predict-rows"):
            rows = kernel_rows(kernel, [spectra[k] for k in test_idx],
                               [spectra[k] for k in train_idx],
                               spectral_distance)
    else:
        if rep == "seq":
            scheme = UnitScheme(indel_cost=config.indel_cost)
            patterns = [view.sequences[k].residues for k in range(len(view))]
        elif rep == "seq-pam":
            scheme = MatrixScheme(costs=pam_to_costs(PAM120),
                                  indel_cost=config.indel_cost)
            patterns = [view.sequences[k].residues for k in range(len(view))]
        elif rep == "seq-learned":
            patterns = [view.sequences[k].residues for k in range(len(view))]
            with _stage("evolve"):
                control = make_control_set(
                    list(split.train_ids),
                    [patterns[k] for k in train_idx],
                    y_train,
                    seed=derive_seed(config.seed, "control"),
                )
                fitness = make_control_fitness(
                    control,
                    indel_cost=config.indel_cost,
                    svm_c=config.svm_c,
                    symmetrize=config.symmetrize_costs,
                )
                ga_conf = dataclasses.replace(
                    config.ga, seed=derive_seed(config.seed, "ga"))
                ga_result = run_ga(fitness, ga_conf,
                                   checkpoint_dir=checkpoint_dir)
            costs = decode_cost_matrix(ga_result.best_genome,
                                       symmetrize=config.symmetrize_costs)
            scheme = MatrixScheme(costs=costs, indel_cost=config.indel_cost)
            artifacts["learned_costs"] = costs
            artifacts["ga"] = ga_result
        else:  # seriated
            scheme = VectorScheme(scale=config.vector_scale,
                                  indel_cost=config.indel_cost)
            patterns = [view.sequences[k].elements for k in range(len(view))]
        train_patterns = [patterns[k] for k in train_idx]
        with _stage("distances"):
            dm = pairwise_distances(train_patterns, scheme,
                                    ids=list(split.train_ids))
        with _stage("kernel"):
            kernel = center_to_kernel(dm)
        with _stage("predict-rows"):
            rows = kernel_rows(kernel, [patterns[k] for k in test_idx],
                               train_patterns, distance_fn(scheme))

    with _stage("train"):
        model = svm.train(kernel, y_train, c=config.svm_c)
    with _stage("evaluate"):
        train_report = svm.evaluate(model, kernel.values, y_train)
        test_report = svm.evaluate(model, rows, y_test)
    return PipelineOutcome(
        representation=rep,
        split=split,
        train_report=train_report,
        test_report=test_report,
        model=model,
        note=note,
        artifacts=artifacts,
    )


_REPORT_COLUMNS = [
    "representation",
    "n_train",
    "n_test",
    "errors_insoluble",
    "n_insoluble",
    "rate_insoluble",
    "errors_soluble",
    "n_soluble",
    "rate_soluble",
    "errors_global",
    "rate_global",
    "train_errors_global",
    "train_rate_global",
    "non_convergent",
    "note",
]


def _fmt(value: float) -> str:
    return "%.17g" % value


def _report_row(outcome: PipelineOutcome, label: str | None = None) -> dict:
    test = outcome.test_report
    train = outcome.train_report
    return {
        "representation": label or outcome.representation,
        "n_train": train.total_pos + train.total_neg,
        "n_test": test.total_pos + test.total_neg,
        "errors_insoluble": test.errors_neg,
        "n_insoluble": test.total_neg,
        "rate_insoluble": _fmt(test.rate_neg),
        "errors_soluble": test.errors_pos,
        "n_soluble": test.total_pos,
        "rate_soluble": _fmt(test.rate_pos),
        "errors_global": test.global_errors,
        "rate_global": _fmt(test.global_rate),
        "train_errors_global": train.global_errors,
        "train_rate_global": _fmt(train.global_rate),
        "non_convergent": int(outcome.model.non_convergent),
        "note": outcome.note,
    }


def write_report_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_REPORT_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    outcome: PipelineOutcome
    report_path: str
    manifest_path: str
    rows: list


def _config_payload(config: ExperimentConfig) -> dict:
    payload = dataclasses.asdict(config)
    for key in ("solubility", "fasta", "pdb_dir", "descriptors"):
        if payload[key] is not None:
            payload[key] = os.path.abspath(payload[key])
    payload["out_dir"] = os.path.abspath(payload["out_dir"])
    return payload


def _write_manifest(config: ExperimentConfig, data: LoadedData,
                    extra: dict) -> str:
    manifest = {
        "config": _config_payload(config),
        "seeds": {
            "root": config.seed,
            "split": derive_seed(config.seed, "split"),
            "control": derive_seed(config.seed, "control"),
            "ga": derive_seed(config.seed, "ga"),
            "ambiguity": derive_seed(config.seed, "ambiguity"),
        },
        "inputs": {os.path.abspath(p): h for p, h in data.input_hashes.items()},
        "versions": {
            "package": PACKAGE_VERSION,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
    }
    manifest.update(extra)
    path = os.path.join(config.out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _write_artifacts(config: ExperimentConfig, outcome: PipelineOutcome) -> None:
    svm.save_model(os.path.join(config.out_dir, "model.json"), outcome.model)
    if "learned_costs" in outcome.artifacts:
        write_cost_matrix(os.path.join(config.out_dir, "learned_costs.txt"),
                          outcome.artifacts["learned_costs"])
    if "ga" in outcome.artifacts:
        ga = outcome.artifacts["ga"]
        with open(os.path.join(config.out_dir, "ga_trace.json"), "w") as fh:
            json.dump({
                "best_fitness": ga.best_fitness,
                "generations": ga.generations,
                "stopped": ga.stopped,
                "trace": ga.trace,
            }, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if "complexity_summary" in outcome.artifacts:
        with open(os.path.join(config.out_dir, "complexity_summary.json"),
                  "w") as fh:
            json.dump({
                "summary": outcome.artifacts["complexity_summary"],
                "features": outcome.artifacts["complexity_features"],
            }, fh, indent=2, sort_keys=True)
            fh.write("\n")


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Execute the configured pipeline end-to-end and write its report,
    model artifacts, and replay manifest under ``config.out_dir``."""
    os.makedirs(config.out_dir, exist_ok=True)
    data = load_inputs(config)
    checkpoints = (os.path.join(config.out_dir, "ga_checkpoints")
                   if config.representation == "seq-learned" else None)
    outcome = _run_pipeline(config, data, checkpoint_dir=checkpoints)
    rows = [_report_row(outcome)]
    report_path = os.path.join(config.out_dir, "report.csv")
    write_report_csv(report_path, rows)
    _write_artifacts(config, outcome)
    manifest_path = _write_manifest(config, data, {
        "report": "report.csv",
        "split": {
            "train": list(outcome.split.train_ids),
            "test": list(outcome.split.test_ids),
        },
        "note": outcome.note,
    })
    return ExperimentResult(
        config=config,
        outcome=outcome,
        report_path=report_path,
        manifest_path=manifest_path,
        rows=rows,
    )


def replay_experiment(manifest_path, out_dir) -> ExperimentResult:
    """Re-run an experiment from its manifest into a fresh directory.

    Inputs are re-hashed and compared against the manifest before running,
    so a replay on changed data fails loudly instead of silently differing.
    """
    with open(manifest_path) as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError("%s: %s" % (manifest_path, exc)) from None
    try:
        payload = dict(manifest["config"])
        recorded = dict(manifest["inputs"])
    except KeyError as exc:
        raise DataError("%s: manifest missing %s" % (manifest_path, exc)) from None
    payload["out_dir"] = str(out_dir)
    config = _config_from_mapping(payload)
    for path, digest in recorded.items():
        if not os.path.isfile(path):
            raise DataError("replay input missing: %s" % path)
        if file_sha256(path) != digest:
            raise DataError("replay input changed since the manifest: %s" % path)
    return run_experiment(config)


def label_shuffle_control(config: ExperimentConfig,
                          seed: int | None = None) -> dict:
    """Run the pipeline twice, once with permuted training labels.

    Returns both outcomes plus the path of the two-row comparison report
    written under ``config.out_dir``.
    """
    os.makedirs(config.out_dir, exist_ok=True)
    data = load_inputs(config)
    control = _run_pipeline(config, data)
    shuffle_seed = derive_seed(config.seed if seed is None else seed,
                               "label-shuffle")
    shuffled = _run_pipeline(config, data, shuffle_seed=shuffle_seed)
    rows = [
        _report_row(control, label=config.representation),
        _report_row(shuffled, label=config.representation + "+shuffled-labels"),
    ]
    path = os.path.join(config.out_dir, "shuffle_report.csv")
    write_report_csv(path, rows)
    return {
        "control": control,
        "shuffled": shuffled,
        "report_path": path,
        "rows": rows,
    }


@dataclass
class BaselineResult:
    threshold: int
    train_report: svm.ErrorReport
    test_report: svm.ErrorReport


def _length_report(lengths, labels, threshold: int) -> svm.ErrorReport:
    errors_pos = errors_neg = total_pos = total_neg = 0
    for length, label in zip(lengths, labels):
        predicted = 1.0 if length < threshold else -1.0
        if label > 0:
            total_pos += 1
            errors_pos += predicted != label
        else:
            total_neg += 1
            errors_neg += predicted != label
    return svm.ErrorReport(errors_pos=int(errors_pos), total_pos=total_pos,
                           errors_neg=int(errors_neg), total_neg=total_neg)


def baseline_length_classifier(train_pairs, test_pairs) -> BaselineResult:
    """Best length threshold for the rule: length < t means soluble (+1).

    Candidate thresholds are the distinct training lengths plus one past
    the maximum (the error is piecewise constant between observed
    lengths); minimal training error wins, ties break to the smallest
    candidate.
    """
    train_pairs = [(int(l), float(y)) for l, y in train_pairs]
    test_pairs = [(int(l), float(y)) for l, y in test_pairs]
    if not train_pairs or not test_pairs:
        raise DataError("baseline needs non-empty train and test sets")
    for _, y in train_pairs + test_pairs:
        if y not in (-1.0, 1.0):
            raise DataError("labels must be -1 or +1")
    train_labels = {y for _, y in train_pairs}
    if len(train_labels) < 2:
        raise DataError("baseline training data has a single class")
    lengths = [l for l, _ in train_pairs]
    labels = [y for _, y in train_pairs]
    candidates = sorted(set(lengths))
    candidates.append(max(lengths) + 1)
    best_t = None
    best_errors = None
    for t in candidates:
        errors = _length_report(lengths, labels, t).global_errors
        if best_errors is None or errors < best_errors:
            best_errors = errors
            best_t = t
    return BaselineResult(
        threshold=best_t,
        train_report=_length_report(lengths, labels, best_t),
        test_report=_length_report([l for l, _ in test_pairs],
                                   [y for _, y in test_pairs], best_t),
    )


def run_baseline(config: ExperimentConfig) -> BaselineResult:
    """Length-threshold baseline on the same split the experiments use."""
    os.makedirs(config.out_dir, exist_ok=True)
    data = load_inputs(config)
    view = data.bundle.sequences
    with _stage("split"):
        split = split_dataset(view.ids, view.labels,
                              train_fraction=config.train_fraction,
                              train_counts=config.train_counts,
                              seed=derive_seed(config.seed, "split"))
    index = {pid: k for k, pid in enumerate(view.ids)}

    def pairs(ids):
        return [(len(view.sequences[index[pid]].residues),
                 label_sign(view.labels[index[pid]])) for pid in ids]

    result = baseline_length_classifier(pairs(split.train_ids),
                                        pairs(split.test_ids))
    path = os.path.join(config.out_dir, "baseline_report.csv")
    test = result.test_report
    train = result.train_report
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "threshold", "train_errors_global", "train_rate_global",
            "errors_insoluble", "n_insoluble", "rate_insoluble",
            "errors_soluble", "n_soluble", "rate_soluble",
            "errors_global", "rate_global",
        ])
        writer.writerow([
            result.threshold,
            train.global_errors, _fmt(train.global_rate),
            test.errors_neg, test.total_neg, _fmt(test.rate_neg),
            test.errors_pos, test.total_pos, _fmt(test.rate_pos),
            test.global_errors, _fmt(test.global_rate),
        ])
    return result
