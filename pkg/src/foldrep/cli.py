"""Command-line interface.

Every verb reads one experiment config (TOML or JSON) and a handful of
overriding flags, runs the requested stage, and writes its outputs under
the --out directory. Exit codes: 0 success, 2 configuration error, 3 data
error, 4 numeric failure.
"""

from __future__ import annotations

import dataclasses
import functools
import json
import os
import sys

import click
import numpy as np

from .complexity import complexity_features
from .datamodel import (
    parse_descriptor_csv,
    split_dataset,
    write_dataset_manifest,
)
from .errors import ConfigError, DataError, NumericError
from .evolve import (
    decode_cost_matrix,
    make_control_fitness,
    make_control_set,
    run as run_ga,
)
from .experiment import (
    GRAPH_REPRESENTATIONS,
    REPRESENTATIONS,
    ExperimentConfig,
    derive_seed,
    label_shuffle_control,
    load_config,
    load_inputs,
    replay_experiment,
    run_baseline,
    run_experiment,
    label_sign,
    select_view,
    spectral_distance_matrix,
    graph_spectrum,
)
from .graphcore import save_graph
from .kernel import export_matrix_csv, save_matrix
from .pam120 import PAM120
from .seqdist import (
    MatrixScheme,
    UnitScheme,
    VectorScheme,
    pairwise_distances,
    pam_to_costs,
    read_cost_matrix,
    write_cost_matrix,
)
from .stats import (
    cca,
    components_of_cost_matrix,
    pca,
    permutation_pvalues,
    write_cca_report,
    write_pca_report,
)


def _exit_codes(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo("config error: %s" % exc, err=True)
            sys.exit(2)
        except DataError as exc:
            click.echo("data error: %s" % exc, err=True)
            sys.exit(3)
        except NumericError as exc:
            click.echo("numeric error: %s" % exc, err=True)
            sys.exit(4)
        except OSError as exc:
            click.echo("data error: %s" % exc, err=True)
            sys.exit(3)
    return wrapper


def _shared_options(fn):
    fn = click.option("--config", "config_path", required=True,
                      type=click.Path(), help="TOML or JSON config file.")(fn)
    fn = click.option("--seed", type=int, default=None,
                      help="Override the config's root seed.")(fn)
    fn = click.option("--out", "out_dir", type=click.Path(), default=None,
                      help="Override the config's output directory.")(fn)
    fn = click.option("--representation", "representation", default=None,
                      type=click.Choice(REPRESENTATIONS),
                      help="Override the config's representation.")(fn)
    fn = click.option("--svm-c", type=float, default=None,
                      help="Override the SVM C value (config default 2).")(fn)
    fn = click.option("--r-min", type=float, default=None,
                      help="Override the contact window lower bound (4).")(fn)
    fn = click.option("--r-max", type=float, default=None,
                      help="Override the contact window upper bound (8).")(fn)
    return fn


def _resolve(config_path, seed, out_dir, representation, svm_c, r_min, r_max,
             force_graph: bool = False) -> ExperimentConfig:
    config = load_config(config_path)
    updates = {}
    if seed is not None:
        updates["seed"] = seed
    if out_dir is not None:
        updates["out_dir"] = out_dir
    if representation is not None:
        updates["representation"] = representation
    if svm_c is not None:
        updates["svm_c"] = svm_c
    if r_min is not None:
        updates["r_min"] = r_min
    if r_max is not None:
        updates["r_max"] = r_max
    if force_graph and updates.get(
            "representation", config.representation) not in GRAPH_REPRESENTATIONS:
        updates["representation"] = "seriated"
    if updates:
        config = dataclasses.replace(config, **updates)
    return config


@click.group()
def main():
    """Protein classification pipelines over sequence, graph, seriated, and
    complexity representations."""


@main.command()
@_shared_options
@_exit_codes
def ingest(**kwargs):
    """Parse the corpus, assemble datasets, and write the dataset manifest."""
    config = _resolve(**kwargs)
    os.makedirs(config.out_dir, exist_ok=True)
    data = load_inputs(config)
    view = select_view(config, data.bundle)
    split = split_dataset(view.ids, view.labels,
                          train_fraction=config.train_fraction,
                          train_counts=config.train_counts,
                          seed=derive_seed(config.seed, "split"))
    path = os.path.join(config.out_dir, "dataset_manifest.json")
    write_dataset_manifest(path, view.ids, view.labels, split,
                           provenance=data.input_hashes)
    click.echo("wrote %s (%d proteins: %d train, %d test)"
               % (path, len(view), len(split.train_ids), len(split.test_ids)))


@main.command("build-graphs")
@_shared_options
@_exit_codes
def build_graphs(**kwargs):
    """Build contact graphs and write one JSON file per protein."""
    config = _resolve(**kwargs, force_graph=True)
    data = load_inputs(config)
    graphs = data.bundle.graphs
    out = os.path.join(config.out_dir, "graphs")
    os.makedirs(out, exist_ok=True)
    for pid, graph in zip(graphs.ids, graphs.graphs):
        save_graph(os.path.join(out, "%s.json" % pid), graph)
    click.echo("wrote %d graphs to %s" % (len(graphs), out))


@main.command()
@_shared_options
@_exit_codes
def seriate(**kwargs):
    """Seriate contact graphs into vector sequences, one JSON per protein."""
    config = _resolve(**kwargs, force_graph=True)
    data = load_inputs(config)
    seriated = data.bundle.seriated
    out = os.path.join(config.out_dir, "seriated")
    os.makedirs(out, exist_ok=True)
    for pid, vs in zip(seriated.ids, seriated.sequences):
        with open(os.path.join(out, "%s.json" % pid), "w") as fh:
            json.dump({
                "protein_id": pid,
                "elements": vs.elements.tolist(),
                "meta": {k: (v.tolist() if isinstance(v, np.ndarray) else v)
                         for k, v in vs.meta.items()},
            }, fh, indent=2, sort_keys=True)
            fh.write("\n")
    click.echo("wrote %d seriated sequences to %s" % (len(seriated), out))


@main.command()
@_shared_options
@click.option("--costs", "costs_path", type=click.Path(), default=None,
              help="Cost-matrix file for the seq-learned representation.")
@_exit_codes
def distances(costs_path, **kwargs):
    """Write the pairwise distance matrix of the configured representation."""
    config = _resolve(**kwargs)
    os.makedirs(config.out_dir, exist_ok=True)
    data = load_inputs(config)
    view = select_view(config, data.bundle)
    rep = config.representation
    if rep == "complexity":
        raise ConfigError("the complexity representation has no distance matrix")
    if rep == "graph-direct":
        spectra = [graph_spectrum(g) for g in view.graphs]
        dm = spectral_distance_matrix(spectra, view.ids)
    else:
        if rep == "seq":
            scheme = UnitScheme(indel_cost=config.indel_cost)
            patterns = [s.residues for s in view.sequences]
        elif rep == "seq-pam":
            scheme = MatrixScheme(costs=pam_to_costs(PAM120),
                                  indel_cost=config.indel_cost)
            patterns = [s.residues for s in view.sequences]
        elif rep == "seq-learned":
            if costs_path is None:
                raise ConfigError("seq-learned distances need --costs")
            scheme = MatrixScheme(costs=read_cost_matrix(costs_path),
                                  indel_cost=config.indel_cost)
            patterns = [s.residues for s in view.sequences]
        else:  # seriated
            scheme = VectorScheme(scale=config.vector_scale,
                                  indel_cost=config.indel_cost)
            patterns = [vs.elements for vs in view.sequences]
        dm = pairwise_distances(patterns, scheme, ids=view.ids)
    base = os.path.join(config.out_dir, "distances")
    save_matrix(base + ".bin", dm.values)
    export_matrix_csv(base + ".csv", dm.values)
    with open(base + "_ids.json", "w") as fh:
        json.dump(list(view.ids), fh, indent=2)
        fh.write("\n")
    click.echo("wrote %s.bin and %s.csv (%d patterns)"
               % (base, base, len(view)))


@main.command()
@_shared_options
@_exit_codes
def train(**kwargs):
    """Run the configured pipeline and save the trained model."""
    config = _resolve(**kwargs)
    result = run_experiment(config)
    report = result.outcome.test_report
    click.echo("model: %s" % os.path.join(config.out_dir, "model.json"))
    click.echo("test errors: %d/%d insoluble, %d/%d soluble, global rate %.4f"
               % (report.errors_neg, report.total_neg,
                  report.errors_pos, report.total_pos, report.global_rate))


@main.command()
@_shared_options
@_exit_codes
def evolve(**kwargs):
    """Learn a substitution-cost matrix with the genetic algorithm."""
    config = _resolve(**kwargs)
    os.makedirs(config.out_dir, exist_ok=True)
    data = load_inputs(config)
    view = data.bundle.sequences
    split = split_dataset(view.ids, view.labels,
                          train_fraction=config.train_fraction,
                          train_counts=config.train_counts,
                          seed=derive_seed(config.seed, "split"))
    index = {pid: k for k, pid in enumerate(view.ids)}
    train_ids = list(split.train_ids)
    control = make_control_set(
        train_ids,
        [view.sequences[index[pid]].residues for pid in train_ids],
        np.array([label_sign(view.labels[index[pid]]) for pid in train_ids]),
        seed=derive_seed(config.seed, "control"),
    )
    fitness = make_control_fitness(control, indel_cost=config.indel_cost,
                                   svm_c=config.svm_c,
                                   symmetrize=config.symmetrize_costs)
    ga_conf = dataclasses.replace(config.ga, seed=derive_seed(config.seed, "ga"))
    result = run_ga(fitness, ga_conf,
                    checkpoint_dir=os.path.join(config.out_dir, "ga_checkpoints"))
    costs = decode_cost_matrix(result.best_genome,
                               symmetrize=config.symmetrize_costs)
    costs_path = os.path.join(config.out_dir, "learned_costs.txt")
    write_cost_matrix(costs_path, costs)
    with open(os.path.join(config.out_dir, "ga_trace.json"), "w") as fh:
        json.dump({
            "best_fitness": result.best_fitness,
            "generations": result.generations,
            "stopped": result.stopped,
            "trace": result.trace,
        }, fh, indent=2, sort_keys=True)
        fh.write("\n")
    click.echo("wrote %s (best fitness %.4f after %d generations, %s)"
               % (costs_path, result.best_fitness, result.generations,
                  result.stopped))


@main.command()
@_shared_options
@_exit_codes
def complexity(**kwargs):
    """Compute entropy/ambiguity features for every contact graph."""
    config = _resolve(**kwargs, force_graph=True)
    data = load_inputs(config)
    graphs = data.bundle.graphs
    os.makedirs(config.out_dir, exist_ok=True)
    feats, summary = complexity_features(
        graphs.graphs, graphs.labels,
        search_budget=config.search_budget,
        seed=derive_seed(config.seed, "ambiguity"),
    )
    csv_path = os.path.join(config.out_dir, "complexity_features.csv")
    with open(csv_path, "w") as fh:
        fh.write("protein_id,label,entropy,ambiguity\n")
        for k, pid in enumerate(graphs.ids):
            fh.write("%s,%s,%.17g,%.17g\n"
                     % (pid, graphs.labels[k].value, feats[k, 0], feats[k, 1]))
    with open(os.path.join(config.out_dir, "complexity_summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    click.echo("wrote %s (%d graphs)" % (csv_path, len(graphs)))


@main.command()
@_shared_options
@click.option("--costs", "costs_path", type=click.Path(), default=None,
              help="Learned cost matrix to analyze against the descriptors.")
@click.option("--cost-components", type=int, default=7,
              help="Components to keep from the cost matrix (default 7).")
@click.option("--permutations", type=int, default=999,
              help="Permutation count for the significance test.")
@_exit_codes
def stats(costs_path, cost_components, permutations, **kwargs):
    """Descriptor PCA, cost-matrix PCA, and the CCA linking the two."""
    config = _resolve(**kwargs)
    if config.descriptors is None or not os.path.isfile(config.descriptors):
        raise ConfigError("stats needs an existing descriptor table")
    os.makedirs(config.out_dir, exist_ok=True)
    table = parse_descriptor_csv(config.descriptors)
    desc_pca = pca(table.values, k=config.attr_components, standardize=True,
                   column_names=table.column_names)
    paths = write_pca_report(os.path.join(config.out_dir, "descriptor_pca"),
                             desc_pca, variable_names=table.column_names)
    click.echo("wrote %s" % paths["explained"])
    if costs_path is None:
        return
    costs = read_cost_matrix(costs_path)
    cost_pca = components_of_cost_matrix(costs, k=cost_components)
    paths = write_pca_report(os.path.join(config.out_dir, "cost_pca"),
                             cost_pca, variable_names=list(costs.alphabet))
    click.echo("wrote %s" % paths["explained"])
    result = cca(desc_pca.scores, cost_pca.scores)
    pvalues = permutation_pvalues(desc_pca.scores, cost_pca.scores,
                                  n_permutations=permutations,
                                  seed=derive_seed(config.seed, "cca-permutation"))
    paths = write_cca_report(os.path.join(config.out_dir, "cca"), result,
                             x_names=["descriptor_pc%d" % (i + 1)
                                      for i in range(desc_pca.scores.shape[1])],
                             y_names=["cost_pc%d" % (i + 1)
                                      for i in range(cost_pca.scores.shape[1])],
                             pvalues=pvalues)
    click.echo("wrote %s (r = %s)"
               % (paths["correlations"],
                  ", ".join("%.4f" % r for r in result.correlations)))


@main.command()
@_shared_options
@click.option("--with-shuffle-control", is_flag=True, default=False,
              help="Also run the permuted-training-labels control.")
@click.option("--replay", "replay_manifest", type=click.Path(), default=None,
              help="Replay a previous run from its manifest instead.")
@_exit_codes
def experiment(with_shuffle_control, replay_manifest, **kwargs):
    """Run the configured experiment end-to-end and write its report."""
    if replay_manifest is not None:
        out_dir = kwargs.get("out_dir")
        if out_dir is None:
            raise ConfigError("--replay needs --out for the new run")
        result = replay_experiment(replay_manifest, out_dir)
        click.echo("replayed into %s" % result.report_path)
        return
    config = _resolve(**kwargs)
    result = run_experiment(config)
    click.echo("wrote %s" % result.report_path)
    row = result.rows[0]
    click.echo("test: %s/%s insoluble, %s/%s soluble, global rate %s"
               % (row["errors_insoluble"], row["n_insoluble"],
                  row["errors_soluble"], row["n_soluble"], row["rate_global"]))
    if with_shuffle_control:
        control = label_shuffle_control(config)
        click.echo("wrote %s" % control["report_path"])


@main.command()
@_shared_options
@_exit_codes
def baseline(**kwargs):
    """Length-threshold baseline classifier on the configured split."""
    config = _resolve(**kwargs)
    result = run_baseline(config)
    test = result.test_report
    click.echo("threshold: %d residues" % result.threshold)
    click.echo("test errors: %d/%d insoluble, %d/%d soluble, global rate %.4f"
               % (test.errors_neg, test.total_neg, test.errors_pos,
                  test.total_pos, test.global_rate))


if __name__ == "__main__":
    main()
