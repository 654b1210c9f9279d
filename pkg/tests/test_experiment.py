"""End-to-end experiment driver: config, pipeline, replay, baseline."""

import csv
import hashlib
import json

import numpy as np
import pytest

from foldrep.errors import ConfigError, DataError
from foldrep.experiment import (
    GRAPH_REPRESENTATIONS,
    REPRESENTATIONS,
    ExperimentConfig,
    baseline_length_classifier,
    derive_seed,
    graph_spectrum,
    label_shuffle_control,
    load_config,
    replay_experiment,
    run_baseline,
    run_experiment,
    spectral_distance,
    validate_inputs,
)

from conftest import make_graph
from oracles import threshold_scan


class TestDerivedSeeds:
    def test_matches_the_documented_derivation(self):
        digest = hashlib.sha256(b"7\x00split").digest()
        expected = int.from_bytes(digest[:8], "little") & (2 ** 63 - 1)
        assert derive_seed(7, "split") == expected

    def test_stable_and_distinct_across_stages(self):
        labels = ["split", "control", "ga", "ambiguity", "label-shuffle"]
        seeds = [derive_seed(0, lab) for lab in labels]
        assert len(set(seeds)) == len(labels)
        assert seeds == [derive_seed(0, lab) for lab in labels]
        assert all(0 <= s < 2 ** 63 for s in seeds)

    def test_root_changes_every_stage_seed(self):
        assert derive_seed(1, "split") != derive_seed(2, "split")


class TestConfig:
    def base_kwargs(self):
        return {"solubility": "s.csv", "fasta": "f.fasta"}

    def test_defaults(self):
        config = ExperimentConfig(**self.base_kwargs())
        assert config.representation == "seq"
        assert config.train_fraction == 0.7
        assert config.ga.population_size == 50

    def test_unknown_representation(self):
        with pytest.raises(ConfigError, match="representation"):
            ExperimentConfig(representation="bogus", **self.base_kwargs())

    def test_split_options_are_exclusive(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(train_fraction=0.5,
                             train_counts={"soluble": 2, "insoluble": 2},
                             **self.base_kwargs())

    def test_train_counts_classes_are_checked(self):
        with pytest.raises(ConfigError, match="unknown classes"):
            ExperimentConfig(train_counts={"wat": 3}, **self.base_kwargs())

    def test_positive_parameters(self):
        for name in ("svm_c", "indel_cost", "vector_scale", "gaussian_sigma"):
            with pytest.raises(ConfigError, match=name):
                ExperimentConfig(**self.base_kwargs(), **{name: 0.0})

    def test_ga_options_from_mapping(self):
        config = ExperimentConfig(ga={"population_size": 8, "genome_length": 16},
                                  **self.base_kwargs())
        assert config.ga.population_size == 8
        with pytest.raises(ConfigError, match="ga"):
            ExperimentConfig(ga={"not_a_field": 1}, **self.base_kwargs())

    def test_load_toml(self, tmp_path):
        path = tmp_path / "exp.toml"
        path.write_text(
            'solubility = "s.csv"\nfasta = "f.fasta"\n'
            'representation = "seq-pam"\nsvm_c = 4.0\n'
            '[ga]\npopulation_size = 10\ngenome_length = 16\n')
        config = load_config(path)
        assert config.representation == "seq-pam"
        assert config.svm_c == 4.0
        assert config.ga.population_size == 10

    def test_load_json(self, tmp_path):
        path = tmp_path / "exp.json"
        path.write_text(json.dumps({
            "solubility": "s.csv", "fasta": "f.fasta", "seed": 3}))
        assert load_config(path).seed == 3

    def test_unknown_keys_are_rejected(self, tmp_path):
        path = tmp_path / "exp.toml"
        path.write_text('solubility = "s.csv"\nfasta = "f.fasta"\ntypo = 1\n')
        with pytest.raises(ConfigError, match="typo"):
            load_config(path)

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "exp.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_validate_inputs_checks_files(self, tmp_path, corpus):
        config = ExperimentConfig(solubility=str(tmp_path / "nope.csv"),
                                  fasta=str(corpus["fasta"]))
        with pytest.raises(ConfigError, match="solubility"):
            validate_inputs(config)
        for rep in GRAPH_REPRESENTATIONS:
            config = ExperimentConfig(solubility=str(corpus["solubility"]),
                                      fasta=str(corpus["fasta"]),
                                      representation=rep)
            with pytest.raises(ConfigError, match="pdb_dir"):
                validate_inputs(config)


class TestSpectra:
    def test_complete_graph_spectrum(self):
        n = 5
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
        spectrum = graph_spectrum(make_graph(n, edges))
        expected = np.array([1.0] + [-1.0 / (n - 1)] * (n - 1))
        assert np.allclose(spectrum, expected, atol=1e-12)

    def test_distance_pads_shorter_spectra(self):
        a = np.array([1.0, 0.5])
        b = np.array([1.0, 0.5, 0.25])
        assert spectral_distance(a, b) == pytest.approx(0.25)
        assert spectral_distance(a, a) == 0.0


def seq_config(corpus, tmp_path, **overrides):
    kwargs = {
        "solubility": str(corpus["solubility"]),
        "fasta": str(corpus["fasta"]),
        "representation": "seq",
        "train_fraction": 0.5,
        "seed": 11,
        "out_dir": str(tmp_path / "out"),
    }
    kwargs.update(overrides)
    return ExperimentConfig(**kwargs)


class TestRunExperiment:
    def test_writes_report_manifest_and_model(self, corpus, tmp_path):
        result = run_experiment(seq_config(corpus, tmp_path))
        with open(result.report_path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1
        row = rows[0]
        assert row["representation"] == "seq"
        assert int(row["n_train"]) + int(row["n_test"]) == 16
        assert 0.0 <= float(row["rate_global"]) <= 1.0
        total = int(row["errors_soluble"]) + int(row["errors_insoluble"])
        assert int(row["errors_global"]) == total

        manifest = json.loads(open(result.manifest_path).read())
        assert manifest["seeds"]["root"] == 11
        assert manifest["seeds"]["split"] == derive_seed(11, "split")
        assert set(manifest["split"]["train"]) | set(manifest["split"]["test"])
        assert all(len(h) == 64 for h in manifest["inputs"].values())
        assert "package" in manifest["versions"]
        assert (tmp_path / "out" / "model.json").is_file()

    def test_stage_errors_name_the_stage(self, corpus, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("protein_id,solubility\np1,oops\n")
        config = seq_config(corpus, tmp_path, solubility=str(bad))
        with pytest.raises(DataError, match="stage load:"):
            run_experiment(config)


class TestReplay:
    def test_replay_is_byte_identical(self, corpus, tmp_path):
        first = run_experiment(seq_config(corpus, tmp_path))
        replay_dir = tmp_path / "replay"
        second = replay_experiment(first.manifest_path, replay_dir)
        original = open(first.report_path, "rb").read()
        replayed = open(second.report_path, "rb").read()
        assert original == replayed
        first_model = open(tmp_path / "out" / "model.json", "rb").read()
        second_model = open(replay_dir / "model.json", "rb").read()
        assert first_model == second_model

    def test_replay_detects_changed_inputs(self, corpus, tmp_path):
        solubility = tmp_path / "sol.csv"
        solubility.write_text(open(corpus["solubility"]).read())
        config = seq_config(corpus, tmp_path, solubility=str(solubility))
        result = run_experiment(config)
        with open(solubility, "a") as fh:
            fh.write("extra,1.0\n")
        with pytest.raises(DataError, match="changed"):
            replay_experiment(result.manifest_path, tmp_path / "replay")

    def test_replay_detects_missing_inputs(self, corpus, tmp_path):
        solubility = tmp_path / "sol.csv"
        solubility.write_text(open(corpus["solubility"]).read())
        config = seq_config(corpus, tmp_path, solubility=str(solubility))
        result = run_experiment(config)
        solubility.unlink()
        with pytest.raises(DataError, match="missing"):
            replay_experiment(result.manifest_path, tmp_path / "replay")

    def test_replay_rejects_malformed_manifest(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text("{broken")
        with pytest.raises(DataError):
            replay_experiment(path, tmp_path / "out")
        path.write_text("{}")
        with pytest.raises(DataError, match="manifest missing"):
            replay_experiment(path, tmp_path / "out")


class TestShuffleControl:
    def test_control_rows(self, corpus, tmp_path):
        config = seq_config(corpus, tmp_path)
        result = label_shuffle_control(config)
        assert [r["representation"] for r in result["rows"]] == \
            ["seq", "seq+shuffled-labels"]
        with open(result["report_path"], newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2
        for row in rows:
            assert 0.0 <= float(row["rate_global"]) <= 1.0


class TestBaseline:
    def test_matches_exhaustive_threshold_scan(self):
        rng = np.random.default_rng(1123)
        for _ in range(30):
            n = int(rng.integers(6, 40))
            lengths = rng.integers(5, 60, size=n)
            labels = rng.choice([-1.0, 1.0], size=n)
            if len(set(labels.tolist())) < 2:
                labels[0] = -labels[0]
            pairs = list(zip(lengths.tolist(), labels.tolist()))
            result = baseline_length_classifier(pairs, pairs)
            best_errors, optimal = threshold_scan(pairs)
            assert result.train_report.global_errors == best_errors
            assert result.threshold in optimal

    def test_planted_length_rule_is_found(self):
        train = [(l, 1.0) for l in (100, 150, 245)] + \
            [(l, -1.0) for l in (246, 300, 400)]
        test = [(120, 1.0), (245, 1.0), (246, -1.0), (500, -1.0)]
        result = baseline_length_classifier(train, test)
        assert result.threshold == 246
        assert result.train_report.global_errors == 0
        assert result.test_report.global_errors == 0

    def test_validation(self):
        good = [(10, 1.0), (20, -1.0)]
        with pytest.raises(DataError):
            baseline_length_classifier([], good)
        with pytest.raises(DataError, match="-1 or \\+1"):
            baseline_length_classifier([(10, 0.5), (20, -1.0)], good)
        with pytest.raises(DataError, match="single class"):
            baseline_length_classifier([(10, 1.0), (20, 1.0)], good)

    def test_run_baseline_writes_report(self, corpus, tmp_path):
        config = seq_config(corpus, tmp_path)
        result = run_baseline(config)
        assert result.test_report.total_pos + result.test_report.total_neg > 0
        with open(tmp_path / "out" / "baseline_report.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1
        assert int(rows[0]["threshold"]) == result.threshold


class TestRepresentationCoverage:
    @pytest.mark.parametrize("rep", [r for r in REPRESENTATIONS
                                     if r != "seq-learned"])
    def test_each_representation_runs(self, rep, corpus, tmp_path):
        kwargs = {}
        if rep in GRAPH_REPRESENTATIONS:
            kwargs = {"pdb_dir": str(corpus["pdb_dir"]),
                      "descriptors": str(corpus["descriptors"])}
        config = seq_config(corpus, tmp_path, representation=rep, **kwargs)
        result = run_experiment(config)
        assert result.rows[0]["representation"] == rep
        if rep == "graph-direct":
            assert "spectrum" in result.rows[0]["note"]

    def test_learned_costs_artifacts(self, corpus, tmp_path):
        config = seq_config(
            corpus, tmp_path, representation="seq-learned",
            ga={"population_size": 6, "genome_length": 400,
                "max_generations": 2, "stagnation_window": 2, "seed": 5})
        result = run_experiment(config)
        out = tmp_path / "out"
        assert (out / "learned_costs.txt").is_file()
        trace = json.loads((out / "ga_trace.json").read_text())
        assert len(trace["trace"]) == trace["generations"]
        assert (out / "ga_checkpoints" / "gen_0001.json").is_file()
        assert result.rows[0]["representation"] == "seq-learned"
