"""Shared fixtures: synthetic graphs and a small on-disk protein corpus."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from foldrep.graphcore import LabeledGraph

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"


def make_graph(n, edges, attr_dim=1, rng=None):
    """LabeledGraph over n vertices with the given (i, j[, w]) edges."""
    if rng is None:
        attrs = np.zeros((n, attr_dim))
    else:
        attrs = rng.normal(size=(n, attr_dim))
    norm = []
    for edge in edges:
        i, j = edge[0], edge[1]
        w = edge[2] if len(edge) > 2 else 1.0
        norm.append((int(i), int(j), float(w)))
    return LabeledGraph(vertex_attrs=attrs, edges=norm)


def random_connected_graph(rng, n, weighted=False, extra_edge_prob=0.25):
    """Random spanning tree plus extra edges; optional untied random weights."""
    edges = set()
    order = rng.permutation(n)
    for k in range(1, n):
        a = int(order[k])
        b = int(order[int(rng.integers(0, k))])
        edges.add((min(a, b), max(a, b)))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < extra_edge_prob:
                edges.add((i, j))
    out = []
    for i, j in sorted(edges):
        w = float(rng.uniform(0.5, 2.0)) if weighted else 1.0
        out.append((i, j, w))
    return make_graph(n, out)


def write_corpus(root, n_proteins=16, seed=9, length_range=(12, 20),
                 planted_length_split=None):
    """Write a small solubility corpus (CSV, FASTA, PDB, descriptors).

    Classes alternate; soluble sequences are biased toward one residue
    triple and insoluble ones toward another, so even a unit-cost edit
    distance separates most of the corpus. When ``planted_length_split`` is
    an integer L, soluble proteins are strictly shorter than L and
    insoluble ones at least L. Returns a dict of file paths.
    """
    root.mkdir(parents=True, exist_ok=True)
    pdb_dir = root / "pdb"
    pdb_dir.mkdir(exist_ok=True)
    rng = np.random.default_rng(seed)
    rows, fasta = [], []
    for k in range(n_proteins):
        cls = 1 if k % 2 == 0 else -1
        pid = "P%03d" % k
        degree = rng.uniform(0.75, 1.0) if cls > 0 else rng.uniform(0.0, 0.25)
        rows.append("%s,%.4f" % (pid, degree))
        length = int(rng.integers(*length_range))
        if planted_length_split is not None:
            if cls > 0:
                length = int(rng.integers(length_range[0], planted_length_split))
            else:
                length = int(rng.integers(planted_length_split, length_range[1]))
        bias = "ADE" if cls > 0 else "KRL"
        seq = "".join(rng.choice(list(bias * 5 + AMINO_ACIDS), size=length))
        fasta.append(">%s\n%s" % (pid, seq))
        with open(pdb_dir / ("%s.pdb" % pid), "w") as fh:
            for i in range(length):
                x = 4.8 * i
                y = 3.0 * (i % 2) + 0.3 * rng.random()
                z = 1.5 * ((i // 2) % 2)
                fh.write(
                    "ATOM  %5d  CA  ALA A%4d    %8.3f%8.3f%8.3f"
                    "  1.00  0.00           C\n" % (i + 1, i + 1, x, y, z))
            fh.write("END\n")
    (root / "solubility.csv").write_text(
        "protein_id,solubility\n" + "\n".join(rows) + "\n")
    (root / "sequences.fasta").write_text("\n".join(fasta) + "\n")
    desc = rng.random((20, 5))
    lines = ["aa,hydropathy,volume,charge,polarity,flexibility"]
    for i, aa in enumerate(AMINO_ACIDS):
        lines.append(aa + "," + ",".join("%.6f" % v for v in desc[i]))
    (root / "descriptors.csv").write_text("\n".join(lines) + "\n")
    return {
        "solubility": str(root / "solubility.csv"),
        "fasta": str(root / "sequences.fasta"),
        "pdb_dir": str(pdb_dir),
        "descriptors": str(root / "descriptors.csv"),
    }


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    """Session-wide synthetic corpus; treat the files as read-only."""
    return write_corpus(tmp_path_factory.mktemp("corpus"))
