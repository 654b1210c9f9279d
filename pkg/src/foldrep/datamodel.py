"""Protein corpus ingestion and dataset assembly.

Raw inputs are a solubility table (CSV), sequences (FASTA), per-protein
alpha-carbon coordinates (PDB), and a table of chemico-physical descriptors
per amino acid. Solubilities are normalized to [0, 1] by the corpus maximum
and labeled by closed intervals: [0, 0.3] insoluble, [0.7, 1] soluble,
anything between is excluded from classification.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DataError
from .seqdist import AMINO_ACIDS

log = logging.getLogger(__name__)

#: Closed upper bound of the insoluble band (normalized solubility).
INSOLUBLE_MAX = 0.3
#: Closed lower bound of the soluble band (normalized solubility).
SOLUBLE_MIN = 0.7


class Label(str, Enum):
    SOLUBLE = "soluble"
    INSOLUBLE = "insoluble"
    EXCLUDED = "excluded"


def label_for(solubility: float) -> Label:
    """Class label for a normalized solubility value (closed boundaries)."""
    if not 0.0 <= solubility <= 1.0:
        raise DataError("normalized solubility %r outside [0, 1]" % solubility)
    if solubility <= INSOLUBLE_MAX:
        return Label.INSOLUBLE
    if solubility >= SOLUBLE_MIN:
        return Label.SOLUBLE
    return Label.EXCLUDED


@dataclass(frozen=True)
class SolubilityRecord:
    protein_id: str
    solubility: float  # normalized to [0, 1]

    @property
    def label(self) -> Label:
        return label_for(self.solubility)


@dataclass(frozen=True)
class ResidueSequence:
    """A protein as a string over the canonical amino-acid alphabet."""

    protein_id: str
    residues: str

    def __post_init__(self):
        if not self.residues:
            raise DataError("%s: empty residue sequence" % self.protein_id)
        bad = set(self.residues) - set(AMINO_ACIDS)
        if bad:
            raise DataError(
                "%s: non-standard residue codes %s"
                % (self.protein_id, "".join(sorted(bad)))
            )

    def __len__(self) -> int:
        return len(self.residues)


@dataclass(frozen=True)
class CoordinateSet:
    """One 3-d alpha-carbon position per residue, in chain order."""

    protein_id: str
    positions: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.positions, dtype=np.float64)
        if p.ndim != 2 or p.shape[1] != 3 or p.shape[0] == 0:
            raise DataError("%s: positions must be a non-empty (n, 3) array"
                            % self.protein_id)
        if not np.all(np.isfinite(p)):
            raise DataError("%s: non-finite coordinates" % self.protein_id)
        object.__setattr__(self, "positions", p)

    def __len__(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class VectorSequence:
    """A protein as an ordered sequence of real vectors."""

    protein_id: str
    elements: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        e = np.asarray(self.elements, dtype=np.float64)
        if e.ndim != 2 or e.shape[0] == 0:
            raise DataError("%s: elements must be a non-empty 2-d array"
                            % self.protein_id)
        object.__setattr__(self, "elements", e)

    def __len__(self) -> int:
        return self.elements.shape[0]


@dataclass(frozen=True)
class ChemPhysTable:
    """Chemico-physical descriptor values per amino acid.

    Rows follow the canonical alphabet order; columns are descriptors.
    """

    values: np.ndarray
    column_names: tuple = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != len(AMINO_ACIDS):
            raise DataError("descriptor table must have one row per amino acid")
        if v.shape[1] < 3:
            raise DataError("descriptor table needs at least 3 columns")
        if not np.all(np.isfinite(v)):
            raise DataError("descriptor table has missing or non-finite values")
        if self.column_names and len(self.column_names) != v.shape[1]:
            raise DataError("descriptor column names do not match column count")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "column_names", tuple(self.column_names))


def parse_solubility_csv(path) -> list[tuple[str, float]]:
    """Read raw (protein_id, solubility) pairs from a two-column CSV."""
    pairs: list[tuple[str, float]] = []
    seen: set[str] = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["protein_id", "solubility"]:
            raise DataError("%s: expected header 'protein_id,solubility'" % path)
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise DataError("%s:%d: expected 2 fields" % (path, lineno))
            pid = row[0].strip()
            if not pid:
                raise DataError("%s:%d: empty protein id" % (path, lineno))
            if pid in seen:
                raise DataError("%s:%d: duplicate protein id %r" % (path, lineno, pid))
            try:
                value = float(row[1])
            except ValueError:
                raise DataError("%s:%d: malformed solubility value %r"
                                % (path, lineno, row[1])) from None
            seen.add(pid)
            pairs.append((pid, value))
    return pairs


def write_solubility_csv(path, pairs) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["protein_id", "solubility"])
        for pid, value in pairs:
            writer.writerow([pid, "%.17g" % value])


def normalize_solubility(pairs) -> list[SolubilityRecord]:
    """Normalize raw solubility readings by the corpus maximum.

    Requires every value to be non-negative and at least one to be strictly
    positive.
    """
    pairs = list(pairs)
    for pid, value in pairs:
        if value < 0:
            raise DataError("%s: negative solubility %r" % (pid, value))
    top = max((value for _, value in pairs), default=0.0)
    if top <= 0.0:
        raise DataError("degenerate solubility table: no positive values")
    return [SolubilityRecord(pid, value / top) for pid, value in pairs]


def parse_fasta(path, nonstandard: dict | None = None) -> list[ResidueSequence]:
    """Read sequences from FASTA.

    Residues outside the canonical alphabet drop the whole protein with a
    logged warning unless ``nonstandard`` maps them onto canonical codes.
    """
    raw: list[tuple[str, list[str]]] = []
    with open(path) as fh:
        current: list[str] | None = None
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith(">"):
                pid = line[1:].split()[0] if line[1:].split() else ""
                if not pid:
                    raise DataError("%s:%d: missing sequence id" % (path, lineno))
                current = []
                raw.append((pid, current))
            else:
                if current is None:
                    raise DataError("%s:%d: sequence data before a '>' header"
                                    % (path, lineno))
                current.append(line.upper())
    mapping = nonstandard or {}
    out: list[ResidueSequence] = []
    seen: set[str] = set()
    for pid, chunks in raw:
        if pid in seen:
            raise DataError("%s: duplicate sequence id %r" % (path, pid))
        seen.add(pid)
        residues = "".join(chunks)
        if not residues:
            log.warning("%s: dropped (empty sequence)", pid)
            continue
        mapped = []
        bad = None
        for ch in residues:
            if ch in AMINO_ACIDS:
                mapped.append(ch)
                continue
            sub = mapping.get(ch)
            if sub is None or sub not in AMINO_ACIDS:
                bad = ch
                break
            mapped.append(sub)
        if bad is not None:
            log.warning("%s: dropped (non-standard residue code %r)", pid, bad)
            continue
        out.append(ResidueSequence(pid, "".join(mapped)))
    return out


def write_fasta(path, sequences, width: int = 60) -> None:
    with open(path, "w") as fh:
        for seq in sequences:
            fh.write(">%s\n" % seq.protein_id)
            for start in range(0, len(seq.residues), width):
                fh.write(seq.residues[start:start + width] + "\n")


def parse_pdb_ca(path, protein_id: str | None = None) -> CoordinateSet:
    """Extract one alpha-carbon position per residue from a PDB file.

    Fixed-column parsing of ATOM records in the first model only. When a
    residue carries several CA entries, the lexicographically first
    alternate-location indicator wins. A residue with atoms but no CA is an
    error.
    """
    order: list[tuple] = []
    ca_by_residue: dict[tuple, dict[str, tuple]] = {}
    has_atoms: dict[tuple, bool] = {}
    in_first_model = True
    models_seen = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            rec = line[:6]
            if rec.startswith("MODEL"):
                models_seen += 1
                if models_seen > 1:
                    break
                continue
            if rec.startswith("ENDMDL"):
                in_first_model = False
                break
            if rec != "ATOM  " or not in_first_model:
                continue
            name = line[12:16].strip()
            altloc = line[16:17]
            chain = line[21:22]
            resseq = line[22:26]
            icode = line[26:27]
            key = (chain, resseq, icode)
            if key not in has_atoms:
                has_atoms[key] = True
                order.append(key)
            if name != "CA":
                continue
            try:
                xyz = (float(line[30:38]), float(line[38:46]), float(line[46:54]))
            except (ValueError, IndexError):
                raise DataError("%s:%d: malformed coordinate field"
                                % (path, lineno)) from None
            ca_by_residue.setdefault(key, {})
            if altloc not in ca_by_residue[key]:
                ca_by_residue[key][altloc] = xyz
    if not order:
        raise DataError("%s: no CA atoms found" % path)
    positions = []
    for index, key in enumerate(order, start=1):
        cas = ca_by_residue.get(key)
        if not cas:
            raise DataError(
                "%s: residue %d (chain %r seq %s) has no CA atom"
                % (path, index, key[0], key[1].strip())
            )
        positions.append(cas[min(cas)])
    pid = protein_id if protein_id is not None else str(path)
    return CoordinateSet(pid, np.array(positions, dtype=np.float64))


def parse_descriptor_csv(path) -> ChemPhysTable:
    """Read the amino-acid descriptor table.

    The first column must carry the one-letter codes in canonical order;
    an optional header row names the descriptor columns.
    """
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if any(cell.strip() for cell in row)]
    if not rows:
        raise DataError("%s: empty descriptor table" % path)
    names: tuple = ()
    first = rows[0][0].strip()
    if first not in AMINO_ACIDS:
        names = tuple(cell.strip() for cell in rows[0][1:])
        rows = rows[1:]
    if len(rows) != len(AMINO_ACIDS):
        raise DataError("%s: expected %d amino-acid rows, found %d"
                        % (path, len(AMINO_ACIDS), len(rows)))
    values = []
    for i, row in enumerate(rows):
        aa = row[0].strip()
        if aa != AMINO_ACIDS[i]:
            raise DataError(
                "%s: row %d should start with %r (canonical order), found %r"
                % (path, i + 1, AMINO_ACIDS[i], aa)
            )
        cells = row[1:]
        try:
            values.append([float(c) for c in cells])
        except ValueError:
            raise DataError("%s: row %d has a malformed or missing value"
                            % (path, i + 1)) from None
    widths = {len(v) for v in values}
    if len(widths) != 1:
        raise DataError("%s: ragged descriptor rows" % path)
    return ChemPhysTable(np.array(values, dtype=np.float64), names)


def chemphys_components(table: ChemPhysTable, k: int = 3):
    """Project amino acids onto the top principal components of their
    standardized descriptors.

    Returns the (20, k) component scores and the explained-variance
    fractions of the retained components.
    """
    from .stats import pca

    names = table.column_names or None
    result = pca(table.values, k=k, standardize=True, column_names=names)
    return result.scores, result.explained_fraction


def sequence_scores(sequence: ResidueSequence, scores: np.ndarray) -> np.ndarray:
    """Per-residue attribute rows for a sequence, looked up by amino acid."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[0] != len(AMINO_ACIDS):
        raise DataError("scores must have one row per amino acid")
    idx = np.array([AMINO_ACIDS.index(ch) for ch in sequence.residues])
    return scores[idx]


@dataclass
class SeqDataset:
    ids: list[str]
    sequences: list[ResidueSequence]
    labels: list[Label]

    def __len__(self) -> int:
        return len(self.ids)


@dataclass
class GraphDataset:
    ids: list[str]
    graphs: list
    labels: list[Label]

    def __len__(self) -> int:
        return len(self.ids)


@dataclass
class SeriatedDataset:
    ids: list[str]
    sequences: list[VectorSequence]
    labels: list[Label]

    def __len__(self) -> int:
        return len(self.ids)


@dataclass
class DatasetBundle:
    """The four dataset views assembled from one corpus.

    ``sequences`` holds every labeled sequence; ``graphs`` and ``seriated``
    cover the subset with usable coordinates; ``graph_sequences`` restricts
    the sequence view to that same subset.
    """

    sequences: SeqDataset
    graphs: GraphDataset
    seriated: SeriatedDataset
    graph_sequences: SeqDataset


def assemble_datasets(records, sequences, coordinates=None, component_scores=None,
                      r_min: float = 4.0, r_max: float = 8.0) -> DatasetBundle:
    """Assemble the dataset views from parsed inputs.

    ``coordinates`` maps protein ids to :class:`CoordinateSet`;
    ``component_scores`` is the (20, k) amino-acid component matrix used as
    graph vertex attributes. Proteins are warned about and excluded when a
    coordinate set has no sequence, no usable label, or a length mismatch.
    """
    from .graphcore import build_contact_graph, seriate

    seq_by_id = {s.protein_id: s for s in sequences}
    coordinates = dict(coordinates or {})
    seq_ids, seq_list, seq_labels = [], [], []
    for record in records:
        if record.label is Label.EXCLUDED:
            continue
        seq = seq_by_id.get(record.protein_id)
        if seq is None:
            log.warning("%s: labeled but has no sequence; excluded",
                        record.protein_id)
            continue
        seq_ids.append(record.protein_id)
        seq_list.append(seq)
        seq_labels.append(record.label)
    labeled = set(seq_ids)
    for pid in coordinates:
        if pid not in seq_by_id:
            log.warning("%s: coordinates without a sequence; excluded", pid)
    graph_ids, graph_list, graph_labels = [], [], []
    vec_list = []
    if coordinates and component_scores is not None:
        for pid, seq, lab in zip(seq_ids, seq_list, seq_labels):
            coords = coordinates.get(pid)
            if coords is None:
                continue
            if len(coords) != len(seq):
                log.warning("%s: %d coordinates for %d residues; excluded "
                            "from graph datasets", pid, len(coords), len(seq))
                continue
            attrs = sequence_scores(seq, component_scores)
            graph = build_contact_graph(coords.positions, attrs,
                                        r_min=r_min, r_max=r_max, protein_id=pid)
            graph_ids.append(pid)
            graph_list.append(graph)
            graph_labels.append(lab)
            vec_list.append(seriate(graph))
    keep = set(graph_ids)
    restricted = [i for i, pid in enumerate(seq_ids) if pid in keep]
    return DatasetBundle(
        sequences=SeqDataset(seq_ids, seq_list, seq_labels),
        graphs=GraphDataset(graph_ids, graph_list, graph_labels),
        seriated=SeriatedDataset(graph_ids, vec_list, graph_labels),
        graph_sequences=SeqDataset(
            [seq_ids[i] for i in restricted],
            [seq_list[i] for i in restricted],
            [seq_labels[i] for i in restricted],
        ),
    )


@dataclass(frozen=True)
class DatasetSplit:
    train_ids: tuple
    test_ids: tuple
    seed: int

    def __post_init__(self):
        overlap = set(self.train_ids) & set(self.test_ids)
        if overlap:
            raise DataError("split leaks ids across train/test: %s"
                            % sorted(overlap)[:5])


def split_dataset(ids, labels, train_fraction: float | None = None,
                  train_counts: dict | None = None, seed: int = 0) -> DatasetSplit:
    """Stratified, seed-deterministic train/test split.

    Either a per-class training fraction or explicit per-class training
    counts (keyed by :class:`Label` or its value) must be given.
    """
    if (train_fraction is None) == (train_counts is None):
        raise DataError("give exactly one of train_fraction or train_counts")
    if train_fraction is not None and not 0.0 < train_fraction < 1.0:
        raise DataError("train_fraction must lie strictly between 0 and 1")
    ids = list(ids)
    labels = list(labels)
    if len(ids) != len(labels):
        raise DataError("ids and labels differ in length")
    by_class: dict = {}
    for pid, lab in zip(ids, labels):
        by_class.setdefault(Label(lab), []).append(pid)
    rng = np.random.default_rng(seed)
    train: list[str] = []
    test: list[str] = []
    for lab in sorted(by_class, key=lambda l: l.value):
        group = sorted(by_class[lab])
        perm = rng.permutation(len(group))
        if train_counts is not None:
            wanted = train_counts.get(lab, train_counts.get(lab.value))
            if wanted is None:
                raise DataError("train_counts missing class %r" % lab.value)
            n_train = int(wanted)
        else:
            n_train = int(round(train_fraction * len(group)))
        if not 0 < n_train < len(group):
            raise DataError(
                "class %r: training count %d infeasible for group of %d"
                % (lab.value, n_train, len(group))
            )
        chosen = [group[i] for i in perm]
        train.extend(chosen[:n_train])
        test.extend(chosen[n_train:])
    return DatasetSplit(tuple(train), tuple(test), seed)


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_dataset_manifest(path, ids, labels, split: DatasetSplit,
                           provenance: dict) -> dict:
    """Emit the dataset manifest JSON: ids, labels, split membership, and
    provenance hashes of the raw inputs."""
    manifest = {
        "ids": list(ids),
        "labels": {pid: Label(lab).value for pid, lab in zip(ids, labels)},
        "split": {
            "train": list(split.train_ids),
            "test": list(split.test_ids),
            "seed": split.seed,
        },
        "provenance": dict(provenance),
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
