"""CSV/JSON persistence for genomes, pedigrees and phylogenies.

All CSVs are comma-separated UTF-8 with a mandatory header row and LF line
endings.
"""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DataError
from .island import PedigreeRecord
from .surface import SurfaceAnnotation, alleles_from_sites, pack_annotation, unpack_annotation
from .trie import PhylogenyTable

GENOME_COLUMNS = ("pe_x", "pe_y", "slot", "fitness", "depth", "annotation_hex", "lineage_id")
PEDIGREE_COLUMNS = ("child_id", "parent_id", "birth_generation", "pe_x", "pe_y")
PHYLOGENY_COLUMNS = ("id", "ancestor_list", "origin_time", "taxon_label")


@dataclass(frozen=True)
class GenomeRow:
    pe_x: int
    pe_y: int
    slot: int
    fitness: float
    depth: int
    annotation_hex: str
    lineage_id: int

    @property
    def label(self) -> str:
        return f"{self.pe_x}_{self.pe_y}_{self.slot}"

    def annotation(self, surface) -> SurfaceAnnotation:
        return SurfaceAnnotation.from_bytes(
            bytes.fromhex(self.annotation_hex),
            surface.policy,
            surface.num_sites,
            surface.differentia_width,
        )

    def alleles(self, surface):
        sites, depth = unpack_annotation(
            bytes.fromhex(self.annotation_hex), surface.num_sites, surface.differentia_width
        )
        if depth != self.depth:
            raise DataError(f"row {self.label}: depth column disagrees with annotation")
        return alleles_from_sites(surface.policy, surface.num_sites, depth, sites)


def genome_rows(samples) -> list[GenomeRow]:
    """Rows from ``(PeState, slots)`` pairs as produced by ``sample_slots_per_pe``."""
    rows = []
    for pe, slots in samples:
        width = pe.surface.differentia_width
        x, y = pe.coordinate
        for s in slots:
            rows.append(
                GenomeRow(
                    x,
                    y,
                    int(s),
                    float(pe.fitness[s]),
                    int(pe.depth[s]),
                    pack_annotation(pe.sites[s].tolist(), width, int(pe.depth[s])).hex(),
                    int(pe.lineage[s]),
                )
            )
    return rows


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_genomes(path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(GENOME_COLUMNS)
        for r in rows:
            w.writerow(
                (r.pe_x, r.pe_y, r.slot, repr(r.fitness), r.depth, r.annotation_hex, r.lineage_id)
            )


def _read_rows(path, columns):
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        if tuple(header) != columns:
            raise DataError(f"{path}: expected header {','.join(columns)}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(columns):
                raise DataError(f"{path}:{lineno}: expected {len(columns)} fields")
            yield lineno, row


def read_genomes(path) -> list[GenomeRow]:
    rows = []
    for lineno, r in _read_rows(path, GENOME_COLUMNS):
        try:
            rows.append(
                GenomeRow(
                    int(r[0]), int(r[1]), int(r[2]), float(r[3]), int(r[4]),
                    bytes.fromhex(r[5]).hex(), int(r[6]),
                )
            )
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from None
    return rows


def write_pedigree(path, records) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(PEDIGREE_COLUMNS)
        for r in records:
            w.writerow((r.child_id, r.parent_id, r.birth_generation, *r.pe_coordinate))


def read_pedigree(path) -> list[PedigreeRecord]:
    out = []
    for lineno, r in _read_rows(path, PEDIGREE_COLUMNS):
        try:
            out.append(PedigreeRecord(int(r[0]), int(r[1]), int(r[2]), (int(r[3]), int(r[4]))))
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from None
    return out


def _format_time(t) -> str:
    t = t.item() if isinstance(t, np.generic) else t
    if isinstance(t, float) and t.is_integer():
        return str(int(t))
    return repr(t) if isinstance(t, float) else str(t)


def _parse_time(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def write_phylogeny(path, table: PhylogenyTable) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(PHYLOGENY_COLUMNS)
        for i, a, t, label in zip(table.id, table.ancestor_id, table.origin_time, table.taxon_label):
            w.writerow(
                (
                    int(i),
                    "[none]" if a < 0 else f"[{int(a)}]",
                    _format_time(t),
                    "" if label is None else label,
                )
            )


def read_phylogeny(path) -> PhylogenyTable:
    ids, ancestors, times, labels = [], [], [], []
    for lineno, r in _read_rows(path, PHYLOGENY_COLUMNS):
        try:
            ids.append(int(r[0]))
            anc = r[1].strip()
            if not (anc.startswith("[") and anc.endswith("]")):
                raise ValueError(f"bad ancestor_list {anc!r}")
            inner = anc[1:-1].strip()
            if inner.lower() == "none":
                ancestors.append(-1)
            elif "," in inner:
                raise ValueError("only single-ancestor lists are supported")
            else:
                ancestors.append(int(inner))
            times.append(_parse_time(r[2]))
            labels.append(r[3] if r[3] != "" else None)
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from None
    if not ids:
        raise DataError(f"{path}: no rows")
    dtype = np.int64 if all(isinstance(t, int) for t in times) else np.float64
    return PhylogenyTable(ids, ancestors, np.asarray(times, dtype=dtype), labels)


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read JSON {path}: {exc}") from None
