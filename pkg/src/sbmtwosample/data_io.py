"""Edge-list files, multiplex manifests and key-value config files."""
from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .graph_core import InputError, as_adjacency, validate_adjacency

__all__ = [
    "MultiplexDataset",
    "load_edge_list",
    "write_edge_list",
    "load_node_ids",
    "load_multiplex",
    "read_config",
]


def _parse_header(line: str, lineno: int, path) -> int:
    key, _, value = line.partition("=")
    if key.strip() != "n":
        raise InputError(f"{path}:{lineno}: unknown header {line!r}")
    try:
        n = int(value)
    except ValueError:
        raise InputError(f"{path}:{lineno}: malformed node count {value.strip()!r}") from None
    if n < 1:
        raise InputError(f"{path}:{lineno}: node count must be positive")
    return n


def load_edge_list(path, n_hint: int | None = None, node_index: dict[str, int] | None = None) -> sp.csr_array:
    """Read an undirected edge list.

    One edge per line as two whitespace-separated node tokens; ``#`` lines
    are comments and an optional first line ``n=<int>`` declares the node
    count. Tokens are 0-based indices unless ``node_index`` maps external
    identifiers to indices. Duplicate edges collapse; self-loops are errors.
    Without a declared count (header or ``n_hint``) the size is the largest
    index plus one.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"edge list {path} does not exist")
    declared = None
    rows, cols = [], []
    seen_data = False
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if not seen_data and line.replace(" ", "").startswith("n="):
                declared = _parse_header(line, lineno, path)
                seen_data = True
                continue
            seen_data = True
            parts = line.split()
            if len(parts) != 2:
                raise InputError(f"{path}:{lineno}: expected two node tokens, got {line!r}")
            if node_index is not None:
                try:
                    i, j = node_index[parts[0]], node_index[parts[1]]
                except KeyError as exc:
                    raise InputError(f"{path}:{lineno}: unknown node id {exc.args[0]!r}") from None
            else:
                try:
                    i, j = int(parts[0]), int(parts[1])
                except ValueError:
                    raise InputError(f"{path}:{lineno}: node indices must be integers, got {line!r}") from None
                if i < 0 or j < 0:
                    raise InputError(f"{path}:{lineno}: negative node index")
            if i == j:
                raise InputError(f"{path}:{lineno}: self-loop on node {parts[0]}")
            rows.append(i)
            cols.append(j)
    if n_hint is not None and declared is not None and n_hint != declared:
        raise InputError(f"{path}: header declares n={declared} but n={n_hint} was expected")
    n = n_hint if n_hint is not None else declared
    if node_index is not None and n is None:
        n = len(node_index)
    top = max(max(rows, default=-1), max(cols, default=-1))
    if n is None:
        n = top + 1
        if n < 1:
            raise InputError(f"{path}: empty edge list without a node count")
    elif top >= n:
        raise InputError(f"{path}: node index {top} out of range for n={n}")
    r = np.array(rows + cols, dtype=np.int64)
    c = np.array(cols + rows, dtype=np.int64)
    a = sp.csr_array((np.ones(r.size), (r, c)), shape=(n, n))
    a.sum_duplicates()
    a.data[:] = 1.0
    return as_adjacency(a)


def write_edge_list(path, a, node_ids: list[str] | None = None) -> None:
    a = sp.triu(as_adjacency(a), k=1).tocoo()
    order = np.lexsort((a.col, a.row))
    with open(path, "w") as fh:
        fh.write(f"n={a.shape[0]}\n")
        for i, j in zip(a.row[order], a.col[order]):
            if node_ids is None:
                fh.write(f"{i} {j}\n")
            else:
                fh.write(f"{node_ids[i]} {node_ids[j]}\n")


def load_node_ids(path) -> list[str]:
    ids = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                ids.append(line)
    if len(set(ids)) != len(ids):
        raise InputError(f"{path}: duplicate node identifiers")
    return ids


@dataclass
class MultiplexDataset:
    layer_names: list[str]
    layers: list[sp.csr_array]
    node_ids: list[str] | None = None

    def __post_init__(self):
        if len(self.layer_names) != len(self.layers):
            raise InputError("one name per layer required")
        if len(set(self.layer_names)) != len(self.layer_names):
            raise InputError("layer names must be unique")
        sizes = {a.shape[0] for a in self.layers}
        if len(sizes) > 1:
            raise InputError(f"layers disagree on node count: {sorted(sizes)}")
        if self.node_ids is not None and sizes and len(self.node_ids) != sizes.pop():
            raise InputError("node id list length differs from the layer size")

    @property
    def n(self) -> int:
        return self.layers[0].shape[0]


def load_multiplex(manifest_path) -> MultiplexDataset:
    """Load every layer named in a manifest.

    The manifest is an INI file::

        [dataset]
        n = 61
        nodes = nodes.txt      ; optional, one external id per line

        [layers]
        work = work.edges
        lunch = lunch.edges

    Relative paths resolve against the manifest's directory. With a
    ``nodes`` file, edge lists name nodes by external id.
    """
    manifest_path = Path(manifest_path)
    cfg = read_config(manifest_path)
    base = manifest_path.parent
    if "layers" not in cfg or not cfg["layers"]:
        raise InputError(f"{manifest_path}: no [layers] section")
    dataset = cfg.get("dataset", {})
    node_ids = None
    node_index = None
    if "nodes" in dataset:
        node_ids = load_node_ids(base / dataset["nodes"])
        node_index = {v: i for i, v in enumerate(node_ids)}
    n = None
    if "n" in dataset:
        try:
            n = int(dataset["n"])
        except ValueError:
            raise InputError(f"{manifest_path}: n must be an integer") from None
        if node_ids is not None and len(node_ids) != n:
            raise InputError(f"{manifest_path}: n={n} but {len(node_ids)} node ids listed")
    names, layers = [], []
    for name, rel in cfg["layers"].items():
        path = base / rel
        if not path.is_file():
            raise InputError(f"{manifest_path}: layer {name!r} file {path} is missing")
        try:
            a = load_edge_list(path, n, node_index)
        except InputError as exc:
            raise InputError(f"layer {name!r}: {exc}") from None
        problems = validate_adjacency(a, name)
        if problems:
            raise InputError("; ".join(problems))
        names.append(name)
        layers.append(a)
    return MultiplexDataset(names, layers, node_ids)


def read_config(path) -> dict[str, dict[str, str]]:
    """Parse a sectioned key-value file into nested dicts.

    Section names and keys are lower-cased, except keys in ``[layers]``, which name layers.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except FileNotFoundError:
        raise InputError(f"config file {path} does not exist") from None
    except configparser.Error as exc:
        raise InputError(f"{path}: {exc}") from None
    out = {}
    for section in parser.sections():
        items = parser.items(section)
        name = section.lower()
        out[name] = dict(items) if name == "layers" else {k.lower(): v for k, v in items}
    return out
