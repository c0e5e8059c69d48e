"""Line-oriented text formats for every pipeline artifact.

All files are plain text with '#' comments, locale-independent numbers
(17 significant digits for reals, so values round-trip bit-exactly), and a
16-hex instance hash in the header of every derived artifact.  The hash
binds the artifacts of one instance together: mixing stages across
different instances is a hard error, never silent corruption.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .chimera import HardwareGraph, build_chimera
from .embedding import Embedding
from .energy import PenaltyParams, VariableRegistry
from .network import Observation, PowerNetwork, build_tree, check_observation
from .quadratize import Qubo


class FormatError(ValueError):
    """Malformed artifact file (bad syntax, counts, or stage mixing)."""


def fmt_real(x: float) -> str:
    return format(float(x), ".17g")


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _parse_real(token: str, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise FormatError(f"line {lineno}: expected a number, got {token!r}") from None


def _parse_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise FormatError(f"line {lineno}: expected an integer, got {token!r}") from None


# ---------------------------------------------------------------------------
# Instance files
# ---------------------------------------------------------------------------


def instance_hash(net: PowerNetwork, obs: Observation, params: PenaltyParams) -> str:
    """16-hex digest of the instance content (tree, readout, penalties)."""
    payload = "|".join(
        [
            str(net.arity),
            str(net.depth),
            "".join(str(b) for b in obs.bits),
            fmt_real(params.lambda_path),
            fmt_real(params.lambda_fault_cb),
            fmt_real(params.lambda_fault_sensor),
            "auto" if params.lambda_ancilla is None else fmt_real(params.lambda_ancilla),
        ]
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def serialize_instance(
    net: PowerNetwork, obs: Observation, params: PenaltyParams
) -> str:
    check_observation(net, obs)
    lines = [
        "# diagnosis instance",
        f"tree {net.arity} {net.depth}",
        "readout " + " ".join(obs.groups(net.arity)),
        f"lambda_path {fmt_real(params.lambda_path)}",
        f"lambda_fault_cb {fmt_real(params.lambda_fault_cb)}",
        f"lambda_fault_sensor {fmt_real(params.lambda_fault_sensor)}",
    ]
    if params.lambda_ancilla is not None:
        lines.append(f"lambda_ancilla {fmt_real(params.lambda_ancilla)}")
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> tuple[PowerNetwork, Observation, PenaltyParams]:
    net = None
    bits = None
    fields: dict[str, float] = {}
    for lineno, line in _content_lines(text):
        tokens = line.split()
        key = tokens[0]
        if key == "tree":
            if len(tokens) != 3:
                raise FormatError(f"line {lineno}: tree line needs arity and depth")
            arity = _parse_int(tokens[1], lineno)
            depth = _parse_int(tokens[2], lineno)
            try:
                net = build_tree(arity, depth)
            except ValueError as exc:
                raise FormatError(f"line {lineno}: {exc}") from None
        elif key == "readout":
            if len(tokens) < 2:
                raise FormatError(f"line {lineno}: readout line has no bits")
            try:
                bits = Observation.from_groups(tokens[1:])
            except ValueError as exc:
                raise FormatError(f"line {lineno}: {exc}") from None
        elif key in (
            "lambda_path",
            "lambda_fault_cb",
            "lambda_fault_sensor",
            "lambda_ancilla",
        ):
            if len(tokens) != 2:
                raise FormatError(f"line {lineno}: {key} needs one value")
            fields[key] = _parse_real(tokens[1], lineno)
        else:
            raise FormatError(f"line {lineno}: unknown directive {key!r}")
    if net is None:
        raise FormatError("missing tree line")
    if bits is None:
        raise FormatError("missing readout line")
    if len(bits) != net.sensor_count:
        raise FormatError(
            f"readout has {len(bits)} bits, network has {net.sensor_count} sensors"
        )
    try:
        params = PenaltyParams(
            lambda_path=fields.get("lambda_path", 3.0),
            lambda_fault_cb=fields.get("lambda_fault_cb", 1.0),
            lambda_fault_sensor=fields.get("lambda_fault_sensor", 1.0),
            lambda_ancilla=fields.get("lambda_ancilla"),
        )
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    return net, bits, params


# ---------------------------------------------------------------------------
# QUBO files
# ---------------------------------------------------------------------------


def serialize_qubo(q: Qubo, content_hash: str) -> str:
    lines = [
        f"p qubo {q.n} {len(q.terms)}",
        f"hash {content_hash}",
        f"offset {fmt_real(q.offset)}",
    ]
    for idx in range(q.n):
        role, label = q.registry.role(idx)
        lines.append(f"var {idx} {role}:{label}")
    for (i, j) in sorted(q.terms):
        lines.append(f"{i} {j} {fmt_real(q.terms[(i, j)])}")
    return "\n".join(lines) + "\n"


def parse_qubo(text: str) -> tuple[Qubo, str]:
    header = None
    content_hash = None
    offset = 0.0
    roles: dict[int, tuple[str, int]] = {}
    terms: dict[tuple[int, int], float] = {}
    for lineno, line in _content_lines(text):
        tokens = line.split()
        if tokens[0] == "p":
            if len(tokens) != 4 or tokens[1] != "qubo":
                raise FormatError(f"line {lineno}: malformed problem line")
            header = (_parse_int(tokens[2], lineno), _parse_int(tokens[3], lineno))
        elif tokens[0] == "hash":
            if len(tokens) != 2:
                raise FormatError(f"line {lineno}: malformed hash line")
            content_hash = tokens[1]
        elif tokens[0] == "offset":
            if len(tokens) != 2:
                raise FormatError(f"line {lineno}: malformed offset line")
            offset = _parse_real(tokens[1], lineno)
        elif tokens[0] == "var":
            if len(tokens) != 3 or ":" not in tokens[2]:
                raise FormatError(f"line {lineno}: malformed var line")
            idx = _parse_int(tokens[1], lineno)
            role, _, label = tokens[2].partition(":")
            if role not in ("cb", "sensor", "ancilla"):
                raise FormatError(f"line {lineno}: unknown variable role {role!r}")
            roles[idx] = (role, _parse_int(label, lineno))
        else:
            if len(tokens) != 3:
                raise FormatError(f"line {lineno}: malformed coefficient line")
            i = _parse_int(tokens[0], lineno)
            j = _parse_int(tokens[1], lineno)
            c = _parse_real(tokens[2], lineno)
            if not 0 <= i <= j:
                raise FormatError(f"line {lineno}: indices must satisfy 0 <= i <= j")
            if (i, j) in terms:
                raise FormatError(f"line {lineno}: duplicate coefficient ({i}, {j})")
            terms[(i, j)] = c
    if header is None:
        raise FormatError("missing problem line")
    if content_hash is None:
        raise FormatError("missing hash line")
    n, nterms = header
    if len(terms) != nterms:
        raise FormatError(f"problem line declares {nterms} terms, file has {len(terms)}")
    if sorted(roles) != list(range(n)):
        raise FormatError("var lines do not cover variables 0..n-1 exactly")
    n_cb = sum(1 for r, _ in roles.values() if r == "cb")
    n_sensor = sum(1 for r, _ in roles.values() if r == "sensor")
    n_anc = sum(1 for r, _ in roles.values() if r == "ancilla")
    registry = VariableRegistry(n_cb, n_sensor, n_anc)
    for idx in range(n):
        if roles[idx] != registry.role(idx):
            raise FormatError(f"var {idx} breaks the cb/sensor/ancilla layout")
    for (i, j) in terms:
        if j >= n:
            raise FormatError(f"coefficient index {j} outside 0..{n - 1}")
    return Qubo(n, terms, offset, registry), content_hash


# ---------------------------------------------------------------------------
# Embedding files
# ---------------------------------------------------------------------------


def serialize_embedding(
    emb: Embedding, hw: HardwareGraph, content_hash: str
) -> str:
    lines = [
        f"hash {content_hash}",
        f"hw {hw.rows} {hw.cols} {hw.shore}",
        "broken " + " ".join(str(q) for q in sorted(hw.broken)),
    ]
    for u in sorted(emb.chains):
        chain = " ".join(str(q) for q in sorted(emb.chains[u]))
        lines.append(f"chain {u}: {chain}")
    return "\n".join(lines) + "\n"


def parse_embedding(text: str) -> tuple[Embedding, HardwareGraph, str]:
    content_hash = None
    hw = None
    broken: tuple[int, ...] = ()
    chains: dict[int, frozenset[int]] = {}
    dims = None
    for lineno, line in _content_lines(text):
        tokens = line.split()
        if tokens[0] == "hash":
            content_hash = tokens[1] if len(tokens) == 2 else None
            if content_hash is None:
                raise FormatError(f"line {lineno}: malformed hash line")
        elif tokens[0] == "hw":
            if len(tokens) != 4:
                raise FormatError(f"line {lineno}: hw line needs rows cols shore")
            dims = tuple(_parse_int(t, lineno) for t in tokens[1:])
        elif tokens[0] == "broken":
            broken = tuple(_parse_int(t, lineno) for t in tokens[1:])
        elif tokens[0] == "chain":
            if len(tokens) < 3 or not tokens[1].endswith(":"):
                raise FormatError(f"line {lineno}: malformed chain line")
            u = _parse_int(tokens[1][:-1], lineno)
            if u in chains:
                raise FormatError(f"line {lineno}: duplicate chain for variable {u}")
            chains[u] = frozenset(_parse_int(t, lineno) for t in tokens[2:])
        else:
            raise FormatError(f"line {lineno}: unknown directive {tokens[0]!r}")
    if content_hash is None:
        raise FormatError("missing hash line")
    if dims is None:
        raise FormatError("missing hw line")
    try:
        hw = build_chimera(*dims, broken=broken)
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    if sorted(chains) != list(range(len(chains))):
        raise FormatError("chain lines do not cover variables 0..n-1 exactly")
    return Embedding(chains), hw, content_hash


# ---------------------------------------------------------------------------
# Samples files
# ---------------------------------------------------------------------------


def serialize_samples(
    states: np.ndarray,
    energies: np.ndarray,
    counts: np.ndarray,
    n_reads: int,
    content_hash: str,
    space: str = "logical",
    qubits: tuple[int, ...] | None = None,
) -> str:
    if space not in ("logical", "physical"):
        raise ValueError("space must be 'logical' or 'physical'")
    lines = [
        f"hash {content_hash}",
        f"space {space}",
        "kind spin",
        f"reads {n_reads}",
    ]
    if space == "physical":
        if qubits is None:
            raise ValueError("physical samples need the qubit order")
        lines.append("qubits " + " ".join(str(q) for q in qubits))
    for row, e, c in zip(states, energies, counts):
        spin_str = "".join("+" if s > 0 else "-" for s in row)
        lines.append(f"{fmt_real(e)} {int(c)} {spin_str}")
    return "\n".join(lines) + "\n"


def parse_samples(text: str):
    """Returns (states, energies, counts, n_reads, hash, space, qubits)."""
    content_hash = None
    space = "logical"
    n_reads = None
    qubits = None
    rows = []
    for lineno, line in _content_lines(text):
        tokens = line.split()
        if tokens[0] == "hash":
            content_hash = tokens[1]
        elif tokens[0] == "space":
            if len(tokens) != 2 or tokens[1] not in ("logical", "physical"):
                raise FormatError(f"line {lineno}: malformed space line")
            space = tokens[1]
        elif tokens[0] == "kind":
            if len(tokens) != 2 or tokens[1] not in ("spin", "bit"):
                raise FormatError(f"line {lineno}: malformed kind line")
        elif tokens[0] == "reads":
            n_reads = _parse_int(tokens[1], lineno)
        elif tokens[0] == "qubits":
            qubits = tuple(_parse_int(t, lineno) for t in tokens[1:])
        else:
            if len(tokens) != 3:
                raise FormatError(f"line {lineno}: malformed sample row")
            e = _parse_real(tokens[0], lineno)
            c = _parse_int(tokens[1], lineno)
            state = tokens[2]
            if any(ch not in "+-01" for ch in state):
                raise FormatError(f"line {lineno}: bad state string")
            spins = [1 if ch in "+1" else -1 for ch in state]
            rows.append((e, c, spins))
    if content_hash is None:
        raise FormatError("missing hash line")
    if n_reads is None:
        raise FormatError("missing reads line")
    if rows:
        width = len(rows[0][2])
        if any(len(r[2]) != width for r in rows):
            raise FormatError("sample rows have inconsistent widths")
        states = np.array([r[2] for r in rows], dtype=np.int8)
    else:
        states = np.zeros((0, 0), np.int8)
    energies = np.array([r[0] for r in rows], dtype=np.float64)
    counts = np.array([r[1] for r in rows], dtype=np.int64)
    if counts.sum() != n_reads:
        raise FormatError(
            f"reads line declares {n_reads}, rows sum to {int(counts.sum())}"
        )
    return states, energies, counts, n_reads, content_hash, space, qubits


# ---------------------------------------------------------------------------
# Stats table
# ---------------------------------------------------------------------------

_ROW_LABELS = {"no-gauge": "No Gauge", "average": "Average", "best-gauge": "Best Gauge"}


def format_stats_table(rows: dict, anneal_times) -> str:
    """Aligned text table: one line per row label, (R, t_total) per anneal time."""
    anneal_times = tuple(anneal_times)
    cells = ["{:<12}".format("")]
    for t in anneal_times:
        cells.append("{:>12} {:>12}".format(f"R@{fmt_real(t)}s", "t_total(s)"))
    out = ["".join(cells)]
    for key in ("no-gauge", "average", "best-gauge"):
        if key not in rows:
            continue
        run = rows[key]
        cells = ["{:<12}".format(_ROW_LABELS[key])]
        for t in anneal_times:
            r = run.repetitions
            tt = run.total_times.get(t)
            cells.append(
                "{:>12} {:>12}".format(
                    "not-found" if r is None else str(r),
                    "not-found" if tt is None else f"{tt:.4f}",
                )
            )
        out.append("".join(cells))
    return "\n".join(out) + "\n"
