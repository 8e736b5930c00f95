"""Line-oriented text format for DCOP instances.

::

    # comment
    dcop <n> <q>
    dom <i> <v1> <v2> ...
    con <t> <k>
    <|D_t| rows of |D_k| integers>

Variables are 0-based.  Blank lines and ``#`` lines are ignored.
"""
from __future__ import annotations

from pathlib import Path

from pcsyncbb.dcop import DcopInstance, InstanceError


class InstanceFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def serialize_instance(instance: DcopInstance) -> str:
    out = [f"dcop {instance.n} {instance.q}"]
    for i, dom in enumerate(instance.domains):
        out.append(" ".join(["dom", str(i), *map(str, dom)]))
    for (t, k), m in instance.constraints.items():
        out.append(f"con {t} {k}")
        out.extend(" ".join(map(str, row)) for row in m)
    return "\n".join(out) + "\n"


def _ints(tokens, lineno):
    try:
        return [int(tok) for tok in tokens]
    except ValueError as exc:
        raise InstanceFormatError(f"expected integers: {exc}", lineno) from None


def parse_instance(text: str) -> DcopInstance:
    lines = [
        (no, line.split())
        for no, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not lines:
        raise InstanceFormatError("empty document")
    no, head = lines[0]
    if len(head) != 3 or head[0] != "dcop":
        raise InstanceFormatError("expected header 'dcop n q'", no)
    n, q = _ints(head[1:], no)
    if n < 2:
        raise InstanceFormatError(f"need at least two variables, got {n}", no)

    domains: dict[int, tuple[int, ...]] = {}
    constraints: dict[tuple[int, int], list[list[int]]] = {}
    pos = 1
    while pos < len(lines):
        no, toks = lines[pos]
        pos += 1
        if toks[0] == "dom":
            if len(toks) < 3:
                raise InstanceFormatError("domain needs at least one value", no)
            i, *values = _ints(toks[1:], no)
            if not 0 <= i < n:
                raise InstanceFormatError(f"variable {i} out of range", no)
            if i in domains:
                raise InstanceFormatError(f"duplicate domain for variable {i}", no)
            domains[i] = tuple(values)
        elif toks[0] == "con":
            if len(toks) != 3:
                raise InstanceFormatError("expected 'con t k'", no)
            t, k = _ints(toks[1:], no)
            if not 0 <= t < k < n:
                raise InstanceFormatError(f"bad constraint pair ({t}, {k})", no)
            if t not in domains or k not in domains:
                raise InstanceFormatError(
                    f"constraint ({t}, {k}) precedes its domains", no
                )
            if (t, k) in constraints:
                raise InstanceFormatError(f"duplicate constraint ({t}, {k})", no)
            rows, cols = len(domains[t]), len(domains[k])
            matrix = []
            for r in range(rows):
                if pos >= len(lines):
                    raise InstanceFormatError(
                        f"matrix ({t}, {k}) truncated: expected {rows} rows", no
                    )
                rno, rtoks = lines[pos]
                if rtoks[0] in ("dom", "con"):
                    raise InstanceFormatError(
                        f"matrix ({t}, {k}) has {r} rows, expected {rows}", rno
                    )
                pos += 1
                row = _ints(rtoks, rno)
                if len(row) != cols:
                    raise InstanceFormatError(
                        f"row has {len(row)} entries, expected {cols}", rno
                    )
                for c in row:
                    if not 0 <= c <= q:
                        raise InstanceFormatError(f"cost {c} outside [0, {q}]", rno)
                matrix.append(row)
            constraints[(t, k)] = matrix
        else:
            raise InstanceFormatError(f"unexpected token {toks[0]!r}", no)

    missing = [i for i in range(n) if i not in domains]
    if missing:
        raise InstanceFormatError(f"missing domains for variables {missing}")
    try:
        return DcopInstance(
            domains=tuple(domains[i] for i in range(n)), q=q, constraints=constraints
        )
    except InstanceError as exc:
        raise InstanceFormatError(str(exc)) from None


def load_instance(path: str | Path) -> DcopInstance:
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def save_instance(instance: DcopInstance, path: str | Path) -> None:
    Path(path).write_text(serialize_instance(instance), encoding="utf-8")
