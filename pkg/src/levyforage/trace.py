"""Run traces and their on-disk form.

A trace file is CSV with ``#``-prefixed metadata lines, then a header row
``kind,distance,x[,y[,z]],payload`` and one event per line. Floats are
written with ``repr`` so a file re-reads to bit-identical values.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Union

JUMP = "jump"
DETECTION = "detection"
COLLECTION = "collection"
MODE_SWITCH = "mode-switch"
CLIP = "clip"
KINDS = (JUMP, DETECTION, COLLECTION, MODE_SWITCH, CLIP)

A_TO_B = "A>B"
B_TO_A = "B>A"

AXES = ("x", "y", "z")


class TraceEvent(NamedTuple):
    """One timestamped record.

    ``distance`` is cumulative path length, which is also time at unit speed.
    ``payload`` is the commanded length for ``jump``, the reward id for
    ``detection``/``collection``, ``"A>B"``/``"B>A"`` for ``mode-switch``, and
    the unflown remainder for ``clip``.
    """

    kind: str
    distance: float
    position: tuple
    payload: Union[int, float, str]


@dataclass
class Trace:
    dimension: int
    start: tuple
    cluster_sizes: tuple = ()
    events: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @property
    def total_distance(self) -> float:
        return self.events[-1].distance if self.events else 0.0

    def of_kind(self, kind: str) -> list:
        return [e for e in self.events if e.kind == kind]

    def cluster_of(self, reward_id: int) -> int:
        acc = 0
        for k, n in enumerate(self.cluster_sizes):
            acc += n
            if reward_id < acc:
                return k
        raise IndexError(f"reward id {reward_id} outside trace clusters")


def _fmt_payload(kind, payload) -> str:
    if kind in (JUMP, CLIP):
        return repr(float(payload))
    return str(payload)


def _parse_payload(kind, text):
    if kind in (JUMP, CLIP):
        return float(text)
    if kind in (DETECTION, COLLECTION):
        return int(text)
    return text


def dumps_trace(trace: Trace) -> str:
    buf = io.StringIO()
    meta = dict(trace.meta)
    meta["dimension"] = trace.dimension
    meta["start"] = ",".join(repr(float(x)) for x in trace.start)
    meta["cluster_sizes"] = ",".join(str(n) for n in trace.cluster_sizes)
    for key in sorted(meta):
        buf.write(f"# {key}={meta[key]}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "distance", *AXES[:trace.dimension], "payload"])
    for e in trace.events:
        w.writerow([e.kind, repr(e.distance), *(repr(x) for x in e.position),
                    _fmt_payload(e.kind, e.payload)])
    return buf.getvalue()


def loads_trace(text: str) -> Trace:
    lines = text.splitlines()
    meta = {}
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        key, _, value = lines[i][1:].strip().partition("=")
        meta[key] = value
        i += 1
    dim = int(meta.pop("dimension"))
    start = tuple(float(x) for x in meta.pop("start").split(","))
    sizes_text = meta.pop("cluster_sizes")
    sizes = tuple(int(x) for x in sizes_text.split(",")) if sizes_text else ()
    rows = csv.reader(lines[i:])
    header = next(rows)
    if header != ["kind", "distance", *AXES[:dim], "payload"]:
        raise ValueError(f"unexpected trace header {header}")
    events = []
    for row in rows:
        kind = row[0]
        events.append(TraceEvent(kind, float(row[1]), tuple(float(x) for x in row[2:2 + dim]),
                                 _parse_payload(kind, row[2 + dim])))
    return Trace(dim, start, sizes, events, meta)


def write_trace(trace: Trace, path) -> None:
    Path(path).write_text(dumps_trace(trace))


def read_trace(path) -> Trace:
    return loads_trace(Path(path).read_text())
