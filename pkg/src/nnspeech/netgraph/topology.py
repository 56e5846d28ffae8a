"""Declarative topology descriptions and their INI text form.

Example::

    [graph]
    seed = 7
    edges =
        x -> hidden
        hidden -> y

    [block x]
    kind = input
    width = 4

    [block hidden]
    kind = dense
    inputs = 4
    width = 2
    activation = sigmoid

    [block y]
    kind = output
    width = 2

``a ~> b`` marks a recurrent edge (value delayed by one step); recurrent
edges must end at a ``recurrent_buffer`` block.
"""

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, field

from ..errors import GraphBuildError

INPUT, OUTPUT, DENSE, CONCAT, DELAY_LINE, RECURRENT_BUFFER, TRANSFORM = (
    "input", "output", "dense", "concat", "delay_line", "recurrent_buffer", "transform")
KINDS = (INPUT, OUTPUT, DENSE, CONCAT, DELAY_LINE, RECURRENT_BUFFER, TRANSFORM)
ACTIVATIONS = ("sigmoid", "linear")


@dataclass
class BlockSpec:
    name: str
    kind: str
    # output width for input/output/dense/transform/concat; per-item width for
    # delay_line and recurrent_buffer
    width: int = 0
    inputs: int = 0
    activation: str = "sigmoid"
    depth: int = 1
    function: str = "identity"
    loss: bool = True
    teacher_forcing: bool = False


@dataclass(frozen=True)
class EdgeSpec:
    source: str
    target: str
    recurrent: bool = False


@dataclass
class GraphSpec:
    blocks: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    seed: int = 0

    def block(self, name):
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    def add(self, name, kind, **kwargs):
        self.blocks.append(BlockSpec(name, kind, **kwargs))
        return self

    def connect(self, source, target, recurrent=False):
        self.edges.append(EdgeSpec(source, target, recurrent))
        return self

    def canonical(self):
        """Stable JSON text identifying the topology."""
        payload = {
            "seed": self.seed,
            "blocks": [asdict(b) for b in self.blocks],
            "edges": [[e.source, e.target, e.recurrent] for e in self.edges],
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    def digest(self):
        return hashlib.sha256(self.canonical().encode("utf-8")).digest()

    @classmethod
    def from_canonical(cls, text):
        payload = json.loads(text)
        return cls(
            blocks=[BlockSpec(**b) for b in payload["blocks"]],
            edges=[EdgeSpec(s, t, bool(r)) for s, t, r in payload["edges"]],
            seed=int(payload["seed"]),
        )

    def to_ini(self):
        lines = ["[graph]", f"seed = {self.seed}", "edges ="]
        for e in self.edges:
            lines.append(f"    {e.source} {'~>' if e.recurrent else '->'} {e.target}")
        defaults = BlockSpec("", "")
        for b in self.blocks:
            lines += ["", f"[block {b.name}]", f"kind = {b.kind}"]
            for key in ("width", "inputs", "activation", "depth", "function", "loss", "teacher_forcing"):
                value = getattr(b, key)
                if value != getattr(defaults, key):
                    lines.append(f"{key} = {str(value).lower() if isinstance(value, bool) else value}")
        return "\n".join(lines) + "\n"


def _parse_edges(text):
    edges = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        for arrow, recurrent in (("~>", True), ("->", False)):
            if arrow in line:
                src, dst = (p.strip() for p in line.split(arrow, 1))
                edges.append(EdgeSpec(src, dst, recurrent))
                break
        else:
            raise GraphBuildError(f"cannot parse edge {line!r}")
    return edges


def parse_topology(text):
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise GraphBuildError(f"topology syntax error: {exc}") from None
    spec = GraphSpec()
    if parser.has_section("graph"):
        spec.seed = parser.getint("graph", "seed", fallback=0)
        spec.edges = _parse_edges(parser.get("graph", "edges", fallback=""))
    for section in parser.sections():
        if not section.startswith("block "):
            continue
        sec = parser[section]
        name = section[len("block "):].strip()
        try:
            spec.blocks.append(BlockSpec(
                name=name,
                kind=sec.get("kind", ""),
                width=sec.getint("width", 0),
                inputs=sec.getint("inputs", 0),
                activation=sec.get("activation", "sigmoid"),
                depth=sec.getint("depth", 1),
                function=sec.get("function", "identity"),
                loss=sec.getboolean("loss", True),
                teacher_forcing=sec.getboolean("teacher_forcing", False),
            ))
        except ValueError as exc:
            raise GraphBuildError(f"block {name}: {exc}") from None
    return spec
