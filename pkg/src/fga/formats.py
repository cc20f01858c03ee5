"""Text file formats: graphs, rose covers, graph maps, and reglued systems.

One declaration per line; blank lines and ``#`` comments are ignored; the
first declaration names the file kind.  Every failure raises ParseError
carrying the 1-based line number so command-line diagnostics can point at
the offending line.  Files referenced from other files (system files name
graph, cover, and map files) are resolved relative to the referencing file.
"""

from __future__ import annotations

import os.path
from dataclasses import dataclass
from pathlib import Path

from .covers import CoverMap
from .graph_maps import GraphMap
from .regluing import Attachment, GraphOfRoses, RegluingSpec
from .words import MarkedGraph


class ParseError(Exception):
    """A malformed input file; str() names the source and line."""

    def __init__(self, source: str, line: int, message: str):
        self.source = source
        self.line = line
        self.message = message
        where = f"{source}: " if source else ""
        super().__init__(f"{where}parse error at line {line}: {message}")


Declaration = tuple[int, list[str], str]


def _declarations(text: str) -> list[Declaration]:
    """(line number, whitespace tokens, comment-stripped text) per line."""
    rows = []
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((i, line.split(), line))
    return rows


def _read(path: str | Path, source: str, line: int) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(source, line, f"cannot read {str(path)!r}: {exc.strerror}") from exc


def _names_graph(token: str, graph: MarkedGraph) -> bool:
    """A reference token may be the graph's name or a file path whose stem is."""
    return token == graph.name or Path(token).stem == graph.name


# ---------------------------------------------------------------------------
# graphs


def parse_graph(text: str, source: str = "<graph>") -> MarkedGraph:
    rows = _declarations(text)
    if not rows:
        raise ParseError(source, 1, "empty input, expected: graph <name>")
    name: str | None = None
    header_line = rows[0][0]
    vertices: list[str] = []
    edges: list[tuple[str, str, str]] = []
    vseen: set[str] = set()
    eseen: set[str] = set()
    for lineno, toks, _ in rows:
        kind = toks[0]
        if kind == "graph":
            if name is not None:
                raise ParseError(source, lineno, "duplicate graph declaration")
            if len(toks) != 2:
                raise ParseError(source, lineno, "expected: graph <name>")
            name = toks[1]
            header_line = lineno
        elif name is None:
            raise ParseError(source, lineno, "file must start with: graph <name>")
        elif kind == "vertex":
            if len(toks) != 2:
                raise ParseError(source, lineno, "expected: vertex <id>")
            if toks[1] in vseen:
                raise ParseError(source, lineno, f"duplicate vertex {toks[1]!r}")
            vseen.add(toks[1])
            vertices.append(toks[1])
        elif kind == "edge":
            if len(toks) != 4:
                raise ParseError(source, lineno, "expected: edge <id> <from> <to>")
            eid, u, v = toks[1:]
            if eid in eseen:
                raise ParseError(source, lineno, f"duplicate edge {eid!r}")
            for end in (u, v):
                if end not in vseen:
                    raise ParseError(source, lineno, f"edge {eid!r} uses undeclared vertex {end!r}")
            eseen.add(eid)
            edges.append((eid, u, v))
        else:
            raise ParseError(source, lineno, f"unknown declaration {kind!r} in a graph file")
    if name is None:
        raise ParseError(source, header_line, "file must start with: graph <name>")
    try:
        return MarkedGraph(name, tuple(vertices), tuple(edges))
    except ValueError as exc:
        raise ParseError(source, header_line, str(exc)) from exc


def load_graph(path: str | Path) -> MarkedGraph:
    return parse_graph(Path(path).read_text(), source=str(path))


def format_graph(graph: MarkedGraph) -> str:
    lines = [f"graph {graph.name}"]
    lines += [f"vertex {v}" for v in graph.vertices]
    lines += [f"edge {e} {u} {v}" for e, u, v in graph.edges]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# covers


def _parse_cover_decl(
    text: str, base: MarkedGraph, source: str
) -> tuple[str, MarkedGraph, tuple[int, ...], int, int]:
    """(name, total graph, labels, basepoint index, header line)."""
    rows = _declarations(text)
    if not rows:
        raise ParseError(source, 1, "empty input, expected: cover <name> over <rose>")
    name: str | None = None
    header_line = rows[0][0]
    vertices: list[str] = []
    edges: list[tuple[str, str, str]] = []
    labels: list[int] = []
    vseen: set[str] = set()
    eseen: set[str] = set()
    basepoint: int | None = None
    for lineno, toks, _ in rows:
        kind = toks[0]
        if kind == "cover":
            if name is not None:
                raise ParseError(source, lineno, "duplicate cover declaration")
            if len(toks) != 4 or toks[2] != "over":
                raise ParseError(source, lineno, "expected: cover <name> over <rose>")
            if not _names_graph(toks[3], base):
                raise ParseError(
                    source, lineno,
                    f"cover is over {toks[3]!r}, expected the rose {base.name!r}",
                )
            name = toks[1]
            header_line = lineno
        elif name is None:
            raise ParseError(source, lineno, "file must start with: cover <name> over <rose>")
        elif kind == "cvertex":
            if len(toks) != 2:
                raise ParseError(source, lineno, "expected: cvertex <id>")
            if toks[1] in vseen:
                raise ParseError(source, lineno, f"duplicate cvertex {toks[1]!r}")
            vseen.add(toks[1])
            vertices.append(toks[1])
        elif kind == "cedge":
            if len(toks) != 6 or toks[4] != "label":
                raise ParseError(source, lineno, "expected: cedge <id> <from> <to> label <base-edge>")
            eid, u, v = toks[1:4]
            if eid in eseen:
                raise ParseError(source, lineno, f"duplicate cedge {eid!r}")
            for end in (u, v):
                if end not in vseen:
                    raise ParseError(source, lineno, f"cedge {eid!r} uses undeclared cvertex {end!r}")
            try:
                labels.append(base.parse_letter(toks[5]))
            except ValueError as exc:
                raise ParseError(source, lineno, str(exc)) from exc
            eseen.add(eid)
            edges.append((eid, u, v))
        elif kind == "basepoint":
            if len(toks) != 2:
                raise ParseError(source, lineno, "expected: basepoint <id>")
            if basepoint is not None:
                raise ParseError(source, lineno, "duplicate basepoint declaration")
            if toks[1] not in vseen:
                raise ParseError(source, lineno, f"basepoint {toks[1]!r} is not a declared cvertex")
            basepoint = vertices.index(toks[1])
        else:
            raise ParseError(source, lineno, f"unknown declaration {kind!r} in a cover file")
    if name is None:
        raise ParseError(source, header_line, "file must start with: cover <name> over <rose>")
    try:
        total = MarkedGraph(name, tuple(vertices), tuple(edges))
    except ValueError as exc:
        raise ParseError(source, header_line, str(exc)) from exc
    return name, total, tuple(labels), basepoint or 0, header_line


def parse_cover(text: str, base: MarkedGraph, source: str = "<cover>") -> CoverMap:
    _, total, labels, bp, header_line = _parse_cover_decl(text, base, source)
    try:
        return CoverMap(total, base, labels, bp)
    except ValueError as exc:
        raise ParseError(source, header_line, str(exc)) from exc


def load_cover(path: str | Path, base: MarkedGraph | None = None) -> CoverMap:
    source = str(path)
    text = Path(path).read_text()
    if base is None:
        # resolve the `over` token as a graph file next to the cover file
        for lineno, toks, _ in _declarations(text):
            if toks[0] == "cover" and len(toks) == 4 and toks[2] == "over":
                target = os.path.normpath(os.path.join(os.path.dirname(source), toks[3]))
                base = parse_graph(_read(target, source, lineno), source=target)
                break
        if base is None:
            raise ParseError(source, 1, "file must start with: cover <name> over <rose>")
    return parse_cover(text, base, source)


def format_cover(cover: CoverMap) -> str:
    base = cover.base
    lines = [f"cover {cover.total.name} over {base.name}"]
    lines += [f"cvertex {v}" for v in cover.total.vertices]
    for k, (eid, u, v) in enumerate(cover.total.edges):
        lines.append(f"cedge {eid} {u} {v} label {base.arrow_name(cover.edge_labels[k])}")
    lines.append(f"basepoint {cover.total.vertices[cover.basepoint]}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# maps


def parse_map(text: str, graph: MarkedGraph, source: str = "<map>") -> tuple[str, GraphMap]:
    rows = _declarations(text)
    if not rows:
        raise ParseError(source, 1, "empty input, expected: map <name> on <graph>")
    name: str | None = None
    header_line = rows[0][0]
    images: dict[str, str] = {}
    for lineno, toks, line in rows:
        if toks[0] == "map":
            if name is not None:
                raise ParseError(source, lineno, "duplicate map declaration")
            if len(toks) != 4 or toks[2] != "on":
                raise ParseError(source, lineno, "expected: map <name> on <graph>")
            if not _names_graph(toks[3], graph):
                raise ParseError(
                    source, lineno,
                    f"map is on {toks[3]!r}, expected the graph {graph.name!r}",
                )
            name = toks[1]
            header_line = lineno
            continue
        if name is None:
            raise ParseError(source, lineno, "file must start with: map <name> on <graph>")
        if "->" not in line:
            raise ParseError(source, lineno, "expected an image line: <edge> -> <edge path>")
        lhs, rhs = line.split("->", 1)
        eid = lhs.strip()
        if eid not in {e[0] for e in graph.edges}:
            raise ParseError(source, lineno, f"{eid!r} is not an edge of graph {graph.name!r}")
        if eid in images:
            raise ParseError(source, lineno, f"duplicate image for edge {eid!r}")
        word = rhs.strip()
        if not word:
            raise ParseError(source, lineno, f"empty image for edge {eid!r}")
        try:
            graph.parse_word(word)
        except ValueError as exc:
            raise ParseError(source, lineno, str(exc)) from exc
        images[eid] = word
    if name is None:
        raise ParseError(source, header_line, "file must start with: map <name> on <graph>")
    for eid, _, _ in graph.edges:
        if eid not in images:
            raise ParseError(source, header_line, f"no image given for edge {eid!r}")
    try:
        return name, GraphMap.from_strs(graph, images)
    except ValueError as exc:
        raise ParseError(source, header_line, str(exc)) from exc


@dataclass(frozen=True)
class LoadedMap:
    name: str
    map: GraphMap
    path: str
    inputs: tuple[str, ...]


def load_map(path: str | Path, graph: MarkedGraph | None = None) -> LoadedMap:
    source = str(path)
    text = Path(path).read_text()
    inputs = [source]
    if graph is None:
        for lineno, toks, _ in _declarations(text):
            if toks[0] == "map" and len(toks) == 4 and toks[2] == "on":
                target = os.path.normpath(os.path.join(os.path.dirname(source), toks[3]))
                graph = parse_graph(_read(target, source, lineno), source=target)
                inputs.append(target)
                break
        if graph is None:
            raise ParseError(source, 1, "file must start with: map <name> on <graph>")
    name, gmap = parse_map(text, graph, source)
    return LoadedMap(name, gmap, source, tuple(inputs))


def format_map(name: str, f: GraphMap, on: str | None = None) -> str:
    lines = [f"map {name} on {on or f.domain.name}"]
    for k, (eid, _, _) in enumerate(f.domain.edges):
        lines.append(f"{eid} -> {f.codomain.format_word(f.edge_images[k])}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# systems


@dataclass(frozen=True)
class LoadedSystem:
    name: str
    system: GraphOfRoses
    spec: RegluingSpec
    path: str
    inputs: tuple[str, ...]


_BEDGE_SHAPE = (
    "expected: bedge <id> <from> <to> espace <graphfile> attach_u <coverfile> "
    "attach_v <coverfile> phi <mapfile> phi_inv <mapfile> [exponent <n>]"
)


def load_system(path: str | Path) -> LoadedSystem:
    source = str(path)
    directory = os.path.dirname(source)
    rows = _declarations(Path(path).read_text())
    if not rows:
        raise ParseError(source, 1, "empty input, expected: system <name>")

    inputs: list[str] = [source]
    graph_cache: dict[str, MarkedGraph] = {}

    def sibling(token: str) -> str:
        target = os.path.normpath(os.path.join(directory, token))
        if target not in inputs:
            inputs.append(target)
        return target

    def fetch_graph(token: str, lineno: int) -> MarkedGraph:
        target = sibling(token)
        if target not in graph_cache:
            graph_cache[target] = parse_graph(_read(target, source, lineno), source=target)
        return graph_cache[target]

    name: str | None = None
    header_line = rows[0][0]
    bvertices: list[str] = []
    bedges: list[tuple[str, str, str]] = []
    roses: list[tuple[str, MarkedGraph]] = []
    attachments: list[tuple[str, Attachment, Attachment]] = []
    edge_spaces: list[tuple[str, MarkedGraph]] = []
    maps: list[tuple[str, GraphMap, GraphMap]] = []
    exponents: list[tuple[str, int]] = []
    rose_of: dict[str, MarkedGraph] = {}
    eseen: set[str] = set()

    for lineno, toks, _ in rows:
        kind = toks[0]
        if kind == "system":
            if name is not None:
                raise ParseError(source, lineno, "duplicate system declaration")
            if len(toks) != 2:
                raise ParseError(source, lineno, "expected: system <name>")
            name = toks[1]
            header_line = lineno
        elif name is None:
            raise ParseError(source, lineno, "file must start with: system <name>")
        elif kind == "bvertex":
            if len(toks) != 4 or toks[2] != "rose":
                raise ParseError(source, lineno, "expected: bvertex <id> rose <graphfile>")
            vid = toks[1]
            if vid in rose_of:
                raise ParseError(source, lineno, f"duplicate bvertex {vid!r}")
            rose = fetch_graph(toks[3], lineno)
            if not rose.is_rose:
                raise ParseError(source, lineno, f"graph in {toks[3]!r} is not a rose")
            rose_of[vid] = rose
            bvertices.append(vid)
            roses.append((vid, rose))
        elif kind == "bedge":
            if len(toks) not in (14, 16):
                raise ParseError(source, lineno, _BEDGE_SHAPE)
            if (toks[4], toks[6], toks[8], toks[10], toks[12]) != ("espace", "attach_u", "attach_v", "phi", "phi_inv"):
                raise ParseError(source, lineno, _BEDGE_SHAPE)
            eid, u, v = toks[1:4]
            if eid in eseen:
                raise ParseError(source, lineno, f"duplicate bedge {eid!r}")
            for end in (u, v):
                if end not in rose_of:
                    raise ParseError(source, lineno, f"bedge {eid!r} uses undeclared bvertex {end!r}")
            space = fetch_graph(toks[5], lineno)
            ends = []
            for end_vertex, token in ((u, toks[7]), (v, toks[9])):
                target = sibling(token)
                _, total, labels, bp, _ = _parse_cover_decl(
                    _read(target, source, lineno), rose_of[end_vertex], source=target
                )
                if total.vertices != space.vertices or total.edges != space.edges:
                    raise ParseError(
                        source, lineno,
                        f"cover {token!r} does not match the edge space of bedge {eid!r}",
                    )
                ends.append(Attachment(end_vertex, labels, bp))
            pair = []
            for token in (toks[11], toks[13]):
                target = sibling(token)
                _, gmap = parse_map(_read(target, source, lineno), space, source=target)
                pair.append(gmap)
            exponent = None
            if len(toks) == 16:
                if toks[-2] != "exponent":
                    raise ParseError(source, lineno, _BEDGE_SHAPE)
                try:
                    exponent = int(toks[-1])
                except ValueError as exc:
                    raise ParseError(source, lineno, f"exponent {toks[-1]!r} is not an integer") from exc
                if exponent < 1:
                    raise ParseError(source, lineno, "exponent must be a positive integer")
            eseen.add(eid)
            bedges.append((eid, u, v))
            edge_spaces.append((eid, space))
            attachments.append((eid, ends[0], ends[1]))
            maps.append((eid, pair[0], pair[1]))
            if exponent is not None:
                exponents.append((eid, exponent))
        else:
            raise ParseError(source, lineno, f"unknown declaration {kind!r} in a system file")

    if name is None:
        raise ParseError(source, header_line, "file must start with: system <name>")
    try:
        base = MarkedGraph(name, tuple(bvertices), tuple(bedges))
        system = GraphOfRoses(base, tuple(roses), tuple(edge_spaces), tuple(attachments), name=name)
        spec = RegluingSpec(tuple(maps), tuple(exponents))
    except ValueError as exc:
        raise ParseError(source, header_line, str(exc)) from exc
    return LoadedSystem(name, system, spec, source, tuple(inputs))
