"""Minimal ASCII PLY reading shared by the point-cloud and mesh loaders."""

from __future__ import annotations

from dataclasses import dataclass, field


class PlyParseError(ValueError):
    """Raised when an ASCII PLY file cannot be parsed; names the bad line."""


@dataclass
class PlyElement:
    name: str
    count: int
    properties: list[tuple[str, str]] = field(default_factory=list)  # (type, name)
    list_properties: list[tuple[str, str, str]] = field(default_factory=list)


@dataclass
class PlyHeader:
    elements: list[PlyElement]
    data_start: int  # line number (1-based) of the first data line

    def element(self, name: str) -> PlyElement | None:
        for el in self.elements:
            if el.name == name:
                return el
        return None


def read_ascii_ply(path) -> tuple[PlyHeader, list[list[str]]]:
    """Parse header and return (header, data line tokens).

    Only `format ascii 1.0` files are accepted. Data lines are returned as
    whitespace-split token lists in file order, comments stripped.
    """
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != "ply":
        raise PlyParseError("line 1: expected 'ply' magic")
    header = PlyHeader(elements=[], data_start=0)
    saw_format = False
    current: PlyElement | None = None
    idx = 1
    while idx < len(lines):
        lineno = idx + 1
        tokens = lines[idx].split()
        idx += 1
        if not tokens or tokens[0] == "comment":
            continue
        kw = tokens[0]
        if kw == "format":
            if tokens[1:3] != ["ascii", "1.0"]:
                raise PlyParseError(f"line {lineno}: only 'format ascii 1.0' is supported")
            saw_format = True
        elif kw == "element":
            if len(tokens) != 3:
                raise PlyParseError(f"line {lineno}: malformed element declaration")
            try:
                count = int(tokens[2])
            except ValueError:
                raise PlyParseError(f"line {lineno}: element count is not an integer") from None
            if count < 0:
                raise PlyParseError(f"line {lineno}: negative element count")
            current = PlyElement(name=tokens[1], count=count)
            header.elements.append(current)
        elif kw == "property":
            if current is None:
                raise PlyParseError(f"line {lineno}: property before any element")
            if len(tokens) == 3:
                current.properties.append((tokens[1], tokens[2]))
            elif len(tokens) == 5 and tokens[1] == "list":
                current.list_properties.append((tokens[2], tokens[3], tokens[4]))
            else:
                raise PlyParseError(f"line {lineno}: malformed property declaration")
        elif kw == "end_header":
            if not saw_format:
                raise PlyParseError(f"line {lineno}: end_header before format declaration")
            header.data_start = lineno + 1
            break
        else:
            raise PlyParseError(f"line {lineno}: unknown header keyword {kw!r}")
    else:
        raise PlyParseError(f"line {len(lines)}: missing end_header")

    data = [line.split() for line in lines[header.data_start - 1 :]]
    return header, data
