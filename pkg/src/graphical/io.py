"""
Line-oriented text dump of diagrams.

    # glspike diagram
    window -10 10
    horizon 5.0
    gamma 0.5
    3 0.0123 spike
    -2 0.0817 leak
    ...

Times are written with repr() so a load reproduces the floats exactly.
"""
from pathlib import Path
from typing import Union

from ..errors import DiagramError
from ..randomness import MarkKind
from .diagram import Diagram

HEADER = "# glspike diagram"


def format_diagram(diagram: Diagram) -> str:
    lines = [
        HEADER,
        f"window {diagram.lo} {diagram.hi}",
        f"horizon {diagram.horizon!r}",
        f"gamma {diagram.gamma!r}",
    ]
    for site, time, kind in diagram.events():
        lines.append(f"{site} {time!r} {kind.label}")
    return "\n".join(lines) + "\n"


def parse_diagram(text: str) -> Diagram:
    """
    Parse the text format.

    Raises:
        DiagramError: on a malformed header or event line
    """
    header = {}
    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] in ("window", "horizon", "gamma"):
                header[parts[0]] = parts[1:]
            elif len(parts) == 3:
                events.append((int(parts[0]), float(parts[1]), MarkKind.from_label(parts[2])))
            else:
                raise ValueError(line)
        except (ValueError, IndexError) as e:
            raise DiagramError(f"line {lineno}: cannot parse '{line}' ({e})") from e

    missing = {"window", "horizon", "gamma"} - set(header)
    if missing:
        raise DiagramError(f"missing header fields: {sorted(missing)}")
    try:
        lo, hi = (int(v) for v in header["window"])
        horizon = float(header["horizon"][0])
        gamma = float(header["gamma"][0])
    except (ValueError, IndexError) as e:
        raise DiagramError(f"bad header: {e}") from e
    return Diagram.from_events(lo, hi, horizon, gamma, events)


def dump_diagram(diagram: Diagram, path: Union[str, Path]) -> Path:
    """Write a diagram to a text file and return its path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_diagram(diagram))
    return path


def load_diagram(path: Union[str, Path]) -> Diagram:
    """Read a diagram written by dump_diagram."""
    return parse_diagram(Path(path).read_text())
