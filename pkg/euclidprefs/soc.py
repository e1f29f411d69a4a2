"""
PrefLib .soc ingestion and export.

Accepted grammar (strict orders, complete):
- Lines starting with "#" are metadata. Recognised keys:
  "# NUMBER ALTERNATIVES: m", "# NUMBER VOTERS: n",
  "# ALTERNATIVE NAME k: name". Everything else after "#" is ignored.
- Every other nonempty line is "<count>: <id>,<id>,...", ids 1-based.
- Braces (ties) and missing or repeated ids are rejected.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import regex

from .election import Election
from .errors import Malformed, TieOrIncomplete

logger = logging.getLogger(__name__)

# Metadata lines we care about
ALTERNATIVES_PATTERN = regex.compile(r"^#\s*NUMBER\s+ALTERNATIVES\s*:\s*(\d+)\s*$", regex.IGNORECASE)
VOTERS_PATTERN = regex.compile(r"^#\s*NUMBER\s+VOTERS\s*:\s*(\d+)\s*$", regex.IGNORECASE)
NAME_PATTERN = regex.compile(r"^#\s*ALTERNATIVE\s+NAME\s+(\d+)\s*:\s*(.*?)\s*$", regex.IGNORECASE)

# "<count>: <id>,<id>,..."
RANKING_PATTERN = regex.compile(r"^\s*(\d+)\s*:\s*(\d+(?:\s*,\s*\d+)*)\s*$")


def parse_soc(text: str) -> Election:
    """
    Parse .soc text into an Election.

    Args:
        text: Full contents of a .soc file

    Returns:
        Election with candidates in file order and equal rankings collapsed

    Example:
        >>> e = parse_soc("# NUMBER ALTERNATIVES: 3\\n1: 1,2,3\\n2: 3,2,1\\n")
        >>> e.counts
        (1, 2)
    """
    declared_m: Optional[int] = None
    declared_n: Optional[int] = None
    names: Dict[int, str] = {}
    rankings: List[Tuple[int, ...]] = []
    counts: List[int] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if (match := ALTERNATIVES_PATTERN.match(line)):
                declared_m = int(match.group(1))
            elif (match := VOTERS_PATTERN.match(line)):
                declared_n = int(match.group(1))
            elif (match := NAME_PATTERN.match(line)):
                names[int(match.group(1))] = match.group(2)
            continue

        if "{" in line or "}" in line:
            raise TieOrIncomplete("ties are not supported in .soc input", line=lineno)
        match = RANKING_PATTERN.match(line)
        if not match:
            raise Malformed(f"expected '<count>: <id>,<id>,...', got {line!r}", line=lineno)

        count = int(match.group(1))
        if count < 1:
            raise Malformed(f"multiplicity must be positive, got {count}", line=lineno)
        ids = tuple(int(tok) for tok in regex.split(r"\s*,\s*", match.group(2)))

        m = declared_m if declared_m is not None else (len(rankings[0]) if rankings else len(ids))
        if len(ids) != m or sorted(ids) != list(range(1, m + 1)):
            raise TieOrIncomplete(f"ranking {list(ids)} is not a strict order of candidates 1..{m}", line=lineno)
        rankings.append(tuple(i - 1 for i in ids))
        counts.append(count)

    if declared_m is None:
        if not rankings:
            raise Malformed("no rankings and no '# NUMBER ALTERNATIVES' header")
        declared_m = len(rankings[0])
    if declared_n is not None and declared_n != sum(counts):
        logger.debug("header declares %d voters, file lists %d", declared_n, sum(counts))

    candidates = [names.get(k, str(k)) for k in range(1, declared_m + 1)]
    if len(set(candidates)) != len(candidates):
        raise Malformed(f"alternative names are not unique: {candidates}")
    return Election.from_rankings(candidates, rankings, counts)


def load_soc(path: Union[str, Path], encoding: str = "utf-8") -> Election:
    """Read and parse a .soc file."""
    with open(path, "r", encoding=encoding) as f:
        return parse_soc(f.read())


def dump_soc(e: Election, title: str = "") -> str:
    """Render an election in the grammar parse_soc accepts."""
    lines = []
    if title:
        lines.append(f"# TITLE: {title}")
    lines.append("# DATA TYPE: soc")
    lines.append(f"# NUMBER ALTERNATIVES: {e.m}")
    lines.append(f"# NUMBER VOTERS: {e.total_voters}")
    lines.append(f"# NUMBER UNIQUE ORDERS: {e.n}")
    for k, name in enumerate(e.candidates, start=1):
        lines.append(f"# ALTERNATIVE NAME {k}: {name}")
    for v, count in zip(e.votes, e.counts):
        lines.append(f"{count}: " + ",".join(str(c + 1) for c in v.ranking))
    return "\n".join(lines) + "\n"


def save_soc(e: Election, path: Union[str, Path], title: str = "") -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dump_soc(e, title=title))
