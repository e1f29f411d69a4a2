"""
Equivalence-preserving reduction rules.

- Block decomposition: maximal chain of position intervals, ending at the
  last position, each holding the same candidates in every vote
- Copied-block removal (subsumes "ranked last everywhere" and tail blocks):
  a block of ≤ 3 candidates with an order-isomorphic copy elsewhere can go
- Adjacent-pair removal: b always directly above c and some a always above
  b, then b can go

Each fired rule is recorded in a ReductionTrace that replays on the
original election with its preconditions re-checked.
"""

import logging
from dataclasses import dataclass, field
from itertools import permutations
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from .election import Election, restrict
from .errors import CorruptCertificate, SubsetTooLarge

logger = logging.getLogger(__name__)

RULE_COPY = "1++"
RULE_ADJACENT = "2"

# How a YES answer on the reduced election lifts back over each rule
LIFTING = {
    RULE_COPY: "copy: place the removed block beside its copy after a homothety",
    RULE_ADJACENT: "adjacent-pair: place b next to c between a and c",
}


@dataclass(frozen=True)
class Block:
    """Positions start..end (1-based, inclusive) hold `candidates` in every vote."""
    start: int
    end: int
    candidates: FrozenSet[int]

    @property
    def size(self) -> int:
        return self.end - self.start + 1


@dataclass
class BlockDecomposition:
    """Consecutive blocks, first to last; the last one ends at |C|."""
    blocks: List[Block]
    k: int

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)


@dataclass
class ReductionStep:
    """One fired rule, with candidates recorded by name."""
    rule: str
    removed: Tuple[str, ...]
    copy_map: Dict[str, str] = field(default_factory=dict)  # rule 1++: removed → copy
    witness: Dict[str, str] = field(default_factory=dict)   # rule 2: roles a and c

    @property
    def lifting(self) -> str:
        return LIFTING.get(self.rule, "")

    def to_dict(self) -> dict:
        data = {"rule": self.rule, "removed": list(self.removed), "lifting": self.lifting}
        if self.copy_map:
            data["copy_map"] = dict(self.copy_map)
        if self.witness:
            data["witness"] = dict(self.witness)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ReductionStep":
        try:
            return cls(
                rule=str(data["rule"]),
                removed=tuple(str(c) for c in data["removed"]),
                copy_map={str(k): str(v) for k, v in data.get("copy_map", {}).items()},
                witness={str(k): str(v) for k, v in data.get("witness", {}).items()},
            )
        except (KeyError, TypeError, AttributeError) as e:
            raise CorruptCertificate(f"malformed reduction step {data!r}") from e


@dataclass
class ReductionTrace:
    steps: List[ReductionStep] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    def to_list(self) -> List[dict]:
        return [s.to_dict() for s in self.steps]

    @classmethod
    def from_list(cls, data: Iterable[dict]) -> "ReductionTrace":
        return cls([ReductionStep.from_dict(d) for d in data])

    def replay(self, e: Election, check: bool = True) -> Election:
        """
        Re-apply every step to `e`.

        With check=True each step's rule preconditions are verified on the
        election it is applied to; a failed check raises CorruptCertificate.
        """
        for n, step in enumerate(self.steps, start=1):
            unknown = [c for c in step.removed if c not in e.candidates]
            if unknown:
                raise CorruptCertificate(f"step {n}: candidates {unknown} are not in the election")
            if check:
                problem = check_step(e, step)
                if problem:
                    raise CorruptCertificate(f"step {n} ({step.rule}): {problem}")
            removed = {e.id_of(c) for c in step.removed}
            e = restrict(e, [c for c in range(e.m) if c not in removed])
        return e


# =============================================================================
# BLOCKS AND COPIES
# =============================================================================

def cut_positions(e: Election) -> List[int]:
    """Positions p (0..m) where the first p candidates form the same set in every vote."""
    if not e.votes:
        return list(range(e.m + 1))
    cuts = [0]
    prefixes = [0] * e.n
    for p in range(e.m):
        for i, v in enumerate(e.votes):
            prefixes[i] |= 1 << v.ranking[p]
        if all(x == prefixes[0] for x in prefixes):
            cuts.append(p + 1)
    return cuts


def maximal_block_decomposition(e: Election, k: int) -> BlockDecomposition:
    """
    The unique k-block decomposition with the most blocks.

    Walks from the last position down, always taking the shortest block,
    which is the gap to the nearest cut position below.

    Example:
        One vote abcde with k=3 gives five singleton blocks.
    """
    if k < 1:
        raise ValueError(f"block size cap must be positive, got {k}")
    cuts = cut_positions(e)
    reference = e.votes[0].ranking if e.votes else tuple(range(e.m))
    blocks: List[Block] = []
    right = e.m
    idx = len(cuts) - 1  # cuts[idx] == right
    while right > 0 and idx > 0:
        left = cuts[idx - 1]
        if right - left > k:
            break
        blocks.append(Block(left + 1, right, frozenset(reference[left:right])))
        right = left
        idx -= 1
    blocks.reverse()
    return BlockDecomposition(blocks, k)


def find_copy(e: Election, s: Iterable[int]) -> Optional[Dict[int, int]]:
    """
    An order-preserving injective map from `s` into the other candidates.

    Returns:
        Dict candidate → copy candidate, or None
    """
    s = sorted(set(s))
    if not 1 <= len(s) <= 3:
        raise SubsetTooLarge(f"copies are searched for 1 to 3 candidates, got {len(s)}")
    outside = [c for c in range(e.m) if c not in s]
    if len(outside) < len(s):
        return None
    if len(s) == 1:
        return {s[0]: outside[0]}

    pairs = [(a, b) for a in s for b in s if a < b]
    first = e.votes[0] if e.votes else None
    for image in permutations(outside, len(s)):
        f = dict(zip(s, image))
        if first is not None and any(first.prefers(a, b) != first.prefers(f[a], f[b]) for a, b in pairs):
            continue
        if all(v.prefers(a, b) == v.prefers(f[a], f[b]) for v in e.votes for a, b in pairs):
            return f
    return None


def _is_copy(e: Election, f: Dict[int, int]) -> bool:
    images = list(f.values())
    if len(set(images)) != len(images) or set(images) & set(f):
        return False
    return all(
        v.prefers(a, b) == v.prefers(f[a], f[b])
        for v in e.votes for a in f for b in f if a != b
    )


# =============================================================================
# RULES
# =============================================================================

def apply_rr1pp(e: Election) -> Optional[Tuple[Election, ReductionStep]]:
    """Remove the last block of the maximal 3-block decomposition that has a copy."""
    if e.m < 2:
        return None
    for block in reversed(maximal_block_decomposition(e, 3).blocks):
        if e.m - block.size < block.size:
            continue
        f = find_copy(e, block.candidates)
        if f is None:
            continue
        step = ReductionStep(
            rule=RULE_COPY,
            removed=tuple(e.name(c) for c in sorted(block.candidates)),
            copy_map={e.name(a): e.name(b) for a, b in sorted(f.items())},
        )
        return restrict(e, [c for c in range(e.m) if c not in block.candidates]), step
    return None


def _adjacent_pair(e: Election) -> Optional[Tuple[int, int, int]]:
    """First (b, c) with c directly below b in every vote and some a above b everywhere."""
    if not e.votes:
        return None
    first = e.votes[0]
    for b in range(e.m):
        ib = first.index(b)
        if ib == e.m - 1:
            continue
        c = first.ranking[ib + 1]
        if not all(v.index(c) == v.index(b) + 1 for v in e.votes):
            continue
        above = set(first.ranking[:ib])
        for v in e.votes[1:]:
            above &= set(v.ranking[:v.index(b)])
        if above:
            return min(above), b, c
    return None


def apply_rr2(e: Election) -> Optional[Tuple[Election, ReductionStep]]:
    """Remove b when c always sits directly below it and some a is always above it."""
    if e.m < 3:
        return None
    found = _adjacent_pair(e)
    if found is None:
        return None
    a, b, c = found
    step = ReductionStep(
        rule=RULE_ADJACENT,
        removed=(e.name(b),),
        witness={"a": e.name(a), "c": e.name(c)},
    )
    return restrict(e, [x for x in range(e.m) if x != b]), step


def reduce_fixpoint(e: Election) -> Tuple[Election, ReductionTrace]:
    """Apply copied-block removal, then adjacent-pair removal, until neither fires."""
    trace = ReductionTrace()
    while True:
        result = apply_rr1pp(e) or apply_rr2(e)
        if result is None:
            return e, trace
        e, step = result
        logger.info("rule %s removed %s", step.rule, ", ".join(step.removed))
        trace.steps.append(step)


def check_step(e: Election, step: ReductionStep) -> str:
    """Why `step` may not fire on `e`; empty string when it may."""
    removed = {e.id_of(c) for c in step.removed}

    if step.rule == RULE_COPY:
        blocks = {b.candidates for b in maximal_block_decomposition(e, 3).blocks}
        if frozenset(removed) not in blocks:
            return "removed candidates are not a block of the maximal 3-block decomposition"
        try:
            f = {e.id_of(a): e.id_of(b) for a, b in step.copy_map.items()}
        except ValueError:
            return "copy map names unknown candidates"
        if set(f) != removed:
            return "copy map does not cover the removed block"
        if not _is_copy(e, f):
            return "copy map is not order-isomorphic in every vote"
        return ""

    if step.rule == RULE_ADJACENT:
        if len(removed) != 1 or set(step.witness) != {"a", "c"}:
            return "adjacent-pair step must remove one candidate and name a and c"
        (b,) = removed
        try:
            a, c = e.id_of(step.witness["a"]), e.id_of(step.witness["c"])
        except ValueError:
            return "witness names unknown candidates"
        if len({a, b, c}) != 3:
            return "a, b and c must be distinct"
        for v in e.votes:
            if v.index(c) != v.index(b) + 1:
                return f"{step.witness['c']} is not directly below {step.removed[0]} in every vote"
            if not v.prefers(a, b):
                return f"{step.witness['a']} is not above {step.removed[0]} in every vote"
        return ""

    return f"Unknown rule: {step.rule}. Available: {RULE_COPY}, {RULE_ADJACENT}"


def trivial_rule(e: Election) -> Optional[str]:
    """The rule that makes `e` 2-Euclidean outright, or None."""
    if e.m <= 3:
        return "|C| <= 3"
    if e.n <= 2:
        return "|V| <= 2"
    if e.n <= 3 and e.m <= 7:
        return "|V| <= 3 and |C| <= 7"
    return None
