"""Pattern induction over sentence paths.

A pattern is found by scanning a path for the most significant drop in the
right and left conditional continuation probabilities P_R and P_L. P_R at
position i is the conditional probability that a path matching the prefix
up to i-1 continues with the symbol at i; P_L mirrors it from the path end
going leftward. A drop in P_R flags the position *before* the drop as the
right end of a candidate span; a drop in P_L flags the position *after* it
as the left end. The span between the boundaries becomes a pattern: its
first and last symbols are the fixed left/right context and the middle
position generalizes to an equivalence class of every symbol seen between
that same context pair.

Probabilities are exact `fractions.Fraction` values so that comparisons
against thresholds and the multiply-back identity
``P_R(i) * count(prefix) == count(prefix + next)`` hold without rounding.

A drop qualifies when the ratio of consecutive probabilities falls below
``eta`` and a one-sided binomial test on the observed continuation counts
rejects, at level ``alpha``, the null hypothesis that the true ratio is at
least ``eta``. Candidate drops are ordered by drop depth (smallest ratio
first); the binomial test only gates eligibility, so setting ``alpha`` to
1.0 ablates it back to the plain ratio rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .corpus import Corpus
from .graph import Graph, Symbol, build_graph


class EmptyClassError(Exception):
    """No usable middle symbol exists for a (left, right) context pair."""


@dataclass
class InductionConfig:
    eta: float = 0.65
    alpha: float = 0.01
    sigma: float = 0.5
    min_support: int = 2
    max_iterations: int = 1000

    def validate(self):
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must be in (0, 1], got {self.eta}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0.0 < self.sigma <= 1.0:
            raise ValueError(f"sigma must be in (0, 1], got {self.sigma}")
        if self.min_support < 1:
            raise ValueError(f"min_support must be positive, got {self.min_support}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be positive, got {self.max_iterations}")
        return self

    @classmethod
    def from_file(cls, path) -> "InductionConfig":
        """Read a flat key=value config file (`eta=0.65`, one per line)."""
        values = {}
        with open(path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}: line {lineno}: expected key=value")
                key, _, raw = line.partition("=")
                values[key.strip()] = raw.strip()
        config = cls()
        for key, raw in values.items():
            if key in ("eta", "alpha", "sigma"):
                setattr(config, key, float(raw))
            elif key in ("min_support", "max_iterations"):
                setattr(config, key, int(raw))
            else:
                raise ValueError(f"{path}: unknown config key {key!r}")
        return config.validate()


@dataclass
class EquivalenceClass:
    id: int
    members: tuple[Symbol, ...]
    active: bool = True

    def symbol(self) -> Symbol:
        return Symbol.equiv(self.id)

    def member_set(self) -> frozenset[Symbol]:
        return frozenset(self.members)


@dataclass
class Pattern:
    """A (left context, equivalence slot, right context) unit.

    `slot` is the EquivRef symbol of the medial class, or None for the
    degenerate two-symbol pattern with no middle position.
    """

    id: int
    left: Symbol
    slot: Symbol | None
    right: Symbol
    surface: tuple[Symbol, ...]
    active: bool = True

    def symbol(self) -> Symbol:
        return Symbol.pattern(self.id)


@dataclass
class SignificanceScan:
    """Per-position P_R / P_L values for one path and the chosen span.

    right_probs[0] and left_probs[-1] are the scan anchors and are fixed
    at 1; chosen_span is a half-open (start, end) index pair or None.
    """

    path_id: int
    right_probs: list[Fraction]
    left_probs: list[Fraction]
    chosen_span: tuple[int, int] | None


class PatternRegistry:
    """Owns pattern/class identities and the member-claim table.

    Active classes stay pairwise disjoint: every symbol that is a member
    of an active class is recorded in `claims`, and later classes simply
    cannot take it. Retiring a class releases its claims.
    """

    def __init__(self):
        self.patterns: dict[int, Pattern] = {}
        self.classes: dict[int, EquivalenceClass] = {}
        self.claims: dict[Symbol, int] = {}
        self._next_pattern_id = 1
        self._next_class_id = 1

    def active_patterns(self) -> list[Pattern]:
        return [p for pid, p in sorted(self.patterns.items()) if p.active]

    def active_classes(self) -> list[EquivalenceClass]:
        return [c for cid, c in sorted(self.classes.items()) if c.active]

    def class_for(self, pattern: Pattern) -> EquivalenceClass | None:
        if pattern.slot is None:
            return None
        return self.classes[pattern.slot.value]

    def register_class(self, members) -> EquivalenceClass:
        members = tuple(members)
        if not members:
            raise EmptyClassError("equivalence class needs at least one member")
        for member in members:
            if member in self.claims:
                raise ValueError(f"{member} already belongs to class {self.claims[member]}")
        eq = EquivalenceClass(self._next_class_id, members)
        self._next_class_id += 1
        self.classes[eq.id] = eq
        for member in members:
            self.claims[member] = eq.id
        return eq

    def retire_class(self, cid: int):
        eq = self.classes[cid]
        eq.active = False
        for member in eq.members:
            if self.claims.get(member) == cid:
                del self.claims[member]

    def register_pattern(self, left: Symbol, slot: Symbol | None, right: Symbol) -> Pattern:
        surface = (left, right) if slot is None else (left, slot, right)
        pattern = Pattern(self._next_pattern_id, left, slot, right, surface)
        self._next_pattern_id += 1
        self.patterns[pattern.id] = pattern
        return pattern

    def retire_pattern(self, pid: int):
        self.patterns[pid].active = False

    def remap_symbol(self, old: Symbol, new: Symbol):
        """Replace `old` with `new` wherever active classes or active
        pattern surfaces still reference it (used when patterns merge)."""
        for eq in self.classes.values():
            if not eq.active or old not in eq.members:
                continue
            members = []
            for member in eq.members:
                member = new if member == old else member
                if member not in members:
                    members.append(member)
            eq.members = tuple(members)
            if self.claims.get(old) == eq.id:
                del self.claims[old]
            self.claims[new] = eq.id
        for pattern in self.patterns.values():
            if not pattern.active:
                continue
            if pattern.left == old or pattern.right == old:
                pattern.left = new if pattern.left == old else pattern.left
                pattern.right = new if pattern.right == old else pattern.right
                pattern.surface = tuple(new if s == old else s for s in pattern.surface)


# -- conditional probabilities ------------------------------------------


def right_probability(graph: Graph, symbols: list[Symbol], i: int) -> Fraction:
    """P_R at position i: chance that paths matching symbols[0:i] continue
    with symbols[i]. Zero when the prefix itself is unseen."""
    symbols = list(symbols)
    if not 1 <= i < len(symbols):
        raise ValueError(f"position {i} out of range for path of length {len(symbols)}")
    denom = graph.subpath_count(symbols[:i])
    if denom == 0:
        return Fraction(0)
    return Fraction(graph.subpath_count(symbols[: i + 1]), denom)


def left_probability(graph: Graph, symbols: list[Symbol], i: int) -> Fraction:
    """P_L at position i: chance that paths matching symbols[i+1:] were
    preceded by symbols[i]. Zero when the suffix itself is unseen."""
    symbols = list(symbols)
    if not 0 <= i < len(symbols) - 1:
        raise ValueError(f"position {i} out of range for path of length {len(symbols)}")
    denom = graph.subpath_count(symbols[i + 1 :])
    if denom == 0:
        return Fraction(0)
    return Fraction(graph.subpath_count(symbols[i:]), denom)


def _prefix_counts(graph: Graph, path: list[Symbol]) -> list[int]:
    """counts[i] = occurrences of path[0:i+1] as a contiguous subsequence."""
    matches = graph.occurrences_of(path[0])
    counts = [len(matches)]
    for offset in range(1, len(path)):
        matches = graph.extend_matches(matches, offset, path[offset])
        counts.append(len(matches))
    return counts


def _suffix_counts(graph: Graph, path: list[Symbol]) -> list[int]:
    """counts[i] = occurrences of path[i:] as a contiguous subsequence."""
    n = len(path)
    counts = [0] * n
    matches = graph.occurrences_of(path[n - 1])
    counts[n - 1] = len(matches)
    for i in range(n - 2, -1, -1):
        matches = [(sid, pos - 1) for sid, pos in matches if pos >= 1 and graph.paths[sid][pos - 1] == path[i]]
        counts[i] = len(matches)
    return counts


def binomial_cdf(k: int, n: int, p: float) -> float:
    """P[X <= k] for X ~ Binomial(n, p), computed in log space."""
    if k < 0:
        return 0.0
    if k >= n:
        return 1.0
    if p <= 0.0:
        return 1.0
    if p >= 1.0:
        return 0.0
    log_p, log_q = math.log(p), math.log1p(-p)
    lg_n = math.lgamma(n + 1)
    logs = [
        lg_n - math.lgamma(j + 1) - math.lgamma(n - j + 1) + j * log_p + (n - j) * log_q
        for j in range(k + 1)
    ]
    peak = max(logs)
    return min(1.0, math.exp(peak) * sum(math.exp(l - peak) for l in logs))


def drop_is_significant(k: int, n: int, p_prev: Fraction, eta: float, alpha: float) -> bool:
    """One-sided binomial test of an observed continuation drop.

    Under the no-drop null the continuation count k out of n trials has
    success probability at least eta * P(previous position); reject when
    the lower tail is below alpha.
    """
    p0 = eta * float(p_prev)
    return binomial_cdf(k, n, p0) < alpha


def scan_significance(graph: Graph, path_id: int, config: InductionConfig) -> SignificanceScan:
    """Compute P_R / P_L along a path and pick the most significant span.

    The right boundary comes from the deepest qualifying P_R drop (ties:
    the later position, giving the longer span), the left boundary from
    the deepest qualifying P_L drop (ties: the earlier position). A
    missing boundary falls back to the path interior edge, but at least
    one real drop is required. The span must span >= 2 symbols, never
    covers Begin/End, and must occur at least min_support times.
    """
    path = graph.paths[path_id]
    n = len(path)
    prefix = _prefix_counts(graph, path)
    suffix = _suffix_counts(graph, path)
    right_probs = [Fraction(1)] + [Fraction(prefix[i], prefix[i - 1]) for i in range(1, n)]
    left_probs = [Fraction(suffix[i], suffix[i + 1]) for i in range(n - 1)] + [Fraction(1)]

    best_right = None  # (ratio, -i)
    for i in range(2, n):
        if right_probs[i - 1] == 0:
            continue
        ratio = right_probs[i] / right_probs[i - 1]
        if ratio < config.eta and drop_is_significant(
            prefix[i], prefix[i - 1], right_probs[i - 1], config.eta, config.alpha
        ):
            key = (ratio, -i)
            if best_right is None or key < best_right:
                best_right = key
    best_left = None  # (ratio, i)
    for i in range(0, n - 2):
        if left_probs[i + 1] == 0:
            continue
        ratio = left_probs[i] / left_probs[i + 1]
        if ratio < config.eta and drop_is_significant(
            suffix[i], suffix[i + 1], left_probs[i + 1], config.eta, config.alpha
        ):
            key = (ratio, i)
            if best_left is None or key < best_left:
                best_left = key

    chosen = None
    if best_right is not None or best_left is not None:
        right_end = -best_right[1] - 1 if best_right is not None else n - 2
        left_end = best_left[1] + 1 if best_left is not None else 1
        span = (left_end, right_end + 1)
        if span[1] - span[0] >= 2 and graph.subpath_count(path[span[0] : span[1]]) >= config.min_support:
            chosen = span
    return SignificanceScan(path_id, right_probs, left_probs, chosen)


def detect_significant_pattern(graph: Graph, path_id: int, config: InductionConfig) -> tuple[int, int] | None:
    return scan_significance(graph, path_id, config).chosen_span


# -- equivalence classes and the main loop -------------------------------


def extract_equivalence_class(
    graph: Graph,
    left: Symbol,
    right: Symbol,
    registry: PatternRegistry | None = None,
) -> EquivalenceClass:
    """Collect every symbol occurring between `left` and `right` into a
    fresh equivalence class.

    Symbols already claimed by an active class are skipped so that active
    classes stay disjoint. Raises EmptyClassError when nothing (unclaimed)
    occurs in that context.
    """
    if registry is None:
        registry = PatternRegistry()
    middles = []
    for sid, pos in graph.occurrences_of(left):
        path = graph.paths[sid]
        if pos + 2 < len(path) and path[pos + 2] == right:
            middle = path[pos + 1]
            if middle not in middles:
                middles.append(middle)
    middles = [m for m in middles if m not in registry.claims]
    if not middles:
        raise EmptyClassError(f"no unclaimed symbol occurs between {left} and {right}")
    return registry.register_class(middles)


def find_pattern_occurrences(graph: Graph, surface_matcher: list) -> list[tuple[int, int, int]]:
    """Leftmost non-overlapping matches of a surface matcher, every path."""
    width = len(surface_matcher)
    occurrences = []
    for sid in sorted(graph.paths):
        path = graph.paths[sid]
        pos = 1
        while pos <= len(path) - 1 - width:
            hit = True
            for offset, matcher in enumerate(surface_matcher):
                actual = path[pos + offset]
                ok = actual in matcher if isinstance(matcher, (set, frozenset)) else actual == matcher
                if not ok:
                    hit = False
                    break
            if hit:
                occurrences.append((sid, pos, pos + width))
                pos += width
            else:
                pos += 1
    return occurrences


def induce(corpus: Corpus, config: InductionConfig) -> tuple[Graph, list[Pattern], list[EquivalenceClass]]:
    """Run the full induction loop over a corpus.

    Paths are visited in ascending sentence-id order. Every detected span
    is reduced to a three-symbol window (the pattern keeps exactly one
    left context, one slot and one right context vertex; longer spans use
    their leftmost window), its medial equivalence class is extracted, a
    pattern vertex replaces every occurrence of (left, member, right),
    and the new pattern is generalized against the existing ones. The
    loop ends after a full pass without progress or after max_iterations
    passes. Returns the rewired graph and all patterns/classes including
    superseded ones (flagged inactive).
    """
    from . import generalization

    config.validate()
    graph = build_graph(corpus)
    registry = PatternRegistry()
    for _ in range(config.max_iterations):
        progress = False
        for sid in sorted(graph.paths):
            span = detect_significant_pattern(graph, sid, config)
            if span is None:
                continue
            start, end = span
            if end - start > 3:
                end = start + 3
            path = graph.paths[sid]
            left, right = path[start], path[end - 1]
            if end - start == 3:
                try:
                    eq = extract_equivalence_class(graph, left, right, registry)
                except EmptyClassError:
                    continue
                surface_matcher = [left, eq.member_set(), right]
                pattern = registry.register_pattern(left, eq.symbol(), right)
            else:
                surface_matcher = [left, right]
                pattern = registry.register_pattern(left, None, right)
            occurrences = find_pattern_occurrences(graph, surface_matcher)
            graph.rewire(occurrences, pattern.symbol(), surface_matcher)
            progress = True
            generalization.generalize_new_pattern(graph, registry, pattern, config.sigma)
        if not progress:
            break
    return graph, [p for _, p in sorted(registry.patterns.items())], [c for _, c in sorted(registry.classes.items())]
