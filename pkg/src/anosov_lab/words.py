"""Word combinatorics: reduced words, cone types, the geodesic automaton.

Letters are integers 1..2n; letter 2i-1 is the i-th generator and 2i its
inverse.  Built-in exact support covers free groups F_n, whose cone types are
determined by the last letter; other groups enter through automaton files in
the documented text format.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParseError, UnknownLetter, ValidationError

INITIAL_STATE = "e"


@dataclass(frozen=True)
class GeneratorAlphabet:
    """Symmetric alphabet on n free generators."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("alphabet needs at least one generator")

    @property
    def letters(self) -> range:
        return range(1, 2 * self.n + 1)

    def inverse(self, letter: int) -> int:
        self.check(letter)
        return letter + 1 if letter % 2 == 1 else letter - 1

    def check(self, letter: int):
        if not 1 <= letter <= 2 * self.n:
            raise UnknownLetter(f"letter {letter} outside alphabet 1..{2 * self.n}")

    def generator_letter(self, i: int) -> int:
        """Letter index of generator i (1-based)."""
        return 2 * i - 1


def reduce(alphabet: GeneratorAlphabet, letters) -> "Word":
    """Free reduction: cancel adjacent letter/inverse pairs.  Idempotent."""
    stack: list[int] = []
    for l in letters:
        l = int(l)
        alphabet.check(l)
        if stack and stack[-1] == alphabet.inverse(l):
            stack.pop()
        else:
            stack.append(l)
    return Word(tuple(stack))


@dataclass(frozen=True)
class Word:
    """A reduced word; its length equals the word-metric norm."""

    letters: tuple[int, ...] = ()

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def inverse(self, alphabet: GeneratorAlphabet) -> "Word":
        return Word(tuple(alphabet.inverse(l) for l in reversed(self.letters)))

    def concat(self, other: "Word", alphabet: GeneratorAlphabet) -> "Word":
        """Group product, reduced."""
        return reduce(alphabet, self.letters + other.letters)

    def is_reduced(self, alphabet: GeneratorAlphabet) -> bool:
        return all(
            self.letters[i + 1] != alphabet.inverse(self.letters[i])
            for i in range(len(self.letters) - 1)
        )

    def __repr__(self):
        return f"Word{self.letters}"


class GeodesicAutomaton:
    """Deterministic labelled graph whose paths from the initial state spell
    exactly the geodesic words."""

    def __init__(self, alphabet: GeneratorAlphabet, states, initial, edges):
        self.alphabet = alphabet
        self.states = tuple(states)
        self.initial = initial
        self.edges = dict(edges)  # (state, letter) -> state
        self._validate()
        self._successors = {s: [] for s in self.states}
        for (src, letter), dst in sorted(self.edges.items(), key=lambda kv: kv[0][1]):
            self._successors[src].append((letter, dst))
        self._recurrent = self._compute_recurrent()

    def _validate(self):
        state_set = set(self.states)
        if len(state_set) != len(self.states):
            raise ValidationError("duplicate state declarations")
        if self.initial not in state_set:
            raise ValidationError(f"initial state {self.initial!r} not declared")
        for (src, letter), dst in self.edges.items():
            if src not in state_set:
                raise ValidationError(f"edge from undeclared state {src!r}")
            if dst not in state_set:
                raise ValidationError(f"edge into undeclared state {dst!r}")
            try:
                self.alphabet.check(letter)
            except UnknownLetter as exc:
                raise ValidationError(f"edge ({src!r}, {letter}, {dst!r}): {exc}")

    def _compute_recurrent(self) -> frozenset:
        # recurrent = lies on some directed cycle; automata are small, so a
        # plain reachability check per state is fine
        recurrent = set()
        for s in self.states:
            frontier = {dst for (src, _), dst in self.edges.items() if src == s}
            seen = set(frontier)
            while frontier:
                if s in seen:
                    break
                frontier = {
                    dst
                    for (src, _), dst in self.edges.items()
                    if src in frontier and dst not in seen
                }
                seen |= frontier
            if s in seen:
                recurrent.add(s)
        return frozenset(recurrent)

    # --- structure ---

    def successors(self, state):
        """Out-edges of `state`, sorted by letter."""
        return list(self._successors[state])

    def out_degree(self, state) -> int:
        return len(self._successors[state])

    def step(self, state, letter: int):
        """Target of the (state, letter) edge, or None if forbidden."""
        return self.edges.get((state, letter))

    def state_of(self, letters):
        """State reached reading `letters` from the initial state, or None."""
        s = self.initial
        for l in letters:
            s = self.edges.get((s, int(l)))
            if s is None:
                return None
        return s

    def accepts(self, letters, start=None) -> bool:
        s = self.initial if start is None else start
        for l in letters:
            s = self.edges.get((s, int(l)))
            if s is None:
                return False
        return True

    @property
    def recurrent_states(self) -> frozenset:
        return self._recurrent

    def recurrent_subautomaton(self) -> "GeodesicAutomaton":
        """The maximal recurrent subgraph, with a fresh initial state.

        The initial state is the lexicographically smallest recurrent state
        (the subgraph has no distinguished origin).
        """
        states = sorted(self._recurrent, key=str)
        if not states:
            raise ValidationError("automaton has no recurrent states")
        edges = {
            (src, letter): dst
            for (src, letter), dst in self.edges.items()
            if src in self._recurrent and dst in self._recurrent
        }
        return GeodesicAutomaton(self.alphabet, states, states[0], edges)

    def path_count(self, k: int) -> int:
        """Number of length-k paths from the initial state (= |sphere(k)|)."""
        counts = {s: 1 if s == self.initial else 0 for s in self.states}
        for _ in range(k):
            nxt = {s: 0 for s in self.states}
            for (src, _), dst in self.edges.items():
                if counts[src]:
                    nxt[dst] += counts[src]
            counts = nxt
        return sum(counts.values())

    def canonical_form(self):
        """(n, state count, edge triples) under BFS numbering from the initial
        state; two automata are structurally equal iff these coincide."""
        numbering = {self.initial: 0}
        queue = [self.initial]
        while queue:
            s = queue.pop(0)
            for letter, dst in self._successors[s]:
                if dst not in numbering:
                    numbering[dst] = len(numbering)
                    queue.append(dst)
        for s in sorted(set(self.states) - set(numbering), key=str):
            numbering[s] = len(numbering)
        edges = sorted(
            (numbering[src], letter, numbering[dst])
            for (src, letter), dst in self.edges.items()
        )
        return (self.alphabet.n, len(self.states), tuple(edges))

    def __eq__(self, other):
        if not isinstance(other, GeodesicAutomaton):
            return NotImplemented
        return self.canonical_form() == other.canonical_form()

    def __repr__(self):
        return (
            f"GeodesicAutomaton(n={self.alphabet.n}, states={len(self.states)}, "
            f"edges={len(self.edges)})"
        )


def build_geodesic_automaton(alphabet: GeneratorAlphabet) -> GeodesicAutomaton:
    """Geodesic automaton of the free group F_n.

    Cone types are determined by the last letter, so there are exactly 2n+1
    states: the identity cone type plus one per letter.
    """
    states = [INITIAL_STATE] + [str(l) for l in alphabet.letters]
    edges = {}
    for l in alphabet.letters:
        edges[(INITIAL_STATE, l)] = str(l)
    for s in alphabet.letters:
        for l in alphabet.letters:
            if l != alphabet.inverse(s):
                edges[(str(s), l)] = str(l)
    return GeodesicAutomaton(alphabet, states, INITIAL_STATE, edges)


def cone_type(alphabet: GeneratorAlphabet, w: Word) -> str:
    """Cone-type state of w: the last letter for free groups, 'e' for the
    identity.  eta lies in the cone of w iff the automaton reads eta from
    this state."""
    if len(w) == 0:
        return INITIAL_STATE
    alphabet.check(w.letters[-1])
    return str(w.letters[-1])


def in_cone(alphabet: GeneratorAlphabet, state: str, eta: Word) -> bool:
    """Membership predicate eta in C(gamma) for cone-type `state`."""
    if len(eta) == 0:
        return True
    if state == INITIAL_STATE:
        return True
    return eta.letters[0] != alphabet.inverse(int(state))


def sphere_size(alphabet: GeneratorAlphabet, k: int) -> int:
    if k < 0:
        raise ValueError("radius must be non-negative")
    if k == 0:
        return 1
    m = 2 * alphabet.n
    return m * (m - 1) ** (k - 1)


def ball_size(alphabet: GeneratorAlphabet, R: int) -> int:
    return sum(sphere_size(alphabet, k) for k in range(R + 1))


def sphere(alphabet: GeneratorAlphabet, R: int):
    """All reduced words of length exactly R, in lexicographic order."""
    if R < 0:
        raise ValueError("radius must be non-negative")
    if R == 0:
        yield Word(())
        return
    letters = list(alphabet.letters)

    def rec(prefix):
        if len(prefix) == R:
            yield Word(tuple(prefix))
            return
        forbidden = alphabet.inverse(prefix[-1]) if prefix else None
        for l in letters:
            if l != forbidden:
                prefix.append(l)
                yield from rec(prefix)
                prefix.pop()

    yield from rec([])


def sphere_letters(alphabet: GeneratorAlphabet, R: int) -> np.ndarray:
    """Letters of sphere(R) stacked as an (N, R) int8 array, lex order."""
    if R == 0:
        return np.zeros((1, 0), dtype=np.int8)
    m = 2 * alphabet.n
    cur = np.arange(1, m + 1, dtype=np.int8).reshape(-1, 1)
    for _ in range(R - 1):
        blocks = []
        for l in range(1, m + 1):
            inv = l + 1 if l % 2 == 1 else l - 1
            allowed = np.arange(1, m + 1, dtype=np.int8)
            allowed = allowed[allowed != inv]
            rows = cur[cur[:, -1] == l]
            ext = np.repeat(rows, allowed.size, axis=0)
            tail = np.tile(allowed, rows.shape[0]).reshape(-1, 1)
            blocks.append(np.hstack([ext, tail]))
        cur = np.vstack(blocks)
        order = np.lexsort(cur.T[::-1])
        cur = cur[order]
    return cur


@dataclass(frozen=True)
class BoundaryRay:
    """Finite prefix of a geodesic ray, deep enough for the task at hand.

    `pattern` marks periodic rays, whose boundary data admits an exact
    eigenvector description.
    """

    letters: tuple[int, ...]
    seed: int | None = None
    pattern: tuple[int, ...] | None = None

    def __post_init__(self):
        if len(self.letters) == 0:
            raise ValidationError("a ray needs at least one letter")

    @property
    def depth(self) -> int:
        return len(self.letters)

    def prefix(self, n: int) -> Word:
        if n > len(self.letters):
            raise ValueError(f"ray materialized to depth {len(self.letters)} < {n}")
        return Word(self.letters[:n])

    @classmethod
    def periodic(cls, alphabet: GeneratorAlphabet, pattern, depth: int) -> "BoundaryRay":
        """Ray repeating `pattern`; the pattern must be cyclically reduced."""
        pattern = tuple(int(l) for l in pattern)
        w = Word(pattern)
        if not w.is_reduced(alphabet):
            raise ValidationError("pattern is not reduced")
        if len(pattern) > 0 and pattern[0] == alphabet.inverse(pattern[-1]):
            raise ValidationError("pattern is not cyclically reduced")
        reps = depth // len(pattern) + 1
        return cls((pattern * reps)[:depth], pattern=pattern)

    def translate(self, gamma: Word, alphabet: GeneratorAlphabet) -> "BoundaryRay":
        """The ray gamma * self (reduced concatenation; prefix may shorten)."""
        combined = reduce(alphabet, gamma.letters + self.letters)
        return BoundaryRay(combined.letters, seed=self.seed)

    def __repr__(self):
        head = ",".join(str(l) for l in self.letters[:8])
        tail = ",..." if len(self.letters) > 8 else ""
        return f"BoundaryRay({head}{tail} depth={self.depth})"


def sample_boundary_rays(
    automaton: GeodesicAutomaton, count: int, depth: int, seed: int
) -> list[BoundaryRay]:
    """Seeded uniform out-edge random walks on the recurrent automaton.

    The first step leaves the initial state along any edge whose target is
    recurrent; later steps stay inside the recurrent subgraph.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rng = np.random.default_rng(seed)
    rec = automaton.recurrent_states
    rays = []
    for _ in range(count):
        letters = []
        state = automaton.initial
        for step in range(depth):
            options = [
                (l, t) for l, t in automaton.successors(state) if t in rec
            ]
            if not options:
                raise ValidationError(
                    f"state {state!r} has no recurrent continuation"
                )
            l, state = options[rng.integers(len(options))]
            letters.append(l)
        rays.append(BoundaryRay(tuple(letters), seed=seed))
    return rays


def continue_ray(
    automaton: GeodesicAutomaton,
    prefix,
    extra_depth: int,
    rng: np.random.Generator,
) -> BoundaryRay:
    """Extend a geodesic prefix by a seeded random walk of extra_depth steps."""
    state = automaton.state_of(prefix)
    if state is None:
        raise ValidationError("prefix is not geodesic for this automaton")
    rec = automaton.recurrent_states
    letters = list(prefix)
    for _ in range(extra_depth):
        options = [(l, t) for l, t in automaton.successors(state) if t in rec]
        if not options:
            raise ValidationError(f"state {state!r} has no recurrent continuation")
        l, state = options[rng.integers(len(options))]
        letters.append(l)
    return BoundaryRay(tuple(letters))


def nested_pair(automaton: GeodesicAutomaton, c1, c2, k: int) -> Word | None:
    """Lexicographically smallest length-k label word from c1 to c2, if any.

    The witness beta satisfies beta * C2 subset C1 (spot-checked in tests).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if c1 not in automaton.states or c2 not in automaton.states:
        raise ValidationError("unknown cone-type state")
    # reach[j] = states from which c2 is reachable in exactly j steps
    reach = [{c2}]
    for _ in range(k):
        prev = reach[-1]
        reach.append(
            {
                src
                for (src, _), dst in automaton.edges.items()
                if dst in prev
            }
        )
    if c1 not in reach[k]:
        return None
    letters = []
    state = c1
    for j in range(k, 0, -1):
        for l, t in automaton.successors(state):
            if t in reach[j - 1]:
                letters.append(l)
                state = t
                break
    return Word(tuple(letters))


# --- automaton file format ---

def load_automaton(source) -> GeodesicAutomaton:
    """Parse the documented automaton text format.

    UTF-8 lines: `alphabet n=<int>`, `state <id>`, `initial <id>`,
    `edge <src> <letter-index> <dst>`.  Blank lines and `#` comments are
    ignored.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    alphabet = None
    states: list[str] = []
    initial = None
    edges: dict[tuple[str, int], str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "alphabet":
            if len(parts) != 2 or not parts[1].startswith("n="):
                raise ParseError("expected `alphabet n=<int>`", line=lineno)
            try:
                alphabet = GeneratorAlphabet(int(parts[1][2:]))
            except ValueError:
                raise ParseError(f"bad generator count {parts[1][2:]!r}", line=lineno)
        elif kind == "state":
            if len(parts) != 2:
                raise ParseError("expected `state <id>`", line=lineno)
            states.append(parts[1])
        elif kind == "initial":
            if len(parts) != 2:
                raise ParseError("expected `initial <id>`", line=lineno)
            initial = parts[1]
        elif kind == "edge":
            if len(parts) != 4:
                raise ParseError("expected `edge <src> <letter> <dst>`", line=lineno)
            try:
                letter = int(parts[2])
            except ValueError:
                raise ParseError(f"bad letter index {parts[2]!r}", line=lineno)
            key = (parts[1], letter)
            if key in edges:
                raise ValidationError(
                    f"duplicate edge for state {parts[1]!r}, letter {letter}"
                )
            edges[key] = parts[3]
        else:
            raise ParseError(f"unknown directive {kind!r}", line=lineno)
    if alphabet is None:
        raise ValidationError("missing `alphabet` line")
    if initial is None:
        raise ValidationError("missing `initial` line")
    return GeodesicAutomaton(alphabet, states, initial, edges)
