"""Cleanup of a sparse-class partition into a canonical near-complete core.

Given a host whose vertex set splits into q near-independent classes of
the right size plus a remainder class, this module classifies deviant
vertices (bad: too many in-class neighbours; useless: too few neighbours
in some other class; exceptional: almost none), repairs what it can by
swaps, and removes the rest inside small batches of clique-minus-an-edge
copies chosen so that every class shrinks by exactly its canonical share.
The result is a core graph whose classes are perfectly proportioned and
whose every vertex sees almost all of every other class.

All threshold comparisons against fractional powers of tau are exact:
``count >= tau^(1/3) * size`` is evaluated as ``count^3 >= tau * size^3``
over integers and Fractions, never through floats.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .constructions import kr_minus, remainder_pattern_order
from .errors import BadParameter, Stuck
from .graphs import Graph, Partition, VertexSet, bits_of, density_within, induced
from .solver import Copy, Packing, packing_defect

logger = logging.getLogger(__name__)

_REALIZE_NODE_CAP = 20000


def ge_power(count: int, tau: Fraction, size: int, root: int) -> bool:
    """count >= tau**(1/root) * size, exactly."""
    if count < 0:
        return False
    return count**root >= tau * size**root


def le_power(count: int, tau: Fraction, size: int, root: int) -> bool:
    """count <= tau**(1/root) * size, exactly."""
    if count < 0:
        return True
    return count**root <= tau * size**root


@dataclass
class VertexClassification:
    """Per-vertex neighbourhood flags relative to a partition.

    ``cross_counts[x][j]`` is |N(x) & A_j| (own class included);
    ``exceptional[x]`` lists the classes x almost entirely misses.
    """

    tau: Fraction
    class_sizes: list[int]
    class_of: list[int]
    cross_counts: list[list[int]]
    bad: list[bool]
    useless: list[bool]
    exceptional: list[tuple[int, ...]]
    warnings: list[str] = field(default_factory=list)

    def exceptional_vertices(self) -> list[int]:
        return [x for x in range(len(self.class_of)) if self.exceptional[x]]


@dataclass
class TidyResult:
    """Canonical core plus the copies removed to reach it."""

    g_star: Graph
    partition_star: Partition  # host-indexed classes of the core
    removed: list[Copy]  # host-indexed copies, pairwise disjoint
    trace: list[dict]
    n_star: int


def adjust_for_divisibility(g: Graph, p: Partition, r: int) -> tuple[Partition, int]:
    """Write n = n' + k r with r(r-2) | n'; rebalance classes when k < q.

    When k < q one vertex moves from each later sparse class into the
    remainder class, chosen with maximum in-class degree so the sparse
    densities only improve.
    """
    n = g.n
    if n % r:
        raise BadParameter(f"order {n} not divisible by r = {r}")
    q = len(p) - 1
    block = r * (r - 2)
    k = (n % block) // r
    expected = math.ceil(Fraction((r - 1) * n, block))
    for i in range(q):
        if len(p[i]) != expected:
            raise BadParameter(
                f"sparse class {i} has {len(p[i])} vertices, expected {expected}"
            )
    if k == 0 or k >= q:
        return p, k
    classes = [c.bits for c in p.classes]
    for i in range(k, q):
        mover = max(
            bits_of(classes[i]),
            key=lambda v: ((g.adj[v] & classes[i]).bit_count(), -v),
        )
        classes[i] &= ~(1 << mover)
        classes[q] |= 1 << mover
    return Partition(tuple(VertexSet(b, n) for b in classes), n), k


def classify(g: Graph, p: Partition, tau: Fraction) -> VertexClassification:
    """Exact bad/useless/exceptional flags, with soft count-bound warnings."""
    q = len(p) - 1
    sizes = [len(c) for c in p.classes]
    class_of = p.class_of()
    n = g.n
    cross = [[0] * len(p.classes) for _ in range(n)]
    bad = [False] * n
    useless = [False] * n
    exceptional: list[tuple[int, ...]] = [()] * n
    for x in range(n):
        i = class_of[x]
        if i < 0:
            continue
        targets = []
        for j, c in enumerate(p.classes):
            cross[x][j] = (g.adj[x] & c.bits).bit_count()
        bad[x] = ge_power(cross[x][i], tau, sizes[i], 3)
        for j in range(len(p.classes)):
            if j == i:
                continue
            miss = sizes[j] - cross[x][j]
            if ge_power(miss, tau, sizes[j], 4):
                useless[x] = True
            if le_power(cross[x][j], tau, sizes[j], 3):
                targets.append(j)
        exceptional[x] = tuple(targets)
    warnings = []
    tau_sq = tau * tau
    for i in range(q):
        n_bad = sum(1 for x in range(n) if class_of[x] == i and bad[x])
        if not le_power(n_bad, tau_sq, sizes[i], 3):
            warnings.append(f"class {i}: {n_bad} bad vertices exceeds soft bound")
        n_useless = sum(1 for x in range(n) if class_of[x] == i and useless[x])
        if not le_power(n_useless, tau_sq, sizes[i], 3):
            warnings.append(f"class {i}: {n_useless} useless vertices exceeds soft bound")
    u_last = sum(1 for x in range(n) if class_of[x] == q and useless[x])
    if not le_power(u_last, tau_sq, sizes[q], 3):
        warnings.append(f"remainder class: {u_last} useless vertices exceeds soft bound")
    return VertexClassification(
        tau, sizes, class_of, cross, bad, useless, exceptional, warnings
    )


def swap_bad_exceptional(g: Graph, p: Partition, c: VertexClassification) -> Partition:
    """Swap each in-class-heavy sparse vertex with a vertex missing that class.

    Greedy and maximal, lowest vertex indices first; each vertex takes
    part in at most one swap. Only sparse classes are repaired this way:
    the remainder class is internally dense by design, so in-class-heavy
    is meaningless there.
    """
    classes = [cs.bits for cs in p.classes]
    swapped: set[int] = set()
    for i in range(len(p.classes) - 1):
        bad_pool = [x for x in sorted(bits_of(classes[i])) if c.bad[x] and x not in swapped]
        exc_pool = [
            y
            for y in range(g.n)
            if y not in swapped
            and c.class_of[y] not in (-1, i)
            and i in c.exceptional[y]
        ]
        exc_pool.sort()
        for x, y in zip(bad_pool, exc_pool):
            j = c.class_of[y]
            classes[i] &= ~(1 << x)
            classes[i] |= 1 << y
            classes[j] &= ~(1 << y)
            classes[j] |= 1 << x
            swapped.add(x)
            swapped.add(y)
    return Partition(tuple(VertexSet(b, p.host_n) for b in classes), p.host_n)


def extract_disjoint_cliques(g: Graph, a: VertexSet, s: int, count: int) -> list[VertexSet]:
    """Greedily extract `count` disjoint s-cliques from G[A], max-degree pivots.

    The degree regime that guarantees enough cliques is advisory: falling
    below it logs a warning, and an actual shortfall raises Stuck.
    """
    if s < 1 or count < 0:
        raise BadParameter(f"need s >= 1 and count >= 0, got s={s}, count={count}")
    if s > 2 and len(a) > 0:
        delta = min((g.adj[v] & a.bits).bit_count() for v in a)
        if delta * (s - 1) < (s - 2) * len(a):  # below the 1 - 1/(s-1) fraction
            logger.warning(
                "clique extraction below the guaranteed degree regime: "
                "min degree %d of %d vertices for %d-cliques",
                delta,
                len(a),
                s,
            )
    remaining = a.bits
    out: list[VertexSet] = []

    def deg(v: int) -> int:
        return (g.adj[v] & remaining).bit_count()

    while len(out) < count:
        pivots = sorted(bits_of(remaining), key=lambda v: (-deg(v), v))
        clique: list[int] | None = None
        for pivot in pivots:
            cand = [pivot]
            pool = g.adj[pivot] & remaining
            while len(cand) < s and pool:
                nxt = max(bits_of(pool), key=lambda v: ((g.adj[v] & pool).bit_count(), -v))
                cand.append(nxt)
                pool &= g.adj[nxt]
            if len(cand) == s:
                clique = cand
                break
        if clique is None:
            raise Stuck("clique-extraction", f"found {len(out)} of {count} {s}-cliques")
        mask = 0
        for v in clique:
            mask |= 1 << v
        out.append(VertexSet(mask, g.n))
        remaining &= ~mask
    return out


# ---------------------------------------------------------------------------
# Batch machinery


@dataclass
class _Anchor:
    """Pinned content of the first copy of a batch."""

    pinned: list[tuple[int, int]] = field(default_factory=list)  # (vertex, class)
    exempt_class: int | None = None  # class holding the allowed missing pair


class _TidyState:
    def __init__(self, g: Graph, masks: list[int], r: int, tau: Fraction):
        self.g = g
        self.masks = masks
        self.r = r
        self.q = len(masks) - 1
        self.tau = tau
        self.removed: list[Copy] = []
        self.trace: list[dict] = []
        self.avoid = 0  # useless / reserved vertices, excluded from greedy picks

    def sizes(self) -> list[int]:
        return [m.bit_count() for m in self.masks]

    def class_of(self, v: int) -> int:
        for i, m in enumerate(self.masks):
            if (m >> v) & 1:
                return i
        return -1

    def move(self, v: int, dst: int, stage: str) -> None:
        src = self.class_of(v)
        self.masks[src] &= ~(1 << v)
        self.masks[dst] |= 1 << v
        self.trace.append({"stage": stage, "action": "move", "vertex": v, "from": src, "to": dst})

    def swap(self, x: int, y: int, stage: str) -> None:
        cx, cy = self.class_of(x), self.class_of(y)
        self.masks[cx] &= ~(1 << x)
        self.masks[cy] &= ~(1 << y)
        self.masks[cx] |= 1 << y
        self.masks[cy] |= 1 << x
        self.trace.append({"stage": stage, "action": "swap", "vertices": [x, y], "classes": [cx, cy]})


def _distribute(
    take: list[int],
    n_copies: int,
    r: int,
    anchor_counts: list[int],
    anchor_pair_class: int | None,
) -> list[list[int]] | None:
    """Split per-class removal totals into per-copy profiles.

    Each copy removes exactly r vertices, at most 2 from any sparse
    class, and holds at most one allowed-missing pair: taking 2 from a
    sparse class commits the pair there, and an anchor whose pair lives
    in the remainder class blocks sparse doubling for copy 0. Copy 0
    starts from the anchor's counts. The remainder class absorbs each
    copy's slack. First feasible assignment in deterministic order wins.
    """
    q = len(take) - 1
    profiles = [[0] * (q + 1) for _ in range(n_copies)]
    profiles[0] = anchor_counts.copy()
    pair_class: list[int | None] = [None] * n_copies
    pair_class[0] = anchor_pair_class
    for c in range(q):
        if anchor_counts[c] == 2:
            pair_class[0] = c

    def sparse_load(p: list[int]) -> int:
        return sum(p[:q])

    def assign(c: int) -> bool:
        if c == q:
            # remainder fills the slack; verify it matches the target
            total = 0
            for cp in range(n_copies):
                slack = r - sparse_load(profiles[cp]) - profiles[cp][q]
                if slack < 0:
                    return False
                profiles[cp][q] += slack
                total += profiles[cp][q]
            if total == take[q]:
                return True
            for cp in range(n_copies):
                profiles[cp][q] = anchor_counts[q] if cp == 0 else 0
            return False
        need = take[c] - sum(profiles[cp][c] for cp in range(n_copies))
        if need < 0:
            return False

        def put(cp: int, left: int) -> bool:
            if left == 0:
                return assign(c + 1)
            if cp == n_copies:
                return False
            room = r - sparse_load(profiles[cp]) - profiles[cp][q]
            for amt in (1, 2, 0):
                if amt > left or amt > room or profiles[cp][c] + amt > 2:
                    continue
                if profiles[cp][c] + amt == 2 and pair_class[cp] not in (None, c):
                    continue
                was = pair_class[cp]
                profiles[cp][c] += amt
                if profiles[cp][c] == 2:
                    pair_class[cp] = c
                if put(cp + 1, left - amt):
                    return True
                profiles[cp][c] -= amt
                pair_class[cp] = was
            return False

        return put(0, need)

    if assign(0):
        return profiles
    return None


def _realize_copy(
    state: _TidyState,
    profile: list[int],
    anchor: _Anchor | None,
    used: int,
) -> list[tuple[int, int]] | None:
    """Build one copy matching the class profile: DFS over slots, candidates
    ascending; at most the designated pair may be nonadjacent."""
    g = state.g
    q = state.q
    pinned = list(anchor.pinned) if anchor else []
    exempt_class = anchor.exempt_class if anchor else None
    if exempt_class is None:
        doubled = [c for c in range(q) if profile[c] >= 2]
        if doubled:
            exempt_class = doubled[0]
    slots: list[int] = []
    remaining = profile.copy()
    for v, c in pinned:
        remaining[c] -= 1
        if remaining[c] < 0:
            return None
    if exempt_class is not None:
        slots.extend([exempt_class] * min(2 - sum(1 for _, c in pinned if c == exempt_class), remaining[exempt_class]))
        remaining[exempt_class] -= len([s for s in slots if s == exempt_class])
    for c in range(q + 1):
        slots.extend([c] * remaining[c])

    placed: list[tuple[int, int]] = list(pinned)
    exempt_members: list[int] = [v for v, c in pinned if c == exempt_class]
    nodes = 0

    def ok_pair(u: int, v: int, u_exempt: bool, v_exempt: bool) -> bool:
        if (g.adj[u] >> v) & 1:
            return True
        return u_exempt and v_exempt

    # validate pins
    for a_i in range(len(pinned)):
        for b_i in range(a_i + 1, len(pinned)):
            u, cu = pinned[a_i]
            v, cv = pinned[b_i]
            if not ok_pair(u, v, u in exempt_members, v in exempt_members):
                return None

    def place(idx: int, used_now: int) -> bool:
        nonlocal nodes
        if idx == len(slots):
            return True
        nodes += 1
        if nodes > _REALIZE_NODE_CAP:
            return False
        c = slots[idx]
        exempt_here = c == exempt_class and len(exempt_members) < 2
        cand_mask = state.masks[c] & ~used_now & ~state.avoid
        for v in bits_of(cand_mask):
            good = True
            for u, _cu in placed:
                if not ok_pair(u, v, u in exempt_members, exempt_here):
                    good = False
                    break
            if not good:
                continue
            placed.append((v, c))
            if exempt_here:
                exempt_members.append(v)
            if place(idx + 1, used_now | (1 << v)):
                return True
            placed.pop()
            if exempt_here:
                exempt_members.pop()
        return False

    used_start = used
    for v, _c in pinned:
        used_start |= 1 << v
    if place(0, used_start):
        return list(placed)
    return None


def _copy_from_placement(
    g: Graph, placement: list[tuple[int, int]], exempt_class: int | None
) -> Copy:
    """Assemble a clique-minus-an-edge copy; the nonadjacent (or designated)
    pair plays pattern slots 0 and 1."""
    verts = [v for v, _ in placement]
    pair: list[int] = []
    for i in range(len(verts)):
        for j in range(i + 1, len(verts)):
            if not g.has_edge(verts[i], verts[j]):
                pair = sorted((verts[i], verts[j]))
    if not pair:
        emb = tuple(sorted(verts))
    else:
        rest = sorted(v for v in verts if v not in pair)
        emb = tuple(pair + rest)
    return Copy(tuple(sorted(verts)), emb)


def _run_batch(
    state: _TidyState,
    stage: str,
    anchor: _Anchor | None,
    moves_applied: dict[int, int],
) -> None:
    """Remove r-2 copies whose net effect, together with the moves already
    applied, shrinks every sparse class by exactly r-1 and the remainder
    class by its canonical share."""
    r, q = state.r, state.q
    copies = r - 2
    big_dec = r * (r - 2) - q * (r - 1)
    take = [(r - 1) + moves_applied.get(c, 0) for c in range(q)]
    take.append(big_dec + moves_applied.get(q, 0))
    if sum(take) != r * copies:
        raise Stuck(stage, f"take vector {take} does not sum to {r * copies}")
    anchor_counts = [0] * (q + 1)
    anchor_pair_class = None
    if anchor:
        for _v, c in anchor.pinned:
            anchor_counts[c] += 1
        anchor_pair_class = anchor.exempt_class
    profiles = _distribute(take, copies, r, anchor_counts, anchor_pair_class)
    if profiles is None:
        raise Stuck(stage, f"no feasible batch profile for take {take}")
    used = 0
    batch: list[Copy] = []
    for ci, profile in enumerate(profiles):
        a = anchor if ci == 0 else None
        placement = _realize_copy(state, profile, a, used)
        if placement is None:
            raise Stuck(stage, f"could not realize copy {ci} with profile {profile}")
        exempt = a.exempt_class if a else None
        cp = _copy_from_placement(state.g, placement, exempt)
        batch.append(cp)
        for v, _c in placement:
            used |= 1 << v
    for cp in batch:
        for v in cp.vertices:
            c = state.class_of(v)
            state.masks[c] &= ~(1 << v)
        state.removed.append(cp)
    state.trace.append(
        {
            "stage": stage,
            "action": "remove-batch",
            "copies": [list(c.vertices) for c in batch],
        }
    )


def remove_proportional_batch(
    g: Graph,
    p: Partition,
    r: int,
    anchor: Copy | None = None,
    tau: Fraction | None = None,
) -> list[Copy]:
    """Public batch primitive: r-2 disjoint copies jointly taking exactly
    r-1 vertices from each sparse class, remainder from the last class.

    When tau is given, unpinned picks avoid useless vertices."""
    q = len(p) - 1
    state = _TidyState(g, [c.bits for c in p.classes], r, tau or Fraction(0))
    if tau is not None:
        cls = classify(g, p, tau)
        for x in range(g.n):
            if cls.useless[x]:
                state.avoid |= 1 << x
    a = None
    if anchor is not None:
        class_of = p.class_of()
        a = _Anchor(pinned=[(v, class_of[v]) for v in anchor.vertices])
        pair = [v for v in anchor.embedding[:2]]
        if not g.has_edge(pair[0], pair[1]):
            a.exempt_class = class_of[pair[0]]
        for v in anchor.vertices:
            state.avoid &= ~(1 << v)
    _run_batch(state, "proportional-batch", a, {})
    return state.removed


# ---------------------------------------------------------------------------
# The full cleanup procedure


def _check_hypotheses(g: Graph, sparse_sets: Sequence[VertexSet], r: int, tau: Fraction) -> list[str]:
    n = g.n
    if n % r:
        raise BadParameter(f"order {n} not divisible by r={r}")
    q = len(sparse_sets)
    if not 1 <= q <= r - 2:
        raise BadParameter(f"need 1 <= q <= r-2 sparse sets, got {q}")
    seen = 0
    expected = math.ceil(Fraction((r - 1) * n, r * (r - 2)))
    for i, a in enumerate(sparse_sets):
        if a.host_n != n:
            raise BadParameter(f"sparse set {i} over a different host")
        if len(a) != expected:
            raise BadParameter(f"sparse set {i} has {len(a)} vertices, expected {expected}")
        if a.bits & seen:
            raise BadParameter("sparse sets overlap")
        seen |= a.bits
    soft: list[str] = []
    threshold = (1 - Fraction(r - 1, r * (r - 2))) * n
    delta = min(g.degree(v) for v in range(n))
    if delta < threshold:
        soft.append(f"min degree {delta} below threshold {threshold}")
    for i, a in enumerate(sparse_sets):
        d = density_within(g, a)
        if d > tau:
            soft.append(f"sparse set {i} density {d} exceeds tau {tau}")
    return soft


def tidy(g: Graph, sparse_sets: Sequence[VertexSet], r: int, tau: Fraction) -> TidyResult:
    """Run the full cleanup and return a canonical core.

    Structural preconditions (divisibility, set sizes, disjointness) are
    hard errors. The degree and density hypotheses are checked but only
    logged into the trace: the procedure is attempted regardless, and a
    greedy dead end surfaces as Stuck with its stage tag.
    """
    soft = _check_hypotheses(g, sparse_sets, r, tau)
    n = g.n
    q = len(sparse_sets)
    rest_bits = (1 << n) - 1
    for a in sparse_sets:
        rest_bits &= ~a.bits
    p0 = Partition(tuple(sparse_sets) + (VertexSet(rest_bits, n),), n)
    p1, k = adjust_for_divisibility(g, p0, r)

    state = _TidyState(g, [c.bits for c in p1.classes], r, tau)
    for w in soft:
        state.trace.append({"stage": "hypotheses", "action": "warn", "detail": w})
    if k:
        state.trace.append({"stage": "divisibility", "action": "offset", "k": k})

    cls = classify(g, Partition(tuple(VertexSet(m, n) for m in state.masks), n), tau)
    p2 = swap_bad_exceptional(g, Partition(tuple(VertexSet(m, n) for m in state.masks), n), cls)
    swap_count = sum(1 for i in range(q + 1) if p2[i].bits != state.masks[i])
    state.masks = [c.bits for c in p2.classes]
    if swap_count:
        state.trace.append({"stage": "swap", "action": "swap-bad-exceptional"})
    cls = classify(g, p2, tau)
    for w in cls.warnings:
        state.trace.append({"stage": "classify", "action": "warn", "detail": w})

    for x in range(n):
        if cls.useless[x] or cls.exceptional[x]:
            state.avoid |= 1 << x

    def removed_bit(v: int) -> bool:
        return not any((m >> v) & 1 for m in state.masks)

    # --- exceptional vertices ---------------------------------------------
    handled: set[int] = set()
    if q == r - 2:
        handled = _handle_exceptional_last_class(state, cls)
    for x in sorted(cls.exceptional_vertices(), key=lambda v: (cls.class_of[v], v)):
        if removed_bit(x) or x in handled:
            continue
        i = state.class_of(x)
        if q == r - 2 and cls.class_of[x] == q:
            continue  # remainder-class vertices go through the matching path
        targets = cls.exceptional[x]
        j = targets[0]
        if len(targets) > 1:
            raise Stuck("exceptional", f"vertex {x} exceptional for {targets}")
        if j == q and q <= r - 3:
            raise Stuck("exceptional", f"vertex {x} exceptional for the remainder class")
        state.move(x, j, "exceptional")
        moves = {j: 1, i: -1}
        if j == q:
            anchor = _Anchor(pinned=[(x, j)], exempt_class=q)
        else:
            anchor = _Anchor(pinned=[(x, j)], exempt_class=j)
        state.avoid &= ~(1 << x)
        _run_batch(state, "exceptional", anchor, moves)

    # --- vertices deficient towards the remainder class -------------------
    u_set = []
    for x in range(n):
        if removed_bit(x):
            continue
        i = state.class_of(x)
        if i < 0 or i >= q:
            continue
        miss = cls.class_sizes[q] - cls.cross_counts[x][q]
        if ge_power(miss, tau, cls.class_sizes[q], 4):
            u_set.append(x)
    requeued: list[int] = []
    for x in sorted(u_set):
        if removed_bit(x):
            continue
        i = state.class_of(x)
        state.move(x, q, "relocate")
        anchor = _Anchor(pinned=[], exempt_class=q)
        _run_batch(state, "relocate", anchor, {i: -1, q: 1})
        requeued.append(x)

    # --- remaining useless vertices ----------------------------------------
    queue = []
    for x in range(n):
        if removed_bit(x) or not cls.useless[x]:
            continue
        if x in requeued or x in handled:
            continue
        queue.append(x)
    for x in requeued:
        if removed_bit(x):
            continue
        deficient = any(
            ge_power(cls.class_sizes[j] - cls.cross_counts[x][j], tau, cls.class_sizes[j], 4)
            for j in range(q)
        )
        if deficient:
            queue.append(x)
    # one pass over the initially flagged vertices; nothing is requeued past it
    for x in sorted(queue):
        if removed_bit(x):
            continue
        _handle_useless(state, cls, x)

    # --- final rebalancing to canonical sizes ------------------------------
    if k:
        _final_rebalance(state, k)

    _verify_result(state, g, n, tau)
    star_masks = list(state.masks)
    union = 0
    for m in star_masks:
        union |= m
    part = Partition(tuple(VertexSet(m, n) for m in star_masks), n)
    g_star = induced(g, VertexSet(union, n))
    return TidyResult(g_star, part, state.removed, state.trace, union.bit_count())


def _handle_exceptional_last_class(state: _TidyState, cls: VertexClassification) -> set[int]:
    """q = r-2 branch: exceptional vertices of the remainder class leave via
    matching swaps inside their target sparse class. Returns the vertices
    it dealt with."""
    g, q, tau = state.g, state.q, state.tau
    n = g.n
    per_target: dict[int, list[int]] = {}
    for x in range(n):
        if cls.class_of[x] != q or not cls.exceptional[x]:
            continue
        targets = [j for j in cls.exceptional[x] if j < q]
        if not targets:
            continue
        per_target.setdefault(targets[0], []).append(x)
    matchings: dict[int, list[tuple[int, int]]] = {}
    reserved = 0
    for i, xs in sorted(per_target.items()):
        edges = _internal_matching(state, i, len(xs), cls)
        if len(edges) < len(xs):
            raise Stuck("matching", f"class {i}: need {len(xs)} edges, found {len(edges)}")
        matchings[i] = edges
        for u, v in edges:
            reserved |= (1 << u) | (1 << v)
    state.avoid |= reserved
    handled: set[int] = set()
    for i, xs in sorted(per_target.items()):
        for x in sorted(xs):
            y, z = matchings[i].pop(0)
            state.avoid &= ~((1 << y) | (1 << z))
            reserved &= ~((1 << y) | (1 << z))
            state.swap(x, y, "exceptional-last")
            # y keeps its old non-neighbours inside class i, so the copy's
            # doubled pair must sit in a different sparse class
            j_pair = min(j for j in range(q) if j != i)
            anchor = _Anchor(pinned=[(y, q), (z, i)], exempt_class=j_pair)
            _run_batch(state, "exceptional-last", anchor, {})
            handled.add(x)
    return handled


def _internal_matching(
    state: _TidyState, i: int, need: int, cls: VertexClassification
) -> list[tuple[int, int]]:
    """Greedy matching inside sparse class i over non-useless vertices."""
    g = state.g
    mask = state.masks[i] & ~state.avoid
    matched = 0
    edges: list[tuple[int, int]] = []
    for u in bits_of(mask):
        if (matched >> u) & 1:
            continue
        nbrs = g.adj[u] & mask & ~matched
        nbrs &= ~((1 << (u + 1)) - 1)  # partners above u only
        for v in bits_of(nbrs):
            edges.append((u, v))
            matched |= (1 << u) | (1 << v)
            break
        if len(edges) == need:
            break
    return edges


def _handle_useless(state: _TidyState, cls: VertexClassification, x: int) -> None:
    """Remove one useless vertex inside an anchored batch."""
    g, q, r = state.g, state.q, state.r
    i = state.class_of(x)
    if i < q:
        choices = [j for j in range(q) if j != i]
        if not choices:
            raise Stuck("useless", f"sparse vertex {x} with no partner class (q=1)")
        j = min(choices, key=lambda jj: (cls.cross_counts[x][jj], jj))
    else:
        j = min(range(q), key=lambda jj: (cls.cross_counts[x][jj], jj))
    nbrs = g.adj[x] & state.masks[j] & ~state.avoid
    picks = []
    for v in bits_of(nbrs):
        picks.append(v)
        if len(picks) == 2:
            break
    if len(picks) < 2:
        raise Stuck("useless", f"vertex {x}: fewer than two usable neighbours in class {j}")
    y, z = picks
    state.avoid &= ~(1 << x)
    anchor = _Anchor(pinned=[(x, i), (y, j), (z, j)], exempt_class=j)
    _run_batch(state, "useless", anchor, {})


def _final_rebalance(state: _TidyState, k: int) -> None:
    """Remove k copies so the classes land exactly on canonical sizes."""
    r, q = state.r, state.q
    n_now = sum(m.bit_count() for m in state.masks)
    n_final = n_now - k * r
    block = r * (r - 2)
    if n_final % block:
        raise Stuck("rebalance", f"target order {n_final} not divisible by {block}")
    target_sparse = (r - 1) * n_final // block
    take = [state.masks[c].bit_count() - target_sparse for c in range(q)]
    take.append(state.masks[q].bit_count() - (n_final - q * target_sparse))
    if any(t < 0 for t in take) or sum(take) != k * r:
        raise Stuck("rebalance", f"infeasible take vector {take}")
    profiles = _distribute(take, k, r, [0] * (q + 1), None)
    if profiles is None:
        raise Stuck("rebalance", f"no profile split for take {take}")
    used = 0
    batch = []
    for profile in profiles:
        placement = _realize_copy(state, profile, None, used)
        if placement is None:
            raise Stuck("rebalance", f"could not realize profile {profile}")
        cp = _copy_from_placement(state.g, placement, None)
        batch.append(cp)
        for v, _ in placement:
            used |= 1 << v
    for cp in batch:
        for v in cp.vertices:
            state.masks[state.class_of(v)] &= ~(1 << v)
        state.removed.append(cp)
    state.trace.append(
        {"stage": "rebalance", "action": "remove-batch", "copies": [list(c.vertices) for c in batch]}
    )


def _verify_result(state: _TidyState, g: Graph, n: int, tau: Fraction) -> None:
    r, q = state.r, state.q
    union = 0
    for m in state.masks:
        union |= m
    n_star = union.bit_count()
    block = r * (r - 2)
    if n_star % block:
        raise Stuck("verify", f"core order {n_star} not divisible by {block}")
    removed_mask = 0
    for cp in state.removed:
        m = cp.mask()
        if m & removed_mask:
            raise Stuck("verify", "removed copies overlap")
        removed_mask |= m
    if removed_mask != ((1 << n) - 1) & ~union:
        raise Stuck("verify", "removed copies do not partition the complement of the core")
    defect = packing_defect(kr_minus(r), g, Packing(tuple(state.removed), n))
    if defect is not None:
        raise Stuck("verify", f"removed copy invalid: {defect}")
    if not le_power(n - n_star, tau, n, 3):
        raise Stuck("verify", f"removed {n - n_star} vertices, over the tau^(1/3) n bound")
    target = (r - 1) * n_star // block
    for c in range(q):
        if state.masks[c].bit_count() != target:
            raise Stuck(
                "verify", f"class {c} size {state.masks[c].bit_count()} != canonical {target}"
            )
    if (r - 1) * n_star % block:
        raise Stuck("verify", "canonical size not integral")
    if state.masks[q].bit_count() % remainder_pattern_order(r, q):
        raise Stuck("verify", "remainder class size not divisible by the remainder pattern")
    sizes = [m.bit_count() for m in state.masks]
    for i in range(q + 1):
        for j in range(q + 1):
            if i == j:
                continue
            for v in bits_of(state.masks[i]):
                have = (g.adj[v] & state.masks[j]).bit_count()
                if not le_power(sizes[j] - have, tau, sizes[j], 5):
                    raise Stuck(
                        "verify",
                        f"vertex {v} sees only {have}/{sizes[j]} of class {j}",
                    )


__all__ = [
    "TidyResult",
    "VertexClassification",
    "adjust_for_divisibility",
    "classify",
    "extract_disjoint_cliques",
    "ge_power",
    "le_power",
    "remove_proportional_batch",
    "swap_bad_exceptional",
    "tidy",
]
