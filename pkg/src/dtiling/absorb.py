"""Absorbing families: flexible 8-sets that swallow leftover 4-sets.

An 8-set S absorbs a disjoint 4-set U when both the subgraph induced on S
and the one induced on S + U admit perfect tilings; exactness of those
two checks is never compromised.  A family of pairwise disjoint absorbers
set aside before the main tiling lets the driver finish: whatever 4-sets
the local search leaves uncovered are handed to distinct family members,
each re-tiled together with its 4-set, while idle members fall back to
their cached own tilings.

Family construction follows the probabilistic recipe: draw a binomial
number of uniform 8-sets, delete both sides of every overlapping pair,
keep only members that are tileable and absorb at least one probed 4-set,
and retry with fresh randomness until the family is nonempty and uses at
most alpha * n vertices.  The nominal sampling rate alpha*sigma/(16 n^7)
is exposed for reference but is far below one expected member at any
reachable order, so the default rate instead targets alpha*n/16 expected
members, the family size the nominal rate reaches only asymptotically.
The absorber
density sigma defaults to an empirical estimate (fraction of absorbing
(8-set, 4-set) pairs among 200 seeded draws, floored at 1e-3).
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field

from .core import (
    Hypergraph3,
    InputError,
    Tiling,
    induced_subgraph,
    map_copy,
    min_codegree,
    validate_tiling,
)
from .exact import FOUND, SearchBudget, perfect_tiling_exact

SIGMA_SAMPLES = 200
SIGMA_FLOOR = 1e-3
PROBE_LIMIT = 500
STRICT_SCAN_MAX_N = 30
GADGET_SCAN_MAX_N = 16


class ConstructionFailure(RuntimeError):
    """No admissible absorbing family within the retry budget."""

    def __init__(self, stats: dict):
        super().__init__(f"absorbing family construction failed: {stats}")
        self.stats = stats


class AbsorptionFailure(RuntimeError):
    """Some leftover 4-set found no unused absorbing member."""

    def __init__(self, block: tuple[int, ...]):
        super().__init__(f"no unused member absorbs {block}")
        self.block = block


def induced_perfect_tiling(
    G: Hypergraph3, vertices, budget: SearchBudget | None = None
) -> Tiling | None:
    """Perfect tiling of the induced subgraph, in original vertex ids."""
    H, mapping = induced_subgraph(G, vertices)
    res = perfect_tiling_exact(H, budget)
    if res.status != FOUND:
        return None
    return Tiling.from_copies(map_copy(c, mapping) for c in res.tiling.copies)


def absorbs(G: Hypergraph3, S, U) -> bool:
    """Exact absorption test: G[S] and G[S + U] both perfectly tileable."""
    S, U = set(S), set(U)
    if len(S) != 8 or len(U) != 4:
        raise InputError(f"need |S| = 8 and |U| = 4, got {len(S)} and {len(U)}")
    if S & U:
        raise InputError(f"S and U overlap: {sorted(S & U)}")
    if any(not 0 <= v < G.n for v in S | U):
        raise InputError("S or U out of range")
    if induced_perfect_tiling(G, S) is None:
        return False
    return induced_perfect_tiling(G, S | U) is not None


@dataclass(frozen=True)
class AbsorptionParams:
    """Knobs for family construction; None fields are derived at build
    time (sigma empirically, p from the desk-scale rate, omega from the
    leftover bound formula alpha*sigma^2/128)."""

    alpha: float = 0.3
    sigma: float | None = None
    p: float | None = None
    omega: float | None = None
    seed: int = 0
    max_retries: int = 20
    delta: float = 0.25
    probe_limit: int = PROBE_LIMIT
    strict_probe: bool = False
    use_nominal_rate: bool = False


def nominal_sampling_rate(alpha: float, sigma: float, n: int) -> float:
    """Reference sampling rate alpha*sigma/(16 n^7); vanishing at desk
    scale, kept for runs that ask for it."""
    return alpha * sigma / (16 * n**7)


def desk_sampling_rate(alpha: float, n: int) -> float:
    """Rate giving alpha*n/16 expected members, enough family to swallow
    an omega*n leftover."""
    if n < 8:
        return 0.0
    return (alpha * n / 16) / math.comb(n, 8)


def leftover_bound(alpha: float, sigma: float) -> float:
    return alpha * sigma**2 / 128


def estimate_absorber_density(G: Hypergraph3, rng: random.Random, samples: int = SIGMA_SAMPLES) -> float:
    """Empirical fraction of absorbing (8-set, 4-set) draws, floored."""
    if G.n < 12:
        return SIGMA_FLOOR
    hits = 0
    for _ in range(samples):
        S = rng.sample(range(G.n), 8)
        rest = sorted(set(range(G.n)) - set(S))
        U = rng.sample(rest, 4)
        if absorbs(G, S, U):
            hits += 1
    return max(hits / samples, SIGMA_FLOOR)


def _binomial_draw(rng: random.Random, trials: int, p: float) -> int:
    """Exact inverse-transform Binomial(trials, p) sample; cheap because
    the means used here are tiny."""
    if p <= 0.0 or trials <= 0:
        return 0
    if p >= 1.0:
        return trials
    u = rng.random()
    log_p, log_q = math.log(p), math.log1p(-p)
    k = 0
    log_comb = 0.0
    cdf = math.exp(trials * log_q)
    while u > cdf and k < trials:
        log_comb += math.log(trials - k) - math.log(k + 1)
        k += 1
        cdf += math.exp(log_comb + k * log_p + (trials - k) * log_q)
    return k


@dataclass(frozen=True)
class AbsorberFamily:
    """Pairwise disjoint absorbing 8-sets with cached own tilings."""

    members: tuple[tuple[int, ...], ...]
    tilings: tuple[Tiling, ...]
    covered: frozenset[int]
    alpha: float
    sigma: float
    p: float
    omega: float
    seed: int
    stats: dict = field(default_factory=dict, compare=False)

    def can_absorb(self, G: Hypergraph3, index: int, U) -> bool:
        """Membership test in the absorbers of U, computed on demand."""
        return absorbs(G, self.members[index], U)


def build_absorbing_family(
    G: Hypergraph3, params: AbsorptionParams | None = None
) -> AbsorberFamily:
    """Sample, prune, and validate an absorbing family (see module doc).

    Raises :class:`ConstructionFailure` with attempt statistics when every
    retry ends empty or oversized.
    """
    params = params or AbsorptionParams()
    if not 0 < params.alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {params.alpha}")
    rng = random.Random(params.seed)
    stats: dict = {"attempts": [], "codegree_ok": min_codegree(G) >= params.delta * G.n}
    if int(params.alpha * G.n) // 8 < 1:
        stats["reason"] = f"vertex budget alpha*n = {params.alpha * G.n:.2f} admits no 8-set"
        raise ConstructionFailure(stats)
    sigma = params.sigma if params.sigma is not None else estimate_absorber_density(G, rng)
    if params.p is not None:
        p = params.p
    elif params.use_nominal_rate:
        p = nominal_sampling_rate(params.alpha, sigma, G.n)
    else:
        p = desk_sampling_rate(params.alpha, G.n)
    omega = params.omega if params.omega is not None else leftover_bound(params.alpha, sigma)
    stats.update({"sigma": sigma, "p": p, "omega": omega})
    total = math.comb(G.n, 8) if G.n >= 8 else 0
    max_members = int(params.alpha * G.n) // 8

    for attempt in range(params.max_retries):
        drawn = _binomial_draw(rng, total, p)
        sampled: list[tuple[int, ...]] = []
        seen = set()
        while len(sampled) < drawn:
            s = tuple(sorted(rng.sample(range(G.n), 8)))
            if s not in seen:
                seen.add(s)
                sampled.append(s)
        # (a) delete both sides of every overlapping pair
        masks = [sum(1 << v for v in s) for s in sampled]
        disjoint = [
            s
            for i, s in enumerate(sampled)
            if not any(masks[i] & masks[j] for j in range(len(sampled)) if j != i)
        ]
        # (b) keep tileable members absorbing at least one probed 4-set
        members: list[tuple[int, ...]] = []
        tilings: list[Tiling] = []
        for s in disjoint:
            own = induced_perfect_tiling(G, s)
            if own is None:
                continue
            if _probed_absorption(G, s, rng, params):
                members.append(s)
                tilings.append(own)
        record = {
            "drawn": drawn,
            "after_overlap": len(disjoint),
            "after_probe": len(members),
        }
        stats["attempts"].append(record)
        if members and len(members) <= max_members:
            covered = frozenset(v for s in members for v in s)
            family = AbsorberFamily(
                members=tuple(members),
                tilings=tuple(tilings),
                covered=covered,
                alpha=params.alpha,
                sigma=sigma,
                p=p,
                omega=omega,
                seed=params.seed,
                stats=stats,
            )
            validate_family(G, family)
            return family
    raise ConstructionFailure(stats)


def _probed_absorption(G, s, rng, params: AbsorptionParams) -> bool:
    rest = sorted(set(range(G.n)) - set(s))
    if params.strict_probe and G.n <= STRICT_SCAN_MAX_N:
        return any(absorbs(G, s, U) for U in itertools.combinations(rest, 4))
    limit = min(params.probe_limit, math.comb(len(rest), 4))
    for _ in range(limit):
        U = rng.sample(rest, 4)
        # G[s] is already known tileable here, only the joint check remains.
        if induced_perfect_tiling(G, set(s) | set(U)) is not None:
            return True
    return False


def validate_family(G: Hypergraph3, family: AbsorberFamily) -> None:
    """Machine-check the family invariants; InputError on any breach."""
    seen: set[int] = set()
    for s, own in zip(family.members, family.tilings):
        if len(s) != 8 or set(s) & seen:
            raise InputError("family members must be disjoint 8-sets")
        seen |= set(s)
        verdict = validate_tiling(G, own)
        if not verdict.ok or set(own.covered) != set(s):
            raise InputError(f"cached tiling invalid for member {s}")
    if len(seen) > family.alpha * G.n:
        raise InputError("family exceeds its vertex budget")


def find_absorber_gadget(G: Hypergraph3, U, seed: int = 0, attempts: int = 200):
    """Constructive absorber for U: pick joint neighbourhoods V1 of the
    first two and V2 of the last two U vertices, restrict to sample sets
    W1, W2 and the pair-reachable W3, then look for a complete tripartite
    triple system on 3+3+3 vertices; its vertices minus one W3 vertex form
    the absorber.  Falls back to an exhaustive 8-set scan at small orders;
    returns None when nothing verifies.
    """
    U = sorted(set(U))
    if len(U) != 4:
        raise InputError(f"need |U| = 4, got {len(U)}")
    if any(not 0 <= v < G.n for v in U):
        raise InputError("U out of range")
    rng = random.Random(seed)
    u1, u2, u3, u4 = U
    umask = sum(1 << v for v in U)
    v1 = G.pair_bits(u1, u2) & ~((1 << u3) | (1 << u4))
    v2 = G.pair_bits(u3, u4)
    target = max(3, math.ceil(min_codegree(G) / 3))
    w1 = _sample_bits(rng, v1, target)
    w2 = _sample_bits(rng, v2 & ~w1 & ~((1 << u1) | (1 << u2)), target)
    v3 = 0
    for a in _bit_list(v1):
        for b in _bit_list(v2):
            if a != b:
                v3 |= G.pair_bits(a, b)
    w3 = v3 & ~w1 & ~w2 & ~umask
    if min(w1.bit_count(), w2.bit_count(), w3.bit_count()) >= 3:
        found = _search_tripartite(G, rng, w1, w2, w3, attempts)
        if found is not None:
            a1, a2, thirds = found
            s = tuple(sorted(a1 + a2 + thirds[1:]))  # drop the pivot third
            if not set(s) & set(U) and absorbs(G, s, U):
                return s
    if G.n <= GADGET_SCAN_MAX_N:
        rest = sorted(set(range(G.n)) - set(U))
        for s in itertools.combinations(rest, 8):
            if absorbs(G, s, U):
                return s
    return None


def _bit_list(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _sample_bits(rng: random.Random, mask: int, size: int) -> int:
    pool = _bit_list(mask)
    if len(pool) <= size:
        return mask
    return sum(1 << v for v in rng.sample(pool, size))


def _search_tripartite(G, rng, w1, w2, w3, attempts):
    """Randomized pivot triple in W1, exhaustive extension: common third
    sets over W2 candidates until three W2 vertices share three thirds."""
    pool1 = _bit_list(w1)
    pool2 = _bit_list(w2)
    for _ in range(attempts):
        a1 = tuple(sorted(rng.sample(pool1, 3)))
        cands = []
        for b in pool2:
            thirds = w3
            for a in a1:
                thirds &= G.pair_bits(a, b)
                if not thirds:
                    break
            if thirds and thirds.bit_count() >= 1:
                cands.append((b, thirds))
        if len(cands) < 3:
            continue
        checked = 0
        for (b1, t1), (b2, t2), (b3, t3) in itertools.combinations(cands, 3):
            checked += 1
            if checked > 2000:
                break
            common = t1 & t2 & t3
            if common.bit_count() >= 3:
                return (a1, (b1, b2, b3), tuple(_bit_list(common)[:3]))
    return None


def absorb_leftover(G: Hypergraph3, family: AbsorberFamily, W) -> Tiling:
    """Tile the family's vertices together with the leftover W.

    W is chunked into ascending 4-sets; each chunk goes to the first
    unused member that absorbs it (re-tiled exactly), remaining members
    contribute their cached tilings.
    """
    W = sorted(set(W))
    if set(W) & family.covered:
        raise InputError("leftover vertices overlap the family")
    if (len(W) + len(family.covered)) % 4:
        raise InputError(
            f"family plus leftover covers {len(W) + len(family.covered)} vertices, not divisible by 4"
        )
    if len(W) % 4:
        raise InputError(f"leftover size {len(W)} not divisible by 4")
    warning = len(W) > family.omega * G.n
    blocks = [tuple(W[i : i + 4]) for i in range(0, len(W), 4)]
    used: set[int] = set()
    copies = []
    for block in blocks:
        assigned = False
        for idx, member in enumerate(family.members):
            if idx in used:
                continue
            joint = induced_perfect_tiling(G, set(member) | set(block))
            if joint is not None:
                used.add(idx)
                copies.extend(joint.copies)
                assigned = True
                break
        if not assigned:
            raise AbsorptionFailure(block)
    for idx, own in enumerate(family.tilings):
        if idx not in used:
            copies.extend(own.copies)
    tiling = Tiling.from_copies(copies)
    verdict = validate_tiling(G, tiling)
    expected = set(family.covered) | set(W)
    if not verdict.ok or set(tiling.covered) != expected:
        raise InputError(f"leftover absorption produced an invalid tiling: {verdict.violations}")
    family.stats["leftover_warning"] = warning
    return tiling
