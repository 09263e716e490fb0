"""Decision procedures for perturbation stability of finite-space maps.

Three flavours of "f survives perturbation" are implemented.  For a
perturbed map g (uniformly delta-close to f) a witness is:

* point mode, at a marked point p: a map h on the g-orbit closure of p with
  f(h(y)) = h(g(y)) that moves no orbit point farther than eps;
* measure mode, at a measure mu: a g-invariant set Y missing at most eps of
  mu's mass plus such an h on Y;
* set-valued mode, at mu: a set-valued H with mu-null images inside
  eps-balls, f(H(x)) = H(g(x)) pointwise (empty maps to empty), whose domain
  carries mass at least 1 - eps.

All modes are monotone in eps, so each perturbation g has an exact minimal
passing tolerance; stability thresholds over the whole grid follow from one
enumeration of the perturbation ball.  delta_star(eps) is then the largest
grid delta whose ball contains no perturbation needing more than eps.
"""

from __future__ import annotations

import random
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, NamedTuple, Union

from .conjugacy import PartialMap, build_semiconjugacy, verify_semiconjugacy
from .core import (
    DEFAULT_BUDGET,
    EndoMap,
    FiniteMetricSpace,
    Measure,
    ThresholdGrid,
    ac_threshold,
    atoms,
    c0_distance,
    convex_combine,
    exact,
    perturbation_count,
    pushforward,
    validate_space,
)
from .errors import BudgetExceeded, MismatchedSpace, OutOfRange, UsageError
from .expansivity import default_expansivity_constant
from .shadowing import MODE_WEAK, shadowing_delta
from .systems import GeneratorSpec, generate_system, render_system


@dataclass(frozen=True)
class PointTarget:
    point: int


@dataclass(frozen=True)
class MeasureTarget:
    measure: Measure


@dataclass(frozen=True)
class SetValuedTarget:
    measure: Measure


Target = Union[PointTarget, MeasureTarget, SetValuedTarget]


def target_mode(target: Target) -> str:
    if isinstance(target, PointTarget):
        return "point"
    if isinstance(target, MeasureTarget):
        return "measure"
    if isinstance(target, SetValuedTarget):
        return "setvalued"
    raise TypeError(f"not a stability target: {target!r}")


class StabilityDelta(NamedTuple):
    delta_star: Fraction | None
    exhaustive: bool


@dataclass(frozen=True)
class ProfileRow:
    eps: Fraction
    delta_star: Fraction | None
    exhaustive: bool


@dataclass(frozen=True)
class StabilityProfile:
    mode: str
    rows: tuple[ProfileRow, ...]


@dataclass(frozen=True)
class SetValuedMap:
    """A map from points to point sets; empty image means "not in the domain"."""

    space: FiniteMetricSpace
    images: tuple[frozenset[int], ...]

    @property
    def domain(self) -> frozenset[int]:
        return frozenset(x for x, img in enumerate(self.images) if img)


# ---------------------------------------------------------------------------
# minimal passing tolerance, per perturbation


def _orbit_with_tail(gtab: tuple[int, ...], start: int) -> tuple[list[int], int]:
    seen: dict[int, int] = {}
    orbit: list[int] = []
    x = start
    while x not in seen:
        seen[x] = len(orbit)
        orbit.append(x)
        x = gtab[x]
    return orbit, seen[x]


def _closure_mask(gtab: tuple[int, ...], mask: int) -> int:
    out = 0
    stack = mask
    while stack:
        low = stack & -stack
        stack ^= low
        x = low.bit_length() - 1
        if out & low:
            continue
        out |= low
        nxt = 1 << gtab[x]
        if not out & nxt:
            stack |= nxt
    return out


def _eps_min_point(
    dist: tuple[tuple[Fraction, ...], ...],
    ftab: tuple[int, ...],
    gtab: tuple[int, ...],
    p: int,
) -> Fraction | None:
    """Least eps at which g admits a point-mode witness at p; None if never.

    h is forced along the orbit by h(g^k(p)) = f^k(h(p)), so the search runs
    over the single free value h(p): the candidate must stay eps-close along
    the whole orbit and must respect the orbit's eventual period.
    """
    orbit, t = _orbit_with_tail(gtab, p)
    L = len(orbit)
    n = len(ftab)
    best: Fraction | None = None
    for c in range(n):
        cur = c
        val_t = c if t == 0 else None
        m = dist[c][orbit[0]]
        if best is not None and m >= best:
            continue
        dead = False
        for k in range(1, L + 1):
            cur = ftab[cur]
            if k == t:
                val_t = cur
            if k < L:
                d = dist[cur][orbit[k]]
                if d > m:
                    if best is not None and d >= best:
                        dead = True
                        break
                    m = d
        if dead:
            continue
        if cur != val_t:
            continue
        if best is None or m < best:
            best = m
    return best


def _hmin(
    dist: tuple[tuple[Fraction, ...], ...],
    ftab: tuple[int, ...],
    gtab: tuple[int, ...],
    ys: list[int],
    by_dist: tuple[tuple[int, ...], ...],
    upper: Fraction | None,
) -> Fraction | None:
    """Minimal max displacement of an intertwining h on the g-invariant set ys.

    Branch and bound: assigning h at a point forces h forward along the
    g-chain, so choices only happen at points not yet forced.  Returns the
    exact minimum when it is below ``upper`` (exclusive), else None.
    """
    assign: dict[int, int] = {}
    best = upper
    found: Fraction | None = None
    zero = Fraction(0)
    ys_sorted = sorted(ys)

    def search(idx: int, curmax: Fraction) -> None:
        nonlocal best, found
        while idx < len(ys_sorted) and ys_sorted[idx] in assign:
            idx += 1
        if idx == len(ys_sorted):
            best = curmax
            found = curmax
            return
        y = ys_sorted[idx]
        for c in by_dist[y]:
            d0 = dist[c][y]
            if best is not None and d0 >= best and d0 >= curmax:
                break  # candidates sorted by distance: the rest are no better
            m = curmax if curmax > d0 else d0
            if best is not None and m >= best:
                break
            trail = [y]
            assign[y] = c
            a, v = y, c
            ok = True
            while True:
                b = gtab[a]
                w = ftab[v]
                if b in assign:
                    ok = assign[b] == w
                    break
                dd = dist[w][b]
                if dd > m:
                    if best is not None and dd >= best:
                        ok = False
                        break
                    m = dd
                assign[b] = w
                trail.append(b)
                a, v = b, w
            if ok:
                search(idx + 1, m)
            for x in trail:
                del assign[x]

    search(0, zero)
    return found


def _eps_min_measure(
    dist: tuple[tuple[Fraction, ...], ...],
    ftab: tuple[int, ...],
    gtab: tuple[int, ...],
    weights: tuple[Fraction, ...],
    atom_list: tuple[int, ...],
    by_dist: tuple[tuple[int, ...], ...],
) -> Fraction:
    """Least eps at which g admits a measure-mode witness.  Always <= 1.

    A witness can be shrunk to the g-orbit closure of the atoms it keeps
    without losing mass or feasibility, so only closures of atom subsets
    need examining.  The empty set is admissible and costs exactly eps = 1.
    """
    one = Fraction(1)
    best = one  # empty Y: all mass lost, trivial h
    seen: set[int] = set()
    k = len(atom_list)
    for bits in range(1, 1 << k):
        mask = 0
        for i in range(k):
            if bits >> i & 1:
                mask |= 1 << atom_list[i]
        y_mask = _closure_mask(gtab, mask)
        if y_mask in seen:
            continue
        seen.add(y_mask)
        kept = Fraction(0)
        for a in atom_list:
            if y_mask >> a & 1:
                kept += weights[a]
        out_mass = one - kept
        if out_mass >= best:
            continue
        ys = []
        m = y_mask
        while m:
            low = m & -m
            ys.append(low.bit_length() - 1)
            m ^= low
        hm = _hmin(dist, ftab, gtab, ys, by_dist, upper=best)
        if hm is None:
            continue
        cand = hm if hm > out_mass else out_mass
        if cand < best:
            best = cand
    return best


def _eps_min_setvalued(
    space: FiniteMetricSpace,
    ftab: tuple[int, ...],
    gtab: tuple[int, ...],
    weights: tuple[Fraction, ...],
) -> Fraction:
    """Least eps at which g admits a set-valued witness.  Always <= 1.

    Valid set-valued maps are closed under pointwise union, so a greatest
    fixed point of the pruning operator below is the best possible H for a
    given ball radius; the domain-mass condition then pins the final eps.
    Ball configurations only change at distance values, giving finitely many
    radius levels to scan.
    """
    n = space.n
    zero_mask = 0
    for x in range(n):
        if weights[x] == 0:
            zero_mask |= 1 << x
    fbit = [1 << ftab[z] for z in range(n)]
    one = Fraction(1)
    best: Fraction | None = None
    levels = (Fraction(0),) + space.distance_values
    for t in levels:
        if best is not None and t >= best:
            break
        balls = space.ball_masks(t)
        H = [balls[x] & zero_mask for x in range(n)]
        changed = True
        while changed:
            changed = False
            for x in range(n):
                hx = H[x]
                tgt = H[gtab[x]]
                if hx:
                    new = 0
                    img = 0
                    m = hx
                    while m:
                        low = m & -m
                        z = low.bit_length() - 1
                        fz = fbit[z]
                        if tgt & fz:
                            new |= low
                            img |= fz
                        m ^= low
                    if new != hx:
                        H[x] = new
                        changed = True
                    if tgt & ~img:
                        H[gtab[x]] = tgt & img
                        changed = True
                elif tgt:
                    # empty image forces the successor's image empty too
                    H[gtab[x]] = 0
                    changed = True
        dom_mass = Fraction(0)
        for x in range(n):
            if H[x]:
                dom_mass += weights[x]
        lost = one - dom_mass
        cand = t if t > lost else lost
        if best is None or cand < best:
            best = cand
    assert best is not None
    return best


def _by_dist(space: FiniteMetricSpace) -> tuple[tuple[int, ...], ...]:
    n = space.n
    return tuple(
        tuple(sorted(range(n), key=lambda c: (space.dist[c][y], c))) for y in range(n)
    )


def _eps_min_fn(f: EndoMap, target: Target) -> Callable[[tuple[int, ...]], Fraction | None]:
    """Bind the per-perturbation minimal-tolerance function for one target."""
    space = f.space
    dist = space.dist
    ftab = f.table
    mode = target_mode(target)
    if mode == "point":
        p = target.point
        if not 0 <= p < space.n:
            raise OutOfRange(f"point {p} is not an index into the space")
        return lambda gtab: _eps_min_point(dist, ftab, gtab, p)
    measure = target.measure
    if measure.space != space:
        raise MismatchedSpace("target measure lives over another space")
    if mode == "measure":
        atom_list = tuple(sorted(atoms(measure)))
        by_dist = _by_dist(space)
        weights = measure.weights
        return lambda gtab: _eps_min_measure(dist, ftab, gtab, weights, atom_list, by_dist)
    weights = measure.weights
    return lambda gtab: _eps_min_setvalued(space, ftab, gtab, weights)


# ---------------------------------------------------------------------------
# exhaustive tables over the whole perturbation ball


def _all_records(f: EndoMap) -> list[tuple[tuple[int, ...], Fraction]]:
    """Every self-map with its uniform distance from f, in enumeration order."""
    space = f.space
    n = space.n
    rows = [space.dist[f.table[i]] for i in range(n)]
    out = []
    for gtab in product(range(n), repeat=n):
        r = rows[0][gtab[0]]
        for i in range(1, n):
            d = rows[i][gtab[i]]
            if d > r:
                r = d
        out.append((gtab, r))
    return out


class _EpsMinTable:
    """Distance-sorted worst-case tolerances over nested perturbation balls."""

    def __init__(self, records: list[tuple[tuple[int, ...], Fraction]],
                 eps_min: list[Fraction | None]) -> None:
        self.records = records
        self.eps_min = eps_min
        by_radius: dict[Fraction, Fraction | None] = {}
        for (gtab, r), em in zip(records, eps_min):
            if r in by_radius:
                cur = by_radius[r]
                if cur is None:
                    continue
                if em is None or em > cur:
                    by_radius[r] = em
            else:
                by_radius[r] = em
        self.radii = sorted(by_radius)
        worst: list[Fraction | None] = []
        cur: Fraction | None = Fraction(0)
        for r in self.radii:
            em = by_radius[r]
            if cur is None or em is None:
                cur = None
            elif em > cur:
                cur = em
            worst.append(cur)
        self.worst = worst

    def worst_at(self, delta: Fraction) -> Fraction | None:
        """Max tolerance needed over the delta-ball; None reads "impossible"."""
        idx = bisect_right(self.radii, delta) - 1
        if idx < 0:
            return Fraction(0)  # ball contains only f itself
        return self.worst[idx]

    def delta_star(self, eps: Fraction, grid: ThresholdGrid) -> Fraction | None:
        for delta in reversed(grid.values):
            w = self.worst_at(delta)
            if w is not None and w <= eps:
                return delta
        return None

    def first_failure(self, eps: Fraction, delta: Fraction) -> tuple[int, ...] | None:
        """Lexicographically least perturbation in the delta-ball needing > eps."""
        for (gtab, r), em in zip(self.records, self.eps_min):
            if r <= delta and (em is None or em > eps):
                return gtab
        return None


def _eps_min_table(
    f: EndoMap,
    target: Target,
    records: list[tuple[tuple[int, ...], Fraction]] | None = None,
) -> _EpsMinTable:
    if records is None:
        records = _all_records(f)
    fn = _eps_min_fn(f, target)
    return _EpsMinTable(records, [fn(gtab) for gtab, _ in records])


# ---------------------------------------------------------------------------
# public entry points


def _default_grid(f: EndoMap, target: Target) -> ThresholdGrid:
    if isinstance(target, PointTarget):
        mu = Measure.dirac(f.space, target.point)
    else:
        mu = target.measure
    return ThresholdGrid.epsilons(f.space, mu)


def stability_delta(
    f: EndoMap,
    target: Target,
    eps,
    budget: int = DEFAULT_BUDGET,
    sample: bool = False,
    seed: int = 0,
    sample_size: int = 500,
    _cache: dict | None = None,
) -> StabilityDelta:
    """Largest grid delta at which every delta-perturbation passes at eps.

    Walks the delta grid top-down; at each delta either the full ball is
    enumerated (when it fits the budget) or, with ``sample=True``, a seeded
    uniform sample stands in and a passing verdict is downgraded to "no
    counterexample found" via exhaustive=False.  Without sampling a
    too-large ball raises BudgetExceeded.  Returns delta_star None when even
    the sub-grid delta (only f itself) fails.
    """
    eps = exact(eps)
    if eps < 0:
        raise OutOfRange("eps must be >= 0")
    fn = _eps_min_fn(f, target)
    cache: dict[tuple[int, ...], Fraction | None] = _cache if _cache is not None else {}

    def passes(gtab: tuple[int, ...]) -> bool:
        em = cache.get(gtab)
        if em is None and gtab not in cache:
            em = fn(gtab)
            cache[gtab] = em
        return em is not None and em <= eps

    grid = ThresholdGrid.deltas(f.space)
    space = f.space
    for i, delta in enumerate(reversed(grid.values)):
        count = perturbation_count(f, delta)
        if count <= budget:
            choices = [
                tuple(x for x in range(space.n) if space.dist[f.table[j]][x] <= delta)
                for j in range(space.n)
            ]
            if all(passes(gtab) for gtab in product(*choices)):
                return StabilityDelta(delta, True)
        elif not sample:
            raise BudgetExceeded(count, budget)
        else:
            rng = random.Random(seed * 1_000_003 + i)
            choices = [
                tuple(x for x in range(space.n) if space.dist[f.table[j]][x] <= delta)
                for j in range(space.n)
            ]
            drawn = (
                tuple(rng.choice(c) for c in choices) for _ in range(sample_size)
            )
            if all(passes(gtab) for gtab in drawn):
                return StabilityDelta(delta, False)
    return StabilityDelta(None, True)


def _row_sort_key(delta_star: Fraction | None) -> tuple:
    return (0, Fraction(0)) if delta_star is None else (1, delta_star)


def stability_profile(
    f: EndoMap,
    target: Target,
    grid: ThresholdGrid | None = None,
    budget: int = DEFAULT_BUDGET,
    sample: bool = False,
    seed: int = 0,
    sample_size: int = 500,
) -> StabilityProfile:
    """delta_star for every eps on the grid canonical for the target measure.

    The returned rows are checked to be nondecreasing in eps; a violation
    would mean one of the mode oracles is unsound, so it raises rather than
    returning quietly wrong data.
    """
    eps_grid = grid if grid is not None else _default_grid(f, target)
    delta_grid = ThresholdGrid.deltas(f.space)
    top_count = perturbation_count(f, delta_grid.top)
    rows: list[ProfileRow] = []
    if top_count <= budget:
        table = _eps_min_table(f, target)
        for eps in eps_grid:
            rows.append(ProfileRow(eps, table.delta_star(eps, delta_grid), True))
    else:
        cache: dict[tuple[int, ...], Fraction | None] = {}
        for eps in eps_grid:
            ds, exhaustive = stability_delta(
                f, target, eps, budget=budget, sample=sample, seed=seed,
                sample_size=sample_size, _cache=cache,
            )
            rows.append(ProfileRow(eps, ds, exhaustive))
    for a, b in zip(rows, rows[1:]):
        if _row_sort_key(a.delta_star) > _row_sort_key(b.delta_star):
            raise AssertionError(
                f"profile not monotone: delta*({a.eps}) = {a.delta_star} "
                f"> delta*({b.eps}) = {b.delta_star}"
            )
    return StabilityProfile(target_mode(target), tuple(rows))


def setvalued_from_partial(
    h: PartialMap,
    mu: Measure,
    eps,
    f: EndoMap | None = None,
    g: EndoMap | None = None,
) -> tuple[SetValuedMap, tuple]:
    """Lift a partial map to a set-valued map and report which of the four
    stability conditions it satisfies at (mu, eps).

    The lift sends domain points to singletons and everything else to the
    empty set.  The intertwining condition f(H(x)) = H(g(x)) is only checked
    when both maps are supplied.
    """
    from .conjugacy import CheckResult  # local import to keep module deps one-way

    if h.space != mu.space:
        raise MismatchedSpace("partial map and measure live over different spaces")
    eps = exact(eps)
    space = mu.space
    mapping = h.as_dict()
    images = tuple(
        frozenset((mapping[x],)) if x in mapping else frozenset()
        for x in range(space.n)
    )
    sv = SetValuedMap(space, images)

    dom_mass = mu.mass(sv.domain)
    mass_ok = dom_mass >= 1 - eps

    null_witness = next(
        (x for x in sorted(mapping) if mu.weights[mapping[x]] > 0), None
    )
    close_witness = next(
        (x for x in sorted(mapping) if space.dist[mapping[x]][x] > eps), None
    )
    checks = [
        CheckResult("domain_mass", mass_ok, None if mass_ok else (dom_mass,)),
        CheckResult("null_images", null_witness is None,
                    None if null_witness is None else (null_witness, mapping[null_witness])),
        CheckResult("c0_close", close_witness is None,
                    None if close_witness is None else (close_witness,)),
    ]
    if f is not None and g is not None:
        if f.space != space or g.space != space:
            raise MismatchedSpace("maps live over different spaces")
        comm_witness = None
        for x in range(space.n):
            img = frozenset(f.table[z] for z in images[x])
            if img != images[g.table[x]]:
                comm_witness = x
                break
        checks.append(
            CheckResult("intertwines", comm_witness is None,
                        None if comm_witness is None else (comm_witness,))
        )
    return sv, tuple(checks)


# ---------------------------------------------------------------------------
# randomized verification of the transfer principles on generated systems


@dataclass(frozen=True)
class TheoremReport:
    item: str
    trials: int
    systems: int
    checks: int
    passed: bool
    counterexample: dict | None
    notes: tuple[str, ...] = ()


THEOREM_ITEMS = ("1", "2", "4", "5", "7", "basicas")


def isolated_point_system() -> tuple[FiniteMetricSpace, EndoMap, int]:
    """Three points, one far from the close pair, under the identity map.

    The far point is a fixed point whose removal costs all the mass of a
    point mass sitting on it; the system separates the three stability
    flavours at small tolerances.
    """
    ten = Fraction(10)
    one = Fraction(1)
    zero = Fraction(0)
    dist = (
        (zero, ten, ten),
        (ten, zero, one),
        (ten, one, zero),
    )
    space = validate_space(("p", "a", "b"), dist)
    return space, EndoMap.identity(space), 0


def _frac_str(x: Fraction | None) -> str | None:
    return None if x is None else str(Fraction(x))


def _trial_rng(seed: int, trial: int) -> random.Random:
    return random.Random(9_000_000 + seed * 1_000_003 + trial)


def _trial_system(seed: int, trial: int, max_points: int, min_points: int = 2):
    rng = _trial_rng(seed, trial)
    n = rng.randint(min_points, max_points)
    gseed = rng.randrange(2**30)
    spec = GeneratorSpec(n=n, seed=gseed)
    return generate_system(spec), spec, rng

def _random_measure(space: FiniteMetricSpace, rng: random.Random,
                    support: Iterable[int] | None = None) -> Measure:
    n = space.n
    if support is None:
        support = rng.sample(range(n), rng.randint(1, n))
    w = [Fraction(0)] * n
    for x in support:
        w[x] = Fraction(rng.randint(1, 9))
    tot = sum(w)
    return Measure(space, tuple(v / tot for v in w))


def _system_payload(sysf, spec: GeneratorSpec) -> dict:
    import json

    return {
        "generator": {"n": spec.n, "seed": spec.seed, "model": spec.model,
                      "coordinate_range": spec.coordinate_range},
        "system": json.loads(render_system(sysf)),
    }


def _check_budget(f: EndoMap, budget: int) -> None:
    top = ThresholdGrid.deltas(f.space).top
    count = perturbation_count(f, top)
    if count > budget:
        raise BudgetExceeded(count, budget)


def _item_1(trials: int, seed: int, max_points: int, budget: int) -> TheoremReport:
    # marked-point stability and point-mass stability agree below tolerance 1
    checks = 0
    for trial in range(trials):
        sysf, spec, _rng = _trial_system(seed, trial, max_points)
        f = sysf.maps["f"]
        space = f.space
        _check_budget(f, budget)
        records = _all_records(f)
        dgrid = ThresholdGrid.deltas(space)
        for p in range(space.n):
            mu = Measure.dirac(space, p)
            t_point = _eps_min_table(f, PointTarget(p), records)
            t_meas = _eps_min_table(f, MeasureTarget(mu), records)
            for eps in ThresholdGrid.epsilons(space, mu):
                if eps >= 1:
                    continue
                a = t_point.delta_star(eps, dgrid)
                b = t_meas.delta_star(eps, dgrid)
                checks += 1
                if a != b:
                    return TheoremReport(
                        "1", trials, trial + 1, checks, False,
                        {"trial": trial, "point": space.labels[p],
                         "eps": _frac_str(eps), "point_delta": _frac_str(a),
                         "measure_delta": _frac_str(b),
                         **_system_payload(sysf, spec)},
                    )
    return TheoremReport("1", trials, trials, checks, True, None)


def _item_2(trials: int, seed: int, max_points: int, budget: int) -> TheoremReport:
    # stability under a dominating measure transfers below the mass threshold
    checks = 0
    for trial in range(trials):
        sysf, spec, rng = _trial_system(seed, trial, max_points)
        f = sysf.maps["f"]
        space = f.space
        _check_budget(f, budget)
        records = _all_records(f)
        dgrid = ThresholdGrid.deltas(space)
        nu = _random_measure(space, rng, support=range(space.n))
        mu = _random_measure(space, rng)
        t_mu = _eps_min_table(f, MeasureTarget(mu), records)
        t_nu = _eps_min_table(f, MeasureTarget(nu), records)
        nu_grid = ThresholdGrid.epsilons(space, nu)
        for eps in ThresholdGrid.epsilons(space, mu):
            thr = ac_threshold(mu, nu, eps)
            a = t_mu.delta_star(eps, dgrid)
            for eps2 in nu_grid:
                if eps2 > eps or (thr is not None and eps2 >= thr):
                    continue
                b = t_nu.delta_star(eps2, dgrid)
                checks += 1
                if a is None or (b is not None and a < b):
                    return TheoremReport(
                        "2", trials, trial + 1, checks, False,
                        {"trial": trial, "eps": _frac_str(eps),
                         "eps_transferred": _frac_str(eps2),
                         "threshold": _frac_str(thr),
                         "delta_dominated": _frac_str(a),
                         "delta_dominating": _frac_str(b),
                         "mu": [_frac_str(w) for w in mu.weights],
                         "nu": [_frac_str(w) for w in nu.weights],
                         **_system_payload(sysf, spec)},
                    )
    return TheoremReport("2", trials, trials, checks, True, None)


def _group_powers(perm: tuple[int, ...]) -> list[tuple[int, ...]]:
    n = len(perm)
    ident = tuple(range(n))
    powers = [ident]
    t = perm
    while t != ident:
        powers.append(t)
        t = tuple(perm[x] for x in t)
    return powers


def _symmetrize(space: FiniteMetricSpace, perm: tuple[int, ...]) -> FiniteMetricSpace:
    # average the metric over the cyclic group of perm: perm becomes an isometry
    powers = _group_powers(perm)
    m = len(powers)
    n = space.n
    dist = [
        [sum(space.dist[P[i]][P[j]] for P in powers) / m for j in range(n)]
        for i in range(n)
    ]
    return validate_space(space.labels, dist)


def _modulus(space: FiniteMetricSpace, htab: tuple[int, ...], t: Fraction) -> Fraction:
    """Largest displacement of an h-image pair whose source pair is t-close."""
    out = Fraction(0)
    n = space.n
    for i in range(n):
        for j in range(i + 1, n):
            if space.dist[i][j] <= t:
                d = space.dist[htab[i]][htab[j]]
                if d > out:
                    out = d
    return out


def _conjugate_table(ftab, htab, hinv):
    return tuple(htab[ftab[hinv[x]]] for x in range(len(ftab)))


def _item_4(trials: int, seed: int, max_points: int, budget: int) -> TheoremReport:
    # isometric conjugation: identical profiles; general bijection: profiles
    # degrade by no more than the moduli of continuity of the bijection
    checks = 0
    notes: list[str] = []
    skipped = 0
    for trial in range(trials):
        sysf, spec, rng = _trial_system(seed, trial, max_points, min_points=3)
        f0 = sysf.maps["f"]
        space0 = f0.space
        n = space0.n
        _check_budget(f0, budget)

        perm = list(range(n))
        while tuple(perm) == tuple(range(n)):
            rng.shuffle(perm)
        perm = tuple(perm)
        space_i = _symmetrize(space0, perm)
        f = EndoMap(space_i, f0.table)
        hinv = [0] * n
        for i, v in enumerate(perm):
            hinv[v] = i
        hinv = tuple(hinv)
        mu = _random_measure(space_i, rng)
        f_conj = EndoMap(space_i, _conjugate_table(f.table, perm, hinv))
        mu_conj = pushforward(EndoMap(space_i, perm), mu)
        dgrid = ThresholdGrid.deltas(space_i)
        t_f = _eps_min_table(f, MeasureTarget(mu))
        t_c = _eps_min_table(f_conj, MeasureTarget(mu_conj))
        grid_a = ThresholdGrid.epsilons(space_i, mu)
        grid_b = ThresholdGrid.epsilons(space_i, mu_conj)
        if grid_a.values != grid_b.values:
            return TheoremReport(
                "4", trials, trial + 1, checks, False,
                {"trial": trial, "kind": "isometric", "reason": "grid mismatch",
                 **_system_payload(sysf, spec)},
            )
        for eps in grid_a:
            a = t_f.delta_star(eps, dgrid)
            b = t_c.delta_star(eps, dgrid)
            checks += 1
            if a != b:
                return TheoremReport(
                    "4", trials, trial + 1, checks, False,
                    {"trial": trial, "kind": "isometric", "perm": list(perm),
                     "eps": _frac_str(eps), "delta_original": _frac_str(a),
                     "delta_conjugated": _frac_str(b),
                     **_system_payload(sysf, spec)},
                )

        hperm = None
        for _ in range(50):
            cand = list(range(n))
            rng.shuffle(cand)
            if any(
                space0.dist[cand[i]][cand[j]] != space0.dist[i][j]
                for i in range(n) for j in range(i + 1, n)
            ):
                hperm = tuple(cand)
                break
        if hperm is None:
            skipped += 1
            continue
        hinv2 = [0] * n
        for i, v in enumerate(hperm):
            hinv2[v] = i
        hinv2 = tuple(hinv2)
        nu = _random_measure(space0, rng)
        g_conj = EndoMap(space0, _conjugate_table(f0.table, hperm, hinv2))
        nu_conj = pushforward(EndoMap(space0, hperm), nu)
        dgrid0 = ThresholdGrid.deltas(space0)
        t_f0 = _eps_min_table(f0, MeasureTarget(nu))
        t_c0 = _eps_min_table(g_conj, MeasureTarget(nu_conj))
        mod_levels = (Fraction(0),) + space0.distance_values
        for eps in ThresholdGrid.epsilons(space0, nu_conj):
            m1 = max(t for t in mod_levels if _modulus(space0, hperm, t) <= eps)
            eps_back = min(eps, m1)
            d_f = t_f0.delta_star(eps_back, dgrid0)
            if d_f is None:
                continue
            m2 = max(t for t in dgrid0.values
                     if _modulus(space0, hinv2, t) <= d_f)
            lhs = t_c0.delta_star(eps, dgrid0)
            checks += 1
            if lhs is None or lhs < m2:
                return TheoremReport(
                    "4", trials, trial + 1, checks, False,
                    {"trial": trial, "kind": "bijection", "perm": list(hperm),
                     "eps": _frac_str(eps), "eps_back": _frac_str(eps_back),
                     "delta_original": _frac_str(d_f),
                     "delta_required": _frac_str(m2),
                     "delta_conjugated": _frac_str(lhs),
                     **_system_payload(sysf, spec)},
                )
    if skipped:
        notes.append(f"{skipped} trial(s) had no non-isometric bijection")
    return TheoremReport("4", trials, trials, checks, True, None, tuple(notes))


def _item_5(trials: int, seed: int, max_points: int, budget: int) -> TheoremReport:
    # blending measures never hurts more than the worse ingredient, once the
    # tolerance is clamped under half the separation constant
    checks = 0
    weights = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1))
    for trial in range(trials):
        sysf, spec, rng = _trial_system(seed, trial, max_points)
        f = sysf.maps["f"]
        space = f.space
        _check_budget(f, budget)
        e = default_expansivity_constant(f)
        records = _all_records(f)
        dgrid = ThresholdGrid.deltas(space)
        mu = _random_measure(space, rng)
        nu = _random_measure(space, rng)
        t_mu = _eps_min_table(f, MeasureTarget(mu), records)
        t_nu = _eps_min_table(f, MeasureTarget(nu), records)
        for t in weights:
            combo = convex_combine(t, mu, nu)
            t_combo = _eps_min_table(f, MeasureTarget(combo), records)
            for eps in ThresholdGrid.epsilons(space, combo):
                eps_c = min(e / 2, eps)
                rhs_a = t_mu.delta_star(eps_c, dgrid)
                rhs_b = t_nu.delta_star(eps_c, dgrid)
                lhs = t_combo.delta_star(eps, dgrid)
                checks += 1
                rhs = None
                if rhs_a is not None and rhs_b is not None:
                    rhs = min(rhs_a, rhs_b)
                if rhs is not None and (lhs is None or lhs < rhs):
                    return TheoremReport(
                        "5", trials, trial + 1, checks, False,
                        {"trial": trial, "blend": _frac_str(t),
                         "eps": _frac_str(eps), "eps_clamped": _frac_str(eps_c),
                         "delta_blend": _frac_str(lhs),
                         "delta_mu": _frac_str(rhs_a), "delta_nu": _frac_str(rhs_b),
                         "mu": [_frac_str(w) for w in mu.weights],
                         "nu": [_frac_str(w) for w in nu.weights],
                         **_system_payload(sysf, spec)},
                    )
    return TheoremReport("5", trials, trials, checks, True, None)


def _item_7(trials: int, seed: int, max_points: int, budget: int) -> TheoremReport:
    # the shadowing threshold at the clamped tolerance lower-bounds the
    # stability threshold, and the constructive witness route certifies it
    checks = 0
    notes: list[str] = []
    cap = 128
    sampled = False
    for trial in range(trials):
        sysf, spec, rng = _trial_system(seed, trial, max_points)
        f = sysf.maps["f"]
        space = f.space
        _check_budget(f, budget)
        e = default_expansivity_constant(f)
        mu = sysf.measures["dirac"] if trial % 2 else sysf.measures["full"]
        records = _all_records(f)
        dgrid = ThresholdGrid.deltas(space)
        t_mu = _eps_min_table(f, MeasureTarget(mu), records)
        for eps in ThresholdGrid.epsilons(space, mu):
            eps1 = min(e, eps) / 8
            delta_w = shadowing_delta(f, eps1, MODE_WEAK, mu)
            lhs = t_mu.delta_star(eps, dgrid)
            checks += 1
            if lhs is None or lhs < delta_w:
                return TheoremReport(
                    "7", trials, trial + 1, checks, False,
                    {"trial": trial, "eps": _frac_str(eps),
                     "eps_clamped": _frac_str(eps1),
                     "delta_shadowing": _frac_str(delta_w),
                     "delta_stability": _frac_str(lhs),
                     "measure": [_frac_str(w) for w in mu.weights],
                     **_system_payload(sysf, spec)},
                )
            if eps <= 0:
                continue
            ball = [gtab for gtab, r in records if r <= delta_w]
            if len(ball) > cap:
                ball = random.Random(seed * 7919 + trial).sample(ball, cap)
                sampled = True
            for gtab in ball:
                g = EndoMap(space, gtab)
                cert = build_semiconjugacy(f, g, mu, eps, e)
                result = verify_semiconjugacy(cert)
                checks += 1
                if not (result.passed and cert.passed
                        and cert.mass_defect <= cert.epsilon):
                    failed = [c.name for c in result.checks if not c.passed]
                    return TheoremReport(
                        "7", trials, trial + 1, checks, False,
                        {"trial": trial, "eps": _frac_str(eps),
                         "perturbation": list(gtab), "failed_checks": failed,
                         **_system_payload(sysf, spec)},
                    )
    if sampled:
        notes.append(f"witness balls larger than {cap} maps were sampled")
    return TheoremReport("7", trials, trials, checks, True, None, tuple(notes))


def _item_basicas(trials: int, seed: int, max_points: int, budget: int) -> TheoremReport:
    # fixed pinned-down system: the three flavours separate exactly as frozen
    space, f, p = isolated_point_system()
    mu = Measure.dirac(space, p)
    records = _all_records(f)
    dgrid = ThresholdGrid.deltas(space)
    t_point = _eps_min_table(f, PointTarget(p), records)
    t_meas = _eps_min_table(f, MeasureTarget(mu), records)
    t_sv = _eps_min_table(f, SetValuedTarget(mu), records)
    half, one, ten = Fraction(1, 2), Fraction(1), Fraction(10)
    expected = [
        ("point", t_point, half, one),
        ("point", t_point, one, one),
        ("point", t_point, ten, ten),
        ("measure", t_meas, half, one),
        ("measure", t_meas, one, ten),
        ("measure", t_meas, ten, ten),
        ("setvalued", t_sv, half, None),
        ("setvalued", t_sv, one, ten),
        ("setvalued", t_sv, ten, ten),
    ]
    checks = 0
    for mode, table, eps, want in expected:
        got = table.delta_star(eps, dgrid)
        checks += 1
        if got != want:
            return TheoremReport(
                "basicas", 1, 1, checks, False,
                {"mode": mode, "eps": _frac_str(eps),
                 "expected": _frac_str(want), "got": _frac_str(got)},
            )
    # marked point and point mass agree strictly below 1, split at 1
    for eps in ThresholdGrid.epsilons(space, mu):
        checks += 1
        a = t_point.delta_star(eps, dgrid)
        b = t_meas.delta_star(eps, dgrid)
        if eps < 1 and a != b:
            return TheoremReport(
                "basicas", 1, 1, checks, False,
                {"mode": "agreement", "eps": _frac_str(eps),
                 "point": _frac_str(a), "measure": _frac_str(b)},
            )
    if t_point.delta_star(one, dgrid) == t_meas.delta_star(one, dgrid):
        return TheoremReport(
            "basicas", 1, 1, checks + 1, False,
            {"mode": "divergence", "eps": "1",
             "reason": "modes failed to separate at tolerance 1"},
        )
    return TheoremReport("basicas", 1, 1, checks + 1, True, None)


_ITEM_CHECKS = {
    "1": _item_1,
    "2": _item_2,
    "4": _item_4,
    "5": _item_5,
    "7": _item_7,
    "basicas": _item_basicas,
}


def theorem_check(
    item: str,
    trials: int = 40,
    seed: int = 0,
    max_points: int = 4,
    budget: int = DEFAULT_BUDGET,
) -> TheoremReport:
    """Probe one transfer principle on randomly generated systems.

    Every reported counterexample carries the generator coordinates and the
    full system, so failures replay deterministically.  ``basicas`` ignores
    trials/max_points: it is a single pinned system with frozen expectations.
    """
    if item not in _ITEM_CHECKS:
        raise UsageError(
            f"unknown theorem item {item!r}; pick one of {', '.join(THEOREM_ITEMS)}"
        )
    if trials < 1:
        raise OutOfRange("trials must be >= 1")
    if max_points < 2:
        raise OutOfRange("max_points must be >= 2")
    return _ITEM_CHECKS[item](trials, seed, max_points, budget)
