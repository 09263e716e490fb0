"""Acceptance gate.

One test per headline guarantee.  Each prints a single PASS/FAIL line on the
real stdout (bypassing capture) with the measured wall time, then asserts.
All arithmetic below is exact; the time limits are the only tolerances.
"""

import json
import random
import time
import warnings
from fractions import Fraction
from itertools import product
from pathlib import Path

from mustab import (
    EndoMap,
    GeneratorSpec,
    Measure,
    MeasureTarget,
    ThresholdGrid,
    atoms,
    exact,
    exact_oracle_bound,
    generate_system,
    is_abs_continuous,
    lasso_oracle,
    parse_system,
    render_system,
    shadowable_start_set,
    shadowing_delta,
    stability_delta,
    theorem_check,
)
from mustab.cli import main as cli_main

FIXTURES = Path(__file__).parent / "fixtures"


def _verdict(capsys, num: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}"
    with capsys.disabled():
        print(flush=True)
        print(line, flush=True)
    assert ok, line


def test_criterion_01_marked_point_equals_point_mass(capsys):
    limit = 300.0
    t0 = time.monotonic()
    report = theorem_check("1", trials=200, seed=0, max_points=5)
    elapsed = time.monotonic() - t0
    ok = report.passed and report.systems == 200 and elapsed < limit
    _verdict(
        capsys, 1, ok,
        f"point-mode delta* == point-mass delta* below tolerance 1 on "
        f"{report.systems} systems / {report.checks} comparisons, "
        f"{elapsed:.1f}s (limit {limit:.0f}s)"
        + ("" if report.passed else f"; counterexample {report.counterexample}"),
    )


def test_criterion_02_stability_transfers_under_domination(capsys):
    limit = 300.0
    t0 = time.monotonic()
    report = theorem_check("2", trials=100, seed=0, max_points=4)
    elapsed = time.monotonic() - t0
    ok = (report.passed and report.systems == 100 and report.checks >= 100
          and elapsed < limit)
    _verdict(
        capsys, 2, ok,
        f"dominated-measure delta* bounded below by dominating-measure delta* "
        f"on {report.systems} measure pairs / {report.checks} tolerance pairs, "
        f"{elapsed:.1f}s (limit {limit:.0f}s)"
        + ("" if report.passed else f"; counterexample {report.counterexample}"),
    )


def test_criterion_03_atoms_are_dominating_points(capsys):
    limit = 1.0
    rng = random.Random(314)
    spaces = [
        generate_system(GeneratorSpec(n=2 + s % 4, seed=1300 + s)).space
        for s in range(8)
    ]
    measures = []
    while len(measures) < 1000:
        space = spaces[len(measures) % len(spaces)]
        raw = [rng.randint(0, 4) for _ in range(space.n)]
        if not any(raw):
            raw[rng.randrange(space.n)] = 1
        total = sum(raw)
        measures.append(
            (space, Measure(space, tuple(Fraction(v, total) for v in raw)))
        )
    t0 = time.monotonic()
    bad = 0
    for space, mu in measures:
        via_domination = frozenset(
            p for p in range(space.n)
            if is_abs_continuous(Measure.dirac(space, p), mu)
        )
        if atoms(mu) != via_domination:
            bad += 1
    elapsed = time.monotonic() - t0
    ok = bad == 0 and elapsed < limit
    _verdict(
        capsys, 3, ok,
        f"atom set equals point-mass-domination set on 1000 random measures "
        f"({bad} mismatches), {elapsed:.3f}s (limit {limit:.0f}s)",
    )


def test_criterion_04_conjugation_transport(capsys):
    limit = 300.0
    trials = 70
    t0 = time.monotonic()
    report = theorem_check("4", trials=trials, seed=0, max_points=4)
    elapsed = time.monotonic() - t0
    skipped = 0
    for note in report.notes:
        if "no non-isometric bijection" in note:
            skipped = int(note.split()[0])
    non_isometric = trials - skipped
    ok = (report.passed and trials >= 50 and non_isometric >= 50
          and elapsed < limit)
    _verdict(
        capsys, 4, ok,
        f"profiles invariant under {trials} isometries, bounded under "
        f"{non_isometric} non-isometric bijections, {elapsed:.1f}s "
        f"(limit {limit:.0f}s)"
        + ("" if report.passed else f"; counterexample {report.counterexample}"),
    )


def test_criterion_05_convex_combinations(capsys):
    limit = 600.0
    t0 = time.monotonic()
    report = theorem_check("5", trials=100, seed=0, max_points=4)
    elapsed = time.monotonic() - t0
    ok = (report.passed and report.systems == 100 and report.checks >= 500
          and elapsed < limit)
    _verdict(
        capsys, 5, ok,
        f"blended-measure delta* never below the worse ingredient at five "
        f"blend weights, {report.systems} systems / {report.checks} checks, "
        f"{elapsed:.1f}s (limit {limit:.0f}s)"
        + ("" if report.passed else f"; counterexample {report.counterexample}"),
    )


def test_criterion_06_shadowing_bounds_stability_with_certificates(capsys):
    limit = 600.0
    t0 = time.monotonic()
    report = theorem_check("7", trials=100, seed=0, max_points=4)
    elapsed = time.monotonic() - t0
    ok = report.passed and report.systems == 100 and elapsed < limit
    notes = f" [{'; '.join(report.notes)}]" if report.notes else ""
    _verdict(
        capsys, 6, ok,
        f"weak-shadowing delta lower-bounds stability delta* and every map in "
        f"the certified ball got a verified witness, {report.systems} systems "
        f"/ {report.checks} checks{notes}, {elapsed:.1f}s (limit {limit:.0f}s)"
        + ("" if report.passed else f"; counterexample {report.counterexample}"),
    )


def test_criterion_07_automaton_agrees_with_bounded_oracle(capsys):
    limit = 600.0
    t0 = time.monotonic()
    checks = 0
    mismatch = None
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for n in (2, 3, 4):
            bound = exact_oracle_bound(n)
            for s in range(2):
                space = generate_system(
                    GeneratorSpec(n=n, seed=1400 + 10 * n + s)
                ).space
                eps_grid = ThresholdGrid.epsilons(space).values
                delta_grid = ThresholdGrid.deltas(space).values
                for ftab in product(range(n), repeat=n):
                    f = EndoMap(space, ftab)
                    for eps in eps_grid:
                        for delta in delta_grid:
                            starts = shadowable_start_set(f, eps, delta)
                            for x0 in range(n):
                                checks += 1
                                if (x0 in starts) != lasso_oracle(
                                    f, eps, delta, x0, bound
                                ):
                                    mismatch = (n, s, ftab, eps, delta, x0)
        bound = exact_oracle_bound(5)
        for s in range(100):
            sysf = generate_system(GeneratorSpec(n=5, seed=1500 + s))
            f = sysf.maps["f"]
            space = f.space
            for eps in ThresholdGrid.epsilons(space):
                for delta in ThresholdGrid.deltas(space):
                    starts = shadowable_start_set(f, eps, delta)
                    for x0 in range(5):
                        checks += 1
                        if (x0 in starts) != lasso_oracle(f, eps, delta, x0, bound):
                            mismatch = ("n5", s, f.table, eps, delta, x0)
    elapsed = time.monotonic() - t0
    ok = mismatch is None and elapsed < limit
    _verdict(
        capsys, 7, ok,
        f"start-set automaton matched the depth-bounded oracle on {checks} "
        f"(map, eps, delta, start) cases incl. every self-map for n <= 4, "
        f"{elapsed:.1f}s (limit {limit:.0f}s)"
        + ("" if mismatch is None else f"; first mismatch {mismatch}"),
    )


def test_criterion_08_pinned_system_rows(capsys):
    limit = 10.0
    t0 = time.monotonic()
    report = theorem_check("basicas")
    elapsed = time.monotonic() - t0
    ok = report.passed and elapsed < limit
    _verdict(
        capsys, 8, ok,
        f"pinned three-point system reproduces all nine frozen delta* rows "
        f"and the mode split at tolerance 1 ({report.checks} checks), "
        f"{elapsed:.2f}s (limit {limit:.0f}s)"
        + ("" if report.passed else f"; counterexample {report.counterexample}"),
    )


def test_criterion_09_weak_mode_is_strictly_weaker(capsys):
    limit = 300.0
    t0 = time.monotonic()
    data = json.loads((FIXTURES / "strictness_witness.json").read_text())
    sysf = parse_system(json.dumps(data["system"]))
    f = sysf.maps["f"]
    mu = sysf.measures[data["measure"]]
    space = f.space
    eps = exact(data["eps"])

    problems = []
    regen = generate_system(GeneratorSpec(**data["generator"]))
    if json.loads(render_system(regen)) != data["system"]:
        problems.append("stored system does not match its generator recipe")

    d_weak = shadowing_delta(f, eps, "weak", mu)
    d_full = shadowing_delta(f, eps, "full", mu)
    if d_weak != exact(data["delta_weak"]):
        problems.append(f"delta_weak {d_weak} != stored {data['delta_weak']}")
    if d_full != exact(data["delta_full"]):
        problems.append(f"delta_full {d_full} != stored {data['delta_full']}")
    if not d_weak > d_full:
        problems.append("no strict gap between weak and full modes")

    starts = shadowable_start_set(f, eps, exact(data["delta"]))
    labels = sorted(space.labels[x] for x in starts)
    if labels != data["shadowable_starts"]:
        problems.append(f"start set {labels} != stored {data['shadowable_starts']}")
    mass = mu.mass(starts)
    if mass != exact(data["shadowable_mass"]):
        problems.append(f"start-set mass {mass} != stored")
    if not (mass >= 1 - eps and eps < 1 and mass > 0):
        problems.append("witness is vacuous")
    if all(mu.weights[x] == 0 or x in starts for x in range(space.n)):
        problems.append("full mode did not actually fail at the witness delta")

    # replay the search that found the fixture: first hit must match
    hit = None
    search = data["search"]
    for seed in range(search["max_seed"]):
        for n in search["sizes"]:
            cand = generate_system(GeneratorSpec(n=n, seed=seed))
            cf = cand.maps["f"]
            cmu = cand.measures["full"]
            for ceps in ThresholdGrid.epsilons(cf.space, cmu):
                if ceps >= 1:
                    continue
                if (shadowing_delta(cf, ceps, "weak", cmu)
                        > shadowing_delta(cf, ceps, "full", cmu)):
                    hit = (seed, n, ceps)
                    break
            if hit:
                break
        if hit:
            break
    if hit != (search["found_seed"], data["generator"]["n"], eps):
        problems.append(f"search replay found {hit} instead of the stored witness")

    elapsed = time.monotonic() - t0
    ok = not problems and elapsed < limit
    _verdict(
        capsys, 9, ok,
        f"stored witness system (mass-tolerant passes, full-support fails at "
        f"eps {data['eps']}, delta {data['delta']}, start-set mass "
        f"{data['shadowable_mass']}) replays exactly, {elapsed:.1f}s "
        f"(limit {limit:.0f}s)"
        + ("" if not problems else "; " + "; ".join(problems)),
    )


def test_criterion_10_reruns_are_byte_identical(capsys):
    limit = 300.0
    t0 = time.monotonic()
    problems = []

    spec = GeneratorSpec(n=5, seed=8)
    text = render_system(generate_system(spec))
    if render_system(generate_system(spec)) != text:
        problems.append("generator output changed between runs")
    if render_system(parse_system(text)) != text:
        problems.append("parse/render round trip changed bytes")

    if theorem_check("5", trials=5, max_points=3, seed=2) != theorem_check(
        "5", trials=5, max_points=3, seed=2
    ):
        problems.append("theorem report changed between runs")

    outs = []
    for _ in range(2):
        assert cli_main(["check-theorem", "basicas", "--json"]) == 0
        outs.append(capsys.readouterr().out)
    if outs[0] != outs[1]:
        problems.append("CLI report output changed between runs")

    gens = []
    for _ in range(2):
        assert cli_main(["gen", "-n", "5", "--seed", "8"]) == 0
        gens.append(capsys.readouterr().out)
    if gens[0] != gens[1] or gens[0] != text:
        problems.append("CLI generator output changed between runs")

    sysf = generate_system(GeneratorSpec(n=5, seed=1200))
    f = sysf.maps["f"]
    target = MeasureTarget(sysf.measures["full"])
    a = stability_delta(f, target, Fraction(1), budget=200, sample=True, seed=3)
    b = stability_delta(f, target, Fraction(1), budget=200, sample=True, seed=3)
    if a != b:
        problems.append("sampled stability radius changed between runs")

    elapsed = time.monotonic() - t0
    ok = not problems and elapsed < limit
    _verdict(
        capsys, 10, ok,
        f"generator, reports, CLI output and sampled searches byte-identical "
        f"across reruns, {elapsed:.1f}s (limit {limit:.0f}s)"
        + ("" if not problems else "; " + "; ".join(problems)),
    )
