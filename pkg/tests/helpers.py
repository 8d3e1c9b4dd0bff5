"""Shared deterministic fuzz generators for the test suite."""

from __future__ import annotations

import math
import random
from fractions import Fraction

import fractalc as fc
from fractalc.parser import Angle, PieceExpr, ScheduleExpr, ScheduleItem


def random_uniform_parts(rng: random.Random) -> list[tuple[fc.UniformFractal, int]]:
    """Uniform components: N in [1,12], ratio in (0.05, 0.95), m <= 5, n_i <= 4."""
    m = rng.randint(1, 5)
    return [
        (fc.UniformFractal(rng.randint(1, 12), rng.uniform(0.05, 0.95)), rng.randint(1, 4))
        for _ in range(m)
    ]


def spectrum_of_uniform(parts) -> fc.ScaleSpectrum:
    return fc.ScaleSpectrum([([f.ratio] * f.copies, n) for f, n in parts])


def random_spectrum(rng: random.Random, max_components: int = 4, max_ratios: int = 4) -> fc.ScaleSpectrum:
    components = []
    for _ in range(rng.randint(1, max_components)):
        count = rng.randint(1, max_ratios)
        components.append(
            ([rng.uniform(0.05, 0.95) for _ in range(count)], rng.randint(1, 3))
        )
    return fc.ScaleSpectrum(components)


def random_cantor_ratios(rng: random.Random) -> list[Fraction]:
    """Small-denominator kept ratios summing to at most 1."""
    while True:
        count = rng.randint(1, 3)
        ratios = [Fraction(1, rng.randint(2, 9)) for _ in range(count)]
        if sum(ratios) <= 1:
            return ratios


def random_generator(rng: random.Random) -> fc.Generator:
    roll = rng.random()
    if roll < 0.4:
        return fc.builtin_generator("K", rng.uniform(0.35, 1.25))
    if roll < 0.55:
        return fc.builtin_generator("Q", math.pi / 2)
    if roll < 0.9:
        return fc.builtin_generator("C", [float(r) for r in random_cantor_ratios(rng)])
    pieces = []
    for _ in range(rng.randint(2, 4)):
        pieces.append((rng.uniform(0.15, 0.4), rng.uniform(-1.2, 1.2), rng.random() > 0.2))
    if not any(draw for _, _, draw in pieces):
        pieces[0] = (pieces[0][0], pieces[0][1], True)
    return fc.builtin_generator("G", pieces)


def random_schedule(rng: random.Random, max_items: int = 3, max_repeat: int = 2) -> fc.CompositionSchedule:
    items = tuple(
        (random_generator(rng), rng.randint(1, max_repeat))
        for _ in range(rng.randint(1, max_items))
    )
    return fc.CompositionSchedule(items)


def feasible_stage(schedule: fc.CompositionSchedule, cap: int, max_stage: int = 4) -> int:
    """Largest stage (at least 1) whose predicted segment count is within cap."""
    stage = 1
    while stage < max_stage and schedule.predicted_count(stage + 1) <= cap:
        stage += 1
    return stage


def census_size(schedule: fc.CompositionSchedule, k: int) -> int:
    """Raw census bucket count before merging: prod_i C(n_i*k + l_i - 1, l_i - 1)."""
    size = 1
    for gen, repeat in schedule.items:
        l = gen.copies
        size *= math.comb(repeat * k + l - 1, l - 1)
    return size


def census_feasible_stage(schedule: fc.CompositionSchedule, cap: int, max_stage: int = 6) -> int:
    """Largest stage (at least 1) whose raw census size stays within cap."""
    stage = 1
    while stage < max_stage and census_size(schedule, stage + 1) <= cap:
        stage += 1
    return stage


# --- parser expression fuzz --------------------------------------------------


def random_angle_expr(rng: random.Random) -> Angle:
    if rng.random() < 0.6:
        k = rng.randint(2, 9)
        sign = -1.0 if rng.random() < 0.3 else 1.0
        return Angle(value=sign * math.pi / k, pi_k=k)
    return Angle(value=rng.uniform(-3.1, 3.1))


def random_ratio_expr(rng: random.Random):
    if rng.random() < 0.6:
        den = rng.randint(2, 12)
        return Fraction(rng.randint(1, den - 1), den)
    return rng.uniform(0.01, 0.99)


def random_schedule_expr(rng: random.Random) -> ScheduleExpr:
    items = []
    for _ in range(rng.randint(1, 4)):
        kind = rng.choice("KKQCCG")
        repeat = rng.choice([1, 1, 1, 2, 3, 4])
        if kind == "K":
            item = ScheduleItem("K", repeat, angle=random_angle_expr(rng))
        elif kind == "Q":
            angle = Angle(math.pi / 2, 2) if rng.random() < 0.5 else Angle(math.pi / 2)
            item = ScheduleItem("Q", repeat, angle=angle)
        elif kind == "C":
            ratios = tuple(random_ratio_expr(rng) for _ in range(rng.randint(1, 4)))
            item = ScheduleItem("C", repeat, ratios=ratios)
        else:
            pieces = tuple(
                PieceExpr(random_ratio_expr(rng), random_angle_expr(rng), rng.random() > 0.3)
                for _ in range(rng.randint(1, 3))
            )
            item = ScheduleItem("G", repeat, pieces=pieces)
        items.append(item)
    return ScheduleExpr(tuple(items))


def histogram_of_lengths(lengths, rtol: float = 1e-12) -> list[tuple[float, int]]:
    """Independent census oracle: bucket measured segment lengths by value."""
    ordered = sorted((float(v) for v in lengths), reverse=True)
    buckets: list[tuple[float, int]] = []
    for value in ordered:
        if buckets and buckets[-1][0] - value <= rtol * buckets[-1][0]:
            buckets[-1] = (buckets[-1][0], buckets[-1][1] + 1)
        else:
            buckets.append((value, 1))
    return buckets
