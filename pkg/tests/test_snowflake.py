"""Tests for the replacement operator, the freeze rule and the exact oracles."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import norm

from frozenflake.errors import InvalidParameterError, ResourceLimitError
from frozenflake.geometry import AngleRecord, Ball, OrientedSegment, Point, segment_distances
from frozenflake.regularity import VERTICAL_MASS_FLOOR
from frozenflake.snowflake import (
    CHILD_STEPS,
    GeneratorParams,
    clt_tail_exact,
    freeze_hit_exact,
    freeze_probability,
    generate_gamma,
    replace_segment,
    sample_vertical_mass,
    vertical_mass_exact,
    vertical_mass_ratio,
)


HORIZONTAL = OrientedSegment.between((0.0, 0.0), (1.0, 0.0))
VERTICAL = OrientedSegment.between((0.0, 1.0), (0.0, 0.0))


def _enumerate_hits(M: int) -> int:
    """Codings of length M**2 whose running rotation count reaches -M."""
    hits = 0
    for word in itertools.product(CHILD_STEPS, repeat=M * M):
        total = 0
        for step in word:
            total += step
            if total == -M:
                hits += 1
                break
    return hits


class TestReplaceSegment:
    """One replacement step."""

    def test_breakpoints(self):
        children = replace_segment(HORIZONTAL, math.pi / 6)
        points = [(c.a.x, c.a.y) for c in children] + [(children[-1].b.x, children[-1].b.y)]
        expected = [(0, 0), (0.2679492, 0), (0.5, 0.1339746), (0.7320508, 0), (1, 0)]
        np.testing.assert_allclose(points, expected, atol=1e-7)

    def test_equal_children_and_normals(self):
        children = replace_segment(HORIZONTAL, math.pi / 6)
        lengths = [c.length for c in children]
        assert max(lengths) - min(lengths) <= 1e-15
        assert lengths[0] == pytest.approx(1.0 / (2.0 * (1.0 + math.cos(math.pi / 6))))
        for child in children:
            assert child.normal_error <= 1e-9
        counts = [c.normal.count - children[0].normal.count for c in children]
        assert counts == [0, 1, -1, 0]

    def test_bump_along_outer_normal(self):
        children = replace_segment(HORIZONTAL, 0.3)
        assert children[1].b.y > 0

    def test_zero_angle_quadrisects(self):
        children = replace_segment(HORIZONTAL, 0.0)
        assert [c.length for c in children] == pytest.approx([0.25] * 4)
        assert sum(c.length for c in children) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("alpha", [-0.1, math.pi / 2 + 0.01])
    def test_alpha_out_of_range(self, alpha):
        with pytest.raises(InvalidParameterError, match="alpha"):
            replace_segment(HORIZONTAL, alpha)


class TestGenerateGamma:
    """Full Gamma curves."""

    def test_vertical_source_is_quadrisected(self):
        g = generate_gamma(GeneratorParams(M=2, source=VERTICAL, depth=4))
        assert g.leaf_count == 256
        assert g.frozen.all()
        assert abs(g.total_length - 1.0) < 1e-12
        assert vertical_mass_ratio(g) == 1.0
        np.testing.assert_allclose(g.a[:, 0], 0.0, atol=0)

    def test_horizontal_source_counts(self):
        g = generate_gamma(GeneratorParams(M=2, source=HORIZONTAL))
        assert g.depth == 4
        assert g.leaf_count == 256
        assert int(g.frozen.sum()) == 46
        assert Fraction(int(g.frozen.sum()), 256) == freeze_hit_exact(2)

    def test_endpoints_chain(self):
        g = generate_gamma(GeneratorParams(M=2, source=HORIZONTAL))
        np.testing.assert_array_equal(g.a[1:], g.b[:-1])
        np.testing.assert_allclose(g.a[0], [0.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(g.b[-1], [1.0, 0.0], atol=1e-12)

    def test_leaf_length_bounds(self):
        g = generate_gamma(GeneratorParams(M=2, source=HORIZONTAL))
        c = 1.0 / (2.0 * (1.0 + math.cos(math.pi / 4)))
        lengths = g.lengths
        assert np.all(lengths >= 4.0**-4 * (1 - 1e-12))
        assert np.all(lengths <= c**4 * (1 + 1e-12))

    def test_total_length_and_containment(self):
        g = generate_gamma(GeneratorParams(M=3, source=HORIZONTAL, depth=6))
        assert 1.0 <= g.total_length <= 12.0
        alpha = math.pi / 6
        dist = segment_distances(g.vertices, np.array([0.0, 0.0]), np.array([1.0, 0.0]))
        assert float(dist.max()) <= 10.0 * alpha

    def test_frozen_leaves_are_vertical(self):
        g = generate_gamma(GeneratorParams(M=2, source=HORIZONTAL))
        d = g.b[g.frozen] - g.a[g.frozen]
        np.testing.assert_allclose(d[:, 0], 0.0, atol=1e-12)
        assert np.all(d[:, 1] < 0)

    def test_nodes_and_codings(self):
        g = generate_gamma(GeneratorParams(M=2, source=HORIZONTAL))
        first = g.node(0)
        assert first.coding == (1, 1, 1, 1)
        assert not first.frozen
        frozen = g.node(int(np.flatnonzero(g.frozen)[0]))
        assert frozen.segment.normal.is_zero
        assert abs(frozen.rotation_count) <= len(frozen.coding)

    def test_deterministic(self):
        params = GeneratorParams(M=2, source=HORIZONTAL)
        first, second = generate_gamma(params), generate_gamma(params)
        np.testing.assert_array_equal(first.a, second.a)
        np.testing.assert_array_equal(first.frozen, second.frozen)

    def test_window_prunes(self):
        window = Ball(Point(0.0, 0.0), 0.01)
        g = generate_gamma(GeneratorParams(M=2, source=HORIZONTAL), window=window)
        assert not g.is_complete
        assert g.leaf_count < 256
        np.testing.assert_array_equal(g.a[1:], g.b[:-1])
        assert g.levels[0] == g.depth

    def test_leaf_budget(self):
        with pytest.raises(ResourceLimitError) as excinfo:
            generate_gamma(GeneratorParams(M=2, source=HORIZONTAL, leaf_budget=100))
        assert excinfo.value.required == 256
        assert excinfo.value.budget == 100

    def test_alpha_above_right_angle(self):
        source = OrientedSegment(
            Point(0.0, 0.0), Point(0.0, 1.0), AngleRecord.from_turns(Fraction(1, 2))
        )
        with pytest.raises(InvalidParameterError, match="alpha"):
            generate_gamma(GeneratorParams(M=1, source=source, depth=1))


class TestGeneratorParams:
    def test_canonical_depth(self):
        params = GeneratorParams(M=3, source=HORIZONTAL)
        assert params.depth == 9
        assert params.canonical
        assert params.alpha == pytest.approx(math.pi / 6)

    def test_non_canonical(self):
        assert not GeneratorParams(M=3, source=HORIZONTAL, depth=2).canonical

    def test_invalid_m(self):
        with pytest.raises(InvalidParameterError):
            GeneratorParams(M=0, source=HORIZONTAL)


class TestOracles:
    """Exact DP values against enumeration and the normal limit."""

    def test_clt_tail_small(self):
        assert clt_tail_exact(1) == Fraction(1, 4)
        assert clt_tail_exact(2) == Fraction(37, 256)

    def test_clt_tail_limit(self):
        assert abs(float(clt_tail_exact(20)) - norm.cdf(-math.sqrt(2.0))) <= 0.02
        assert abs(float(clt_tail_exact(20)) - 0.0786496) <= 0.02

    def test_freeze_hit_small(self):
        assert freeze_hit_exact(1) == Fraction(1, 4)
        assert freeze_hit_exact(2) == Fraction(46, 256)

    @pytest.mark.parametrize("M", [1, 2])
    def test_freeze_hit_matches_enumeration(self, M):
        assert freeze_hit_exact(M) == Fraction(_enumerate_hits(M), 4 ** (M * M))

    def test_freeze_hit_dominates_tail(self):
        for M in range(1, 21):
            assert freeze_hit_exact(M) >= clt_tail_exact(M)

    def test_principal_leaves_match_dp_for_m3(self):
        params = GeneratorParams(M=3, source=HORIZONTAL, wrap_around=False)
        g = generate_gamma(params, keep_codings=False)
        assert Fraction(int(g.frozen.sum()), 4**9) == freeze_hit_exact(3)

    def test_wrap_around_reported_separately(self):
        g = generate_gamma(GeneratorParams(M=3, source=HORIZONTAL), keep_codings=False)
        principal = Fraction(int((g.frozen & ~g.wrapped).sum()), 4**9)
        assert principal == freeze_hit_exact(3)
        assert int(g.wrapped.sum()) == 1
        assert freeze_probability(3) == freeze_hit_exact(3) + Fraction(1, 4**9)
        assert g.wrap_mass < 1e-3 * g.vertical_mass

    def test_vertical_mass_ratio_matches_exact(self):
        g = generate_gamma(GeneratorParams(M=2, source=HORIZONTAL))
        assert vertical_mass_ratio(g) == pytest.approx(vertical_mass_exact(2), rel=1e-12)

    def test_vertical_mass_floor_m3(self):
        g = generate_gamma(GeneratorParams(M=3, source=HORIZONTAL), keep_codings=False)
        assert vertical_mass_ratio(g) >= 0.02

    def test_sampled_mass_agrees(self):
        sample = sample_vertical_mass(3, 200_000, seed=7)
        exact = vertical_mass_exact(3)
        assert abs(sample.ratio - exact) <= 4 * sample.half_width
        low, high = sample.interval
        assert low < sample.ratio < high

    @pytest.mark.slow
    @pytest.mark.timeout(300)
    @pytest.mark.parametrize("M", [4, 5])
    def test_sampled_mass_floor_large_m(self, M):
        sample = sample_vertical_mass(M, 1_000_000, seed=M)
        assert sample.samples == 1_000_000
        assert sample.interval[0] >= VERTICAL_MASS_FLOOR
        assert abs(sample.ratio - vertical_mass_exact(M)) <= 4 * sample.half_width

    def test_vertical_source_samples_as_frozen(self):
        sample = sample_vertical_mass(2, 1000, turns=Fraction(0))
        assert sample.ratio == 1.0
        assert sample.half_width == 0.0
        assert vertical_mass_exact(2, turns=Fraction(0)) == 1.0

    def test_sampled_mass_negative_turns(self):
        up = sample_vertical_mass(2, 50_000, turns=Fraction(1, 4), seed=1)
        down = sample_vertical_mass(2, 50_000, turns=Fraction(-1, 4), seed=1)
        assert up.ratio == down.ratio
