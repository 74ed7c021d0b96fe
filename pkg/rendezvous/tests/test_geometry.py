import random
from fractions import Fraction

from django.test import SimpleTestCase
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.django import TestCase as HypothesisTestCase

from rendezvous.geometry import (
    CardinalDirection,
    IntervalError,
    MotionSegment,
    Point,
    evaluate,
    first_touch_time,
    squared_distance,
    squared_distance_polynomial,
)
from rendezvous.scalar import (
    RationalFormatError,
    exact_sqrt,
    format_rational,
    parse_rational,
    sqrt_decimal,
    sqrt_floor,
    to_decimal_string,
)

F = Fraction
ORIGIN = Point(F(0), F(0))


class ParseRationalTests(SimpleTestCase):
    def test_accepts_ratio_integer_and_decimal(self):
        self.assertEqual(parse_rational("3/4"), F(3, 4))
        self.assertEqual(parse_rational("-6/8"), F(-3, 4))
        self.assertEqual(parse_rational("-2"), F(-2))
        self.assertEqual(parse_rational("0.25"), F(1, 4))
        self.assertEqual(parse_rational(7), F(7))

    def test_rejects_zero_denominator(self):
        with self.assertRaises(RationalFormatError):
            parse_rational("3/0")

    def test_rejects_exponent_and_garbage(self):
        for raw in ("1e-3", "abc", "1/2/3", ""):
            with self.subTest(raw=raw), self.assertRaises(RationalFormatError):
                parse_rational(raw)

    def test_rejects_booleans(self):
        with self.assertRaises(RationalFormatError):
            parse_rational(True)


class RenderingTests(SimpleTestCase):
    def test_format_rational(self):
        self.assertEqual(format_rational(F(6, 3)), "2")
        self.assertEqual(format_rational(F(-1, 3)), "-1/3")

    def test_decimal_rendering_rounds_half_even(self):
        self.assertEqual(to_decimal_string(F(1, 3), 4), "0.3333")
        self.assertEqual(to_decimal_string(F(1, 8), 2), "0.12")
        self.assertEqual(to_decimal_string(F(3, 8), 2), "0.38")
        self.assertEqual(to_decimal_string(F(5), 3), "5.000")

    def test_square_roots(self):
        self.assertEqual(exact_sqrt(F(9, 4)), F(3, 2))
        self.assertIsNone(exact_sqrt(F(2)))
        self.assertEqual(sqrt_floor(F(99, 4)), 4)
        self.assertEqual(sqrt_decimal(F(25)), "5.000000000000")


class MotionSegmentTests(SimpleTestCase):
    def test_position_along_move(self):
        segment = MotionSegment.moving(ORIGIN, CardinalDirection.N, F(2), F(3))
        self.assertEqual(segment.end_time, F(5))
        self.assertEqual(segment.position_at(F(3)), Point(F(0), F(1)))
        self.assertEqual(segment.end_point, Point(F(0), F(3)))

    def test_position_outside_segment_is_rejected(self):
        segment = MotionSegment.inert(ORIGIN, F(0), F(1))
        with self.assertRaises(IntervalError):
            segment.position_at(F(2))

    def test_restricted_keeps_trajectory(self):
        segment = MotionSegment.moving(ORIGIN, CardinalDirection.W, F(0), F(4))
        part = segment.restricted(F(1), F(3))
        self.assertEqual(part.start_point, Point(F(-1), F(0)))
        self.assertEqual(part.end_point, segment.position_at(F(3)))

    def test_polynomial_matches_squared_distance(self):
        a = MotionSegment.moving(Point(F(1), F(2)), CardinalDirection.E, F(1), F(2))
        b = MotionSegment.moving(Point(F(0), F(5)), CardinalDirection.S, F(1), F(2))
        coefficients = squared_distance_polynomial(a, b, F(1), F(3))
        for t in (F(1), F(3, 2), F(2), F(3)):
            self.assertEqual(evaluate(coefficients, t), squared_distance(a.position_at(t), b.position_at(t)))

    def test_polynomial_requires_covered_interval(self):
        a = MotionSegment.inert(ORIGIN, F(0), F(1))
        b = MotionSegment.inert(Point(F(3), F(0)), F(0), F(2))
        with self.assertRaises(IntervalError):
            squared_distance_polynomial(a, b, F(0), F(2))


class FirstTouchTimeTests(SimpleTestCase):
    def test_inert_and_west_mover_touch_at_two(self):
        a = MotionSegment.inert(ORIGIN, F(0), F(3))
        b = MotionSegment.moving(Point(F(3), F(0)), CardinalDirection.W, F(0), F(3))
        touch = first_touch_time(a, b, F(0), F(3))
        self.assertEqual(touch.exact, F(2))
        self.assertEqual((touch.lo, touch.hi), (F(2), F(2)))
        self.assertFalse(touch.tangential)

    def test_tangential_touch_is_flagged(self):
        a = MotionSegment.inert(ORIGIN, F(0), F(6))
        b = MotionSegment.moving(Point(F(-3), F(1)), CardinalDirection.E, F(0), F(6))
        touch = first_touch_time(a, b, F(0), F(6))
        self.assertEqual(touch.exact, F(3))
        self.assertTrue(touch.tangential)

    def test_irrational_touch_is_bracketed(self):
        a = MotionSegment.inert(ORIGIN, F(0), F(6))
        b = MotionSegment.moving(Point(F(-3), F(1, 2)), CardinalDirection.E, F(0), F(6))
        touch = first_touch_time(a, b, F(0), F(6), bracket_bits=30)
        self.assertIsNone(touch.exact)
        self.assertLessEqual(touch.width, F(1, 2**30))
        self.assertGreater(evaluate(touch.coefficients, touch.lo), 0)
        self.assertLessEqual(evaluate(touch.coefficients, touch.hi), 0)
        # 3 - sqrt(3)/2
        self.assertAlmostEqual(float(touch.midpoint), 2.1339745962, places=8)

    def test_touch_at_interval_end_counts(self):
        a = MotionSegment.inert(ORIGIN, F(0), F(2))
        b = MotionSegment.moving(Point(F(3), F(0)), CardinalDirection.W, F(0), F(2))
        self.assertEqual(first_touch_time(a, b, F(0), F(2)).exact, F(2))

    def test_no_touch_when_moving_away(self):
        a = MotionSegment.inert(ORIGIN, F(0), F(5))
        b = MotionSegment.moving(Point(F(3), F(0)), CardinalDirection.E, F(0), F(5))
        self.assertIsNone(first_touch_time(a, b, F(0), F(5)))

    def test_no_touch_without_relative_motion(self):
        a = MotionSegment.moving(ORIGIN, CardinalDirection.N, F(0), F(5))
        b = MotionSegment.moving(Point(F(3), F(0)), CardinalDirection.N, F(0), F(5))
        self.assertIsNone(first_touch_time(a, b, F(0), F(5)))

    def test_overlapping_start_is_a_precondition_error(self):
        a = MotionSegment.inert(ORIGIN, F(0), F(1))
        b = MotionSegment.inert(Point(F(1, 2), F(0)), F(0), F(1))
        with self.assertRaises(IntervalError):
            first_touch_time(a, b, F(0), F(1))


class FirstTouchTimeDenseSamplingTests(SimpleTestCase):
    step = F(1, 2**12)
    samples = 10**4

    def configurations(self):
        rng = random.Random(4096)
        found = []
        while len(found) < 8:
            start_a = Point(F(rng.randint(-24, 24), 8), F(rng.randint(-24, 24), 8))
            start_b = Point(F(rng.randint(-24, 24), 8), F(rng.randint(-24, 24), 8))
            if squared_distance(start_a, start_b) <= 1:
                continue
            found.append((start_a, start_b, rng.choice(list(CardinalDirection)), rng.choice([None, *CardinalDirection])))
        # head-on pair with an exact touch at 1
        found.append((ORIGIN, Point(F(3), F(0)), CardinalDirection.E, CardinalDirection.W))
        return found

    def test_no_sample_touches_before_the_reported_time(self):
        duration = self.step * self.samples
        for start_a, start_b, dir_a, dir_b in self.configurations():
            a = _segment(start_a, dir_a, duration)
            b = _segment(start_b, dir_b, duration)
            touch = first_touch_time(a, b, F(0), duration)
            with self.subTest(a=start_a, b=start_b, dir_a=dir_a, dir_b=dir_b):
                first_hit = None
                for k in range(self.samples):
                    t = self.step * k
                    if squared_distance(a.position_at(t), b.position_at(t)) <= 1:
                        first_hit = t
                        break
                if touch is None:
                    self.assertIsNone(first_hit)
                    continue
                if first_hit is not None:
                    self.assertGreaterEqual(first_hit, touch.lo)
                    if not touch.tangential:
                        self.assertLess(first_hit - touch.hi, self.step)
        a = MotionSegment.moving(ORIGIN, CardinalDirection.E, F(0), duration)
        b = MotionSegment.moving(Point(F(3), F(0)), CardinalDirection.W, F(0), duration)
        self.assertEqual(first_touch_time(a, b, F(0), duration).exact, F(1))


coordinates = st.fractions(min_value=-8, max_value=8, max_denominator=8)
directions = st.one_of(st.none(), st.sampled_from(list(CardinalDirection)))


def _segment(point, direction, duration):
    if direction is None:
        return MotionSegment.inert(point, F(0), duration)
    return MotionSegment.moving(point, direction, F(0), duration)


class FirstTouchTimePropertyTests(HypothesisTestCase):
    @settings(max_examples=150, deadline=None)
    @given(coordinates, coordinates, coordinates, coordinates, directions, directions)
    def test_bracket_and_no_missed_touch(self, ax, ay, bx, by, dir_a, dir_b):
        start_a, start_b = Point(ax, ay), Point(bx, by)
        assume(squared_distance(start_a, start_b) > 1)
        duration = F(4)
        a = _segment(start_a, dir_a, duration)
        b = _segment(start_b, dir_b, duration)
        touch = first_touch_time(a, b, F(0), duration, bracket_bits=24)
        samples = [duration * k / 64 for k in range(65)]
        if touch is None:
            for t in samples:
                self.assertGreater(squared_distance(a.position_at(t), b.position_at(t)), 1)
            return
        self.assertLessEqual(touch.lo, touch.hi)
        self.assertLessEqual(touch.width, F(1, 2**24))
        self.assertGreaterEqual(evaluate(touch.coefficients, touch.lo), 0)
        self.assertLessEqual(evaluate(touch.coefficients, touch.hi), 0)
        for t in samples:
            if t < touch.lo:
                self.assertGreater(squared_distance(a.position_at(t), b.position_at(t)), 1)
