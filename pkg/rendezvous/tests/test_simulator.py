import itertools
import random
from dataclasses import replace
from fractions import Fraction
from unittest import mock

from django.test import SimpleTestCase

from rendezvous.bounds import monotone_bound, summarize_run
from rendezvous.formats import trace_lines
from rendezvous.geometry import Point
from rendezvous.kernel import ProtocolViolation
from rendezvous.labels import LabelError, LabelSpace
from rendezvous.simulator import KIND_RANK, Scenario, ScenarioError, run_scenario, simulate
from rendezvous.sweeps import SweepSpec, generate_scenario

F = Fraction


def monotone(pos_a, pos_b, *, labels=(2, 3), size=4, starts=(0, 0), **kwargs):
    return Scenario(
        model="monotone",
        space=LabelSpace.from_size(size),
        label_a=labels[0],
        label_b=labels[1],
        pos_a=Point(F(pos_a[0]), F(pos_a[1])),
        pos_b=Point(F(pos_b[0]), F(pos_b[1])),
        start_a=F(starts[0]),
        start_b=F(starts[1]),
        **kwargs,
    )


def binary(pos_a, pos_b, *, labels=(1, 2), size=4, rho=8, starts=(0, 0), **kwargs):
    return Scenario(
        model="binary",
        space=LabelSpace.from_size(size),
        label_a=labels[0],
        label_b=labels[1],
        pos_a=Point(F(pos_a[0]), F(pos_a[1])),
        pos_b=Point(F(pos_b[0]), F(pos_b[1])),
        start_a=F(starts[0]),
        start_b=F(starts[1]),
        rho=F(rho),
        **kwargs,
    )


class ScenarioTests(SimpleTestCase):
    def test_equal_labels_are_rejected(self):
        with self.assertRaises(LabelError):
            monotone((0, 0), (0, 5), labels=(1, 1))

    def test_label_out_of_range(self):
        with self.assertRaises(LabelError):
            monotone((0, 0), (0, 5), labels=(1, 4))

    def test_binary_needs_rho_above_one(self):
        with self.assertRaises(ScenarioError):
            binary((0, 0), (0, 5), rho=1)

    def test_negative_start_is_rejected(self):
        with self.assertRaises(ScenarioError):
            monotone((0, 0), (0, 5), starts=(-1, 0))

    def test_default_budgets(self):
        scenario = monotone((0, 0), (3, 4), starts=(0, 2))
        self.assertEqual((scenario.x, scenario.y), (F(4), F(3)))
        self.assertEqual(scenario.budget, 4 * 7 + 64)
        self.assertEqual(scenario.deadline, 2 + 4 * 7 + 64)
        self.assertEqual(binary((0, 0), (0, 3)).budget, 512 * 8 * 2)


class MonotoneRunTests(SimpleTestCase):
    def test_staggered_start_meets_static_agent(self):
        scenario = monotone((0, 0), (0, 10), starts=(0, 5))
        report, trace = run_scenario(scenario)
        self.assertTrue(report.met)
        self.assertEqual(report.touch.exact, F(16))
        self.assertEqual(report.elapsed, F(11))
        self.assertLessEqual(report.elapsed, monotone_bound(scenario))
        self.assertEqual(report.agents["a"]["phase"], "inert")
        first = trace[:4]
        self.assertEqual([(e.kind, e.agent) for e in first], [("appear", "a"), ("reading", "a"), ("halt", "a"), ("appear", "b")])
        self.assertEqual(trace[-1].kind, "meeting")

    def test_budget_exhaustion_ends_at_deadline(self):
        scenario = monotone((0, 0), (0, 10), starts=(0, 5), time_budget=F(3))
        report, trace = run_scenario(scenario)
        self.assertFalse(report.met)
        self.assertEqual(report.outcome, "budget_exhausted")
        self.assertEqual(report.end_time, F(8))
        self.assertEqual((trace[-1].kind, trace[-1].time), ("budget_exhausted", F(8)))
        self.assertIsNone(report.elapsed)

    def test_simultaneous_start_meets_within_bound(self):
        scenario = monotone((0, 0), (3, 4))
        report, _ = run_scenario(scenario)
        self.assertTrue(report.met)
        self.assertIsNone(report.touch.exact)
        self.assertLessEqual(report.touch.width, F(1, 2**40))
        self.assertAlmostEqual(float(report.touch.midpoint), 8.8169873, places=6)
        self.assertLess(report.elapsed, monotone_bound(scenario))
        self.assertEqual({details["phase"] for details in report.agents.values()}, {"horizontal"})
        self.assertEqual(report.agents["a"]["variables"]["j"], 2)
        self.assertIsNone(summarize_run(scenario, report)["violation"])

    def test_immediate_meeting_without_readings(self):
        report, trace = run_scenario(monotone((0, 0), (0, 1)))
        self.assertTrue(report.met)
        self.assertEqual(report.touch.exact, F(0))
        self.assertEqual([e.kind for e in trace], ["appear", "appear", "meeting"])

    def test_immediate_meeting_at_later_start(self):
        report, _ = run_scenario(monotone((0, 0), (1, 0), starts=(0, 3)))
        self.assertTrue(report.met)
        self.assertEqual(report.touch.exact, F(3))
        self.assertEqual(report.elapsed, F(0))

    def test_distortion_does_not_change_the_run(self):
        lines = {
            name: list(trace_lines(run_scenario(monotone((0, 0), (3, 4), distortion=name))[1]))
            for name in ("identity", "affine", "cubic")
        }
        self.assertEqual(lines["identity"], lines["affine"])
        self.assertEqual(lines["identity"], lines["cubic"])

    def test_runs_are_deterministic(self):
        scenario = monotone((0, 0), (3, 4))
        first = list(trace_lines(run_scenario(scenario)[1]))
        second = list(trace_lines(run_scenario(scenario)[1]))
        self.assertEqual(first, second)


class BinaryRunTests(SimpleTestCase):
    def test_one_agent_leads_and_meets(self):
        scenario = binary((0, 0), (0, 3))
        result = simulate(scenario)
        report = result.report
        self.assertTrue(report.met)
        self.assertEqual(report.touch.exact, F(39))
        variables = {agent: details["variables"] for agent, details in report.agents.items()}
        self.assertTrue(variables["b"]["leading"])
        self.assertFalse(variables["a"]["leading"])
        self.assertTrue(all(v["lose_contact_done"] for v in variables.values()))
        self.assertIsNone(summarize_run(scenario, report)["violation"])

    def test_tie_order_within_an_instant(self):
        _, trace = run_scenario(binary((0, 0), (0, 3)))
        at_one = [(e.kind, e.agent) for e in trace if e.time == 1]
        self.assertEqual(
            at_one,
            [
                ("action_end", "a"),
                ("action_end", "b"),
                ("reading", "a"),
                ("reading", "b"),
                ("action_begin", "a"),
                ("action_begin", "b"),
            ],
        )

    def test_out_of_contract_agents_halt(self):
        scenario = binary((0, 0), (0, 8))
        self.assertTrue(scenario.out_of_contract)
        report, trace = run_scenario(scenario)
        self.assertFalse(report.met)
        self.assertEqual(report.outcome, "halted")
        self.assertEqual([e.kind for e in trace if e.kind == "halt"], ["halt", "halt"])
        self.assertIsNone(summarize_run(scenario, report)["violation"])

    def test_label_zero_needs_the_closing_move(self):
        # a halts on its lone reading; b holds bits 0,0 and only moves on the closing bit
        scenario = binary((0, 0), (0, 3), labels=(1, 0), starts=(0, 1))
        report, _ = run_scenario(scenario)
        self.assertEqual(report.touch.exact, F(31))
        self.assertEqual(report.elapsed, F(30))
        self.assertEqual(report.as_dict()["loop_guard"], "closing_probe")
        self.assertEqual(summarize_run(scenario, report)["loop_guard"], "closing_probe")

        strict = replace(scenario, strict_loop_guard=True)
        report, _ = run_scenario(strict)
        self.assertEqual(report.outcome, "budget_exhausted")
        self.assertEqual(report.as_dict()["loop_guard"], "strict")
        self.assertIsNone(monotone((0, 0), (0, 5)).loop_guard)


class TraceInvariantTests(SimpleTestCase):
    scenarios = [
        monotone((0, 0), (3, 4)),
        monotone((0, 0), (0, 10), starts=(0, 5)),
        monotone((-2, 1), (5, F(-7, 2)), labels=(5, 9), size=16, starts=(F(3, 2), 0)),
        binary((0, 0), (0, 3)),
        binary((1, 1), (F(5, 2), -2), labels=(0, 3), rho=6, starts=(2, 0)),
    ]

    def test_trace_is_time_ordered_with_kind_ranks(self):
        for scenario in self.scenarios:
            _, trace = run_scenario(scenario)
            with self.subTest(scenario=scenario):
                keys = [event.sort_key for event in trace]
                self.assertEqual(keys, sorted(keys))
                self.assertTrue(all(event.kind in KIND_RANK for event in trace))

    def test_readings_only_at_appearance_and_action_end(self):
        for scenario in self.scenarios:
            _, trace = run_scenario(scenario)
            with self.subTest(scenario=scenario):
                triggers = {(e.time, e.agent) for e in trace if e.kind in ("appear", "action_end")}
                for event in trace:
                    if event.kind == "reading":
                        self.assertIn((event.time, event.agent), triggers)

    def test_positions_follow_the_actions(self):
        for scenario in self.scenarios:
            result = simulate(scenario)
            with self.subTest(scenario=scenario):
                for history in result.histories.values():
                    for previous, current in zip(history, history[1:]):
                        self.assertEqual(previous.end_point, current.start_point)
                        self.assertLessEqual(previous.end_time, current.start_time)
                    for segment in history:
                        travelled = abs(segment.end_point.x - segment.start_point.x) + abs(
                            segment.end_point.y - segment.start_point.y
                        )
                        self.assertLessEqual(travelled, segment.end_time - segment.start_time)

    def test_no_touch_before_the_reported_meeting(self):
        for scenario in self.scenarios:
            result = simulate(scenario)
            if not result.report.met:
                continue
            cursors = result.cursors()
            start, lo = scenario.later_start, result.report.touch.lo
            with self.subTest(scenario=scenario):
                steps = 256
                for k in range(steps):
                    t = start + (lo - start) * k / steps
                    a, b = cursors["a"].position_at(t), cursors["b"].position_at(t)
                    self.assertGreater((a.x - b.x) ** 2 + (a.y - b.y) ** 2, 1)


class ProtocolViolationTests(SimpleTestCase):
    def test_violation_names_the_agent(self):
        class Faulty:
            model = "monotone"

            def init(self, label, space):
                return label

            def step(self, state, reading):
                raise ProtocolViolation("programa com defeito")

            def phase(self, state):
                return "initial"

            def describe(self, state):
                return {}

        with mock.patch.object(Scenario, "program", lambda self: Faulty()):
            with self.assertRaises(ProtocolViolation) as caught:
                run_scenario(monotone((0, 0), (0, 5)))
        self.assertEqual(caught.exception.agent, "a")
        self.assertEqual([e.kind for e in caught.exception.trace], ["appear", "appear", "reading", "reading"])


def _marks(report, agent, phase):
    return [mark for mark in report.phase_marks if mark["agent"] == agent and mark["phase"] == phase]


def _duration(report, agent, phase):
    return F(report.agents[agent]["phase_durations"].get(phase, "0"))


class DanceTerminationTests(SimpleTestCase):
    def test_every_label_pair_up_to_64_leaves_dance(self):
        rng = random.Random(64)
        space = LabelSpace.from_size(64)
        for low, high in itertools.combinations(range(space.L), 2):
            offset = (3 + F(rng.randint(0, 63), 64), F(rng.randint(-128, 128), 64))
            scenario = monotone((0, 0), offset, labels=(low, high), size=space.L, time_budget=F(6))
            report, _ = run_scenario(scenario)
            with self.subTest(labels=(low, high)):
                for agent in ("a", "b"):
                    phases = [mark["phase"] for mark in report.phase_marks if mark["agent"] == agent]
                    entered = phases.index("dance")
                    self.assertEqual(phases[entered + 1], "vertical")
                    self.assertLess(_duration(report, agent, "dance"), 2)


class MonotonePhaseAccountingTests(SimpleTestCase):
    specs = [
        SweepSpec(seed=13, count=24, L_grid=(4, 16, 1024), D_max=F(24), offset=F(6), max_denominator=64),
        SweepSpec(seed=14, count=24, start_offset="simultaneous", L_grid=(4, 16, 1024), D_max=F(24), max_denominator=64),
    ]

    def runs(self):
        for spec in self.specs:
            for index in range(spec.count):
                scenario = generate_scenario(spec, index)
                yield scenario, run_scenario(scenario)[0]

    def test_vertical_approach_ends_within_one(self):
        checked = 0
        for scenario, report in self.runs():
            for agent in ("a", "b"):
                for mark in _marks(report, agent, "horizontal")[:1]:
                    checked += 1
                    with self.subTest(scenario=scenario, agent=agent):
                        self.assertLessEqual(F(mark["vertical_separation"]), 1)
        self.assertGreater(checked, 0)

    def test_phase_times_follow_the_separations(self):
        for scenario, report in self.runs():
            self.assertTrue(report.met)
            for agent in ("a", "b"):
                with self.subTest(scenario=scenario, agent=agent):
                    self.assertLessEqual(_duration(report, agent, "vertical"), scenario.x + 4)
                    self.assertLessEqual(_duration(report, agent, "horizontal"), scenario.y + 4)

    def test_distortions_leave_a_hundred_runs_unchanged(self):
        spec = SweepSpec(seed=19, count=100, L_grid=(4, 16, 1024), D_max=F(12), offset=F(4), max_denominator=64)
        for index in range(spec.count):
            scenario = generate_scenario(spec, index)
            expected = list(trace_lines(run_scenario(scenario)[1]))
            for name in ("affine", "cubic"):
                with self.subTest(index=index, distortion=name):
                    distorted = list(trace_lines(run_scenario(replace(scenario, distortion=name))[1]))
                    self.assertEqual(distorted, expected)


class BinaryGeometryTests(SimpleTestCase):
    spec = SweepSpec(
        seed=17, count=30, model="binary", L_grid=(4, 16), rho_grid=(F(4), F(8)), offset=F(4), max_denominator=64
    )

    def test_leader_positions_after_lose_contact_and_midpoint_return(self):
        near_a = near_z = 0
        for index in range(self.spec.count):
            scenario = generate_scenario(self.spec, index)
            report, _ = run_scenario(scenario)
            rho_sq = scenario.rho**2
            leaders = [agent for agent, details in report.agents.items() if details["variables"]["leading"]]
            for agent in leaders:
                with self.subTest(index=index, agent=agent):
                    for mark in _marks(report, agent, "triangle")[:1]:
                        v, h = F(mark["vertical_separation"]), F(mark["horizontal_separation"])
                        # first Near reading one half-step below a Far one
                        self.assertLess(v * v + h * h, rho_sq)
                        self.assertGreaterEqual((v + F(1, 2)) ** 2 + h * h, rho_sq)
                        near_a += 1
                    for mark in _marks(report, agent, "horizontal_leaps")[:1]:
                        self.assertLessEqual(F(mark["vertical_separation"]), 1)
                        near_z += 1
        self.assertGreater(near_a, 0)
        self.assertGreater(near_z, 0)
