import numpy as np
import pytest

from sldkit.bus_system import build_ybus, extract_bus_system
from sldkit.cases import se_three_bus
from sldkit.errors import (
    NoCandidates,
    OrderingViolation,
    UnobservableSystem,
)
from sldkit.estimation import (
    Measurement,
    MeasurementSet,
    fdse_estimate,
    measurement_function,
    measurement_jacobian,
    measurements_from_solution,
    meters_to_measurements,
    pack_state,
    residual_report,
    state_dimension,
    unpack_state,
    wls_estimate,
)
from sldkit.network import Network
from sldkit.powerflow import newton_raphson


@pytest.fixture(scope="module")
def se_fixture():
    se_net, pf_net = se_three_bus()
    pf_system = extract_bus_system(pf_net)
    ybus = build_ybus(pf_system.branches, pf_system.n, pf_system.bus_shunt)
    solution, _ = newton_raphson(ybus, pf_system.buses)
    se_system = extract_bus_system(se_net)
    mset = meters_to_measurements(se_net, se_system)
    return se_net, se_system, ybus, mset, solution


def fd_jacobian(x, ybus, branches, mset, slack, step=1e-6):
    """Central-difference oracle, independent of the analytic partials."""
    m = len(mset)
    jac = np.zeros((m, x.size))
    for k in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[k] += step
        xm[k] -= step
        hp = measurement_function(xp, ybus, branches, mset, slack)
        hm = measurement_function(xm, ybus, branches, mset, slack)
        jac[:, k] = (hp - hm) / (2 * step)
    return jac


class TestMeterAttachment:
    def test_line_meters_become_flows(self, se_fixture):
        se_net, se_system, _, mset, _ = se_fixture
        kinds = sorted(m.kind for m in mset)
        assert kinds.count("pflow") == 2
        assert kinds.count("qflow") == 2
        assert kinds.count("pinj") == 3
        assert kinds.count("qinj") == 3
        assert kinds.count("vmag") == 3

    def test_empty_canvas_raises(self):
        from sldkit import components as comp
        from sldkit.components import MeterSpec
        from sldkit.geometry import Placement
        net = Network(comp.STATE_ESTIMATION)
        net.add_component(comp.METER, MeterSpec(("P",), values={"P": 0.1}),
                          Placement(10, 10))
        with pytest.raises(NoCandidates):
            meters_to_measurements(net, extract_bus_system(net))


class TestMeasurementFunction:
    def test_flat_lossless_predictions(self):
        from sldkit.bus_system import Branch
        branches = [Branch(0, 1, 1 / 0.1j)]
        ybus = build_ybus(branches, 2)
        mset = MeasurementSet([
            Measurement("pflow", 0.0, 0.01, branch=0, side=1),
            Measurement("qflow", 0.0, 0.01, branch=0, side=1),
            Measurement("pinj", 0.0, 0.01, bus=0),
            Measurement("vmag", 1.0, 0.004, bus=1),
        ])
        x = pack_state(np.ones(2), np.zeros(2), 0)
        h = measurement_function(x, ybus, branches, mset, 0)
        assert np.allclose(h, [0.0, 0.0, 0.0, 1.0], atol=1e-12)

    def test_matches_power_flow_quantities(self, se_fixture):
        """Oracle: values generated from NR's own p_calc / branch flows."""
        _, se_system, ybus, mset, solution = se_fixture
        x = pack_state(solution.v, solution.theta, 0)
        h = measurement_function(x, ybus, se_system.branches, mset, 0)
        z = np.array([m.value for m in mset])
        assert np.max(np.abs(h - z)) < 1e-10

    def test_vmag_is_direct_state(self, se_fixture):
        _, se_system, ybus, mset, solution = se_fixture
        x = pack_state(solution.v, solution.theta, 0)
        h = measurement_function(x, ybus, se_system.branches, mset, 0)
        for value, m in zip(h, mset):
            if m.kind == "vmag":
                assert value == pytest.approx(solution.v[m.bus], abs=1e-14)


class TestJacobian:
    def test_vmag_rows_are_unit_vectors(self, se_fixture):
        _, se_system, ybus, mset, solution = se_fixture
        x = pack_state(solution.v, solution.theta, 0)
        jac = measurement_jacobian(x, ybus, se_system.branches, mset, 0)
        n = se_system.n
        for row, m in zip(jac, mset):
            if m.kind == "vmag":
                expected = np.zeros(x.size)
                expected[(n - 1) + m.bus] = 1.0
                assert np.allclose(row, expected, atol=1e-14)

    def test_against_finite_differences_at_random_states(self, se_fixture):
        _, se_system, ybus, mset, _ = se_fixture
        rng = np.random.default_rng(99)
        n = se_system.n
        for _ in range(20):
            vm = rng.uniform(0.95, 1.05, n)
            va = np.concatenate([[0.0], rng.uniform(-0.3, 0.3, n - 1)])
            x = pack_state(vm, va, 0)
            analytic = measurement_jacobian(x, ybus, se_system.branches, mset, 0)
            numeric = fd_jacobian(x, ybus, se_system.branches, mset, 0)
            scale = max(1.0, np.max(np.abs(numeric)))
            assert np.max(np.abs(analytic - numeric)) / scale < 1e-6

    def test_flat_lossless_flow_rows(self):
        """At flat start on a lossless branch the P-flow angle entries are +/-B."""
        from sldkit.bus_system import Branch
        branches = [Branch(0, 1, 1 / 0.1j)]
        ybus = build_ybus(branches, 2)
        mset = MeasurementSet([Measurement("pflow", 0.0, 0.01, branch=0, side=1)])
        x = pack_state(np.ones(2), np.zeros(2), 0)
        jac = measurement_jacobian(x, ybus, branches, mset, 0)
        # single angle column (bus 1), B = 1/0.1 = 10
        assert jac[0, 0] == pytest.approx(-10.0)


class TestWls:
    def test_recovers_noiseless_state(self, se_fixture):
        _, se_system, ybus, mset, solution = se_fixture
        estimate, trace = wls_estimate(mset, ybus, se_system.branches, slack=0)
        assert estimate.converged
        assert np.max(np.abs(estimate.v - solution.v)) < 1e-6
        assert np.max(np.abs(estimate.theta - solution.theta)) < 1e-6
        assert estimate.objective < 1e-12

    def test_single_vmag_single_bus(self):
        mset = MeasurementSet([Measurement("vmag", 0.97, 0.004, bus=0)])
        ybus = np.zeros((1, 1), dtype=complex)
        estimate, _ = wls_estimate(mset, ybus, [], slack=0)
        assert estimate.converged and estimate.iterations_run == 1
        assert estimate.v[0] == pytest.approx(0.97, abs=1e-12)

    def test_underdetermined_rejected(self, se_fixture):
        _, se_system, ybus, _, _ = se_fixture
        mset = MeasurementSet([Measurement("vmag", 1.0, 0.004, bus=0)])
        with pytest.raises(UnobservableSystem):
            wls_estimate(mset, ybus, se_system.branches, slack=0)

    def test_sigma_scaling_leaves_argmin(self, se_fixture):
        _, se_system, ybus, mset, _ = se_fixture
        scaled = MeasurementSet([
            Measurement(m.kind, m.value, m.sigma * 3.0, bus=m.bus, branch=m.branch,
                        side=m.side, meter=m.meter) for m in mset])
        e1, _ = wls_estimate(mset, ybus, se_system.branches, slack=0)
        e2, _ = wls_estimate(scaled, ybus, se_system.branches, slack=0)
        assert np.allclose(e1.v, e2.v, atol=1e-9)
        assert np.allclose(e1.theta, e2.theta, atol=1e-9)

    def test_measurement_order_irrelevant(self, se_fixture):
        _, se_system, ybus, mset, _ = se_fixture
        rng = np.random.default_rng(1)
        shuffled = list(mset)
        rng.shuffle(shuffled)
        e1, _ = wls_estimate(mset, ybus, se_system.branches, slack=0)
        e2, _ = wls_estimate(MeasurementSet(shuffled), ybus, se_system.branches,
                             slack=0)
        assert np.allclose(e1.v, e2.v, atol=1e-9)
        assert np.allclose(e1.theta, e2.theta, atol=1e-9)

    def test_objective_non_increasing(self, se_fixture):
        _, se_system, ybus, mset, _ = se_fixture
        _, trace = wls_estimate(mset, ybus, se_system.branches, slack=0)
        objectives = [r.payload["objective"] for r in trace.records
                      if r.phase == "iteration"]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(objectives, objectives[1:]))


class TestFdse:
    def test_agrees_with_wls(self, se_fixture):
        _, se_system, ybus, mset, _ = se_fixture
        wls, _ = wls_estimate(mset, ybus, se_system.branches, slack=0)
        fdse, _ = fdse_estimate(mset, ybus, se_system.branches, slack=0)
        assert fdse.converged
        assert np.max(np.abs(fdse.v - wls.v)) < 1e-4
        assert np.max(np.abs(fdse.theta - wls.theta)) < 1e-4

    def test_flat_consistent_converges_at_zero(self):
        from sldkit.bus_system import Branch
        branches = [Branch(0, 1, 1 / 0.1j)]
        ybus = build_ybus(branches, 2)
        mset = MeasurementSet([
            Measurement("pflow", 0.0, 0.01, branch=0, side=1),
            Measurement("pinj", 0.0, 0.01, bus=1),
            Measurement("qinj", 0.0, 0.01, bus=1),
            Measurement("vmag", 1.0, 0.004, bus=0),
            Measurement("vmag", 1.0, 0.004, bus=1),
        ])
        estimate, _ = fdse_estimate(mset, ybus, branches, slack=0)
        assert estimate.converged and estimate.iterations_run == 0

    def test_reactive_partition_missing(self, se_fixture):
        _, se_system, ybus, _, _ = se_fixture
        mset = MeasurementSet([
            Measurement("pinj", 0.1, 0.01, bus=i) for i in range(3)])
        with pytest.raises(UnobservableSystem):
            fdse_estimate(mset, ybus, se_system.branches, slack=0)


class TestResiduals:
    def test_noiseless_residuals_tiny(self, se_fixture):
        _, se_system, ybus, mset, _ = se_fixture
        estimate, _ = wls_estimate(mset, ybus, se_system.branches, slack=0)
        report = residual_report(estimate, mset)
        assert all(abs(e.residual) < 1e-8 for e in report)

    def test_injected_bias_is_flagged(self, se_fixture):
        _, se_system, ybus, mset, _ = se_fixture
        corrupted = list(mset)
        victim = 3
        m = corrupted[victim]
        corrupted[victim] = Measurement(m.kind, m.value + 10 * m.sigma, m.sigma,
                                        bus=m.bus, branch=m.branch, side=m.side,
                                        meter=m.meter)
        cset = MeasurementSet(corrupted)
        estimate, _ = wls_estimate(cset, ybus, se_system.branches, slack=0)
        report = residual_report(estimate, cset)
        flagged = [i for i, e in enumerate(report) if e.flagged]
        assert flagged == [victim]

    def test_report_before_solve_rejected(self, se_fixture):
        _, _, _, mset, _ = se_fixture
        with pytest.raises(OrderingViolation):
            residual_report(None, mset)


class TestMeasurementsFromSolution:
    def test_full_set_size_and_consistency(self, ieee14_system, ieee14_ybus, ieee14_nr):
        solution, _ = ieee14_nr
        mset = measurements_from_solution(ieee14_system, solution)
        n, nb = ieee14_system.n, len(ieee14_system.branches)
        assert len(mset) == 3 * n + 2 * nb
        assert len(mset) >= state_dimension(n)
        x = pack_state(solution.v, solution.theta, ieee14_system.slack_index())
        h = measurement_function(x, ieee14_ybus, ieee14_system.branches, mset,
                                 ieee14_system.slack_index())
        z = np.array([m.value for m in mset])
        assert np.max(np.abs(h - z)) < 1e-10


def test_pack_unpack_round_trip():
    vm = np.array([1.01, 0.98, 1.04])
    va = np.array([0.0, -0.1, 0.2])
    x = pack_state(vm, va, 0)
    vm2, va2 = unpack_state(x, 3, 0)
    assert np.allclose(vm, vm2) and np.allclose(va, va2)
