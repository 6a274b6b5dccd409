"""
网络模型解析公式与采样器测试
"""

import math
import tracemalloc

import numpy as np
import pytest

from app.core import netmodel
from app.core.exceptions import DomainError
from app.core.validation import PASS, cost_pdf_integral, ks_distance, validate_arm
from tests.conftest import physical_arm


def test_intersection_area_limits():
    assert netmodel.intersection_area(1.0, 0.0) == pytest.approx(math.pi)
    assert netmodel.intersection_area(1.0, 2.0) == pytest.approx(0.0, abs=1e-12)
    assert netmodel.intersection_area(2.0, 0.0) == pytest.approx(4 * math.pi)


def test_intersection_area_outside_lens_domain():
    with pytest.raises(DomainError):
        netmodel.intersection_area(1.0, 2.5)
    with pytest.raises(DomainError):
        netmodel.intersection_area(0.0, 0.0)


def test_hop_pmf_is_normalised(default_arm):
    geometry = default_arm.server.geometry
    pmf = netmodel.hop_pmf(geometry)
    q = netmodel.hop_success_probability(geometry)
    assert len(pmf) == 3
    assert pmf.sum() == pytest.approx(1.0)
    assert pmf[0] == pytest.approx(netmodel.normalization_constant(geometry))
    assert pmf[1] / pmf[0] == pytest.approx(q)


def test_single_hop_reduces_to_geometric():
    geometry = physical_arm(h_max=1).server.geometry
    p = 0.7
    pmf = netmodel.transmission_pmf_vector(geometry, p, 20)
    expected = p * (1 - p) ** np.arange(20)
    np.testing.assert_allclose(pmf, expected, rtol=1e-12)


def test_transmission_pmf_matches_vector(default_arm):
    geometry = default_arm.server.geometry
    vector = netmodel.transmission_pmf_vector(geometry, 0.7)
    for k in (1, 2, 3, 7, 15):
        assert netmodel.transmission_pmf(geometry, 0.7, k) == pytest.approx(vector[k - 1], rel=1e-12)
    assert netmodel.transmission_pmf(geometry, 0.7, 0) == 0.0


def test_transmission_support_tail(default_arm):
    geometry = default_arm.server.geometry
    pmf = netmodel.transmission_pmf_vector(geometry, 0.7)
    assert len(pmf) == netmodel.transmission_support(geometry, 0.7)
    assert 1.0 - pmf.sum() < 1e-12
    assert netmodel.transmission_support(geometry, 1.0) == geometry.h_max


def test_expected_transmission_time(default_arm):
    geometry = default_arm.server.geometry
    pmf = netmodel.transmission_pmf_vector(geometry, 0.7)
    mean = float(np.dot(np.arange(1, len(pmf) + 1), pmf))
    assert mean == pytest.approx(netmodel.expected_transmission_time(geometry, 0.7), rel=1e-9)


def test_reward_mean_below_one_slot_is_zero():
    arm = physical_arm(delta=0.9)
    assert netmodel.reward_mean(arm.server, arm.qos, 1) == 0.0


def test_reward_mean_is_probability(default_arm):
    mu = netmodel.reward_mean(default_arm.server, default_arm.qos, 1)
    assert 0.0 < mu < 1.0


def test_expected_cost_closed_form(default_arm):
    server = default_arm.server
    eta = netmodel.expected_cost(server, 1)
    expected = 1.0 / (2.0 - 1.0) + 0.5 * netmodel.expected_hops(server.geometry) / 0.7 + 0.5
    assert eta == pytest.approx(expected)


def test_cost_pdf_vanishes_below_floor(default_arm):
    server = default_arm.server
    assert netmodel.cost_pdf(server, 1, 0.99) == 0.0
    values = netmodel.cost_pdf(server, 1, np.array([0.2, 0.5, 1.5, 3.0]))
    assert values[0] == 0.0 and values[1] == 0.0
    assert values[2] > 0.0


def test_cost_cdf_is_monotone_distribution(default_arm):
    server = default_arm.server
    x = np.linspace(0.0, 60.0, 400)
    cdf = netmodel.cost_cdf(server, 1, x)
    assert cdf[0] == 0.0
    assert np.all(np.diff(cdf) >= -1e-15)
    assert cdf[-1] == pytest.approx(1.0, abs=1e-9)


def test_cost_pdf_integrates_to_one(default_arm):
    assert cost_pdf_integral(default_arm, 1) == pytest.approx(1.0, abs=1e-6)


def test_sample_pull_is_coupled(default_arm, rng):
    for _ in range(200):
        outcome = netmodel.sample_pull(default_arm.server, default_arm.qos, 1, rng)
        assert 1 <= outcome.hops <= 3
        assert outcome.transmission_time >= outcome.hops
        assert outcome.delay == pytest.approx(outcome.processing_time + outcome.transmission_time)
        assert outcome.reward == int(outcome.delay <= default_arm.qos.delta)
        assert outcome.cost == pytest.approx(outcome.processing_time + 0.5 * outcome.transmission_time + 0.5)


def test_sample_pulls_moments(default_arm, rng):
    server, qos = default_arm.server, default_arm.qos
    batch = netmodel.sample_pulls(server, qos, 1, rng, 200_000)
    assert len(batch) == 200_000
    assert batch.reward.mean() == pytest.approx(netmodel.reward_mean(server, qos, 1), abs=0.01)
    assert batch.cost.mean() == pytest.approx(netmodel.expected_cost(server, 1), rel=0.01)


def test_scalar_and_vector_samplers_agree(default_arm):
    server, qos = default_arm.server, default_arm.qos
    rng = np.random.default_rng(11)
    scalar = np.array([netmodel.sample_pull(server, qos, 1, rng).transmission_time for _ in range(20_000)])
    vector = netmodel.sample_pulls(server, qos, 1, np.random.default_rng(12), 20_000).transmission_time
    assert scalar.mean() == pytest.approx(vector.mean(), rel=0.03)


@pytest.mark.slow
@pytest.mark.parametrize(
    "arm",
    [
        physical_arm(),
        physical_arm(h_max=1, p=0.6),
        physical_arm(h_max=4, p=0.9, intensity=0.5, distance=1.5),
        physical_arm(h_max=2, p=0.5, arrival=0.2, intensity=2.0, distance=0.5),
    ],
)
def test_analytic_laws_match_million_samples(arm):
    checks = validate_arm(arm, 1, 1_000_000, np.random.default_rng(2020))
    assert [check.status for check in checks] == [PASS] * 5


def test_intersection_area_unit_lens():
    assert netmodel.intersection_area(1.0, 1.0) == pytest.approx(2 * math.pi / 3 - math.sqrt(3) / 2, rel=1e-12)


def test_intersection_area_matches_dart_throwing():
    rng = np.random.default_rng(6)
    points = rng.uniform(-1.0, 1.0, size=(1_000_000, 2))
    in_first = (points ** 2).sum(axis=1) <= 1.0
    in_second = ((points - [1.0, 0.0]) ** 2).sum(axis=1) <= 1.0
    estimate = 4.0 * np.mean(in_first & in_second)
    assert estimate == pytest.approx(netmodel.intersection_area(1.0, 1.0), abs=6e-3)


def test_expected_hops_matches_sampled_hops(default_arm, rng):
    batch = netmodel.sample_pulls(default_arm.server, default_arm.qos, 1, rng, 200_000)
    expected = netmodel.expected_hops(default_arm.server.geometry)
    assert 1.0 <= expected <= 3.0
    assert batch.hops.mean() == pytest.approx(expected, rel=5e-3)


def test_processing_cdf(default_arm):
    queue = default_arm.server.queue
    assert netmodel.processing_cdf(queue, 1, -0.5) == 0.0
    assert netmodel.processing_cdf(queue, 1, 0.0) == 0.0
    assert netmodel.processing_cdf(queue, 1, 1.0) == pytest.approx(1.0 - math.exp(-1.0))
    median = math.log(2.0) / netmodel.processing_rate(queue, 1)
    assert netmodel.processing_cdf(queue, 1, median) == pytest.approx(0.5)


def test_reward_mean_is_convolution_of_laws(default_arm):
    server, qos = default_arm.server, default_arm.qos
    expected = sum(
        netmodel.processing_cdf(server.queue, 1, qos.delta - k) * netmodel.transmission_pmf(server.geometry, 0.7, k)
        for k in range(1, math.floor(qos.delta) + 1)
    )
    assert netmodel.reward_mean(server, qos, 1) == pytest.approx(expected, rel=1e-12)


def test_reward_mean_monotone_in_link_and_load():
    def mu(**kwargs):
        arm = physical_arm(**kwargs)
        return netmodel.reward_mean(arm.server, arm.qos, 1)

    by_success = [mu(p=p) for p in (0.2, 0.4, 0.6, 0.8, 1.0)]
    by_arrival = [mu(arrival=arrival) for arrival in (0.2, 0.6, 1.0, 1.4, 1.8)]
    assert np.all(np.diff(by_success) >= 0)
    assert np.all(np.diff(by_arrival) <= 0)


def test_cost_pdf_is_mixture_over_transmission_time(default_arm):
    server = default_arm.server
    energy = server.energy
    rate = netmodel.processing_rate(server.queue, 1)
    support = netmodel.transmission_support(server.geometry, 0.7)
    for x in (1.2, 2.0, 3.7, 6.1, 11.0):
        expected = 0.0
        for k in range(1, support + 1):
            y = (x - energy.a_second - energy.a_prime * k) / energy.a
            if y >= 0:
                expected += rate * math.exp(-rate * y) * netmodel.transmission_pmf(server.geometry, 0.7, k)
        assert netmodel.cost_pdf(server, 1, x) == pytest.approx(expected / energy.a, rel=1e-9, abs=1e-15)


def test_joint_moment_matches_independent_sampler(default_arm):
    server, qos = default_arm.server, default_arm.qos
    geometry, energy = server.geometry, server.energy
    n, p = 300_000, 0.7
    batch = netmodel.sample_pulls(server, qos, 1, np.random.default_rng(21), n)

    rng = np.random.default_rng(22)
    q = netmodel.hop_success_probability(geometry)
    weights = q ** np.arange(geometry.h_max)
    hops = np.searchsorted(np.cumsum(weights / weights.sum()), rng.random(n), side="right") + 1
    attempts = rng.geometric(p, size=(n, geometry.h_max))
    transmission = np.where(np.arange(geometry.h_max) < hops[:, None], attempts, 0).sum(axis=1)
    processing = rng.exponential(1.0 / netmodel.processing_rate(server.queue, 1), size=n)
    reward = (processing + transmission <= qos.delta).astype(float)
    cost = energy.a * processing + energy.a_prime * transmission + energy.a_second

    assert np.mean(batch.reward * batch.cost) == pytest.approx(np.mean(reward * cost), rel=0.015)


def test_cost_cdf_memory_bounded_for_long_support():
    arm = physical_arm(h_max=10, p=0.02)
    server = arm.server
    support = netmodel.transmission_support(server.geometry, 0.02)
    assert support > 2000
    assert netmodel.mixture_chunk_rows(support) * support <= 2_000_000

    x = np.linspace(0.0, 3000.0, 50_000)
    tracemalloc.start()
    try:
        cdf = netmodel.cost_cdf(server, 1, x)
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    assert peak < 300 * 1024 * 1024
    assert cdf[0] == 0.0
    assert np.all(np.diff(cdf) >= -1e-12)
    assert cdf[-1] <= 1.0 + 1e-12


def test_ks_distance_against_uniform():
    samples = np.array([0.1, 0.4, 0.45, 0.9])
    # 经验分布与 F(x)=x 的最大偏差出现在 0.45 处: 3/4 − 0.45
    assert ks_distance(samples, lambda x: np.clip(x, 0.0, 1.0)) == pytest.approx(0.3)
