import math

import numpy as np
import pytest

from app.exceptions import DomainError
from app.gaussian_core import (
    Axis,
    SimulationContext,
    beamsplitter,
    covariance,
    displace,
    feedforward,
    loss,
    make_coherent,
    make_squeezed,
    make_vacuum,
    mean,
    phase_flip,
    sample,
    variance,
)

TOL = 1e-12


def test_vacuum_statistics(ctx):
    v = make_vacuum(ctx)
    assert variance(v.x) == 1.0
    assert variance(v.y) == 1.0
    assert mean(v.x) == 0.0
    assert mean(v.y) == 0.0


def test_two_vacua_are_independent(ctx):
    a, b = make_vacuum(ctx), make_vacuum(ctx)
    assert covariance(a.x, b.x) == 0.0
    assert covariance(a.x, a.y) == 0.0


def test_coherent_state(ctx):
    zero = make_coherent(ctx, 0.0, 0.0)
    assert (mean(zero.x), mean(zero.y)) == (0.0, 0.0)
    assert (variance(zero.x), variance(zero.y)) == (1.0, 1.0)

    c = make_coherent(ctx, 3.0, -2.0)
    assert mean(c.x) == 3.0
    assert mean(c.y) == -2.0
    assert variance(c.x) == variance(c.y) == 1.0


def test_squeezed_state(ctx):
    vac = make_squeezed(ctx, 0.0, Axis.X)
    assert (variance(vac.x), variance(vac.y)) == (1.0, 1.0)

    s = make_squeezed(ctx, 0.8, Axis.X)
    assert variance(s.x) * variance(s.y) == pytest.approx(1.0, abs=TOL)
    assert variance(s.x) < 1.0 < variance(s.y)

    half = make_squeezed(ctx, 0.5 * math.log(2.0), Axis.X)
    assert variance(half.x) == pytest.approx(0.5, abs=TOL)

    ys = make_squeezed(ctx, 0.8, Axis.Y)
    assert variance(ys.y) == pytest.approx(math.exp(-1.6), abs=TOL)


def test_squeezed_rejects_negative_r(ctx):
    with pytest.raises(DomainError):
        make_squeezed(ctx, -0.1, Axis.X)


def test_beamsplitter_identity_port(ctx):
    m1 = make_coherent(ctx, 1.0, 2.0)
    m2 = make_squeezed(ctx, 0.3, Axis.X)
    out1, out2 = beamsplitter(m1, m2, 1.0)
    assert mean(out1.x) == 1.0
    assert variance(out1.x) == pytest.approx(variance(m1.x), abs=TOL)
    assert variance(out2.x) == pytest.approx(variance(m2.x), abs=TOL)
    assert covariance(out2.x, m2.x) == pytest.approx(-variance(m2.x), abs=TOL)


def test_balanced_beamsplitter_on_vacua(ctx):
    out1, out2 = beamsplitter(make_vacuum(ctx), make_vacuum(ctx), 0.5)
    for q in (out1.x, out1.y, out2.x, out2.y):
        assert variance(q) == pytest.approx(1.0, abs=TOL)
    assert covariance(out1.x, out2.x) == pytest.approx(0.0, abs=TOL)


def test_beamsplitter_epr_correlation(ctx):
    r = 0.7
    out1, out2 = beamsplitter(make_squeezed(ctx, r, Axis.Y), make_squeezed(ctx, r, Axis.X), 0.5)
    assert variance(out1.x - out2.x) == pytest.approx(2 * math.exp(-2 * r), abs=TOL)
    assert variance(out1.y + out2.y) == pytest.approx(2 * math.exp(-2 * r), abs=TOL)


@pytest.mark.parametrize("t", [-0.01, 1.01])
def test_beamsplitter_domain(ctx, t):
    with pytest.raises(DomainError):
        beamsplitter(make_vacuum(ctx), make_vacuum(ctx), t)


def test_beamsplitter_passivity(ctx):
    m1 = make_coherent(ctx, 3.0, -1.0)
    m2 = make_coherent(ctx, -0.5, 2.0)
    out1, out2 = beamsplitter(m1, m2, 0.3)
    assert variance(out1.x) + variance(out2.x) == pytest.approx(2.0, abs=TOL)

    energy_in = sum(mean(q) ** 2 for q in (m1.x, m1.y, m2.x, m2.y))
    energy_out = sum(mean(q) ** 2 for q in (out1.x, out1.y, out2.x, out2.y))
    assert energy_out == pytest.approx(energy_in, abs=TOL)


def test_loss_limits(ctx):
    m = make_squeezed(ctx, 0.9, Axis.X)
    kept, tapped = loss(m, 1.0)
    assert variance(kept.x) == pytest.approx(variance(m.x), abs=TOL)
    assert covariance(kept.x, m.x) == pytest.approx(variance(m.x), abs=TOL)
    assert variance(tapped.x) == pytest.approx(1.0, abs=TOL)

    kept, tapped = loss(make_vacuum(ctx), 0.0)
    for q in (kept.x, kept.y, tapped.x, tapped.y):
        assert variance(q) == pytest.approx(1.0, abs=TOL)


def test_loss_on_squeezed_mode(ctx):
    r = 0.6
    m = make_squeezed(ctx, r, Axis.X)
    kept, tapped = loss(m, 0.7)
    assert variance(kept.x) == pytest.approx(0.7 * math.exp(-2 * r) + 0.3, abs=TOL)
    assert variance(tapped.x) == pytest.approx(0.3 * math.exp(-2 * r) + 0.7, abs=TOL)

    draws = sample([kept.x], 200_000, seed=7)[:, 0]
    expected = variance(kept.x)
    std_error = expected * math.sqrt(2.0 / (draws.size - 1))
    assert abs(draws.var(ddof=1) - expected) <= 4 * std_error


@pytest.mark.parametrize("eta", [0.0, 0.25, 0.5, 0.9, 1.0])
def test_loss_complementarity(ctx, eta):
    m = make_squeezed(ctx, 1.1, Axis.Y)
    kept, tapped = loss(m, eta)
    assert variance(kept.x) == pytest.approx(eta * variance(m.x) + (1 - eta), abs=1e-9)

    # 逆分束把两个端口重新合成原模式
    restored, _ = beamsplitter(kept, tapped, eta)
    assert variance(restored.x - m.x) == pytest.approx(0.0, abs=1e-9)
    assert variance(restored.y - m.y) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("eta", [-0.2, 1.5])
def test_loss_domain(ctx, eta):
    with pytest.raises(DomainError):
        loss(make_vacuum(ctx), eta)


def test_displace(ctx):
    m = make_squeezed(ctx, 0.4, Axis.X)
    same = displace(m, 0.0, 0.0)
    assert mean(same.x) == mean(m.x)
    assert variance(same.x - m.x) == 0.0

    moved = displace(make_vacuum(ctx), 2.0, 5.0)
    assert (mean(moved.x), mean(moved.y)) == (2.0, 5.0)
    assert variance(moved.x) == 1.0

    shifted = displace(m, -1.5, 0.5)
    assert variance(shifted.x) == variance(m.x)
    assert variance(shifted.y) == variance(m.y)


def test_phase_flip(ctx):
    m = make_coherent(ctx, 1.0, -2.0)
    flipped = phase_flip(m)
    assert (mean(flipped.x), mean(flipped.y)) == (-1.0, 2.0)
    assert covariance(flipped.x, m.x) == -1.0


def test_feedforward(ctx):
    m = make_vacuum(ctx)
    meas = make_vacuum(ctx)
    unchanged = feedforward(m, meas.x, meas.y, 0.0)
    assert variance(unchanged.x - m.x) == 0.0

    cancelled = feedforward(m, -m.x, -m.y, 1.0)
    assert variance(cancelled.x) == 0.0
    assert variance(cancelled.y) == 0.0


def test_moment_algebra(ctx):
    a = make_squeezed(ctx, 0.3, Axis.X)
    b = make_vacuum(ctx)
    f1 = a.x + 0.5 * b.x
    f2 = 2.0 * b.x - a.x

    assert covariance(f1, f1) == pytest.approx(variance(f1), abs=TOL)
    assert covariance(f1, f2) == pytest.approx(covariance(f2, f1), abs=TOL)
    assert variance(3.0 * f1) == pytest.approx(9.0 * variance(f1), abs=TOL)

    p, q = 1.7, -0.4
    expected = p * p * variance(f1) + q * q * variance(f2) + 2 * p * q * covariance(f1, f2)
    assert variance(p * f1 + q * f2) == pytest.approx(expected, abs=TOL)


def test_mixed_contexts_rejected():
    a = make_vacuum(SimulationContext("a"))
    b = make_vacuum(SimulationContext("b"))
    with pytest.raises(DomainError):
        covariance(a.x, b.x)
    with pytest.raises(DomainError):
        a.x + b.x
    with pytest.raises(DomainError):
        sample([a.x, b.x], 10, seed=0)


def test_sample_vacuum():
    ctx = SimulationContext()
    v = make_vacuum(ctx)
    n = 1_000_000
    draws = sample([v.x], n, seed=3)[:, 0]
    assert abs(draws.mean()) <= 4.0 / math.sqrt(n)
    assert abs(draws.var(ddof=1) - 1.0) <= 4.0 * math.sqrt(2.0 / (n - 1))


def test_sample_is_deterministic(ctx):
    m = make_coherent(ctx, 1.0, 1.0)
    first = sample([m.x, m.y], 5_000, seed=11)
    second = sample([m.x, m.y], 5_000, seed=11)
    np.testing.assert_array_equal(first, second)
    assert first.shape == (5_000, 2)


def test_sample_rejects_empty_request(ctx):
    with pytest.raises(DomainError):
        sample([make_vacuum(ctx).x], 0, seed=0)
    with pytest.raises(DomainError):
        sample([], 10, seed=0)


def _random_circuit(rng, ctx):
    modes = []
    for _ in range(rng.integers(2, 7)):
        kind = rng.integers(3)
        if kind == 0:
            modes.append(make_coherent(ctx, *rng.uniform(-3, 3, 2)))
        elif kind == 1:
            modes.append(make_squeezed(ctx, rng.uniform(0, 1.2), Axis.X if rng.random() < 0.5 else Axis.Y))
        else:
            modes.append(make_vacuum(ctx))

    for _ in range(4):
        i, j = rng.choice(len(modes), 2, replace=False)
        modes[i], modes[j] = beamsplitter(modes[i], modes[j], rng.uniform(0, 1))
        k = rng.integers(len(modes))
        modes[k], _ = loss(modes[k], rng.uniform(0, 1))
    return modes


@pytest.mark.parametrize("seed", range(5))
def test_sampling_oracle_on_random_circuits(seed):
    rng = np.random.default_rng(seed)
    ctx = SimulationContext()
    modes = _random_circuit(rng, ctx)
    forms = [q for m in modes for q in (m.x, m.y)]
    n = 100_000
    draws = sample(forms, n, seed=seed)

    for i, f in enumerate(forms):
        v = variance(f)
        assert abs(draws[:, i].mean() - mean(f)) <= 4 * math.sqrt(v / n)
        assert abs(draws[:, i].var(ddof=1) - v) <= 4 * v * math.sqrt(2.0 / (n - 1))

    sampled_cov = np.cov(draws[:, 0], draws[:, 2])[0, 1]
    analytic = covariance(forms[0], forms[2])
    std_error = math.sqrt((variance(forms[0]) * variance(forms[2]) + analytic ** 2) / n)
    assert abs(sampled_cov - analytic) <= 4 * std_error
