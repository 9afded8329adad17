"""
验收校验套件
闭式结果与 Monte Carlo、经典极限、阈值搜索逐项核对
"""
import logging
import math
import time
from typing import Callable, List, Optional

import numpy as np
from pydantic import BaseModel

from app.config import settings
from app.fidelity import (
    classical_fidelity,
    fidelity_closed_form,
    fidelity_monte_carlo,
    fidelity_unity_gain,
)
from app.gaussian_core import SimulationContext, make_coherent, sample, variance
from app.models import GaussianGuess, ProtocolConfig, Regime, SweepSpec
from app.protocols import (
    build_epr_circuit,
    classical_measurement,
    classical_teleport,
    epr_teleport,
    find_squeezing_for_fidelity,
)
from app.rendering import render_sweep_csv
from app.security import classify_regime, find_conditional_crossover, find_eve_crossover
from app.sweep import sweep

logger = logging.getLogger(__name__)

SQUEEZING_GRID = (0.0, 0.25, 0.5, 1.0, 2.0)
CROSSOVER_GRID = (0.1, 0.5, 1.0, 2.0, 5.0)
THRESHOLD_ACCURACY = 1e-6
SQUEEZING_ACCURACY = 1e-9


class CheckResult(BaseModel):
    """单项校验结果"""
    name: str
    passed: bool
    worst_deviation: float
    detail: str = ""
    seconds: float = 0.0


class Verifier:
    """
    验收套件
    tolerance 用于闭式比较, sigmas 用于 Monte Carlo 比较 (标准误随 1/√n 自动缩放)
    """

    def __init__(
        self,
        mc_samples: Optional[int] = None,
        seed: Optional[int] = None,
        tolerance: Optional[float] = None,
        sigmas: Optional[float] = None,
    ):
        self.mc_samples = mc_samples or settings.MC_SAMPLES
        self.seed = settings.SEED if seed is None else seed
        self.tolerance = settings.TOLERANCE if tolerance is None else tolerance
        self.sigmas = sigmas or settings.MC_SIGMAS
        self.rng = np.random.default_rng(self.seed)

    # =========================
    # 对外唯一入口
    # =========================
    def run(self) -> List[CheckResult]:
        checks: List[Callable[[], CheckResult]] = [
            self.check_classical_limit,
            self.check_classical_measurement,
            self.check_mc_vs_closed_form,
            self.check_ideal_epr,
            self.check_finite_squeezing,
            self.check_eve_crossover,
            self.check_conditional_threshold,
            self.check_gain_peak,
            self.check_regime_boundaries,
            self.check_reproducibility,
        ]
        return [self._timed(check) for check in checks]

    def _timed(self, check: Callable[[], CheckResult]) -> CheckResult:
        name = check.__name__.removeprefix("check_")
        start = time.perf_counter()
        try:
            result = check()
        except Exception as e:
            logger.error(f"校验 {name} 异常: {e}", exc_info=True)
            result = CheckResult(name=name, passed=False, worst_deviation=math.inf, detail=str(e))
        result.seconds = time.perf_counter() - start
        logger.info(f"校验 {name}: {'通过' if result.passed else '失败'} ({result.seconds:.2f}s)")
        return result

    def _random_alpha(self) -> tuple:
        return tuple(self.rng.uniform(-5.0, 5.0, 2))

    # =========================
    # 各项校验
    # =========================
    def check_classical_limit(self) -> CheckResult:
        worst = 0.0
        for _ in range(10):
            ctx = SimulationContext()
            report = classical_teleport(make_coherent(ctx, *self._random_alpha()))
            worst = max(
                worst,
                abs(report.n_x_out - 2.0),
                abs(report.n_y_out - 2.0),
                abs(report.fidelity_at_unity_gain - 0.5),
            )
        return CheckResult(name="classical_limit", passed=worst <= self.tolerance, worst_deviation=worst)

    def check_classical_measurement(self) -> CheckResult:
        worst = 0.0
        for _ in range(10):
            ctx = SimulationContext()
            report, _, _ = classical_measurement(make_coherent(ctx, *self._random_alpha()))
            worst = max(
                worst,
                abs(report.n_x_m - 2.0),
                abs(report.n_y_m - 2.0),
                abs(classical_fidelity(report.n_x_m, report.n_y_m) - 0.5),
            )
        return CheckResult(name="classical_measurement", passed=worst <= self.tolerance, worst_deviation=worst)

    def check_mc_vs_closed_form(self) -> CheckResult:
        cases = 100
        agreed = 0
        worst_sigma = 0.0
        for i in range(cases):
            n_x, n_y = self.rng.uniform(0.0, 10.0, 2)
            dx, dy = self.rng.uniform(-5.0, 5.0, 2)
            guess = GaussianGuess(mean_x=dx, mean_y=dy, n_x=n_x, n_y=n_y)
            estimate = fidelity_monte_carlo(guess, 0.0, 0.0, self.mc_samples, self.seed + i)
            agreed += estimate.agrees(self.sigmas)
            if estimate.std_error > 0:
                worst_sigma = max(worst_sigma, estimate.deviation / estimate.std_error)
        return CheckResult(
            name="mc_vs_closed_form",
            passed=agreed >= cases - 1,
            worst_deviation=worst_sigma,
            detail=f"{agreed}/{cases} 在 {self.sigmas:g}σ 内",
        )

    def check_ideal_epr(self) -> CheckResult:
        ctx = SimulationContext()
        report = epr_teleport(ProtocolConfig(r=20.0), make_coherent(ctx, 1.0, -1.0))
        worst = max(report.n_x_out, report.n_y_out, 1.0 - report.fidelity_at_unity_gain)
        return CheckResult(name="ideal_epr", passed=worst <= self.tolerance, worst_deviation=worst)

    def check_finite_squeezing(self) -> CheckResult:
        worst = 0.0
        mc_ok = True
        n = max(self.mc_samples * 10, 1_000)
        for i, r in enumerate(SQUEEZING_GRID):
            ctx = SimulationContext()
            input = make_coherent(ctx, 0.5, 0.5)
            config = ProtocolConfig(r=r)
            report = epr_teleport(config, input)
            expected = 2.0 * math.exp(-2.0 * r)
            worst = max(worst, abs(report.n_x_out - expected), abs(report.n_y_out - expected))

            # 在同一线路上独立采样, 与符号方差比较
            circuit = build_epr_circuit(config, input)
            added_x = circuit.bob_mode.x + circuit.x_m - input.x
            analytic = variance(added_x)
            draws = sample([added_x], n, self.seed + i)[:, 0]
            std_error = analytic * math.sqrt(2.0 / (n - 1))
            mc_ok &= abs(draws.var(ddof=1) - analytic) <= self.sigmas * std_error

        r_two_thirds = find_squeezing_for_fidelity(2.0 / 3.0, tol=1e-12)
        crossing = abs(r_two_thirds - 0.5 * math.log(2.0))
        passed = worst <= self.tolerance and mc_ok and crossing <= SQUEEZING_ACCURACY
        return CheckResult(
            name="finite_squeezing",
            passed=passed,
            worst_deviation=worst,
            detail=f"MC {'一致' if mc_ok else '不一致'}, F=2/3 处 r 偏差 {crossing:.3g}",
        )

    def check_eve_crossover(self) -> CheckResult:
        worst = max(abs(find_eve_crossover(r, settings.CROSSOVER_TOL) - 0.5) for r in CROSSOVER_GRID)
        return CheckResult(name="eve_crossover", passed=worst <= THRESHOLD_ACCURACY, worst_deviation=worst)

    def check_conditional_threshold(self) -> CheckResult:
        worst = abs(find_conditional_crossover(5.0, settings.CROSSOVER_TOL) - 0.5)
        return CheckResult(name="conditional_threshold", passed=worst <= THRESHOLD_ACCURACY, worst_deviation=worst)

    def check_gain_peak(self) -> CheckResult:
        offsets = np.linspace(-3.0, 3.0, 21)
        peak = fidelity_closed_form(GaussianGuess(mean_x=0.0, mean_y=0.0, n_x=1.0, n_y=1.0), 0.0, 0.0)
        runner_up = max(
            fidelity_closed_form(GaussianGuess(mean_x=dx, mean_y=dy, n_x=1.0, n_y=1.0), 0.0, 0.0)
            for dx in offsets
            for dy in offsets
            if not (dx == 0.0 and dy == 0.0)
        )
        return CheckResult(name="gain_peak", passed=runner_up < peak, worst_deviation=runner_up - peak)

    def check_regime_boundaries(self) -> CheckResult:
        delta = 1e-6
        expectations = [
            (2.0 + delta, Regime.BELOW_CLASSICAL),
            (2.0, Regime.CLASSICAL_BOUNDARY),
            (2.0 - delta, Regime.INTERMEDIATE),
            (1.0 + delta, Regime.INTERMEDIATE),
            (1.0, Regime.SECURE),
        ]
        misses = [n for n, want in expectations if classify_regime(fidelity_unity_gain(n, n)) is not want]
        return CheckResult(
            name="regime_boundaries",
            passed=not misses,
            worst_deviation=float(len(misses)),
            detail=f"不符合的 N: {misses}" if misses else "",
        )

    def check_reproducibility(self) -> CheckResult:
        spec = SweepSpec(
            r_values=[0.5, 1.0],
            eta_values=[0.3, 0.5, 0.8],
            gain_values=[1.0],
            mc_samples=1_000,
            seed=self.seed,
        )
        first = render_sweep_csv(sweep(spec))
        second = render_sweep_csv(sweep(spec))
        return CheckResult(name="reproducibility", passed=first == second, worst_deviation=0.0 if first == second else 1.0)
