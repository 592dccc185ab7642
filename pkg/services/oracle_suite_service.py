# services/oracle_suite_service.py

"""
Closed-form audits on the Gaussian task, run as one pass/fail suite.
"""

import os
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional

import numpy as np

from config.experiment import ExperimentConfig
from config.settings import settings
from interpolant.draws import draw_interpolant, make_rng
from interpolant.time_weights import TimeWeight, WeightKind
from objectives.losses import loss_emd, loss_fmm, loss_lmd
from oracle.bounds import wasserstein_bound_check
from oracle.gaussian import GaussianTask, oracle_flowmap_gaussian, oracle_velocity_gaussian
from oracle.maps import IdentityFlowMap, OracleFlowMap, OracleVelocity, PerturbedFlowMap
from oracle.numeric import teacher_flowmap_numeric
from utils.exceptions import AcceptanceError
from utils.logger import get_logger

from .builders import gaussian_task
from .pipeline_service import PipelineService

# Initialize logger
logger = get_logger(__name__)

ZERO_AT_TRUTH_SAMPLES = 4096
ZERO_AT_TRUTH_TOL = 1e-10
INVERSE_TOL = 1e-12
EULERIAN_TOL = 1e-6
EULERIAN_STEP = 1e-5
NUMERIC_TOL = 1e-8
MARGINAL_SAMPLES = 100000
REGRESSION_SAMPLES = 200000
COLLAPSE_INPUTS = 1000
COLLAPSE_STD_RATIO = 0.05
COLLAPSE_MEAN_TOL = 0.05


@dataclass
class CheckResult:
    name: str
    measured: float
    threshold: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: measured={self.measured:.6g} threshold={self.threshold:.6g}"


@dataclass
class SuiteReport:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def add(self, name: str, measured: float, threshold: float, passed: Optional[bool] = None) -> CheckResult:
        measured = float(measured)
        ok = bool(measured <= threshold) if passed is None else bool(passed)
        result = CheckResult(name, measured, float(threshold), ok)
        self.checks.append(result)
        (logger.info if ok else logger.warning)(result.line())
        return result

    def to_text(self) -> str:
        lines = [c.line() for c in self.checks]
        lines.append(f"{len(self.checks) - len(self.failures)}/{len(self.checks)} checks passed")
        return "\n".join(lines) + "\n"


class OracleSuiteService:
    """
    Runs every closed-form audit plus the denoiser collapse training.

    direction_sign in [oracle] flips the Eulerian transport direction so the
    suite can be shown to catch a sign error.
    """

    def __init__(self, config: ExperimentConfig, output_dir: Optional[str] = None):
        self.config = config
        self.output_dir = output_dir or config.output_dir
        self.task: GaussianTask = gaussian_task(config)
        self.rng = make_rng(config.run.seed, 500)
        self.workers = settings.worker_count(config.run.deterministic)
        os.makedirs(self.output_dir, exist_ok=True)
        logger.info(f"OracleSuiteService initialized (task mean={self.task.mean}, std={self.task.std})")

    def run(self, train_denoiser: bool = True) -> SuiteReport:
        """
        Raises:
            AcceptanceError: If any check fails; the report is written first
        """
        report = SuiteReport()
        checks: List[Callable[[SuiteReport], None]] = [
            self._zero_at_truth,
            self._fmm_variance_floor,
            self._velocity_regression,
            self._transport_marginals,
            self._inverse_identity,
            self._eulerian_residual,
            self._numeric_oracle,
            self._bound_audit,
        ]
        if train_denoiser:
            checks.append(self._denoiser_collapse)
        for check in checks:
            check(report)

        path = os.path.join(self.output_dir, "oracle-suite.txt")
        with open(path, "w") as f:
            f.write(report.to_text())
        self.report_path = path
        if not report.passed:
            names = ", ".join(c.name for c in report.failures)
            raise AcceptanceError(f"{len(report.failures)} oracle check(s) failed: {names}")
        logger.info(f"Oracle suite passed ({len(report.checks)} checks)")
        return report

    def _draw(self, size: int):
        weight = TimeWeight(WeightKind.UNIFORM_SQUARE)
        return draw_interpolant(self.task.schedule, self.task.coupling, weight, self.rng, size)

    def _zero_at_truth(self, report: SuiteReport) -> None:
        exact, velocity = OracleFlowMap(self.task), OracleVelocity(self.task)
        draw = self._draw(ZERO_AT_TRUTH_SAMPLES)
        schedule = self.task.schedule
        report.add("lmd zero at truth", loss_lmd(exact, velocity, draw, schedule).value, ZERO_AT_TRUTH_TOL)
        emd = loss_emd(exact, velocity, draw, schedule, direction_sign=self.config.oracle.direction_sign)
        report.add("emd zero at truth", emd.value, ZERO_AT_TRUTH_TOL)

    def _fmm_variance_floor(self, report: SuiteReport) -> None:
        exact = OracleFlowMap(self.task)
        draw = self._draw(ZERO_AT_TRUTH_SAMPLES)
        graph = loss_fmm(exact, draw)
        other = self._draw(ZERO_AT_TRUTH_SAMPLES)
        residual = oracle_velocity_gaussian(self.task, other.t, other.I) - other.Idot
        floor = np.sum(residual ** 2, axis=1)
        floor_se = floor.std(ddof=1) / np.sqrt(len(floor))
        gap = abs(graph.terms["lagrangian"] - floor.mean())
        report.add("fmm variance floor", gap, 3.0 * np.hypot(graph.standard_error(), floor_se))
        report.add("fmm invertibility at truth", graph.terms["invertibility"], ZERO_AT_TRUTH_TOL)

    def _velocity_regression(self, report: SuiteReport) -> None:
        """Least-squares regression of Idot_t on I_t against the closed-form drift."""
        for t in (0.25, 0.5, 0.75):
            draw = self._draw(REGRESSION_SAMPLES).with_times(np.zeros(REGRESSION_SAMPLES),
                                                              np.full(REGRESSION_SAMPLES, t), self.task.schedule)
            for i in range(self.task.dim):
                x, y = draw.I[:, i], draw.Idot[:, i]
                xc = x - x.mean()
                sxx = np.sum(xc * xc)
                slope = np.sum(xc * (y - y.mean())) / sxx
                resid = y - y.mean() - slope * xc
                se = np.sqrt(np.sum(resid ** 2) / (len(x) - 2) / sxx)
                expected = float(self.task.slope(t)[0, i])
                report.add(f"velocity regression slope t={t} dim={i}", abs(slope - expected), 3.0 * se + 1e-12)

    def _transport_marginals(self, report: SuiteReport) -> None:
        x0 = self.rng.standard_normal((MARGINAL_SAMPLES, self.task.dim))
        n = MARGINAL_SAMPLES
        for t in (0.25, 0.5, 0.75, 1.0):
            pushed = oracle_flowmap_gaussian(self.task, 0.0, t, x0)
            m_t, sigma_t, _, _ = self.task.moments(t)
            mean_gap = np.abs(pushed.mean(axis=0) - m_t[0])
            std_gap = np.abs(pushed.std(axis=0, ddof=1) - sigma_t[0])
            mean_ok = bool(np.all(mean_gap <= 3.0 * sigma_t[0] / np.sqrt(n)))
            std_ok = bool(np.all(std_gap <= 3.0 * sigma_t[0] / np.sqrt(2.0 * n)))
            report.add(f"transport marginal mean t={t}", mean_gap.max(), float(3.0 * sigma_t.max() / np.sqrt(n)),
                       passed=mean_ok)
            report.add(f"transport marginal std t={t}", std_gap.max(),
                       float(3.0 * sigma_t.max() / np.sqrt(2.0 * n)), passed=std_ok)

    def _inverse_identity(self, report: SuiteReport) -> None:
        x = self.rng.standard_normal((1000, self.task.dim)) * 3.0
        s, t = self.rng.random(1000), self.rng.random(1000)
        back = oracle_flowmap_gaussian(self.task, t, s, oracle_flowmap_gaussian(self.task, s, t, x))
        report.add("oracle inverse identity", np.max(np.linalg.norm(back - x, axis=1)), INVERSE_TOL)

    def _eulerian_residual(self, report: SuiteReport) -> None:
        """d_s X + grad X . b_s by central differences on a 20 x 20 x 20 (s, t, x) grid."""
        h = EULERIAN_STEP
        times = np.linspace(0.025, 0.975, 20)
        u = np.linspace(-3.0, 3.0, 20)[:, None]
        worst = 0.0
        for s in times:
            m_s, sigma_s, _, _ = self.task.moments(s)
            x = m_s + u * sigma_s
            b = oracle_velocity_gaussian(self.task, s, x)
            for t in times:
                d_s = (oracle_flowmap_gaussian(self.task, s + h, t, x)
                       - oracle_flowmap_gaussian(self.task, s - h, t, x)) / (2.0 * h)
                jvp = (oracle_flowmap_gaussian(self.task, s, t, x + h * b)
                       - oracle_flowmap_gaussian(self.task, s, t, x - h * b)) / (2.0 * h)
                worst = max(worst, float(np.max(np.abs(d_s + jvp))))
        report.add("eulerian residual of the exact map", worst, EULERIAN_TOL)

    def _numeric_oracle(self, report: SuiteReport) -> None:
        x = self.rng.standard_normal((256, self.task.dim))
        velocity = OracleVelocity(self.task)
        worst = 0.0
        for s, t in ((0.0, 1.0), (0.2, 0.9), (0.8, 0.1)):
            numeric = teacher_flowmap_numeric(velocity, s, t, x)
            worst = max(worst, float(np.max(np.abs(numeric - oracle_flowmap_gaussian(self.task, s, t, x)))))
        report.add("rk4 flow map vs closed form", worst, NUMERIC_TOL)

    def _bound_audit(self, report: SuiteReport) -> None:
        oc = self.config.oracle
        exact = OracleFlowMap(self.task)
        maps = [("exact", exact), ("identity", IdentityFlowMap(self.task.dim))]
        maps += [(f"perturbed-{i}", PerturbedFlowMap.random(exact, self.rng, oc.perturbation_scale))
                 for i in range(oc.perturbed_maps)]
        for kind in ("lmd", "emd"):
            for name, flow_map in maps:
                audit = wasserstein_bound_check(
                    self.task, flow_map, kind, self.rng, oc.normalization,
                    loss_samples=oc.loss_samples, base_samples=oc.base_samples,
                    direction_sign=oc.direction_sign,
                    workers=self.workers,
                )
                report.add(f"{kind} bound ({name})", audit.lhs, audit.rhs + audit.tolerance, passed=audit.holds)

    def _denoiser_collapse(self, report: SuiteReport) -> None:
        """Train on the denoiser loss; the one-step map should collapse onto the target mean."""
        oc = self.config.oracle
        config = replace(
            self.config,
            run=replace(self.config.run, train_steps=oc.denoiser_steps, teacher=None, name="denoiser"),
            task=replace(self.config.task, name="gaussian"),
            loss=replace(self.config.loss, kind="denoiser"),
            interpolant=replace(self.config.interpolant, schedule="linear", coupling="independent"),
        )
        result = PipelineService(config, os.path.join(self.output_dir, "denoiser")).train_direct()
        x0 = self.rng.standard_normal((COLLAPSE_INPUTS, self.task.dim))
        out = result.model(0.0, 1.0, x0)
        std_ratio = np.max(out.std(axis=0) / self.task.std)
        mean_gap = np.max(np.abs(out.mean(axis=0) - self.task.mean))
        report.add("denoiser collapse: output std / target std", std_ratio, COLLAPSE_STD_RATIO)
        report.add("denoiser collapse: |output mean - m|", mean_gap, COLLAPSE_MEAN_TOL)
