"""Services package: training pipelines, evaluation, style transfer and the oracle suite."""

from .evaluation_service import EvaluationResult, EvaluationService, generate
from .oracle_suite_service import CheckResult, OracleSuiteService, SuiteReport
from .pipeline_service import PipelineService
from .style_service import StyleReport, StyleTransferService
from .training_service import TrainingResult, TrainingService

__all__ = [
    'EvaluationResult',
    'EvaluationService',
    'generate',
    'CheckResult',
    'OracleSuiteService',
    'SuiteReport',
    'PipelineService',
    'StyleReport',
    'StyleTransferService',
    'TrainingResult',
    'TrainingService'
]
