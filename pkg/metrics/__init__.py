"""Evaluation metrics: KL, squared W2, teacher reconstruction error."""

from .divergence import HistogramGrid, assignment_cost, gaussian_w2sq, kl_histogram, w2_assignment
from .reports import MetricReport, MismatchReport, mismatch_report, teacher_l2

__all__ = [
    'HistogramGrid', 'assignment_cost', 'gaussian_w2sq', 'kl_histogram', 'w2_assignment',
    'MetricReport', 'MismatchReport', 'mismatch_report', 'teacher_l2',
]
