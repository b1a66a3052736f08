"""Non-inferiority testing and intersection-union combination."""
from .iut import IutResult, iut_decision
from .noninferiority import (NON_INFERIOR, NOT_DEMONSTRATED, Direction, InsufficientSamplesError,
                             MetricSpec, TestKind, TestResult, decide, welch_noninferiority,
                             welch_statistics)
from .nonparametric import (hodges_lehmann, mw_null_counts, nonparametric_noninferiority,
                            pairwise_differences)
from .tdist import betainc, t_cdf, t_pdf, t_ppf


def noninferiority_test(candidate, reference, spec: MetricSpec, alpha: float = 0.05) -> TestResult:
    """Dispatch on the metric's configured test kind."""
    if spec.test is TestKind.NONPARAMETRIC:
        return nonparametric_noninferiority(candidate, reference, spec, alpha)
    return welch_noninferiority(candidate, reference, spec, alpha)
