import logging

from django.dispatch import Signal, receiver

logger = logging.getLogger(__name__)

# Sent once per finished scan point with ``spec`` and ``cell``.
cell_completed = Signal()
# Sent after a theorem check with ``report``.
verification_completed = Signal()
# Sent after every pipeline arm with ``method`` and ``result``.
association_completed = Signal()


@receiver(cell_completed)
def log_cell(sender, spec, cell, **kwargs):
    summary = ", ".join(
        f"{variant.value}={cell.mean[variant]:.4g}±{cell.std_error[variant]:.2g}"
        for variant in spec.estimators
    )
    logger.info("%s=%s: %s", spec.scan_variable, cell.scan_value, summary)


@receiver(verification_completed)
def log_verification(sender, report, **kwargs):
    """
    Warn when an asserted check falls short of its required frequency.
    """
    if report.asserted and not report.succeeded:
        logger.warning(
            "%s below threshold: %.3f < %.3f", report.theorem_id, report.frequency, report.min_frequency
        )
    else:
        logger.debug("%s frequency %.3f", report.theorem_id, report.frequency)


@receiver(association_completed)
def log_association(sender, method, result, **kwargs):
    logger.info("%s arm: inflation %.3f over %d columns", method, result.inflation, result.p_values.shape[0])
