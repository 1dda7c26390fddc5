"""
Celery tasks for verification sweeps.
"""

import json
import logging
from fractions import Fraction
from typing import Any

from app.celery_app import celery_app
from app.config import get_config, quadrature_config_from
from app.models import SpectralParams
from app.services.catalog import describe
from app.services.oracle import verify
from app.services.records import to_json, verification_record

logger = logging.getLogger(__name__)

# (family, n, k_max, tolerance, digits)
DEFAULT_SWEEP: tuple[tuple[str, int | None, int, float, int], ...] = (
    ("so", 2, 3, 1e-8, 60),
    ("so", 3, 3, 1e-8, 60),
    ("so", 4, 3, 1e-8, 60),
    ("so", 5, 3, 1e-8, 60),
    ("su", 3, 3, 1e-8, 60),
    ("sp", 2, 2, 1e-6, 80),
    ("f4", None, 2, 1e-6, 80),
)


@celery_app.task(bind=True, name="app.tasks.run_verification_task")
def run_verification_task(
    self,
    family: str,
    n: int | None,
    k_max: int,
    tolerance: float,
    settings: dict[str, Any] | None = None,
    params: dict[str, Any] | None = None,
) -> dict[str, Any]:
    """
    Verify one space against the numerical oracle.

    Args:
            family: Family tag ("so", "su", "sp", "f4")
            n: Family parameter, None for f4
            k_max: Highest coefficient to check
            tolerance: Relative error allowed per coefficient
            settings: Resolved settings mapping; environment defaults when omitted
            params: chi_dim, volume (string) and n0; unit values when omitted

    Returns:
            The JSON-ready verification record
    """
    settings = settings or get_config()
    params = params or {}
    label = f"{family}({n})"
    try:
        spectral = SpectralParams(
            chi_dim=int(params.get("chi_dim", 1)),
            volume=Fraction(str(params.get("volume", "1"))),
            n0=int(params.get("n0", 0)),
        )
        desc = describe(family, n)
        label = desc.label
        logger.info("Verification task started", extra={"space": label, "k_max": k_max})
        report = verify(desc, spectral, k_max, tolerance, quadrature_config_from(settings, desc))
        precision = settings["HEAT_OUTPUT_PRECISION"]
        record = json.loads(to_json(verification_record(report, precision), precision))
        logger.info("Verification task completed", extra={"space": label, "passed": report.passed})
        return record
    except Exception as e:
        logger.exception("Verification task failed", extra={"space": label, "error": str(e)})
        # Re-raise to mark task as failed in Celery
        raise
