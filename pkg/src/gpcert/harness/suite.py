"""Suite orchestration."""

from __future__ import annotations

import logging

from .config import RunConfig
from .criteria import run_check
from .report import Report

log = logging.getLogger(__name__)


def run_suite(cfg: RunConfig) -> Report:
    cfg.validate()
    report = Report(config=cfg.to_dict())
    for name in cfg.checks:
        log.info("running %s", name)
        recs = run_check(name, cfg)
        report.extend(recs)
        failed = sum(not r.passed for r in recs)
        log.info("%s: %d records, %d failed", name, len(recs), failed)
    return report
