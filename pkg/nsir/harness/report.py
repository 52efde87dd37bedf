"""
Harness - Check Report Aggregation

Collects every JSON check report below a run or sweep directory into a
single report.json and derives the exit status.
"""

import logging
import os
from typing import Any, Dict, List

from ..shared.errors import MissingArtifact
from ..shared.io import read_json, write_json

logger = logging.getLogger(__name__)

REPORT_FILE = "report.json"
EXIT_OK = 0
EXIT_CHECK_FAILED = 4


def find_check_reports(directory: str) -> List[str]:
    """Sorted paths of JSON files holding a 'checks' list"""
    found = []
    for root, dirs, files in os.walk(directory):
        dirs.sort()
        for filename in sorted(files):
            if not filename.endswith(".json") or filename == REPORT_FILE:
                continue
            path = os.path.join(root, filename)
            try:
                payload = read_json(path)
            except ValueError:
                logger.warning("skipping unreadable JSON %s", path)
                continue
            if isinstance(payload, dict) and isinstance(payload.get("checks"), list):
                found.append(path)
    return found


def aggregate(directory: str) -> Dict[str, Any]:
    """
    Merge every check report below directory and write report.json

    Returns:
        dict with passed, total, failed (list of "file: check") and reports

    Raises:
        MissingArtifact: directory missing or holding no check reports
    """
    if not os.path.isdir(directory):
        raise MissingArtifact(f"no such run directory: {directory}")
    paths = find_check_reports(directory)
    if not paths:
        raise MissingArtifact(f"no check reports found below {directory}")

    reports, failed, total = [], [], 0
    for path in paths:
        payload = read_json(path)
        rel = os.path.relpath(path, directory).replace(os.sep, "/")
        for check in payload["checks"]:
            total += 1
            if not check.get("passed", False):
                failed.append(f"{rel}: {check.get('name')}")
        reports.append({"file": rel, "report": payload.get("report", os.path.splitext(os.path.basename(path))[0]),
                        "checks": payload["checks"]})

    summary = {"passed": not failed, "total": total, "failed": failed, "reports": reports}
    write_json(os.path.join(directory, REPORT_FILE), summary)
    logger.info("%d check(s) in %d report(s), %d failed", total, len(reports), len(failed))
    return summary


def exit_code(summary: Dict[str, Any]) -> int:
    return EXIT_OK if summary["passed"] else EXIT_CHECK_FAILED
