"""
Files a run leaves in its output directory: CSV tables, the line-delimited
state log and the manifest.
"""
# Standard library
import json
import logging
import os
import platform

# Third-party
import django
import git
import numpy as np
import pandas as pd
import scipy
import toml
from django.conf import settings
from django.core.management import CommandError

# First-party/Local
from dlm.distributions import NormalGamma
from marketdata import MANIFEST_FILE, STATE_RECORD_VERSION
from marketdata.panel import FLOAT_FORMAT

logger = logging.getLogger(__name__)


def artifact_path(output_dir, filename):
    return os.path.join(output_dir, filename)


def require_artifact(output_dir, filename, producer):
    """
    Path of an artifact an earlier command must have written; raises
    CommandError naming that command otherwise.
    """
    path = artifact_path(output_dir, filename)
    if not os.path.exists(path):
        raise CommandError(
            f"{path} is missing: run `manage.py {producer}` first"
        )
    return path


def write_table(frame, path):
    frame.to_csv(
        path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )


def read_table(path):
    return pd.read_csv(path, float_precision="round_trip")


class StateStore:
    """
    Append-only JSON-lines log of the priors a daily loop hands to the next
    day. Day t is written as one "prior" line per series followed by a
    "diagnostics" line; a day is complete once its diagnostics line is on
    disk.
    """

    def __init__(self, path):
        self.path = path

    def append_day(self, day, date, tickers, priors, diagnostics=None):
        lines = []
        for series, (ticker, prior) in enumerate(zip(tickers, priors)):
            record = {
                "version": STATE_RECORD_VERSION,
                "kind": "prior",
                "day": int(day),
                "date": str(date),
                "series": series,
                "ticker": ticker,
            }
            record.update(prior.to_record())
            lines.append(json.dumps(record))
        closing = {
            "version": STATE_RECORD_VERSION,
            "kind": "diagnostics",
            "day": int(day),
            "date": str(date),
        }
        closing.update(diagnostics or {})
        lines.append(json.dumps(closing))
        with open(self.path, "a", encoding="utf-8") as stream:
            stream.write("\n".join(lines) + "\n")
            stream.flush()
            os.fsync(stream.fileno())

    def _records(self):
        if not os.path.exists(self.path):
            return []
        records = []
        with open(self.path, encoding="utf-8") as stream:
            for line in stream:
                try:
                    record = json.loads(line)
                except json.JSONDecodeError:
                    # torn final line
                    break
                if record.get("version") != STATE_RECORD_VERSION:
                    raise CommandError(
                        f"{self.path}: unsupported state record version "
                        f"{record.get('version')!r}"
                    )
                records.append(record)
        return records

    def days(self):
        """
        Complete days in order, as (day, date, priors, diagnostics).
        """
        complete = []
        pending = []
        for record in self._records():
            if record["kind"] == "prior":
                if pending and pending[0]["day"] != record["day"]:
                    pending = []
                pending.append(record)
            else:
                priors = [
                    NormalGamma.from_record(r)
                    for r in sorted(pending, key=lambda r: r["series"])
                ]
                diagnostics = {
                    key: value
                    for key, value in record.items()
                    if key not in ("version", "kind", "day", "date")
                }
                complete.append(
                    (record["day"], record["date"], priors, diagnostics)
                )
                pending = []
        return complete

    def last_complete_day(self):
        """(day, date, priors, diagnostics) of the last complete day."""
        days = self.days()
        return days[-1] if days else None

    def discard_incomplete(self):
        """
        Rewrite the log without any trailing partial day; returns the
        number of complete days kept.
        """
        records = self._records()
        keep = 0
        for index, record in enumerate(records):
            if record["kind"] == "diagnostics":
                keep = index + 1
        if keep < len(records) or self._has_torn_tail():
            logger.info(
                "discarding %d records of an unfinished day from %s",
                len(records) - keep,
                self.path,
            )
            with open(self.path, "w", encoding="utf-8") as stream:
                for record in records[:keep]:
                    stream.write(json.dumps(record) + "\n")
        return sum(1 for r in records[:keep] if r["kind"] == "diagnostics")

    def _has_torn_tail(self):
        if not os.path.exists(self.path):
            return False
        with open(self.path, "rb") as stream:
            content = stream.read()
        return bool(content) and not content.endswith(b"\n")

    def reset(self):
        if os.path.exists(self.path):
            os.remove(self.path)


def code_revision():
    try:
        repo = git.Repo(settings.ROOT_DIR, search_parent_directories=True)
        return repo.head.commit.hexsha
    except (git.InvalidGitRepositoryError, git.NoSuchPathError, ValueError):
        return "unknown"


def package_versions():
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "django": django.get_version(),
    }


def write_manifest(output_dir, command, config, seconds, **extra):
    """
    Record the run of `command` in the output directory's manifest,
    keeping the entries of the other commands.
    """
    path = artifact_path(output_dir, MANIFEST_FILE)
    manifest = toml.load(path) if os.path.exists(path) else {}
    entry = {
        "config_digest": config.digest(),
        "seed": config.seed,
        "code_revision": code_revision(),
        "wall_clock_seconds": round(float(seconds), 3),
        "versions": package_versions(),
    }
    entry.update(extra)
    manifest[command] = entry
    with open(path, "w", encoding="utf-8") as stream:
        toml.dump(manifest, stream)
    return entry
