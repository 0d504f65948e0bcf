"""Infrared spectrum to molecular structure toolkit.

Thin wrapper over the compiled ``_ir_agent`` module; structured results are
returned as plain Python lists and dicts.
"""

import json as _json
import os as _os

from . import _ir_agent
from ._ir_agent import (
    IrAgentError,
    Spectrum,
    absorbance,
    canonicalize,
    compare,
    find_peak_indices,
    load_spectra,
    prompt_digest,
    save_spectra,
    to_absorbance,
)

__all__ = [
    "IrAgentError",
    "Spectrum",
    "absorbance",
    "assign_peaks",
    "canonicalize",
    "compare",
    "elucidate",
    "evaluate",
    "find_peak_indices",
    "load_spectra",
    "prompt_digest",
    "retrieve",
    "save_spectra",
    "to_absorbance",
]


def assign_peaks(spectrum, table, height=1.0, distance=50):
    """Peaks of an absorbance spectrum with their absorption-table matches."""
    return _json.loads(_ir_agent.assign_peaks(spectrum, _os.fspath(table), height, distance))


def retrieve(database, query, top_n=10, exclude_self=False):
    """Most similar database spectra by cosine similarity, best first."""
    return _json.loads(_ir_agent.retrieve(list(database), query, top_n, exclude_self))


def elucidate(input, database, table, config=None, checkpoint=None):
    """Run the agent pipeline on every spectrum of a JSON-lines file.

    ``config`` is a dict of pipeline settings (same keys as the CLI config file).
    """
    raw = _ir_agent.elucidate_json(
        _os.fspath(input),
        _os.fspath(database),
        _os.fspath(table),
        _json.dumps(config or {}),
        None if checkpoint is None else _os.fspath(checkpoint),
    )
    return _json.loads(raw)


def evaluate(spec, out_dir):
    """Run an experiment spec, write the report into ``out_dir`` and return raw.csv text."""
    return _ir_agent.evaluate(_os.fspath(spec), _os.fspath(out_dir))
