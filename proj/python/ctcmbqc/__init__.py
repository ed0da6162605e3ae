"""Closed-timelike-curve simulation with circuits and measurement patterns."""

import json

from . import _ctcmbqc
from ._ctcmbqc import Error, circuit_to_pattern, pattern_to_circuit, run_cli, scenario_names

__all__ = [
    "Error",
    "bss_simulate",
    "circuit_to_pattern",
    "compare",
    "deutsch",
    "pattern_to_circuit",
    "repro",
    "run_cli",
    "scenario_names",
    "simplify",
]


def _spec_text(spec):
    # Specs may be given as parsed JSON or as the file text.
    return spec if isinstance(spec, str) else json.dumps(spec)


def bss_simulate(spec, amplitudes):
    return json.loads(_ctcmbqc.bss_simulate(_spec_text(spec), [complex(a) for a in amplitudes]))


def deutsch(spec, bloch):
    x, y, z = bloch
    return json.loads(_ctcmbqc.deutsch(_spec_text(spec), x, y, z))


def compare(spec, tol=1e-9):
    return json.loads(_ctcmbqc.compare(_spec_text(spec), tol))


def simplify(spec):
    return json.loads(_ctcmbqc.simplify(_spec_text(spec)))


def repro(name, theta=0.7, tol=1e-10, seed=0):
    return json.loads(_ctcmbqc.repro(name, theta, tol, seed))
