"""Equilibrium analysis of reversible site-graph rewriting systems.

Thin wrappers over the compiled core: compile correspondence instances
into rewriting systems, run the bounded equilibrium check, evaluate the
built-in birth/flip example against its closed form, and simulate.
"""

import json as _json

from . import _ctmceq as _core

__all__ = [
    "compile_model",
    "solve_pcp",
    "model_summary",
    "check",
    "petri_experiment",
    "petri_closed_form",
    "simulate_model",
    "solve_energy",
]


def compile_model(instance, params, extended=True):
    """Model-language text for an instance; accepts dicts or JSON text."""
    return _core.compile_model(_dump(instance), _dump(params), extended)


def solve_pcp(instance, max_len=3):
    """All index sequences up to max_len whose concatenations agree."""
    return _core.solve_pcp(_dump(instance), max_len)


def model_summary(instance, params, extended=True):
    """Pair and rule counts plus validation warnings, as a dict."""
    return _json.loads(
        _core.model_summary_json(_dump(instance), _dump(params), extended)
    )


def check(instance, params, bound=4, state_cap=1000000, source="encoding", threads=1):
    """Bounded equilibrium report (verdict, witness or energies, census,
    partition sums) as a dict."""
    return _json.loads(
        _core.check_json(_dump(instance), _dump(params), bound, state_cap, source, threads)
    )


def petri_experiment(e1, e2, events, seed=0, rate_mode="unit_rate", n_max=10, m_max=10):
    return _json.loads(
        _core.petri_experiment_json(e1, e2, events, seed, rate_mode, n_max, m_max)
    )


def petri_closed_form(e1, e2, n_max=10, m_max=10):
    return _json.loads(_core.petri_closed_form_json(e1, e2, n_max, m_max))


def simulate_model(model_text, init="start", events=0, time=0.0, seed=0,
                   rate_mode="unit_rate"):
    return _json.loads(
        _core.simulate_model_json(model_text, init, events, time, seed, rate_mode)
    )


def solve_energy(rate_graph, tol=1e-9):
    """Energy assignment or a violating-cycle witness for a rate graph
    given as {"states": [...], "edges": [{"from", "to", "rate"}]}."""
    return _json.loads(_core.solve_energy_json(_dump(rate_graph), tol))


def _dump(obj):
    return obj if isinstance(obj, str) else _json.dumps(obj)
