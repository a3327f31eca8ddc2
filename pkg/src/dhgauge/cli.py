"""Command-line entry point: ``dhgauge <command> [options]``.

Every command prints a JSON run report (or writes it to ``--output``) and
exits with 0 ok, 2 parse, 3 cap, 4 inequivalent witness, 5 stabilizer
violation.
"""

import argparse
import sys
import time

import numpy as np

from . import descriptor, evolution, gauge, lattice, serial
from .descriptor import Limits
from .errors import CapExceededError, DHError, GaugeFixError, ParseError, WitnessError
from .pauli import all_strings, as_pauli_sum

PROG = "dhgauge"


class _Run:
    def __init__(self, command, args):
        self.command = command
        self.args = args
        self.inputs = {}
        self.results = {}
        self.timings = {}
        self.pending_writes = []
        self._t0 = time.perf_counter()

    def timed(self, key, fn, *a, **kw):
        t = time.perf_counter()
        out = fn(*a, **kw)
        self.timings[key] = time.perf_counter() - t
        return out

    def report(self, status):
        doc = {
            "version": serial.FORMAT_VERSION,
            "command": self.command,
            "inputs": self.inputs,
            "results": self.results,
            "status": status,
        }
        if not self.args.no_timings:
            self.timings["total"] = time.perf_counter() - self._t0
            doc["timings"] = self.timings
        return doc


def _limits(args):
    base = Limits()
    return Limits(
        dense_cap=args.dense_cap if args.dense_cap is not None else base.dense_cap,
        decomposition_cap=base.decomposition_cap,
        term_cap=args.term_cap if args.term_cap is not None else base.term_cap,
        reconstruction_cap=base.reconstruction_cap,
    )


def _require(args, name):
    value = getattr(args, name)
    if value is None:
        raise ParseError(f"--{name.replace('_', '-')} is required for {args.command}")
    return value


def _load_observables(path, n):
    if path is None:
        return {s: s for s in all_strings(n) if s.count("I") >= n - 1 and s != "I" * n}
    doc = serial.load_json(path)
    entries = doc.get("observables") if isinstance(doc, dict) else doc
    if not isinstance(entries, list):
        raise ParseError("observables file must hold a list or {'observables': [...]}")
    out = {}
    try:
        for i, e in enumerate(entries):
            if isinstance(e, str):
                out[e] = as_pauli_sum(e, n)
            elif isinstance(e, dict):
                label = e.get("label", f"obs{i}")
                out[label] = serial.decode_pauli_sum(e, n)
            else:
                raise ParseError(f"bad observable entry {e!r}")
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    return out


def _real(z, tol=1e-10):
    z = complex(z)
    return z.real if abs(z.imag) <= tol else serial.encode_complex(z)


def cmd_simulate(run, args):
    limits = _limits(args)
    doc = serial.load_json(_require(args, "input"))
    circuit = evolution.circuit_from_json(doc)
    n = circuit.n
    obs = _load_observables(args.observables, n)
    run.inputs.update(circuit=evolution.circuit_to_json(circuit), observables=sorted(obs))
    states, values, skipped = {}, {}, {}
    for backend in ("dense", "pauli-sum"):
        try:
            st = run.timed(backend, lambda b=backend: evolution.run_circuit(
                descriptor.init(n, b, limits), circuit))
            states[backend] = st
            values[backend] = {k: descriptor.expectation(st, o) for k, o in obs.items()}
        except CapExceededError as exc:
            skipped[backend] = str(exc)
    if not states:
        raise CapExceededError("; ".join(skipped.values()))
    primary = "dense" if "dense" in states else "pauli-sum"
    run.results["expectations"] = {k: _real(v) for k, v in values[primary].items()}
    run.results["footprint"] = sorted(descriptor.footprint(states[primary]))
    run.results["backends"] = sorted(states)
    if skipped:
        run.results["skipped_backends"] = skipped
    if len(states) == 2:
        run.results["backend_agreement"] = max(
            (abs(values["dense"][k] - values["pauli-sum"][k]) for k in obs), default=0.0)
    if args.snapshot:
        run.pending_writes.append((args.snapshot, descriptor.to_snapshot(states[primary])))


def _load_snapshot(path, limits):
    return descriptor.from_snapshot(serial.load_json(path), limits)


def _expectation_residue(a, b):
    """Largest change of any Pauli-string expectation between two states."""
    if a.n <= a.limits.reconstruction_cap:
        ea = descriptor.pauli_expectations(a, range(a.n))
        eb = descriptor.pauli_expectations(b, range(b.n))
        return float(np.max(np.abs(ea - eb)))
    strings = [s for s in all_strings(a.n) if a.n - s.count("I") <= 2]
    return max(abs(descriptor.expectation(a, s) - descriptor.expectation(b, s)) for s in strings)


def cmd_gauge(run, args):
    limits = _limits(args)
    mode = args.mode
    a = _load_snapshot(_require(args, "input"), limits)
    run.inputs.update(mode=mode, snapshot_a=descriptor.to_snapshot(a))
    if mode == "apply":
        if args.other is not None:
            raise ParseError("apply mode takes --gauge, not --other")
        gdoc = serial.load_json(_require(args, "gauge"))
        run.inputs["gauge"] = gdoc
        fam = gauge.gauge_from_json(gdoc, a.n, args.seed_override, limits.dense_cap)
        g = fam.at(args.time)
        b = gauge.apply_gauge(a, g)
        run.results.update(
            theta=g.theta,
            expectation_residue=_expectation_residue(a, b),
            canonical_distance=gauge.canonical_distance(a, b),
            footprint_before=sorted(descriptor.footprint(a)),
            footprint_after=sorted(descriptor.footprint(b)),
            descriptor_distance=float(np.max(np.abs(
                descriptor.descriptor_matrices(a) - descriptor.descriptor_matrices(b)))),
        )
        snap = descriptor.to_snapshot(b)
        if args.snapshot:
            run.pending_writes.append((args.snapshot, snap))
        else:
            run.results["snapshot"] = snap
        return
    if args.gauge is not None:
        raise ParseError(f"{mode} mode takes --other, not --gauge")
    b = _load_snapshot(_require(args, "other"), limits)
    run.inputs["snapshot_b"] = descriptor.to_snapshot(b)
    if a.n != b.n:
        raise ParseError(f"snapshots have {a.n} and {b.n} qubits")
    if mode == "compare":
        dist = gauge.canonical_distance(a, b)
        run.results.update(equivalent=bool(dist < args.tol), canonical_distance=dist)
        return
    try:
        w = gauge.recover_witness(a, b, args.tol)
    except WitnessError as exc:
        run.results["failure"] = exc.reason
        raise
    residual = gauge.stabilizer_residual(w.v, w.theta)
    moved = gauge.apply_gauge(a, w)
    run.results.update(
        witness=gauge.transform_to_json(w),
        stabilizer_residual=residual,
        stabilizer_satisfied=bool(residual <= args.tol),
        reproduction_error=float(np.max(np.abs(
            descriptor.descriptor_matrices(moved) - descriptor.descriptor_matrices(b)))),
    )


def audit_circuit(circuit, limits=descriptor.DEFAULT_LIMITS, tol=1e-12):
    """Per-gate change sets with every descriptor recomputed."""
    state = descriptor.init(circuit.n, "dense", limits)
    ledger = []
    local = True
    for g in circuit.ops:
        # measure with every descriptor recomputed; carry the plain update forward
        probe = evolution.apply_gate(state, g, conjugate_all=True)
        diff = np.max(np.abs(probe.descriptors - state.descriptors), axis=(1, 2, 3))
        changed = [int(q) for q in np.nonzero(diff > tol)[0]]
        ok = set(changed) <= set(g.targets)
        local &= ok
        ledger.append({"gate": g.name, "targets": list(g.targets), "changed": changed,
                       "max_outside_change": float(max(
                           (diff[q] for q in range(circuit.n) if q not in g.targets), default=0.0)),
                       "local": ok})
        state = evolution.apply_gate(state, g)
    return ledger, local


def cmd_audit(run, args):
    limits = _limits(args)
    circuit = evolution.circuit_from_json(serial.load_json(_require(args, "input")))
    if circuit.n > limits.dense_cap:
        raise CapExceededError(f"{circuit.n} qubits exceeds dense cap {limits.dense_cap}")
    tol = args.tol if args.tol_given else 1e-12
    run.inputs.update(circuit=evolution.circuit_to_json(circuit), tol=tol)
    ledger, local = run.timed("audit", audit_circuit, circuit, limits, tol)
    run.results.update(ledger=ledger, verdict="local" if local else "nonlocal")


def flow_errors(h, fam, t, dt, state0=None):
    """Integrator error against the closed form, at ``dt`` and ``dt / 2``."""
    state0 = state0 if state0 is not None else descriptor.init(h.n)
    closed = evolution.gauged_closed_form(state0, h, fam, t)
    out = {}
    finals = {}
    for key, step in (("dt", dt), ("dt_half", dt / 2)):
        st = evolution.integrate_gauged_flow(state0, h, fam, t, step)
        finals[key] = st
        out[key] = float(np.max(np.abs(st.descriptors - closed.descriptors)))
    ungauged = evolution.evolve_hamiltonian(state0, h, t)
    out["ratio"] = out["dt"] / out["dt_half"] if out["dt_half"] > 0 else float("inf")
    out["residue"] = _expectation_residue(finals["dt"], ungauged)
    return out


def cmd_gauged_flow(run, args):
    limits = _limits(args)
    h = evolution.hamiltonian_from_json(serial.load_json(_require(args, "hamiltonian")))
    fdoc = serial.load_json(_require(args, "family"))
    fam = gauge.gauge_from_json(fdoc, h.n, args.seed_override, limits.dense_cap)
    if args.dt is None or args.dt <= 0:
        raise ParseError("--dt must be positive")
    state0 = _load_snapshot(args.input, limits) if args.input else descriptor.init(h.n, "dense", limits)
    if state0.n != h.n:
        raise ParseError(f"initial state has {state0.n} qubits, Hamiltonian {h.n}")
    run.inputs.update(hamiltonian=serial.encode_pauli_sum(h.terms, real=True), family=fdoc,
                      t=args.t, dt=args.dt)
    errs = run.timed("integrate", flow_errors, h, fam, args.t, args.dt, state0)
    run.results.update(
        error=errs["dt"], error_half_dt=errs["dt_half"], error_ratio=errs["ratio"],
        expectation_residue=errs["residue"],
        within_tolerance=bool(errs["dt"] <= args.tol),
    )


def cmd_ab(run, args):
    if (args.input is None) == (args.demo is None):
        raise ParseError("ab needs exactly one of --input or --demo")
    if args.demo is not None:
        if args.demo not in lattice.BUILTIN_DEMOS:
            raise ParseError(f"unknown demo {args.demo!r}; known: {sorted(lattice.BUILTIN_DEMOS)}")
        scenario = lattice.BUILTIN_DEMOS[args.demo]()
        run.inputs["demo"] = args.demo
    else:
        scenario = lattice.scenario_from_json(serial.load_json(args.input))
    run.inputs["lattice"] = lattice.lattice_to_json(scenario["field"])
    tol = args.tol if args.tol_given else lattice.GAUGE_FIX_TOL
    run.results.update(run.timed("ab", lattice.ab_report, scenario, tol))


COMMANDS = {
    "simulate": cmd_simulate,
    "gauge": cmd_gauge,
    "audit": cmd_audit,
    "gauged-flow": cmd_gauged_flow,
    "ab": cmd_ab,
}

_DEFAULT_TOL = {"simulate": 1e-10, "gauge": 1e-8, "audit": 1e-12, "gauged-flow": 1e-6, "ab": 1e-12}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="primary input file")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--tol", type=float, default=None, help="tolerance (command specific)")
    common.add_argument("--seed-override", type=int, default=None,
                        help="replace the seed in stochastic input files")
    common.add_argument("--dense-cap", type=int, default=None, help="max qubits for dense matrices")
    common.add_argument("--term-cap", type=int, default=None, help="max terms per Pauli sum")
    common.add_argument("--no-timings", action="store_true", help="omit timing fields from the report")

    parser = argparse.ArgumentParser(prog=PROG, description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="run a circuit on both backends")
    p.add_argument("--observables", help="JSON list of Pauli strings or Pauli sums")
    p.add_argument("--snapshot", help="write the final descriptor snapshot here")

    p = sub.add_parser("gauge", parents=[common], help="apply, compare or witness gauges")
    p.add_argument("--mode", choices=("apply", "compare", "witness"), required=True)
    p.add_argument("--gauge", help="gauge JSON (apply mode)")
    p.add_argument("--other", help="second snapshot (compare / witness)")
    p.add_argument("--snapshot", help="where apply mode writes the gauged snapshot")
    p.add_argument("--time", type=float, default=0.0, help="evaluate time-dependent gauges at t")

    sub.add_parser("audit", parents=[common], help="per-gate descriptor locality ledger")

    p = sub.add_parser("gauged-flow", parents=[common], help="integrate the gauged flow")
    p.add_argument("--hamiltonian", help="Hamiltonian JSON")
    p.add_argument("--family", help="gauge family JSON")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-3)

    p = sub.add_parser("ab", parents=[common], help="lattice Aharonov-Bohm report")
    p.add_argument("--demo", help=f"built-in scenario: {', '.join(sorted(lattice.BUILTIN_DEMOS))}")
    return parser


def main(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    args.tol_given = args.tol is not None
    if args.tol is None:
        args.tol = _DEFAULT_TOL[args.command]
    run = _Run(args.command, args)
    code = 0
    try:
        COMMANDS[args.command](run, args)
        status = {"state": "ok"}
    except (DHError, GaugeFixError) as exc:
        code = exc.exit_code
        status = {"state": "error", "code": code, "message": str(exc)}
        run.pending_writes.clear()
    except ValueError as exc:
        code = ParseError.exit_code
        status = {"state": "error", "code": code, "message": str(exc)}
        run.pending_writes.clear()
    if code == 0:
        for path, doc in run.pending_writes:
            serial.write_atomic(path, serial.dumps(doc))
    text = serial.dumps(run.report(status))
    if args.output:
        serial.write_atomic(args.output, text)
    else:
        stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
