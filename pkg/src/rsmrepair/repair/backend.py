"""Solver backends: the in-process oracle and SMT-LIB2 child processes.

A pipe backend keeps one child solver alive, sends each encoded script
framed by a reset and an echo marker, and parses the standard
``(objectives ...)`` / ``get-model`` response forms. Nonlinear-capable
solvers are declared with a capability flag, which parameter
classification consumes.
"""
from __future__ import annotations

import queue
import shlex
import subprocess
import sys
import threading
import time

from .encode import encode
from .formula import RepairFormula
from .oracle import solve_oracle
from .sexpr import SexprError, atom_to_float, parse_all
from .solution import RepairSolution

_MARKER = "::rsmrepair-done::"


class BackendError(Exception):
    pass


class OracleBackend:
    id = "oracle"
    supports_nonlinear = False

    def solve(self, formula: RepairFormula, mode: str | None = None):
        return solve_oracle(formula, mode=mode)

    def close(self) -> None:
        pass


class PipeBackend:
    """A child solver process speaking SMT-LIB2 over standard streams."""

    def __init__(self, cmd: list[str], id: str | None = None,
                 nonlinear: bool = False, timeout: float = 120.0):
        self.cmd = cmd
        self.id = id or f"cmd:{' '.join(cmd)}"
        self.supports_nonlinear = nonlinear
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None

    def _process(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    self.cmd, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                    stderr=subprocess.PIPE, text=True)
            except OSError as exc:
                raise BackendError(f"cannot start solver {self.cmd!r}: {exc}") from None
            self._lines: queue.Queue[str | None] = queue.Queue()

            def pump(stream, sink):
                for line in stream:
                    sink.put(line)
                sink.put(None)

            threading.Thread(target=pump, args=(self._proc.stdout, self._lines),
                             daemon=True).start()
        return self._proc

    def _exchange(self, script: str) -> str:
        proc = self._process()
        try:
            proc.stdin.write("(reset)\n" + script + f'(echo "{_MARKER}")\n')
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise BackendError(f"solver pipe failed: {exc}; "
                               f"stderr: {self._drain_stderr()}") from None
        lines: list[str] = []
        deadline = time.monotonic() + self.timeout
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self.close()
                raise BackendError(
                    f"solver timed out after {self.timeout}s; partial output: "
                    + "".join(lines[-20:]))
            try:
                line = self._lines.get(timeout=remaining)
            except queue.Empty:
                continue
            if line is None:
                raise BackendError(
                    "solver exited unexpectedly; stderr: " + self._drain_stderr())
            if line.strip() == _MARKER:
                return "".join(lines)
            lines.append(line)

    def _drain_stderr(self) -> str:
        if self._proc is None or self._proc.stderr is None:
            return ""
        self._proc.poll()
        try:
            import os
            os.set_blocking(self._proc.stderr.fileno(), False)
            return self._proc.stderr.read() or ""
        except Exception:
            return ""

    def solve(self, formula: RepairFormula, mode: str | None = None):
        start = time.perf_counter()
        script = encode(formula, mode)
        raw = self._exchange(script)
        status, objectives, model = _parse_response(raw)
        if status == "unsat":
            return None
        if status != "sat":
            raise BackendError(f"solver returned {status!r}: {raw.strip()}")
        adjustments = {}
        for name in formula.deltas:
            var = f"d_{name}"
            if var not in model:
                raise BackendError(f"model is missing {var}: {raw.strip()}")
            adjustments[name] = model[var]
        penalties = {}
        satisfied = set()
        for cl in formula.clauses:
            var = f"w_{cl.index}"
            if var not in model:
                raise BackendError(f"model is missing {var}: {raw.strip()}")
            if abs(model[var]) < cl.weight / 2:
                penalties[cl.index] = 0.0
                satisfied.add(cl.index)
            else:
                penalties[cl.index] = cl.weight
        objective = sum(penalties.values()) + formula.adjustment_cost(adjustments)
        return RepairSolution(
            adjustments=adjustments,
            penalties=penalties,
            satisfied=frozenset(satisfied),
            objective=objective,
            backend_id=self.id,
            wall_time=time.perf_counter() - start,
            diagnostics=tuple(cl.diagnostic for cl in formula.clauses if cl.diagnostic),
        )

    def close(self) -> None:
        if self._proc is not None:
            try:
                self._proc.stdin.write("(exit)\n")
                self._proc.stdin.flush()
            except Exception:
                pass
            try:
                self._proc.wait(timeout=2)
            except Exception:
                self._proc.kill()
            self._proc = None


def _parse_response(raw: str):
    try:
        forms = parse_all(raw)
    except SexprError as exc:
        raise BackendError(f"cannot parse solver response: {exc}: {raw.strip()}")
    status = None
    objectives: list[float] = []
    model: dict[str, float] = {}
    errors: list[str] = []

    def walk(node):
        if not isinstance(node, list) or not node:
            return
        head = node[0]
        if head == "error":
            errors.append(" ".join(str(x) for x in node[1:]))
        elif head == "objectives":
            for entry in node[1:]:
                if isinstance(entry, list) and entry:
                    try:
                        objectives.append(atom_to_float(entry[-1]))
                    except (SexprError, ValueError, ZeroDivisionError):
                        pass
        elif head == "define-fun" and len(node) >= 5:
            try:
                model[node[1]] = atom_to_float(node[4])
            except (SexprError, ValueError, ZeroDivisionError):
                pass
        else:
            for child in node:
                walk(child)

    for form in forms:
        if isinstance(form, str):
            if form in ("sat", "unsat", "unknown") and status is None:
                status = form
        else:
            walk(form)
    if status is None:
        raise BackendError("solver produced no status: "
                           + (";".join(errors) or raw.strip()))
    if status == "sat" and errors:
        raise BackendError("solver reported errors: " + ";".join(errors))
    return status, objectives, model


def get_backend(spec) -> OracleBackend | PipeBackend:
    """Resolve a backend id: ``oracle``, ``builtin``, ``z3``,
    ``cmd:<command>``, or ``cmdnl:<command>`` (nonlinear-capable)."""
    if hasattr(spec, "solve"):
        return spec
    if spec == "oracle":
        return OracleBackend()
    if spec == "builtin":
        return PipeBackend([sys.executable, "-m", "rsmrepair.smtlib_solver"],
                           id="builtin")
    if spec == "z3":
        return PipeBackend(["z3", "-in"], id="z3")
    if spec.startswith("cmd:"):
        return PipeBackend(shlex.split(spec[4:]))
    if spec.startswith("cmdnl:"):
        return PipeBackend(shlex.split(spec[6:]), nonlinear=True)
    raise BackendError(f"unknown backend {spec!r}")
