import io
import subprocess
import sys

import pytest

from rsmrepair.smtlib_solver import Session


def run_session(script: str) -> str:
    out = io.StringIO()
    session = Session(out)
    from rsmrepair.repair.sexpr import parse_all
    for form in parse_all(script):
        try:
            session.execute(form)
        except SystemExit:
            break
        except Exception as exc:
            out.write(f'(error "{exc}")\n')
    return out.getvalue()


def test_simple_minimum():
    out = run_session('''
(declare-const d Real)
(declare-const t Real)
(assert (>= t d))
(assert (>= t (- d)))
(assert (<= (- 3.0 d) 0.0))
(minimize t)
(check-sat)
(get-objectives)
(get-model)
''')
    assert "sat" in out
    assert "(obj_0 3.0)" in out
    assert "(define-fun d () Real 3.0)" in out


def test_unsat():
    out = run_session('''
(declare-const x Real)
(assert (<= x 1.0))
(assert (<= (- 2.0 x) 0.0))
(check-sat)
(get-model)
''')
    assert out.splitlines()[0] == "unsat"
    assert "error" in out


def test_disjunction_branching():
    out = run_session('''
(declare-const w Real)
(declare-const d Real)
(declare-const t Real)
(assert (or (= w 0.0) (= w 5.0)))
(assert (or (= w 5.0) (and (= w 0.0) (<= (- 100.0 d) 0.0))))
(assert (>= t d))
(assert (>= t (- d)))
(minimize (+ w t))
(check-sat)
(get-objectives)
''')
    # paying the penalty (5) beats moving d to 100
    assert "(obj_0 5.0)" in out


def test_lexicographic_two_objectives():
    out = run_session('''
(declare-const a Real)
(declare-const b Real)
(assert (>= a 1.0))
(assert (>= b (- 4.0 a)))
(minimize a)
(minimize b)
(check-sat)
(get-objectives)
''')
    assert "(obj_0 1.0)" in out
    second = out.split("(obj_1 ")[1].split(")")[0]
    assert float(second) == pytest.approx(3.0, abs=1e-6)


def test_strict_rejected():
    out = run_session('''
(declare-const x Real)
(assert (< x 1.0))
''')
    assert "strict" in out


def test_unknown_symbol():
    out = run_session("(assert (<= y 1.0))")
    assert "unknown symbol" in out


def test_reset_clears_state():
    out = run_session('''
(declare-const x Real)
(assert (<= (- 5.0 x) 0.0))
(reset)
(declare-const x Real)
(assert (<= x 1.0))
(minimize x)
(check-sat)
(get-objectives)
''')
    # unbounded below: the old >=5 constraint must be gone
    assert "unbounded" in out


def test_subprocess_protocol_roundtrip():
    script = (
        "(declare-const d Real)\n"
        "(assert (= d 2.5))\n"
        "(check-sat)\n"
        "(get-model)\n"
        '(echo "MARK")\n'
        "(reset)\n"
        "(declare-const d Real)\n"
        "(assert (= d 7.0))\n"
        "(check-sat)\n"
        "(get-model)\n"
        "(exit)\n"
    )
    proc = subprocess.run([sys.executable, "-m", "rsmrepair.smtlib_solver"],
                          input=script, capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert "MARK" in proc.stdout
    assert "(define-fun d () Real 2.5)" in proc.stdout
    assert "(define-fun d () Real 7.0)" in proc.stdout
