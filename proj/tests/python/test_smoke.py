import json
import math
import pathlib

import pytest

kvsopt = pytest.importorskip("kvsopt")

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def test_stream_replays():
    a, b = kvsopt.RngStream(42, 0), kvsopt.RngStream(42, 0)
    assert [a.next_uniform() for _ in range(5)] == [b.next_uniform() for _ in range(5)]


def test_rastrigin_values():
    opts = kvsopt.ObjectiveOptions()
    opts.dim = 1
    obj = kvsopt.make_objective("stochastic_rastrigin", opts)
    assert obj.eval([1.0], [2.0, 0.5]) == pytest.approx(7.0)
    assert obj.expectation([0.0]) == 0.0
    batch = kvsopt.SampleBatch(2, [2.0, 0.5])
    assert kvsopt.eval_fhat_M(obj, [1.0], batch) == pytest.approx(7.0)


def test_short_run_is_finite_and_deterministic():
    opts = kvsopt.ObjectiveOptions()
    opts.dim = 3
    obj = kvsopt.make_objective("stochastic_rastrigin", opts)
    p = kvsopt.OptimizerParams()
    p.n_it = 200
    law = kvsopt.make_law("uniform")
    r1 = kvsopt.run_optimizer("lkbo_fvse", p, obj, law, kvsopt.RngStream(1, 0), record_trace=True)
    r2 = kvsopt.run_optimizer("lkbo_fvse", p, obj, law, kvsopt.RngStream(1, 0))
    assert r1.candidate == r2.candidate
    assert all(math.isfinite(v) for v in r1.candidate)
    assert len(r1.trace) == 201
    assert r1.eval_count == 201 * p.N * p.M


def test_benchmark_cell():
    spec = kvsopt.ExperimentSpec()
    spec.objective_options.dim = 2
    spec.params.n_it = 200
    spec.n_runs = 4
    res = kvsopt.run_benchmark(spec)
    assert res.n_runs == 4
    assert 0.0 <= res.success_rate <= 1.0
    assert res.format_cell().endswith(("NA",)) or "%" in res.format_cell()


def test_moment_system():
    ap = kvsopt.ApproxSystemParams()
    ap.lambda_, ap.sigma, ap.kappa, ap.x_tilde = 1.0, 0.5, 1.0, [0.0]
    dm, dv = kvsopt.approx_rhs(kvsopt.MomentState([1.0], 1.0), ap)
    assert dm == [-1.0] and dv == pytest.approx(-0.125)
    eig = kvsopt.jacobian_eigen(ap)
    assert (eig.eig_m, eig.eig_V, eig.stable) == (-1.0, -0.75, True)
    out = kvsopt.integrate_moments(ap, kvsopt.MomentState([1.0], 0.5), [0.0, 20.0])
    assert abs(out[-1].m[0]) < 1e-4 and abs(out[-1].V) < 1e-4


def test_diagnostics():
    mu, positive = kvsopt.convergence_mu(0.5, 0.1, 1.0, 1.2)
    assert mu == pytest.approx(0.376) and positive
    opts = kvsopt.ObjectiveOptions()
    with pytest.raises(kvsopt.BoundsUnavailable):
        kvsopt.estimate_c_alpha(kvsopt.make_objective("stochastic_rastrigin", opts), kvsopt.make_law("uniform"),
                                5, 1.0, 2000, kvsopt.RngStream(0, 0))


def test_config_errors_surface():
    with pytest.raises(kvsopt.ConfigError):
        kvsopt.make_law("cauchy")


def test_run_command(tmp_path):
    code, out, err = kvsopt.run_command("diagnose", str(CONFIGS / "toy_diagnose.cfg"), ["diagnose.n_mc=1000"],
                                        str(tmp_path))
    assert code == 0, err
    assert json.loads(out)["mu_positive"] is True
    code, _, err = kvsopt.run_command("optimize", "", ["objective.name=nope"])
    assert code == 2 and "nope" in err
