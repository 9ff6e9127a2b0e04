import json

import numpy as np
import pytest

from dynaquant import build_space
from dynaquant.dynquant import hamiltonian_generator, quantize_qp
from dynaquant.fockspace import Operator, PolynomialSymbol, coherent_state, interior_dim, weyl_quantize_poly
from dynaquant.simcli import cli
from dynaquant.simcli.algebra import check_algebra
from dynaquant.simcli.config import ConfigError, parse_config
from dynaquant.simcli.engine import (
    EXPM, RK4, Propagator, StepSizeError, evolve_heisenberg, evolve_quantum,
)
from dynaquant.simcli.fokker_planck import FPCoefficients, build_fp_master_direct, trace_preservation_scan
from dynaquant.simcli.scenarios import (
    damped_oscillator_ode, read_generator_dump, run_scenario, write_generator_dump,
)
from dynaquant.superspace import SuperOperator, dual, restrict, zero_super


# --- engine -------------------------------------------------------------------

class TestEngine:
    def test_zero_generator_keeps_state(self):
        sp = build_space(10)
        rho = coherent_state(sp, 0.7)
        for method in (EXPM, RK4):
            res = evolve_quantum(zero_super(sp), rho, 0.1, 20, method, stride=5)
            assert np.abs(res.mean_q - res.mean_q[0]).max() < 1e-15
            assert np.abs(res.trace_re - 1).max() < 1e-13

    def test_unitary_run_conserves(self):
        sp = build_space(40)
        H = PolynomialSymbol.harmonic(1.0, 1.0)
        gen = -1 * hamiltonian_generator(sp, H)
        rho = coherent_state(sp, 1.2)
        res = evolve_quantum(gen, rho, 0.01, 500, EXPM, stride=50, hamiltonian=weyl_quantize_poly(sp, H))
        assert np.abs(res.trace_re - res.trace_re[0]).max() < 1e-9
        assert np.abs(res.purity - res.purity[0]).max() < 1e-9
        assert np.abs(res.energy - res.energy[0]).max() < 1e-9
        # coherent state follows the classical circle
        assert abs(res.mean_q[-1] - np.sqrt(2) * 1.2 * np.cos(5.0)) < 1e-6

    def test_rk4_guard(self):
        sp = build_space(12)
        gen = -1 * hamiltonian_generator(sp, PolynomialSymbol.harmonic(1.0, 1.0))
        prop = Propagator(gen, 0.5, RK4)
        assert prop.substeps > 1
        with pytest.raises(StepSizeError):
            Propagator(gen, 0.5, RK4, substeps=1)
        with pytest.raises(ValueError):
            Propagator(gen, 0.5, "EULER")
        with pytest.raises(ValueError):
            Propagator(gen, 0.0)

    def test_methods_agree(self):
        sp = build_space(14)
        gen = quantize_qp(sp, FPCoefficients().dynop(-0.1))
        rho = coherent_state(sp, 0.6)
        a = evolve_quantum(gen, rho, 0.05, 40, EXPM, stride=10)
        b = evolve_quantum(gen, rho, 0.05, 40, RK4, stride=10)
        assert np.abs(a.mean_q - b.mean_q).max() < 1e-9
        assert np.abs(a.var_pp - b.var_pp).max() < 1e-9

    def test_dual_pairing(self, rng):
        sp = build_space(8)
        s = SuperOperator(sp, rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64)))
        rho, a = (rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)) for _ in range(2))
        vec = lambda x: x.reshape(-1, order="F")
        unvec = lambda v: v.reshape(8, 8, order="F")
        lhs = np.trace(unvec(dual(s).mat @ vec(rho)) @ a)
        rhs = np.trace(rho @ unvec(s.mat @ vec(a)))
        assert abs(lhs - rhs) < 1e-10 * max(1, abs(lhs))

    @pytest.mark.parametrize("method", [EXPM, RK4])
    def test_heisenberg_matches_schrodinger(self, method):
        sp = build_space(12)
        gen = quantize_qp(sp, FPCoefficients().dynop(-0.1))
        rho = coherent_state(sp, 0.5)
        q = Operator(sp, sp.qmat)
        h = evolve_heisenberg(gen, {"q": q}, rho, 0.05, 30, method, stride=10, track_state=True)
        s = evolve_quantum(dual(gen), rho, 0.05, 30, method, stride=10)
        assert np.abs(h["q"].real - s.mean_q).max() < 1e-10
        assert np.abs(h.purity - s.purity).max() < 1e-10


# --- Fokker-Planck --------------------------------------------------------------

class TestFokkerPlanck:
    def test_parameter_map(self):
        c = FPCoefficients(c_qq=-0.1, c_qp=2.0, c_pq=-0.5, c_pp=0.3)
        assert c.mass == 2.0 and c.omega2 == 1.0
        assert c.lam == pytest.approx(0.1) and c.mu == pytest.approx(0.2)
        assert FPCoefficients().mass == 1.0

    def test_zero_cpq_rejected(self):
        with pytest.raises(ValueError):
            FPCoefficients(c_pq=0.0).mass

    def test_pure_hamiltonian_case(self):
        sp = build_space(16)
        c = FPCoefficients(0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0)
        direct = build_fp_master_direct(sp, c)
        ham = -1 * hamiltonian_generator(sp, PolynomialSymbol.harmonic(1.0, 1.0))
        m = interior_dim(16)
        assert np.abs(restrict(direct, m, "input") - restrict(ham, m, "input")).max() < 1e-12
        scan = trace_preservation_scan(sp, c)
        assert abs(scan.h_star) < 1e-12 and not scan.discrepancy

    def test_pure_diffusion_needs_no_shift(self):
        c = FPCoefficients(0.0, 1.0, -1.0, 0.0, 0.3, 0.1, 0.2)
        assert abs(trace_preservation_scan(build_space(16), c).h_star) < 1e-12

    @pytest.mark.parametrize("sigma", [-0.2, 0.05, 0.4])
    def test_equal_damping(self, sigma):
        c = FPCoefficients(sigma, 1.0, -1.0, sigma, 0.02, 0.0, 0.02)
        scan = trace_preservation_scan(build_space(16), c)
        assert scan.h_star == pytest.approx(2 * sigma, abs=1e-12)
        assert scan.residual < 1e-10
        assert scan.discrepancy

    def test_default_scan_report(self):
        scan = trace_preservation_scan(build_space(20), FPCoefficients())
        assert scan.h_star == pytest.approx(-0.1, abs=1e-12)
        lines = scan.report_lines()
        assert lines[0].startswith("h_star") and lines[-1] == "discrepancy YES"


# --- config -------------------------------------------------------------------

BASE = {"scenario": "damped-oscillator", "N": 12, "dt": 0.05, "steps": 20, "snapshot_stride": 5,
        "initial_state": {"kind": "coherent", "alpha": 0.8}}


def cfg_with(**over):
    d = json.loads(json.dumps(BASE))
    for key, value in over.items():
        d[key] = value
    return d


class TestConfig:
    def test_defaults_fill(self):
        cfg = parse_config(cfg_with())
        assert cfg.method == "EXPM" and cfg.gamma >= 0 and cfg.fp.c_pq == -1.0

    @pytest.mark.parametrize("over, path", [
        ({"bogus": 1}, "bogus"),
        ({"N": 4}, "N"),
        ({"N": 12.5}, "N"),
        ({"dt": -1}, "dt"),
        ({"method": "EULER"}, "method"),
        ({"scenario": "nope"}, "scenario"),
        ({"fp": {"c_pq": 0}, "scenario": "fokker-planck"}, "fp.c_pq"),
        ({"fp": {"h": "sometimes"}, "scenario": "fokker-planck"}, "fp.h"),
        ({"fp": {"extra": 1}}, "fp.extra"),
        ({"initial_state": {"kind": "coherent", "alpha": 5.0}}, "initial_state.alpha"),
        ({"initial_state": {"kind": "fock", "k": 40}}, "initial_state.k"),
        ({"initial_state": {"kind": "thermal"}}, "initial_state.kind"),
        ({"grid": {"dt": 0.03}}, "grid.dt"),
        ({"grid": {"nq": 5}}, "grid.nq"),
    ])
    def test_errors_name_field(self, over, path):
        with pytest.raises(ConfigError) as err:
            parse_config(cfg_with(**over))
        assert err.value.path == path

    def test_custom_terms_checked(self):
        bad = cfg_with(scenario="custom", custom={"terms": [[1.0, 0, 1, -1, 0]]})
        with pytest.raises(ConfigError) as err:
            parse_config(bad)
        assert err.value.path.startswith("custom.terms[0]")

    def test_echo_roundtrip(self):
        cfg = parse_config(cfg_with())
        assert parse_config(json.loads(cfg.echo())).to_dict() == cfg.to_dict()


# --- scenarios and CLI ------------------------------------------------------------

class TestScenarios:
    def test_ode_solution(self):
        t = np.linspace(0, 2, 5)
        x = damped_oscillator_ode(1.0, 1.0, 0.0, (1.0, 0.0), t)
        np.testing.assert_allclose(x[:, 0], np.cos(t), atol=1e-12)

    def test_damped_run_files(self, tmp_path):
        cfg = parse_config(cfg_with(output={"dir": str(tmp_path), "dump_generator": True}))
        out = run_scenario(cfg)
        assert {"timeseries", "classical", "manifest", "generator"} <= set(out.files)
        head = (tmp_path / "timeseries.csv").read_text().splitlines()[0]
        assert head.startswith("t,trace_re")
        # N = 12 truncation limits agreement
        assert out.summary["ode_max_rel_err_means"] < 1e-6
        manifest = (tmp_path / "manifest.txt").read_text()
        assert "qp_factor_order" in manifest and '"scenario": "damped-oscillator"' in manifest

    def test_deterministic(self, tmp_path):
        cfg = parse_config(cfg_with(gamma=0.2))
        run_scenario(cfg, tmp_path / "a")
        run_scenario(cfg, tmp_path / "b")
        for name in ("timeseries.csv", "classical.csv", "manifest.txt"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_fp_run_with_twin_and_wigner(self, tmp_path):
        cfg = parse_config({
            "scenario": "fokker-planck", "N": 24, "dt": 0.02, "steps": 20, "snapshot_stride": 10,
            "initial_state": {"kind": "coherent", "alpha": 0.5},
            "grid": {"q_min": -5, "q_max": 5, "p_min": -5, "p_max": 5, "nq": 61, "np": 61, "dt": 0.01},
            "wigner": {"every": 2, "nq": 11, "np": 11},
            "output": {"dir": str(tmp_path)},
        })
        out = run_scenario(cfg)
        assert out.summary["h_star"] == pytest.approx(-0.1, abs=1e-12)
        assert out.summary["max_trace_dev"] < 1e-10
        assert out.summary["twin_max_mean_diff"] < 1e-3
        assert "h_used" in (tmp_path / "fp_report.txt").read_text()
        wig = sorted(p.name for p in tmp_path.glob("wigner_*.csv"))
        assert len(wig) == 2
        rows = (tmp_path / wig[0]).read_text().splitlines()
        assert rows[0] == "q,p,value" and len(rows) == 1 + 121

    def test_custom_schrodinger(self, tmp_path):
        cfg = parse_config(cfg_with(scenario="custom", method="RK4",
                                    custom={"terms": [[-1.0, 0, 1, 1, 0], [1.0, 1, 0, 0, 1]],
                                            "form": "SYMMETRIC", "picture": "schrodinger"},
                                    output={"dir": str(tmp_path)}))
        out = run_scenario(cfg)
        assert np.abs(out.result.trace_re - 1).max() < 1e-8

    def test_generator_dump_roundtrip(self, tmp_path):
        sp = build_space(9, hbar=0.5, mass=2.0, omega=1.5)
        gen = quantize_qp(sp, FPCoefficients().dynop(0.0))
        write_generator_dump(tmp_path / "g.npz", gen)
        back = read_generator_dump(tmp_path / "g.npz")
        assert back.space.dim == 9 and back.space.hbar == 0.5
        np.testing.assert_array_equal(back.mat, gen.mat)


class TestCli:
    def test_run_and_dequantize(self, tmp_path, capsys):
        cfg = cfg_with(output={"dir": str(tmp_path / "run"), "dump_generator": True}, gamma=0.3)
        path = tmp_path / "c.json"
        path.write_text(json.dumps(cfg))
        assert cli.main(["run", str(path)]) == 0
        assert cli.main(["dequantize", str(tmp_path / "run" / "generator.npz"), "--degree", "2",
                         "--out", str(tmp_path / "deq")]) == 0
        text = (tmp_path / "deq" / "dequantized.txt").read_text()
        rows = [l.split() for l in text.splitlines() if not l.startswith("#")]
        got = {tuple(int(x) for x in r[2:]): complex(float(r[0]), float(r[1])) for r in rows}
        assert set(got) == {(0, 1, 1, 0), (1, 0, 0, 1), (0, 1, 0, 1)}
        assert abs(got[(0, 1, 0, 1)] + 0.3) < 1e-9 and abs(got[(1, 0, 0, 1)] + 1.0) < 1e-9

    def test_seed_override_and_errors(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(cfg_with(N=2)))
        assert cli.main(["run", str(path)]) == 2
        assert "N: must be at least 8" in capsys.readouterr().err
        path.write_text("{not json")
        assert cli.main(["run", str(path)]) == 2
        assert cli.main(["run", str(tmp_path / "missing.json")]) == 2

    def test_check_algebra_exit_codes(self, tmp_path, capsys):
        assert cli.main(["check-algebra", "--n", "24", "--out", str(tmp_path)]) == 0
        assert "PASS" in (tmp_path / "algebra_report.txt").read_text()
        assert cli.main(["check-algebra", "--n", "8", "--profile", "strict"]) == 1


@pytest.fixture(scope="module")
def report32():
    return check_algebra(32)


class TestAlgebraReport:
    def test_all_pass_default(self, report32):
        assert report32.all_passed, report32.text()
        kinds = {l.kind for l in report32.lines}
        assert kinds == {"exact", "interior"}

    def test_strict_small_fails_only_interior(self):
        rep = check_algebra(8, "strict")
        for line in rep.lines:
            if line.kind == "exact":
                assert line.passed, line.format()
        assert any(not l.passed for l in rep.lines if l.kind == "interior")

    def test_seed_determinism(self):
        assert check_algebra(10, seed=3).text() == check_algebra(10, seed=3).text()
        assert check_algebra(10, seed=3).text() != check_algebra(10, seed=4).text()

    def test_bad_args(self):
        with pytest.raises(ValueError):
            check_algebra(4)
        with pytest.raises(ValueError):
            check_algebra(16, "lenient")
