"""End-to-end scenario pipelines: build space, quantize the generator,
evolve, run the classical twin, and write CSV/text outputs."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..classical import GridSymbol, PhaseGrid, evolve_classical
from ..densecore import expm
from ..dynquant import (
    QP, QP_FACTOR_ORDER, DynOperator, damped_oscillator_dynop, quantize_qp, quantize_symmetric,
)
from ..fockspace import FockSpace, Operator, build_space, coherent_state, fock_state, weyl_symbol
from ..superspace import SuperOperator
from .algebra import check_algebra
from .config import ScenarioConfig
from .engine import EvolutionResult, TIMESERIES_COLUMNS, evolve_heisenberg, evolve_quantum
from .fokker_planck import FPCoefficients, trace_preservation_scan

__all__ = ["ScenarioOutput", "run_scenario", "damped_oscillator_ode", "initial_state",
           "write_generator_dump", "read_generator_dump"]


@dataclass
class ScenarioOutput:
    """In-memory results of a run plus the paths written."""

    config: ScenarioConfig
    files: dict = field(default_factory=dict)
    result: EvolutionResult | None = None
    summary: dict = field(default_factory=dict)
    report: str = ""


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def initial_state(space: FockSpace, cfg: ScenarioConfig) -> Operator:
    st = cfg.initial_state
    if st.kind == "coherent":
        return coherent_state(space, st.alpha_complex)
    return fock_state(space, st.k)


def damped_oscillator_ode(m: float, omega: float, gamma: float, x0, times) -> np.ndarray:
    """Exact (q, p) of dq/dt = p/m, dp/dt = -m omega^2 q - (gamma/m) p."""
    a = np.array([[0.0, 1.0 / m], [-m * omega**2, -gamma / m]])
    return np.array([expm(a * t).real @ np.asarray(x0, dtype=float) for t in times])


def write_generator_dump(path, s: SuperOperator) -> None:
    sp = s.space
    np.savez(path, mat=s.mat, dim=sp.dim, hbar=sp.hbar, mass=sp.mass, omega=sp.omega)


def read_generator_dump(path) -> SuperOperator:
    with np.load(path) as data:
        sp = build_space(int(data["dim"]), float(data["hbar"]), float(data["mass"]), float(data["omega"]))
        mat = np.array(data["mat"], dtype=np.complex128)
    if mat.shape != (sp.dim**2, sp.dim**2):
        raise ValueError(f"generator dump has shape {mat.shape}, expected {(sp.dim**2,) * 2}")
    return SuperOperator(sp, mat)


def _energy_operator(space: FockSpace) -> Operator:
    q, p = space.qmat, space.pmat
    return space.operator(0.5 * (p @ p) / space.mass + 0.5 * space.mass * space.omega**2 * (q @ q))


def _observables(space: FockSpace) -> dict:
    q, p = space.qmat, space.pmat
    return {
        "I": space.identity,
        "q": space.qop,
        "p": space.pop,
        "qq": space.operator(q @ q),
        "pp": space.operator(p @ p),
        "qp": space.operator(0.5 * (q @ p + p @ q)),
        "H": _energy_operator(space),
    }


def _heisenberg_to_result(h, method, substeps) -> EvolutionResult:
    ex = {k: np.real(v) for k, v in h.expectations.items()}
    return EvolutionResult(h.times, ex["I"], h.herm_defect, ex["q"], ex["p"], ex["qq"], ex["pp"], ex["qp"],
                           ex["H"], h.purity, method=method, substeps=substeps, snapshots=h.states)


def _write_wigner(out: ScenarioOutput, cfg: ScenarioConfig, space: FockSpace, snapshots, times, outdir: Path):
    w = cfg.wigner
    grid = PhaseGrid(w.q_min, w.q_max, w.p_min, w.p_max, w.nq, w.np)
    qq, pp = grid.mesh()
    for k in range(0, len(snapshots), w.every):
        sym = weyl_symbol(snapshots[k], grid, window=False)
        # Wigner function integrates to Tr(rho)
        vals = sym.values.real / (2 * math.pi * space.hbar)
        path = outdir / f"wigner_{k}.csv"
        _write_rows(path, ("q", "p", "value"), zip(qq.ravel(), pp.ravel(), vals.ravel()))
        out.files[f"wigner_{k}"] = path
    out.summary["wigner_times"] = " ".join(_fmt(times[k]) for k in range(0, len(snapshots), w.every))


def _space(cfg: ScenarioConfig) -> FockSpace:
    return build_space(cfg.N, cfg.hbar, cfg.mass, cfg.omega)


def _run_damped(cfg: ScenarioConfig, out: ScenarioOutput, outdir: Path):
    space = _space(cfg)
    gen = quantize_qp(space, damped_oscillator_dynop(cfg.mass, cfg.omega, cfg.gamma))
    rho0 = initial_state(space, cfg)
    keep = cfg.wigner is not None
    h = evolve_heisenberg(gen, _observables(space), rho0, cfg.dt, cfg.steps, cfg.method,
                          stride=cfg.snapshot_stride, track_state=True, keep_snapshots=keep)
    res = _heisenberg_to_result(h, h.method, h.substeps)
    out.result = res
    x0 = (res.mean_q[0], res.mean_p[0])
    ode = damped_oscillator_ode(cfg.mass, cfg.omega, cfg.gamma, x0, res.times)
    quantum = np.column_stack([res.mean_q, res.mean_p])
    scale = float(np.abs(ode).max())
    rel = float(np.abs(quantum - ode).max() / scale) if scale > 0 else float(np.abs(quantum - ode).max())
    path = outdir / "classical.csv"
    _write_rows(path, ("t", "mean_q", "mean_p"), zip(res.times, ode[:, 0], ode[:, 1]))
    out.files["classical"] = path
    out.summary.update(picture="heisenberg", ode_max_rel_err_means=rel)
    if keep:
        _write_wigner(out, cfg, space, res.snapshots, res.times, outdir)
    return gen


def _fp_h(cfg: ScenarioConfig, coeffs: FPCoefficients, space: FockSpace, out: ScenarioOutput) -> float:
    scan = trace_preservation_scan(space, coeffs)
    report = "\n".join(scan.report_lines()) + "\n"
    h = cfg.fp.h
    value = scan.h_star if h == "h_star" else coeffs.quoted_h if h == "quoted" else float(h)
    out.report += report + f"h_used {_fmt(value)}\n"
    out.summary.update(h_star=scan.h_star, h_used=value, h_discrepancy="YES" if scan.discrepancy else "NO")
    return value


def _run_fp(cfg: ScenarioConfig, out: ScenarioOutput, outdir: Path):
    space = _space(cfg)
    f = cfg.fp
    coeffs = FPCoefficients(f.c_qq, f.c_qp, f.c_pq, f.c_pp, f.d_qq, f.d_qp, f.d_pp)
    h = _fp_h(cfg, coeffs, space, out)
    path = outdir / "fp_report.txt"
    path.write_text(out.report)
    out.files["fp_report"] = path
    gen = quantize_qp(space, coeffs.dynop(h))
    rho0 = initial_state(space, cfg)
    keep = cfg.wigner is not None
    res = evolve_quantum(gen, rho0, cfg.dt, cfg.steps, cfg.method, stride=cfg.snapshot_stride,
                         hamiltonian=_energy_operator(space), keep_snapshots=keep)
    out.result = res
    out.summary.update(picture="schrodinger", max_trace_dev=float(np.abs(res.trace_re - 1).max()),
                       max_herm_defect=float(res.herm_defect.max()))
    if cfg.grid is not None:
        _classical_twin(cfg, out, outdir, coeffs.dynop(h), res, space)
    if keep:
        _write_wigner(out, cfg, space, res.snapshots, res.times, outdir)
    return gen


def _classical_twin(cfg, out, outdir, dynop, res, space):
    g = cfg.grid
    grid = PhaseGrid(g.q_min, g.q_max, g.p_min, g.p_max, g.nq, g.np)
    mean = (float(res.mean_q[0] / res.trace_re[0]), float(res.mean_p[0] / res.trace_re[0]))
    cov = np.array([[res.var_qq[0], res.cov_qp[0]], [res.cov_qp[0], res.var_pp[0]]])
    f0 = GridSymbol.gaussian(grid, mean, cov)
    stride = int(round(cfg.dt * cfg.snapshot_stride / g.dt))
    total = int(round(cfg.dt * cfg.steps / g.dt))
    cl = evolve_classical(dynop, f0, g.dt, total, stride=stride)
    names = ("mass", "mean_q", "mean_p", "cov_qq", "cov_qp", "cov_pp")
    cols = [cl.times] + [cl.column(n) for n in names]
    path = outdir / "classical.csv"
    _write_rows(path, ("t",) + names, zip(*cols))
    out.files["classical"] = path
    if len(cl.times) == len(res.times) and np.allclose(cl.times, res.times):
        tr = res.trace_re
        dm = max(np.abs(res.mean_q / tr - cl.column("mean_q")).max(),
                 np.abs(res.mean_p / tr - cl.column("mean_p")).max())
        dc = max(np.abs(res.var_qq - cl.column("cov_qq")).max(),
                 np.abs(res.var_pp - cl.column("cov_pp")).max(),
                 np.abs(res.cov_qp - cl.column("cov_qp")).max())
        out.summary.update(twin_max_mean_diff=float(dm), twin_max_cov_diff=float(dc))


def _run_custom(cfg: ScenarioConfig, out: ScenarioOutput, outdir: Path):
    space = _space(cfg)
    c = cfg.custom
    L = DynOperator([tuple(t) for t in c.terms], c.form)
    gen = quantize_qp(space, L) if c.form == QP else quantize_symmetric(space, L)
    rho0 = initial_state(space, cfg)
    keep = cfg.wigner is not None
    if c.picture == "heisenberg":
        h = evolve_heisenberg(gen, _observables(space), rho0, cfg.dt, cfg.steps, cfg.method,
                              stride=cfg.snapshot_stride, track_state=True, keep_snapshots=keep)
        res = _heisenberg_to_result(h, h.method, h.substeps)
    else:
        res = evolve_quantum(gen, rho0, cfg.dt, cfg.steps, cfg.method, stride=cfg.snapshot_stride,
                             hamiltonian=_energy_operator(space), keep_snapshots=keep)
    out.result = res
    out.summary.update(picture=c.picture)
    if keep:
        _write_wigner(out, cfg, space, res.snapshots, res.times, outdir)
    return gen


def _write_manifest(out: ScenarioOutput, outdir: Path) -> None:
    cfg = out.config
    lines = [
        f"library dynaquant {__version__}",
        f"scenario {cfg.scenario}",
        f"seed {cfg.seed}",
        f"qp_factor_order {QP_FACTOR_ORDER}",
    ]
    if out.result is not None:
        lines.append(f"method {out.result.method} substeps {out.result.substeps}")
    for k in sorted(out.summary):
        v = out.summary[k]
        lines.append(f"{k} {_fmt(v) if isinstance(v, float) else v}")
    lines.append("files " + " ".join(sorted(p.name for p in out.files.values())))
    lines.append("config")
    lines.append(cfg.echo())
    path = outdir / "manifest.txt"
    path.write_text("\n".join(lines) + "\n")
    out.files["manifest"] = path


def run_scenario(cfg: ScenarioConfig, outdir=None) -> ScenarioOutput:
    """Run a validated configuration and write its files into ``outdir``
    (default: ``cfg.output.dir``)."""
    outdir = Path(cfg.output.dir if outdir is None else outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    out = ScenarioOutput(cfg)
    if cfg.scenario == "algebra-check":
        rep = check_algebra(cfg.N, cfg.profile, cfg.seed)
        out.report = rep.text()
        path = outdir / "algebra_report.txt"
        path.write_text(out.report)
        out.files["algebra_report"] = path
        out.summary.update(all_passed="YES" if rep.all_passed else "NO")
        _write_manifest(out, outdir)
        return out
    runner = {"damped-oscillator": _run_damped, "fokker-planck": _run_fp, "custom": _run_custom}[cfg.scenario]
    gen = runner(cfg, out, outdir)
    path = outdir / "timeseries.csv"
    out.result.to_csv(path)
    out.files["timeseries"] = path
    if cfg.output.dump_generator:
        gpath = outdir / "generator.npz"
        write_generator_dump(gpath, gen)
        out.files["generator"] = gpath
    _write_manifest(out, outdir)
    return out
