"""Task runners behind the command line.

Each runner takes the resolved parameter block, the master seed and a thread
count, and returns a :class:`TaskOutput`. Work is split into independent
units that each draw from their own ``inference.stream(seed, ...)``, and
results are gathered in submission order, so outputs do not depend on the
number of threads.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import distributions as dists
from . import featmat as fm
from . import inference as inf
from . import plotting, protocols, qsim, xxz
from .config import resolve_shots


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)


@dataclass
class TaskOutput:
    results: Table
    summary: dict
    tables: dict[str, Table] = field(default_factory=dict)
    figures: dict[str, Callable] = field(default_factory=dict)


def _map(fn, items, threads: int) -> list:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _sweep_rows(prefix: list, sweep: inf.SweepResult) -> list[list]:
    return [prefix + [int(s), float(m), float(e), int(sweep.trials)]
            for s, m, e in zip(sweep.shots, sweep.metric, sweep.stderr)]


def _ratio(a: float, b: float) -> float:
    return float(a / b) if np.isfinite(a) and np.isfinite(b) and b > 0 else float("nan")


def _accuracy_figure(curves: dict, title: str, target: float):
    def draw(path):
        return plotting.line_chart(path, curves, "shots", "classification accuracy", title, logx=True, hline=target)
    return draw


# bell-gaussian

def bell_gaussian_tables(sigma: float, sigma_corr2: float, c: float) -> dict[str, np.ndarray]:
    """Per-class outcome tables of the Bell and product protocols, offsets (0, pi/2)."""
    a, b = dists.gaussian_class_pair(sigma, sigma_corr2, c)
    nu = (0.0, np.pi / 2)
    out = {}
    p1 = [protocols.gaussian_bell_prob(d.mean, sigma ** 2, sigma_corr2, nu) for d in (a, b)]
    out["entangled"] = np.array([[1 - p, p] for p in p1])
    out["unentangled"] = np.stack([protocols.gaussian_product_probs(d.mean, sigma ** 2, sigma_corr2, nu)
                                   for d in (a, b)])
    return out


def run_bell_gaussian(p: dict, seed: int, threads: int = 1) -> TaskOutput:
    sigma = p["sigma"]
    corr = p["sigma_corr2"] if p["sigma_corr2"] is not None else p["corr_ratio"] * sigma ** 2
    shots = np.union1d(resolve_shots(p["shots"]), [p["report_shots"]])
    names = ("entangled", "unentangled")
    units = [(ic, c, ip, name) for ic, c in enumerate(p["c_values"]) for ip, name in enumerate(names)]

    def work(unit):
        ic, c, ip, name = unit
        tables = bell_gaussian_tables(sigma, corr, c)[name]
        model = inf.ClassModel(tables)
        return inf.accuracy_sweep(tables, model, shots, p["trials"], seed, key=(ic, ip), classifier="mle")

    sweeps = _map(work, units, threads)
    results = Table(["c [rad]", "protocol", "shots", "accuracy", "stderr", "trials"])
    per_c: dict = {}
    curves = {}
    report = int(np.searchsorted(shots, p["report_shots"]))
    for (ic, c, ip, name), sw in zip(units, sweeps):
        results.rows += _sweep_rows([c, name], sw)
        est = inf.shots_to_target(sw, p["target"])
        entry = per_c.setdefault(repr(c), {"c": c})
        entry[name] = {"accuracy_at_report_shots": float(sw.metric[report]),
                       "stderr_at_report_shots": float(sw.stderr[report]),
                       "shots_to_target": est.as_dict()}
        curves[f"{name}, C={c:g}"] = (sw.shots, sw.metric)
    for entry in per_c.values():
        entry["shots_ratio"] = _ratio(entry["unentangled"]["shots_to_target"]["shots"],
                                      entry["entangled"]["shots_to_target"]["shots"])
    summary = {"sigma": sigma, "sigma_corr2": corr, "report_shots": p["report_shots"], "target": p["target"],
               "by_c": list(per_c.values())}
    figures = {"accuracy.svg": _accuracy_figure(curves, "Bell vs product, correlated Gaussian", p["target"])}
    return TaskOutput(results, summary, figures=figures)


# constrained-uniform GHZ tasks

def constrained_protocols(n: int) -> dict[str, protocols.Protocol]:
    decode, nu = protocols.ghz_offset_and_product_offsets(n)
    return {"entangled": protocols.ghz_protocol(n, decode_offset=decode),
            "unentangled": protocols.product_protocol(n, nu)}


def constrained_tables(proto: protocols.Protocol, dists_: tuple, method: str = "exact",
                       rng: np.random.Generator | None = None, convergence_ratio: float = 5000.0) -> np.ndarray:
    if method == "exact":
        return np.stack([protocols.exact_averaged_probs(proto, d) for d in dists_])
    return np.stack([protocols.averaged_probs(proto, d, rng, convergence_ratio) for d in dists_])


def run_ghz_classify(p: dict, seed: int, threads: int = 1) -> TaskOutput:
    shots = resolve_shots(p["shots"])
    names = ("entangled", "unentangled")
    units = [(n, ip, name) for n in p["n_values"] for ip, name in enumerate(names)]

    def work(unit):
        n, ip, name = unit
        proto = constrained_protocols(n)[name]
        pair = dists.constrained_class_pair(n, p["c"], noise_sigma=p["noise_sigma"])
        tables = constrained_tables(proto, pair, p["tables"], inf.stream(seed, 1, n, ip), p["convergence_ratio"])
        tables = tables / tables.sum(axis=1, keepdims=True)
        model = inf.ClassModel(tables)
        sweep = inf.accuracy_sweep(tables, model, shots, p["trials"], seed, key=(0, n, ip),
                                   classifier=p["classifier"])
        return tables, sweep

    out = _map(work, units, threads)
    results = Table(["n_qubits", "protocol", "shots", "accuracy", "stderr", "trials"])
    shots95: dict = {name: {} for name in names}
    curves = {}
    extra = Table(["n_qubits", "protocol", "outcome", "p_class_a", "p_class_b"])
    for (n, ip, name), (tables, sw) in zip(units, out):
        results.rows += _sweep_rows([n, name], sw)
        shots95[name][n] = inf.shots_to_target(sw, p["target"]).as_dict()
        curves[f"{name}, N={n}"] = (sw.shots, sw.metric)
        labels = qsim.bit_labels(int(np.log2(tables.shape[1])))
        extra.rows += [[n, name, lab, float(tables[0, k]), float(tables[1, k])] for k, lab in enumerate(labels)]
    summary = {"c": p["c"], "target": p["target"], "classifier": p["classifier"], "tables": p["tables"],
               "shots_to_target": {k: {str(n): v for n, v in d.items()} for k, d in shots95.items()}}
    summary.update(_scaling_summary(shots95, p["n_values"]))
    figures = {"accuracy.svg": _accuracy_figure(curves, "GHZ vs product classification", p["target"]),
               "shots_vs_n.svg": _shots_vs_n_figure(shots95, p["n_values"], "shots to target accuracy")}
    return TaskOutput(results, summary, {"tables.csv": extra}, figures)


def _scaling_summary(shots: dict, n_values) -> dict:
    ent = np.array([shots["entangled"][n]["shots"] for n in n_values], dtype=float)
    une = np.array([shots["unentangled"][n]["shots"] for n in n_values], dtype=float)
    ratios = [_ratio(une[i + 1], une[i]) for i in range(len(une) - 1)]
    spread = float(np.nanmax(ent) / np.nanmin(ent) - 1) if np.all(np.isfinite(ent)) else float("nan")
    return {"entangled_relative_spread": spread,
            "unentangled_step_ratios": ratios,
            "unentangled_over_entangled": [_ratio(u, e) for u, e in zip(une, ent)]}


def _shots_vs_n_figure(shots: dict, n_values, ylabel: str):
    def draw(path):
        series = {name: (list(n_values), [shots[name][n]["shots"] for n in n_values]) for name in shots}
        return plotting.line_chart(path, series, "qubits N", ylabel, logy=True)
    return draw


def estimation_tables(proto: protocols.Protocol, n: int, c_grid: np.ndarray) -> np.ndarray:
    return np.stack([protocols.exact_averaged_probs(proto, dists.ConstrainedUniform(n, c)) for c in c_grid])


def run_ghz_estimate(p: dict, seed: int, threads: int = 1) -> TaskOutput:
    shots = resolve_shots(p["shots"])
    c_grid = np.linspace(-p["c_range"], p["c_range"], p["c_points"])
    names = ("entangled", "unentangled")
    units = [(n, ip, name) for n in p["n_values"] for ip, name in enumerate(names)]

    def work(unit):
        n, ip, name = unit
        tables = estimation_tables(constrained_protocols(n)[name], n, c_grid)
        est = inf.train_linear_estimator(tables, c_grid)
        floor = float(np.mean((est.predict(tables) - c_grid) ** 2))
        sweep = inf.mse_sweep(tables, c_grid, est, shots, p["trials"], seed, key=(2, n, ip))
        return est, floor, sweep

    out = _map(work, units, threads)
    results = Table(["n_qubits", "protocol", "shots", "mse [rad^2]", "stderr [rad^2]", "trials"])
    shots_t: dict = {name: {} for name in names}
    floors: dict = {name: {} for name in names}
    curves = {}
    for (n, ip, name), (est, floor, sw) in zip(units, out):
        results.rows += _sweep_rows([n, name], sw)
        shots_t[name][n] = inf.shots_to_target(sw, p["target_mse"], "mse").as_dict()
        floors[name][str(n)] = {"infinite_shot_mse": floor, "rank": est.rank, "degenerate": est.degenerate}
        curves[f"{name}, N={n}"] = (sw.shots, sw.metric)
    summary = {"c_range": p["c_range"], "target_mse": p["target_mse"],
               "shots_to_target": {k: {str(n): v for n, v in d.items()} for k, d in shots_t.items()},
               "estimators": floors}
    summary.update(_scaling_summary(shots_t, p["n_values"]))

    def mse_fig(path):
        return plotting.line_chart(path, curves, "shots", "MSE [rad^2]", "linear estimate of C",
                                   logx=True, logy=True, hline=p["target_mse"])

    figures = {"mse.svg": mse_fig, "shots_vs_n.svg": _shots_vs_n_figure(shots_t, p["n_values"], "shots to target MSE")}
    return TaskOutput(results, summary, figures=figures)


# xxz

def ring_symmetrize(thetas: np.ndarray) -> np.ndarray:
    """All rotations and reflections of each ring configuration."""
    n = thetas.shape[1]
    rolled = [np.roll(thetas, r, axis=1) for r in range(n)]
    return np.concatenate(rolled + [r[:, ::-1] for r in rolled])


def best_product_offsets(thetas_a: np.ndarray, thetas_b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Product-protocol offsets in {-pi/2, 0}^n maximising the class-table TVD.

    Returns (offsets, tables).
    """
    n = thetas_a.shape[1]
    best = None
    for offs in itertools.product((-np.pi / 2, 0.0), repeat=n):
        proto = protocols.product_protocol(n, np.array(offs))
        tables = np.stack([protocols.per_shot_probs(proto, t).mean(axis=0) for t in (thetas_a, thetas_b)])
        d = float(inf.tvd(tables[0], tables[1]))
        if best is None or d > best[0] + 1e-15:
            best = (d, np.array(offs), tables)
    return best[1], best[2]


def run_xxz(p: dict, seed: int, threads: int = 1) -> TaskOutput:
    shots = resolve_shots(p["shots"])
    settings = xxz.MetropolisSettings(p["n_samples"], p["tau_therm"], p["tau_sweep"], p["delta_s"], p["delta_phi"])
    points = [(n, it, t) for n in p["n_values"] for it, t in enumerate(p["temperatures"])]

    def chains(point):
        n, it, t = point
        out = []
        signs = (1.0,) if p["mirror_classes"] else (1.0, -1.0)
        for ic, sign in enumerate(signs):
            params = xxz.XXZParams(n, sign * p["magnetization"], 1.0 / t, p["coupling"], p["anisotropy"])
            out.append(xxz.metropolis_sample(params, settings, inf.stream(seed, 3, n, it, ic)))
        return out

    all_chains = _map(chains, points, threads)

    def classify(unit):
        (n, it, t), ch = unit
        th_a = ch[0].thetas(p["phase_scale"])
        th_b = -th_a if p["mirror_classes"] else ch[1].thetas(p["phase_scale"])
        if p["symmetrize"]:
            th_a, th_b = ring_symmetrize(th_a), ring_symmetrize(th_b)
        ghz = protocols.ghz_protocol(n)
        tables = {"entangled": np.stack([protocols.per_shot_probs(ghz, th).mean(axis=0) for th in (th_a, th_b)])}
        offsets, tables["unentangled"] = best_product_offsets(th_a, th_b)
        sweeps = {}
        for ip, name in enumerate(("entangled", "unentangled")):
            model = inf.ClassModel(tables[name])
            sweeps[name] = inf.accuracy_sweep(tables[name], model, shots, p["trials"], seed,
                                              key=(4, n, it, ip), classifier="tvd")
        return offsets, tables, sweeps

    out = _map(classify, list(zip(points, all_chains)), threads)
    results = Table(["n_spins", "temperature [J]", "protocol", "shots", "accuracy", "stderr", "trials"])
    ens = Table(["n_spins", "temperature [J]", "class", "acceptance", "mean_energy [J]", "max_abs_sum_drift"])
    extra = {"ensembles.csv": ens}
    by_point = []
    curves = {}
    for (n, it, t), ch, (offsets, tables, sweeps) in zip(points, all_chains, out):
        entry = {"n": n, "temperature": t, "product_offsets": offsets.tolist(),
                 "tvd": {k: float(inf.tvd(v[0], v[1])) for k, v in tables.items()}}
        for name, sw in sweeps.items():
            results.rows += _sweep_rows([n, t, name], sw)
            entry[name] = inf.shots_to_target(sw, p["target"]).as_dict()
            curves[f"{name}, N={n}, T={t:g}"] = (sw.shots, sw.metric)
        entry["ratio"] = _ratio(entry["unentangled"]["shots"], entry["entangled"]["shots"])
        by_point.append(entry)
        for ic, c in enumerate(ch):
            m = p["magnetization"] * (1 if ic == 0 else -1)
            drift = float(np.max(np.abs(c.s.sum(axis=1) - m)))
            ens.rows.append([n, t, "A" if ic == 0 else "B", c.acceptance_rate, float(c.energy.mean()), drift])
            if p["export_chains"]:
                extra[f"chain_n{n}_t{it}_{'AB'[ic]}.csv"] = Table(
                    ["step"] + [f"s_{j + 1}" for j in range(n)] + [f"phi_{j + 1} [rad]" for j in range(n)]
                    + ["energy [J]"],
                    [[int(st)] + c.s[i].tolist() + c.phi[i].tolist() + [float(c.energy[i])]
                     for i, st in enumerate(c.steps)])
    largest = max(by_point, key=lambda e: (e["n"], e["temperature"]))
    summary = {"magnetization": p["magnetization"], "anisotropy": p["anisotropy"], "phase_scale": p["phase_scale"],
               "target": p["target"], "points": by_point,
               "largest_point_ratio": largest["ratio"]}

    def shots_fig(path):
        series = {}
        for name in ("entangled", "unentangled"):
            for it, t in enumerate(p["temperatures"]):
                pts = [e for e in by_point if e["temperature"] == t]
                series[f"{name}, T={t:g}"] = ([e["n"] for e in pts], [e[name]["shots"] for e in pts])
        return plotting.line_chart(path, series, "spins N", "shots to target accuracy", logy=True)

    figures = {"accuracy.svg": _accuracy_figure(curves, "XXZ magnetization classification", p["target"]),
               "shots_vs_n.svg": shots_fig}
    return TaskOutput(results, summary, extra, figures)


# featmat

def run_featmat(p: dict, seed: int, threads: int = 1) -> TaskOutput:
    if p["family"] == "gaussian":
        return _featmat_gaussian(p, seed)
    c = p["c"]
    n_values = p["n_values"]

    def work(n):
        a, b = dists.constrained_class_pair(n, c)
        feature = fm.build_feature_matrix(a, b, qsim.local_map(n))
        f = feature.entries
        pair, ent = fm.optimal_sparse_pair(f)
        par = fm.pair_separation(fm.parity_product_pair(n, -np.angle(f[0, -1])), f)
        search = (fm.best_product_separation(f, p["search_starts"], seed).value
                  if n <= p["search_max_n"] else float("nan"))
        report = fm.theorem_bound_report(f, delta=ent)
        nonzero = int(np.count_nonzero(np.abs(f) > 1e-12))
        return f, ent, par, search, report, nonzero

    out = _map(work, n_values, threads)
    results = Table(["n_qubits", "nonzero_entries", "max_abs_entry", "entangled_separation",
                     "product_parity_separation", "product_search_separation", "product_bound_rms",
                     "product_bound_mean", "shots_90_entangled", "shots_90_product"])
    extra = {}
    for n, (f, ent, par, search, report, nonzero) in zip(n_values, out):
        results.rows.append([n, nonzero, float(np.abs(f).max()), ent, par, search, report["rms_bound_total"],
                             report["mean_bound_total"], report["shots_90"], fm.shot_lower_bound(par)])
        if n <= p["export_max_n"]:
            extra[f"feature_matrix_n{n}.csv"] = Table(["a", "b", "re_F", "im_F"], fm.export_rows(f))
    summary = {"family": "constrained-uniform", "c": c,
               "rows": [dict(zip(results.columns, r)) for r in results.rows]}

    def sep_fig(path):
        series = {"entangled (GHZ)": (n_values, [r[3] for r in results.rows]),
                  "product (parity)": (n_values, [r[4] for r in results.rows]),
                  "product bound": (n_values, [r[6] for r in results.rows])}
        return plotting.line_chart(path, series, "qubits N", "separation value", logy=True)

    n_map = min(max(n_values), 4)
    f_map = out[n_values.index(n_map)][0] if n_map in n_values else out[0][0]
    figures = {"separation.svg": sep_fig,
               "feature_matrix.svg": lambda path: plotting.heatmap(
                   path, f_map, "constrained uniform |F|", qsim.bit_labels(int(np.log2(len(f_map)))))}
    return TaskOutput(results, summary, extra, figures)


def _featmat_gaussian(p: dict, seed: int) -> TaskOutput:
    a = dists.Gaussian(p["mean_a"], p["cov_a"])
    b = dists.Gaussian(p["mean_b"], p["cov_b"])
    dim = len(p["mean_a"])
    eigmap = qsim.entangling_zz_map() if p["eigenmap"] == "entangling-zz" else qsim.local_map(dim)
    f = fm.build_feature_matrix(a, b, eigmap).entries
    try:
        _, ent = fm.optimal_sparse_pair(f)
    except ValueError:
        ent = float("nan")
    search = fm.best_product_separation(f, p["search_starts"], seed).value if eigmap.n_qubits <= 6 else float("nan")
    report = fm.theorem_bound_report(f)
    results = Table(["a", "b", "re_F", "im_F"], fm.export_rows(f))
    summary = {"family": "gaussian", "eigenmap": p["eigenmap"], "sparse_pair_separation": ent,
               "product_search_separation": search, "product_bound_rms": report["rms_bound_total"],
               "product_bound_mean": report["mean_bound_total"], "by_distance": report["by_distance"]}
    figures = {"feature_matrix.svg": lambda path: plotting.heatmap(
        path, f, "Gaussian pair |F|", qsim.bit_labels(eigmap.n_qubits))}
    return TaskOutput(results, summary, figures=figures)


# quadratic

def constrained_square_sums(n_var: int, c: float, rng: np.random.Generator) -> np.ndarray:
    """Random theta with (first-half sum)^2 + (second-half sum)^2 = c."""
    half = n_var // 2
    angle = rng.uniform(0, 2 * np.pi)
    sums = np.sqrt(c) * np.array([np.cos(angle), np.sin(angle)])
    theta = rng.normal(size=n_var)
    for k in range(2):
        part = theta[k * half:(k + 1) * half]
        part += (sums[k] - part.sum()) / half
    return theta


def run_quadratic(p: dict, seed: int, threads: int = 1) -> TaskOutput:
    c, eps = p["c"], p["epsilon"]
    expected = float(np.cos(np.sqrt(c)))
    expected_slope = -float(np.sinc(2 * np.sqrt(c) / np.pi))
    results = Table(["n_var", "sample", "constraint [rad^2]", "overlap_re", "overlap_im", "expected",
                     "abs_error", "slope", "expected_slope"])
    worst, worst_slope = 0.0, 0.0
    for n_var in p["n_var_values"]:
        assign = qsim.PauliStringAssignment.build(n_var)
        rng = inf.stream(seed, 5, n_var)
        for i in range(p["n_thetas"]):
            theta = constrained_square_sums(n_var, c, rng)
            ov = qsim.quadratic_constraint_overlap(theta, assign)
            ov_eps = qsim.quadratic_constraint_overlap(theta * np.sqrt((c + eps) / c), assign)
            slope = (abs(ov_eps) ** 2 - abs(ov) ** 2) / eps
            err = abs(ov - expected)
            worst = max(worst, err)
            worst_slope = max(worst_slope, abs(slope / expected_slope - 1))
            results.rows.append([n_var, i, qsim.split_square_sums(theta, n_var), ov.real, ov.imag, expected,
                                 err, slope, expected_slope])
    summary = {"c": c, "epsilon": eps, "expected_overlap": expected, "max_abs_error": worst,
               "expected_slope": expected_slope, "max_relative_slope_error": worst_slope}

    def slope_fig(path):
        series = {f"n_var={n}": ([r[1] for r in results.rows if r[0] == n], [r[7] for r in results.rows if r[0] == n])
                  for n in p["n_var_values"]}
        return plotting.line_chart(path, series, "sample", "d|overlap|^2 / dC", "perturbation slope",
                                   hline=expected_slope)

    return TaskOutput(results, summary, figures={"slope.svg": slope_fig})


# multicopy

def single_copy_probes() -> dict[str, np.ndarray]:
    rng = inf.stream(0, 6)
    z = rng.normal(size=4) + 1j * rng.normal(size=4)
    return {"plus": qsim.plus_state(2), "bell": qsim.bell_state(), "random": z / np.linalg.norm(z)}


def run_multicopy(p: dict, seed: int, threads: int = 1) -> TaskOutput:
    phis = np.pi * np.arange(p["n_phi"]) / p["n_phi"]
    probes = single_copy_probes()
    base = {k: protocols.single_copy_density(v, 0.0, p["n_grid"]) for k, v in probes.items()}
    results = Table(["phi [rad]", "spatial", "sequential", "expected", "single_copy_max_offdiag",
                     "single_copy_max_phi_change"])
    worst_p, worst_off, worst_drift = 0.0, 0.0, 0.0
    for phi in phis:
        probs = protocols.multicopy_protocols(phi, p["n_grid"])
        expected = 0.5 * (1 + np.sin(2 * phi))
        off = drift = 0.0
        for k, probe in probes.items():
            rho = protocols.single_copy_density(probe, phi, p["n_grid"])
            off = max(off, float(np.abs(rho - np.diag(np.diag(rho))).max()))
            drift = max(drift, float(np.abs(rho - base[k]).max()))
        worst_p = max(worst_p, abs(probs["multicopy-spatial"] - expected), abs(probs["multicopy-sequential"] - expected))
        worst_off, worst_drift = max(worst_off, off), max(worst_drift, drift)
        results.rows.append([float(phi), probs["multicopy-spatial"], probs["multicopy-sequential"], float(expected),
                             off, drift])
    summary = {"n_phi": p["n_phi"], "n_grid": p["n_grid"], "max_probability_error": worst_p,
               "single_copy_max_offdiag": worst_off, "single_copy_max_phi_change": worst_drift}

    def fig(path):
        series = {"spatial": (phis, [r[1] for r in results.rows]),
                  "sequential": (phis, [r[2] for r in results.rows]),
                  "(1 + sin 2 phi)/2": (phis, [r[3] for r in results.rows])}
        return plotting.line_chart(path, series, "phi [rad]", "excited probability")

    return TaskOutput(results, summary, figures={"multicopy.svg": fig})


RUNNERS = {
    "bell-gaussian": run_bell_gaussian,
    "ghz-classify": run_ghz_classify,
    "ghz-estimate": run_ghz_estimate,
    "xxz": run_xxz,
    "featmat": run_featmat,
    "quadratic": run_quadratic,
    "multicopy": run_multicopy,
}
