"""Friedman test, Iman-Davenport correction and Holm post-hoc comparison
against a control algorithm.

Conventions: in a :class:`ResultMatrix` higher values are better, so within a
problem the best algorithm gets rank 1. ``n`` is the number of problems and
``k`` the number of algorithms.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import stats as st

from .errors import ContractViolation, ParameterError, SingularityError

ASYMPTOTIC_Z = 8.0
DEFAULT_ALPHA = 0.05


@dataclass(frozen=True, eq=False)
class ResultMatrix:
    problems: tuple[str, ...]
    algorithms: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if v.shape != (len(self.problems), len(self.algorithms)):
            raise ParameterError(f"values shape {v.shape} does not match labels")
        if len(self.problems) < 2 or len(self.algorithms) < 2:
            raise ParameterError("need at least 2 problems and 2 algorithms")
        if not np.all(np.isfinite(v)):
            raise ParameterError("result matrix has missing or non-finite cells")

    @property
    def n(self) -> int:
        return len(self.problems)

    @property
    def k(self) -> int:
        return len(self.algorithms)


def read_result_matrix(path: str | Path) -> ResultMatrix:
    """CSV with a ``problem`` column followed by one column per algorithm."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "problem":
        raise ParameterError(f"{path}: first column must be 'problem'")
    algorithms = tuple(rows[0][1:])
    problems, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(algorithms) + 1 or any(c.strip() == "" for c in row[1:]):
            raise ParameterError(f"{path}: line {lineno}: missing cells")
        try:
            values.append([float(c) for c in row[1:]])
        except ValueError as exc:
            raise ParameterError(f"{path}: line {lineno}: {exc}") from None
        problems.append(row[0])
    return ResultMatrix(tuple(problems), algorithms, np.array(values))


def write_result_matrix(m: ResultMatrix, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["problem", *m.algorithms])
        for name, row in zip(m.problems, m.values):
            w.writerow([name, *(f"{x:.12g}" for x in row)])


def friedman_ranks(m: ResultMatrix) -> np.ndarray:
    """Average rank per algorithm; ties share the mean of their positions."""
    ranks = np.vstack([st.rankdata(-row, method="average") for row in m.values])
    return ranks.mean(axis=0)


def friedman_statistic(avg_ranks: Sequence[float], n: int) -> float:
    r = np.asarray(avg_ranks, dtype=np.float64)
    k = len(r)
    return 12.0 * n / (k * (k + 1)) * (float(np.sum(r**2)) - k * (k + 1) ** 2 / 4.0)


def iman_davenport(chi2: float, n: int, k: int) -> float:
    """``(n-1) chi2 / (n(k-1) - chi2)``; singular for a perfect ordering."""
    denom = n * (k - 1) - chi2
    if math.isclose(denom, 0.0, abs_tol=1e-12 * max(1.0, n * (k - 1))):
        raise SingularityError(
            f"Iman-Davenport statistic undefined: chi2 = n(k-1) = {n * (k - 1)}"
        )
    return (n - 1) * chi2 / denom


def log_normal_tail(z: float) -> float:
    """``log P(Z > z)`` for a standard normal ``Z``.

    Beyond ``z = 8`` the asymptotic Mills-ratio series is summed in the log
    domain, truncated at its smallest term, so tiny tails keep full relative
    precision instead of underflowing.
    """
    if z <= ASYMPTOTIC_Z:
        return float(st.norm.logsf(z))
    z2 = z * z
    series, term, j = 1.0, 1.0, 1
    while True:
        nxt = -term * (2 * j - 1) / z2
        if abs(nxt) >= abs(term) or abs(nxt) < 1e-17:
            break
        series += nxt
        term = nxt
        j += 1
    return -z2 / 2.0 - math.log(z * math.sqrt(2.0 * math.pi)) + math.log(series)


def normal_tail(z: float) -> float:
    return math.exp(log_normal_tail(z))


@dataclass(frozen=True)
class Comparison:
    algorithm: str
    z: float
    p: float
    apv: float = float("nan")


def control_z_and_p(
    avg_ranks: Mapping[str, float], control: str, n: int
) -> list[Comparison]:
    """z score and one-sided p of every algorithm against the control.

    ``z = (R_control - R_i) / sqrt(k(k+1) / 6n)``, so algorithms ranked worse
    than the control get negative scores; ``p`` is the upper normal tail of
    ``|z|``. Output follows the input order, control excluded.
    """
    if control not in avg_ranks:
        raise ParameterError(f"control {control!r} is not among the algorithms")
    k = len(avg_ranks)
    se = math.sqrt(k * (k + 1) / (6.0 * n))
    r0 = avg_ranks[control]
    out = []
    for alg, r in avg_ranks.items():
        if alg == control:
            continue
        z = (r0 - r) / se
        out.append(Comparison(alg, z, normal_tail(abs(z))))
    return out


def holm_apv(p_sorted: Sequence[float], k: int) -> list[float]:
    """Holm adjusted p-values, ``min(max_{j<=i} (k-j) p_j, 1)``.

    ``p_sorted`` holds the ``k-1`` unadjusted p-values in ascending order.
    """
    p = list(p_sorted)
    if any(b < a for a, b in zip(p, p[1:])):
        raise ContractViolation("p-values must be sorted ascending")
    if len(p) != k - 1:
        raise ContractViolation(f"expected {k - 1} p-values for k={k}, got {len(p)}")
    out = []
    running = 0.0
    for j, pj in enumerate(p, start=1):
        running = max(running, (k - j) * pj)
        out.append(min(running, 1.0))
    return out


@dataclass(frozen=True)
class FriedmanReport:
    algorithms: tuple[str, ...]
    avg_ranks: tuple[float, ...]
    n: int
    k: int
    friedman_stat: float
    friedman_p: float
    iman_davenport: float | None
    iman_davenport_p: float | None
    singular: bool
    control: str
    comparisons: tuple[Comparison, ...]
    alpha: float

    def rank_table(self) -> list[tuple[str, float]]:
        """(algorithm, average rank), best first."""
        return sorted(zip(self.algorithms, self.avg_ranks), key=lambda t: (t[1], t[0]))

    def rejected(self) -> list[str]:
        return [c.algorithm for c in self.comparisons if c.apv < self.alpha]


def report_from_ranks(
    avg_ranks: Mapping[str, float],
    n: int,
    control: str,
    alpha: float = DEFAULT_ALPHA,
) -> FriedmanReport:
    """Full battery from average ranks and the number of problems."""
    algorithms = tuple(avg_ranks)
    ranks = tuple(float(avg_ranks[a]) for a in algorithms)
    k = len(algorithms)
    chi2 = friedman_statistic(ranks, n)
    try:
        fid = iman_davenport(chi2, n, k)
        fid_p = float(st.f.sf(fid, k - 1, (k - 1) * (n - 1)))
        singular = False
    except SingularityError:
        fid = fid_p = None
        singular = True
    comps = sorted(control_z_and_p(avg_ranks, control, n), key=lambda c: (c.p, c.algorithm))
    apvs = holm_apv([c.p for c in comps], k)
    comps = tuple(Comparison(c.algorithm, c.z, c.p, a) for c, a in zip(comps, apvs))
    return FriedmanReport(
        algorithms, ranks, n, k, chi2, float(st.chi2.sf(chi2, k - 1)),
        fid, fid_p, singular, control, comps, alpha,
    )


def friedman_report(
    m: ResultMatrix, control: str, alpha: float = DEFAULT_ALPHA
) -> FriedmanReport:
    ranks = friedman_ranks(m)
    return report_from_ranks(dict(zip(m.algorithms, ranks.tolist())), m.n, control, alpha)


def write_report(report: FriedmanReport, out_dir: str | Path, stem: str = "friedman") -> list[Path]:
    """Two CSVs laid out like the rank and Holm tables, plus full JSON."""
    out_dir = Path(out_dir)
    ranks_path = out_dir / f"{stem}_ranks.csv"
    holm_path = out_dir / f"{stem}_holm.csv"
    json_path = out_dir / f"{stem}_report.json"
    with open(ranks_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["position", "algorithm", "average_rank"])
        for i, (alg, r) in enumerate(report.rank_table(), start=1):
            w.writerow([i, alg, f"{r:.6g}"])
    with open(holm_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["position", "algorithm", "z", "p", "apv", "reject"])
        for i, c in enumerate(report.comparisons, start=1):
            w.writerow([i, c.algorithm, f"{c.z:.4f}", f"{c.p:.6e}", f"{c.apv:.6e}", c.apv < report.alpha])
    payload = asdict(report)
    json_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return [ranks_path, holm_path, json_path]
