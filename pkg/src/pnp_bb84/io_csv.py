"""Bit-stable CSV emission for scan records.

Floats are serialized with 17 significant digits so recorded parameters
re-evaluate to the recorded rate exactly; identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Sequence

from .params import Scenario
from .scans import ScanRecord

# fixed, documented column orders (README: "CSV output")
_COMMON = ("scenario", "L_km", "n_pulses", "rate", "no_key")
_PARAM_COLUMNS = {
    Scenario.NO_DECOY_INFINITE: ("lam", "delta", "mu"),
    Scenario.NO_DECOY_FINITE: (
        "lam", "delta", "mu", "m_e", "r_sample",
        "eps_pa", "eps_bar", "eps_u", "eps_e", "n_raw", "key_length"),
    Scenario.DECOY_INFINITE: ("lam_s", "lam_d", "delta", "mu_s", "mu_d", "p_s"),
    Scenario.DECOY_FINITE: (
        "lam_s", "lam_d", "delta", "mu_s", "mu_d", "p_s", "p_d", "p_v",
        "m_e", "r_sample", "eps_pa", "eps_bar", "eps_u_s", "eps_u_d",
        "eps_u_v", "eps_e_s", "n_raw", "key_length"),
}


def fmt(value: float) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    return f"{value:.17g}"


def columns_for(scenario: Scenario) -> tuple[str, ...]:
    return _COMMON + _PARAM_COLUMNS[scenario]


def _param_values(record: ScanRecord) -> list[float]:
    p, b = record.point, record.breakdown
    sc = record.scenario
    if sc is Scenario.NO_DECOY_INFINITE:
        return [p.lam, p.delta, b.mu]
    if sc is Scenario.NO_DECOY_FINITE:
        eb = p.budget
        return [p.lam, p.delta, b.mu, p.m_e, record.sample_fraction,
                eb.eps_pa, eb.eps_bar, eb.eps_u, eb.eps_e, b.n_raw,
                record.key_length]
    if sc is Scenario.DECOY_INFINITE:
        return [p.lam_s, p.lam_d, p.delta, b.mu, b.mu_decoy, 0.5]
    eb = p.budget
    return [p.lam_s, p.lam_d, p.delta, b.mu, b.mu_decoy, p.p_s, p.p_d, p.p_v,
            p.m_e, record.sample_fraction, eb.eps_pa, eb.eps_bar, eb.eps_u_s,
            eb.eps_u_d, eb.eps_u_v, eb.eps_e_s, b.n_raw, record.key_length]


def _record_row(record: ScanRecord) -> str:
    values = [record.scenario.value, fmt(record.distance_km),
              fmt(record.n_pulses), fmt(record.rate),
              "1" if record.no_key else "0"]
    values.extend(fmt(v) for v in _param_values(record))
    return ",".join(values)


def write_records(path, records: Sequence[ScanRecord]) -> None:
    """One file per scenario column contract; all records must share it."""
    if not records:
        raise ValueError("no records to write")
    scenarios = {r.scenario for r in records}
    if len(scenarios) > 1:
        # mixed finite/infinite figure files: group by scenario blocks with
        # one unified minimal header
        _write_mixed(path, records)
        return
    scenario = records[0].scenario
    lines = [",".join(columns_for(scenario))]
    lines.extend(_record_row(r) for r in records)
    _dump(path, lines)


def _write_mixed(path, records: Sequence[ScanRecord]) -> None:
    lines = ["scenario,L_km,n_pulses,rate,no_key"]
    for r in records:
        lines.append(",".join([
            r.scenario.value, fmt(r.distance_km), fmt(r.n_pulses),
            fmt(r.rate), "1" if r.no_key else "0"]))
    _dump(path, lines)


def write_sampling_fractions(path, records: Iterable[ScanRecord]) -> None:
    lines = ["scenario,L_km,n_pulses,r_sample"]
    for r in records:
        frac = r.sample_fraction
        if frac is None:
            continue
        lines.append(",".join([r.scenario.value, fmt(r.distance_km),
                               fmt(r.n_pulses), fmt(frac)]))
    _dump(path, lines)


def write_mean_photon(path, records: Iterable[ScanRecord]) -> None:
    lines = ["scenario,L_km,n_pulses,mu,mu_decoy"]
    for r in records:
        mu_d = r.mu_decoy if r.mu_decoy is not None else math.nan
        lines.append(",".join([r.scenario.value, fmt(r.distance_km),
                               fmt(r.n_pulses), fmt(r.mu), fmt(mu_d)]))
    _dump(path, lines)


def write_class_probabilities(path, records: Iterable[ScanRecord]) -> None:
    lines = ["scenario,L_km,n_pulses,p_s,p_d,p_v"]
    for r in records:
        if r.point.p_s is None:
            continue
        lines.append(",".join([r.scenario.value, fmt(r.distance_km),
                               fmt(r.n_pulses), fmt(r.point.p_s),
                               fmt(r.point.p_d), fmt(r.point.p_v)]))
    _dump(path, lines)


def write_lmax_rows(path, rows: Iterable[tuple], threshold: float) -> None:
    lines = ["scenario,n_pulses,log10_n_pulses,threshold,lmax_km"]
    for scenario, na, lmax in rows:
        log_na = math.log10(na) if math.isfinite(na) else math.inf
        lines.append(",".join([scenario.value, fmt(na), fmt(log_na),
                               fmt(threshold), fmt(lmax)]))
    _dump(path, lines)


def _dump(path, lines: list[str]) -> None:
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8",
                          newline="\n")
