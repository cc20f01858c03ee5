"""Request models and handlers behind both the CLI and the HTTP service.

Each handler takes a pydantic request, loads the referenced files, runs the
corresponding library routine, and returns a report envelope (a plain dict,
see ``reports``).  The FastAPI app exposes the same handlers over POST; the
CLI calls them in-process unless pointed at a server.
"""

from __future__ import annotations

import math
from typing import Any

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict, Field

from .formats import ParseError, load_map, load_system
from .graph_maps import (
    direction_stable_power,
    compute_filtration,
    periodic_class_scan,
    power,
    turn_analysis,
    verify_rtt,
)
from .laminations import family_independence
from .legality import bcc_bound, critical_constant_for, legality_growth_test
from .regluing import ExponentSearchResult, exponent_search, stretch_survey, validate_system, vertex_system
from .reports import envelope
from .words import Circuit

RTT_SAMPLES = 200
RTT_SEED = 0
RTT_CONNECTING_BOUND = 12
PERIODIC_MAX_LEN = 4
PERIODIC_MAX_ITER = 8
INDEPENDENCE_MARGIN = 16
STRETCH_LENGTHS = (4, 8, 16)
STRETCH_THRESHOLD = 1.0
FLARE_MIDPOINT_LENGTH = 16
FLARE_PASS_THRESHOLD = 1.0
MAX_WITNESSES = 6


class AnalyzeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    path: str
    power: int = Field(default=1, ge=1)


class LegalityRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    path: str
    circuit: str
    iters: int = Field(default=8, ge=0)


class IndependenceRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    path: str
    depth: int = Field(default=64, ge=1)
    power: int = Field(default=0, ge=0)  # 0 resolves per vertex to the direction-stable power


class StretchRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    path: str
    vertex: str
    samples: int = Field(default=50, ge=0)
    m_max: int = Field(default=6, ge=1)
    seed: int = 0


class FlareRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    path: str
    candidates: tuple[int, ...] = (4, 8, 16, 24)
    samples: int = Field(default=100, ge=0)
    m_max: int = Field(default=12, ge=2)
    lam: float = Field(default=2.0, gt=1.0)
    girth: int = Field(default=1, ge=0)
    seed: int = 0


# ---------------------------------------------------------------------------
# analyze


def handle_analyze(req: AnalyzeRequest) -> dict[str, Any]:
    lm = load_map(req.path)
    f = power(lm.map, req.power) if req.power != 1 else lm.map
    g = f.domain

    filt = compute_filtration(f)
    strata = []
    for i, s in enumerate(filt.strata):
        pf = None
        if s.pf is not None:
            pf = {
                "value": float(s.pf.value),
                "lower": float(s.pf.lower),
                "upper": float(s.pf.upper),
                "iterations": int(s.pf.iterations),
            }
        strata.append(
            {
                "index": i,
                "class": s.cls.name,
                "edges": [g.edges[e][0] for e in s.edges],
                "pf": pf,
            }
        )

    ta = turn_analysis(f)
    turns = {
        "total": len(ta.turns),
        "illegal": [[g.arrow_name(a), g.arrow_name(b)] for a, b in ta.illegal_turns],
        "fixed_directions": [g.arrow_name(a) for a in ta.fixed_directions],
    }

    bcc = bcc_bound(f)
    cancellation = {
        "fold_bound": int(bcc.fold_bound),
        "empirical_max": int(bcc.empirical_max),
        "witness": None if bcc.empirical_witness is None else list(bcc.empirical_witness),
    }

    criticals = []
    for r in filt.eg_indices:
        criticals.append(
            {
                "stratum": int(r),
                "pf": float(filt.strata[r].pf.value),
                "critical": float(critical_constant_for(f, filt, r)),
            }
        )

    rtt = verify_rtt(
        f, filt, connecting_bound=RTT_CONNECTING_BOUND, samples=RTT_SAMPLES, seed=RTT_SEED
    )
    rtt_strata = []
    for s in rtt.strata:
        rtt_strata.append(
            {
                "stratum": int(s.stratum),
                "image_paths_legal": s.image_paths_legal,
                "bad_image_turns": [
                    [eid, [g.arrow_name(a) for a in t]] for eid, t in s.bad_image_turns
                ],
                "legal_turn_images_ok": s.legal_turn_images_ok,
                "directions_stay": s.directions_stay,
                "escaping_directions": [g.arrow_name(a) for a in s.escaping_directions],
                "connecting_paths_checked": int(s.connecting_paths_checked),
                "connecting_failures": list(s.connecting_failures),
                "enumeration_truncated": s.enumeration_truncated,
            }
        )
    train_track = {
        "partial": rtt.partial,
        "consistent": rtt.consistent,
        "bound": int(rtt.bound),
        "samples": int(rtt.samples),
        "strata": rtt_strata,
    }

    periodic = [
        {"word": g.format_word(p.word), "period": int(p.period)}
        for p in periodic_class_scan(f, max_len=PERIODIC_MAX_LEN, max_iter=PERIODIC_MAX_ITER)
    ]

    report = {
        "map": lm.name,
        "graph": g.name,
        "rank": int(g.rank),
        "strata": strata,
        "turns": turns,
        "cancellation": cancellation,
        "critical_constants": criticals,
        "train_track_checks": train_track,
        "periodic_classes": periodic,
    }
    config = {
        "path": req.path,
        "power": req.power,
        "rtt_samples": RTT_SAMPLES,
        "rtt_seed": RTT_SEED,
        "rtt_connecting_bound": RTT_CONNECTING_BOUND,
        "periodic_max_len": PERIODIC_MAX_LEN,
        "periodic_max_iter": PERIODIC_MAX_ITER,
    }
    return envelope("analyze", config, lm.inputs, report, seed=RTT_SEED)


# ---------------------------------------------------------------------------
# legality


def handle_legality(req: LegalityRequest) -> dict[str, Any]:
    lm = load_map(req.path)
    f = lm.map
    beta = Circuit(f.domain, f.domain.parse_word(req.circuit))
    res = legality_growth_test(f, beta, req.iters)
    rows = [
        {
            "n": int(r.n),
            "length": int(r.length),
            "ratio": float(r.ratio),
            "segments": len(r.segments),
        }
        for r in res.rows
    ]
    report = {
        "map": lm.name,
        "circuit": f.domain.format_word(beta.word),
        "rows": rows,
        "epsilon": float(res.epsilon),
        "n0": int(res.n0),
        "mode": res.mode,
        "critical": float(res.critical),
        "depth": int(res.depth),
    }
    config = {"path": req.path, "circuit": req.circuit, "iters": req.iters, "mode": res.mode}
    return envelope("legality", config, lm.inputs, report)


# ---------------------------------------------------------------------------
# independence


_SEVERITY = {"independent-to-depth": 0, "no-attachments": 0, "inconclusive": 1, "dependent": 2}


def _worst(summaries) -> str:
    worst = "independent-to-depth"
    for s in summaries:
        if _SEVERITY[s] > _SEVERITY[worst]:
            worst = s
    return worst


def _validated_system(path: str):
    ls = load_system(path)
    val = validate_system(ls.system, ls.spec)
    if not val.valid:
        raise ValueError("; ".join(str(e) for e in val.errors))
    return ls


def _entry_labels(system, vertex: str) -> list[str]:
    labels = []
    for eid, u, v in system.base.edges:
        for end, w in ((0, u), (1, v)):
            if w == vertex:
                labels.append(f"{eid}[{'uv'[end]}]")
    return labels


def _family_to_dict(fam, labels: list[str]) -> dict[str, Any]:
    pairs = []
    for p in fam.pairs:
        rep = p.report
        verdicts = [c.verdict.verdict for c in rep.cells]
        witness = None
        if rep.witness is not None:
            witness = []
            for idx in rep.witness:
                rc = rep.rays[idx]
                witness.append(
                    {
                        "cover": labels[rc.cover],
                        "coset": rc.rep,
                        "role": rc.role,
                        "direction": rep.cells[0].verdict and rc.ray.graph.arrow_name(rc.seed)
                        if False
                        else rc.ray.graph.arrow_name(rc.seed),
                    }
                )
        pairs.append(
            {
                "left": labels[p.left],
                "right": labels[p.right],
                "summary": rep.summary,
                "cells": len(rep.cells),
                "inconclusive": verdicts.count("inconclusive"),
                "coinciding": verdicts.count("asymptotic"),
                "depth": int(rep.depth),
                "doubled": rep.doubled,
                "witness": witness,
            }
        )
    return {"pairs": pairs, "summary": fam.summary}


def handle_independence(req: IndependenceRequest) -> dict[str, Any]:
    ls = _validated_system(req.path)
    rows = []
    for v in ls.system.base.vertices:
        vs = vertex_system(ls.system, ls.spec, v)
        labels = _entry_labels(ls.system, v)
        if len(vs.entries) < 2:
            rows.append(
                {
                    "vertex": v,
                    "attachments": len(vs.entries),
                    "power": None,
                    "summary": "no-attachments",
                    "pairs": [],
                    "skipped_pairs": 0,
                }
            )
            continue
        # entries that share an automorphism pair form one comparable family
        groups: list[tuple[tuple, list[int]]] = []
        for i, (_, _, fwd, inv) in enumerate(vs.entries):
            for key, members in groups:
                if key == (fwd, inv):
                    members.append(i)
                    break
            else:
                groups.append(((fwd, inv), [i]))
        skipped = sum(
            len(a[1]) * len(b[1]) for x, a in enumerate(groups) for b in groups[x + 1 :]
        )
        pair_dicts: list[dict[str, Any]] = []
        summaries: list[str] = []
        resolved_powers: list[int] = []
        for (fwd, inv), members in groups:
            if len(members) < 2:
                continue
            if req.power:
                k = req.power
            else:
                k = math.lcm(direction_stable_power(fwd), direction_stable_power(inv))
            resolved_powers.append(k)
            covers = [vs.entries[i][1] for i in members]
            fam = family_independence(
                power(fwd, k), power(inv, k), covers, req.depth, INDEPENDENCE_MARGIN
            )
            fam_dict = _family_to_dict(fam, [labels[i] for i in members])
            pair_dicts.extend(fam_dict["pairs"])
            summaries.append(fam.summary)
        if not summaries:
            # every group is a singleton: nothing comparable at this vertex
            rows.append(
                {
                    "vertex": v,
                    "attachments": len(vs.entries),
                    "power": None,
                    "summary": "no-attachments",
                    "pairs": [],
                    "skipped_pairs": skipped,
                }
            )
            continue
        rows.append(
            {
                "vertex": v,
                "attachments": len(vs.entries),
                "power": max(resolved_powers),
                "summary": _worst(summaries),
                "pairs": pair_dicts,
                "skipped_pairs": skipped,
            }
        )
    report = {
        "system": ls.name,
        "depth": req.depth,
        "margin": INDEPENDENCE_MARGIN,
        "power_mode": "explicit" if req.power else "direction-stable",
        "vertices": rows,
        "summary": _worst(r["summary"] for r in rows),
    }
    config = {
        "path": req.path,
        "depth": req.depth,
        "power": req.power,
        "margin": INDEPENDENCE_MARGIN,
    }
    return envelope("independence", config, ls.inputs, report)


# ---------------------------------------------------------------------------
# stretch


def handle_stretch(req: StretchRequest) -> dict[str, Any]:
    ls = _validated_system(req.path)
    vs = vertex_system(ls.system, ls.spec, req.vertex)
    m_values = tuple(range(1, req.m_max + 1))
    survey = stretch_survey(
        vs,
        req.samples,
        lengths=STRETCH_LENGTHS,
        m_values=m_values,
        seed=req.seed,
        threshold=STRETCH_THRESHOLD,
    )
    cells = [
        {
            "length": int(c.length),
            "m": int(c.m),
            "samples": int(c.samples),
            "passed": int(c.passed),
            "fraction": float(c.fraction),
        }
        for c in survey.cells
    ]
    failures = [
        {
            "word": r.word,
            "m": int(r.m),
            "lengths": [[eid, int(a), int(b)] for eid, a, b in r.lengths],
        }
        for r in survey.failures[:MAX_WITNESSES]
    ]
    report = {
        "system": ls.name,
        "vertex": req.vertex,
        "cells": cells,
        "failures": failures,
        "length_estimate": survey.length_estimate,
        "m_estimate": survey.m_estimate,
        "attained": survey.attained,
        "threshold": float(survey.threshold),
    }
    config = {
        "path": req.path,
        "vertex": req.vertex,
        "samples": req.samples,
        "m_max": req.m_max,
        "seed": req.seed,
        "lengths": list(STRETCH_LENGTHS),
        "threshold": STRETCH_THRESHOLD,
    }
    return envelope("stretch", config, ls.inputs, report, seed=req.seed)


# ---------------------------------------------------------------------------
# flare


def handle_flare(req: FlareRequest) -> dict[str, Any]:
    ls = _validated_system(req.path)
    m_values = tuple(range(2, req.m_max + 1, 2))
    if req.samples == 0:
        # nothing sampled is never evidence
        result = ExponentSearchResult((), None, req.seed)
    else:
        result = exponent_search(
            ls.system,
            ls.spec,
            candidates=req.candidates,
            samples=req.samples,
            m_values=m_values,
            seed=req.seed,
            lam=req.lam,
            girth_threshold=req.girth,
            midpoint_length=FLARE_MIDPOINT_LENGTH,
            pass_threshold=FLARE_PASS_THRESHOLD,
        )
    reports = []
    for fr in result.reports:
        rows = [
            {
                "m": int(r.m),
                "samples": int(r.samples),
                "passed": int(r.passed),
                "failed": int(r.failed),
                "below_girth": int(r.below_girth),
                "fraction": float(r.fraction),
            }
            for r in fr.rows
        ]
        witnesses = [
            {
                "m": int(w.m),
                "start": w.start,
                "path": w.path,
                "midpoint": w.midpoint,
                "anchor": int(w.anchor),
                "cosets": [int(c) for c in w.cosets],
                "lengths": [int(x) for x in w.lengths],
            }
            for w in fr.witnesses[:MAX_WITNESSES]
        ]
        reports.append(
            {
                "exponent": int(fr.exponent),
                "lam": float(fr.lam),
                "girth_threshold": int(fr.girth_threshold),
                "rows": rows,
                "stable_m": fr.stable_m,
                "ratio_bound": float(fr.ratio_bound),
                "passed": fr.passed,
                "witnesses": witnesses,
            }
        )
    report = {
        "system": ls.name,
        "candidates": list(req.candidates),
        "m_values": list(m_values),
        "reports": reports,
        "smallest_passing": result.smallest_passing,
        "passed": result.smallest_passing is not None,
    }
    config = {
        "path": req.path,
        "candidates": list(req.candidates),
        "samples": req.samples,
        "m_max": req.m_max,
        "lambda": req.lam,
        "girth": req.girth,
        "seed": req.seed,
        "midpoint_length": FLARE_MIDPOINT_LENGTH,
        "pass_threshold": FLARE_PASS_THRESHOLD,
    }
    return envelope("flare", config, ls.inputs, report, seed=req.seed)


# ---------------------------------------------------------------------------
# HTTP wiring

app = FastAPI(title="fga")


def _run(handler, req) -> dict[str, Any]:
    try:
        return handler(req)
    except (ParseError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.get("/health")
def health() -> dict[str, str]:
    from fga import __version__

    return {"status": "ok", "version": __version__}


@app.post("/analyze")
def analyze(req: AnalyzeRequest) -> dict[str, Any]:
    return _run(handle_analyze, req)


@app.post("/legality")
def legality(req: LegalityRequest) -> dict[str, Any]:
    return _run(handle_legality, req)


@app.post("/independence")
def independence(req: IndependenceRequest) -> dict[str, Any]:
    return _run(handle_independence, req)


@app.post("/stretch")
def stretch(req: StretchRequest) -> dict[str, Any]:
    return _run(handle_stretch, req)


@app.post("/flare")
def flare(req: FlareRequest) -> dict[str, Any]:
    return _run(handle_flare, req)
