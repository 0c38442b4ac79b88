"""Toxicity label transfer for chat corpora."""

from __future__ import annotations

import json
from typing import Iterable, Mapping, Sequence

from . import _core
from ._core import ToxlabelError

__all__ = [
    "ToxlabelError",
    "system_prompt",
    "user_message",
    "parse_response",
    "transfer",
    "estimate_cost",
    "f1_scores",
    "plan_quotas",
    "draw_samples",
    "assemble",
    "run_cli",
]


def _jsonl(rows: Iterable[Mapping]) -> str:
    return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows)


def system_prompt(version: str = "v1") -> str:
    return _core.system_prompt(version)


def user_message(context: Sequence[str], text: str) -> str:
    return _core.user_message(list(context), text)


def parse_response(record_id: str, body_text: str) -> dict:
    """Parse one annotator reply. Raises ToxlabelError if it holds no usable JSON."""
    return json.loads(_core.parse_response(record_id, body_text))


def transfer(records: Iterable[Mapping], responses: Iterable[Mapping]) -> dict:
    """Agreement filter over ingested records and raw responses.

    Returns ``unified`` and ``discards`` as lists of rows plus per-source ``stats``.
    """
    out = json.loads(_core.transfer(_jsonl(records), _jsonl(responses)))
    return {
        "unified": [json.loads(l) for l in out["unified"].splitlines() if l],
        "discards": [json.loads(l) for l in out["discards"].splitlines() if l],
        "stats": out["stats"],
    }


def estimate_cost(records: Iterable[Mapping]) -> dict:
    return json.loads(_core.estimate_cost(_jsonl(records)))


def f1_scores(gold: Sequence[str], pred: Sequence[str]) -> dict:
    return json.loads(_core.f1_scores(list(gold), list(pred)))


def plan_quotas(available: Mapping[str, int], base_target: int = 50) -> dict:
    return json.loads(_core.plan_quotas(dict(available), base_target))


def draw_samples(pool: Iterable[Mapping], base_target: int = 50, seed: int = 0) -> list:
    return json.loads(_core.draw_samples(_jsonl(pool), base_target, seed))


def assemble(id: str, context: Sequence[str], line: str, token: str = "MLSNT", max_len: int = 512,
             placement: str = "before_context") -> dict:
    return json.loads(_core.assemble(id, list(context), line, token, max_len, placement))


def run_cli(args: Sequence[str]) -> tuple[int, str, str]:
    """Run the command line tool in-process; returns (status, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])
