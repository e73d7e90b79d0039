"""Request dispatch: one JSON object in, one JSON object out.

Every line gets exactly one response. The response id echoes the request id
verbatim (null when the line could not be parsed). All failures come back as
{"ok": false, "error": ...}; nothing raises across this boundary.
"""

from __future__ import annotations

import json

from .service import MlmService, RequestError


def handle_line(line: str, service: MlmService) -> dict:
    try:
        request = json.loads(line)
        if not isinstance(request, dict):
            raise ValueError("request is not a JSON object")
    except ValueError as exc:
        return {"id": None, "ok": False, "error": f"malformed_request: {exc}"}

    request_id = request.get("id")
    op = request.get("op")
    try:
        if op == "fill_mask":
            dist = service.fill_mask(
                request.get("tokens"),
                request.get("mask_index", -1),
                request.get("top_k"),
            )
            return {"id": request_id, "ok": True, "dist": dist}
        if op == "embed":
            return {"id": request_id, "ok": True, "vector": service.embed(request.get("tokens"))}
        if op == "tokenize":
            tokens, offsets = service.tokenize(request.get("text"))
            return {"id": request_id, "ok": True, "tokens": tokens, "offsets": offsets}
        return {"id": request_id, "ok": False, "error": f"unknown_op: {op!r}"}
    except RequestError as exc:
        return {"id": request_id, "ok": False, "error": str(exc)}
    except (TypeError, ValueError) as exc:
        return {"id": request_id, "ok": False, "error": f"bad request: {exc}"}


def encode(response: dict) -> str:
    return json.dumps(response, ensure_ascii=False)
