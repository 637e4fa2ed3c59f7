"""REST interface for the study lifecycle and blob distribution.

JSON-over-HTTP for structured payloads; sample matrices travel as
immutable binary blobs.  The service holds no state of its own beyond
the study database, so replaying a request sequence against a restored
database yields identical responses.
"""

from __future__ import annotations

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from . import samples as se
from .errors import (
    AlreadyAnswered,
    BayesvisError,
    EmptyConditionalSupport,
    EmptyResponse,
    InvalidResponse,
    NotFound,
    SequenceViolation,
)
from .store import StudyStore

_STATUS = {
    NotFound: 404,
    SequenceViolation: 409,
    AlreadyAnswered: 409,
    InvalidResponse: 422,
    EmptyResponse: 422,
    EmptyConditionalSupport: 422,
}


def _ok(body, status_code=200):
    return JSONResponse({"status": "ok", "body": body}, status_code=status_code)


def _error(exc: BayesvisError):
    status = 500
    for klass, code in _STATUS.items():
        if isinstance(exc, klass):
            status = code
            break
    return JSONResponse(
        {"status": "error", "error_code": exc.code, "error_message": str(exc)},
        status_code=status)


def create_app(store: StudyStore) -> FastAPI:
    app = FastAPI(title="bayesvis study service")

    @app.exception_handler(BayesvisError)
    async def handle_framework_error(request: Request, exc: BayesvisError):
        return _error(exc)

    @app.post("/studies/{study_id}/participants")
    def subscribe(study_id: str):
        participant = store.subscribe(study_id)
        return _ok({"user_id": participant.user_id,
                    "n_tasks": len(participant.task_order)}, status_code=201)

    @app.get("/studies/{study_id}/participants/{user_id}/task")
    def get_task(study_id: str, user_id: str):
        task = store.next_task(study_id, user_id)
        if task is None:
            return _ok({
                "complete": True,
                "cumulative_reward": round(store.cumulative_reward(user_id), 1),
                "n_responses": store.response_count(user_id),
            })
        return _ok({
            "complete": False,
            "task": task.to_dict(),
            "blob_url": f"/blobs/{task.model_ref}",
            "schema_url": f"/blobs/{task.model_ref}/schema",
        })

    @app.post("/studies/{study_id}/participants/{user_id}/task")
    async def post_response(study_id: str, user_id: str, request: Request):
        body = await request.json()
        if not isinstance(body, dict) or "task_id" not in body:
            raise InvalidResponse("body must carry task_id and payload")
        record = store.record_response(
            study_id, user_id, body["task_id"],
            payload=body.get("payload", {}),
            action_log=body.get("action_log", ()))
        task = None
        for t in store.get_template(study_id).leaves():
            if t.id == record.task_id:
                task = t
                break
        out = {"reward": record.score.reward,
               "cumulative_reward": round(store.cumulative_reward(user_id), 1)}
        if task is not None and task.feedback_enabled:
            out["feedback"] = record.score.to_dict()
        return _ok(out)

    @app.get("/blobs/{blob_id}")
    def serve_blob(blob_id: str):
        data = store.blobs.raw(blob_id)
        return Response(content=data, media_type="application/octet-stream",
                        headers={"Cache-Control": "public, max-age=31536000, immutable"})

    @app.get("/blobs/{blob_id}/schema")
    def serve_schema(blob_id: str):
        return Response(content=store.blobs.schema_json(blob_id),
                        media_type="application/json",
                        headers={"Cache-Control": "public, max-age=31536000, immutable"})

    @app.get("/blobs/{blob_id}/stats")
    def serve_stats(blob_id: str):
        # server-side box statistics; lets clients verify their mirrored
        # implementation against the authoritative one
        js = store.blobs.load(blob_id)
        return _ok({v.name: se.marginal_stats(js, v.name).to_dict()
                    for v in js.schema})

    return app
