"""HTTP+JSON API exposing the agent to clients (e.g. the browser UI).

The service layer adds no semantics: every mutating endpoint delegates to the
corresponding agent operation.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import errors
from .agent import FeedbackEvent, Query, ScdAgent
from .corpus import Corpus, InfluenceProfile, ingest_xml_law
from .usem import MergeConfig, estimate_usem

_ERROR_STATUS = {
    errors.UnknownScd: 404,
    errors.UnknownSentence: 404,
    errors.UnknownVersion: 404,
    errors.EmptyQuery: 400,
    errors.EmptyModel: 409,
    errors.NotAssociated: 409,
    errors.ConfigError: 400,
}


def _http(exc: errors.ScdError) -> HTTPException:
    status = _ERROR_STATUS.get(type(exc), 500)
    return HTTPException(status_code=status, detail=str(exc))


class QueryRequest(BaseModel):
    text: str
    topK: int = 5
    allowZero: bool = False


class FeedbackRequest(BaseModel):
    kind: str
    payload: dict = {}


class IfiRequest(BaseModel):
    thetaRefresh: int | None = None
    thetaFresh: int | None = None


class RestoreRequest(BaseModel):
    version: int | None = None


def create_app(agent: ScdAgent) -> FastAPI:
    app = FastAPI(title="scd-ira")
    app.state.agent = agent
    # The browser UI is served separately from the API.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.post("/query")
    def query(req: QueryRequest):
        try:
            response = agent.answer(Query(req.text, req.topK), allow_zero=req.allowZero)
        except errors.ScdError as exc:
            raise _http(exc)
        return response.to_json()

    @app.post("/feedback")
    def feedback(req: FeedbackRequest):
        try:
            agent.perceive(FeedbackEvent(req.kind, req.payload))
        except errors.ScdError as exc:
            raise _http(exc)
        except KeyError as exc:
            raise HTTPException(status_code=400, detail=f"missing payload field: {exc}")
        return {"version": agent.model.version, "digest": agent.digest()}

    @app.post("/ifi")
    def ifi(req: IfiRequest):
        try:
            applied = agent.enhance(req.thetaRefresh, req.thetaFresh)
        except errors.ScdError as exc:
            raise _http(exc)
        return {"version": agent.model.version, "applied": applied, "digest": agent.digest()}

    @app.get("/model/versions")
    def versions():
        return {
            "current": agent.model.version,
            "versions": agent.versions(),
            "digest": agent.digest(),
        }

    @app.post("/model/restore")
    def restore(req: RestoreRequest):
        try:
            agent.restore(req.version)
        except errors.ScdError as exc:
            raise _http(exc)
        return {"version": agent.model.version, "digest": agent.digest()}

    @app.get("/scd/{scd_id}")
    def scd(scd_id: int):
        try:
            return agent.scd_info(scd_id)
        except errors.ScdError as exc:
            raise _http(exc)

    @app.get("/sentence/{window_id}")
    def sentence(window_id: int):
        try:
            return agent.sentence_info(window_id)
        except errors.ScdError as exc:
            raise _http(exc)

    @app.get("/counters")
    def counters():
        return agent.counters.as_dict()

    return app


DEFAULT_CONFIG = {
    "corpus": None,  # path: directory of .txt files or a statute .xml file
    "influence": "constant",
    "targetScdCount": None,  # default: one SCD per ~4 sentences
    "thetaRefresh": 10,
    "thetaFresh": 100,
    "snapshotDir": None,
    "host": "127.0.0.1",
    "port": 8000,
    "xmlConfig": None,
}


def load_config(path) -> dict:
    cfg = dict(DEFAULT_CONFIG)
    with open(path, "r", encoding="utf-8") as fh:
        cfg.update(json.load(fh))
    if not cfg["corpus"]:
        raise errors.ConfigError("config must name a corpus path")
    return cfg


def build_corpus(path, xml_config=None) -> Corpus:
    p = Path(path)
    if p.is_dir():
        corpus = Corpus()
        for f in sorted(p.glob("*.txt")):
            corpus.ingest_plaintext(f.read_text(encoding="utf-8"), f.stem)
        if not corpus.documents:
            raise errors.ConfigError(f"no .txt files in {p}")
        return corpus
    if p.suffix.lower() == ".xml":
        return ingest_xml_law(p, xml_config)
    corpus = Corpus()
    corpus.ingest_plaintext(p.read_text(encoding="utf-8"), p.stem)
    return corpus


def agent_from_config(cfg: dict) -> ScdAgent:
    corpus = build_corpus(cfg["corpus"], cfg.get("xmlConfig"))
    profile = InfluenceProfile(cfg.get("influence", "constant"))
    k = cfg.get("targetScdCount") or max(1, corpus.sentence_count // 4)
    model = estimate_usem(corpus, MergeConfig(k), profile)
    return ScdAgent(
        model,
        theta_refresh=cfg.get("thetaRefresh", 10),
        theta_fresh=cfg.get("thetaFresh", 100),
        snapshot_dir=cfg.get("snapshotDir"),
    )


def serve(config_path) -> None:
    import uvicorn

    cfg = load_config(config_path)
    app = create_app(agent_from_config(cfg))
    uvicorn.run(app, host=cfg["host"], port=cfg["port"], log_level="warning")
