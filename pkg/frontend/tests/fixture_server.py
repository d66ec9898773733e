"""Start a deterministic agent service for frontend integration tests.

Usage: python3 fixture_server.py PORT
"""

import sys

import uvicorn

from scdlib.agent import ScdAgent
from scdlib.corpus import Corpus
from scdlib.service import create_app
from scdlib.usem import MergeConfig, estimate_usem


def build_agent() -> ScdAgent:
    corpus = Corpus()
    corpus.ingest_plaintext(
        "apple fruit sweet. apple tree orchard. fruit sweet juice. "
        "bank river water. bank money account. river water flow. "
        "law court judge. law statute rule. court judge verdict.",
        "doc",
    )
    return ScdAgent(estimate_usem(corpus, MergeConfig(3)))


if __name__ == "__main__":
    port = int(sys.argv[1])
    uvicorn.run(create_app(build_agent()), host="127.0.0.1", port=port, log_level="warning")
