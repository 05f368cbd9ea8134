# Copyright 2026 The IterX-cpp Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Iterative template extraction and template-filling metrics."""

import json

from iterx._iterx import (
    Corpus,
    IterxError,
    Model,
    align_bruteforce,
    align_optimal,
    cli,
    phi,
)
from iterx import _iterx

__all__ = [
    "Corpus",
    "IterxError",
    "Model",
    "align_bruteforce",
    "align_optimal",
    "cli",
    "extract",
    "phi",
    "score",
]


def _as_text(predictions):
    if isinstance(predictions, str):
        return predictions
    if "predictions" not in predictions:
        predictions = {"predictions": predictions}
    return json.dumps(predictions)


def score(corpus, predictions, variant="rme", phi="phi3"):
    """Scores predictions (dict or JSON text) and returns the report as a dict.

    variant is one of rme, ree-def, ree-impl or granular.
    """
    return json.loads(_iterx.score_json(corpus, _as_text(predictions), variant, phi))


def extract(model, corpus, head="joint", max_iter=10):
    """Returns {document id: [template dict, ...]}."""
    return json.loads(model.extract_json(corpus, head, max_iter))["predictions"]
