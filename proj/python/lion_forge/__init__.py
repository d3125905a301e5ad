# Copyright 2026 The lion-forge Authors
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

"""Tune-cross-evaluation quality scoring and dataset refinement."""

from ._core import (
    HoldOutViolation,
    IncompleteError,
    ValidationError,
    __version__,
    ablate_mq,
    assemble,
    bleu,
    cider,
    combo_members,
    dataset_quality,
    meta_quality,
    meteor,
    mock_generate,
    portion_count,
    prepare,
    quality,
    refine,
    refine_s1,
    refine_s3,
    rouge_l,
    sample_quality,
    score,
    score_sample,
    tokenize,
    verify,
)

__all__ = [
    "HoldOutViolation",
    "IncompleteError",
    "ValidationError",
    "__version__",
    "ablate_mq",
    "assemble",
    "bleu",
    "cider",
    "combo_members",
    "dataset_quality",
    "meta_quality",
    "meteor",
    "mock_generate",
    "portion_count",
    "prepare",
    "quality",
    "refine",
    "refine_s1",
    "refine_s3",
    "rouge_l",
    "sample_quality",
    "score",
    "score_sample",
    "tokenize",
    "verify",
]
