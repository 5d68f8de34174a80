# SPDX-License-Identifier: Apache-2.0
"""Python access to the attnviz tracing core."""
from ._attnviz import AttnvizError, Workbench, gen_model, split_words

__all__ = ["AttnvizError", "Workbench", "gen_model", "split_words"]
