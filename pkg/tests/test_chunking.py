from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from wabot.engine.state import chunk_text


def test_under_budget_single_chunk():
    plan = chunk_text("x" * 300, 1000)
    assert plan.chunks == ("x" * 300,)


def test_exactly_at_limit_single_chunk():
    plan = chunk_text("y" * 1000, 1000)
    assert len(plan.chunks) == 1


def test_limit_below_minimum_rejected():
    with pytest.raises(ValueError):
        chunk_text("hello", 63)


def test_paragraph_text_splits_at_boundaries():
    paragraphs = [f"Paragraph {i}. " + "word " * 150 for i in range(4)]
    text = "\n\n".join(p.strip() for p in paragraphs)
    assert len(text) > 2000
    plan = chunk_text(text, 1000)
    # oracle: re-concatenate and compare, then scan the split positions
    assert "".join(plan.chunks) == text
    assert all(len(c) <= 1000 for c in plan.chunks)
    assert len(plan.chunks) >= 3
    for chunk in plan.chunks[:-1]:
        assert chunk[-1] in (" ", "\n")


def test_unbroken_text_hard_splits():
    text = "z" * 2500
    plan = chunk_text(text, 1000)
    assert "".join(plan.chunks) == text
    assert [len(c) for c in plan.chunks] == [1000, 1000, 500]


@given(
    text=st.text(
        alphabet=st.sampled_from(list("ab \né\U0001F600")), min_size=0, max_size=3000
    ),
    limit=st.integers(min_value=64, max_value=400),
)
def test_chunk_conservation_property(text, limit):
    plan = chunk_text(text, limit)
    assert "".join(plan.chunks) == text
    assert all(len(c) <= limit for c in plan.chunks)
    assert (len(plan.chunks) == 1) == (len(text) <= limit)
    # whenever a chunk does not end at whitespace, the budget window from its
    # start must have offered no usable boundary
    offset = 0
    for chunk in plan.chunks[:-1]:
        window = text[offset : offset + limit]
        if chunk[-1] not in (" ", "\n"):
            assert " " not in window[1:] and "\n" not in window[1:]
        offset += len(chunk)
