import os
import sys
from dataclasses import dataclass

import numpy as np
import pytest
from scipy import ndimage

sys.path.insert(0, os.path.dirname(__file__))

CORPUS_SIZE = 200
CORPUS_SEED = 0


@dataclass
class CorpusItem:
    seed: int
    graph: object
    ink_components: int
    thin_components: int
    skel_components: int
    thin_blocks: int  # 2x2 all-ink windows in the thinned mask
    skel_blocks: int
    skeleton_seconds: float


def count_2x2(mask: np.ndarray) -> int:
    m = mask.astype(bool)
    return int(np.sum(m[:-1, :-1] & m[1:, :-1] & m[:-1, 1:] & m[1:, 1:]))


def components8(mask: np.ndarray) -> int:
    return int(ndimage.label(mask, structure=np.ones((3, 3), dtype=int))[1])


def build_corpus(count=CORPUS_SIZE, base_seed=CORPUS_SEED):
    from drawseg.pipeline import vectorize
    from drawseg.synthgen import generate, spec_from_seed

    items = []
    for i in range(count):
        d = generate(spec_from_seed(base_seed + i))
        v = vectorize(d.gray, gt=d.gt)
        items.append(CorpusItem(
            base_seed + i, v.graph,
            components8(v.ink.mask), components8(v.thinned.mask), components8(v.skeleton.mask),
            count_2x2(v.thinned.mask), count_2x2(v.skeleton.mask), v.seconds["skeleton"]))
    return items


@pytest.fixture(scope="session")
def corpus():
    """The 200-drawing seeded corpus, vectorised and labelled once per session."""
    return build_corpus()


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one acceptance result line; returns the pass flag for the assert."""
    def _report(number: int, passed: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
