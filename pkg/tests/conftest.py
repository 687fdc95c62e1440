import math

import networkx as nx
import numpy as np
import pytest

from shardembed.datasets import stochastic_block_model
from shardembed.graph import Graph


def python_alias_draw(prob, alias, u):
    x = u * len(prob)
    i = min(int(x), len(prob) - 1)
    return i if x - i < prob[i] else int(alias[i])


def reference_sgns(vertex, context, samples, noise_prob, noise_alias, noise_ids,
                   negatives, neg_scale, lr, rng, clamp=10.0, max_resample=8):
    """Straight-line scalar SGNS loop over a sample stream, float32 throughout."""
    vertex = vertex.copy()
    context = context.copy()
    dim = vertex.shape[1]
    f32 = np.float32

    def step(u, v, label, scale):
        x = f32(0)
        for k in range(dim):
            x += vertex[u, k] * context[v, k]
        logit = min(max(float(x), -clamp), clamp)
        p = 1.0 / (1.0 + math.exp(-logit))
        g = f32((label - p) * lr * scale)
        for k in range(dim):
            a, b = vertex[u, k], context[v, k]
            vertex[u, k] = a + g * b
            context[v, k] = b + g * a

    for u, v in samples:
        step(u, v, 1.0, 1.0)
        for _ in range(negatives):
            for _ in range(max_resample + 1):
                t = noise_ids[python_alias_draw(noise_prob, noise_alias, rng.random())]
                if t != v:
                    break
            if t == v:
                continue
            step(u, t, 0.0, neg_scale)
    return vertex, context


@pytest.fixture
def triangle():
    return Graph.from_edges([0, 1, 2], [1, 2, 0], labels=["a", "b", "c"])


@pytest.fixture(scope="session")
def karate_edges():
    return list(nx.karate_club_graph().edges())


@pytest.fixture
def karate_file(tmp_path, karate_edges):
    path = tmp_path / "karate.tsv"
    path.write_text("# zachary\n" + "".join(f"{u}\t{v}\n" for u, v in karate_edges))
    return path


@pytest.fixture(scope="session")
def sbm():
    return stochastic_block_model([100] * 10, 0.1, 0.01, seed=0)


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n")
    return path


ACCEPTANCE = []


@pytest.fixture
def verdict():
    """Record one acceptance line and fail the test if the criterion does not hold."""
    def record(criterion, ok, detail):
        ACCEPTANCE.append((criterion, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'} {criterion}: {detail}")
        assert ok, f"{criterion}: {detail}"
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {criterion}: {detail}")
