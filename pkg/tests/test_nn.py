import math

import numpy as np
import pytest

from drawseg.graphbuild import ComponentGraph
from drawseg.nn import (Adam, Model, ModelConfig, ModelFormatError, TrainConfig, compute_metrics, confusion,
                        disjoint_union, format_table, load_model, predict, preset, save_model,
                        softmax_cross_entropy, split_indices, train)
from drawseg.nn import layers as L
from drawseg.nn.models import GraphBatch
from nnutil import max_relative_error, random_graph

PUBLISHED_3CLASS = [[4238, 130, 710], [105, 9229, 273], [761, 352, 9589]]
PUBLISHED_2CLASS = [[21103, 304], [345, 13559]]


# layers

def test_sage_examples():
    h = np.array([[1.0, 2.0], [3.0, 0.5]])
    eye, zero, b = np.eye(2), np.zeros((2, 2)), np.zeros(2)
    iso = L.mean_operator(2, [])
    w_self = np.array([[1.0, -2.0], [0.5, 1.0]])
    out, _ = L.sage_forward(h, iso, w_self, np.ones((2, 2)), np.array([0.1, -0.3]))
    assert np.allclose(out, np.maximum(h @ w_self + [0.1, -0.3], 0))
    assert np.allclose(L.sage_forward(h, iso, eye, zero, b)[0], h)
    swapped, _ = L.sage_forward(h, L.mean_operator(2, [(0, 1)]), zero, eye, b)
    assert np.allclose(swapped, h[::-1])


def test_sage_mean_excludes_self():
    op = L.mean_operator(3, [(0, 1), (0, 2)])
    h = np.array([[9.0], [1.0], [3.0]])
    assert np.allclose(op @ h, [[2.0], [9.0], [9.0]])


def test_gcn_examples():
    h = np.array([[1.5, -1.0]])
    w = np.array([[1.0, 2.0], [0.0, 1.0]])
    assert np.allclose(L.gcn_forward(h, L.gcn_operator(1, []), w, np.zeros(2))[0], np.maximum(h @ w, 0))
    same = np.array([[0.3, 0.7], [0.3, 0.7]])
    out, _ = L.gcn_forward(same, L.gcn_operator(2, [(0, 1)]), w, np.zeros(2))
    assert np.allclose(out[0], out[1])
    path, _ = L.gcn_forward(np.array([[1.0], [2.0], [3.0]]), L.gcn_operator(3, [(0, 1), (1, 2)]),
                            np.eye(1), np.zeros(1))
    s6 = math.sqrt(6)
    assert np.allclose(path.ravel(), [0.5 + 2 / s6, 1 / s6 + 2 / 3 + 3 / s6, 2 / s6 + 1.5], atol=1e-12)


def test_linear_examples():
    h = np.array([[0.5, 2.0], [1.0, 0.0]])
    assert np.allclose(L.linear_forward(h, np.eye(2), np.zeros(2))[0], h)
    c = np.array([0.7, -0.2])
    assert np.allclose(L.linear_forward(h, np.zeros((2, 2)), c)[0], [[0.7, 0.0], [0.7, 0.0]])
    assert np.allclose(L.linear_forward(np.array([[1.0, -1.0]]), np.eye(2), np.zeros(2))[0], [[1.0, 0.0]])
    assert np.allclose(L.linear_forward(np.array([[1.0, -1.0]]), np.eye(2), np.zeros(2), act=False)[0],
                       [[1.0, -1.0]])


@pytest.mark.parametrize("fn", ["linear", "sage", "gcn"])
def test_shape_mismatch(fn):
    h, w = np.ones((3, 4)), np.ones((5, 2))
    with pytest.raises(ValueError, match="shape mismatch"):
        if fn == "linear":
            L.linear_forward(h, w, np.zeros(2))
        elif fn == "sage":
            L.sage_forward(h, L.mean_operator(3, []), w, w, np.zeros(2))
        else:
            L.gcn_forward(h, L.gcn_operator(3, []), w, np.zeros(2))


# loss

def test_cross_entropy_examples():
    loss, _ = softmax_cross_entropy(np.zeros((4, 3)), [0, 1, 2, 1])
    assert loss == pytest.approx(math.log(3), abs=1e-12)
    loss, _ = softmax_cross_entropy(np.array([[50.0, 0.0, 0.0]]), [0])
    assert loss < 1e-20
    # ln(1+e) - 1 is the loss when the larger logit is the true class
    loss, grad = softmax_cross_entropy(np.array([[1.0, 2.0]]), [1])
    assert loss == pytest.approx(math.log(1 + math.e) - 1, abs=1e-12)
    p = 1 / (1 + math.e)
    assert np.allclose(grad, [[p, -p]])
    loss, _ = softmax_cross_entropy(np.array([[1.0, 2.0]]), [0])
    assert loss == pytest.approx(math.log(1 + math.e), abs=1e-12)


def test_cross_entropy_stable_and_errors():
    loss, grad = softmax_cross_entropy(np.array([[1000.0, -1000.0]]), [1])
    assert loss == pytest.approx(2000.0) and np.all(np.isfinite(grad))
    with pytest.raises(ValueError, match="empty input"):
        softmax_cross_entropy(np.zeros((0, 3)), [])
    with pytest.raises(ValueError, match="out of range"):
        softmax_cross_entropy(np.zeros((1, 3)), [3])


# models and gradients

def test_preset_shapes():
    assert preset("gs3", 19, 3).layer_shapes()["lin1.W"] == (32, 3)
    assert preset("gs4", 19, 3).conv_widths == (32, 64, 128, 256)
    assert preset("gs4", 19, 3).linear_widths == (128, 32)
    assert preset("gs5", 19, 3).linear_widths == (256, 128, 32)
    mlp = preset("mlp", 19, 3).layer_shapes()
    assert [k for k in mlp if k.endswith(".W")] == [f"lin{i}.W" for i in range(5)]
    gcn = preset("gcn", 19, 2).layer_shapes()
    assert "conv0.W" in gcn and "conv0.W_self" not in gcn
    with pytest.raises(ValueError, match="unknown preset"):
        preset("gs9", 19, 3)
    with pytest.raises(ValueError):
        ModelConfig("MLP", (4,), (), 19, 3)


def test_init_is_glorot_and_seeded():
    a, b = Model.create(preset("gs3", 19, 3), 5), Model.create(preset("gs3", 19, 3), 5)
    for k in a.params:
        assert np.array_equal(a.params[k], b.params[k])
    w = a.params["conv1.W_self"]
    assert np.abs(w).max() <= math.sqrt(6 / (32 + 64))
    assert np.all(a.params["conv0.b"] == 0)


@pytest.mark.parametrize("name", ["gs3", "gcn", "mlp"])
def test_gradient_check(name):
    g = random_graph(6, seed=11)
    model = Model.create(preset(name, 19, 3), seed=3)
    batch = disjoint_union([g])
    assert max_relative_error(model, batch) < 1e-4


def test_gradient_check_small_gs_with_isolated_node():
    g = random_graph(5, seed=2, dim=4, edges=[(0, 1), (1, 2)])
    model = Model.create(ModelConfig("GS", (3, 4), (5,), 4, 2), seed=1)
    g.labels = g.labels % 2
    assert max_relative_error(model, disjoint_union([g])) < 1e-6


def test_zero_dlogits_give_zero_grads():
    model = Model.create(preset("gs3", 19, 3), 0)
    logits, caches = model.forward(random_graph())
    grads = model.backward(caches, np.zeros_like(logits))
    assert set(grads) == set(model.params)
    assert all(np.all(v == 0) for v in grads.values())
    with pytest.raises(ValueError, match="missing forward cache"):
        model.backward([], logits)


def test_duplicated_node_symmetry():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(3, 19))
    x[2] = x[1]
    edges = np.array([[0, 1], [0, 2]])
    model = Model.create(preset("gs3", 19, 3), 0)
    logits, caches = model.forward(GraphBatch(x, edges))
    assert np.allclose(logits[1], logits[2])
    # the two copies receive identical upstream gradients
    d = np.zeros_like(logits)
    d[1] = d[2] = [0.3, -0.1, 0.2]
    g_both = model.backward(caches, d)
    d1 = d.copy()
    d1[2] = 0
    g_one = model.backward(caches, d1)
    for k in g_both:
        assert np.allclose(g_both[k], 2 * g_one[k], atol=1e-12)


def test_permutation_equivariance():
    g = random_graph(6, seed=4)
    model = Model.create(preset("gs3", 19, 3), 2)
    perm = np.random.default_rng(0).permutation(6)
    inv = np.argsort(perm)
    edges = np.sort(inv[g.edges], axis=1)
    h = ComponentGraph(g.controls[perm], g.features[perm], edges, g.n, labels=g.labels[perm])
    p1, p2 = model.forward(g)[0], model.forward(h)[0]
    assert np.allclose(p1[perm], p2, atol=1e-12)
    assert np.array_equal(predict(g, model)[perm], predict(h, model))


@pytest.mark.parametrize("name", ["gs3", "gcn", "mlp"])
def test_batch_union_consistency(name):
    graphs = [random_graph(6, seed=s) for s in range(3)] + [random_graph(1, seed=9)]
    model = Model.create(preset(name, 19, 3), 1)
    joint = model.forward(disjoint_union(graphs))[0]
    parts = np.vstack([model.forward(g)[0] for g in graphs])
    assert np.allclose(joint, parts, atol=1e-10, rtol=0)


def test_predict_ties_and_dimension_check():
    cfg = ModelConfig("MLP", (), (), 2, 3)
    model = Model(cfg, {"lin0.W": np.zeros((2, 3)), "lin0.b": np.array([1.0, 1.0, 0.0])})
    g = ComponentGraph(np.zeros((2, 4, 2)), np.ones((2, 2)), np.zeros((0, 2), int), 4)
    assert model.predict(g).tolist() == [0, 0]
    model.params["lin0.b"] = np.array([0.0, 2.0, 3.0])
    assert model.predict(g).tolist() == [2, 2]
    with pytest.raises(ValueError, match="columns"):
        predict(random_graph(), model)


def test_model_rejects_bad_params():
    cfg = preset("mlp", 19, 3)
    p = Model.create(cfg).params
    p["lin0.W"] = np.zeros((3, 3))
    with pytest.raises(ValueError, match="shape"):
        Model(cfg, p)


# optimizer

def test_adam_examples():
    p = {"w.W": np.array([1.0, -2.0])}
    opt = Adam(lr=1e-3, weight_decay=0.0)
    opt.step(p, {"w.W": np.zeros(2)})
    assert np.array_equal(p["w.W"], [1.0, -2.0]) and opt.step_count == 1

    p = {"w.W": np.array([0.5])}
    Adam(lr=1e-3, weight_decay=0.0).step(p, {"w.W": np.array([-3.0])})
    assert p["w.W"][0] == pytest.approx(0.5 + 1e-3, rel=1e-6)

    p = {"w.W": np.array([1.0]), "w.b": np.array([1.0])}
    opt = Adam(lr=1e-3, weight_decay=5e-4)
    opt.step(p, {"w.W": np.array([0.0]), "w.b": np.array([0.0])})
    assert opt.m["w.W"][0] == pytest.approx(0.1 * 5e-4)
    assert p["w.W"][0] < 1.0 and p["w.b"][0] == 1.0


def test_adam_state_roundtrip():
    p = {"a.W": np.array([[1.0, 2.0]])}
    opt = Adam()
    for _ in range(3):
        opt.step(p, {"a.W": np.array([[0.1, -0.2]])})
    again = Adam.from_state(opt.state_dict())
    q = {"a.W": p["a.W"].copy()}
    opt.step(p, {"a.W": np.array([[0.4, 0.4]])})
    again.step(q, {"a.W": np.array([[0.4, 0.4]])})
    assert np.array_equal(p["a.W"], q["a.W"])


# training

def test_split_indices():
    tr, va = split_indices(10, 0.8, 0)
    assert len(tr) == 8 and len(va) == 2 and set(tr) | set(va) == set(range(10))
    assert split_indices(10, 0.8, 0) == (tr, va)
    tr, va = split_indices(2, 0.99, 0)
    assert len(tr) == 1 and len(va) == 1
    with pytest.raises(ValueError):
        split_indices(1, 0.8, 0)


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(split=1.0)
    with pytest.raises(ValueError):
        TrainConfig(max_epochs=0)


def _toy_dataset(count=6):
    graphs = []
    for s in range(count):
        g = random_graph(6, seed=100 + s)
        g.labels = (g.features[:, 0] > 0).astype(np.int64) + (g.features[:, 1] > 1)
        graphs.append(g)
    return graphs


def test_train_deterministic():
    tc = TrainConfig(max_epochs=15, batch_size=2, seed=3)
    a = train(_toy_dataset(), preset("gs3", 19, 3), tc)
    b = train(_toy_dataset(), preset("gs3", 19, 3), tc)
    assert a.history.train_loss == b.history.train_loss
    assert a.history.val_accuracy == b.history.val_accuracy
    assert a.history.best_epoch == b.history.best_epoch
    for k in a.model.params:
        assert np.array_equal(a.model.params[k], b.model.params[k])
    assert len(a.history.train_ids) == 5 and len(a.history.val_ids) == 1


def test_train_keeps_best_epoch():
    res = train(_toy_dataset(), preset("mlp", 19, 3), TrainConfig(max_epochs=30, batch_size=4))
    h = res.history
    assert h.best_val_accuracy == max(h.val_accuracy)
    assert h.val_accuracy.index(h.best_val_accuracy) + 1 == h.best_epoch
    val = disjoint_union([_toy_dataset()[i] for i in h.val_ids])
    assert np.mean(res.model.predict(val) == val.labels) == h.best_val_accuracy


def test_monotone_overfit_and_prediction():
    g = random_graph(6, seed=21)
    res = train([g], preset("gs3", 19, 3), TrainConfig(max_epochs=500), validation=[g])
    assert res.history.train_loss[-1] < res.history.train_loss[0]
    assert np.array_equal(predict(g, res.model), g.labels)


def test_train_errors():
    a, b = random_graph(), random_graph(seed=1)
    b.n = 5
    with pytest.raises(ValueError, match="share n"):
        train([a, b], preset("gs3", 19, 3), TrainConfig(max_epochs=1))
    c = random_graph()
    c.labels = None
    with pytest.raises(ValueError, match="no labels"):
        train([a, c], preset("gs3", 19, 3), TrainConfig(max_epochs=1))
    with pytest.raises(ValueError, match="at least two"):
        train([a], preset("gs3", 19, 3), TrainConfig(max_epochs=1))


# metrics

def test_published_3class_metrics():
    m = compute_metrics(PUBLISHED_3CLASS)
    assert m.accuracy == pytest.approx(90.82, abs=0.005)
    for got, want in zip(m.precision, [83.03, 95.04, 90.70]):
        assert got == pytest.approx(want, abs=0.005)
    for got, want in zip(m.recall, [83.46, 96.07, 89.60]):
        assert got == pytest.approx(want, abs=0.005)


def test_published_2class_metrics_from_counts():
    m = compute_metrics(PUBLISHED_2CLASS)
    assert m.precision[0] == pytest.approx(98.39, abs=0.005)
    assert m.recall[0] == pytest.approx(98.58, abs=0.005)
    assert m.accuracy == pytest.approx(98.16, abs=0.005)


def test_metrics_edge_cases():
    m = compute_metrics(np.diag([3, 4, 5]))
    assert m.accuracy == 100 and m.precision == [100, 100, 100] and m.recall == [100, 100, 100]
    m = compute_metrics([[2, 0], [0, 0]])
    assert m.recall[1] is None and m.precision[1] is None
    with pytest.raises(ValueError, match="all-zero"):
        compute_metrics(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        compute_metrics([[1, -1], [0, 1]])


def test_confusion_and_table_text():
    m = confusion([0, 1, 2, 2], [0, 2, 2, 1], 3)
    assert m.tolist() == [[1, 0, 0], [0, 0, 1], [0, 1, 1]]
    text = format_table(compute_metrics(PUBLISHED_3CLASS), ["Contour", "Text", "Dimension"])
    lines = text.splitlines()
    assert "Recall" in lines[0] and lines[1].startswith("Contour")
    assert "83.46%" in lines[1] and lines[-2].startswith("Precision")
    assert lines[-1] == "Accuracy: 90.82%"


# serialization

def test_model_roundtrip(tmp_path):
    res = train(_toy_dataset(), preset("gs3", 19, 3), TrainConfig(max_epochs=3, batch_size=2))
    path = tmp_path / "m.json"
    save_model(path, res.model, res.optimizer, res.history)
    model, opt, meta = load_model(path)
    g = random_graph(seed=7)
    assert np.array_equal(model.forward(g)[0], res.model.forward(g)[0])
    assert opt.step_count == res.optimizer.step_count
    assert meta["best_epoch"] == res.history.best_epoch
    assert np.array_equal(model.input_scale, res.model.input_scale)


def test_model_load_errors(tmp_path):
    model = Model.create(preset("mlp", 19, 2))
    path = tmp_path / "m.json"
    save_model(path, model)
    with pytest.raises(ModelFormatError, match="class count mismatch"):
        load_model(path, num_classes=3)
    import json
    d = json.loads(path.read_text())
    d["params"]["lin0.W"] = [[0.0]]
    path.write_text(json.dumps(d))
    with pytest.raises(ModelFormatError, match="shape"):
        load_model(path)
    d["version"] = 7
    path.write_text(json.dumps(d))
    with pytest.raises(ModelFormatError, match="version"):
        load_model(path)
    path.write_text("nope")
    with pytest.raises(ModelFormatError):
        load_model(path)


def test_target_accuracy_stops_early():
    g = random_graph(6, seed=21)
    res = train([g], preset("gs3", 19, 3), TrainConfig(max_epochs=500, target_accuracy=1.0), validation=[g])
    h = res.history
    assert h.val_accuracy[-1] == 1.0 and len(h.train_loss) < 500
    assert h.best_epoch == len(h.train_loss)
