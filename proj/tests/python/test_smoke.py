"""End-to-end smoke tests for the python bindings."""

import json
import math

import pytest

import newsprop as npx


def make_triangle():
    return npx.PropagationGraph(
        id="tri",
        num_nodes=3,
        edges=[(0, 1), (1, 2), (0, 2)],
        features=[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
        root=0,
        label=1,
    )


def small_config(**overrides):
    cfg = npx.SynthConfig()
    cfg.graphs_per_class = 12
    cfg.min_nodes = 5
    cfg.max_nodes = 10
    cfg.feat_dim = 4
    cfg.feature_signal = 2.0
    cfg.structure_signal = 0.2
    cfg.seed = 17
    cfg.name = "smoke"
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg


def quick_train_config():
    cfg = npx.TrainConfig()
    cfg.model = "bettergnn"
    cfg.epochs = 3
    cfg.batch_size = 16
    cfg.hidden_dim = 16
    cfg.dropout_rate = 0.2
    cfg.seed = 5
    return cfg


def test_graph_construction_and_topology():
    g = make_triangle()
    assert g.num_nodes == 3
    assert g.num_edges == 3
    assert g.feat_dim == 2
    assert npx.local_clustering(g) == [1.0, 1.0, 1.0]
    assert npx.clustering_oracle(g) == [1.0, 1.0, 1.0]
    assert npx.degree_centrality(g) == [1.0, 1.0, 1.0]
    assert npx.graph_density(g) == 1.0
    assert npx.average_degree(g) == 2.0


def test_invalid_graph_raises():
    with pytest.raises(npx.DataError):
        npx.PropagationGraph(
            id="bad", num_nodes=2, edges=[(0, 0)], features=[[1.0], [2.0]]
        )


def test_augment_appends_two_columns():
    g = make_triangle()
    a = npx.augment_features(g)
    assert a.feat_dim == 4
    rows = a.features()
    for r, row in enumerate(rows):
        assert row[:2] == g.features()[r]
        assert row[2] == 1.0  # triangle: every node adjacent to all others
        assert row[3] == 1.0  # triangle: clustering 1


def test_generate_is_deterministic():
    a = npx.generate(small_config())
    b = npx.generate(small_config())
    c = npx.generate(small_config(seed=18))
    assert len(a) == 24
    assert [g.id for g in a.graphs] == [g.id for g in b.graphs]
    assert a.graphs[0].features() == b.graphs[0].features()
    assert a.graphs[0].features() != c.graphs[0].features()
    assert sum(g.label for g in a.graphs) == 12


def test_dataset_round_trip(tmp_path):
    ds = npx.generate(small_config())
    path = str(tmp_path / "ds.ndjson")
    npx.save_dataset(ds, path)
    back = npx.load_dataset(path)
    assert back.name == ds.name
    assert len(back) == len(ds)
    assert [g.id for g in back.graphs] == [g.id for g in ds.graphs]
    assert back.graphs[3].features() == ds.graphs[3].features()
    assert back.graphs[3].edges == ds.graphs[3].edges


def test_load_missing_file_raises():
    with pytest.raises(npx.DataError):
        npx.load_dataset("/nonexistent/never.ndjson")


def test_summaries_and_report():
    ds = npx.generate(small_config())
    summaries = [npx.summarize(g) for g in ds.graphs]
    assert all(0.0 <= s.mean_clustering <= 1.0 for s in summaries)
    assert all(s.node_count == g.num_nodes for s, g in zip(summaries, ds.graphs))
    report = json.loads(npx.report_json(summaries))
    assert set(report) >= {"box", "scatter", "histogram", "correlation", "comparisons"}
    assert len(report["scatter"]) == len(ds.graphs)


def test_train_eval_and_resume(tmp_path):
    ds = npx.generate(small_config())
    cfg = quick_train_config()
    result = npx.train(ds, cfg)

    assert len(result.log) == 3
    assert 1 <= result.best_epoch <= 3
    assert all(math.isfinite(row.train_loss) for row in result.log)

    report = npx.evaluate_checkpoint(result.best, ds, split="test")
    assert 0.0 <= report.accuracy <= 1.0
    assert 0.0 <= report.auc <= 1.0
    assert report.count > 0
    assert sum(sum(row) for row in report.confusion) == report.count

    with pytest.raises(npx.UsageError):
        npx.evaluate_checkpoint(result.best, ds, split="holdout")

    best_path = str(tmp_path / "best.ckpt")
    npx.save_checkpoint(result.best, best_path)
    restored = npx.load_checkpoint(best_path)
    again = npx.evaluate_checkpoint(restored, ds, split="test")
    assert again.accuracy == report.accuracy
    assert again.macro_f1 == report.macro_f1

    short = quick_train_config()
    short.epochs = 1
    resumed = npx.resume_training(npx.train(ds, short).last, ds, 2)
    full_path = str(tmp_path / "full.ckpt")
    resumed_path = str(tmp_path / "resumed.ckpt")
    npx.save_checkpoint(result.last, full_path)
    npx.save_checkpoint(resumed.last, resumed_path)
    with open(full_path, "rb") as f, open(resumed_path, "rb") as g:
        assert f.read() == g.read()


def test_training_is_deterministic(tmp_path):
    ds = npx.generate(small_config())
    cfg = quick_train_config()
    a_path = str(tmp_path / "a.ckpt")
    b_path = str(tmp_path / "b.ckpt")
    npx.save_checkpoint(npx.train(ds, cfg).best, a_path)
    npx.save_checkpoint(npx.train(ds, cfg).best, b_path)
    with open(a_path, "rb") as f, open(b_path, "rb") as g:
        assert f.read() == g.read()


def test_ablation_smoke():
    ds = npx.generate(small_config(graphs_per_class=10))
    cfg = quick_train_config()
    cfg.model = "gcn"
    cfg.epochs = 2
    cfg.hidden_dim = 8
    report = npx.run_ablation(ds, cfg)
    for value in (
        report.accuracy_original,
        report.accuracy_feature_only,
        report.accuracy_structure_only,
    ):
        assert 0.0 <= value <= 1.0
    assert report.dataset == "smoke"
    assert report.seed == cfg.seed
    assert report.degradation_structure == pytest.approx(
        report.accuracy_original - report.accuracy_feature_only
    )


def test_edge_randomization_preserves_everything_else():
    g = npx.generate(small_config()).graphs[0]
    r = npx.randomize_edges(g, seed=3)
    assert r.num_nodes == g.num_nodes
    assert r.num_edges == g.num_edges
    assert r.features() == g.features()
    assert r.label == g.label
    d = npx.randomize_edges_preserve_degrees(g, seed=3)
    degrees = lambda graph: sorted(
        sum(1 for e in graph.edges if v in e) for v in range(graph.num_nodes)
    )
    assert degrees(d) == degrees(g)

    n = npx.gaussian_features(g, seed=3)
    assert n.edges == g.edges
    assert n.features() != g.features()


def test_grad_checks_pass():
    cases = npx.run_standard_grad_checks(seed=1, max_samples=10)
    assert len(cases) > 0
    for case in cases:
        assert case.report.passed, case.name
        assert case.report.worst_rel_err < 1e-4


def test_mix_seed_spreads():
    streams = {npx.mix_seed(0, i) for i in range(64)}
    assert len(streams) == 64
